#include "efpe/treeplex.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <fstream>

#include "efpe/game_tree.hpp"
#include "efpe/sequence_form.hpp"
#include "test_helpers.hpp"

using namespace efpe;

namespace {

Treeplex chain_treeplex() {
  // Size-2 root whose first branch carries a size-2 child.
  return build_treeplex({{2, kRootSeq}, {2, 0}});
}

double brute_force_max_l1(const Treeplex& t) {
  double best = 0.0;
  for (const auto& q : testutil::enumerate_vertices(t)) {
    double s = 0.0;
    for (double v : q) s += v;
    best = std::max(best, s);
  }
  return best;
}

double brute_force_max_l1_cutoff(const Treeplex& t, int r) {
  double best = 0.0;
  for (const auto& q : testutil::enumerate_vertices(t)) {
    double s = 0.0;
    for (const auto& sx : t.simplexes()) {
      if (sx.branching > r) continue;
      for (int i = sx.first; i < sx.end(); ++i) s += q[i];
    }
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

TEST_CASE("single simplex treeplex") {
  Treeplex t = build_treeplex({{3, kRootSeq}});
  CHECK(t.num_sequences() == 3);
  CHECK(t.num_simplexes() == 1);
  CHECK(t.depth() == 0);
  CHECK(t.simplex(0).branching == 0);
  CHECK(t.max_l1() == 1.0);
  CHECK(t.max_l1_cutoff(0) == 1.0);
  CHECK(t.max_l1_cutoff(5) == 1.0);
}

TEST_CASE("cartesian product of simplexes") {
  Treeplex t = build_treeplex({{2, kRootSeq}, {2, kRootSeq}});
  CHECK(t.num_sequences() == 4);
  CHECK(t.depth() == 0);
  CHECK(t.simplex(0).branching == 0);
  CHECK(t.simplex(1).branching == 0);
  CHECK(t.max_l1() == 2.0);
}

TEST_CASE("single branching") {
  Treeplex t = chain_treeplex();
  CHECK(t.num_sequences() == 4);
  CHECK(t.depth() == 1);
  CHECK(t.simplex(1).branching == 1);
  CHECK(t.simplex(0).depth == 1);
  CHECK(t.simplex(1).depth == 0);
  // Cutoff removes the child at r=0.
  CHECK(t.max_l1_cutoff(0) == 1.0);
  CHECK(t.max_l1_cutoff(1) == 2.0);
  CHECK(t.max_l1() == 2.0);
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(build_treeplex({{0, kRootSeq}}), structure_error);
  // Parent sequence inside the simplex's own range (self reference).
  CHECK_THROWS_AS(build_treeplex({{2, 0}}), structure_error);
  // Forward reference: simplex 0 hangs off simplex 1.
  CHECK_THROWS_AS(build_treeplex({{2, 2}, {2, kRootSeq}}), structure_error);
  CHECK_THROWS_AS(build_treeplex({{2, 7}}), structure_error);
}

TEST_CASE("validate_point basics") {
  Treeplex d2 = build_treeplex({{2, kRootSeq}});
  CHECK(validate_point(d2, std::vector<double>{0.5, 0.5}, {0.0}));
  CHECK_FALSE(validate_point(d2, std::vector<double>{0.8, 0.2}, {0.3}));
  CHECK(validate_point(d2, std::vector<double>{0.8, 0.2}, {0.2}));
  CHECK_FALSE(validate_point(d2, std::vector<double>{0.7, 0.2}, {0.0}));  // sum != 1
  CHECK_FALSE(validate_point(d2, std::vector<double>{1.2, -0.2}, {0.0}));
  CHECK_THROWS_AS(validate_point(d2, std::vector<double>{1.0}, {0.0}),
                  std::invalid_argument);
}

TEST_CASE("validate_point on a chain, all constraints by hand") {
  Treeplex t = chain_treeplex();
  // Root (0.6, 0.4); child under branch 0 sums to 0.6 and 0.3 >= 0.1*0.6.
  CHECK(validate_point(t, std::vector<double>{0.6, 0.4, 0.3, 0.3}, {0.1}));
  // Child sum mismatch.
  CHECK_FALSE(validate_point(t, std::vector<double>{0.6, 0.4, 0.3, 0.2}, {0.1}));
  // Perturbation violated in the child: 0.05 < 0.1 * 0.6.
  CHECK_FALSE(validate_point(t, std::vector<double>{0.6, 0.4, 0.55, 0.05}, {0.1}));
}

TEST_CASE("uniform behavioral strategy is feasible for generated games") {
  for (const char* name : {"kuhn", "pennies", "threat", "leduc3"}) {
    SequenceFormProblem p = sequence_form(make_game(name));
    for (int pl : {kP1, kP2}) {
      const Treeplex& t = p.treeplex[pl];
      std::vector<double> behavioral(t.num_sequences());
      for (const auto& s : t.simplexes())
        for (int i = s.first; i < s.end(); ++i) behavioral[i] = 1.0 / s.size;
      TreeplexPoint q = behavioral_to_sequence(t, behavioral);
      double xi = 1.0 / t.max_simplex_size();
      CHECK(validate_point(t, q, {xi}));
      CHECK(validate_point(t, q, {0.5 * xi}));
    }
  }
}

TEST_CASE("max_l1 equals brute force on small treeplexes") {
  std::vector<Treeplex> cases;
  cases.push_back(build_treeplex({{3, kRootSeq}}));
  cases.push_back(chain_treeplex());
  cases.push_back(build_treeplex({{2, kRootSeq}, {2, 0}, {2, 1}, {3, 2}}));
  cases.push_back(build_treeplex({{2, kRootSeq}, {2, kRootSeq}, {2, 0}, {2, 3}}));
  cases.push_back(build_treeplex({{3, kRootSeq}, {2, 0}, {2, 0}, {2, 1}}));
  for (const Treeplex& t : cases) {
    REQUIRE(t.num_sequences() <= 12);
    CHECK(t.max_l1() == Catch::Approx(brute_force_max_l1(t)).epsilon(0));
    for (int r = 0; r <= t.depth() + 1; ++r)
      CHECK(t.max_l1_cutoff(r) ==
            Catch::Approx(brute_force_max_l1_cutoff(t, r)).epsilon(0));
  }
}

TEST_CASE("kuhn treeplex metrics match brute force over pure strategies") {
  SequenceFormProblem p = sequence_form(build_kuhn());
  for (int pl : {kP1, kP2}) {
    const Treeplex& t = p.treeplex[pl];
    CHECK(t.max_l1() == Catch::Approx(brute_force_max_l1(t)).epsilon(0));
    for (int r = 0; r <= t.depth(); ++r)
      CHECK(t.max_l1_cutoff(r) ==
            Catch::Approx(brute_force_max_l1_cutoff(t, r)).epsilon(0));
    CHECK(t.max_l1_cutoff(t.depth()) == t.max_l1());
  }
  // P1 can reach both of a card's infosets, one card at a time dealt 3 ways.
  CHECK(p.X().max_l1() == 6.0);
  CHECK(p.X().depth() == 1);
  CHECK(p.Y().max_l1() == 6.0);
  CHECK(p.Y().depth() == 0);
}

TEST_CASE("cutoff at depth equals max_l1 on generated treeplexes") {
  for (const char* name : {"kuhn", "leduc3"}) {
    SequenceFormProblem p = sequence_form(make_game(name));
    for (int pl : {kP1, kP2}) {
      const Treeplex& t = p.treeplex[pl];
      CHECK(t.max_l1_cutoff(t.depth()) == t.max_l1());
      for (int r = 0; r < t.depth(); ++r)
        CHECK(t.max_l1_cutoff(r) <= t.max_l1_cutoff(r + 1));
    }
  }
}

TEST_CASE("treeplex text serialization matches golden") {
  SequenceFormProblem p = sequence_form(build_kuhn());
  for (auto [pl, file] : {std::pair{kP1, "kuhn_treeplex_p1.txt"},
                          std::pair{kP2, "kuhn_treeplex_p2.txt"}}) {
    std::ifstream in(std::string(EFPE_GOLDEN_DIR) + "/" + file);
    REQUIRE(in.good());
    std::string golden((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
    CHECK(p.treeplex[pl].to_text() == golden);
  }
}
