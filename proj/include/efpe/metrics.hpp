#pragma once

// The two y-axis quantities of the benchmark: the Nash (saddle) gap of a
// profile in the unperturbed game, and the maximum regret at any single
// information set. Infoset regret treats the infoset as reached with
// probability one: node beliefs come from opponent x chance reach by Bayes'
// rule, the current value plays the profile onward, and the best value
// best-responds at the infoset and at every own infoset below it.

#include <algorithm>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include "sequence_form.hpp"
#include "treeplex.hpp"

namespace efpe {

// Saddle gap max_y' <x, Ay'> - min_x' <x', Ay> over the unperturbed
// polytopes, via exact best responses (two counted traversals).
inline double nash_gap(const SequenceFormProblem& p, std::span<const double> x,
                       std::span<const double> y) {
  if (!validate_point(p.X(), x) || !validate_point(p.Y(), y))
    throw std::invalid_argument("nash_gap: infeasible profile");
  std::vector<double> gx = p.apply_A(y);
  for (int i = 0; i < p.A.rows; ++i) gx[i] += p.a1[i];
  std::vector<double> gy = p.apply_At(x);
  for (int i = 0; i < p.A.cols; ++i) gy[i] += p.a2[i];
  return dot(p.a1, x) - dot(p.a2, y) + linear_opt(p.Y(), gy, /*maximize=*/true) -
         linear_opt(p.X(), gx, /*maximize=*/false);
}

// Same gap within the xi-perturbed polytopes.
inline double perturbed_saddle_gap(const SequenceFormProblem& p, double xi,
                                   std::span<const double> x, std::span<const double> y) {
  std::vector<double> gx = p.apply_A(y);
  for (int i = 0; i < p.A.rows; ++i) gx[i] += p.a1[i];
  std::vector<double> gy = p.apply_At(x);
  for (int i = 0; i < p.A.cols; ++i) gy[i] += p.a2[i];
  return dot(p.a1, x) - dot(p.a2, y) + linear_opt(p.Y(), gy, true, xi) -
         linear_opt(p.X(), gx, false, xi);
}

struct InfosetRegret {
  int infoset = -1;
  double reach_mass = 0.0;  // total opponent x chance mass before normalizing
  double regret = 0.0;
  bool zero_reach_fallback = false;  // beliefs fell back to uniform
};

struct InfosetRegretTable {
  std::vector<InfosetRegret> rows;  // indexed by infoset id
  double max_regret = 0.0;
};

// Regret table from (possibly unnormalized) behavioral profiles; beliefs are
// renormalized per infoset, so scaling the opponent's reach uniformly does
// not change any regret.
inline InfosetRegretTable infoset_regret_table(const SequenceFormProblem& p,
                                               const BehavioralProfile& b1,
                                               const BehavioralProfile& b2, int player) {
  const GameTree& g = p.game;
  const int N = static_cast<int>(g.nodes.size());
  const int opponent = 1 - player;

  // Opponent x chance reach per node (own actions contribute factor 1).
  std::vector<double> reach(N, 0.0);
  std::vector<std::vector<int>> members(g.num_infosets(player));
  std::function<void(int, double)> down = [&](int id, double r) {
    reach[id] = r;
    const GameNode& n = g.nodes[id];
    if (n.kind == NodeKind::Decision && n.player == player)
      members[n.infoset].push_back(id);
    for (std::size_t c = 0; c < n.children.size(); ++c) {
      double f = 1.0;
      if (n.kind == NodeKind::Chance)
        f = n.chance_probs[c];
      else if (n.kind == NodeKind::Decision && n.player == opponent)
        f = (opponent == kP1 ? b1 : b2)[n.infoset][c];
      down(n.children[c], r * f);
    }
  };
  down(0, 1.0);

  // Expected value for `player` at every node under the current profile.
  // Strategies are renormalized per infoset so unnormalized inputs only
  // rescale reaches, never play.
  std::vector<double> ev(N, 0.0);
  const double sign = player == kP1 ? 1.0 : -1.0;
  std::function<double(int)> eval = [&](int id) -> double {
    const GameNode& n = g.nodes[id];
    double v = 0.0;
    switch (n.kind) {
      case NodeKind::Terminal:
        v = sign * n.payoff1;
        break;
      case NodeKind::Chance:
        for (std::size_t c = 0; c < n.children.size(); ++c)
          v += n.chance_probs[c] * eval(n.children[c]);
        break;
      case NodeKind::Decision: {
        const auto& sigma = (n.player == kP1 ? b1 : b2)[n.infoset];
        double norm = 0.0;
        for (double s : sigma) norm += s;
        for (std::size_t a = 0; a < n.children.size(); ++a)
          v += (norm > 0.0 ? sigma[a] / norm : 1.0 / n.children.size()) *
               eval(n.children[a]);
        break;
      }
    }
    ev[id] = v;
    return v;
  };
  eval(0);

  InfosetRegretTable table;
  table.rows.resize(g.num_infosets(player));

  std::vector<int> choice(g.num_infosets(player), -1);
  std::vector<double> memo(N);
  std::vector<char> memo_ok(N);

  // Value of a node with own decisions resolved by `choice` (deeper infosets
  // decided first), opponent and chance fixed.
  std::function<double(int)> brv = [&](int id) -> double {
    if (memo_ok[id]) return memo[id];
    const GameNode& n = g.nodes[id];
    double v = 0.0;
    switch (n.kind) {
      case NodeKind::Terminal:
        v = sign * n.payoff1;
        break;
      case NodeKind::Chance:
        for (std::size_t c = 0; c < n.children.size(); ++c)
          v += n.chance_probs[c] * brv(n.children[c]);
        break;
      case NodeKind::Decision:
        if (n.player == player) {
          v = brv(n.children[choice[n.infoset]]);
        } else {
          const auto& sigma = (n.player == kP1 ? b1 : b2)[n.infoset];
          double norm = 0.0;
          for (double s : sigma) norm += s;
          for (std::size_t a = 0; a < n.children.size(); ++a)
            v += (norm > 0.0 ? sigma[a] / norm : 1.0 / n.children.size()) *
                 brv(n.children[a]);
        }
        break;
    }
    memo[id] = v;
    memo_ok[id] = 1;
    return v;
  };

  for (int h = 0; h < g.num_infosets(player); ++h) {
    InfosetRegret& row = table.rows[h];
    row.infoset = h;
    double total = 0.0;
    for (int id : members[h]) total += reach[id];
    row.reach_mass = total;
    row.zero_reach_fallback = !(total > 0.0);

    auto belief = [&](int id) {
      return row.zero_reach_fallback ? 1.0 / members[h].size() : reach[id] / total;
    };

    double current = 0.0;
    for (int id : members[h]) current += belief(id) * ev[id];

    // Gather own infosets in the subtrees with belief-weighted node masses.
    std::vector<std::vector<std::pair<int, double>>> below(g.num_infosets(player));
    std::vector<int> found;
    std::function<void(int, double)> gather = [&](int id, double mass) {
      const GameNode& n = g.nodes[id];
      if (n.kind == NodeKind::Decision && n.player == player) {
        if (below[n.infoset].empty()) found.push_back(n.infoset);
        below[n.infoset].emplace_back(id, mass);
      }
      for (std::size_t c = 0; c < n.children.size(); ++c) {
        double f = 1.0;
        if (n.kind == NodeKind::Chance)
          f = n.chance_probs[c];
        else if (n.kind == NodeKind::Decision && n.player == opponent) {
          const auto& sigma = (opponent == kP1 ? b1 : b2)[n.infoset];
          double norm = 0.0;
          for (double s : sigma) norm += s;
          f = norm > 0.0 ? sigma[c] / norm : 1.0 / n.children.size();
        }
        gather(n.children[c], mass * f);
      }
    };
    for (int id : members[h]) gather(id, belief(id));

    // Decide deepest-first (branching count orders own infosets by depth).
    std::sort(found.begin(), found.end(), [&](int a, int b) {
      const Treeplex& t = p.treeplex[player];
      return t.simplex(p.map[player].simplex_of_infoset[a]).branching >
             t.simplex(p.map[player].simplex_of_infoset[b]).branching;
    });
    std::fill(memo_ok.begin(), memo_ok.end(), 0);
    double best_at_h = 0.0;
    for (int hh : found) {
      double best = -std::numeric_limits<double>::infinity();
      int best_a = 0;
      for (int a = 0; a < g.infoset_actions(player, hh); ++a) {
        double s = 0.0;
        for (const auto& [id, mass] : below[hh])
          s += mass * brv(g.nodes[id].children[a]);
        if (s > best) {
          best = s;
          best_a = a;
        }
      }
      choice[hh] = best_a;
      if (hh == h) best_at_h = best;
    }
    row.regret = best_at_h - current;
    table.max_regret = std::max(table.max_regret, row.regret);
    for (int hh : found) choice[hh] = -1;
  }
  return table;
}

// Spec-facing wrapper over sequence-form inputs.
inline InfosetRegretTable infoset_max_regret(const SequenceFormProblem& p,
                                             std::span<const double> x,
                                             std::span<const double> y, int player) {
  if (!validate_point(p.X(), x) || !validate_point(p.Y(), y))
    throw std::invalid_argument("infoset_max_regret: infeasible profile");
  return infoset_regret_table(p, behavioral_profile(p, kP1, x),
                              behavioral_profile(p, kP2, y), player);
}

struct ProfileMetrics {
  long long traversals = 0;
  double nash_gap = 0.0;
  double max_infoset_regret = 0.0;
  InfosetRegretTable table_p1, table_p2;
};

inline ProfileMetrics evaluate_profile(const SequenceFormProblem& p,
                                       std::span<const double> x,
                                       std::span<const double> y) {
  ProfileMetrics m;
  m.traversals = p.traversals;
  m.nash_gap = nash_gap(p, x, y);
  m.table_p1 = infoset_max_regret(p, x, y, kP1);
  m.table_p2 = infoset_max_regret(p, x, y, kP2);
  m.max_infoset_regret = std::max(m.table_p1.max_regret, m.table_p2.max_regret);
  return m;
}

inline void write_regret_csv(const SequenceFormProblem& p, int player,
                             const InfosetRegretTable& table, std::ostream& os) {
  os << "infoset_id,label,reach_mass,regret,zero_reach_fallback\n";
  for (const auto& row : table.rows)
    os << row.infoset << "," << p.game.infoset_label(player, row.infoset) << ","
       << row.reach_mass << "," << row.regret << "," << (row.zero_reach_fallback ? 1 : 0)
       << "\n";
}

}  // namespace efpe
