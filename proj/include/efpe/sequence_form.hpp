#pragma once

// Sequence-form saddle-point problem  min_{x in X} max_{y in Y} <x, Ay>
// assembled from a perfect-recall game tree. The payoff matrix is stored in
// minimizer form (negated player-1 payoff) and decomposed around the empty
// sequences: entries against a real opponent sequence land in the bilinear
// block A, entries against the opponent's empty sequence land in the affine
// vectors a1 / a2 (and a0 when both sequences are empty), so the objective is
//   a0 + <a1, x> + <a2, y> + <x, A y>.

#include <algorithm>
#include <array>
#include <functional>
#include <vector>

#include "game_tree.hpp"
#include "treeplex.hpp"

namespace efpe {

struct SparseMatrix {
  struct Entry {
    int row = 0;
    int col = 0;
    double value = 0.0;
  };

  int rows = 0;
  int cols = 0;
  std::vector<Entry> entries;  // sorted row-major, deduplicated

  void finalize() {
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<Entry> merged;
    merged.reserve(entries.size());
    for (const Entry& e : entries) {
      if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
        merged.back().value += e.value;
      else
        merged.push_back(e);
    }
    entries = std::move(merged);
  }

  void multiply(std::span<const double> y, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Entry& e : entries) out[e.row] += e.value * y[e.col];
  }

  void multiply_transpose(std::span<const double> x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (const Entry& e : entries) out[e.col] += e.value * x[e.row];
  }

  double max_abs() const {
    double m = 0.0;
    for (const Entry& e : entries) m = std::max(m, std::abs(e.value));
    return m;
  }
};

// Correspondence between a player's infosets and their treeplex simplexes.
struct PlayerMap {
  std::vector<int> simplex_of_infoset;
  std::vector<int> infoset_of_simplex;
};

struct SequenceFormProblem {
  GameTree game;
  std::array<Treeplex, 2> treeplex;  // X, Y
  SparseMatrix A;                    // rows = P1 sequences, cols = P2 sequences
  std::vector<double> a1, a2;        // empty-sequence column / row
  double a0 = 0.0;                   // both sequences empty
  std::array<PlayerMap, 2> map;
  long long traversal_cost = 0;      // game tree node count

  // Shared tree-traversal counter: one apply_A or apply_At call is one
  // traversal. Runs own their problem copy, so a plain counter suffices.
  mutable long long traversals = 0;

  const Treeplex& X() const { return treeplex[kP1]; }
  const Treeplex& Y() const { return treeplex[kP2]; }

  int seq_index(int player, int infoset, int action) const {
    return treeplex[player].simplex(map[player].simplex_of_infoset[infoset]).first + action;
  }

  std::vector<double> apply_A(std::span<const double> y) const {
    if (static_cast<int>(y.size()) != A.cols)
      throw std::invalid_argument("apply_A: dimension mismatch");
    std::vector<double> out(A.rows);
    A.multiply(y, out);
    ++traversals;
    return out;
  }

  std::vector<double> apply_At(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != A.rows)
      throw std::invalid_argument("apply_At: dimension mismatch");
    std::vector<double> out(A.cols);
    A.multiply_transpose(x, out);
    ++traversals;
    return out;
  }

  // Minimizer-form objective <x, Ay> including the affine parts. Not counted
  // as a traversal; used for reporting and tests.
  double objective_value(std::span<const double> x, std::span<const double> y) const {
    std::vector<double> ay(A.rows);
    A.multiply(y, ay);
    return a0 + dot(a1, x) + dot(a2, y) + dot(x, ay);
  }

  // Expected payoff to player 1 under the profile (undoes the sign flip).
  double p1_value(std::span<const double> x, std::span<const double> y) const {
    return -objective_value(x, y);
  }
};

// ||A|| = max |entry| over every stored payoff coefficient.
inline double matrix_norm(const SequenceFormProblem& p) {
  double m = std::max(p.A.max_abs(), std::abs(p.a0));
  for (double v : p.a1) m = std::max(m, std::abs(v));
  for (double v : p.a2) m = std::max(m, std::abs(v));
  return m;
}

namespace detail {

// Own sequence of an infoset: the (infoset, action) pair of the player's
// previous decision, or (-1, -1) at the top.
struct OwnSeq {
  int infoset = -1;
  int action = -1;
  bool operator==(const OwnSeq&) const = default;
};

}  // namespace detail

// Transforms a perfect-recall game into the sequence-form problem. Raises a
// structure_error naming the offending infoset when two nodes of an infoset
// are preceded by different own sequences.
inline SequenceFormProblem sequence_form(const GameTree& game) {
  game.validate();
  SequenceFormProblem p;
  p.game = game;
  p.traversal_cost = static_cast<long long>(game.nodes.size());

  // Pass 1: discover infosets in depth-first order (own parents first) and
  // record + verify each infoset's own parent sequence.
  std::array<std::vector<detail::OwnSeq>, 2> parent_of;   // per infoset
  std::array<std::vector<bool>, 2> seen;
  std::array<std::vector<int>, 2> order;                  // infosets, topological
  for (int pl : {kP1, kP2}) {
    parent_of[pl].resize(game.num_infosets(pl));
    seen[pl].assign(game.num_infosets(pl), false);
  }

  std::function<void(int, detail::OwnSeq, detail::OwnSeq)> discover =
      [&](int id, detail::OwnSeq own1, detail::OwnSeq own2) {
        const GameNode& n = game.nodes[id];
        if (n.kind == NodeKind::Terminal) return;
        if (n.kind == NodeKind::Decision) {
          detail::OwnSeq& own = n.player == kP1 ? own1 : own2;
          if (!seen[n.player][n.infoset]) {
            seen[n.player][n.infoset] = true;
            parent_of[n.player][n.infoset] = own;
            order[n.player].push_back(n.infoset);
          } else if (!(parent_of[n.player][n.infoset] == own)) {
            throw structure_error("perfect recall violation at infoset '" +
                                  game.infoset_label(n.player, n.infoset) + "'");
          }
          for (std::size_t a = 0; a < n.children.size(); ++a) {
            detail::OwnSeq next{n.infoset, static_cast<int>(a)};
            if (n.player == kP1)
              discover(n.children[a], next, own2);
            else
              discover(n.children[a], own1, next);
          }
        } else {
          for (int c : n.children) discover(c, own1, own2);
        }
      };
  discover(0, {}, {});

  // Pass 2: build each player's treeplex in discovery order.
  for (int pl : {kP1, kP2}) {
    p.map[pl].simplex_of_infoset.assign(game.num_infosets(pl), -1);
    p.map[pl].infoset_of_simplex = order[pl];
    for (int j = 0; j < static_cast<int>(order[pl].size()); ++j)
      p.map[pl].simplex_of_infoset[order[pl][j]] = j;

    std::vector<SimplexDescriptor> desc(order[pl].size());
    // first-index offsets follow listing order; compute them to resolve
    // parent sequence indices.
    std::vector<int> first(order[pl].size() + 1, 0);
    for (int j = 0; j < static_cast<int>(order[pl].size()); ++j)
      first[j + 1] = first[j] + game.infoset_actions(pl, order[pl][j]);
    for (int j = 0; j < static_cast<int>(order[pl].size()); ++j) {
      desc[j].size = game.infoset_actions(pl, order[pl][j]);
      const detail::OwnSeq& par = parent_of[pl][order[pl][j]];
      desc[j].parent_seq =
          par.infoset < 0 ? kRootSeq
                          : first[p.map[pl].simplex_of_infoset[par.infoset]] + par.action;
    }
    p.treeplex[pl] = build_treeplex(desc);
  }

  // Pass 3: accumulate negated payoff x chance reach per terminal into the
  // cell addressed by the players' sequences (-1 = empty sequence).
  p.A.rows = p.X().num_sequences();
  p.A.cols = p.Y().num_sequences();
  p.a1.assign(p.A.rows, 0.0);
  p.a2.assign(p.A.cols, 0.0);

  std::function<void(int, int, int, double)> accumulate =
      [&](int id, int seq1, int seq2, double chance) {
        const GameNode& n = game.nodes[id];
        switch (n.kind) {
          case NodeKind::Terminal: {
            double v = -n.payoff1 * chance;  // minimizer form
            if (v == 0.0) return;
            if (seq1 < 0 && seq2 < 0)
              p.a0 += v;
            else if (seq1 < 0)
              p.a2[seq2] += v;
            else if (seq2 < 0)
              p.a1[seq1] += v;
            else
              p.A.entries.push_back({seq1, seq2, v});
            return;
          }
          case NodeKind::Chance:
            for (std::size_t c = 0; c < n.children.size(); ++c)
              accumulate(n.children[c], seq1, seq2, chance * n.chance_probs[c]);
            return;
          case NodeKind::Decision:
            for (std::size_t a = 0; a < n.children.size(); ++a) {
              int s = p.seq_index(n.player, n.infoset, static_cast<int>(a));
              accumulate(n.children[a], n.player == kP1 ? s : seq1,
                         n.player == kP2 ? s : seq2, chance);
            }
            return;
        }
      };
  accumulate(0, -1, -1, 1.0);
  p.A.finalize();
  return p;
}

// Behavioral profile (per game infoset) from a sequence-form point;
// zero-mass infosets fall back to uniform.
inline BehavioralProfile behavioral_profile(const SequenceFormProblem& p, int player,
                                            std::span<const double> q) {
  std::vector<double> b = sequence_to_behavioral(p.treeplex[player], q);
  BehavioralProfile prof(p.game.num_infosets(player));
  for (int h = 0; h < p.game.num_infosets(player); ++h) {
    int first = p.treeplex[player].simplex(p.map[player].simplex_of_infoset[h]).first;
    int sz = p.game.infoset_actions(player, h);
    prof[h].assign(b.begin() + first, b.begin() + first + sz);
  }
  return prof;
}

// Pushes a behavioral profile to sequence form (realization weights).
inline TreeplexPoint sequence_form_point(const SequenceFormProblem& p, int player,
                                         const BehavioralProfile& prof) {
  const Treeplex& t = p.treeplex[player];
  std::vector<double> b(t.num_sequences());
  for (int h = 0; h < p.game.num_infosets(player); ++h) {
    int first = t.simplex(p.map[player].simplex_of_infoset[h]).first;
    for (std::size_t a = 0; a < prof[h].size(); ++a) b[first + a] = prof[h][a];
  }
  return behavioral_to_sequence(t, b);
}

}  // namespace efpe
