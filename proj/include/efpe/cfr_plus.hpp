#pragma once

// CFR+ baseline: alternating updates (player 1 pass, then player 2 against
// the refreshed strategy), regret-matching+ with cumulative regrets clipped
// at zero, and linearly weighted strategy averaging. Each player pass is one
// tree traversal.

#include <array>
#include <functional>
#include <vector>

#include "game_tree.hpp"
#include "sequence_form.hpp"

namespace efpe {

struct CfrState {
  std::array<std::vector<std::vector<double>>, 2> regret_plus;    // >= 0 always
  std::array<std::vector<std::vector<double>>, 2> strategy_sum;   // linear weights
  std::array<BehavioralProfile, 2> current;                       // regret-matching+
  // Own-parent (infoset, action) link per infoset, for reach accumulation.
  std::array<std::vector<std::pair<int, int>>, 2> parent_link;
  long t = 0;
};

namespace detail {

inline void regret_matching_plus(const std::vector<double>& regrets,
                                 std::vector<double>& sigma) {
  double total = 0.0;
  for (double r : regrets) total += r;
  if (total > 0.0)
    for (std::size_t a = 0; a < regrets.size(); ++a) sigma[a] = regrets[a] / total;
  else
    std::fill(sigma.begin(), sigma.end(), 1.0 / sigma.size());
}

}  // namespace detail

inline CfrState make_cfr_state(const GameTree& g) {
  CfrState s;
  for (int pl : {kP1, kP2}) {
    int H = g.num_infosets(pl);
    s.regret_plus[pl].resize(H);
    s.strategy_sum[pl].resize(H);
    s.current[pl].resize(H);
    s.parent_link[pl].assign(H, {-1, -1});
    for (int h = 0; h < H; ++h) {
      s.regret_plus[pl][h].assign(g.infoset_actions(pl, h), 0.0);
      s.strategy_sum[pl][h].assign(g.infoset_actions(pl, h), 0.0);
      s.current[pl][h].assign(g.infoset_actions(pl, h),
                              1.0 / g.infoset_actions(pl, h));
    }
  }
  std::array<std::vector<bool>, 2> seen{std::vector<bool>(g.num_infosets(kP1), false),
                                        std::vector<bool>(g.num_infosets(kP2), false)};
  std::function<void(int, std::pair<int, int>, std::pair<int, int>)> walk =
      [&](int id, std::pair<int, int> own1, std::pair<int, int> own2) {
        const GameNode& n = g.nodes[id];
        if (n.kind == NodeKind::Decision) {
          auto& own = n.player == kP1 ? own1 : own2;
          if (!seen[n.player][n.infoset]) {
            seen[n.player][n.infoset] = true;
            s.parent_link[n.player][n.infoset] = own;
          }
          for (std::size_t a = 0; a < n.children.size(); ++a) {
            std::pair<int, int> next{n.infoset, static_cast<int>(a)};
            walk(n.children[a], n.player == kP1 ? next : own1,
                 n.player == kP2 ? next : own2);
          }
        } else {
          for (int c : n.children) walk(c, own1, own2);
        }
      };
  if (!g.nodes.empty()) walk(0, {-1, -1}, {-1, -1});
  for (int pl : {kP1, kP2})
    for (int h = 0; h < g.num_infosets(pl); ++h)
      if (s.parent_link[pl][h].first >= h)
        throw structure_error("make_cfr_state: infosets are not own-parent-first");
  return s;
}

namespace detail {

struct CfrWalker {
  const GameTree& g;
  CfrState& s;
  int player;
  double sign;
  std::vector<std::vector<double>>& cfv;

  double walk(int id, double reach_opp) {
    const GameNode& n = g.nodes[id];
    switch (n.kind) {
      case NodeKind::Terminal:
        return sign * n.payoff1;
      case NodeKind::Chance: {
        double v = 0.0;
        for (std::size_t c = 0; c < n.children.size(); ++c)
          v += n.chance_probs[c] * walk(n.children[c], reach_opp * n.chance_probs[c]);
        return v;
      }
      case NodeKind::Decision: {
        const auto& sigma = s.current[n.player][n.infoset];
        double v = 0.0;
        if (n.player == player) {
          for (std::size_t a = 0; a < n.children.size(); ++a) {
            double va = walk(n.children[a], reach_opp);
            cfv[n.infoset][a] += reach_opp * va;
            v += sigma[a] * va;
          }
        } else {
          for (std::size_t a = 0; a < n.children.size(); ++a)
            if (sigma[a] > 0.0) v += sigma[a] * walk(n.children[a], reach_opp * sigma[a]);
        }
        return v;
      }
    }
    return 0.0;
  }
};

}  // namespace detail

// One update pass for `player`: accumulates counterfactual action values
// weighted by opponent x chance reach, then applies regret-matching+.
inline void cfr_pass(const GameTree& g, CfrState& s, int player) {
  std::vector<std::vector<double>> cfv(g.num_infosets(player));
  for (int h = 0; h < g.num_infosets(player); ++h)
    cfv[h].assign(g.infoset_actions(player, h), 0.0);

  detail::CfrWalker walker{g, s, player, player == kP1 ? 1.0 : -1.0, cfv};
  walker.walk(0, 1.0);

  for (int h = 0; h < g.num_infosets(player); ++h) {
    auto& reg = s.regret_plus[player][h];
    const auto& sigma = s.current[player][h];
    double node_value = 0.0;
    for (std::size_t a = 0; a < reg.size(); ++a) node_value += sigma[a] * cfv[h][a];
    for (std::size_t a = 0; a < reg.size(); ++a)
      reg[a] = std::max(0.0, reg[a] + cfv[h][a] - node_value);
    detail::regret_matching_plus(reg, s.current[player][h]);
  }
}

// One CFR+ iteration: P1 pass, P2 pass against the refreshed P1 strategy,
// then linear (weight t) accumulation of the refreshed strategies. Two tree
// traversals per call.
inline void cfr_plus_iterate(const GameTree& g, CfrState& s) {
  ++s.t;
  cfr_pass(g, s, kP1);
  cfr_pass(g, s, kP2);
  for (int pl : {kP1, kP2}) {
    // Own reach per infoset via parent links (infosets are discovered
    // own-parent-first, so a single forward sweep suffices).
    std::vector<double> reach(g.num_infosets(pl), 1.0);
    for (int h = 0; h < g.num_infosets(pl); ++h) {
      auto [ph, pa] = s.parent_link[pl][h];
      if (ph >= 0) reach[h] = reach[ph] * s.current[pl][ph][pa];
    }
    for (int h = 0; h < g.num_infosets(pl); ++h)
      for (std::size_t a = 0; a < s.strategy_sum[pl][h].size(); ++a)
        s.strategy_sum[pl][h][a] +=
            static_cast<double>(s.t) * reach[h] * s.current[pl][h][a];
  }
}

// Normalized weighted-average behavioral strategies pushed to sequence form.
// Unvisited infosets (zero accumulator) fall back to uniform.
inline std::pair<TreeplexPoint, TreeplexPoint> average_profile(
    const SequenceFormProblem& p, const CfrState& s) {
  if (s.t < 1) throw std::invalid_argument("average_profile: no iterations yet");
  std::array<TreeplexPoint, 2> out;
  for (int pl : {kP1, kP2}) {
    BehavioralProfile avg(p.game.num_infosets(pl));
    for (int h = 0; h < p.game.num_infosets(pl); ++h) {
      const auto& sum = s.strategy_sum[pl][h];
      double total = 0.0;
      for (double v : sum) total += v;
      avg[h].resize(sum.size());
      for (std::size_t a = 0; a < sum.size(); ++a)
        avg[h][a] = total > 0.0 ? sum[a] / total : 1.0 / sum.size();
    }
    out[pl] = sequence_form_point(p, pl, avg);
  }
  return {std::move(out[kP1]), std::move(out[kP2])};
}

}  // namespace efpe
