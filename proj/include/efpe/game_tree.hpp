#pragma once

// Two-player zero-sum extensive-form games with chance nodes and perfect
// recall, plus the desk-scale benchmark instances: Kuhn poker, Leduc hold'em
// (parametric rank count), matching pennies, and a tiny two-move game whose
// Nash equilibria can prescribe irrational off-path play.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"

namespace efpe {

enum class NodeKind { Decision, Chance, Terminal };

inline constexpr int kP1 = 0;
inline constexpr int kP2 = 1;

struct GameNode {
  NodeKind kind = NodeKind::Terminal;
  int player = -1;                   // Decision nodes: kP1 or kP2
  int infoset = -1;                  // Decision nodes: per-player infoset id
  std::vector<int> children;         // Decision/Chance: child node ids
  std::vector<double> chance_probs;  // Chance nodes only
  double payoff1 = 0.0;              // Terminal: payoff to player 1 (zero-sum)
};

class GameTree {
 public:
  std::vector<GameNode> nodes;

  int num_infosets(int player) const {
    return static_cast<int>(infoset_actions_[player].size());
  }
  int infoset_actions(int player, int infoset) const {
    return infoset_actions_[player][infoset];
  }
  const std::string& infoset_label(int player, int infoset) const {
    return infoset_labels_[player][infoset];
  }
  int num_sequences(int player) const {
    int n = 0;
    for (int a : infoset_actions_[player]) n += a;
    return n;
  }

  int add_terminal(double payoff1) {
    GameNode n;
    n.kind = NodeKind::Terminal;
    n.payoff1 = payoff1;
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  int add_chance(std::vector<double> probs) {
    GameNode n;
    n.kind = NodeKind::Chance;
    n.chance_probs = std::move(probs);
    n.children.resize(n.chance_probs.size(), -1);
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  int add_decision(int player, int infoset, int num_actions) {
    GameNode n;
    n.kind = NodeKind::Decision;
    n.player = player;
    n.infoset = infoset;
    n.children.resize(num_actions, -1);
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  // Gets or creates the infoset with the given observation key. Infosets are
  // numbered in creation order, so building the tree by depth-first descent
  // yields an order where own-parents precede children.
  int infoset_id(int player, const std::string& key, int num_actions) {
    auto [it, inserted] = infoset_index_[player].try_emplace(
        key, static_cast<int>(infoset_actions_[player].size()));
    if (inserted) {
      infoset_actions_[player].push_back(num_actions);
      infoset_labels_[player].push_back(key);
    } else if (infoset_actions_[player][it->second] != num_actions) {
      throw structure_error("infoset '" + key + "' action count mismatch");
    }
    return it->second;
  }

  void set_child(int node, int slot, int child) { nodes[node].children.at(slot) = child; }

  int num_terminals() const {
    int k = 0;
    for (const auto& n : nodes) k += n.kind == NodeKind::Terminal;
    return k;
  }

  // Checks chance-probability sums, child wiring, and per-node action counts.
  void validate() const {
    if (nodes.empty()) throw structure_error("game tree is empty");
    for (const auto& n : nodes) {
      switch (n.kind) {
        case NodeKind::Terminal:
          break;
        case NodeKind::Chance: {
          if (n.children.empty()) throw structure_error("chance node with no outcomes");
          double sum = 0.0;
          for (double pr : n.chance_probs) sum += pr;
          if (std::abs(sum - 1.0) > 1e-12)
            throw structure_error("chance probabilities do not sum to 1");
          break;
        }
        case NodeKind::Decision:
          if (n.children.empty()) throw structure_error("decision node with no actions");
          if (static_cast<int>(n.children.size()) != infoset_actions_[n.player][n.infoset])
            throw structure_error("node action count differs from its infoset");
          break;
      }
      for (int c : n.children)
        if (c < 0 || c >= static_cast<int>(nodes.size()))
          throw structure_error("dangling child link");
    }
  }

 private:
  std::array<std::vector<int>, 2> infoset_actions_;
  std::array<std::vector<std::string>, 2> infoset_labels_;
  std::array<std::map<std::string, int>, 2> infoset_index_;
};

// Behavioral strategy: one probability vector per infoset.
using BehavioralProfile = std::vector<std::vector<double>>;

inline BehavioralProfile uniform_behavioral(const GameTree& g, int player) {
  BehavioralProfile b(g.num_infosets(player));
  for (int h = 0; h < g.num_infosets(player); ++h)
    b[h].assign(g.infoset_actions(player, h), 1.0 / g.infoset_actions(player, h));
  return b;
}

// Expected payoff to player 1 by direct tree walk.
inline double expected_payoff(const GameTree& g, const BehavioralProfile& b1,
                              const BehavioralProfile& b2) {
  std::function<double(int)> walk = [&](int id) -> double {
    const GameNode& n = g.nodes[id];
    switch (n.kind) {
      case NodeKind::Terminal:
        return n.payoff1;
      case NodeKind::Chance: {
        double v = 0.0;
        for (std::size_t c = 0; c < n.children.size(); ++c)
          v += n.chance_probs[c] * walk(n.children[c]);
        return v;
      }
      case NodeKind::Decision: {
        const auto& sigma = (n.player == kP1 ? b1 : b2)[n.infoset];
        double v = 0.0;
        for (std::size_t a = 0; a < n.children.size(); ++a)
          v += sigma[a] * walk(n.children[a]);
        return v;
      }
    }
    return 0.0;
  };
  return walk(0);
}

// ---------------------------------------------------------------------------
// Benchmark instances
// ---------------------------------------------------------------------------

// Matching pennies: simultaneous moves modeled sequentially with player 2
// blind to player 1's choice. Player 1 wins 1 when the picks match.
inline GameTree build_matching_pennies() {
  GameTree g;
  int h1 = g.infoset_id(kP1, "pick", 2);
  int h2 = g.infoset_id(kP2, "pick", 2);
  int root = g.add_decision(kP1, h1, 2);
  for (int a = 0; a < 2; ++a) {
    int n2 = g.add_decision(kP2, h2, 2);
    g.set_child(root, a, n2);
    for (int b = 0; b < 2; ++b)
      g.set_child(n2, b, g.add_terminal(a == b ? 1.0 : -1.0));
  }
  g.validate();
  return g;
}

// Embeds a bimatrix-free zero-sum matrix game (payoffs to player 1).
inline GameTree build_matrix_game(const std::vector<std::vector<double>>& payoff) {
  GameTree g;
  int rows = static_cast<int>(payoff.size());
  int cols = static_cast<int>(payoff[0].size());
  int h1 = g.infoset_id(kP1, "row", rows);
  int h2 = g.infoset_id(kP2, "col", cols);
  int root = g.add_decision(kP1, h1, rows);
  for (int r = 0; r < rows; ++r) {
    int n2 = g.add_decision(kP2, h2, cols);
    g.set_child(root, r, n2);
    for (int c = 0; c < cols; ++c)
      g.set_child(n2, c, g.add_terminal(payoff[r][c]));
  }
  g.validate();
  return g;
}

// Minimal zero-sum game where a Nash equilibrium can rely on an irrational
// off-path threat: player 1 exits for (1, -1), or passes to player 2 who
// chooses between (-5, 5) and (0, 0).
inline GameTree build_threat_game() {
  GameTree g;
  int h1 = g.infoset_id(kP1, "root", 2);
  int h2 = g.infoset_id(kP2, "after-pass", 2);
  int root = g.add_decision(kP1, h1, 2);
  g.set_child(root, 0, g.add_terminal(1.0));
  int n2 = g.add_decision(kP2, h2, 2);
  g.set_child(root, 1, n2);
  g.set_child(n2, 0, g.add_terminal(-5.0));
  g.set_child(n2, 1, g.add_terminal(0.0));
  g.validate();
  return g;
}

// Kuhn poker: ante 1, deck {J,Q,K}, one card each, one bet of size 1.
// Actions are check/bet, then fold/call when facing the bet.
inline GameTree build_kuhn() {
  GameTree g;
  const char* names = "JQK";
  // Single deal node: 6 ordered (c1, c2) pairs, each probability 1/6.
  int root = g.add_chance(std::vector<double>(6, 1.0 / 6.0));

  auto showdown = [&](int c1, int c2, double amount) {
    return g.add_terminal(c1 > c2 ? amount : -amount);
  };

  int slot = 0;
  for (int c1 = 0; c1 < 3; ++c1) {
    for (int c2 = 0; c2 < 3; ++c2) {
      if (c1 == c2) continue;
      std::string k1(1, names[c1]), k2(1, names[c2]);

      int p1 = g.add_decision(kP1, g.infoset_id(kP1, k1 + "|", 2), 2);
      g.set_child(root, slot++, p1);

      // P1 checks.
      int p2c = g.add_decision(kP2, g.infoset_id(kP2, k2 + "|c", 2), 2);
      g.set_child(p1, 0, p2c);
      g.set_child(p2c, 0, showdown(c1, c2, 1.0));  // check-check
      int p1cb = g.add_decision(kP1, g.infoset_id(kP1, k1 + "|cb", 2), 2);
      g.set_child(p2c, 1, p1cb);
      g.set_child(p1cb, 0, g.add_terminal(-1.0));        // fold to the bet
      g.set_child(p1cb, 1, showdown(c1, c2, 2.0));       // call

      // P1 bets.
      int p2b = g.add_decision(kP2, g.infoset_id(kP2, k2 + "|b", 2), 2);
      g.set_child(p1, 1, p2b);
      g.set_child(p2b, 0, g.add_terminal(1.0));          // P2 folds
      g.set_child(p2b, 1, showdown(c1, c2, 2.0));        // call
    }
  }
  g.validate();
  return g;
}

// Leduc hold'em with `ranks` pairs of cards (ranks = 3 is the standard game).
// Fixed-limit betting, at most 2 raises per round, bet size 2 in round one
// and 4 in round two. Pairing the community card wins the showdown; otherwise
// the higher private card wins, and equal private cards split the pot.
inline GameTree build_leduc(int ranks) {
  if (ranks < 2) throw std::invalid_argument("build_leduc: ranks must be >= 2");
  GameTree g;
  const int deck = 2 * ranks;
  auto rank_of = [](int card) { return card / 2; };

  // In-round betting state. `history` uses k/r/c (check, raise, call);
  // checks only occur before any raise, a call ends the round.
  struct RoundState {
    std::string history;
    int raises = 0;
    int to_act = kP1;
    bool facing_bet = false;
  };

  // payoff sign for P1 at showdown given contributions per player.
  auto showdown_payoff = [&](int c1, int c2, int community, double pot_each) {
    int r1 = rank_of(c1), r2 = rank_of(c2), rc = rank_of(community);
    int winner;
    if (r1 == rc) winner = 0;
    else if (r2 == rc) winner = 1;
    else if (r1 > r2) winner = 0;
    else if (r2 > r1) winner = 1;
    else return 0.0;  // split
    return winner == 0 ? pot_each : -pot_each;
  };

  // Builds one betting round. `observed` is the public history the players
  // have seen before this round (round-1 betting and the community card);
  // `on_continue(paid, round_history)` attaches the subtree that follows
  // when nobody folds.
  std::function<int(int, int, int, const std::string&, RoundState, std::array<double, 2>,
                    const std::function<int(std::array<double, 2>, const std::string&)>&)>
      build_round = [&](int c1, int c2, int round, const std::string& observed,
                        RoundState st, std::array<double, 2> paid,
                        const std::function<int(std::array<double, 2>, const std::string&)>&
                            on_continue) -> int {
    const double bet = round == 0 ? 2.0 : 4.0;
    const int me = st.to_act;
    const int my_card = me == kP1 ? c1 : c2;

    std::string key = "c" + std::to_string(my_card) + "|" + observed + st.history;

    std::vector<char> actions =
        !st.facing_bet ? std::vector<char>{'k', 'r'}
        : st.raises >= 2 ? std::vector<char>{'f', 'c'}
                         : std::vector<char>{'f', 'c', 'r'};

    int node = g.add_decision(me, g.infoset_id(me, key, static_cast<int>(actions.size())),
                              static_cast<int>(actions.size()));
    for (std::size_t ai = 0; ai < actions.size(); ++ai) {
      char act = actions[ai];
      RoundState next = st;
      next.history += act;
      next.to_act = 1 - me;
      std::array<double, 2> next_paid = paid;
      int child;
      switch (act) {
        case 'f': {
          // Folder forfeits what they have paid in.
          double win = paid[me];
          child = g.add_terminal(me == kP1 ? -win : win);
          break;
        }
        case 'c': {
          next_paid[me] = paid[1 - me];
          child = on_continue(next_paid, next.history);
          break;
        }
        case 'k': {
          if (st.history.empty()) {
            child = build_round(c1, c2, round, observed, next, next_paid, on_continue);
          } else {
            child = on_continue(next_paid, next.history);  // second check ends the round
          }
          break;
        }
        case 'r':
        default: {
          next_paid[me] = paid[1 - me] + bet;
          next.raises = st.raises + 1;
          next.facing_bet = true;
          child = build_round(c1, c2, round, observed, next, next_paid, on_continue);
          break;
        }
      }
      g.set_child(node, ai, child);
    }
    return node;
  };

  int root = g.add_chance(std::vector<double>(deck, 1.0 / deck));
  for (int c1 = 0; c1 < deck; ++c1) {
    int deal2 = g.add_chance(std::vector<double>(deck - 1, 1.0 / (deck - 1)));
    g.set_child(root, c1, deal2);
    int slot2 = 0;
    for (int c2 = 0; c2 < deck; ++c2) {
      if (c2 == c1) continue;
      auto after_round1 = [&](std::array<double, 2> paid1, const std::string& r1hist) -> int {
        int community_node = g.add_chance(std::vector<double>(deck - 2, 1.0 / (deck - 2)));
        int slot3 = 0;
        for (int cc = 0; cc < deck; ++cc) {
          if (cc == c1 || cc == c2) continue;
          auto after_round2 = [&](std::array<double, 2> paid2, const std::string&) -> int {
            return g.add_terminal(showdown_payoff(c1, c2, cc, paid2[0]));
          };
          std::string observed = r1hist + "|b" + std::to_string(cc) + "|";
          int r2node = build_round(c1, c2, 1, observed, RoundState{}, paid1, after_round2);
          g.set_child(community_node, slot3++, r2node);
        }
        return community_node;
      };
      int r1node = build_round(c1, c2, 0, "", RoundState{}, {1.0, 1.0}, after_round1);
      g.set_child(deal2, slot2++, r1node);
    }
  }
  g.validate();
  return g;
}

// Game registry for the benchmark CLI and tests.
inline GameTree make_game(const std::string& name) {
  if (name == "kuhn") return build_kuhn();
  if (name == "leduc3") return build_leduc(3);
  if (name == "leduc5") return build_leduc(5);
  if (name == "pennies") return build_matching_pennies();
  if (name == "threat") return build_threat_game();
  throw std::invalid_argument("unknown game: " + name);
}

inline const std::vector<std::string>& game_registry() {
  static const std::vector<std::string> names = {"kuhn", "leduc3", "leduc5",
                                                 "pennies", "threat"};
  return names;
}

}  // namespace efpe
