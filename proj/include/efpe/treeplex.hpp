#pragma once

// Treeplexes: the recursively defined polytopes behind sequence-form strategy
// spaces. A treeplex is a forest of simplexes; each simplex j owns a
// contiguous range I_j of the sequence vector, is scaled by its parent
// sequence q_{p_j} (q_{p_j} = 1 for root simplexes), and each coordinate
// i in I_j may act as the branching variable for further child simplexes.

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace efpe {

// Parent link of a root simplex: its scaling mass is the constant 1.
inline constexpr int kRootSeq = -1;

using TreeplexPoint = std::vector<double>;

// Minimum behavioral probability xi >= 0. Q^xi is Q intersected with
// q_i >= xi * q_{p_j}; it is nonempty iff n_j * xi <= 1 for every simplex.
struct Perturbation {
  double xi = 0.0;
};

struct SimplexInfo {
  int id = 0;                           // position in topological order
  int first = 0;                        // index range [first, first + size)
  int size = 0;
  int parent_seq = kRootSeq;            // sequence index scaling this simplex
  std::vector<std::vector<int>> children;  // per local coordinate: child simplex ids
  int depth = 0;                        // d_j: simplexes reachable by branching below
  int branching = 0;                    // b_Q^j: branching operations preceding j

  bool is_root() const { return parent_seq == kRootSeq; }
  int end() const { return first + size; }
};

struct SimplexDescriptor {
  int size = 0;
  int parent_seq = kRootSeq;
};

class Treeplex {
 public:
  Treeplex() = default;

  int num_sequences() const { return n_; }
  int num_simplexes() const { return static_cast<int>(simplexes_.size()); }
  const SimplexInfo& simplex(int j) const { return simplexes_[j]; }
  const std::vector<SimplexInfo>& simplexes() const { return simplexes_; }
  int depth() const { return depth_; }
  // Simplex owning a given sequence index.
  int simplex_of_sequence(int i) const { return owner_[i]; }
  // Dimension of the largest simplex (the m in log m bounds); 1 if empty.
  int max_simplex_size() const { return max_size_; }

  // M_Q = max_{q in Q} ||q||_1, by bottom-up dynamic programming:
  // value(j) = 1 + max_i sum_{k in D_j^i} value(k), summed over roots.
  double max_l1() const { return m_q_; }

  // M_{Q,r}: same maximum with only simplexes within r branching operations
  // of the root contributing mass. Equals max_l1() for r >= depth().
  double max_l1_cutoff(int r) const {
    if (r < 0) throw std::invalid_argument("max_l1_cutoff: r must be >= 0");
    double total = 0.0;
    for (const auto& s : simplexes_)
      if (s.is_root()) total += cutoff_value(s.id, r);
    return total;
  }

  // M_{Q_j, r} for the sub-treeplex rooted at simplex j.
  double subtree_max_l1_cutoff(int j, int r) const {
    if (r < 0) throw std::invalid_argument("subtree_max_l1_cutoff: r must be >= 0");
    return cutoff_value(j, r);
  }

  // Largest xi for which Q^xi is nonempty is 1 / max_simplex_size().
  bool feasible(const Perturbation& p) const {
    return p.xi >= 0.0 && max_size_ * p.xi <= 1.0;
  }

  // One line per simplex: "j parent_seq size child-simplex-ids...".
  void write_text(std::ostream& os) const {
    os << "treeplex n=" << n_ << " simplexes=" << simplexes_.size() << "\n";
    for (const auto& s : simplexes_) {
      os << s.id << " " << s.parent_seq << " " << s.size;
      for (const auto& branch : s.children)
        for (int k : branch) os << " " << k;
      os << "\n";
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
  }

  friend Treeplex build_treeplex(const std::vector<SimplexDescriptor>& descriptors);

 private:
  // Precomputed W(j, r) = max l1-mass of Q_j counting simplexes within r
  // further branching operations, r = 0..d_j; W(j, r) = W(j, d_j) beyond.
  double cutoff_value(int j, int r) const {
    return cutoff_table_[j][std::min(r, simplexes_[j].depth)];
  }

  int n_ = 0;
  int depth_ = 0;
  int max_size_ = 1;
  double m_q_ = 0.0;
  std::vector<SimplexInfo> simplexes_;
  std::vector<int> owner_;
  std::vector<std::vector<double>> cutoff_table_;
};

// Builds a treeplex from (size, parent-sequence) descriptors listed in
// topological order: a simplex's parent sequence must belong to an earlier
// simplex. Index ranges are assigned contiguously in listing order.
inline Treeplex build_treeplex(const std::vector<SimplexDescriptor>& descriptors) {
  Treeplex t;
  int n = 0;
  for (const auto& d : descriptors) {
    if (d.size < 1) throw structure_error("build_treeplex: simplex size must be >= 1");
    n += d.size;
  }
  t.n_ = n;
  t.owner_.assign(n, -1);
  t.simplexes_.resize(descriptors.size());

  int next = 0;
  for (int j = 0; j < static_cast<int>(descriptors.size()); ++j) {
    SimplexInfo& s = t.simplexes_[j];
    s.id = j;
    s.first = next;
    s.size = descriptors[j].size;
    s.parent_seq = descriptors[j].parent_seq;
    s.children.assign(s.size, {});
    next += s.size;
    for (int i = s.first; i < s.end(); ++i) {
      if (t.owner_[i] != -1)
        throw structure_error("build_treeplex: overlapping index ranges");
      t.owner_[i] = j;
    }
    if (s.parent_seq != kRootSeq) {
      if (s.parent_seq < 0 || s.parent_seq >= n)
        throw structure_error("build_treeplex: parent sequence out of range");
      if (s.parent_seq >= s.first)
        throw structure_error(
            "build_treeplex: parent link forms a cycle or forward reference "
            "(simplex " + std::to_string(j) + ")");
      int pj = t.owner_[s.parent_seq];
      int local = s.parent_seq - t.simplexes_[pj].first;
      t.simplexes_[pj].children[local].push_back(j);
    }
  }

  // Derived metrics, children-before-parents (valid by topological order).
  for (int j = static_cast<int>(descriptors.size()) - 1; j >= 0; --j) {
    SimplexInfo& s = t.simplexes_[j];
    s.depth = 0;
    for (const auto& branch : s.children)
      for (int k : branch) s.depth = std::max(s.depth, 1 + t.simplexes_[k].depth);
  }
  for (auto& s : t.simplexes_) {
    s.branching = s.is_root() ? 0 : t.simplexes_[t.owner_[s.parent_seq]].branching + 1;
    t.max_size_ = std::max(t.max_size_, s.size);
    if (s.is_root()) t.depth_ = std::max(t.depth_, s.depth);
  }

  t.cutoff_table_.assign(t.simplexes_.size(), {});
  for (int j = static_cast<int>(t.simplexes_.size()) - 1; j >= 0; --j) {
    const SimplexInfo& s = t.simplexes_[j];
    t.cutoff_table_[j].resize(s.depth + 1);
    for (int r = 0; r <= s.depth; ++r) {
      double best = 0.0;
      if (r >= 1) {
        for (const auto& branch : s.children) {
          double sum = 0.0;
          for (int k : branch) sum += t.cutoff_value(k, r - 1);
          best = std::max(best, sum);
        }
      }
      t.cutoff_table_[j][r] = 1.0 + best;
    }
  }
  t.m_q_ = t.num_simplexes() == 0 ? 0.0 : t.max_l1_cutoff(t.depth_);
  return t;
}

// True iff q lies in Q^xi: nonnegative, every simplex sums to its parent
// mass (within kSimplexSumTol), and q_i >= xi * q_{p_j} (within slack).
inline bool validate_point(const Treeplex& t, std::span<const double> q,
                           const Perturbation& p = {}) {
  if (static_cast<int>(q.size()) != t.num_sequences())
    throw std::invalid_argument("validate_point: dimension mismatch");
  for (double v : q)
    if (!(v >= 0.0)) return false;
  for (const auto& s : t.simplexes()) {
    double parent = s.is_root() ? 1.0 : q[s.parent_seq];
    double sum = 0.0;
    for (int i = s.first; i < s.end(); ++i) {
      sum += q[i];
      if (q[i] < p.xi * parent - kPerturbationSlack) return false;
    }
    if (std::abs(sum - parent) > kSimplexSumTol) return false;
  }
  return true;
}

// Linear optimization over Q^xi by backward induction. For each simplex the
// optimum puts mass xi on every coordinate and the remaining 1 - n*xi on the
// best one. maximize=false minimizes instead.
inline double linear_opt(const Treeplex& t, std::span<const double> g, bool maximize,
                         double xi = 0.0, TreeplexPoint* argopt = nullptr) {
  if (static_cast<int>(g.size()) != t.num_sequences())
    throw std::invalid_argument("linear_opt: dimension mismatch");
  const int S = t.num_simplexes();
  std::vector<double> value(t.num_sequences());   // per-sequence value incl. subtree
  std::vector<double> simplex_value(S);
  std::vector<int> pick(S);
  for (int j = S - 1; j >= 0; --j) {
    const SimplexInfo& s = t.simplex(j);
    double spread = 0.0, best = 0.0;
    int best_i = s.first;
    for (int i = s.first; i < s.end(); ++i) {
      double v = g[i];
      for (int k : s.children[i - s.first]) v += simplex_value[k];
      value[i] = v;
      spread += v;
      if (i == s.first || (maximize ? v > best : v < best)) {
        best = v;
        best_i = i;
      }
    }
    simplex_value[j] = xi * spread + (1.0 - s.size * xi) * best;
    pick[j] = best_i;
  }
  double total = 0.0;
  for (const auto& s : t.simplexes())
    if (s.is_root()) total += simplex_value[s.id];
  if (argopt) {
    argopt->assign(t.num_sequences(), 0.0);
    for (const auto& s : t.simplexes()) {
      double parent = s.is_root() ? 1.0 : (*argopt)[s.parent_seq];
      for (int i = s.first; i < s.end(); ++i)
        (*argopt)[i] = parent * (xi + (i == pick[s.id] ? 1.0 - s.size * xi : 0.0));
    }
  }
  return total;
}

// Pushes per-simplex behavioral distributions down to sequence form.
inline TreeplexPoint behavioral_to_sequence(const Treeplex& t,
                                            std::span<const double> behavioral) {
  if (static_cast<int>(behavioral.size()) != t.num_sequences())
    throw std::invalid_argument("behavioral_to_sequence: dimension mismatch");
  TreeplexPoint q(t.num_sequences());
  for (const auto& s : t.simplexes()) {
    double parent = s.is_root() ? 1.0 : q[s.parent_seq];
    for (int i = s.first; i < s.end(); ++i) q[i] = parent * behavioral[i];
  }
  return q;
}

// Recovers behavioral distributions from a sequence-form point; simplexes
// with (near-)zero parent mass fall back to uniform.
inline std::vector<double> sequence_to_behavioral(const Treeplex& t,
                                                  std::span<const double> q) {
  if (static_cast<int>(q.size()) != t.num_sequences())
    throw std::invalid_argument("sequence_to_behavioral: dimension mismatch");
  std::vector<double> b(t.num_sequences());
  for (const auto& s : t.simplexes()) {
    double sum = 0.0;
    for (int i = s.first; i < s.end(); ++i) sum += q[i];
    for (int i = s.first; i < s.end(); ++i)
      b[i] = sum > 0.0 ? q[i] / sum : 1.0 / s.size;
  }
  return b;
}

}  // namespace efpe
