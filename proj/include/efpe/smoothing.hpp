#pragma once

// Perturbed dilated entropy smoothing for treeplexes. The xi-perturbed
// simplex {q : ||q||_1 = 1, q >= xi} is handled through the affine bijection
//   phi(q~) = (q~ - xi) / (1 - n xi)        (perturbed -> standard)
//   phi^{-1}(q) = (1 - n xi) q + xi         (standard  -> perturbed)
// composed with the entropy d_s(q) = sum_i q_i log q_i. The treeplex DGF
// dilates the per-simplex function by the parent sequence mass with weights
// beta_j, so its smoothed best response decomposes bottom-up, one softmax
// per simplex.

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include "common.hpp"
#include "treeplex.hpp"

namespace efpe {

enum class WeightScheme { Recurrence, Convergence };

// Per-simplex dilation weights beta_j under one of the two schemes, plus a
// uniform scale gamma applied on top (the tunable overall DGF weight).
struct DgfWeights {
  WeightScheme scheme = WeightScheme::Recurrence;
  double gamma = 1.0;
  std::vector<double> beta;   // raw weights
  std::vector<double> alpha;  // recurrence values (Recurrence scheme only)

  double weight(int j) const { return gamma * beta[j]; }

  // One "j beta [alpha]" line per simplex, for golden tests.
  void write_text(std::ostream& os) const {
    os << "weights scheme="
       << (scheme == WeightScheme::Recurrence ? "recurrence" : "convergence")
       << " gamma=" << gamma << "\n"
       << std::setprecision(17);
    for (std::size_t j = 0; j < beta.size(); ++j) {
      os << j << " " << beta[j];
      if (j < alpha.size()) os << " " << alpha[j];
      os << "\n";
    }
  }

  std::string to_text() const {
    std::ostringstream os;
    write_text(os);
    return os.str();
  }
};

// Recurrence scheme:  alpha_j = 1 + max_i sum_{k in D_j^i} alpha_k beta_k /
// (beta_k - alpha_k), beta_j = alpha_j on root simplexes and 2 alpha_j
// elsewhere (any margin beta_j > alpha_j is admissible; 2x keeps the ratio
// beta/(beta - alpha) at 2).
// Convergence scheme: beta_j = 2 + sum_{r=1}^{d_j} 2^r (M_{Q_j,r} - 1).
inline DgfWeights compute_weights(const Treeplex& t, WeightScheme scheme,
                                  double gamma = 1.0) {
  if (gamma <= 0.0) throw std::invalid_argument("compute_weights: gamma must be > 0");
  DgfWeights w;
  w.scheme = scheme;
  w.gamma = gamma;
  const int S = t.num_simplexes();
  w.beta.resize(S);
  if (scheme == WeightScheme::Recurrence) {
    w.alpha.resize(S);
    for (int j = S - 1; j >= 0; --j) {
      const SimplexInfo& s = t.simplex(j);
      double best = 0.0;
      for (const auto& branch : s.children) {
        double sum = 0.0;
        for (int k : branch) sum += w.alpha[k] * w.beta[k] / (w.beta[k] - w.alpha[k]);
        best = std::max(best, sum);
      }
      w.alpha[j] = 1.0 + best;
      w.beta[j] = s.is_root() ? w.alpha[j] : 2.0 * w.alpha[j];
    }
  } else {
    for (int j = 0; j < S; ++j) {
      double b = 2.0;
      for (int r = 1; r <= t.simplex(j).depth; ++r)
        b += std::ldexp(t.subtree_max_l1_cutoff(j, r) - 1.0, r);
      w.beta[j] = b;
    }
  }
  return w;
}

inline void check_perturbation(int n, double xi) {
  if (xi < 0.0 || n * xi >= 1.0)
    throw std::domain_error("infeasible perturbation: n*xi must be < 1");
}

// phi: perturbed simplex point -> standard simplex point.
inline std::vector<double> map_to_unperturbed(std::span<const double> q, double xi) {
  const int n = static_cast<int>(q.size());
  check_perturbation(n, xi);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = (q[i] - xi) / (1.0 - n * xi);
  return out;
}

// phi^{-1}: standard simplex point -> perturbed simplex point.
inline std::vector<double> map_to_perturbed(std::span<const double> q, double xi) {
  const int n = static_cast<int>(q.size());
  check_perturbation(n, xi);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = (1.0 - n * xi) * q[i] + xi;
  return out;
}

// Negative entropy sum_i q_i log q_i with 0 log 0 := 0.
inline double entropy_value(std::span<const double> q) {
  double v = 0.0;
  for (double qi : q)
    if (qi > 0.0) v += qi * std::log(qi);
  return v;
}

inline std::vector<double> entropy_grad(std::span<const double> q) {
  std::vector<double> g(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0)
      throw std::domain_error("entropy_grad: zero entry has no gradient");
    g[i] = 1.0 + std::log(q[i]);
  }
  return g;
}

struct ConjugateResult {
  double value = 0.0;
  std::vector<double> maximizer;
};

// Conjugate of the perturbed simplex entropy,
//   d^{xi,*}(g) = log sum_i exp((1-n xi) g_i) + <g, xi>,
// with maximizer (1-n xi) softmax((1-n xi) g) + xi, which lies in the
// perturbed simplex exactly.
inline ConjugateResult perturbed_simplex_conjugate(std::span<const double> g, double xi) {
  const int n = static_cast<int>(g.size());
  check_perturbation(n, xi);
  const double scale = 1.0 - n * xi;
  std::vector<double> scaled(n);
  double gsum = 0.0;
  for (int i = 0; i < n; ++i) {
    scaled[i] = scale * g[i];
    gsum += g[i];
  }
  ConjugateResult r;
  r.value = log_sum_exp(scaled) + xi * gsum;
  r.maximizer.resize(n);
  softmax(scaled, r.maximizer);
  for (double& v : r.maximizer) v = scale * v + xi;
  return r;
}

namespace detail {

inline void check_weights(const Treeplex& t, const DgfWeights& w) {
  if (static_cast<int>(w.beta.size()) != t.num_simplexes())
    throw std::invalid_argument("weights do not match treeplex");
}

inline void check_interior(const Treeplex& t, std::span<const double> q, double xi) {
  if (static_cast<int>(q.size()) != t.num_sequences())
    throw std::invalid_argument("dimension mismatch");
  for (const auto& s : t.simplexes()) {
    double parent = s.is_root() ? 1.0 : q[s.parent_seq];
    if (!(parent > 0.0))
      throw std::domain_error("point is on the boundary (zero parent mass)");
    for (int i = s.first; i < s.end(); ++i)
      if (!(q[i] - xi * parent > 0.0))
        throw std::domain_error("point is on the perturbed boundary");
  }
}

// Gradient of the dilated perturbed entropy from behavioral coordinates
// b_i = q_i / q_{p_j}; z_i = phi(b)_i is clamped away from 0 before logs.
inline std::vector<double> dgf_gradient_behavioral(const Treeplex& t, const DgfWeights& w,
                                                   double xi,
                                                   std::span<const double> behavioral) {
  std::vector<double> grad(t.num_sequences(), 0.0);
  for (const auto& s : t.simplexes()) {
    const double wj = w.weight(s.id);
    const double scale = 1.0 - s.size * xi;
    double parent_term = 0.0;
    for (int i = s.first; i < s.end(); ++i) {
      double z = std::max((behavioral[i] - xi) / scale, kBoundaryClamp);
      double lz1 = 1.0 + std::log(z);
      grad[i] += wj * lz1 / scale;
      parent_term += z * std::log(z) - lz1 * behavioral[i] / scale;
    }
    if (!s.is_root()) grad[s.parent_seq] += wj * parent_term;
  }
  return grad;
}

}  // namespace detail

// d_Q^xi(q) = sum_j beta_j q_{p_j} sum_{i in I_j} z_i log z_i with
// z = phi(q^j / q_{p_j}). Requires q strictly inside Q^xi.
inline double treeplex_dgf_value(const Treeplex& t, const DgfWeights& w, double xi,
                                 std::span<const double> q) {
  detail::check_weights(t, w);
  detail::check_interior(t, q, xi);
  double total = 0.0;
  for (const auto& s : t.simplexes()) {
    check_perturbation(s.size, xi);
    const double parent = s.is_root() ? 1.0 : q[s.parent_seq];
    const double scale = 1.0 - s.size * xi;
    double ent = 0.0;
    for (int i = s.first; i < s.end(); ++i) {
      double z = (q[i] / parent - xi) / scale;
      if (z > 0.0) ent += z * std::log(z);
    }
    total += w.weight(s.id) * parent * ent;
  }
  return total;
}

inline std::vector<double> treeplex_dgf_grad(const Treeplex& t, const DgfWeights& w,
                                             double xi, std::span<const double> q) {
  detail::check_weights(t, w);
  detail::check_interior(t, q, xi);
  std::vector<double> behavioral(t.num_sequences());
  for (const auto& s : t.simplexes()) {
    double parent = s.is_root() ? 1.0 : q[s.parent_seq];
    for (int i = s.first; i < s.end(); ++i) behavioral[i] = q[i] / parent;
  }
  return detail::dgf_gradient_behavioral(t, w, xi, behavioral);
}

// Quadratic form h' Hess(d_Q^xi)(q) h in closed form: the diagonal and
// off-diagonal second partials collapse, per simplex coordinate, to
//   beta_j (h_i - h_{p_j} q_i / q_{p_j})^2 / ((1 - n_j xi)(q_i - xi q_{p_j}))
// with h_{p_j} = 0 and q_{p_j} = 1 on root simplexes.
inline double hessian_quadratic(const Treeplex& t, const DgfWeights& w, double xi,
                                std::span<const double> q, std::span<const double> h) {
  detail::check_weights(t, w);
  detail::check_interior(t, q, xi);
  if (h.size() != q.size()) throw std::invalid_argument("hessian_quadratic: h size");
  double total = 0.0;
  for (const auto& s : t.simplexes()) {
    const double parent = s.is_root() ? 1.0 : q[s.parent_seq];
    const double hp = s.is_root() ? 0.0 : h[s.parent_seq];
    const double scale = 1.0 - s.size * xi;
    const double wj = w.weight(s.id);
    for (int i = s.first; i < s.end(); ++i) {
      double resid = h[i] - hp * q[i] / parent;
      total += wj * resid * resid / (scale * (q[i] - xi * parent));
    }
  }
  return total;
}

struct SmoothedBestResponse {
  double value = 0.0;            // max_{q in Q^xi} <g, q> - mu d_Q^xi(q)
  TreeplexPoint point;           // maximizer, feasible in Q^xi exactly
  std::vector<double> behavioral;  // per-simplex local maximizers
};

// Bottom-up conjugate of the treeplex DGF: at each simplex the local
// gradient (augmented by child conjugate values) goes through the perturbed
// simplex conjugate at temperature mu beta_j (inlined here to keep the loop
// allocation-free); the maximizer is then scaled top-down by parent masses.
inline SmoothedBestResponse smoothed_best_response(const Treeplex& t, const DgfWeights& w,
                                                   double xi, double mu,
                                                   std::span<const double> g) {
  detail::check_weights(t, w);
  if (!(mu > 0.0)) throw std::invalid_argument("smoothed_best_response: mu must be > 0");
  if (static_cast<int>(g.size()) != t.num_sequences())
    throw std::invalid_argument("smoothed_best_response: dimension mismatch");
  check_perturbation(t.max_simplex_size(), xi);

  SmoothedBestResponse r;
  r.behavioral.resize(t.num_sequences());
  std::vector<double> ghat(g.begin(), g.end());
  std::vector<double> buf(t.max_simplex_size());
  for (int j = t.num_simplexes() - 1; j >= 0; --j) {
    const SimplexInfo& s = t.simplex(j);
    const double temp = mu * w.weight(j);
    const double scale = 1.0 - s.size * xi;
    double hi = -std::numeric_limits<double>::infinity();
    double gsum = 0.0;
    for (int i = s.first; i < s.end(); ++i) {
      double v = scale * ghat[i] / temp;
      buf[i - s.first] = v;
      hi = std::max(hi, v);
      gsum += ghat[i];
    }
    double z = 0.0;
    for (int k = 0; k < s.size; ++k) {
      buf[k] = std::exp(buf[k] - hi);
      z += buf[k];
    }
    for (int i = s.first; i < s.end(); ++i)
      r.behavioral[i] = scale * buf[i - s.first] / z + xi;
    double val = temp * (hi + std::log(z)) + xi * gsum;
    if (s.is_root())
      r.value += val;
    else
      ghat[s.parent_seq] += val;
  }
  r.point.resize(t.num_sequences());
  for (const auto& s : t.simplexes()) {
    double parent = s.is_root() ? 1.0 : r.point[s.parent_seq];
    for (int i = s.first; i < s.end(); ++i) r.point[i] = parent * r.behavioral[i];
  }
  return r;
}

// Entropy "diameter over modulus" estimate M_Q^2 2^{d_Q + 2} log m, m the
// dimension of the largest simplex.
inline double entropy_diameter_bound(const Treeplex& t) {
  return t.max_l1() * t.max_l1() * std::ldexp(1.0, t.depth() + 2) *
         std::log(static_cast<double>(t.max_simplex_size()));
}

// Centering of the dilated DGF. Each simplex entropy is lower-bounded by
// -log n_j, so adding the dilated linear term sum_j w_j log(n_j) q_{p_j}
// makes the DGF nonnegative with minimum 0 at the dilated uniform point,
// which the excessive-gap initialization requires. Because the correction
// is linear it leaves Hessians and Bregman steps unchanged:
//   d_centered(q) = d(q) + <shift, q> + constant.
struct DgfCentering {
  std::vector<double> shift;
  double constant = 0.0;
};

inline DgfCentering dgf_centering(const Treeplex& t, const DgfWeights& w) {
  detail::check_weights(t, w);
  DgfCentering c;
  c.shift.assign(t.num_sequences(), 0.0);
  for (const auto& s : t.simplexes()) {
    double term = w.weight(s.id) * std::log(static_cast<double>(s.size));
    if (s.is_root())
      c.constant += term;
    else
      c.shift[s.parent_seq] += term;
  }
  return c;
}

// max_{q in Q^xi} <g, q> - mu * d_centered(q); same maximizer formulas with
// the gradient pre-shifted by -mu * shift and the value offset by -mu * c.
inline SmoothedBestResponse smoothed_best_response_centered(
    const Treeplex& t, const DgfWeights& w, const DgfCentering& c, double xi, double mu,
    std::span<const double> g) {
  std::vector<double> adjusted(g.begin(), g.end());
  for (std::size_t i = 0; i < adjusted.size(); ++i) adjusted[i] -= mu * c.shift[i];
  SmoothedBestResponse r = smoothed_best_response(t, w, xi, mu, adjusted);
  r.value -= mu * c.constant;
  return r;
}

}  // namespace efpe
