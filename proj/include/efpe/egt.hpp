#pragma once

// Excessive Gap Technique over (possibly xi-perturbed) sequence-form
// polytopes, smoothed with the perturbed dilated entropy DGF. The solver
// maintains f_{mu2}(x) <= phi_{mu1}(y) while shrinking one mu per step with
// tau_k = 2/(k+3), alternating focus starting with X. Smoothed best
// responses and the Bregman step run through the treeplex conjugate; matrix
// products are cached across steps by linearity, so one step consumes
// exactly three apply_A/apply_At traversals.

#include <cmath>
#include <string>
#include <vector>

#include "metrics.hpp"
#include "sequence_form.hpp"
#include "smoothing.hpp"

namespace efpe {

// mu1 = mu2 = ||A|| / sqrt(phi_X phi_Y), the symmetric solution of
// mu1 = phi_X / L1(f_{mu2}) with L1 = ||A||^2 / (phi_Y mu2). A zero matrix
// degenerates to (1, 1).
inline std::pair<double, double> lipschitz_mu_init(const SequenceFormProblem& p,
                                                   double phi_x, double phi_y) {
  if (!(phi_x > 0.0) || !(phi_y > 0.0))
    throw std::invalid_argument("lipschitz_mu_init: moduli must be > 0");
  double norm = matrix_norm(p);
  if (norm == 0.0) return {1.0, 1.0};
  double mu = norm / std::sqrt(phi_x * phi_y);
  return {mu, mu};
}

enum class Focus { X, Y };

// How the strong-convexity modulus fed to the mu initialization treats the
// tuned overall weight gamma. RawModulus keeps the theoretical mu schedule
// of the gamma=1 weights so that tuning gamma genuinely rescales the
// smoothing (smaller gamma = less smoothing); ScaledModulus folds gamma into
// the modulus, which keeps the schedule theoretically matched to the scaled
// DGF.
enum class MuPolicy { RawModulus, ScaledModulus };

// Norm under which the modulus is taken: L2 gives 1 per Theorem-1 weights,
// L1 gives 1/M_Q.
enum class ModulusNorm { L2, L1 };

struct EgtConfig {
  double xi = 0.0;
  WeightScheme scheme = WeightScheme::Convergence;
  double gamma = 1.0;
  MuPolicy mu_policy = MuPolicy::RawModulus;
  ModulusNorm norm = ModulusNorm::L2;
  double gap_tolerance = 1e-7;   // slack allowed in the excessive gap condition
  bool check_gap_each_step = true;
  bool validate_iterates = true;
};

struct EgtState {
  TreeplexPoint x, y;
  double mu1 = 0.0, mu2 = 0.0;
  long k = 0;  // completed steps
  // Cached matrix products, kept exact across steps by linearity.
  std::vector<double> Ay, Atx;
};

struct TracePoint {
  long iteration = 0;
  long long traversals = 0;
  double nash_gap = 0.0;
  double max_infoset_regret = 0.0;
  double saddle_gap_perturbed = 0.0;
  double mu1 = 0.0, mu2 = 0.0;  // NaN for algorithms without smoothing
  double value_p1 = 0.0;
};

struct SolverTrace {
  std::vector<TracePoint> points;
  TreeplexPoint final_x, final_y;  // last iterate / averaged profile
  bool aborted = false;
  std::string abort_reason;
};

struct RunOptions {
  long long traversal_budget = 100000;
  long max_iterations = 0;  // 0 = bounded by budget only
  double trace_factor = 1.25;
  bool compute_metrics = true;
};

class EgtSolver {
 public:
  EgtSolver(SequenceFormProblem& p, EgtConfig cfg)
      : p_(p),
        cfg_(cfg),
        wx_(compute_weights(p.X(), cfg.scheme, cfg.gamma)),
        wy_(compute_weights(p.Y(), cfg.scheme, cfg.gamma)),
        cx_(dgf_centering(p.X(), wx_)),
        cy_(dgf_centering(p.Y(), wy_)) {
    if (!p.X().feasible({cfg.xi}) || !p.Y().feasible({cfg.xi}))
      throw std::domain_error("EgtSolver: infeasible perturbation for this game");
    init();
  }

  const EgtState& state() const { return st_; }
  const DgfWeights& weights_x() const { return wx_; }
  const DgfWeights& weights_y() const { return wy_; }

  double modulus(const Treeplex& t) const {
    double phi = cfg_.mu_policy == MuPolicy::ScaledModulus ? cfg_.gamma : 1.0;
    if (cfg_.norm == ModulusNorm::L1) phi /= t.max_l1();
    return phi;
  }

  // phi_{mu1}(y) - f_{mu2}(x); the excessive gap condition is >= -tolerance.
  // Uses the cached products, so checking consumes no traversals.
  double excessive_gap_slack() const {
    double f = p_.a0 + dot(p_.a1, st_.x) + prox_y(grad_y(), st_.mu2).value;
    double phi = p_.a0 + dot(p_.a2, st_.y) - prox_x(negated(grad_x()), st_.mu1).value;
    return phi - f;
  }

  void step() { step(st_.k % 2 == 0 ? Focus::X : Focus::Y); }

  // One excessive-gap shrink step. The focused mu is multiplied by
  // (1 - tau_k), tau_k = 2/(k+3). Three counted traversals.
  void step(Focus focus) {
    if (cfg_.check_gap_each_step && excessive_gap_slack() < -cfg_.gap_tolerance)
      throw invariant_error("excessive gap condition violated on entry to step " +
                            std::to_string(st_.k) + " (slack " +
                            std::to_string(excessive_gap_slack()) + ")");
    const double tau = 2.0 / (st_.k + 3);
    if (focus == Focus::X)
      step_x(tau);
    else
      step_y(tau);
    ++st_.k;
    if (cfg_.validate_iterates &&
        (!validate_point(p_.X(), st_.x, {cfg_.xi}) ||
         !validate_point(p_.Y(), st_.y, {cfg_.xi})))
      throw invariant_error("EGT iterate left the perturbed polytope at step " +
                            std::to_string(st_.k));
  }

  SolverTrace run(const RunOptions& opt) {
    SolverTrace trace;
    record(trace, opt);
    long long next = std::max<long long>(p_.traversals, 1);
    while (p_.traversals < opt.traversal_budget &&
           (opt.max_iterations == 0 || st_.k < opt.max_iterations)) {
      try {
        step();
      } catch (const invariant_error& e) {
        trace.aborted = true;
        trace.abort_reason = e.what();
        break;
      }
      if (p_.traversals >= next) {
        record(trace, opt);
        while (next <= p_.traversals)
          next = static_cast<long long>(std::ceil(next * opt.trace_factor));
      }
    }
    if (!trace.aborted) {
      record(trace, opt);
      trace.final_x = st_.x;
      trace.final_y = st_.y;
    }
    return trace;
  }

 private:
  // Smoothed best responses against the centered DGFs (the linear centering
  // cancels inside Bregman steps, which keep using the raw gradient/prox).
  SmoothedBestResponse prox_x(std::span<const double> g, double mu) const {
    return smoothed_best_response_centered(p_.X(), wx_, cx_, cfg_.xi, mu, g);
  }
  SmoothedBestResponse prox_y(std::span<const double> g, double mu) const {
    return smoothed_best_response_centered(p_.Y(), wy_, cy_, cfg_.xi, mu, g);
  }

  std::vector<double> grad_x() const {  // a1 + A y
    std::vector<double> g = st_.Ay;
    for (int i = 0; i < p_.A.rows; ++i) g[i] += p_.a1[i];
    return g;
  }
  std::vector<double> grad_y() const {  // a2 + A' x
    std::vector<double> g = st_.Atx;
    for (int i = 0; i < p_.A.cols; ++i) g[i] += p_.a2[i];
    return g;
  }
  static std::vector<double> negated(std::vector<double> v) {
    for (double& a : v) a = -a;
    return v;
  }
  static void mix(std::vector<double>& into, const std::vector<double>& next, double tau) {
    for (std::size_t i = 0; i < into.size(); ++i)
      into[i] = (1.0 - tau) * into[i] + tau * next[i];
  }

  // Standard excessive-gap initialization: x0 minimizes d_X, y responds to
  // x0, and x takes one Bregman gradient step from x0 against y.
  void init() {
    auto [mu1, mu2] = lipschitz_mu_init(p_, modulus(p_.X()), modulus(p_.Y()));
    st_.mu1 = mu1;
    st_.mu2 = mu2;

    std::vector<double> zero(p_.X().num_sequences(), 0.0);
    SmoothedBestResponse x0 = prox_x(zero, 1.0);  // centered-DGF minimizer

    st_.Atx = p_.apply_At(x0.point);
    SmoothedBestResponse y0 = prox_y(add(st_.Atx, p_.a2), st_.mu2);
    st_.y = y0.point;
    st_.Ay = p_.apply_A(st_.y);

    std::vector<double> arg =
        detail::dgf_gradient_behavioral(p_.X(), wx_, cfg_.xi, x0.behavioral);
    std::vector<double> gx = grad_x();
    for (std::size_t i = 0; i < arg.size(); ++i) arg[i] -= gx[i] / st_.mu1;
    st_.x = smoothed_best_response(p_.X(), wx_, cfg_.xi, 1.0, arg).point;
    st_.Atx = p_.apply_At(st_.x);

    if (excessive_gap_slack() < -cfg_.gap_tolerance)
      throw invariant_error("excessive gap condition failed at initialization (slack " +
                            std::to_string(excessive_gap_slack()) + ")");
  }

  static std::vector<double> add(std::vector<double> v, const std::vector<double>& w) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
    return v;
  }

  void step_x(double tau) {
    // Smoothed best response on the X side to the current y.
    SmoothedBestResponse xh = prox_x(negated(grad_x()), st_.mu1);
    // Gradient at the intermediate point (1-tau) x + tau xh, by linearity.
    std::vector<double> at_xh = p_.apply_At(xh.point);
    std::vector<double> gy_mid(p_.A.cols);
    for (int i = 0; i < p_.A.cols; ++i)
      gy_mid[i] = p_.a2[i] + (1.0 - tau) * st_.Atx[i] + tau * at_xh[i];
    SmoothedBestResponse w = prox_y(gy_mid, st_.mu2);
    std::vector<double> aw = p_.apply_A(w.point);

    mix(st_.y, w.point, tau);
    mix(st_.Ay, aw, tau);

    // Bregman step from xh against the gradient at the intermediate point.
    std::vector<double> arg =
        detail::dgf_gradient_behavioral(p_.X(), wx_, cfg_.xi, xh.behavioral);
    const double coef = tau / ((1.0 - tau) * st_.mu1);
    for (int i = 0; i < p_.A.rows; ++i) arg[i] -= coef * (p_.a1[i] + aw[i]);
    SmoothedBestResponse xt = smoothed_best_response(p_.X(), wx_, cfg_.xi, 1.0, arg);

    mix(st_.x, xt.point, tau);
    std::vector<double> at_xt = p_.apply_At(xt.point);
    mix(st_.Atx, at_xt, tau);
    st_.mu1 *= 1.0 - tau;
  }

  void step_y(double tau) {
    SmoothedBestResponse yh = prox_y(grad_y(), st_.mu2);
    std::vector<double> a_yh = p_.apply_A(yh.point);
    std::vector<double> gx_mid(p_.A.rows);
    for (int i = 0; i < p_.A.rows; ++i)
      gx_mid[i] = -(p_.a1[i] + (1.0 - tau) * st_.Ay[i] + tau * a_yh[i]);
    SmoothedBestResponse w = prox_x(gx_mid, st_.mu1);
    std::vector<double> at_w = p_.apply_At(w.point);

    mix(st_.x, w.point, tau);
    mix(st_.Atx, at_w, tau);

    std::vector<double> arg =
        detail::dgf_gradient_behavioral(p_.Y(), wy_, cfg_.xi, yh.behavioral);
    const double coef = tau / ((1.0 - tau) * st_.mu2);
    for (int i = 0; i < p_.A.cols; ++i) arg[i] += coef * (p_.a2[i] + at_w[i]);
    SmoothedBestResponse yt = smoothed_best_response(p_.Y(), wy_, cfg_.xi, 1.0, arg);

    mix(st_.y, yt.point, tau);
    std::vector<double> a_yt = p_.apply_A(yt.point);
    mix(st_.Ay, a_yt, tau);
    st_.mu2 *= 1.0 - tau;
  }

  void record(SolverTrace& trace, const RunOptions& opt) {
    if (!trace.points.empty() && trace.points.back().iteration == st_.k) return;
    TracePoint pt;
    pt.iteration = st_.k;
    pt.traversals = p_.traversals;
    pt.mu1 = st_.mu1;
    pt.mu2 = st_.mu2;
    pt.value_p1 = p_.p1_value(st_.x, st_.y);
    if (opt.compute_metrics) {
      pt.nash_gap = nash_gap(p_, st_.x, st_.y);
      pt.saddle_gap_perturbed = perturbed_saddle_gap(p_, cfg_.xi, st_.x, st_.y);
      pt.max_infoset_regret =
          std::max(infoset_max_regret(p_, st_.x, st_.y, kP1).max_regret,
                   infoset_max_regret(p_, st_.x, st_.y, kP2).max_regret);
    }
    trace.points.push_back(pt);
  }

  SequenceFormProblem& p_;
  EgtConfig cfg_;
  DgfWeights wx_, wy_;
  DgfCentering cx_, cy_;
  EgtState st_;
};

// Convenience wrapper: run EGT from a fresh state.
inline SolverTrace egt_run(SequenceFormProblem& p, const EgtConfig& cfg,
                           const RunOptions& opt) {
  EgtSolver solver(p, cfg);
  return solver.run(opt);
}

// Iteration count sufficient for an eps-accurate solution:
// ||A|| sqrt(M_X^2 2^{d_X+2} M_Y^2 2^{d_Y+2}) log(m) / eps.
inline double iteration_bound(const SequenceFormProblem& p, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("iteration_bound: eps must be > 0");
  const Treeplex& X = p.X();
  const Treeplex& Y = p.Y();
  double mx = X.max_l1(), my = Y.max_l1();
  double inner = mx * mx * std::ldexp(1.0, X.depth() + 2) * my * my *
                 std::ldexp(1.0, Y.depth() + 2);
  int m = std::max(X.max_simplex_size(), Y.max_simplex_size());
  return matrix_norm(p) * std::sqrt(inner) * std::log(static_cast<double>(m)) / eps;
}

}  // namespace efpe
