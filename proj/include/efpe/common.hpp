#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace efpe {

// Thrown when a game tree / treeplex description is internally inconsistent
// (cycles, overlapping index ranges, perfect-recall violations, ...).
class structure_error : public std::runtime_error {
 public:
  explicit structure_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a solver-internal invariant breaks (e.g. the excessive gap
// condition fails on entry to a step). Indicates a bug or an unsound
// configuration, not bad user input.
class invariant_error : public std::logic_error {
 public:
  explicit invariant_error(const std::string& what) : std::logic_error(what) {}
};

// Absolute tolerance for simplex-sum equalities in sequence-form points.
inline constexpr double kSimplexSumTol = 1e-9;

// Slack allowed below the q_i >= xi * q_parent bound, absorbs round-off.
inline constexpr double kPerturbationSlack = 1e-12;

// Interior points are clamped no closer than this to the perturbed boundary
// before gradients are evaluated (avoids log(0) / overflow).
inline constexpr double kBoundaryClamp = 1e-12;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// log(sum_i exp(g_i)) with max-subtraction.
inline double log_sum_exp(std::span<const double> g) {
  double m = g[0];
  for (double v : g) m = std::max(m, v);
  double s = 0.0;
  for (double v : g) s += std::exp(v - m);
  return m + std::log(s);
}

// out_i = exp(g_i) / sum_j exp(g_j), computed with max-subtraction.
inline void softmax(std::span<const double> g, std::span<double> out) {
  double m = g[0];
  for (double v : g) m = std::max(m, v);
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    out[i] = std::exp(g[i] - m);
    s += out[i];
  }
  for (std::size_t i = 0; i < g.size(); ++i) out[i] /= s;
}

}  // namespace efpe
