#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "zipcurve/cones.hpp"
#include "zipcurve/core.hpp"
#include "zipcurve/pressure.hpp"
#include "zipcurve/symbolic.hpp"

namespace zipcurve {

struct DeRhamPreset {
  double omega = 0.0;
  Zipper zipper;
  bool smooth_parabola = false;        // omega = 1/4: the curve is a parabola arc
  bool no_dominated_splitting = false; // omega = 1/3: splitting fails
};

inline Mat derham_matrix0(double w) { return Mat(2, {w, 0.0, w, 1.0 - 2.0 * w}); }
inline Mat derham_matrix1(double w) { return Mat(2, {1.0 - 2.0 * w, w, 0.0, w}); }

// The two-map zipper of the de Rham curve. Vertices come from the
// fixed-point solves so arbitrary omega stays exact.
inline DeRhamPreset derham_build(double omega) {
  if (!(omega > 0.0 && omega < 0.5))
    throw std::invalid_argument("derham: omega must lie in (0, 1/2)");
  DeRhamPreset p;
  p.omega = omega;
  p.smooth_parabola = std::fabs(omega - 0.25) < 1e-12;
  p.no_dominated_splitting = std::fabs(omega - 1.0 / 3.0) < 1e-12;

  Zipper z;
  z.dim = 2;
  AffineMap f0{derham_matrix0(omega), {0.0, -2.0 * omega}};
  AffineMap f1{derham_matrix1(omega), {2.0 * omega, 0.0}};
  z.maps = {f0, f1};
  z.weights = {0.5, 0.5};
  z.signature = {0, 0};
  const Vec z0 = fixed_point(f0);
  const Vec z2 = fixed_point(f1);
  z.vertices = {z0, apply_map(f0, z2), z2};

  const ValidationReport rep = validate_zipper(z, 1e-9);
  if (!rep.pass) throw std::logic_error("derham: construction failed validation");
  p.zipper = std::move(z);
  return p;
}

// Admissible omega interval of the positivity coordinate change:
// tilde family (1/(3-e), 1/(2-e-e^2)); hat family (d/(1+3d), 1/(3+d)).
inline std::pair<double, double> derham_positivity_window(ConjugationFamily family, double param) {
  if (!(param > 0.0 && param < 1.0))
    throw std::invalid_argument("positivity_window: parameter must lie in (0,1)");
  switch (family) {
    case ConjugationFamily::tilde:
      return {1.0 / (3.0 - param), 1.0 / (2.0 - param - param * param)};
    case ConjugationFamily::hat:
      return {param / (1.0 + 3.0 * param), 1.0 / (3.0 + param)};
    default:
      throw std::invalid_argument("positivity_window: only the hat and tilde families");
  }
}

struct StochasticReport {
  double row_sum_residual = 0.0;   // rows of A_0 + A_1 against 1
  double left_residual = 0.0;      // p^T M = p^T for p = (1/2, 1/2)
  double right_residual = 0.0;     // M e = e for e = (1, 1)
  Vec left{0.5, 0.5};
  Vec right{1.0, 1.0};
};

// A_0 + A_1 is doubly stochastic for every omega; reports the residuals.
inline StochasticReport derham_stochastic_check(double omega) {
  const Mat m = [&] {
    Mat s(2);
    const Mat a = derham_matrix0(omega), b = derham_matrix1(omega);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) s(i, j) = a(i, j) + b(i, j);
    return s;
  }();
  StochasticReport rep;
  for (int i = 0; i < 2; ++i)
    rep.row_sum_residual = std::max(rep.row_sum_residual, std::fabs(m(i, 0) + m(i, 1) - 1.0));
  for (int j = 0; j < 2; ++j)
    rep.left_residual =
        std::max(rep.left_residual, std::fabs(0.5 * m(0, j) + 0.5 * m(1, j) - 0.5));
  for (int i = 0; i < 2; ++i)
    rep.right_residual = std::max(rep.right_residual, std::fabs(m(i, 0) + m(i, 1) - 1.0));
  return rep;
}

// mu_1 cylinder weight p^T A_w e with p = (1/2,1/2), e = (1,1).
inline double derham_mu1_weight(double omega, const Word& w) {
  const Mat mats[2] = {derham_matrix0(omega), derham_matrix1(omega)};
  Vec v{1.0, 1.0};
  for (auto it = w.symbols.rbegin(); it != w.symbols.rend(); ++it) {
    if (*it != 0 && *it != 1) throw std::invalid_argument("mu1_weight: binary words only");
    v = mats[*it] * v;
  }
  return 0.5 * (v[0] + v[1]);
}

struct NondiffDimension {
  bool degenerate = false;      // P' identically 1 (conformal control)
  bool refused_smooth = false;  // omega = 1/4: smooth parabola case
  double t_star = 0.0;          // P'(t_star) = 1
  double dim = 1.0;             // t_star - P(t_star)
};

// Hausdorff dimension of the non-differentiability set: t - P(t) at the
// parameter where P' crosses 1. Guarded by the mu_1([00]) != 1/4 gate
// that separates the smooth parabola case.
inline NondiffDimension nondiff_dimension(double omega, const PressureCurve& curve) {
  NondiffDimension out;
  if (std::fabs(derham_mu1_weight(omega, Word{{0, 0}}) - 0.25) <= 1e-9) {
    out.refused_smooth = true;
    return out;
  }
  bool all_one = true;
  for (double dv : curve.derivative)
    if (std::fabs(dv - 1.0) > 1e-9) {
      all_one = false;
      break;
    }
  if (all_one) {
    out.degenerate = true;
    out.t_star = 0.0;
    out.dim = 1.0;
    return out;
  }
  // monotone bracket on the derivative grid
  const std::vector<double>& d = curve.derivative;
  std::size_t k = 0;
  while (k < d.size() && d[k] > 1.0) ++k;
  if (k == 0 || k == d.size())
    throw std::domain_error("nondiff_dimension: P' does not cross 1; widen the t-grid");
  const double den = d[k - 1] - d[k];
  const double f = den > 0 ? (d[k - 1] - 1.0) / den : 1.0;
  out.t_star = curve.t_grid[k - 1] + f * (curve.t_grid[k] - curve.t_grid[k - 1]);
  out.dim = out.t_star - curve.interp(out.t_star);
  return out;
}

// Dimension of the projected symmetric Bernoulli measure: 1 / P'(0).
inline double projected_measure_dim(const PressureCurve& curve) { return 1.0 / curve.alpha_hat; }

}  // namespace zipcurve
