#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "zipcurve/core.hpp"
#include "zipcurve/parallel.hpp"
#include "zipcurve/symbolic.hpp"

namespace zipcurve {

enum class MatrixNorm { spectral, one };

inline double matrix_norm_buf(const double* m, int d, MatrixNorm norm) {
  return norm == MatrixNorm::spectral ? spectral_norm_buf(m, d) : induced_one_norm_buf(m, d);
}

// Matrices plus cylinder weights; the inputs of the pressure function.
// Need not come from a valid zipper (scalar oracles are legal inputs).
struct MatrixSystem {
  int dim = 0;
  std::vector<Mat> matrices;
  std::vector<double> weights;

  int count() const { return static_cast<int>(matrices.size()); }
};

inline MatrixSystem system_of(const Zipper& z) {
  MatrixSystem s;
  s.dim = z.dim;
  for (const AffineMap& f : z.maps) s.matrices.push_back(f.linear);
  s.weights = z.weights;
  return s;
}

inline void check_system(const MatrixSystem& s) {
  if (s.matrices.empty()) throw std::invalid_argument("matrix system: empty");
  if (s.weights.size() != s.matrices.size())
    throw std::invalid_argument("matrix system: weights/matrices mismatch");
  double wsum = 0.0;
  for (double w : s.weights) {
    if (!(w > 0.0)) throw std::invalid_argument("matrix system: weights must be positive");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("matrix system: weights must sum to 1");
  for (const Mat& m : s.matrices)
    if (m.dim() != s.dim) throw std::invalid_argument("matrix system: dimension mismatch");
}

struct PressureOptions {
  std::vector<int> depths{4, 8, 12, 16, 20};
  MatrixNorm norm = MatrixNorm::spectral;
  std::uint64_t leaf_budget = std::uint64_t{1} << 24;
};

namespace detail {

// Monotone-increasing root solve for F(s) = log sum_k exp(c_k - s b_k)
// with all b_k < 0. Newton with a bisection safeguard.
template <class FandD>
double solve_increasing_root(FandD&& fd, double s0) {
  double f, df;
  fd(s0, f, df);
  double lo = s0, hi = s0, step = 1.0;
  while (f > 0.0) {
    hi = lo;
    lo -= step;
    step *= 2.0;
    fd(lo, f, df);
    if (step > 1e12) throw std::domain_error("pressure: root bracketing failed (low)");
  }
  step = 1.0;
  fd(hi, f, df);
  while (f < 0.0) {
    lo = hi;
    hi += step;
    step *= 2.0;
    fd(hi, f, df);
    if (step > 1e12) throw std::domain_error("pressure: root bracketing failed (high)");
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    fd(s, f, df);
    if (f > 0.0)
      hi = s;
    else
      lo = s;
    double snew = s - f / df;
    if (!(snew > lo && snew < hi)) snew = 0.5 * (lo + hi);
    if (std::fabs(snew - s) < 1e-15 * std::max(1.0, std::fabs(s)) || hi - lo < 1e-15 * std::max(1.0, std::fabs(s))) {
      s = snew;
      break;
    }
    s = snew;
  }
  return s;
}

}  // namespace detail

// Caches, per depth of the schedule, the leaf data of the full word
// enumeration: log ||A_w|| and the weight class of w (weight products
// depend only on symbol counts). Evaluating P_n(t) afterwards costs one
// pass over the leaves; the root solve itself runs on the handful of
// weight classes. Finite-depth values are extrapolated in 1/n.
class PressureEvaluator {
 public:
  explicit PressureEvaluator(MatrixSystem sys, PressureOptions opt = {})
      : sys_(std::move(sys)), opt_(std::move(opt)) {
    check_system(sys_);
    if (opt_.depths.empty()) throw std::invalid_argument("pressure: empty depth schedule");
    for (std::size_t i = 1; i < opt_.depths.size(); ++i)
      if (opt_.depths[i] <= opt_.depths[i - 1])
        throw std::invalid_argument("pressure: depth schedule must increase");
    levels_.reserve(opt_.depths.size());
    for (int n : opt_.depths) levels_.push_back(build_level(n));
  }

  const MatrixSystem& system() const { return sys_; }
  const std::vector<int>& depths() const { return opt_.depths; }
  MatrixNorm norm() const { return opt_.norm; }

  // P_n(t): the unique s with sum_{|w|=n} ||A_w||^t lambda_w^{-s} = 1.
  double finite_depth(double t, int depth) const {
    for (const Level& lv : levels_)
      if (lv.depth == depth) return solve_level(lv, t);
    throw std::invalid_argument("pressure: depth not in schedule");
  }

  // Extrapolated P(t): linear fit of P_n against 1/n on the top three
  // depths of the schedule.
  double extrapolated(double t, double* fit_residual = nullptr) const {
    const std::size_t k = std::min<std::size_t>(3, levels_.size());
    const std::size_t first = levels_.size() - k;
    if (k == 1) {
      if (fit_residual) *fit_residual = 0.0;
      return solve_level(levels_[first], t);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> xs(k), ys(k);
    for (std::size_t i = 0; i < k; ++i) {
      xs[i] = 1.0 / levels_[first + i].depth;
      ys[i] = solve_level(levels_[first + i], t);
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
    }
    const double m = static_cast<double>(k);
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / m;
    if (fit_residual) {
      double r = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        r = std::max(r, std::fabs(intercept + slope * xs[i] - ys[i]));
      *fit_residual = r;
    }
    return intercept;
  }

  double operator()(double t) const { return extrapolated(t); }

  double derivative(double t, double h = 1e-3) const {
    return (extrapolated(t + h) - extrapolated(t - h)) / (2.0 * h);
  }

  // d0: unique zero of the extrapolated pressure, bisected to 1e-10.
  double root(double hi_limit = 64.0) const {
    double lo = 0.0, f_lo = extrapolated(0.0);
    if (f_lo > 0.0) lo = -1.0, f_lo = extrapolated(lo);
    double hi = 1.0;
    while (extrapolated(hi) < 0.0) {
      hi *= 2.0;
      if (hi > hi_limit)
        throw std::domain_error("pressure root: no sign change on [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
    }
    if (f_lo > 0.0) throw std::domain_error("pressure root: no sign change (P(0) >= 0)");
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (extrapolated(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  // Solves P'(t) = target on [lo, hi]; P' is nonincreasing.
  double solve_derivative(double target, double lo, double hi) const {
    double dlo = derivative(lo), dhi = derivative(hi);
    if (!(dlo >= target && target >= dhi))
      throw std::domain_error("pressure: derivative target " + std::to_string(target) +
                              " not bracketed on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (derivative(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  // Extremal exponents from the deepest level: min/max over words of
  // log||A_w|| / log lambda_w. Finite-depth values converge from inside
  // the true interval.
  double alpha_min() const { return levels_.back().min_ratio; }
  double alpha_max() const { return levels_.back().max_ratio; }
  double alpha_hat() const { return derivative(0.0); }

 private:
  struct Level {
    int depth = 0;
    std::vector<double> leaf_log_norm;
    std::vector<std::int32_t> leaf_group;   // empty when groups are not used
    std::vector<double> leaf_log_weight;    // used only without groups
    std::vector<double> group_log_weight;   // canonical per group id
    int group_space = 0;
    double min_ratio = 0.0, max_ratio = 0.0;
  };

  Level build_level(int depth) const {
    const int nsym = sys_.count();
    const int d = sys_.dim;
    const int dd = d * d;
    double leaves_f = 1.0;
    for (int i = 0; i < depth; ++i) leaves_f *= nsym;
    if (leaves_f > static_cast<double>(opt_.leaf_budget))
      throw std::invalid_argument("pressure: N^depth exceeds enumeration budget " +
                                  std::to_string(opt_.leaf_budget));
    const std::uint64_t leaves = static_cast<std::uint64_t>(leaves_f);

    Level lv;
    lv.depth = depth;
    lv.leaf_log_norm.resize(leaves);

    // Weight classes: symbol count vectors encoded in mixed radix. When
    // the id space would blow up, fall back to per-leaf weights.
    double space = 1.0;
    for (int j = 0; j < nsym - 1; ++j) space *= (depth + 1);
    const bool grouped = space <= static_cast<double>(1 << 20);
    std::vector<std::int64_t> stride(nsym, 0);
    if (grouped) {
      lv.group_space = static_cast<int>(space);
      std::int64_t acc = 1;
      for (int j = 0; j < nsym - 1; ++j) {
        stride[j] = acc;
        acc *= (depth + 1);
      }
      lv.leaf_group.resize(leaves);
    } else {
      lv.leaf_log_weight.resize(leaves);
    }

    std::vector<double> logw(nsym);
    for (int j = 0; j < nsym; ++j) logw[j] = std::log(sys_.weights[j]);

    // Split the enumeration over fixed top-level prefixes; each task
    // fills its own slice, so the layout is independent of threading.
    int prefix_depth = 0;
    std::uint64_t tasks = 1;
    const std::uint64_t want = 4u * static_cast<unsigned>(worker_count());
    while (prefix_depth < depth && tasks < want && tasks * nsym <= 4096) {
      tasks *= nsym;
      ++prefix_depth;
    }
    const int sub_depth = depth - prefix_depth;
    std::uint64_t sub_leaves = 1;
    for (int i = 0; i < sub_depth; ++i) sub_leaves *= nsym;

    std::vector<double> task_min(tasks, std::numeric_limits<double>::infinity());
    std::vector<double> task_max(tasks, -std::numeric_limits<double>::infinity());

    run_tasks(static_cast<int>(tasks), [&](int task) {
      // Prefix digits of this task in lexicographic order.
      std::vector<int> digits(prefix_depth, 0);
      {
        std::uint64_t rest = static_cast<std::uint64_t>(task);
        for (int i = prefix_depth - 1; i >= 0; --i) {
          digits[i] = static_cast<int>(rest % nsym);
          rest /= nsym;
        }
      }
      std::vector<double> stack(static_cast<std::size_t>(depth + 1) * dd, 0.0);
      for (int i = 0; i < d; ++i) stack[static_cast<std::size_t>(i) * d + i] = 1.0;
      std::vector<double> lw(depth + 1, 0.0);
      std::vector<int> counts(nsym, 0);
      for (int i = 0; i < prefix_depth; ++i) {
        mat_mul_buf(&stack[static_cast<std::size_t>(i) * dd], sys_.matrices[digits[i]].data(),
                    &stack[static_cast<std::size_t>(i + 1) * dd], d);
        lw[i + 1] = lw[i] + logw[digits[i]];
        ++counts[digits[i]];
      }

      std::uint64_t slot = static_cast<std::uint64_t>(task) * sub_leaves;
      double lmin = std::numeric_limits<double>::infinity();
      double lmax = -lmin;
      std::vector<int> path(sub_depth, 0);
      int level = prefix_depth;
      for (;;) {
        while (level < depth) {
          const int sym = path[level - prefix_depth];
          mat_mul_buf(&stack[static_cast<std::size_t>(level) * dd], sys_.matrices[sym].data(),
                      &stack[static_cast<std::size_t>(level + 1) * dd], d);
          lw[level + 1] = lw[level] + logw[sym];
          ++counts[sym];
          ++level;
        }
        const double a = std::log(matrix_norm_buf(&stack[static_cast<std::size_t>(depth) * dd], d, opt_.norm));
        lv.leaf_log_norm[slot] = a;
        if (grouped) {
          std::int64_t gid = 0;
          for (int j = 0; j < nsym - 1; ++j) gid += stride[j] * counts[j];
          lv.leaf_group[slot] = static_cast<std::int32_t>(gid);
        } else {
          lv.leaf_log_weight[slot] = lw[depth];
        }
        const double ratio = a / lw[depth];
        lmin = std::min(lmin, ratio);
        lmax = std::max(lmax, ratio);
        ++slot;
        while (level > prefix_depth && path[level - prefix_depth - 1] == nsym - 1) {
          --level;
          --counts[nsym - 1];
          path[level - prefix_depth] = 0;
        }
        if (level == prefix_depth) break;
        --counts[path[level - prefix_depth - 1]];
        ++path[level - prefix_depth - 1];
        --level;
      }
      task_min[task] = lmin;
      task_max[task] = lmax;
    });

    lv.min_ratio = std::numeric_limits<double>::infinity();
    lv.max_ratio = -lv.min_ratio;
    for (std::uint64_t i = 0; i < tasks; ++i) {
      lv.min_ratio = std::min(lv.min_ratio, task_min[i]);
      lv.max_ratio = std::max(lv.max_ratio, task_max[i]);
    }

    if (grouped) {
      // Canonical log weight per class, decoded from the count vector.
      lv.group_log_weight.assign(lv.group_space, std::numeric_limits<double>::quiet_NaN());
      for (std::int32_t gid : lv.leaf_group) {
        if (!std::isnan(lv.group_log_weight[gid])) continue;
        std::int64_t rest = gid;
        int total = 0;
        double b = 0.0;
        for (int j = 0; j < nsym - 1; ++j) {
          const int cnt = static_cast<int>(rest % (depth + 1));
          rest /= (depth + 1);
          b += cnt * logw[j];
          total += cnt;
        }
        b += (depth - total) * logw[nsym - 1];
        lv.group_log_weight[gid] = b;
      }
    }
    return lv;
  }

  double solve_level(const Level& lv, double t) const {
    if (!lv.leaf_group.empty()) {
      // Collapse leaves onto weight classes: per-class streaming
      // log-sum-exp of t * log||A_w||.
      std::vector<double> gmax(lv.group_space, -std::numeric_limits<double>::infinity());
      std::vector<double> gsum(lv.group_space, 0.0);
      const std::size_t m = lv.leaf_log_norm.size();
      for (std::size_t k = 0; k < m; ++k) {
        const double v = t * lv.leaf_log_norm[k];
        const std::int32_t g = lv.leaf_group[k];
        if (v <= gmax[g]) {
          gsum[g] += std::exp(v - gmax[g]);
        } else {
          gsum[g] = gsum[g] * std::exp(gmax[g] - v) + 1.0;
          gmax[g] = v;
        }
      }
      std::vector<double> c, b;
      c.reserve(16);
      b.reserve(16);
      for (int g = 0; g < lv.group_space; ++g)
        if (gsum[g] > 0.0) {
          c.push_back(gmax[g] + std::log(gsum[g]));
          b.push_back(lv.group_log_weight[g]);
        }
      auto fd = [&](double s, double& f, double& df) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < c.size(); ++k) mx = std::max(mx, c[k] - s * b[k]);
        double sum = 0.0, dsum = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
          const double e = std::exp(c[k] - s * b[k] - mx);
          sum += e;
          dsum += -b[k] * e;
        }
        f = mx + std::log(sum);
        df = dsum / sum;
      };
      return detail::solve_increasing_root(fd, c[0] / b[0]);
    }
    // Ungrouped fallback: stream the leaves on every iteration.
    const std::vector<double>& a = lv.leaf_log_norm;
    const std::vector<double>& w = lv.leaf_log_weight;
    auto fd = [&](double s, double& f, double& df) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < a.size(); ++k) mx = std::max(mx, t * a[k] - s * w[k]);
      double sum = 0.0, dsum = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double e = std::exp(t * a[k] - s * w[k] - mx);
        sum += e;
        dsum += -w[k] * e;
      }
      f = mx + std::log(sum);
      df = dsum / sum;
    };
    return detail::solve_increasing_root(fd, t * a[0] / w[0]);
  }

  MatrixSystem sys_;
  PressureOptions opt_;
  std::vector<Level> levels_;
};

// Single finite-depth pressure value without the cached evaluator.
inline double pressure_at(const MatrixSystem& sys, double t, int depth,
                          MatrixNorm norm = MatrixNorm::spectral,
                          std::uint64_t leaf_budget = std::uint64_t{1} << 24) {
  PressureOptions opt;
  opt.depths = {depth};
  opt.norm = norm;
  opt.leaf_budget = leaf_budget;
  PressureEvaluator ev(sys, opt);
  return ev.finite_depth(t, depth);
}

inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi > lo)) throw std::invalid_argument("grid: need lo < hi and step > 0");
  std::vector<double> g;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 0.5));
  g.reserve(n + 1);
  for (int i = 0; i <= n; ++i) g.push_back(lo + i * step);
  return g;
}

// Tabulated pressure with per-depth approximants, extrapolation,
// derivative, and the summary exponents.
struct PressureCurve {
  std::vector<double> t_grid;
  std::vector<int> depths;
  std::vector<std::vector<double>> per_depth;  // [depth index][t index]
  std::vector<double> pressure;                // extrapolated
  std::vector<double> derivative;              // grid central differences
  std::vector<double> residual;                // extrapolation fit residual
  double d0 = 0.0;
  double alpha_min = 0.0, alpha_max = 0.0, alpha_hat = 0.0;
  bool concave_ok = true;
  double concavity_slack = 0.0;  // worst midpoint violation observed

  double interp(double t) const { return interp_on(pressure, t); }
  double interp_derivative(double t) const { return interp_on(derivative, t); }

 private:
  double interp_on(const std::vector<double>& y, double t) const {
    if (t_grid.size() == 1) return y[0];
    if (t <= t_grid.front()) return y.front();
    if (t >= t_grid.back()) return y.back();
    const auto it = std::upper_bound(t_grid.begin(), t_grid.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - t_grid.begin());
    const double f = (t - t_grid[k - 1]) / (t_grid[k] - t_grid[k - 1]);
    return y[k - 1] + f * (y[k] - y[k - 1]);
  }
};

inline PressureCurve pressure_curve(const PressureEvaluator& ev, const std::vector<double>& t_grid) {
  if (t_grid.size() < 3) throw std::invalid_argument("pressure_curve: grid too small");
  PressureCurve c;
  c.t_grid = t_grid;
  c.depths = ev.depths();
  const std::size_t m = t_grid.size();
  c.per_depth.assign(c.depths.size(), std::vector<double>(m, 0.0));
  c.pressure.assign(m, 0.0);
  c.residual.assign(m, 0.0);

  run_tasks(static_cast<int>(m), [&](int ti) {
    for (std::size_t di = 0; di < c.depths.size(); ++di)
      c.per_depth[di][ti] = ev.finite_depth(t_grid[ti], c.depths[di]);
    double res;
    c.pressure[ti] = ev.extrapolated(t_grid[ti], &res);
    c.residual[ti] = res;
  });

  c.derivative.assign(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0)
      c.derivative[i] = (c.pressure[1] - c.pressure[0]) / (t_grid[1] - t_grid[0]);
    else if (i + 1 == m)
      c.derivative[i] = (c.pressure[m - 1] - c.pressure[m - 2]) / (t_grid[m - 1] - t_grid[m - 2]);
    else
      c.derivative[i] = (c.pressure[i + 1] - c.pressure[i - 1]) / (t_grid[i + 1] - t_grid[i - 1]);
  }

  c.concavity_slack = 0.0;
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double mid_violation = 0.5 * (c.pressure[i - 1] + c.pressure[i + 1]) - c.pressure[i];
    c.concavity_slack = std::max(c.concavity_slack, mid_violation);
    if (c.pressure[i] < c.pressure[i - 1] - 1e-9) c.concave_ok = false;
  }
  if (c.concavity_slack > 1e-6) c.concave_ok = false;

  c.d0 = ev.root();
  c.alpha_hat = ev.alpha_hat();
  c.alpha_min = ev.alpha_min();
  c.alpha_max = ev.alpha_max();
  return c;
}

struct LegendreResult {
  double value = 0.0;
  double t_star = 0.0;
  bool clamped = false;  // beta at/beyond the attainable derivative range
};

namespace detail {
// Accelerates a geometric tail toward its limit; near-linear sequences
// (increment ratio close to 1) are left at the endpoint value, since the
// acceleration would blow up on them.
inline double aitken_limit(double q1, double q2, double q3) {
  const double d1 = q2 - q1, d2 = q3 - q2;
  if (!(std::fabs(d2) < 0.99 * std::fabs(d1))) return q3;
  const double den = d2 - d1;
  if (std::fabs(den) < 1e-13 * (std::fabs(d1) + std::fabs(d2) + 1e-300)) return q3;
  return q3 - d2 * d2 / den;
}
}  // namespace detail

// D(beta) = inf_t { t beta - P(t) }: by concavity the infimum sits where
// P'(t) = beta, located by monotone bracketing on the derivative grid.
// Endpoint betas take the accelerated tail limit of t beta - P(t).
inline LegendreResult legendre(const PressureCurve& c, double beta, double domain_tol = 1e-6) {
  if (beta < c.alpha_min - domain_tol || beta > c.alpha_max + domain_tol)
    throw std::domain_error("legendre: beta " + std::to_string(beta) + " outside [" +
                            std::to_string(c.alpha_min) + ", " + std::to_string(c.alpha_max) + "]");
  const std::vector<double>& d = c.derivative;
  const std::vector<double>& t = c.t_grid;
  const std::size_t m = t.size();
  auto q = [&](std::size_t i) { return t[i] * beta - c.pressure[i]; };

  LegendreResult out;
  if (beta > d.front()) {  // steeper than anything on the grid: t* -> -inf
    out.value = detail::aitken_limit(q(2), q(1), q(0));
    out.t_star = t.front();
    out.clamped = true;
    return out;
  }
  if (beta < d.back()) {  // flatter than anything on the grid: t* -> +inf
    out.value = detail::aitken_limit(q(m - 3), q(m - 2), q(m - 1));
    out.t_star = t.back();
    out.clamped = true;
    return out;
  }
  std::size_t k = 0;
  while (k < m && d[k] > beta) ++k;
  if (k == 0) {
    out.value = q(0);
    out.t_star = t[0];
    return out;
  }
  const double den = d[k - 1] - d[k];
  const double f = den > 0.0 ? (d[k - 1] - beta) / den : 1.0;
  out.t_star = t[k - 1] + f * (t[k] - t[k - 1]);
  const double p = c.pressure[k - 1] + f * (c.pressure[k] - c.pressure[k - 1]);
  out.value = out.t_star * beta - p;
  return out;
}

struct SpectrumPoint {
  double beta = 0.0;
  double value = 0.0;
  double t_star = 0.0;
  std::string window;          // validity tag for the liminf exponent spectrum
  std::string regular_window;  // validity tag for the regular exponent spectrum
};

struct SpectrumCurve {
  std::vector<SpectrumPoint> points;
  double alpha_hat = 0.0;
  bool degenerate = false;  // single-exponent system
  bool symmetric = false;
  bool assumption_a = false;
};

inline SpectrumCurve spectrum_curve(const PressureCurve& c, const std::vector<double>& betas,
                                    bool symmetric, bool assumption_a) {
  SpectrumCurve s;
  s.alpha_hat = c.alpha_hat;
  s.symmetric = symmetric;
  s.assumption_a = assumption_a;
  if (c.alpha_max - c.alpha_min < 1e-9) {
    s.degenerate = true;
    s.points.push_back({c.alpha_hat, 1.0, 0.0, "degenerate", "degenerate"});
    return s;
  }
  const double tolg = 1e-9;
  for (double beta : betas) {
    if (beta < c.alpha_min - 1e-6 || beta > c.alpha_max + 1e-6) continue;
    SpectrumPoint p;
    p.beta = beta;
    const LegendreResult lr = legendre(c, beta);
    p.value = lr.value;
    p.t_star = lr.t_star;
    if (assumption_a && symmetric)
      p.window = "assA-full";
    else if (assumption_a)
      p.window = beta >= c.alpha_hat - tolg ? "assA-upper" : "assA-regular-only";
    else if (symmetric)
      p.window = beta <= c.alpha_hat + tolg ? "symmetric-ext" : "nondeg-qualitative";
    else
      p.window = beta >= c.alpha_hat - tolg ? "nondeg-qualitative" : "outside-window";
    p.regular_window = assumption_a ? "assA-full" : "none";
    s.points.push_back(std::move(p));
  }
  return s;
}

// Unnormalized Gibbs cylinder weight ||A_w||^t lambda_w^{-P(t)}.
inline double gibbs_log_weight(const MatrixSystem& sys, const Word& w, double t, double pressure_t,
                               MatrixNorm norm = MatrixNorm::spectral) {
  Mat prod = Mat::identity(sys.dim);
  double lw = 0.0;
  for (int sym : w.symbols) {
    prod = prod * sys.matrices[sym];
    lw += std::log(sys.weights[sym]);
  }
  const double a = std::log(norm == MatrixNorm::spectral ? spectral_norm(prod) : induced_one_norm(prod));
  return t * a - pressure_t * lw;
}

inline double gibbs_weight(const MatrixSystem& sys, const PressureCurve& c, const Word& w, double t,
                           MatrixNorm norm = MatrixNorm::spectral) {
  return std::exp(gibbs_log_weight(sys, w, t, c.interp(t), norm));
}

// log of the level-n normalizer sum_{|w|=n} ||A_w||^t lambda_w^{-P(t)}.
inline double gibbs_log_normalizer(const MatrixSystem& sys, int depth, double t, double pressure_t,
                                   MatrixNorm norm = MatrixNorm::spectral) {
  // One DFS pass, streaming log-sum-exp.
  const int d = sys.dim;
  const int dd = d * d;
  const int nsym = sys.count();
  std::vector<double> stack(static_cast<std::size_t>(depth + 1) * dd, 0.0);
  for (int i = 0; i < d; ++i) stack[static_cast<std::size_t>(i) * d + i] = 1.0;
  std::vector<double> lw(depth + 1, 0.0);
  std::vector<int> path(depth, 0);
  double mx = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  int level = 0;
  for (;;) {
    while (level < depth) {
      mat_mul_buf(&stack[static_cast<std::size_t>(level) * dd], sys.matrices[path[level]].data(),
                  &stack[static_cast<std::size_t>(level + 1) * dd], d);
      lw[level + 1] = lw[level] + std::log(sys.weights[path[level]]);
      ++level;
    }
    const double v =
        t * std::log(matrix_norm_buf(&stack[static_cast<std::size_t>(depth) * dd], d, norm)) -
        pressure_t * lw[depth];
    if (v <= mx) {
      sum += std::exp(v - mx);
    } else {
      sum = sum * std::exp(mx - v) + 1.0;
      mx = v;
    }
    while (level > 0 && path[level - 1] == nsym - 1) path[--level] = 0;
    if (level == 0) break;
    ++path[level - 1];
    --level;
  }
  return mx + std::log(sum);
}

// dim_H mu_t = t P'(t) - P(t), from the tabulated curve.
inline double gibbs_dimension(const PressureCurve& c, double t) {
  return t * c.interp_derivative(t) - c.interp(t);
}

struct CountingSpectrum {
  double r = 0.0, delta = 0.0;
  std::vector<double> beta;
  std::vector<double> value;            // -inf sentinel on empty bins
  std::vector<std::int64_t> bin_count;
};

// Brute-force spectrum oracle: counts stopping-partition cylinders whose
// norm/weight ratio falls in [beta - delta, beta + delta] and normalizes
// the log count by -log r.
inline CountingSpectrum counting_spectrum(const MatrixSystem& sys, double r, double delta,
                                          const std::vector<double>& betas,
                                          MatrixNorm norm = MatrixNorm::spectral,
                                          std::uint64_t budget = std::uint64_t{1} << 24) {
  check_system(sys);
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("counting_spectrum: r must lie in (0,1)");
  double wmin = 1.0;
  for (double w : sys.weights) wmin = std::min(wmin, w);
  if (1.0 / (r * wmin) > static_cast<double>(budget))
    throw std::invalid_argument("counting_spectrum: partition cardinality exceeds budget");

  CountingSpectrum out;
  out.r = r;
  out.delta = delta;
  out.beta = betas;
  out.bin_count.assign(betas.size(), 0);

  const int d = sys.dim;
  const int dd = d * d;
  const int nsym = sys.count();
  // DFS over the stopping tree: descend while the weight product exceeds
  // r, count the node once it crosses.
  constexpr int kMaxDepth = 4096;
  std::vector<double> stack(static_cast<std::size_t>(kMaxDepth + 1) * dd, 0.0);
  for (int i = 0; i < d; ++i) stack[static_cast<std::size_t>(i) * d + i] = 1.0;
  std::vector<double> wprod{1.0};
  std::vector<int> branch{0};
  while (!branch.empty()) {
    if (branch.back() == nsym) {
      branch.pop_back();
      wprod.pop_back();
      if (!branch.empty()) ++branch.back();
      continue;
    }
    const int sym = branch.back();
    const int level = static_cast<int>(branch.size()) - 1;
    if (level + 1 > kMaxDepth) throw std::domain_error("counting_spectrum: stopping tree too deep");
    mat_mul_buf(&stack[static_cast<std::size_t>(level) * dd], sys.matrices[sym].data(),
                &stack[static_cast<std::size_t>(level + 1) * dd], d);
    const double w = wprod.back() * sys.weights[sym];
    if (w <= r) {
      const double a = std::log(matrix_norm_buf(&stack[static_cast<std::size_t>(level + 1) * dd], d, norm));
      const double ratio = a / std::log(w);
      for (std::size_t bi = 0; bi < betas.size(); ++bi)
        if (std::fabs(ratio - betas[bi]) <= delta) ++out.bin_count[bi];
      ++branch.back();
    } else {
      wprod.push_back(w);
      branch.push_back(0);
    }
  }
  out.value.resize(betas.size());
  for (std::size_t bi = 0; bi < betas.size(); ++bi)
    out.value[bi] = out.bin_count[bi] > 0
                        ? std::log(static_cast<double>(out.bin_count[bi])) / (-std::log(r))
                        : -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace zipcurve
