#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "zipcurve/core.hpp"
#include "zipcurve/pressure.hpp"
#include "zipcurve/rng.hpp"
#include "zipcurve/symbolic.hpp"

namespace zipcurve {

// Ratio sequence log||A_{i|n}|| / log lambda_{i|n}, n = 1..depth; the last
// entry is the depth-n exponent estimate at pi(i).
inline std::vector<double> symbolic_exponent(const MatrixSystem& sys, const SymbolStream& s,
                                             int depth, MatrixNorm norm = MatrixNorm::spectral) {
  if (depth < 1) throw std::invalid_argument("symbolic_exponent: depth must be positive");
  std::vector<double> out;
  out.reserve(depth);
  Mat prod = Mat::identity(sys.dim);
  double lw = 0.0;
  for (int n = 1; n <= depth; ++n) {
    const int sym = s.at(n - 1);
    prod = prod * sys.matrices[sym];
    lw += std::log(sys.weights[sym]);
    const double a =
        std::log(norm == MatrixNorm::spectral ? spectral_norm(prod) : induced_one_norm(prod));
    out.push_back(a / lw);
  }
  return out;
}

inline std::vector<double> symbolic_exponent(const Zipper& z, const SymbolStream& s, int depth,
                                             MatrixNorm norm = MatrixNorm::spectral) {
  return symbolic_exponent(system_of(z), s, depth, norm);
}

// Least-squares slope of log||A_{i|k}|| against log lambda_{i|k} over
// k in [k_lo, k_hi]; the windowed regression form of the exponent, the
// natural partner of the metric regression estimator below.
inline double symbolic_regression(const MatrixSystem& sys, const SymbolStream& s, int k_lo,
                                  int k_hi, MatrixNorm norm = MatrixNorm::spectral) {
  if (!(1 <= k_lo && k_lo < k_hi)) throw std::invalid_argument("symbolic_regression: bad window");
  Mat prod = Mat::identity(sys.dim);
  double lw = 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int k = 1; k <= k_hi; ++k) {
    const int sym = s.at(k - 1);
    prod = prod * sys.matrices[sym];
    lw += std::log(sys.weights[sym]);
    if (k < k_lo) continue;
    const double a =
        std::log(norm == MatrixNorm::spectral ? spectral_norm(prod) : induced_one_norm(prod));
    sx += lw;
    sy += a;
    sxx += lw * lw;
    sxy += lw * a;
    ++m;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct HolderEstimate {
  double x = 0.0;
  double direct_min = 0.0;         // liminf proxy: worst envelope slope, deep half
  double direct_regression = 0.0;  // slope of the distance envelope across scales
  std::vector<double> scales;      // the dyadic scales used
  std::vector<double> envelope_slope;  // per-scale envelope slope, parallel to scales
  bool one_sided = false;
};

struct DirectOptions {
  int scale_count = 16;
  int samples_per_scale = 8;
  std::uint64_t seed = 1;
};

// Metric estimate of the pointwise exponent at x. Per dyadic scale
// rho_k = 2^-k (k = 4 .. 3+scale_count) the two endpoints x +- rho_k and
// seeded uniform draws from the annulus rho_{k+1} <= |y-x| <= rho_k feed
// a per-scale distance envelope max_y ||v(x) - v(y)||; the regression
// slope of the envelope across scales estimates the exponent, and the
// worst envelope slope over the deepest half of the scales is the liminf
// proxy (an estimator, not the true liminf).
inline HolderEstimate direct_exponent(const Zipper& z, double x, const DirectOptions& opt = {},
                                      const AttractorBound* bound_in = nullptr) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("direct_exponent: x outside [0,1]");
  if (opt.scale_count < 2) throw std::invalid_argument("direct_exponent: need at least 2 scales");
  const AttractorBound bound = bound_in ? *bound_in : attractor_bound(z);
  const int k_lo = 4, k_hi = 3 + opt.scale_count;
  const double tol = std::ldexp(1.0, -(k_hi + 10)) * std::max(bound.radius, 1e-12);

  HolderEstimate est;
  est.x = x;
  est.one_sided = (x - std::ldexp(1.0, -k_lo) < 0.0) || (x + std::ldexp(1.0, -k_lo) > 1.0);
  const Vec vx = evaluate_v(z, x, tol, bound).position;

  Rng rng(opt.seed);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double rho = std::ldexp(1.0, -k);
    std::vector<double> ys;
    if (x - rho >= 0.0) ys.push_back(x - rho);
    if (x + rho <= 1.0) ys.push_back(x + rho);
    for (int s = 0; s < opt.samples_per_scale; ++s) {
      const double u = rng.uniform(rho / 2, rho);
      const double y = (s % 2 == 0) ? x + u : x - u;
      if (y >= 0.0 && y <= 1.0) ys.push_back(y);
    }
    double best = -std::numeric_limits<double>::infinity();
    for (double y : ys) {
      const double dist = norm2(evaluate_v(z, y, tol, bound).position - vx);
      if (dist > 4 * tol) best = std::max(best, std::log(dist));
    }
    if (best == -std::numeric_limits<double>::infinity()) continue;
    const double lx = std::log(rho);
    est.scales.push_back(rho);
    est.envelope_slope.push_back(best / lx);
    sx += lx;
    sy += best;
    sxx += lx * lx;
    sxy += lx * best;
    ++m;
  }
  if (m < 2) throw std::domain_error("direct_exponent: not enough usable scales");
  est.direct_regression = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  est.direct_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = est.scales.size() / 2; i < est.scales.size(); ++i)
    est.direct_min = std::min(est.direct_min, est.envelope_slope[i]);
  return est;
}

// Draws `count` length-`depth` words with probability proportional to
// the Gibbs cylinder weight ||A_w||^t lambda_w^{-P(t)}, by sequential
// conditional sampling down the prefix tree. Exact subtree sums are
// precomputed when N^depth fits the budget; deeper requests fall back to
// a fixed-lookahead approximation of the conditionals. Returned streams
// carry all-zero tails.
inline std::vector<SymbolStream> gibbs_sampler(const MatrixSystem& sys, const PressureCurve& curve,
                                               double t, int depth, int count, std::uint64_t seed,
                                               std::uint64_t tree_budget = std::uint64_t{1} << 22) {
  check_system(sys);
  const double pt = curve.interp(t);
  const int nsym = sys.count();
  const int d = sys.dim;
  const int dd = d * d;
  std::vector<double> logw(nsym);
  for (int j = 0; j < nsym; ++j) logw[j] = std::log(sys.weights[j]);

  double leaves_f = 1.0;
  for (int i = 0; i < depth; ++i) leaves_f *= nsym;
  std::vector<SymbolStream> out;
  out.reserve(count);

  if (leaves_f <= static_cast<double>(tree_budget)) {
    // exact subtree log-sums, bottom-up
    std::vector<std::vector<double>> level(depth + 1);
    for (int k = 0, sz = 1; k <= depth; ++k, sz *= nsym) level[k].resize(sz);
    {
      std::vector<double> stack(static_cast<std::size_t>(depth + 1) * dd, 0.0);
      for (int i = 0; i < d; ++i) stack[static_cast<std::size_t>(i) * d + i] = 1.0;
      std::vector<double> lw(depth + 1, 0.0);
      std::vector<int> path(depth, 0);
      std::size_t slot = 0;
      int lvl = 0;
      for (;;) {
        while (lvl < depth) {
          mat_mul_buf(&stack[static_cast<std::size_t>(lvl) * dd], sys.matrices[path[lvl]].data(),
                      &stack[static_cast<std::size_t>(lvl + 1) * dd], d);
          lw[lvl + 1] = lw[lvl] + logw[path[lvl]];
          ++lvl;
        }
        const double a = std::log(spectral_norm_buf(&stack[static_cast<std::size_t>(depth) * dd], d));
        level[depth][slot++] = t * a - pt * lw[depth];
        while (lvl > 0 && path[lvl - 1] == nsym - 1) path[--lvl] = 0;
        if (lvl == 0) break;
        ++path[lvl - 1];
        --lvl;
      }
    }
    for (int k = depth - 1; k >= 0; --k)
      for (std::size_t mslot = 0; mslot < level[k].size(); ++mslot) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < nsym; ++j)
          mx = std::max(mx, level[k + 1][mslot * nsym + j]);
        double s = 0.0;
        for (int j = 0; j < nsym; ++j) s += std::exp(level[k + 1][mslot * nsym + j] - mx);
        level[k][mslot] = mx + std::log(s);
      }
    for (int c = 0; c < count; ++c) {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(c)));
      std::vector<int> word(depth);
      std::size_t node = 0;
      for (int k = 0; k < depth; ++k) {
        const double u = rng.uniform01();
        double acc = 0.0;
        int pick = nsym - 1;
        for (int j = 0; j < nsym; ++j) {
          acc += std::exp(level[k + 1][node * nsym + j] - level[k][node]);
          if (u < acc) {
            pick = j;
            break;
          }
        }
        word[k] = pick;
        node = node * nsym + pick;
      }
      out.emplace_back(word, std::vector<int>{0});
    }
    return out;
  }

  // fixed-lookahead conditional sampling
  int lookahead = 0;
  for (std::uint64_t span = 1; span * nsym <= 4096 && lookahead < depth; span *= nsym) ++lookahead;
  for (int c = 0; c < count; ++c) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(c)));
    std::vector<int> word;
    word.reserve(depth);
    Mat prefix = Mat::identity(d);
    double lw_prefix = 0.0;
    for (int k = 0; k < depth; ++k) {
      const int la = std::min(lookahead, depth - 1 - k);
      std::vector<double> child_logsum(nsym, -std::numeric_limits<double>::infinity());
      for (int j = 0; j < nsym; ++j) {
        const Mat base = prefix * sys.matrices[j];
        const double lwj = lw_prefix + logw[j];
        // stream all completions of length `la` under child j
        double mx = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        std::vector<double> stack(static_cast<std::size_t>(la + 1) * dd);
        std::copy(base.data(), base.data() + dd, stack.begin());
        std::vector<double> lw(la + 1, lwj);
        std::vector<int> path(la, 0);
        int lvl = 0;
        for (;;) {
          while (lvl < la) {
            mat_mul_buf(&stack[static_cast<std::size_t>(lvl) * dd], sys.matrices[path[lvl]].data(),
                        &stack[static_cast<std::size_t>(lvl + 1) * dd], d);
            lw[lvl + 1] = lw[lvl] + logw[path[lvl]];
            ++lvl;
          }
          const double v =
              t * std::log(spectral_norm_buf(&stack[static_cast<std::size_t>(la) * dd], d)) -
              pt * lw[la];
          if (v <= mx) {
            sum += std::exp(v - mx);
          } else {
            sum = sum * std::exp(mx - v) + 1.0;
            mx = v;
          }
          while (lvl > 0 && path[lvl - 1] == nsym - 1) path[--lvl] = 0;
          if (lvl == 0) break;
          ++path[lvl - 1];
          --lvl;
        }
        child_logsum[j] = mx + std::log(sum);
      }
      double mx = -std::numeric_limits<double>::infinity();
      for (double v : child_logsum) mx = std::max(mx, v);
      double total = 0.0;
      for (double v : child_logsum) total += std::exp(v - mx);
      const double u = rng.uniform01() * total;
      double acc = 0.0;
      int pick = nsym - 1;
      for (int j = 0; j < nsym; ++j) {
        acc += std::exp(child_logsum[j] - mx);
        if (u < acc) {
          pick = j;
          break;
        }
      }
      word.push_back(pick);
      prefix = prefix * sys.matrices[pick];
      lw_prefix += logw[pick];
    }
    out.emplace_back(word, std::vector<int>{0});
  }
  return out;
}

}  // namespace zipcurve
