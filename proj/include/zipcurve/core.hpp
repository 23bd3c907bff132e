#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "zipcurve/linalg.hpp"

namespace zipcurve {

struct AffineMap {
  Mat linear;
  Vec offset;
};

inline Vec apply_map(const AffineMap& f, const Vec& x) { return f.linear * x + f.offset; }

// A self-affine zipper: N contractions chained end to end through the
// cross-condition f_i(z_0) = z_{i+e_i}, f_i(z_N) = z_{i+1-e_i}, together
// with the subdivision weights of the linear parametrization. Immutable
// after construction; every operation below is a pure function.
struct Zipper {
  int dim = 0;
  std::vector<AffineMap> maps;    // N
  std::vector<Vec> vertices;      // N+1
  std::vector<int> signature;     // N entries in {0,1}
  std::vector<double> weights;    // N positive entries summing to 1

  int map_count() const { return static_cast<int>(maps.size()); }

  // Left endpoints of the parameter subdivision: c_0=0, c_i = sum w_j (j<i).
  std::vector<double> cumulative_weights() const {
    std::vector<double> c(maps.size() + 1, 0.0);
    for (std::size_t i = 0; i < weights.size(); ++i) c[i + 1] = c[i] + weights[i];
    c.back() = 1.0;
    return c;
  }
};

inline void check_shapes(const Zipper& z) {
  const int n = z.map_count();
  if (n == 0) throw std::invalid_argument("zipper: no maps");
  if (z.dim <= 0) throw std::invalid_argument("zipper: dimension must be positive");
  if (static_cast<int>(z.vertices.size()) != n + 1)
    throw std::invalid_argument("zipper: expected " + std::to_string(n + 1) + " vertices, got " +
                                std::to_string(z.vertices.size()));
  if (static_cast<int>(z.weights.size()) != n)
    throw std::invalid_argument("zipper: expected " + std::to_string(n) + " weights");
  if (static_cast<int>(z.signature.size()) != n)
    throw std::invalid_argument("zipper: expected " + std::to_string(n) + " signature bits");
  for (const AffineMap& f : z.maps)
    if (f.linear.dim() != z.dim || static_cast<int>(f.offset.size()) != z.dim)
      throw std::invalid_argument("zipper: map shape does not match dimension");
  for (const Vec& v : z.vertices)
    if (static_cast<int>(v.size()) != z.dim) throw std::invalid_argument("zipper: vertex shape mismatch");
  for (int e : z.signature)
    if (e != 0 && e != 1) throw std::invalid_argument("zipper: signature bits must be 0 or 1");
}

struct ValidationIssue {
  std::string what;
  int index;
  double residual;
};

struct ValidationReport {
  bool pass = false;
  double cross_residual = 0.0;       // max_i max(|f_i(z_0)-z_..|, |f_i(z_N)-z_..|)
  int cross_worst_map = -1;
  double weight_sum_residual = 0.0;
  double min_weight = 0.0;
  double min_det_margin = 0.0;       // min_i (|det A_i| - threshold)
  double contraction_factor = 0.0;   // max_{|w|=q} ||A_w||
  int contraction_depth = 0;
  std::vector<ValidationIssue> failures;
};

namespace detail {

// Enumerates all products of length `depth`, reusing prefix products (one
// multiply per tree node), and hands each leaf buffer to `fn`.
template <class F>
void for_each_product(const std::vector<Mat>& mats, int depth, F&& fn) {
  const int n = static_cast<int>(mats.size());
  const int d = mats[0].dim();
  const int dd = d * d;
  if (depth == 0) {
    Mat id = Mat::identity(d);
    fn(id.data());
    return;
  }
  std::vector<double> stack(static_cast<std::size_t>(depth + 1) * dd);
  Mat id = Mat::identity(d);
  std::copy(id.data(), id.data() + dd, stack.begin());
  std::vector<int> path(depth, 0);
  int level = 0;
  for (;;) {
    while (level < depth) {
      mat_mul_buf(&stack[static_cast<std::size_t>(level) * dd], mats[path[level]].data(),
                  &stack[static_cast<std::size_t>(level + 1) * dd], d);
      ++level;
    }
    fn(&stack[static_cast<std::size_t>(depth) * dd]);
    while (level > 0 && path[level - 1] == n - 1) path[--level] = 0;
    if (level == 0) return;
    ++path[level - 1];
    --level;
  }
}

}  // namespace detail

// Max operator norm over all length-q products. Single-map norms may
// exceed 1 while the q-fold products already contract.
inline double joint_contraction_factor(const std::vector<Mat>& mats, int depth) {
  const int d = mats[0].dim();
  double worst = 0.0;
  detail::for_each_product(mats, depth, [&](const double* p) {
    worst = std::max(worst, spectral_norm_buf(p, d));
  });
  return worst;
}

inline ValidationReport validate_zipper(const Zipper& z, double tol, int contraction_depth = 8) {
  check_shapes(z);
  const int n = z.map_count();
  ValidationReport rep;
  rep.contraction_depth = contraction_depth;

  double wsum = 0.0;
  rep.min_weight = std::numeric_limits<double>::infinity();
  for (double w : z.weights) {
    wsum += w;
    rep.min_weight = std::min(rep.min_weight, w);
  }
  rep.weight_sum_residual = std::fabs(wsum - 1.0);
  if (rep.min_weight <= 0.0)
    rep.failures.push_back({"weight must be strictly positive", -1, rep.min_weight});
  if (rep.weight_sum_residual > tol)
    rep.failures.push_back({"weights do not sum to 1", -1, rep.weight_sum_residual});

  rep.min_det_margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double nrm = spectral_norm(z.maps[i].linear);
    const double threshold = 1e-12 * std::pow(nrm, z.dim);
    const double margin = std::fabs(determinant(z.maps[i].linear)) - threshold;
    if (margin < rep.min_det_margin) rep.min_det_margin = margin;
    if (margin <= 0.0) rep.failures.push_back({"matrix numerically singular", i, margin});
  }

  rep.cross_residual = 0.0;
  for (int i = 0; i < n; ++i) {
    const int e = z.signature[i];
    const double r0 = norm2(apply_map(z.maps[i], z.vertices.front()) - z.vertices[i + e]);
    const double r1 = norm2(apply_map(z.maps[i], z.vertices.back()) - z.vertices[i + 1 - e]);
    const double r = std::max(r0, r1);
    if (r > rep.cross_residual) {
      rep.cross_residual = r;
      rep.cross_worst_map = i;
    }
  }
  if (rep.cross_residual > tol)
    rep.failures.push_back({"cross-condition violated", rep.cross_worst_map, rep.cross_residual});

  std::vector<Mat> mats;
  mats.reserve(n);
  for (const AffineMap& f : z.maps) mats.push_back(f.linear);
  rep.contraction_factor = joint_contraction_factor(mats, contraction_depth);
  if (!(rep.contraction_factor < 1.0))
    rep.failures.push_back({"length-q products do not contract", -1, rep.contraction_factor});

  rep.pass = rep.failures.empty();
  return rep;
}

// Fixed point of an affine contraction: (I - A) x = t.
inline Vec fixed_point(const AffineMap& f) {
  const int d = f.linear.dim();
  Mat m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = (i == j ? 1.0 : 0.0) - f.linear(i, j);
  if (std::fabs(determinant(m)) < 1e-14 * std::max(1.0, spectral_norm(m)))
    throw std::domain_error("fixed_point: map has eigenvalue 1");
  return solve(m, f.offset);
}

struct AttractorBound {
  Vec center;
  double radius;
};

// Ball around the vertex centroid that contains the whole curve. Blocks
// of length q: every point of the curve telescopes as
// sum_m A_{w_1}..A_{w_m} (f_{w_{m+1}}(c) - c), so
// R = max_{|w|=q} |f_w(c)-c| / (1 - max_{|w|=q} ||A_w||).
inline AttractorBound attractor_bound(const Zipper& z, int block_depth = 8) {
  const int d = z.dim;
  const int n = z.map_count();
  Vec c(d, 0.0);
  for (const Vec& v : z.vertices) c = c + v;
  c = (1.0 / static_cast<double>(z.vertices.size())) * c;

  // Enumerate compositions of length block_depth keeping prefix affine
  // parts on a stack.
  const int dd = d * d;
  std::vector<double> pstack(static_cast<std::size_t>(block_depth + 1) * dd);
  std::vector<Vec> ostack(block_depth + 1, Vec(d, 0.0));
  Mat id = Mat::identity(d);
  std::copy(id.data(), id.data() + dd, pstack.begin());
  std::vector<int> path(block_depth, 0);
  double max_norm = 0.0, max_disp = 0.0;
  int level = 0;
  for (;;) {
    while (level < block_depth) {
      const double* p = &pstack[static_cast<std::size_t>(level) * dd];
      double* pn = &pstack[static_cast<std::size_t>(level + 1) * dd];
      const AffineMap& f = z.maps[path[level]];
      mat_mul_buf(p, f.linear.data(), pn, d);
      Vec& on = ostack[level + 1];
      for (int i = 0; i < d; ++i) {
        double s = ostack[level][i];
        for (int j = 0; j < d; ++j) s += p[i * d + j] * f.offset[j];
        on[i] = s;
      }
      ++level;
    }
    const double* p = &pstack[static_cast<std::size_t>(block_depth) * dd];
    max_norm = std::max(max_norm, spectral_norm_buf(p, d));
    double disp = 0.0;
    for (int i = 0; i < d; ++i) {
      double s = ostack[block_depth][i] - c[i];
      for (int j = 0; j < d; ++j) s += p[i * d + j] * c[j];
      disp += s * s;
    }
    max_disp = std::max(max_disp, std::sqrt(disp));
    while (level > 0 && path[level - 1] == n - 1) path[--level] = 0;
    if (level == 0) break;
    ++path[level - 1];
    --level;
  }
  AttractorBound b;
  b.center = std::move(c);
  b.radius = max_norm < 1.0 ? max_disp / (1.0 - max_norm) : std::numeric_limits<double>::infinity();
  return b;
}

struct CurvePoint {
  double parameter = 0.0;
  Vec position;
  double error_bound = 0.0;  // guaranteed truncation radius
};

// Evaluates the linear parametrization v(x) to within `tol`. The coding
// of x follows the weighted subdivision; at subdivision boundaries the
// upper cylinder is taken, which the cross-condition makes equivalent.
inline CurvePoint evaluate_v(const Zipper& z, double x, double tol, const AttractorBound& bound) {
  if (!(tol > 0.0)) throw std::invalid_argument("evaluate_v: tol must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("evaluate_v: x outside [0,1]");
  if (!std::isfinite(bound.radius))
    throw std::domain_error("evaluate_v: zipper is not jointly contracting");
  const int d = z.dim;
  const int n = z.map_count();
  const std::vector<double> cum = z.cumulative_weights();

  Mat comp = Mat::identity(d);
  Vec off(d, 0.0);
  double x_local = x;
  double err = bound.radius;
  constexpr int kMaxDepth = 1 << 16;
  for (int depth = 0; err > tol; ++depth) {
    if (depth >= kMaxDepth)
      throw std::domain_error("evaluate_v: tolerance unreachable at depth 65536");
    int i = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), x_local) - cum.begin()) - 1;
    if (i < 0) i = 0;
    if (i >= n) i = n - 1;
    const AffineMap& f = z.maps[i];
    off = comp * f.offset + off;
    comp = comp * f.linear;
    x_local = z.signature[i] ? (cum[i + 1] - x_local) / z.weights[i]
                             : (x_local - cum[i]) / z.weights[i];
    x_local = std::min(std::max(x_local, 0.0), 1.0);
    err = spectral_norm(comp) * bound.radius;
  }
  CurvePoint p;
  p.parameter = x;
  p.position = comp * bound.center + off;
  p.error_bound = err;
  return p;
}

inline CurvePoint evaluate_v(const Zipper& z, double x, double tol) {
  return evaluate_v(z, x, tol, attractor_bound(z));
}

// Vertex images f_w(z_0) for all |w| = depth in parameter order, plus the
// final endpoint, N^depth + 1 points in total. With nonzero signature the
// traversal order and the emitted endpoint flip with the orientation
// parity accumulated along the word.
inline std::vector<CurvePoint> sample_curve(const Zipper& z, int depth,
                                            std::uint64_t point_budget = std::uint64_t{1} << 24) {
  if (depth < 0) throw std::invalid_argument("sample_curve: depth must be nonnegative");
  const int n = z.map_count();
  const int d = z.dim;
  double count = 1.0;
  for (int i = 0; i < depth; ++i) count *= n;
  if (count + 1 > static_cast<double>(point_budget))
    throw std::invalid_argument("sample_curve: point count exceeds budget " +
                                std::to_string(point_budget));

  std::vector<CurvePoint> out;
  out.reserve(static_cast<std::size_t>(count) + 1);

  // Composite affine maps and cell widths per level.
  std::vector<Mat> comp(depth + 1, Mat::identity(d));
  std::vector<Vec> off(depth + 1, Vec(d, 0.0));
  std::vector<double> width(depth + 1, 1.0);
  double param = 0.0;
  int last_parity = 0;

  // child order at a node of parity p: ascending for p=0, descending else.
  std::vector<int> branch(depth, 0);
  std::vector<int> parity(depth + 1, 0);
  int level = 0;
  for (;;) {
    while (level < depth) {
      const int k = parity[level] ? n - 1 - branch[level] : branch[level];
      const AffineMap& f = z.maps[k];
      off[level + 1] = comp[level] * f.offset + off[level];
      comp[level + 1] = comp[level] * f.linear;
      width[level + 1] = width[level] * z.weights[k];
      parity[level + 1] = parity[level] ^ z.signature[k];
      ++level;
    }
    CurvePoint p;
    p.parameter = param;
    p.position = comp[depth] * (parity[depth] ? z.vertices.back() : z.vertices.front()) + off[depth];
    p.error_bound = 0.0;
    out.push_back(std::move(p));
    param += width[depth];
    last_parity = parity[depth];
    while (level > 0 && branch[level - 1] == n - 1) branch[--level] = 0;
    if (level == 0) break;
    ++branch[level - 1];
    --level;
  }
  CurvePoint end;
  end.parameter = 1.0;
  end.position = comp[depth] * (last_parity ? z.vertices.front() : z.vertices.back()) + off[depth];
  end.error_bound = 0.0;
  out.push_back(std::move(end));
  return out;
}

// First `depth` symbols of the subdivision coding of x; boundary points
// take the upper cylinder.
inline std::vector<int> coding_of(const Zipper& z, double x, int depth) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("coding_of: x outside [0,1]");
  const std::vector<double> cum = z.cumulative_weights();
  const int n = z.map_count();
  std::vector<int> digits(depth);
  double x_local = x;
  for (int k = 0; k < depth; ++k) {
    int i = static_cast<int>(std::upper_bound(cum.begin(), cum.end(), x_local) - cum.begin()) - 1;
    if (i < 0) i = 0;
    if (i >= n) i = n - 1;
    digits[k] = i;
    x_local = z.signature[i] ? (cum[i + 1] - x_local) / z.weights[i]
                             : (x_local - cum[i]) / z.weights[i];
    x_local = std::min(std::max(x_local, 0.0), 1.0);
  }
  return digits;
}

// N-fold midpoint subdivision of the unit segment; the standard control
// system where v is the identity embedding and every exponent equals 1.
inline Zipper uniform_line_zipper(int n_maps = 2) {
  Zipper z;
  z.dim = 2;
  const double s = 1.0 / n_maps;
  for (int i = 0; i < n_maps; ++i) {
    AffineMap f;
    f.linear = Mat(2, {s, 0.0, 0.0, s});
    f.offset = {i * s, 0.0};
    z.maps.push_back(std::move(f));
    z.signature.push_back(0);
    z.weights.push_back(s);
  }
  for (int k = 0; k <= n_maps; ++k) z.vertices.push_back({k * s, 0.0});
  return z;
}

// Coordinate change x -> D^{-1} x applied to the whole system:
// maps become D^{-1} f(D x), vertices D^{-1} z.
inline Zipper conjugate_zipper(const Zipper& z, const Mat& d) {
  Mat di = inverse(d);
  Zipper out = z;
  for (AffineMap& f : out.maps) {
    f.linear = di * (f.linear * d);
    f.offset = di * f.offset;
  }
  for (Vec& v : out.vertices) v = di * v;
  return out;
}

}  // namespace zipcurve
