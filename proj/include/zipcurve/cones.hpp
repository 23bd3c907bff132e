#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "zipcurve/core.hpp"
#include "zipcurve/rng.hpp"
#include "zipcurve/symbolic.hpp"

namespace zipcurve {

inline constexpr double kPi = 3.14159265358979323846;

// Angles on the projective line live in [0, pi).
inline double wrap_pi(double th) {
  th = std::fmod(th, kPi);
  if (th < 0) th += kPi;
  if (th >= kPi) th = 0;
  return th;
}

inline double direction_angle(double x, double y) { return wrap_pi(std::atan2(y, x)); }

inline double direction_angle(const Vec& v) { return direction_angle(v[0], v[1]); }

// Forward arc length from `from` to `to` on the pi-circle, in [0, pi).
inline double forward_arc(double from, double to) { return wrap_pi(to - from); }

inline double mapped_angle(const Mat& a, double th) {
  const double x = std::cos(th), y = std::sin(th);
  return direction_angle(a(0, 0) * x + a(0, 1) * y, a(1, 0) * x + a(1, 1) * y);
}

// Region of projective space. In the plane a closed angular interval
// [lo, lo+length] mod pi; in higher dimension a convex polyhedral cone
// spanned by generator rays.
struct ProjectiveCone {
  int dim = 2;
  double lo = 0.0;
  double length = 0.0;           // d = 2; must stay below pi
  std::vector<Vec> generators;   // d >= 3

  double hi() const { return lo + length; }
  double mid() const { return wrap_pi(lo + 0.5 * length); }

  bool contains_angle(double th, double clearance = 0.0) const {
    const double off = forward_arc(lo, th);
    return off >= clearance - 1e-15 && off <= length - clearance + 1e-15;
  }

  static ProjectiveCone interval(double lo, double length) {
    if (!(length > 0.0 && length < kPi))
      throw std::invalid_argument("cone: interval length must lie in (0, pi)");
    ProjectiveCone c;
    c.dim = 2;
    c.lo = wrap_pi(lo);
    c.length = length;
    return c;
  }

  static ProjectiveCone positive_quadrant() { return interval(0.0, 0.5 * kPi); }

  static ProjectiveCone rays(std::vector<Vec> gens) {
    if (gens.size() < 2) throw std::invalid_argument("cone: need at least two generator rays");
    ProjectiveCone c;
    c.dim = static_cast<int>(gens.front().size());
    c.generators = std::move(gens);
    return c;
  }
};

namespace detail {

// Projective image of an interval under an invertible matrix: the arc
// between the endpoint images that contains the midpoint image.
inline ProjectiveCone image_interval(const Mat& a, const ProjectiveCone& c) {
  const double ta = mapped_angle(a, c.lo);
  const double tb = mapped_angle(a, c.hi());
  const double tm = mapped_angle(a, c.mid());
  const double len1 = forward_arc(ta, tb);
  ProjectiveCone out;
  out.dim = 2;
  if (forward_arc(ta, tm) <= len1 + 1e-12) {
    out.lo = ta;
    out.length = len1;
  } else {
    out.lo = tb;
    out.length = kPi - len1;
  }
  return out;
}

// Smallest arc containing all intervals; empty result flag when nothing
// below pi - slack works.
inline bool interval_hull(const std::vector<ProjectiveCone>& parts, ProjectiveCone& hull,
                          double slack = 1e-9) {
  double best = std::numeric_limits<double>::infinity();
  double best_lo = 0.0;
  for (const ProjectiveCone& cand : parts) {
    double need = 0.0;
    for (const ProjectiveCone& p : parts)
      need = std::max(need, forward_arc(cand.lo, p.lo) + p.length);
    if (need < best) {
      best = need;
      best_lo = cand.lo;
    }
  }
  if (!(best < kPi - slack)) return false;
  hull.dim = 2;
  hull.lo = best_lo;
  hull.length = best;
  return true;
}

// Real dominant eigendirection of a 2x2 matrix, if any.
inline bool dominant_eigendirection(const Mat& m, double& angle) {
  const double tr = m(0, 0) + m(1, 1);
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double disc = tr * tr - 4.0 * det;
  if (disc < 0) return false;
  const double root = std::sqrt(disc);
  const double l1 = 0.5 * (tr + root), l2 = 0.5 * (tr - root);
  const double lam = std::fabs(l1) >= std::fabs(l2) ? l1 : l2;
  // eigenvector from either row equation, best-conditioned choice
  const double e1x = m(0, 1), e1y = lam - m(0, 0);
  const double e2x = lam - m(1, 1), e2y = m(1, 0);
  if (e1x * e1x + e1y * e1y >= e2x * e2x + e2y * e2y) {
    if (e1x == 0 && e1y == 0) return false;
    angle = direction_angle(e1x, e1y);
  } else {
    if (e2x == 0 && e2y == 0) return false;
    angle = direction_angle(e2x, e2y);
  }
  return true;
}

}  // namespace detail

struct ConeSearchResult {
  bool found = false;
  ProjectiveCone cone;
  double margin = 0.0;  // certified angular clearance
  int iterations = 0;
  std::string message;
};

// Searches for a single-interval invariant cone of a planar matrix
// family by iterating the interval hull of the projective images from a
// set of trial seeds, then padding the limit until all images clear the
// boundary by `margin`. Rotation-like families make the hull grow toward
// pi and fail.
inline ConeSearchResult invariant_cone_2d(const std::vector<Mat>& mats, int iterations = 200,
                                          double margin = 1e-3,
                                          const std::vector<ProjectiveCone>& extra_seeds = {}) {
  if (mats.empty() || mats.front().dim() != 2)
    throw std::invalid_argument("invariant_cone_2d: requires 2x2 matrices");
  for (const Mat& m : mats)
    if (std::fabs(determinant(m)) < 1e-300)
      throw std::invalid_argument("invariant_cone_2d: matrices must be invertible");

  std::vector<ProjectiveCone> seeds = extra_seeds;
  seeds.push_back(ProjectiveCone::positive_quadrant());
  std::vector<ProjectiveCone> eig_intervals;
  for (const Mat& m : mats) {
    double th;
    if (detail::dominant_eigendirection(m, th)) {
      seeds.push_back(ProjectiveCone::interval(th - kPi / 6, kPi / 3));
      eig_intervals.push_back(ProjectiveCone::interval(th - kPi / 24, kPi / 12));
    }
  }
  if (!eig_intervals.empty()) {
    ProjectiveCone hull;
    if (detail::interval_hull(eig_intervals, hull, margin) && hull.length < kPi / 2)
      seeds.push_back(ProjectiveCone::interval(hull.lo - kPi / 12, hull.length + kPi / 6));
  }
  seeds.push_back(ProjectiveCone::interval(-kPi / 4, kPi / 2));

  auto certify = [&](const ProjectiveCone& cone, double need) {
    double worst = std::numeric_limits<double>::infinity();
    for (const Mat& m : mats) {
      const ProjectiveCone img = detail::image_interval(m, cone);
      const double off = forward_arc(cone.lo, img.lo);
      const double clearance = std::min(off, cone.length - off - img.length);
      worst = std::min(worst, clearance);
    }
    return worst >= need ? worst : -1.0;
  };

  ConeSearchResult res;
  for (const ProjectiveCone& seed : seeds) {
    ProjectiveCone cur = seed;
    bool blown = false;
    int it = 0;
    for (; it < iterations; ++it) {
      std::vector<ProjectiveCone> images;
      images.reserve(mats.size());
      for (const Mat& m : mats) images.push_back(detail::image_interval(m, cur));
      ProjectiveCone next;
      if (!detail::interval_hull(images, next, margin)) {
        blown = true;
        break;
      }
      const bool settled = forward_arc(cur.lo, next.lo) < 1e-13 ||
                           forward_arc(next.lo, cur.lo) < 1e-13;
      const bool same_len = std::fabs(next.length - cur.length) < 1e-13;
      cur = next;
      if (settled && same_len) break;
      if (cur.length >= kPi - margin) {
        blown = true;
        break;
      }
    }
    if (blown) continue;
    for (double pad : {2 * margin, 4 * margin, 8 * margin, 16 * margin}) {
      const double len = cur.length + 2 * pad;
      if (len >= kPi - margin) break;
      ProjectiveCone padded = ProjectiveCone::interval(cur.lo - pad, len);
      const double got = certify(padded, margin);
      if (got >= 0) {
        res.found = true;
        res.cone = padded;
        res.margin = got;
        res.iterations = it;
        return res;
      }
    }
  }
  res.message = "no invariant cone found at this margin";
  return res;
}

struct PositivityReport {
  bool positive = false;
  double min_entry = 0.0;
};

inline PositivityReport check_positivity(const std::vector<Mat>& mats) {
  PositivityReport rep;
  rep.min_entry = std::numeric_limits<double>::infinity();
  for (const Mat& m : mats)
    for (int i = 0; i < m.dim(); ++i)
      for (int j = 0; j < m.dim(); ++j) rep.min_entry = std::min(rep.min_entry, m(i, j));
  rep.positive = rep.min_entry > 0.0;
  return rep;
}

enum class ConjugationFamily { hat, tilde, rotation };

inline std::string family_name(ConjugationFamily f) {
  switch (f) {
    case ConjugationFamily::hat:
      return "hat";
    case ConjugationFamily::tilde:
      return "tilde";
    default:
      return "rotation";
  }
}

struct ConjugationResult {
  bool found = false;
  ConjugationFamily family = ConjugationFamily::hat;
  double parameter = 0.0;
  Mat transform;
  std::vector<Mat> conjugated;
  double min_entry = 0.0;       // of the returned conjugates
  double best_min_entry = 0.0;  // best seen across the whole grid
  double entry_norm_drift = 0.0;  // entrywise 1-norm change under hat/tilde
};

// Scans the two symmetric one-parameter coordinate-change families
// [[1, +-p],[+-p, 1]] and a rotation grid for a transform making every
// conjugate strictly positive. Returns the first hit in scan order
// (hat, tilde, rotations; parameter ascending).
inline ConjugationResult conjugation_search(const std::vector<Mat>& mats, double grid_step = 0.01) {
  if (mats.empty() || mats.front().dim() != 2)
    throw std::invalid_argument("conjugation_search: requires 2x2 matrices");
  ConjugationResult res;
  res.best_min_entry = -std::numeric_limits<double>::infinity();

  auto try_transform = [&](const Mat& d, ConjugationFamily fam, double param, bool check_norm) {
    const Mat di = inverse(d);
    std::vector<Mat> conj;
    conj.reserve(mats.size());
    double min_entry = std::numeric_limits<double>::infinity();
    double drift = 0.0;
    for (const Mat& m : mats) {
      Mat c = di * (m * d);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) min_entry = std::min(min_entry, c(i, j));
      if (check_norm) drift = std::max(drift, std::fabs(entry_abs_sum(c) - entry_abs_sum(m)));
      conj.push_back(std::move(c));
    }
    res.best_min_entry = std::max(res.best_min_entry, min_entry);
    if (min_entry > 0.0 && !res.found) {
      res.found = true;
      res.family = fam;
      res.parameter = param;
      res.transform = d;
      res.conjugated = std::move(conj);
      res.min_entry = min_entry;
      res.entry_norm_drift = drift;
    }
    return res.found;
  };

  for (double p = grid_step; p < 1.0; p += grid_step)
    if (try_transform(Mat(2, {1.0, -p, -p, 1.0}), ConjugationFamily::hat, p, true)) return res;
  for (double p = grid_step; p < 1.0; p += grid_step)
    if (try_transform(Mat(2, {1.0, p, p, 1.0}), ConjugationFamily::tilde, p, true)) return res;
  for (double phi = kPi / 60; phi < kPi; phi += kPi / 60) {
    const Mat r(2, {std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi)});
    if (try_transform(r, ConjugationFamily::rotation, phi, false)) return res;
  }
  return res;
}

struct ConditionReport {
  std::string condition;
  bool pass = false;
  double margin = 0.0;  // measured clearance / minimum value
  std::string witness;
};

struct AssumptionAReport {
  bool pass = false;
  std::vector<ConditionReport> conditions;
};

namespace detail {

// Nonnegative least squares by projected coordinate descent; enough for
// the handful of generator rays a polyhedral cone carries.
inline double nnls_residual(const std::vector<Vec>& gens, const Vec& target) {
  const int d = static_cast<int>(target.size());
  const int m = static_cast<int>(gens.size());
  std::vector<double> coef(m, 0.0);
  Vec resid = target;
  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (int k = 0; k < m; ++k) {
      const double g2 = dot(gens[k], gens[k]);
      if (g2 == 0) continue;
      const double step = dot(gens[k], resid) / g2;
      const double next = std::max(0.0, coef[k] + step);
      const double delta = next - coef[k];
      if (delta != 0.0) {
        for (int i = 0; i < d; ++i) resid[i] -= delta * gens[k][i];
        coef[k] = next;
        change += std::fabs(delta);
      }
    }
    if (change < 1e-15) break;
  }
  return norm2(resid);
}

}  // namespace detail

// Certifies the three cone conditions: strict invariance with angular
// margin, positivity of <A_i v, v> over the cone, and the chord direction
// z_N - z_0 in the interior. In the plane the sampling of the quadratic
// form is promoted to a certificate through its Lipschitz bound; in
// higher dimension the generator-ray containment test is sufficient but
// not necessary.
inline AssumptionAReport check_assumption_a(const Zipper& z, const ProjectiveCone& cone,
                                            int samples = 256, double margin = 1e-6) {
  check_shapes(z);
  AssumptionAReport rep;
  const Vec chord = z.vertices.back() - z.vertices.front();

  if (cone.dim == 2 && z.dim == 2) {
    if (!(cone.length > 0 && cone.length < kPi))
      throw std::invalid_argument("check_assumption_a: degenerate cone");
    ConditionReport inv{"invariance", true, std::numeric_limits<double>::infinity(), ""};
    for (std::size_t i = 0; i < z.maps.size(); ++i) {
      const ProjectiveCone img = detail::image_interval(z.maps[i].linear, cone);
      const double off = forward_arc(cone.lo, img.lo);
      const double clearance = std::min(off, cone.length - off - img.length);
      if (clearance < inv.margin) {
        inv.margin = clearance;
        inv.witness = "map " + std::to_string(i);
      }
    }
    inv.pass = inv.margin >= margin;
    rep.conditions.push_back(inv);

    ConditionReport pos{"form-positivity", true, std::numeric_limits<double>::infinity(), ""};
    double lip = 0.0;
    for (const AffineMap& f : z.maps) lip = std::max(lip, 2.0 * spectral_norm(f.linear));
    const int steps = std::max(samples, static_cast<int>(std::ceil(cone.length / (margin / 8.0))));
    const double step = cone.length / steps;
    for (std::size_t i = 0; i < z.maps.size(); ++i) {
      const Mat& a = z.maps[i].linear;
      for (int k = 0; k <= steps; ++k) {
        const double th = cone.lo + k * step;
        const double x = std::cos(th), y = std::sin(th);
        const double ax = a(0, 0) * x + a(0, 1) * y;
        const double ay = a(1, 0) * x + a(1, 1) * y;
        const double q = ax * x + ay * y;
        if (q < pos.margin) {
          pos.margin = q;
          pos.witness = "map " + std::to_string(i) + " at angle " + std::to_string(wrap_pi(th));
        }
      }
    }
    // sampled minimum minus the worst possible dip between samples
    pos.pass = pos.margin - lip * step * 0.5 > 0.0;
    rep.conditions.push_back(pos);

    ConditionReport ch{"chord-interior", true, 0.0, ""};
    const double th = direction_angle(chord);
    const double off = forward_arc(cone.lo, th);
    ch.margin = std::min(off, cone.length - off);
    if (!cone.contains_angle(th, margin)) {
      ch.pass = false;
      ch.witness = "chord direction " + std::to_string(th);
    }
    rep.conditions.push_back(ch);
  } else {
    if (cone.generators.size() < 2)
      throw std::invalid_argument("check_assumption_a: degenerate cone");
    // conservative generator-ray containment
    ConditionReport inv{"invariance", true, 0.0, ""};
    double worst = 0.0;
    for (std::size_t i = 0; i < z.maps.size() && inv.pass; ++i)
      for (const Vec& g : cone.generators) {
        const Vec img = z.maps[i].linear * g;
        const double resid = detail::nnls_residual(cone.generators, img) / std::max(norm2(img), 1e-300);
        worst = std::max(worst, resid);
        if (resid > 1e-10) {
          inv.pass = false;
          inv.witness = "map " + std::to_string(i);
          break;
        }
      }
    inv.margin = worst;
    rep.conditions.push_back(inv);

    ConditionReport pos{"form-positivity", true, std::numeric_limits<double>::infinity(), ""};
    std::vector<Vec> probes = cone.generators;
    for (std::size_t a = 0; a < cone.generators.size(); ++a)
      for (std::size_t b = a + 1; b < cone.generators.size(); ++b) {
        Vec mixed = cone.generators[a] + cone.generators[b];
        const double len = norm2(mixed);
        if (len > 0) probes.push_back((1.0 / len) * mixed);
      }
    for (std::size_t i = 0; i < z.maps.size(); ++i)
      for (const Vec& v : probes) {
        const double q = dot(z.maps[i].linear * v, v) / dot(v, v);
        if (q < pos.margin) {
          pos.margin = q;
          pos.witness = "map " + std::to_string(i);
        }
      }
    pos.pass = pos.margin > 0.0;
    rep.conditions.push_back(pos);

    ConditionReport ch{"chord-interior", true, 0.0, ""};
    const double resid = detail::nnls_residual(cone.generators, chord) / std::max(norm2(chord), 1e-300);
    ch.margin = resid;
    ch.pass = resid <= 1e-10;
    if (!ch.pass) ch.witness = "chord not in cone";
    rep.conditions.push_back(ch);
  }

  rep.pass = true;
  for (const ConditionReport& c : rep.conditions) rep.pass = rep.pass && c.pass;
  return rep;
}

struct SplittingDiagnostic {
  std::vector<int> depths;
  std::vector<double> max_ratio;  // max over words of sigma2/sigma1 per depth
  double decay_rate = 1.0;        // fitted base of the geometric decay
  double constant = 1.0;
  double fit_residual = 0.0;      // rms residual of the fit, in decades
  bool no_splitting = false;
};

// Ratio of the two largest singular values along products: geometric
// decay is the index-1 dominated splitting signature. Exhaustive when
// N^n fits the sample budget, seeded random words otherwise.
inline SplittingDiagnostic splitting_diagnostic(const std::vector<Mat>& mats, int max_depth,
                                                int sample_count, std::uint64_t seed,
                                                int min_depth = 1) {
  const int d = mats.front().dim();
  SplittingDiagnostic out;
  for (int n = min_depth; n <= max_depth; ++n) {
    double leaves = 1.0;
    for (int i = 0; i < n; ++i) leaves *= static_cast<double>(mats.size());
    double worst = 0.0;
    auto ratio_of = [&](const double* p) {
      if (d == 2) {
        double s1, s2;
        singular_values_2x2(p, s1, s2);
        return s1 > 0 ? s2 / s1 : 1.0;
      }
      Mat m(d);
      std::copy(p, p + d * d, m.data());
      const std::vector<double> sv = singular_values(m);
      return sv[0] > 0 ? sv[1] / sv[0] : 1.0;
    };
    if (leaves <= sample_count) {
      detail::for_each_product(mats, n, [&](const double* p) { worst = std::max(worst, ratio_of(p)); });
    } else {
      Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(n)));
      for (int s = 0; s < sample_count; ++s) {
        Mat acc = Mat::identity(d);
        for (int k = 0; k < n; ++k) acc = acc * mats[rng.below(mats.size())];
        worst = std::max(worst, ratio_of(acc.data()));
      }
    }
    out.depths.push_back(n);
    out.max_ratio.push_back(worst);
  }
  // least-squares fit of log10(max ratio) against depth
  const std::size_t m = out.depths.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = out.depths[i];
    const double y = std::log10(std::max(out.max_ratio[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  const double slope = denom != 0 ? (m * sxy - sx * sy) / denom : 0.0;
  const double intercept = (sy - slope * sx) / m;
  out.decay_rate = std::pow(10.0, slope);
  out.constant = std::pow(10.0, intercept);
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double fit = intercept + slope * out.depths[i];
    const double y = std::log10(std::max(out.max_ratio[i], 1e-300));
    ss += (fit - y) * (fit - y);
  }
  out.fit_residual = std::sqrt(ss / m);
  out.no_splitting = out.decay_rate >= 0.999;
  return out;
}

struct StableDirection {
  Word word;
  double angle = 0.0;
  bool reliable = true;
};

// Right-singular directions of the smallest singular value over all
// length-`depth` products; the finite-depth stand-in for the strong
// stable directions. Planar only.
inline std::vector<StableDirection> stable_directions(const std::vector<Mat>& mats, int depth,
                                                      std::uint64_t budget = std::uint64_t{1} << 20) {
  if (mats.front().dim() != 2)
    throw std::invalid_argument("stable_directions: planar systems only");
  double leaves = 1.0;
  for (int i = 0; i < depth; ++i) leaves *= static_cast<double>(mats.size());
  if (leaves > static_cast<double>(budget))
    throw std::invalid_argument("stable_directions: N^depth exceeds budget");
  std::vector<StableDirection> out;
  out.reserve(static_cast<std::size_t>(leaves));

  const int nsym = static_cast<int>(mats.size());
  std::vector<double> stack(static_cast<std::size_t>(depth + 1) * 4, 0.0);
  stack[0] = stack[3] = 1.0;
  std::vector<int> path(depth, 0);
  int level = 0;
  for (;;) {
    while (level < depth) {
      mat_mul_buf(&stack[static_cast<std::size_t>(level) * 4], mats[path[level]].data(),
                  &stack[static_cast<std::size_t>(level + 1) * 4], 2);
      ++level;
    }
    StableDirection sd;
    sd.word.symbols.assign(path.begin(), path.end());
    double vx, vy;
    least_singular_direction_2x2(&stack[static_cast<std::size_t>(depth) * 4], vx, vy, sd.reliable);
    sd.angle = direction_angle(vx, vy);
    out.push_back(std::move(sd));
    while (level > 0 && path[level - 1] == nsym - 1) path[--level] = 0;
    if (level == 0) break;
    ++path[level - 1];
    --level;
  }
  return out;
}

struct WellOrderedReport {
  bool pass = false;
  bool refused = false;
  std::string diagnostic;
  int directions_checked = 0;
  double failing_direction = 0.0;           // line angle of the first violation
  std::array<std::int64_t, 3> witness{-1, -1, -1};  // polyline indices i1 < i2 < i3
};

// Checks, for each given line direction, that the projections of the
// level point set onto the orthogonal complement are strictly monotone
// in curve order. `level` counts refinements beyond the vertex set.
inline WellOrderedReport well_ordered_on(const Zipper& z, int level,
                                         const std::vector<double>& line_angles) {
  WellOrderedReport rep;
  const auto pts = sample_curve(z, level + 1);
  double geom = 0.0;
  for (const CurvePoint& pt : pts)
    geom = std::max({geom, std::fabs(pt.position[0]), std::fabs(pt.position[1])});
  const double flat_tol = 1e-12 * std::max(geom, 1e-300);
  for (double th : line_angles) {
    const double ux = std::cos(th + kPi / 2), uy = std::sin(th + kPi / 2);
    std::vector<double> p(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k)
      p[k] = ux * pts[k].position[0] + uy * pts[k].position[1];
    int dir = 0;
    for (std::size_t k = 1; k < p.size(); ++k) {
      const double d = p[k] - p[k - 1];
      const int s = d > flat_tol ? 1 : (d < -flat_tol ? -1 : 0);
      if (s == 0 || (dir != 0 && s != dir)) {
        rep.pass = false;
        rep.failing_direction = th;
        const std::int64_t mid = static_cast<std::int64_t>(k) - (s == 0 ? 0 : 1);
        rep.witness = {std::max<std::int64_t>(mid - 1, 0), mid,
                       std::min<std::int64_t>(mid + 1, static_cast<std::int64_t>(p.size()) - 1)};
        rep.diagnostic = "projection not strictly monotone";
        return rep;
      }
      if (dir == 0) dir = s;
    }
    ++rep.directions_checked;
  }
  rep.pass = true;
  return rep;
}

// Full finite-level check: sweeps the delta-neighborhood of the sampled
// stable directions with step delta/4. Evidence, not proof: it can
// refute, and confirms only up to the sampled resolution.
inline WellOrderedReport well_ordered_check(const Zipper& z, int level, double delta,
                                            int direction_depth) {
  if (z.dim != 2) throw std::invalid_argument("well_ordered_check: planar zippers only");
  std::vector<Mat> mats;
  for (const AffineMap& f : z.maps) mats.push_back(f.linear);
  const std::vector<StableDirection> dirs = stable_directions(mats, direction_depth);
  for (const StableDirection& sd : dirs)
    if (!sd.reliable) {
      WellOrderedReport rep;
      rep.refused = true;
      rep.diagnostic = "stable direction unreliable (near-conformal product) for word " +
                       sd.word.str(static_cast<int>(mats.size()));
      return rep;
    }
  std::vector<double> angles;
  for (const StableDirection& sd : dirs)
    for (int k = -4; k <= 4; ++k) angles.push_back(wrap_pi(sd.angle + k * delta / 4.0));
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(),
                           [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
               angles.end());
  return well_ordered_on(z, level, angles);
}

}  // namespace zipcurve
