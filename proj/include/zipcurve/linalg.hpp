#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace zipcurve {

using Vec = std::vector<double>;

// Dense square matrix, row-major. The ambient dimension of a zipper is
// tiny (almost always 2), so plain loops beat any BLAS dispatch here and
// the hot enumeration paths below work on raw buffers instead.
class Mat {
 public:
  Mat() = default;
  explicit Mat(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}
  Mat(int n, std::initializer_list<double> vals) : Mat(n) {
    if (vals.size() != a_.size()) throw std::invalid_argument("Mat: wrong initializer length");
    std::copy(vals.begin(), vals.end(), a_.begin());
  }

  static Mat identity(int n) {
    Mat m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double* data() { return a_.data(); }
  const double* data() const { return a_.data(); }

  friend Mat operator*(const Mat& x, const Mat& y) {
    const int n = x.n_;
    if (n != y.n_) throw std::invalid_argument("Mat: dimension mismatch");
    Mat r(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const double xik = x(i, k);
        for (int j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
      }
    return r;
  }

  friend Vec operator*(const Mat& x, const Vec& v) {
    const int n = x.n_;
    if (static_cast<int>(v.size()) != n) throw std::invalid_argument("Mat: vector dimension mismatch");
    Vec r(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[i] += x(i, j) * v[j];
    return r;
  }

  Mat transpose() const {
    Mat r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(j, i) = (*this)(i, j);
    return r;
  }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

inline Vec operator*(double s, const Vec& a) {
  Vec r(a);
  for (double& x : r) x *= s;
  return r;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

// ---- raw-buffer kernels used by the word enumerators ----

inline void mat_mul_buf(const double* x, const double* y, double* out, int n) {
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += x[i * n + k] * y[k * n + j];
      out[i * n + j] = s;
    }
  }
}

// Largest singular value of a 2x2 matrix, closed form from A^T A.
inline double spectral_norm_2x2(const double* m) {
  const double a = m[0], b = m[1], c = m[2], d = m[3];
  const double p = a * a + c * c;
  const double q = b * b + d * d;
  const double r = a * b + c * d;
  const double disc = std::sqrt(std::max((p - q) * (p - q) + 4.0 * r * r, 0.0));
  return std::sqrt(0.5 * (p + q + disc));
}

// Both singular values of a 2x2 matrix. sigma2 comes from |det|/sigma1,
// which is stable when the values are widely separated.
inline void singular_values_2x2(const double* m, double& s1, double& s2) {
  s1 = spectral_norm_2x2(m);
  const double det = std::fabs(m[0] * m[3] - m[1] * m[2]);
  s2 = s1 > 0.0 ? det / s1 : 0.0;
}

// Cyclic Jacobi eigensolver for a small symmetric matrix. Eigenvalues are
// returned in descending order; eigenvectors (if requested) as columns.
inline void jacobi_eigen(const double* sym, int n, double* evals, double* evecs = nullptr) {
  std::vector<double> a(sym, sym + static_cast<std::size_t>(n) * n);
  std::vector<double> v;
  if (evecs) {
    v.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        if (evecs)
          for (int k = 0; k < n; ++k) {
            const double vkp = v[k * n + p], vkq = v[k * n + q];
            v[k * n + p] = c * vkp - s * vkq;
            v[k * n + q] = s * vkp + c * vkq;
          }
      }
  }
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i * n + i] > a[j * n + j]; });
  for (int i = 0; i < n; ++i) evals[i] = a[order[i] * n + order[i]];
  if (evecs)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) evecs[i * n + j] = v[i * n + order[j]];
}

inline double spectral_norm_buf(const double* m, int n) {
  if (n == 2) return spectral_norm_2x2(m);
  std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m[k * n + i] * m[k * n + j];
      g[i * n + j] = s;
    }
  std::vector<double> ev(n);
  jacobi_eigen(g.data(), n, ev.data());
  return std::sqrt(std::max(ev[0], 0.0));
}

// Induced 1-norm (max absolute column sum).
inline double induced_one_norm_buf(const double* m, int n) {
  double best = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::fabs(m[i * n + j]);
    best = std::max(best, s);
  }
  return best;
}

// Entrywise 1-norm (sum of |a_ij|); the norm the de Rham coordinate
// transforms preserve exactly.
inline double entry_abs_sum(const Mat& m) {
  double s = 0.0;
  const int n = m.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += std::fabs(m(i, j));
  return s;
}

inline double spectral_norm(const Mat& m) { return spectral_norm_buf(m.data(), m.dim()); }
inline double induced_one_norm(const Mat& m) { return induced_one_norm_buf(m.data(), m.dim()); }

inline std::vector<double> singular_values(const Mat& m) {
  const int n = m.dim();
  if (n == 2) {
    double s1, s2;
    singular_values_2x2(m.data(), s1, s2);
    return {s1, s2};
  }
  std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m(k, i) * m(k, j);
      g[i * n + j] = s;
    }
  std::vector<double> ev(n);
  jacobi_eigen(g.data(), n, ev.data());
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::sqrt(std::max(ev[i], 0.0));
  return out;
}

// Determinant via LU with partial pivoting.
inline double determinant(const Mat& m) {
  const int n = m.dim();
  std::vector<double> a(m.data(), m.data() + static_cast<std::size_t>(n) * n);
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
      det = -det;
    }
    const double d = a[col * n + col];
    if (d == 0.0) return 0.0;
    det *= d;
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      for (int j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
    }
  }
  return det;
}

// Solves m x = rhs by Gaussian elimination with partial pivoting.
inline Vec solve(const Mat& m, const Vec& rhs) {
  const int n = m.dim();
  std::vector<double> a(m.data(), m.data() + static_cast<std::size_t>(n) * n);
  Vec b(rhs);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    if (std::fabs(a[piv * n + col]) < 1e-300) throw std::domain_error("solve: singular matrix");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a[col * n + j], a[piv * n + j]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int j = col; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
      b[r] -= f * b[col];
    }
  }
  Vec x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

inline Mat inverse(const Mat& m) {
  const int n = m.dim();
  Mat inv(n);
  for (int j = 0; j < n; ++j) {
    Vec e(n, 0.0);
    e[j] = 1.0;
    Vec col = solve(m, e);
    for (int i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

// Right-singular direction of the smallest singular value of a 2x2
// matrix: the eigenvector of A^T A for its smaller eigenvalue.
inline void least_singular_direction_2x2(const double* m, double& vx, double& vy, bool& reliable,
                                         double conformal_tol = 1e-9) {
  const double a = m[0], b = m[1], c = m[2], d = m[3];
  const double p = a * a + c * c;
  const double q = b * b + d * d;
  const double r = a * b + c * d;
  const double disc = std::sqrt(std::max((p - q) * (p - q) + 4.0 * r * r, 0.0));
  const double mu2 = 0.5 * (p + q - disc);
  const double s1 = std::sqrt(std::max(0.5 * (p + q + disc), 0.0));
  const double s2 = std::sqrt(std::max(mu2, 0.0));
  reliable = (s1 - s2) > conformal_tol * std::max(1.0, s1);
  // (r, mu2 - p) and (mu2 - q, r) both span the eigenspace; pick the
  // better-conditioned representative.
  const double e1x = r, e1y = mu2 - p;
  const double e2x = mu2 - q, e2y = r;
  const double n1 = e1x * e1x + e1y * e1y;
  const double n2 = e2x * e2x + e2y * e2y;
  if (n1 >= n2 && n1 > 0) {
    const double inv = 1.0 / std::sqrt(n1);
    vx = e1x * inv;
    vy = e1y * inv;
  } else if (n2 > 0) {
    const double inv = 1.0 / std::sqrt(n2);
    vx = e2x * inv;
    vy = e2y * inv;
  } else {
    // A^T A proportional to identity: every direction is extremal.
    vx = 1.0;
    vy = 0.0;
    reliable = false;
  }
}

}  // namespace zipcurve
