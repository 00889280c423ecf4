#pragma once

// Small dense vectors, matrices and rank-3 arrays with inline storage.
// Everything in a graph-flow problem is sized by the ambient dimension
// m + n, which stays at most kDimCap, so none of this ever touches the
// heap and all of it is safe to use inside grid kernels.

#include <array>
#include <cassert>
#include <cmath>
#include <cstring>

#include "graphflow/errors.hpp"

namespace graphflow {

inline constexpr int kDimCap = 8;

class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : n_(n) {
    assert(n >= 0 && n <= kDimCap);
    for (int i = 0; i < n; ++i) a_[i] = 0.0;
  }

  int size() const { return n_; }
  double& operator[](int i) {
    assert(i >= 0 && i < n_);
    return a_[i];
  }
  double operator[](int i) const {
    assert(i >= 0 && i < n_);
    return a_[i];
  }

 private:
  std::array<double, kDimCap> a_;
  int n_ = 0;
};

// Row-major, packed with stride = cols.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : r_(rows), c_(cols) {
    assert(rows >= 0 && cols >= 0 && rows * cols <= kDimCap * kDimCap);
    for (int i = 0; i < rows * cols; ++i) a_[i] = 0.0;
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return r_; }
  int cols() const { return c_; }
  double& operator()(int i, int j) {
    assert(i >= 0 && i < r_ && j >= 0 && j < c_);
    return a_[i * c_ + j];
  }
  double operator()(int i, int j) const {
    assert(i >= 0 && i < r_ && j >= 0 && j < c_);
    return a_[i * c_ + j];
  }

 private:
  std::array<double, kDimCap * kDimCap> a_;
  int r_ = 0, c_ = 0;
};

// Packed rank-3 array, a(i,j,k) with k fastest.
class Ten3 {
 public:
  Ten3() = default;
  Ten3(int n0, int n1, int n2) : n0_(n0), n1_(n1), n2_(n2) {
    assert(n0 >= 0 && n1 >= 0 && n2 >= 0 &&
           n0 * n1 * n2 <= kDimCap * kDimCap * kDimCap);
    for (int i = 0; i < n0 * n1 * n2; ++i) a_[i] = 0.0;
  }

  int dim0() const { return n0_; }
  int dim1() const { return n1_; }
  int dim2() const { return n2_; }
  double& operator()(int i, int j, int k) {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_ && k >= 0 && k < n2_);
    return a_[(i * n1_ + j) * n2_ + k];
  }
  double operator()(int i, int j, int k) const {
    assert(i >= 0 && i < n0_ && j >= 0 && j < n1_ && k >= 0 && k < n2_);
    return a_[(i * n1_ + j) * n2_ + k];
  }

 private:
  std::array<double, kDimCap * kDimCap * kDimCap> a_;
  int n0_ = 0, n1_ = 0, n2_ = 0;
};

inline Vec matvec(const Mat& m, const Vec& v) {
  assert(m.cols() == v.size());
  Vec out(m.rows());
  for (int i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  assert(a.cols() == b.rows());
  Mat out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

// Gauss-Jordan with partial pivoting. Returns false when the pivot
// collapses relative to the matrix scale; det (optional) is always the
// product of pivots found so far times the permutation sign.
inline bool invert(const Mat& m, Mat& inv, double* det = nullptr) {
  assert(m.rows() == m.cols());
  const int n = m.rows();
  Mat a = m;
  inv = Mat::identity(n);
  double d = 1.0;
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a(i, j)));
  if (scale == 0.0) {
    if (det) *det = 0.0;
    return false;
  }
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    if (std::fabs(a(piv, col)) < 1e-14 * scale) {
      if (det) *det = 0.0;
      return false;
    }
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a(col, j), a(piv, j));
        std::swap(inv(col, j), inv(piv, j));
      }
      d = -d;
    }
    const double p = a(col, col);
    d *= p;
    const double ip = 1.0 / p;
    for (int j = 0; j < n; ++j) {
      a(col, j) *= ip;
      inv(col, j) *= ip;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  if (det) *det = d;
  return true;
}

inline double determinant(const Mat& m) {
  Mat tmp;
  double d = 0.0;
  invert(m, tmp, &d);
  return d;
}

namespace detail {

inline void check_finite_symmetric(const Mat& a) {
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (!std::isfinite(a(i, j)))
        throw EigenFailure("eigensolver input has non-finite entries");
}

inline void sort_ascending(Vec& w, Mat* v) {
  const int n = w.size();
  for (int i = 0; i < n; ++i) {
    int k = i;
    for (int j = i + 1; j < n; ++j)
      if (w[j] < w[k]) k = j;
    if (k != i) {
      std::swap(w[i], w[k]);
      if (v)
        for (int r = 0; r < n; ++r) std::swap((*v)(r, i), (*v)(r, k));
    }
  }
}

}  // namespace detail

// Cyclic Jacobi for a symmetric matrix. Eigenvalues ascending,
// eigenvectors as the columns of `vecs`, orthonormal in the standard
// inner product. Deterministic sweep order.
inline void sym_eigen_jacobi(const Mat& m, Vec& vals, Mat& vecs) {
  assert(m.rows() == m.cols());
  detail::check_finite_symmetric(m);
  const int n = m.rows();
  Mat a = m;
  vecs = Mat::identity(n);
  vals = Vec(n);
  if (n == 0) return;

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::fabs(a(i, j)));
  if (scale == 0.0) return;

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30 * scale * scale) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t =
            (theta >= 0 ? 1.0 : -1.0) /
            (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vecs(k, p), vkq = vecs(k, q);
          vecs(k, p) = c * vkp - s * vkq;
          vecs(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) vals[i] = a(i, i);
  detail::sort_ascending(vals, &vecs);
}

// Closed-form characteristic roots for symmetric n <= 3, ascending.
// The 3x3 case is the trigonometric method; the acos argument is
// clamped so nearly degenerate spectra stay real.
inline Vec sym_eigenvalues_closed(const Mat& m) {
  assert(m.rows() == m.cols() && m.rows() >= 1 && m.rows() <= 3);
  detail::check_finite_symmetric(m);
  const int n = m.rows();
  Vec w(n);
  if (n == 1) {
    w[0] = m(0, 0);
    return w;
  }
  if (n == 2) {
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double half = 0.5 * (m(0, 0) - m(1, 1));
    const double disc = std::sqrt(half * half + m(0, 1) * m(0, 1));
    w[0] = mean - disc;
    w[1] = mean + disc;
    return w;
  }
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  if (p1 == 0.0) {
    w[0] = m(0, 0);
    w[1] = m(1, 1);
    w[2] = m(2, 2);
    detail::sort_ascending(w, nullptr);
    return w;
  }
  const double q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
  const double p2 = (m(0, 0) - q) * (m(0, 0) - q) +
                    (m(1, 1) - q) * (m(1, 1) - q) +
                    (m(2, 2) - q) * (m(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  Mat b(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = (m(i, j) - (i == j ? q : 0.0)) / p;
  const double detb =
      b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) -
      b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0)) +
      b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
  double r = detb / 2.0;
  r = std::min(1.0, std::max(-1.0, r));
  const double phi = std::acos(r) / 3.0;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  const double e2 = 3.0 * q - e1 - e3;
  w[0] = e3;
  w[1] = e2;
  w[2] = e1;
  return w;
}

// Eigenvalues only, ascending: closed form up to 3x3, Jacobi beyond.
inline Vec sym_eigenvalues(const Mat& m) {
  if (m.rows() <= 3) return sym_eigenvalues_closed(m);
  Vec w;
  Mat v;
  sym_eigen_jacobi(m, w, v);
  return w;
}

}  // namespace graphflow
