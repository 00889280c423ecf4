#pragma once

// Pointwise geometry of the graph Gamma(f) = {(x, f(x))} inside the
// product R^m x N.  A MapJet carries the 2-jet of f at one point; all
// quantities here are algebra on that jet plus the target metric.
//
// Conventions:
//   ambient vectors are length m+n, flat components first
//   d1(a,i) = d_i f^a,  d2(a,i,j) = d^2_ij f^a
//   induced metric  g_ij = delta_ij + (f* g_N)_ij
//   s = g_{R^m} - f* g_N; its eigenvalues relative to g are
//   (1 - lambda^2)/(1 + lambda^2) for singular values lambda of df.

#include <functional>

#include "graphflow/errors.hpp"
#include "graphflow/linalg.hpp"
#include "graphflow/manifold.hpp"

namespace graphflow {

struct MapJet {
  int m = 0, n = 0;
  Vec value;  // f(x), target chart coordinates
  Mat d1;     // n x m
  Ten3 d2;    // n x m x m, symmetric in the last two slots

  static MapJet zero(int m, int n) {
    MapJet j;
    j.m = m;
    j.n = n;
    j.value = Vec(n);
    j.d1 = Mat(n, m);
    j.d2 = Ten3(n, m, m);
    return j;
  }
};

// Rank cutoff on squared singular values.
inline constexpr double kRankTol = 1e-12;

inline Mat pullback_metric(const MapJet& jet, const MetricData& md) {
  Mat p(jet.m, jet.m);
  for (int i = 0; i < jet.m; ++i)
    for (int j = i; j < jet.m; ++j) {
      double s = 0.0;
      for (int a = 0; a < jet.n; ++a)
        for (int b = 0; b < jet.n; ++b)
          s += md.g(a, b) * jet.d1(a, i) * jet.d1(b, j);
      p(i, j) = s;
      p(j, i) = s;
    }
  return p;
}

struct InducedMetric {
  Mat g;
  Mat g_inv;
  double det = 0.0;
};

inline InducedMetric induced_metric(const MapJet& jet, const MetricData& md) {
  InducedMetric im;
  im.g = pullback_metric(jet, md);
  for (int i = 0; i < jet.m; ++i) im.g(i, i) += 1.0;
  if (!invert(im.g, im.g_inv, &im.det))
    throw SingularMetric("induced metric not invertible");
  return im;
}

inline InducedMetric induced_metric(const MapJet& jet,
                                    const ManifoldModel& model) {
  return induced_metric(jet, metric_at(model, jet.value));
}

inline Mat s_tensor(const MapJet& jet, const ManifoldModel& model) {
  Mat s = pullback_metric(jet, metric_at(model, jet.value));
  for (int i = 0; i < jet.m; ++i)
    for (int j = 0; j < jet.m; ++j) s(i, j) = (i == j ? 1.0 : 0.0) - s(i, j);
  return s;
}

// Squared singular values of df, ascending, clamped at zero.
inline Vec singular_values(const MapJet& jet, const MetricData& md) {
  Vec l2 = sym_eigenvalues(pullback_metric(jet, md));
  for (int i = 0; i < l2.size(); ++i) l2[i] = std::max(0.0, l2[i]);
  return l2;
}

inline Vec singular_values(const MapJet& jet, const ManifoldModel& model) {
  return singular_values(jet, metric_at(model, jet.value));
}

// Eigenvalues of s relative to g, ordered by ascending lambda^2
// (so descending in value; the last entry is the smallest).
inline Vec s_eigenvalues(const Vec& lambda2) {
  Vec out(lambda2.size());
  for (int i = 0; i < lambda2.size(); ++i)
    out[i] = (1.0 - lambda2[i]) / (1.0 + lambda2[i]);
  return out;
}

inline double min_s_eigenvalue(const Vec& lambda2) {
  double mn = 1.0;
  for (int i = 0; i < lambda2.size(); ++i)
    mn = std::min(mn, (1.0 - lambda2[i]) / (1.0 + lambda2[i]));
  return mn;
}

inline double trace_s(const Vec& lambda2) {
  double tr = 0.0;
  for (int i = 0; i < lambda2.size(); ++i)
    tr += (1.0 - lambda2[i]) / (1.0 + lambda2[i]);
  return tr;
}

// Jacobian of the projection Gamma(f) -> R^m:
// u = 1 / sqrt(prod(1 + lambda^2)), equal to 1/sqrt(det g).
inline double projection_jacobian(const Vec& lambda2) {
  double prod = 1.0;
  for (int i = 0; i < lambda2.size(); ++i) prod *= 1.0 + lambda2[i];
  return 1.0 / std::sqrt(prod);
}

// Product metric and the ambient s = g_{R^m} - g_N on ambient vectors.
inline double g_prod(const MetricData& md, int m, const Vec& u, const Vec& v) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += u[i] * v[i];
  for (int a = 0; a < md.n; ++a)
    for (int b = 0; b < md.n; ++b) s += md.g(a, b) * u[m + a] * v[m + b];
  return s;
}

inline double s_prod(const MetricData& md, int m, const Vec& u, const Vec& v) {
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += u[i] * v[i];
  for (int a = 0; a < md.n; ++a)
    for (int b = 0; b < md.n; ++b) s -= md.g(a, b) * u[m + a] * v[m + b];
  return s;
}

// Singular value frames.  alpha columns are an orthonormal eigenbasis
// of f*g_N on the domain, beta columns a g_N-orthonormal target basis
// aligned so df(alpha_i) = lambda_i beta_{n-m+i} on the rank part.
// tangent/normal columns are the ambient frames built from them:
//   tangent_i = (alpha_i (+) lambda_i beta_{n-m+i}) / sqrt(1+lambda_i^2)
//   normal_k  = (0 (+) beta_k)                        k <= n - rank
//   normal_k  = (-lambda_i alpha_i (+) beta_k) / sqrt(1+lambda_i^2),
//               i = k+m-n, otherwise.
struct Frames {
  int m = 0, n = 0, rank = 0;
  Vec lambda2;  // ascending
  Mat alpha;    // m x m
  Mat beta;     // n x n
  Mat tangent;  // (m+n) x m
  Mat normal;   // (m+n) x n
};

inline Frames svd_frames(const MapJet& jet, const MetricData& md) {
  const int m = jet.m, n = jet.n;
  Frames fr;
  fr.m = m;
  fr.n = n;

  Mat p = pullback_metric(jet, md);
  Vec l2;
  Mat alpha;
  sym_eigen_jacobi(p, l2, alpha);
  for (int i = 0; i < m; ++i) l2[i] = std::max(0.0, l2[i]);
  fr.lambda2 = l2;
  fr.alpha = alpha;

  int rank = 0;
  for (int i = 0; i < m; ++i)
    if (l2[i] > kRankTol) ++rank;
  fr.rank = rank;

  fr.beta = Mat(n, n);
  // Rank directions: beta_{n-m+i} = df(alpha_i) / lambda_i.
  for (int i = m - rank; i < m; ++i) {
    const double lam = std::sqrt(l2[i]);
    const int slot = n - m + i;
    for (int a = 0; a < n; ++a) {
      double w = 0.0;
      for (int k = 0; k < m; ++k) w += jet.d1(a, k) * alpha(k, i);
      fr.beta(a, slot) = w / lam;
    }
  }
  // Complete with g_N Gram-Schmidt over the standard basis.
  int filled = 0;
  for (int e = 0; e < n && filled < n - rank; ++e) {
    Vec v(n);
    v[e] = 1.0;
    double ee = md.g(e, e);
    auto subtract = [&](int slot) {
      double c = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) c += md.g(a, b) * v[a] * fr.beta(b, slot);
      for (int a = 0; a < n; ++a) v[a] -= c * fr.beta(a, slot);
    };
    for (int slot = n - rank; slot < n; ++slot) subtract(slot);
    for (int slot = 0; slot < filled; ++slot) subtract(slot);
    double nn = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) nn += md.g(a, b) * v[a] * v[b];
    if (nn > 1e-16 * ee) {
      const double inv = 1.0 / std::sqrt(nn);
      for (int a = 0; a < n; ++a) fr.beta(a, filled) = v[a] * inv;
      ++filled;
    }
  }
  if (filled != n - rank)
    throw EigenFailure("frame completion failed to span the normal space");

  fr.tangent = Mat(m + n, m);
  for (int i = 0; i < m; ++i) {
    const double lam = (i >= m - rank) ? std::sqrt(l2[i]) : 0.0;
    const double inv = 1.0 / std::sqrt(1.0 + l2[i]);
    for (int k = 0; k < m; ++k) fr.tangent(k, i) = alpha(k, i) * inv;
    if (i >= m - rank) {
      const int slot = n - m + i;
      for (int a = 0; a < n; ++a)
        fr.tangent(m + a, i) = lam * fr.beta(a, slot) * inv;
    }
  }
  fr.normal = Mat(m + n, n);
  for (int k = 0; k < n; ++k) {
    if (k < n - rank) {
      for (int a = 0; a < n; ++a) fr.normal(m + a, k) = fr.beta(a, k);
    } else {
      const int i = k + m - n;
      const double lam = std::sqrt(l2[i]);
      const double inv = 1.0 / std::sqrt(1.0 + l2[i]);
      for (int d = 0; d < m; ++d) fr.normal(d, k) = -lam * alpha(d, i) * inv;
      for (int a = 0; a < n; ++a) fr.normal(m + a, k) = fr.beta(a, k) * inv;
    }
  }
  return fr;
}

inline Frames svd_frames(const MapJet& jet, const ManifoldModel& model) {
  return svd_frames(jet, metric_at(model, jet.value));
}

namespace detail {

// Target components of the ambient Hessian of F = (x, f(x)):
// B^a_ij = d2(a,i,j) + Gamma^a_{bc} d1(b,i) d1(c,j).  Flat components
// vanish because the product connection has no mixed terms.
inline void hessian_target(const MapJet& jet, const MetricData& md, int i,
                           int j, Vec& out) {
  for (int a = 0; a < jet.n; ++a) {
    double s = jet.d2(a, i, j);
    for (int b = 0; b < jet.n; ++b)
      for (int c = 0; c < jet.n; ++c)
        s += md.gamma(a, b, c) * jet.d1(b, i) * jet.d1(c, j);
    out[a] = s;
  }
}

inline Vec ambient_tangent(const MapJet& jet, int k) {
  Vec t(jet.m + jet.n);
  t[k] = 1.0;
  for (int a = 0; a < jet.n; ++a) t[jet.m + a] = jet.d1(a, k);
  return t;
}

}  // namespace detail

// Orthogonal projection of an ambient vector onto the normal space of
// the graph: xi - g~^{kl} <xi, dF(e_k)> dF(e_l).
inline Vec pr_perp(const MapJet& jet, const MetricData& md, const Vec& xi) {
  const InducedMetric im = induced_metric(jet, md);
  const int m = jet.m;
  Vec coef(m);
  for (int k = 0; k < m; ++k)
    coef[k] = g_prod(md, m, xi, detail::ambient_tangent(jet, k));
  Vec out = xi;
  for (int l = 0; l < m; ++l) {
    double c = 0.0;
    for (int k = 0; k < m; ++k) c += im.g_inv(k, l) * coef[k];
    Vec t = detail::ambient_tangent(jet, l);
    for (int d = 0; d < m + jet.n; ++d) out[d] -= c * t[d];
  }
  return out;
}

inline Vec pr_perp(const MapJet& jet, const ManifoldModel& model,
                   const Vec& xi) {
  return pr_perp(jet, metric_at(model, jet.value), xi);
}

// Second fundamental form as ambient vectors:
// A_ij = pr_perp(ambient Hessian), computed without third derivatives.
inline Ten3 second_fundamental_form(const MapJet& jet, const MetricData& md) {
  const int m = jet.m, n = jet.n;
  Ten3 A(m + n, m, m);
  Vec b(n), amb(m + n);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      detail::hessian_target(jet, md, i, j, b);
      for (int d = 0; d < m; ++d) amb[d] = 0.0;
      for (int a = 0; a < n; ++a) amb[m + a] = b[a];
      Vec proj = pr_perp(jet, md, amb);
      for (int d = 0; d < m + n; ++d) {
        A(d, i, j) = proj[d];
        A(d, j, i) = proj[d];
      }
    }
  return A;
}

inline Ten3 second_fundamental_form(const MapJet& jet,
                                    const ManifoldModel& model) {
  return second_fundamental_form(jet, metric_at(model, jet.value));
}

// Mean curvature H = g~^{ij} A_ij as an ambient vector.
inline Vec mean_curvature(const MapJet& jet, const MetricData& md) {
  const InducedMetric im = induced_metric(jet, md);
  const Ten3 A = second_fundamental_form(jet, md);
  Vec H(jet.m + jet.n);
  for (int i = 0; i < jet.m; ++i)
    for (int j = 0; j < jet.m; ++j) {
      const double w = im.g_inv(i, j);
      for (int d = 0; d < jet.m + jet.n; ++d) H[d] += w * A(d, i, j);
    }
  return H;
}

inline Vec mean_curvature(const MapJet& jet, const ManifoldModel& model) {
  return mean_curvature(jet, metric_at(model, jet.value));
}

inline double mean_curvature_norm2(const MapJet& jet, const MetricData& md) {
  const Vec H = mean_curvature(jet, md);
  return g_prod(md, jet.m, H, H);
}

inline double mean_curvature_norm2(const MapJet& jet,
                                   const ManifoldModel& model) {
  return mean_curvature_norm2(jet, metric_at(model, jet.value));
}

// Nonparametric flow velocity:
// V^a = g~^{ij} (d2^a_ij + Gamma^a_{bc} d1^b_i d1^c_j).
// (0 (+) V) differs from H by a tangential vector.
inline Vec mcf_velocity(const MapJet& jet, const MetricData& md) {
  const InducedMetric im = induced_metric(jet, md);
  Vec V(jet.n), b(jet.n);
  for (int i = 0; i < jet.m; ++i)
    for (int j = 0; j < jet.m; ++j) {
      detail::hessian_target(jet, md, i, j, b);
      const double w = im.g_inv(i, j);
      for (int a = 0; a < jet.n; ++a) V[a] += w * b[a];
    }
  return V;
}

inline Vec mcf_velocity(const MapJet& jet, const ManifoldModel& model) {
  return mcf_velocity(jet, metric_at(model, jet.value));
}

// Largest eigenvalue of the normal-bundle matrix
//   M_jk = s(xi_j, xi_k) + eps2 H_{xi_j} H_{xi_k}
// in the singular value frames.  Nonpositivity of M is the pointwise
// pinching condition preserved along contraction flows.
inline double s_perp_theta_max(const MapJet& jet, const MetricData& md,
                               double eps2) {
  const Frames fr = svd_frames(jet, md);
  const Vec H = mean_curvature(jet, md);
  const int n = jet.n;
  Vec hxi(n);
  Vec col(jet.m + n), col2(jet.m + n);
  Mat M(n, n);
  for (int k = 0; k < n; ++k) {
    for (int d = 0; d < jet.m + n; ++d) col[d] = fr.normal(d, k);
    hxi[k] = g_prod(md, jet.m, H, col);
  }
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      for (int d = 0; d < jet.m + n; ++d) {
        col[d] = fr.normal(d, j);
        col2[d] = fr.normal(d, k);
      }
      const double v = s_prod(md, jet.m, col, col2) + eps2 * hxi[j] * hxi[k];
      M(j, k) = v;
      M(k, j) = v;
    }
  const Vec ev = sym_eigenvalues(M);
  return ev[n - 1];
}

inline double s_perp_theta_max(const MapJet& jet, const ManifoldModel& model,
                               double eps2) {
  return s_perp_theta_max(jet, metric_at(model, jet.value), eps2);
}

// <R(d1, d2) d2, d1> of a 2d metric field by centered differences.
// g_at(u, v) returns the metric at chart point (u, v); spacing h.
inline double intrinsic_rm1212_fd(
    const std::function<Mat(double, double)>& g_at, double u0, double v0,
    double h) {
  // Christoffels at a point from centered differences of g there.
  auto christoffel = [&](double u, double v) -> Ten3 {
    Mat g = g_at(u, v);
    Mat gi;
    if (!invert(g, gi)) throw SingularMetric("degenerate 2d metric");
    Mat du(2, 2), dv(2, 2);
    const Mat gup = g_at(u + h, v), gum = g_at(u - h, v);
    const Mat gvp = g_at(u, v + h), gvm = g_at(u, v - h);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        du(i, j) = (gup(i, j) - gum(i, j)) / (2.0 * h);
        dv(i, j) = (gvp(i, j) - gvm(i, j)) / (2.0 * h);
      }
    auto dg = [&](int k, int i, int j) { return k == 0 ? du(i, j) : dv(i, j); };
    Ten3 gam(2, 2, 2);
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double s = 0.0;
          for (int k = 0; k < 2; ++k)
            s += 0.5 * gi(l, k) * (dg(i, j, k) + dg(j, i, k) - dg(k, i, j));
          gam(l, i, j) = s;
        }
    return gam;
  };

  const Ten3 gc = christoffel(u0, v0);
  const Ten3 gxp = christoffel(u0 + h, v0), gxm = christoffel(u0 - h, v0);
  const Ten3 gyp = christoffel(u0, v0 + h), gym = christoffel(u0, v0 - h);
  const Mat g0 = g_at(u0, v0);

  // R^l_{122} = d_1 Gamma^l_{22} - d_2 Gamma^l_{12} +
  //             Gamma^l_{1p} Gamma^p_{22} - Gamma^l_{2p} Gamma^p_{12}
  double out = 0.0;
  for (int l = 0; l < 2; ++l) {
    double r = (gxp(l, 1, 1) - gxm(l, 1, 1)) / (2.0 * h) -
               (gyp(l, 0, 1) - gym(l, 0, 1)) / (2.0 * h);
    for (int p = 0; p < 2; ++p)
      r += gc(l, 0, p) * gc(p, 1, 1) - gc(l, 1, p) * gc(p, 0, 1);
    out += g0(l, 0) * r;
  }
  return out;
}

// Residual of the Gauss equation for an m=2 graph over a flat target:
// |Rm(d1,d2,d1,d2)_fd - (<A_11,A_22> - <A_12,A_12>)|.
// jet_field(di, dj) samples jets on the grid-aligned stencil x0 + (di,dj)h,
// offsets within |di| + |dj| <= 2.
inline double gauss_residual(
    const std::function<MapJet(int, int)>& jet_field, double h,
    const ManifoldModel& model) {
  if (model.kind != ModelKind::Euclidean)
    throw DomainError("gauss_residual needs a flat target model");
  const MapJet center = jet_field(0, 0);
  if (center.m != 2) throw DomainError("gauss_residual needs m = 2");

  const MetricData md = metric_at(model, center.value);
  auto g_at = [&](double u, double v) -> Mat {
    const int di = static_cast<int>(std::lround(u / h));
    const int dj = static_cast<int>(std::lround(v / h));
    const MapJet j = jet_field(di, dj);
    Mat g = pullback_metric(j, metric_at(model, j.value));
    for (int i = 0; i < 2; ++i) g(i, i) += 1.0;
    return g;
  };
  const double lhs = intrinsic_rm1212_fd(g_at, 0.0, 0.0, h);

  const Ten3 A = second_fundamental_form(center, md);
  const int amb = center.m + center.n;
  Vec a11(amb), a22(amb), a12(amb);
  for (int d = 0; d < amb; ++d) {
    a11[d] = A(d, 0, 0);
    a22[d] = A(d, 1, 1);
    a12[d] = A(d, 0, 1);
  }
  const double rhs = g_prod(md, center.m, a11, a22) -
                     g_prod(md, center.m, a12, a12);
  return std::fabs(lhs - rhs);
}

}  // namespace graphflow
