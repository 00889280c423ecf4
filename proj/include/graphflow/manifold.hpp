#pragma once

// Model target manifolds in a single fixed chart each:
//   euclidean:<n>     flat R^n
//   upper-half-plane  {y2 > 0},  g_ab = delta_ab / (y2)^2
//   poincare-disk     {r < 1},   g_ab = 4 delta_ab / (1 - r^2)^2
//   product:<a>,<b>   block-diagonal product of non-product factors
// Both hyperbolic charts have constant sectional curvature -1.

#include <limits>
#include <string>
#include <vector>

#include "graphflow/errors.hpp"
#include "graphflow/linalg.hpp"

namespace graphflow {

enum class ModelKind { Euclidean, UpperHalfPlane, PoincareDisk, Product };

struct ManifoldModel {
  ModelKind kind = ModelKind::Euclidean;
  int n = 1;
  std::vector<ManifoldModel> factors;  // Product only
};

struct MetricData {
  int n = 0;
  Mat g;
  Mat g_inv;
  Ten3 gamma;              // gamma(a,b,c) = Gamma^a_{bc}, symmetric in b,c
  double sec_upper_bound;  // upper bound on sectional curvature, <= 0 here
};

// Reported clearance for charts without a boundary.
inline constexpr double kClearanceCap = 1e30;

namespace detail {

inline ManifoldModel parse_simple_model(const std::string& s) {
  ManifoldModel m;
  if (s == "upper-half-plane") {
    m.kind = ModelKind::UpperHalfPlane;
    m.n = 2;
    return m;
  }
  if (s == "poincare-disk") {
    m.kind = ModelKind::PoincareDisk;
    m.n = 2;
    return m;
  }
  if (s.rfind("euclidean:", 0) == 0) {
    m.kind = ModelKind::Euclidean;
    const std::string dims = s.substr(10);
    try {
      size_t pos = 0;
      m.n = std::stoi(dims, &pos);
      if (pos != dims.size()) throw std::invalid_argument(dims);
    } catch (const std::exception&) {
      throw ConfigError("bad euclidean dimension '" + dims + "' in model '" +
                        s + "'");
    }
    if (m.n < 1 || m.n > kDimCap - 1)
      throw ConfigError("euclidean dimension out of range in model '" + s +
                        "'");
    return m;
  }
  throw ConfigError("unknown model '" + s + "'");
}

}  // namespace detail

inline ManifoldModel parse_model(const std::string& spec) {
  if (spec.rfind("product:", 0) == 0) {
    ManifoldModel m;
    m.kind = ModelKind::Product;
    m.n = 0;
    std::string rest = spec.substr(8);
    if (rest.empty()) throw ConfigError("empty product model spec");
    size_t start = 0;
    while (start <= rest.size()) {
      size_t comma = rest.find(',', start);
      const std::string part = rest.substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start);
      if (part.rfind("product:", 0) == 0)
        throw ConfigError("nested product models are not supported");
      m.factors.push_back(detail::parse_simple_model(part));
      m.n += m.factors.back().n;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (m.factors.size() < 2)
      throw ConfigError("product model needs at least two factors");
    if (m.n > kDimCap - 1)
      throw ConfigError("product model dimension too large");
    return m;
  }
  return detail::parse_simple_model(spec);
}

inline std::string model_to_string(const ManifoldModel& m) {
  switch (m.kind) {
    case ModelKind::Euclidean:
      return "euclidean:" + std::to_string(m.n);
    case ModelKind::UpperHalfPlane:
      return "upper-half-plane";
    case ModelKind::PoincareDisk:
      return "poincare-disk";
    case ModelKind::Product: {
      std::string s = "product:";
      for (size_t i = 0; i < m.factors.size(); ++i) {
        if (i) s += ",";
        s += model_to_string(m.factors[i]);
      }
      return s;
    }
  }
  return "";
}

// sigma >= 0 such that all sectional curvatures are <= -sigma.
// A genuine product always admits a flat mixed plane, so its bound is 0.
inline double sectional_bound(const ManifoldModel& m) {
  switch (m.kind) {
    case ModelKind::Euclidean:
      return 0.0;
    case ModelKind::UpperHalfPlane:
    case ModelKind::PoincareDisk:
      return 1.0;
    case ModelKind::Product:
      return m.factors.size() == 1 ? sectional_bound(m.factors[0]) : 0.0;
  }
  return 0.0;
}

// Distance from y to the chart boundary, in chart coordinates.
// Boundary-free charts report kClearanceCap.
inline double chart_clearance(const ManifoldModel& m, const Vec& y) {
  switch (m.kind) {
    case ModelKind::Euclidean:
      return kClearanceCap;
    case ModelKind::UpperHalfPlane:
      return y[1];
    case ModelKind::PoincareDisk:
      return 1.0 - std::sqrt(y[0] * y[0] + y[1] * y[1]);
    case ModelKind::Product: {
      double c = kClearanceCap;
      int off = 0;
      for (const auto& f : m.factors) {
        Vec sub(f.n);
        for (int a = 0; a < f.n; ++a) sub[a] = y[off + a];
        c = std::min(c, chart_clearance(f, sub));
        off += f.n;
      }
      return c;
    }
  }
  return kClearanceCap;
}

inline bool chart_contains(const ManifoldModel& m, const Vec& y,
                           double margin = 0.0) {
  for (int a = 0; a < y.size(); ++a)
    if (!std::isfinite(y[a])) return false;
  return chart_clearance(m, y) > margin;
}

namespace detail {

inline void metric_at_impl(const ManifoldModel& m, const Vec& y, int off,
                           MetricData& md) {
  switch (m.kind) {
    case ModelKind::Euclidean: {
      for (int a = 0; a < m.n; ++a) {
        md.g(off + a, off + a) = 1.0;
        md.g_inv(off + a, off + a) = 1.0;
      }
      return;
    }
    case ModelKind::UpperHalfPlane: {
      // g = delta / (y2)^2.  With phi = -log(y2):
      //   Gamma^1_{12} = Gamma^1_{21} = -1/y2
      //   Gamma^2_{11} = 1/y2,  Gamma^2_{22} = -1/y2
      const double h = y[off + 1];
      const double c2 = 1.0 / (h * h);
      md.g(off + 0, off + 0) = c2;
      md.g(off + 1, off + 1) = c2;
      md.g_inv(off + 0, off + 0) = h * h;
      md.g_inv(off + 1, off + 1) = h * h;
      const double ih = 1.0 / h;
      md.gamma(off + 0, off + 0, off + 1) = -ih;
      md.gamma(off + 0, off + 1, off + 0) = -ih;
      md.gamma(off + 1, off + 0, off + 0) = ih;
      md.gamma(off + 1, off + 1, off + 1) = -ih;
      return;
    }
    case ModelKind::PoincareDisk: {
      // g = 4 delta / (1 - r^2)^2.  With P = 2x/(1-r^2), Q = 2y/(1-r^2):
      //   Gamma^1_{11} = P, Gamma^1_{12} = Gamma^1_{21} = Q, Gamma^1_{22} = -P
      //   Gamma^2_{11} = -Q, Gamma^2_{12} = Gamma^2_{21} = P, Gamma^2_{22} = Q
      const double x = y[off + 0], yy = y[off + 1];
      const double w = 1.0 - (x * x + yy * yy);
      const double c = 2.0 / w;
      md.g(off + 0, off + 0) = c * c;
      md.g(off + 1, off + 1) = c * c;
      md.g_inv(off + 0, off + 0) = 1.0 / (c * c);
      md.g_inv(off + 1, off + 1) = 1.0 / (c * c);
      const double P = 2.0 * x / w, Q = 2.0 * yy / w;
      md.gamma(off + 0, off + 0, off + 0) = P;
      md.gamma(off + 0, off + 0, off + 1) = Q;
      md.gamma(off + 0, off + 1, off + 0) = Q;
      md.gamma(off + 0, off + 1, off + 1) = -P;
      md.gamma(off + 1, off + 0, off + 0) = -Q;
      md.gamma(off + 1, off + 0, off + 1) = P;
      md.gamma(off + 1, off + 1, off + 0) = P;
      md.gamma(off + 1, off + 1, off + 1) = Q;
      return;
    }
    case ModelKind::Product: {
      int o = off;
      for (const auto& f : m.factors) {
        metric_at_impl(f, y, o, md);
        o += f.n;
      }
      return;
    }
  }
}

}  // namespace detail

inline MetricData metric_at(const ManifoldModel& m, const Vec& y) {
  if (y.size() != m.n)
    throw DomainError("metric_at: point dimension " + std::to_string(y.size()) +
                      " does not match model dimension " + std::to_string(m.n));
  if (!chart_contains(m, y))
    throw ChartViolation("metric_at: point outside chart of " +
                         model_to_string(m));
  MetricData md;
  md.n = m.n;
  md.g = Mat(m.n, m.n);
  md.g_inv = Mat(m.n, m.n);
  md.gamma = Ten3(m.n, m.n, m.n);
  md.sec_upper_bound = -sectional_bound(m);
  detail::metric_at_impl(m, y, 0, md);
  return md;
}

}  // namespace graphflow
