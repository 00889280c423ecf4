#pragma once

// Closed-form reference solutions used to seed runs, feed Dirichlet
// boundaries, and verify the solver against exact flows.
//
//   hs1   translating line in the upper half-plane: f_t(x) = (x, d(t)),
//         d' = d/(1+d^2),  d(t) = sqrt(W(exp(2(t - t0)))),
//         t - t0 = (1/2) log(d^2 exp(d^2)),  |H|^2 = 1/(1+d^2)^2.
//   hs2   shrinking circle ansatz in the Poincare disk:
//         f_t(x) = (r(t) sin x, r(t) cos x),  r' = -r(1-r^2)/(1+r^2),
//         r(t) = 2 / (sqrt(c1^2 e^{2t} + 4) + c1 e^t),  c1 = (1-r0^2)/r0,
//         |H|^2 = 4 r^2/(1+r^2)^2.
//   hs3a  stationary exponential graph into the half-plane:
//         f(x) = (x0, exp(c x)),  f*g == c^2.
//   hs3b  stationary sigmoid graph into the disk:
//         f(x) = (tanh(c x / 2), 0),  f*g == c^2.

#include <cmath>
#include <functional>
#include <map>
#include <string>

#include "graphflow/errors.hpp"
#include "graphflow/linalg.hpp"

namespace graphflow {

// Principal branch of the Lambert W function for x >= 0.
// Halley iterations from w0 = log(1 + x); the residual w e^w - x
// is driven below 1e-13 relative.
inline double lambert_w(double x) {
  if (!(x >= 0.0)) throw DomainError("lambert_w defined for x >= 0 here");
  if (x == 0.0) return 0.0;
  double w = std::log1p(x);
  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::fabs(f) <= 1e-13 * std::max(1.0, x)) break;
    const double wp1 = w + 1.0;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    w -= f / denom;
  }
  // One Newton polish in log form for large arguments keeps the
  // residual tight without overflowing e^w.
  if (x > 1.0) {
    const double lw = std::log(w);
    w -= (w + lw - std::log(x)) * w / (w + 1.0);
  }
  return w;
}

// W(exp(z)) without forming exp(z).  For z <= 700 the direct route is
// exact enough; beyond that exp overflows and we solve w + log w = z
// by Newton from the asymptotic w ~ z - log z.
inline double lambert_w_exp(double z) {
  if (z <= 700.0) return lambert_w(std::exp(z));
  double w = z - std::log(z);
  for (int it = 0; it < 8; ++it) {
    const double f = w + std::log(w) - z;
    w -= f * w / (w + 1.0);
  }
  return w;
}

// hs1 ------------------------------------------------------------------

inline double hs1_d(double t, double t0) {
  return std::sqrt(lambert_w_exp(2.0 * (t - t0)));
}

// t0 from the height at time zero, inverting t - t0 = log(d^2 e^{d^2})/2.
inline double hs1_t0_for(double d0) {
  if (!(d0 > 0.0)) throw DomainError("hs1 height must be positive");
  return -0.5 * (std::log(d0 * d0) + d0 * d0);
}

inline double hs1_H_norm2(double d) {
  const double q = 1.0 + d * d;
  return 1.0 / (q * q);
}

// hs2 ------------------------------------------------------------------

inline double hs2_c1_for(double r0) {
  if (!(r0 > 0.0 && r0 < 1.0)) throw DomainError("hs2 radius must be in (0,1)");
  return (1.0 - r0 * r0) / r0;
}

// Cancellation-free form of (sqrt(c1^2 e^{2t} + 4) - c1 e^t)/2.
inline double hs2_r(double t, double c1) {
  if (!(c1 > 0.0)) throw DomainError("hs2 needs c1 > 0");
  const double q = c1 * std::exp(t);
  if (q > 1e150) return 1.0 / q;
  return 2.0 / (std::sqrt(q * q + 4.0) + q);
}

inline double hs2_H_norm2(double r) {
  const double q = 1.0 + r * r;
  return 4.0 * r * r / (q * q);
}

// hs3 ------------------------------------------------------------------

inline Vec hs3a_map(double x, double x0, double c) {
  Vec y(2);
  y[0] = x0;
  y[1] = std::exp(c * x);
  return y;
}

inline Vec hs3b_map(double x, double c) {
  Vec y(2);
  y[0] = std::tanh(0.5 * c * x);
  y[1] = 0.0;
  return y;
}

// Example registry -------------------------------------------------------

struct ExampleSpec {
  std::string id;                       // hs1 | hs2 | hs3a | hs3b
  std::map<std::string, double> params; // d0/t0, r0/c1, x0, c
};

// Time-dependent exact map for 1d examples, usable as initial data and
// as a Dirichlet boundary oracle (ghost points included).
inline std::function<Vec(double, double)> exact_map_oracle(
    const ExampleSpec& ex) {
  auto get = [&ex](const std::string& k, double fallback,
                   bool required = false) {
    auto it = ex.params.find(k);
    if (it != ex.params.end()) return it->second;
    if (required) throw ConfigError("example " + ex.id + " missing param " + k);
    return fallback;
  };
  if (ex.id == "hs1") {
    double t0;
    if (ex.params.count("t0")) t0 = get("t0", 0.0);
    else t0 = hs1_t0_for(get("d0", 1.0));
    return [t0](double x, double t) {
      Vec y(2);
      y[0] = x;
      y[1] = hs1_d(t, t0);
      return y;
    };
  }
  if (ex.id == "hs2") {
    double c1;
    if (ex.params.count("c1")) c1 = get("c1", 0.0);
    else c1 = hs2_c1_for(get("r0", 0.3));
    return [c1](double x, double t) {
      const double r = hs2_r(t, c1);
      Vec y(2);
      y[0] = r * std::sin(x);
      y[1] = r * std::cos(x);
      return y;
    };
  }
  if (ex.id == "hs3a") {
    const double x0 = get("x0", 0.0), c = get("c", 0.5);
    return [x0, c](double x, double) { return hs3a_map(x, x0, c); };
  }
  if (ex.id == "hs3b") {
    const double c = get("c", 0.5);
    return [c](double x, double) { return hs3b_map(x, c); };
  }
  throw ConfigError("unknown example id '" + ex.id + "'");
}

// Model each example lives in.
inline std::string example_model(const std::string& id) {
  if (id == "hs1" || id == "hs3a") return "upper-half-plane";
  if (id == "hs2" || id == "hs3b") return "poincare-disk";
  throw ConfigError("unknown example id '" + id + "'");
}

}  // namespace graphflow
