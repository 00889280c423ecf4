#pragma once

// Explicit time stepping for the nonparametric flow
//   d_t f^a = g~^{ij} (d^2_ij f^a + Gamma^a_{bc} d_i f^b d_j f^c)
// on uniform grids over R^1 or R^2.  Spatial derivatives are second
// order centered differences; out-of-range neighbors come from ghost
// values (periodic wrap, a Dirichlet oracle evaluated at the ghost
// coordinate and current time, or linear extrapolation).
//
// Grid convention: x_i = lo + i h with h = (hi - lo)/points on every
// axis; the right endpoint is not a grid point (periodic axes wrap
// there, bounded axes reach it through ghosts).

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "graphflow/errors.hpp"
#include "graphflow/graphgeom.hpp"
#include "graphflow/manifold.hpp"
#include "graphflow/oracles.hpp"
#include "graphflow/parallel.hpp"

namespace graphflow {

struct Grid {
  int m = 1;
  std::array<double, 2> lo{{0.0, 0.0}};
  std::array<double, 2> hi{{1.0, 1.0}};
  std::array<int, 2> points{{8, 8}};
  std::array<bool, 2> periodic{{true, true}};

  double spacing(int axis) const { return (hi[axis] - lo[axis]) / points[axis]; }
  double coord(int axis, int i) const { return lo[axis] + i * spacing(axis); }
  int count() const { return m == 1 ? points[0] : points[0] * points[1]; }
  int index(int i, int j = 0) const { return m == 1 ? i : i * points[1] + j; }
  double min_spacing() const {
    double h = spacing(0);
    if (m == 2) h = std::min(h, spacing(1));
    return h;
  }

  void validate() const {
    if (m != 1 && m != 2) throw ConfigError("grid dimension must be 1 or 2");
    for (int a = 0; a < m; ++a) {
      if (!(hi[a] > lo[a]))
        throw ConfigError("grid axis " + std::to_string(a) +
                          " has nonpositive extent");
      if (points[a] < 8)
        throw ConfigError("grid axis " + std::to_string(a) +
                          " needs at least 8 points");
    }
  }
};

enum class BcKind { Periodic, DirichletOracle, LinearExtrapolation };

struct BoundaryCondition {
  BcKind kind = BcKind::Periodic;
  std::string oracle_id;                        // registry id, for echoing
  std::map<std::string, double> oracle_params;  // ditto
  // Exact map (x, t) -> target point for Dirichlet ghosts; must be
  // evaluable outside the grid extent.
  std::function<Vec(const std::array<double, 2>&, double)> oracle;
};

// Dirichlet condition backed by a registered exact map.
inline BoundaryCondition dirichlet_from_example(const ExampleSpec& ex) {
  BoundaryCondition bc;
  bc.kind = BcKind::DirichletOracle;
  bc.oracle_id = ex.id;
  bc.oracle_params = ex.params;
  auto fn = exact_map_oracle(ex);
  bc.oracle = [fn](const std::array<double, 2>& x, double t) {
    return fn(x[0], t);
  };
  return bc;
}

enum class Integrator { Euler, RK4 };

struct StepControl {
  double cfl = 0.2;       // in (0, 1/2]
  double dt_max = 0.01;
  double t_end = 1.0;
  Integrator integrator = Integrator::Euler;
  double chart_margin = 1e-6;
  int threads = 1;
};

struct FlowStats {
  long long steps = 0;
  double last_dt = 0.0;
  double max_velocity = 0.0;  // sup over points and steps of max |V^a|
};

struct FlowState {
  Grid grid;
  ManifoldModel model;
  BoundaryCondition bc;
  int n = 0;
  std::vector<double> f;  // count * n, point-major
  double t = 0.0;
  FlowStats stats;
};

namespace detail {

// Value of the field at (i, j) with ghost handling; i or j may be one
// or two cells out of range.  Periodic axes wrap; Dirichlet evaluates
// the oracle at the ghost coordinate; extrapolation is linear off the
// nearest edge, axis 0 resolved before axis 1.
inline void field_value(const FlowState& s, const std::vector<double>& f,
                        int i, int j, double t_eval, double* out) {
  const Grid& g = s.grid;
  if (g.periodic[0]) {
    const int n0 = g.points[0];
    i = (i % n0 + n0) % n0;
  }
  if (g.m == 2 && g.periodic[1]) {
    const int n1 = g.points[1];
    j = (j % n1 + n1) % n1;
  }
  const bool out0 = i < 0 || i >= g.points[0];
  const bool out1 = g.m == 2 && (j < 0 || j >= g.points[1]);
  if (!out0 && !out1) {
    const double* p = f.data() + static_cast<size_t>(g.index(i, j)) * s.n;
    for (int a = 0; a < s.n; ++a) out[a] = p[a];
    return;
  }
  if (s.bc.kind == BcKind::DirichletOracle) {
    std::array<double, 2> x{{g.coord(0, i), g.m == 2 ? g.coord(1, j) : 0.0}};
    const Vec y = s.bc.oracle(x, t_eval);
    for (int a = 0; a < s.n; ++a) out[a] = y[a];
    return;
  }
  if (s.bc.kind == BcKind::LinearExtrapolation) {
    std::array<double, kDimCap> edge, inner;
    if (out0) {
      const int e = i < 0 ? 0 : g.points[0] - 1;
      const int d = i < 0 ? 1 : -1;
      const int steps = i < 0 ? -i : i - (g.points[0] - 1);
      field_value(s, f, e, j, t_eval, edge.data());
      field_value(s, f, e + d, j, t_eval, inner.data());
      for (int a = 0; a < s.n; ++a)
        out[a] = edge[a] + steps * (edge[a] - inner[a]);
      return;
    }
    const int e = j < 0 ? 0 : g.points[1] - 1;
    const int d = j < 0 ? 1 : -1;
    const int steps = j < 0 ? -j : j - (g.points[1] - 1);
    field_value(s, f, i, e, t_eval, edge.data());
    field_value(s, f, i, e + d, t_eval, inner.data());
    for (int a = 0; a < s.n; ++a)
      out[a] = edge[a] + steps * (edge[a] - inner[a]);
    return;
  }
  throw ConfigError("non-periodic axis without a boundary condition");
}

}  // namespace detail

// Centered 2-jet of the field at grid point (i, j).  The symmetric
// stencils are written so that mirror-symmetric data produces exactly
// mirror-symmetric jets in floating point.
inline MapJet spatial_jet(const FlowState& s, const std::vector<double>& f,
                          int i, int j, double t_eval) {
  const Grid& g = s.grid;
  MapJet jet = MapJet::zero(g.m, s.n);
  std::array<double, kDimCap> c, xp, xm, yp, ym, pp, pm, mp, mm;
  detail::field_value(s, f, i, j, t_eval, c.data());
  detail::field_value(s, f, i + 1, j, t_eval, xp.data());
  detail::field_value(s, f, i - 1, j, t_eval, xm.data());
  const double hx = g.spacing(0);
  for (int a = 0; a < s.n; ++a) {
    jet.value[a] = c[a];
    jet.d1(a, 0) = (xp[a] - xm[a]) / (2.0 * hx);
    jet.d2(a, 0, 0) = ((xp[a] + xm[a]) - 2.0 * c[a]) / (hx * hx);
  }
  if (g.m == 2) {
    detail::field_value(s, f, i, j + 1, t_eval, yp.data());
    detail::field_value(s, f, i, j - 1, t_eval, ym.data());
    detail::field_value(s, f, i + 1, j + 1, t_eval, pp.data());
    detail::field_value(s, f, i + 1, j - 1, t_eval, pm.data());
    detail::field_value(s, f, i - 1, j + 1, t_eval, mp.data());
    detail::field_value(s, f, i - 1, j - 1, t_eval, mm.data());
    const double hy = g.spacing(1);
    for (int a = 0; a < s.n; ++a) {
      jet.d1(a, 1) = (yp[a] - ym[a]) / (2.0 * hy);
      jet.d2(a, 1, 1) = ((yp[a] + ym[a]) - 2.0 * c[a]) / (hy * hy);
      const double mixed =
          ((pp[a] + mm[a]) - (pm[a] + mp[a])) / (4.0 * hx * hy);
      jet.d2(a, 0, 1) = mixed;
      jet.d2(a, 1, 0) = mixed;
    }
  }
  return jet;
}

inline MapJet spatial_jet(const FlowState& s, int i, int j = 0) {
  return spatial_jet(s, s.f, i, j, s.t);
}

namespace detail {

inline std::pair<int, int> unflatten(const Grid& g, int idx) {
  if (g.m == 1) return {idx, 0};
  return {idx / g.points[1], idx % g.points[1]};
}

// Velocity of every grid point for the given field/stage time.
// Throws ChartExit / NumericalBlowup with the offending flat index.
inline void velocity_field(const FlowState& s, const std::vector<double>& f,
                           double t_eval, const StepControl& ctl,
                           std::vector<double>& out) {
  // A non-finite stored value poisons every stencil that reads it, so
  // scan up front and report the offending point, not a neighbor.
  for (size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i])) {
      const int idx = static_cast<int>(i / static_cast<size_t>(s.n));
      throw NumericalBlowup("non-finite field value at grid index " +
                                std::to_string(idx) + ", t = " +
                                std::to_string(t_eval),
                            idx, t_eval);
    }
  out.resize(f.size());
  parallel_for(0, s.grid.count(), ctl.threads, [&](int idx) {
    const auto [i, j] = unflatten(s.grid, idx);
    const MapJet jet = spatial_jet(s, f, i, j, t_eval);
    if (!chart_contains(s.model, jet.value, ctl.chart_margin))
      throw ChartExit("field left the target chart at grid index " +
                          std::to_string(idx) + ", t = " +
                          std::to_string(t_eval),
                      idx, t_eval);
    const MetricData md = metric_at(s.model, jet.value);
    const Vec v = mcf_velocity(jet, md);
    double* o = out.data() + static_cast<size_t>(idx) * s.n;
    for (int a = 0; a < s.n; ++a) o[a] = v[a];
  });
}

// Post-step validation; reports the worst offender.
inline void validate_field(const FlowState& s, const std::vector<double>& f,
                           double t_eval, double margin) {
  const int count = s.grid.count();
  double worst_clearance = std::numeric_limits<double>::infinity();
  int worst_idx = -1;
  Vec y(s.n);
  for (int idx = 0; idx < count; ++idx) {
    const double* p = f.data() + static_cast<size_t>(idx) * s.n;
    for (int a = 0; a < s.n; ++a) {
      if (!std::isfinite(p[a]))
        throw NumericalBlowup("non-finite field value at grid index " +
                                  std::to_string(idx) + ", t = " +
                                  std::to_string(t_eval),
                              idx, t_eval);
      y[a] = p[a];
    }
    const double c = chart_clearance(s.model, y);
    if (c < worst_clearance) {
      worst_clearance = c;
      worst_idx = idx;
    }
  }
  if (worst_clearance <= margin)
    throw ChartExit("field left the target chart at grid index " +
                        std::to_string(worst_idx) + ", t = " +
                        std::to_string(t_eval) + " (clearance " +
                        std::to_string(worst_clearance) + ")",
                    worst_idx, t_eval);
}

}  // namespace detail

// Build a state from an initializer x -> target point and validate it.
inline FlowState make_state(
    const Grid& grid, const ManifoldModel& model, const BoundaryCondition& bc,
    const std::function<Vec(const std::array<double, 2>&)>& init,
    double chart_margin = 1e-6) {
  grid.validate();
  for (int a = 0; a < grid.m; ++a)
    if (!grid.periodic[a] && bc.kind == BcKind::Periodic)
      throw ConfigError("bounded grid axis requires a boundary condition");
  if (bc.kind == BcKind::DirichletOracle && !bc.oracle)
    throw ConfigError("Dirichlet boundary condition without an oracle");
  FlowState s;
  s.grid = grid;
  s.model = model;
  s.bc = bc;
  s.n = model.n;
  s.f.assign(static_cast<size_t>(grid.count()) * model.n, 0.0);
  for (int idx = 0; idx < grid.count(); ++idx) {
    const auto [i, j] = detail::unflatten(grid, idx);
    std::array<double, 2> x{{grid.coord(0, i),
                             grid.m == 2 ? grid.coord(1, j) : 0.0}};
    const Vec y = init(x);
    if (y.size() != model.n)
      throw ConfigError("initializer dimension does not match model");
    for (int a = 0; a < model.n; ++a)
      s.f[static_cast<size_t>(idx) * model.n + a] = y[a];
  }
  detail::validate_field(s, s.f, s.t, chart_margin);
  return s;
}

// Parabolic step bound: dt = min(dt_max, cfl h_min^2 / (2 m Lambda)),
// Lambda the grid max of the largest eigenvalue of g~^{-1}.
inline double cfl_dt(const FlowState& s, const StepControl& ctl) {
  const int count = s.grid.count();
  double lambda = 0.0;
  for (int idx = 0; idx < count; ++idx) {
    const auto [i, j] = detail::unflatten(s.grid, idx);
    const MapJet jet = spatial_jet(s, s.f, i, j, s.t);
    const MetricData md = metric_at(s.model, jet.value);
    const Vec l2 = singular_values(jet, md);
    lambda = std::max(lambda, 1.0 / (1.0 + l2[0]));
  }
  const double h = s.grid.min_spacing();
  return std::min(ctl.dt_max, ctl.cfl * h * h / (2.0 * s.grid.m * lambda));
}

// One explicit step of size dt (forward Euler or classical RK4).
inline void step(FlowState& s, double dt, const StepControl& ctl) {
  const size_t len = s.f.size();
  static thread_local std::vector<double> k1, k2, k3, k4, tmp;
  if (ctl.integrator == Integrator::Euler) {
    detail::velocity_field(s, s.f, s.t, ctl, k1);
    double maxv = 0.0;
    for (size_t i = 0; i < len; ++i) {
      maxv = std::max(maxv, std::fabs(k1[i]));
      s.f[i] += dt * k1[i];
    }
    s.stats.max_velocity = std::max(s.stats.max_velocity, maxv);
  } else {
    detail::velocity_field(s, s.f, s.t, ctl, k1);
    tmp.resize(len);
    for (size_t i = 0; i < len; ++i) tmp[i] = s.f[i] + 0.5 * dt * k1[i];
    detail::velocity_field(s, tmp, s.t + 0.5 * dt, ctl, k2);
    for (size_t i = 0; i < len; ++i) tmp[i] = s.f[i] + 0.5 * dt * k2[i];
    detail::velocity_field(s, tmp, s.t + 0.5 * dt, ctl, k3);
    for (size_t i = 0; i < len; ++i) tmp[i] = s.f[i] + dt * k3[i];
    detail::velocity_field(s, tmp, s.t + dt, ctl, k4);
    double maxv = 0.0;
    for (size_t i = 0; i < len; ++i) {
      maxv = std::max(maxv, std::fabs(k1[i]));
      s.f[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    s.stats.max_velocity = std::max(s.stats.max_velocity, maxv);
  }
  s.t += dt;
  s.stats.steps += 1;
  s.stats.last_dt = dt;
  detail::validate_field(s, s.f, s.t, ctl.chart_margin);
}

// Advance to ctl.t_end with adaptive CFL steps.  on_record fires at
// t0 and every multiple of monitor_every (record times are hit
// exactly by clamping dt), giving floor((t_end - t0)/monitor_every) + 1
// calls when monitor_every > 0.
inline void run(FlowState& s, const StepControl& ctl, double monitor_every,
                const std::function<void(const FlowState&)>& on_record = {}) {
  const double t0 = s.t;
  const double T = ctl.t_end;
  const bool monitoring = on_record && monitor_every > 0.0;
  long long k = 0;
  double next = t0;
  if (monitoring) {
    on_record(s);
    next = t0 + (++k) * monitor_every;
  }
  const double tiny = 1e-12 * std::max(1.0, std::fabs(T));
  while (s.t < T - tiny) {
    double dt = std::min(cfl_dt(s, ctl), T - s.t);
    if (monitoring && next <= T + tiny) dt = std::min(dt, next - s.t);
    step(s, dt, ctl);
    if (monitoring && s.t >= next - 1e-9 * monitor_every) {
      on_record(s);
      next = t0 + (++k) * monitor_every;
    }
  }
}

// Radial ODE reductions of the 1d examples:
//   hs1: d' =  d (1 + d^2)^{-1},        admissible d > 0
//   hs2: r' = -r (1 - r^2)(1 + r^2)^{-1}, admissible 0 < r < 1
struct OdeSample {
  double t;
  double y;
};

inline std::vector<OdeSample> reduce_ode(const ExampleSpec& ex, double y0,
                                         double t0, double t_end, double dt) {
  std::function<double(double)> rhs;
  std::function<bool(double)> ok;
  if (ex.id == "hs1") {
    rhs = [](double d) { return d / (1.0 + d * d); };
    ok = [](double d) { return d > 0.0; };
  } else if (ex.id == "hs2") {
    rhs = [](double r) { return -r * (1.0 - r * r) / (1.0 + r * r); };
    ok = [](double r) { return r > 0.0 && r < 1.0; };
  } else {
    throw DomainError("example " + ex.id + " has no ODE reduction");
  }
  if (!(dt > 0.0)) throw DomainError("reduce_ode needs dt > 0");
  if (!ok(y0))
    throw RangeViolation("reduce_ode: initial value " + std::to_string(y0) +
                         " outside the admissible range for " + ex.id);
  std::vector<OdeSample> out;
  double t = t0, y = y0;
  out.push_back({t, y});
  const double tiny = 1e-12 * std::max(1.0, std::fabs(t_end));
  while (t < t_end - tiny) {
    const double h = std::min(dt, t_end - t);
    const double a1 = rhs(y);
    const double a2 = rhs(y + 0.5 * h * a1);
    const double a3 = rhs(y + 0.5 * h * a2);
    const double a4 = rhs(y + h * a3);
    y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    t += h;
    if (!ok(y))
      throw RangeViolation("reduce_ode: value left the admissible range at t = " +
                           std::to_string(t));
    out.push_back({t, y});
  }
  return out;
}

}  // namespace graphflow
