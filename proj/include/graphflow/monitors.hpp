#pragma once

// Runtime monitors.  Each record is a grid sweep of the pointwise
// graph geometry; check_flow_estimates inspects a record series for the
// qualitative behavior every strictly length-decreasing run must show:
//   (i)   the smallest s-eigenvalue never drops below its start
//   (ii)  tr s is nondecreasing and respects the comparison bound
//   (iii) |H|^2 stays bounded
//   (iv)  t^{k-1} sup |D^{k-1} df|^2 stops growing after the transient
// All checks carry an explicit slack for discretization error.

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "graphflow/flow.hpp"
#include "graphflow/graphgeom.hpp"

namespace graphflow {

struct MonitorRecord {
  double t = 0.0;
  double min_s_eig = 0.0;
  double tr_s_min = 0.0;
  double tr_s_bound = std::numeric_limits<double>::quiet_NaN();
  double H_norm2_max = 0.0;
  double u_min = 0.0;
  double decay_k2 = 0.0;
  double decay_k3 = 0.0;
  double s_perp_theta_max = 0.0;
  double chart_clearance_min = 0.0;
};

// Comparison bound for the trace of s along the flow:
//   bound(t) = (C1 (m-1) e^{sigma t/2} - m) / (C1 e^{sigma t/2} - 1),
//   C1 = 1 + 1/((m-1) - inf_tr0).
// Equals inf_tr0 at t = 0 and increases strictly to m - 1.  Evaluated
// in the equivalent form (m-1) - 1/(C1 e^{sigma t/2} - 1), which never
// lands above m - 1 in floating point as the exponential saturates.
inline double trace_bound(double t, int m, double inf_tr0, double sigma) {
  if (m <= 1) throw DomainError("trace_bound needs m > 1");
  if (!(inf_tr0 < m - 1))
    throw DomainError("trace_bound needs inf_tr0 < m - 1");
  if (!(sigma > 0.0)) throw DomainError("trace_bound needs sigma > 0");
  if (!(t >= 0.0)) throw DomainError("trace_bound needs t >= 0");
  const double c1 = 1.0 + 1.0 / ((m - 1) - inf_tr0);
  const double e = std::exp(0.5 * sigma * t);
  return (m - 1) - 1.0 / (c1 * e - 1.0);
}

// eps2 used in the pinching quantity, from the initial pinching eps1.
inline double default_eps2(double eps1, int m) {
  return std::min(2.0 * eps1 / m, eps1 * eps1 / m);
}

namespace detail {

// Centered difference of a per-point field component along a grid
// axis, one-sided at bounded-axis edges.
inline double grid_fd(const Grid& g, const std::vector<double>& field,
                      int comps, int i, int j, int axis, int comp) {
  const int np = g.points[axis];
  const double h = g.spacing(axis);
  auto at = [&](int ii, int jj) {
    return field[static_cast<size_t>(g.index(ii, jj)) * comps + comp];
  };
  int c0 = axis == 0 ? i : j;
  int up = c0 + 1, dn = c0 - 1;
  if (g.periodic[axis]) {
    up = (up % np + np) % np;
    dn = (dn % np + np) % np;
    const int iu = axis == 0 ? up : i, ju = axis == 0 ? j : up;
    const int id = axis == 0 ? dn : i, jd = axis == 0 ? j : dn;
    return (at(iu, ju) - at(id, jd)) / (2.0 * h);
  }
  if (up >= np) {
    const int ia = axis == 0 ? np - 1 : i, ja = axis == 0 ? j : np - 1;
    const int ib = axis == 0 ? np - 2 : i, jb = axis == 0 ? j : np - 2;
    return (at(ia, ja) - at(ib, jb)) / h;
  }
  if (dn < 0) {
    const int ia = axis == 0 ? 1 : i, ja = axis == 0 ? j : 1;
    const int ib = axis == 0 ? 0 : i, jb = axis == 0 ? j : 0;
    return (at(ia, ja) - at(ib, jb)) / h;
  }
  const int iu = axis == 0 ? up : i, ju = axis == 0 ? j : up;
  const int id = axis == 0 ? dn : i, jd = axis == 0 ? j : dn;
  return (at(iu, ju) - at(id, jd)) / (2.0 * h);
}

// Christoffels of the induced metric at a grid point from finite
// differences of the stored metric field.
inline Ten3 induced_christoffel(const FlowState& s,
                                const std::vector<double>& gfield, int i,
                                int j) {
  const int m = s.grid.m;
  const int idx = s.grid.index(i, j);
  Mat g(m, m), gi;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      g(a, b) = gfield[static_cast<size_t>(idx) * m * m + a * m + b];
  if (!invert(g, gi)) throw SingularMetric("induced metric field degenerate");
  Ten3 dg(m, m, m);  // dg(k,i,j) = d_k g_ij
  for (int k = 0; k < m; ++k)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        dg(k, a, b) = grid_fd(s.grid, gfield, m * m, i, j, k, a * m + b);
  Ten3 gam(m, m, m);
  for (int l = 0; l < m; ++l)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double v = 0.0;
        for (int k = 0; k < m; ++k)
          v += 0.5 * gi(l, k) * (dg(a, b, k) + dg(b, a, k) - dg(k, a, b));
        gam(l, a, b) = v;
      }
  return gam;
}

}  // namespace detail

// sup over the grid of |D^{k-1} df|^2 for k = 2 or 3, with the domain
// indices measured in the induced metric and the target index in g_N.
// The first covariant derivative is algebraic in the jet,
//   (D df)^a_ij = d2^a_ij + Gamma^a_{bc} d1^b_i d1^c_j
//                 - Gamma^l_{ij}(g) d1^a_l,
// with Gamma(g) from finite differences of the induced metric field;
// k = 3 applies one more finite-difference covariant derivative.
inline double covariant_derivative_sup(const FlowState& s, int k) {
  if (k != 2 && k != 3)
    throw DomainError("covariant_derivative_sup supports k = 2 or 3");
  const int m = s.grid.m, n = s.n, count = s.grid.count();

  std::vector<double> gfield(static_cast<size_t>(count) * m * m);
  for (int idx = 0; idx < count; ++idx) {
    const auto [i, j] = detail::unflatten(s.grid, idx);
    const MapJet jet = spatial_jet(s, s.f, i, j, s.t);
    const InducedMetric im = induced_metric(jet, s.model);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        gfield[static_cast<size_t>(idx) * m * m + a * m + b] = im.g(a, b);
  }

  std::vector<double> tfield(static_cast<size_t>(count) * n * m * m);
  double sup2 = 0.0;
  for (int idx = 0; idx < count; ++idx) {
    const auto [i, j] = detail::unflatten(s.grid, idx);
    const MapJet jet = spatial_jet(s, s.f, i, j, s.t);
    const MetricData md = metric_at(s.model, jet.value);
    const InducedMetric im = induced_metric(jet, md);
    const Ten3 gam_g = detail::induced_christoffel(s, gfield, i, j);
    Ten3 T(n, m, m);
    for (int a = 0; a < n; ++a)
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
          double v = jet.d2(a, p, q);
          for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
              v += md.gamma(a, b, c) * jet.d1(b, p) * jet.d1(c, q);
          for (int l = 0; l < m; ++l) v -= gam_g(l, p, q) * jet.d1(a, l);
          T(a, p, q) = v;
          tfield[((static_cast<size_t>(idx) * n + a) * m + p) * m + q] = v;
        }
    double norm2 = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int p = 0; p < m; ++p)
          for (int q = 0; q < m; ++q)
            for (int r = 0; r < m; ++r)
              for (int w = 0; w < m; ++w)
                norm2 += md.g(a, b) * im.g_inv(p, r) * im.g_inv(q, w) *
                         T(a, p, q) * T(b, r, w);
    sup2 = std::max(sup2, norm2);
  }
  if (k == 2) return sup2;

  double sup3 = 0.0;
  for (int idx = 0; idx < count; ++idx) {
    const auto [i, j] = detail::unflatten(s.grid, idx);
    const MapJet jet = spatial_jet(s, s.f, i, j, s.t);
    const MetricData md = metric_at(s.model, jet.value);
    const InducedMetric im = induced_metric(jet, md);
    const Ten3 gam_g = detail::induced_christoffel(s, gfield, i, j);
    auto tval = [&](int a, int p, int q) {
      return tfield[((static_cast<size_t>(idx) * n + a) * m + p) * m + q];
    };
    // S^a_{kpq} = d_k T^a_pq + Gamma^a_{bc} d1^b_k T^c_pq
    //             - Gamma^l_{kp} T^a_lq - Gamma^l_{kq} T^a_pl
    Ten3 S[2];
    for (int kk = 0; kk < m; ++kk) {
      S[kk] = Ten3(n, m, m);
      for (int a = 0; a < n; ++a)
        for (int p = 0; p < m; ++p)
          for (int q = 0; q < m; ++q) {
            double v = detail::grid_fd(s.grid, tfield, n * m * m, i, j, kk,
                                       (a * m + p) * m + q);
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c)
                v += md.gamma(a, b, c) * jet.d1(b, kk) * tval(c, p, q);
            for (int l = 0; l < m; ++l)
              v -= gam_g(l, kk, p) * tval(a, l, q) +
                   gam_g(l, kk, q) * tval(a, p, l);
            S[kk](a, p, q) = v;
          }
    }
    double norm2 = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int k1 = 0; k1 < m; ++k1)
          for (int k2 = 0; k2 < m; ++k2)
            for (int p = 0; p < m; ++p)
              for (int r = 0; r < m; ++r)
                for (int q = 0; q < m; ++q)
                  for (int w = 0; w < m; ++w)
                    norm2 += md.g(a, b) * im.g_inv(k1, k2) * im.g_inv(p, r) *
                             im.g_inv(q, w) * S[k1](a, p, q) * S[k2](b, r, w);
    sup3 = std::max(sup3, norm2);
  }
  return sup3;
}

// Grid minimum of the smallest s-eigenvalue (pinching at time t).
inline double grid_min_s_eig(const FlowState& s) {
  double mn = 1.0;
  for (int idx = 0; idx < s.grid.count(); ++idx) {
    const auto [i, j] = detail::unflatten(s.grid, idx);
    const MapJet jet = spatial_jet(s, s.f, i, j, s.t);
    mn = std::min(mn, min_s_eigenvalue(singular_values(jet, s.model)));
  }
  return mn;
}

// One grid sweep.  tr_s_bound is left NaN; apply_trace_bound fills it
// once the t = 0 record fixes the comparison constant.
inline MonitorRecord record(const FlowState& s, double eps2, int threads = 1) {
  const int count = s.grid.count();
  struct PointVals {
    double min_s, tr_s, h2, u, theta, clear;
  };
  std::vector<PointVals> vals(count);
  parallel_for(0, count, threads, [&](int idx) {
    const auto [i, j] = detail::unflatten(s.grid, idx);
    const MapJet jet = spatial_jet(s, s.f, i, j, s.t);
    const MetricData md = metric_at(s.model, jet.value);
    const Vec l2 = singular_values(jet, md);
    PointVals& p = vals[idx];
    p.min_s = min_s_eigenvalue(l2);
    p.tr_s = trace_s(l2);
    p.h2 = mean_curvature_norm2(jet, md);
    p.u = projection_jacobian(l2);
    p.theta = s_perp_theta_max(jet, md, eps2);
    p.clear = chart_clearance(s.model, jet.value);
  });
  MonitorRecord r;
  r.t = s.t;
  r.min_s_eig = 1.0;
  r.tr_s_min = std::numeric_limits<double>::infinity();
  r.u_min = 1.0;
  r.s_perp_theta_max = -std::numeric_limits<double>::infinity();
  r.chart_clearance_min = kClearanceCap;
  for (const auto& p : vals) {
    r.min_s_eig = std::min(r.min_s_eig, p.min_s);
    r.tr_s_min = std::min(r.tr_s_min, p.tr_s);
    r.H_norm2_max = std::max(r.H_norm2_max, p.h2);
    r.u_min = std::min(r.u_min, p.u);
    r.s_perp_theta_max = std::max(r.s_perp_theta_max, p.theta);
    r.chart_clearance_min = std::min(r.chart_clearance_min, p.clear);
  }
  r.decay_k2 = s.t * covariant_derivative_sup(s, 2);
  const double t2 = s.t * s.t;
  r.decay_k3 = t2 * covariant_derivative_sup(s, 3);
  return r;
}

// Fill tr_s_bound from the first record when the bound applies
// (m > 1, measured inf tr s below m - 1, sigma > 0); NaN otherwise.
inline void apply_trace_bound(std::vector<MonitorRecord>& records, int m,
                              double sigma) {
  if (records.empty()) return;
  const double t0 = records.front().t;
  const double inf_tr0 = records.front().tr_s_min;
  const bool applies = m > 1 && inf_tr0 < m - 1 && sigma > 0.0;
  for (auto& r : records)
    r.tr_s_bound = applies
                       ? trace_bound(r.t - t0, m, inf_tr0, sigma)
                       : std::numeric_limits<double>::quiet_NaN();
}

// Run the flow and collect records every monitor_every time units.
// eps2 defaults from the measured initial pinching.
inline std::vector<MonitorRecord> run_with_monitors(
    FlowState& s, const StepControl& ctl, double monitor_every,
    double eps2 = std::numeric_limits<double>::quiet_NaN()) {
  if (std::isnan(eps2)) eps2 = default_eps2(grid_min_s_eig(s), s.grid.m);
  std::vector<MonitorRecord> records;
  run(s, ctl, monitor_every, [&](const FlowState& st) {
    records.push_back(record(st, eps2, ctl.threads));
  });
  apply_trace_bound(records, s.grid.m, sectional_bound(s.model));
  return records;
}

struct EstimateViolation {
  int item = 0;  // 1..4
  double t = 0.0;
  double magnitude = 0.0;
  std::string detail;
};

struct EstimateReport {
  bool graph_preserved = true;    // (i)
  bool trace_ok = true;           // (ii)
  bool curvature_bounded = true;  // (iii)
  bool decay_ok = true;           // (iv)
  std::vector<EstimateViolation> violations;
  bool all_passed() const {
    return graph_preserved && trace_ok && curvature_bounded && decay_ok;
  }
};

// Inspect a record series.  n and eps2, when given, sharpen the
// curvature cap in item (iii) to max(initial, n/eps2).
inline EstimateReport check_flow_estimates(
    const std::vector<MonitorRecord>& records, double slack, int n = 0,
    double eps2 = std::numeric_limits<double>::quiet_NaN()) {
  EstimateReport rep;
  if (records.empty()) return rep;
  const double eps1_0 = records.front().min_s_eig;
  double h2_cap = records.front().H_norm2_max;
  if (n > 0 && eps2 > 0.0) h2_cap = std::max(h2_cap, n / eps2);

  for (size_t k = 0; k < records.size(); ++k) {
    const MonitorRecord& r = records[k];
    if (!std::isfinite(r.min_s_eig) || r.min_s_eig < eps1_0 - slack) {
      rep.graph_preserved = false;
      rep.violations.push_back({1, r.t, eps1_0 - r.min_s_eig,
                                "min s-eigenvalue fell below its start"});
    }
    if (k > 0) {
      const double prev = records[k - 1].tr_s_min;
      if (!std::isfinite(r.tr_s_min) || r.tr_s_min < prev - slack) {
        rep.trace_ok = false;
        rep.violations.push_back(
            {2, r.t, prev - r.tr_s_min, "tr s decreased"});
      }
    }
    if (std::isfinite(r.tr_s_bound) && r.tr_s_min < r.tr_s_bound - slack) {
      rep.trace_ok = false;
      rep.violations.push_back({2, r.t, r.tr_s_bound - r.tr_s_min,
                                "tr s fell below the comparison bound"});
    }
    if (!std::isfinite(r.H_norm2_max) || r.H_norm2_max > h2_cap + slack) {
      rep.curvature_bounded = false;
      rep.violations.push_back(
          {3, r.t, r.H_norm2_max - h2_cap, "|H|^2 exceeded its cap"});
    }
    if (!std::isfinite(r.decay_k2) || !std::isfinite(r.decay_k3)) {
      rep.decay_ok = false;
      rep.violations.push_back({4, r.t, 0.0, "non-finite decay product"});
    }
  }

  // After the transient the decay products must not trend upward.  The
  // t^2-weighted product tops out flat near t = 1 (t^2 e^{-2t} peaks at
  // t = 1), so count only clear per-step growth (> 2%) and allow at
  // most 5% such steps past t = 1.
  int late_pairs = 0, inc2 = 0, inc3 = 0;
  for (size_t k = 1; k < records.size(); ++k) {
    if (records[k - 1].t < 1.0) continue;
    ++late_pairs;
    auto grew = [](double prev, double cur) {
      return cur > prev * 1.02 + 1e-12;
    };
    if (grew(records[k - 1].decay_k2, records[k].decay_k2)) ++inc2;
    if (grew(records[k - 1].decay_k3, records[k].decay_k3)) ++inc3;
  }
  if (late_pairs > 0) {
    const double frac = std::max(inc2, inc3) / static_cast<double>(late_pairs);
    if (frac > 0.05) {
      rep.decay_ok = false;
      rep.violations.push_back(
          {4, records.back().t, frac, "decay products kept growing after t=1"});
    }
  }
  return rep;
}

// CSV schema: header row, one record per line, empty field when the
// trace bound does not apply.
inline void write_monitor_csv(std::ostream& os,
                              const std::vector<MonitorRecord>& records) {
  os << "t,min_s_eig,tr_s_min,tr_s_bound,H_norm2_max,u_min,decay_k2,"
        "decay_k3,s_perp_theta_max,chart_clearance_min\n";
  char buf[64];
  auto put = [&](double v, bool comma = true) {
    if (std::isnan(v)) {
      if (comma) os << ',';
      return;
    }
    snprintf(buf, sizeof buf, "%.12g", v);
    os << buf;
    if (comma) os << ',';
  };
  for (const auto& r : records) {
    put(r.t);
    put(r.min_s_eig);
    put(r.tr_s_min);
    put(r.tr_s_bound);
    put(r.H_norm2_max);
    put(r.u_min);
    put(r.decay_k2);
    put(r.decay_k3);
    put(r.s_perp_theta_max);
    put(r.chart_clearance_min, false);
    os << '\n';
  }
}

}  // namespace graphflow
