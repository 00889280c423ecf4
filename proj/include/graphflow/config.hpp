#pragma once

// Run configuration: flat key = value lines grouped into sections.
//
//   [model]     kind, chart_margin
//   [grid]      lo, hi, points, periodic (comma-separated per axis;
//               scalars broadcast; the axis count sets m)
//   [init]      oracle + numeric params, or expressions f1 .. fn
//   [boundary]  kind (periodic | dirichlet-oracle | linear-extrapolation),
//               oracle (defaults to the init oracle)
//   [stepping]  cfl, dt_max, t_end, integrator (euler | rk4)
//   [output]    dir, monitor_every
//   [run]       threads (0 = auto), seed, eps2 (auto or a number)
//
// '#' starts a comment.  Unknown sections or keys are errors.

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "graphflow/errors.hpp"
#include "graphflow/expr.hpp"
#include "graphflow/flow.hpp"
#include "graphflow/oracles.hpp"

namespace graphflow {

struct RunConfig {
  std::string model_kind = "euclidean:1";
  double chart_margin = 1e-6;

  Grid grid;

  std::string init_oracle;
  std::map<std::string, double> init_params;
  std::vector<std::string> init_exprs;  // f1 .. fn when no oracle

  std::string bc_kind = "periodic";
  std::string bc_oracle;

  StepControl ctl;

  std::string out_dir = "out";
  double monitor_every = 0.05;

  int threads = 0;
  unsigned long seed = 0;
  double eps2 = std::numeric_limits<double>::quiet_NaN();  // NaN = auto
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& v, int line) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line) +
                      ": bad number '" + v + "'");
  }
}

inline int parse_int(const std::string& v, int line) {
  try {
    size_t used = 0;
    const int d = std::stoi(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line) +
                      ": bad integer '" + v + "'");
  }
}

inline bool parse_bool(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config line " + std::to_string(line) + ": bad bool '" +
                    v + "'");
}

inline std::vector<std::string> split_commas(const std::string& v) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    size_t comma = v.find(',', start);
    out.push_back(trim(v.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string section;
  std::string raw;
  int line = 0;

  // Grid axis settings are collected first; the number of entries in
  // `points` determines m.
  std::vector<std::string> glo{"0"}, ghi{"1"}, gpoints{"64"}, gper{"true"};
  bool saw_points = false;

  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const size_t hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("config line " + std::to_string(line) +
                          ": unterminated section header");
      section = s.substr(1, s.size() - 2);
      if (section != "model" && section != "grid" && section != "init" &&
          section != "boundary" && section != "stepping" &&
          section != "output" && section != "run")
        throw ConfigError("config line " + std::to_string(line) +
                          ": unknown section [" + section + "]");
      continue;
    }
    const size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line) +
                        ": expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config line " + std::to_string(line) +
                        ": empty key or value");

    auto unknown = [&]() -> ConfigError {
      return ConfigError("config line " + std::to_string(line) +
                         ": unknown key '" + key + "' in section [" + section +
                         "]");
    };

    if (section == "model") {
      if (key == "kind") cfg.model_kind = val;
      else if (key == "chart_margin")
        cfg.chart_margin = detail::parse_double(val, line);
      else throw unknown();
    } else if (section == "grid") {
      if (key == "lo") glo = detail::split_commas(val);
      else if (key == "hi") ghi = detail::split_commas(val);
      else if (key == "points") {
        gpoints = detail::split_commas(val);
        saw_points = true;
      } else if (key == "periodic") gper = detail::split_commas(val);
      else throw unknown();
    } else if (section == "init") {
      if (key == "oracle") cfg.init_oracle = val;
      else if (key == "f1" || key == "f2" || key == "f3" || key == "f4") {
        const size_t comp = key[1] - '1';
        if (cfg.init_exprs.size() <= comp) cfg.init_exprs.resize(comp + 1);
        cfg.init_exprs[comp] = val;
      } else cfg.init_params[key] = detail::parse_double(val, line);
    } else if (section == "boundary") {
      if (key == "kind") cfg.bc_kind = val;
      else if (key == "oracle") cfg.bc_oracle = val;
      else throw unknown();
    } else if (section == "stepping") {
      if (key == "cfl") cfg.ctl.cfl = detail::parse_double(val, line);
      else if (key == "dt_max") cfg.ctl.dt_max = detail::parse_double(val, line);
      else if (key == "t_end") cfg.ctl.t_end = detail::parse_double(val, line);
      else if (key == "integrator") {
        if (val == "euler") cfg.ctl.integrator = Integrator::Euler;
        else if (val == "rk4") cfg.ctl.integrator = Integrator::RK4;
        else
          throw ConfigError("config line " + std::to_string(line) +
                            ": unknown integrator '" + val + "'");
      } else throw unknown();
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = val;
      else if (key == "monitor_every")
        cfg.monitor_every = detail::parse_double(val, line);
      else throw unknown();
    } else if (section == "run") {
      if (key == "threads") cfg.threads = detail::parse_int(val, line);
      else if (key == "seed")
        cfg.seed = static_cast<unsigned long>(detail::parse_double(val, line));
      else if (key == "eps2") {
        if (val == "auto")
          cfg.eps2 = std::numeric_limits<double>::quiet_NaN();
        else cfg.eps2 = detail::parse_double(val, line);
      } else throw unknown();
    } else {
      throw ConfigError("config line " + std::to_string(line) +
                        ": key outside any section");
    }
  }
  if (!saw_points)
    throw ConfigError("config is missing [grid] points");

  const int m = static_cast<int>(gpoints.size());
  if (m != 1 && m != 2)
    throw ConfigError("grid needs 1 or 2 comma-separated point counts");
  auto axis_val = [&](std::vector<std::string>& vs, int axis,
                      const char* what) -> std::string {
    if (static_cast<int>(vs.size()) == 1) return vs[0];
    if (static_cast<int>(vs.size()) != m)
      throw ConfigError(std::string("grid '") + what +
                        "' does not match the axis count");
    return vs[axis];
  };
  cfg.grid.m = m;
  for (int a = 0; a < m; ++a) {
    cfg.grid.lo[a] = detail::parse_double(axis_val(glo, a, "lo"), 0);
    cfg.grid.hi[a] = detail::parse_double(axis_val(ghi, a, "hi"), 0);
    cfg.grid.points[a] = detail::parse_int(axis_val(gpoints, a, "points"), 0);
    cfg.grid.periodic[a] = detail::parse_bool(axis_val(gper, a, "periodic"), 0);
  }
  cfg.ctl.chart_margin = cfg.chart_margin;
  return cfg;
}

inline RunConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

// Assemble a ready-to-run state.  Throws ConfigError on inconsistent
// settings and validates the initial data against the chart.
inline FlowState build_state(const RunConfig& cfg) {
  const ManifoldModel model = parse_model(cfg.model_kind);

  BoundaryCondition bc;
  if (cfg.bc_kind == "periodic") {
    bc.kind = BcKind::Periodic;
  } else if (cfg.bc_kind == "dirichlet-oracle") {
    ExampleSpec ex;
    ex.id = cfg.bc_oracle.empty() ? cfg.init_oracle : cfg.bc_oracle;
    if (ex.id.empty())
      throw ConfigError("dirichlet-oracle boundary needs an oracle id");
    ex.params = cfg.init_params;
    bc = dirichlet_from_example(ex);
  } else if (cfg.bc_kind == "linear-extrapolation") {
    bc.kind = BcKind::LinearExtrapolation;
  } else {
    throw ConfigError("unknown boundary kind '" + cfg.bc_kind + "'");
  }

  std::function<Vec(const std::array<double, 2>&)> init;
  if (!cfg.init_oracle.empty()) {
    if (cfg.grid.m != 1)
      throw ConfigError("init oracle '" + cfg.init_oracle +
                        "' provides 1d initial data only");
    ExampleSpec ex{cfg.init_oracle, cfg.init_params};
    auto fn = exact_map_oracle(ex);
    init = [fn](const std::array<double, 2>& x) { return fn(x[0], 0.0); };
  } else {
    if (static_cast<int>(cfg.init_exprs.size()) != model.n)
      throw ConfigError("init needs expressions f1 .. f" +
                        std::to_string(model.n));
    std::vector<Expr> comps;
    for (const auto& src : cfg.init_exprs) {
      if (src.empty())
        throw ConfigError("init expression list has a gap");
      comps.push_back(parse_expr(src));
    }
    const int n = model.n;
    init = [comps, n](const std::array<double, 2>& x) {
      Vec y(n);
      for (int a = 0; a < n; ++a) y[a] = comps[a](x[0], x[1]);
      return y;
    };
  }

  return make_state(cfg.grid, model, bc, init, cfg.chart_margin);
}

// Canonical echo of the configuration actually used for a run.
inline void write_resolved_config(std::ostream& os, const RunConfig& cfg) {
  char buf[64];
  auto num = [&](double v) {
    snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "[model]\nkind = " << cfg.model_kind
     << "\nchart_margin = " << num(cfg.chart_margin) << "\n\n[grid]\n";
  auto axis_list = [&](auto get) {
    std::string s;
    for (int a = 0; a < cfg.grid.m; ++a) {
      if (a) s += ",";
      s += get(a);
    }
    return s;
  };
  os << "lo = " << axis_list([&](int a) { return num(cfg.grid.lo[a]); })
     << "\nhi = " << axis_list([&](int a) { return num(cfg.grid.hi[a]); })
     << "\npoints = "
     << axis_list([&](int a) { return std::to_string(cfg.grid.points[a]); })
     << "\nperiodic = "
     << axis_list([&](int a) {
          return std::string(cfg.grid.periodic[a] ? "true" : "false");
        })
     << "\n\n[init]\n";
  if (!cfg.init_oracle.empty()) {
    os << "oracle = " << cfg.init_oracle << "\n";
    for (const auto& [k, v] : cfg.init_params)
      os << k << " = " << num(v) << "\n";
  } else {
    for (size_t i = 0; i < cfg.init_exprs.size(); ++i)
      os << "f" << (i + 1) << " = " << cfg.init_exprs[i] << "\n";
  }
  os << "\n[boundary]\nkind = " << cfg.bc_kind << "\n";
  if (!cfg.bc_oracle.empty()) os << "oracle = " << cfg.bc_oracle << "\n";
  os << "\n[stepping]\ncfl = " << num(cfg.ctl.cfl)
     << "\ndt_max = " << num(cfg.ctl.dt_max)
     << "\nt_end = " << num(cfg.ctl.t_end) << "\nintegrator = "
     << (cfg.ctl.integrator == Integrator::Euler ? "euler" : "rk4")
     << "\n\n[output]\ndir = " << cfg.out_dir
     << "\nmonitor_every = " << num(cfg.monitor_every) << "\n\n[run]\nthreads = "
     << cfg.threads << "\nseed = " << cfg.seed << "\neps2 = "
     << (std::isnan(cfg.eps2) ? std::string("auto") : num(cfg.eps2)) << "\n";
}

}  // namespace graphflow
