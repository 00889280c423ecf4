// graphflow command line tool.
//
//   graphflow run --config run.cfg [--out DIR] [--threads K]
//   graphflow verify {examples|invariants|all} [--seed S] [--threads K]
//   graphflow example {hs1|hs2|hs3a|hs3b} [overrides] [--out FILE]
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 numerical failure (chart exit or blowup).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "graphflow/checkpoint.hpp"
#include "graphflow/config.hpp"
#include "graphflow/flow.hpp"
#include "graphflow/monitors.hpp"
#include "graphflow/oracles.hpp"
#include "graphflow/verify.hpp"

namespace gf = graphflow;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            int threads_override) {
  std::ifstream in(config_path);
  if (!in) throw gf::ConfigError("cannot open config file " + config_path);
  gf::RunConfig cfg = gf::parse_config(in);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (threads_override > 0) cfg.threads = threads_override;
  cfg.ctl.threads = gf::resolve_threads(cfg.threads);

  gf::FlowState state = gf::build_state(cfg);
  const double eps1 = gf::grid_min_s_eig(state);
  const double eps2 = std::isfinite(cfg.eps2) && cfg.eps2 > 0.0
                          ? cfg.eps2
                          : gf::default_eps2(eps1, state.grid.m);

  std::filesystem::create_directories(cfg.out_dir);
  const auto records =
      gf::run_with_monitors(state, cfg.ctl, cfg.monitor_every, eps2);

  {
    std::ofstream csv(cfg.out_dir + "/monitor.csv");
    gf::write_monitor_csv(csv, records);
  }
  {
    std::ofstream chk(cfg.out_dir + "/final.checkpoint");
    gf::write_checkpoint(chk, state);
  }
  {
    std::ofstream res(cfg.out_dir + "/resolved.cfg");
    gf::write_resolved_config(res, cfg);
  }

  // Advisory report; violations warn but do not gate the exit code.
  const double h = state.grid.min_spacing();
  const double slack = 10.0 * h * h + 1e-8;
  const gf::EstimateReport report =
      gf::check_flow_estimates(records, slack, state.model.n, eps2);
  for (const auto& v : report.violations)
    std::cerr << "warning: item (" << v.item << ") at t = " << v.t << ": "
              << v.detail << " (magnitude " << v.magnitude << ")\n";

  std::cout << "run finished at t = " << state.t << " after "
            << state.stats.steps << " steps; " << records.size()
            << " records; eps1 = " << eps1 << ", eps2 = " << eps2
            << "\noutputs: " << cfg.out_dir << "/monitor.csv, "
            << cfg.out_dir + "/final.checkpoint, " << cfg.out_dir
            << "/resolved.cfg\n";
  return 0;
}

int cmd_verify(const std::string& suite, unsigned long seed, int threads,
               bool inject_fault) {
  gf::VerifyContext ctx(seed, gf::resolve_threads(threads), inject_fault);
  const auto results = gf::run_suite(ctx, suite);
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %2d %-32s %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("%zu/%zu criteria passed\n",
              static_cast<size_t>(
                  std::count_if(results.begin(), results.end(),
                                [](const auto& r) { return r.pass; })),
              results.size());
  return all ? 0 : 1;
}

struct ExampleOverrides {
  std::optional<double> d0, r0, c1, c, x0, t_end;
  int points = 256;
  std::string mode;  // ode | pde | both; empty = per-example default
};

// Sampled comparison rows: t, numeric, exact, abs_err.
struct Row {
  double t, numeric, exact;
};

void write_rows(std::ostream& os, const std::string& tag,
                const std::vector<Row>& rows) {
  os << "# mode=" << tag << "\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", r.t, r.numeric,
                  r.exact, std::fabs(r.numeric - r.exact));
    os << buf;
  }
}

int cmd_example(const std::string& id, const ExampleOverrides& ov,
                const std::string& out_path, int threads) {
  gf::ExampleSpec ex{id, {}};
  if (id == "hs1") {
    if (ov.d0) ex.params["d0"] = *ov.d0;
  } else if (id == "hs2") {
    if (ov.c1)
      ex.params["c1"] = *ov.c1;
    else
      ex.params["r0"] = ov.r0.value_or(0.3);
  } else if (id == "hs3a" || id == "hs3b") {
    ex.params["c"] = ov.c.value_or(0.5);
    if (id == "hs3a") ex.params["x0"] = ov.x0.value_or(0.0);
  } else {
    throw gf::ConfigError("unknown example id '" + id +
                          "' (want hs1, hs2, hs3a or hs3b)");
  }

  std::string mode = ov.mode;
  if (mode.empty()) mode = (id == "hs1" || id == "hs2") ? "both" : "pde";
  if (mode != "ode" && mode != "pde" && mode != "both")
    throw gf::ConfigError("unknown mode '" + mode + "' (want ode, pde, both)");
  if ((id == "hs3a" || id == "hs3b") && mode != "pde")
    throw gf::ConfigError("example " + id + " has no ODE reduction");

  std::vector<Row> ode_rows, pde_rows;
  const double sample_every = 0.05;

  if (mode == "ode" || mode == "both") {
    const double t_end = ov.t_end.value_or(id == "hs1" ? 10.0 : 1.0);
    const double dt = 1e-3;
    double y0, t0_or_c1;
    std::function<double(double)> exact;
    if (id == "hs1") {
      y0 = ov.d0.value_or(1.0);
      t0_or_c1 = gf::hs1_t0_for(y0);
      exact = [t0_or_c1](double t) { return gf::hs1_d(t, t0_or_c1); };
    } else {
      y0 = ov.r0.value_or(0.3);
      t0_or_c1 = ov.c1 ? *ov.c1 : gf::hs2_c1_for(y0);
      exact = [t0_or_c1](double t) { return gf::hs2_r(t, t0_or_c1); };
    }
    const auto samples = gf::reduce_ode(ex, y0, 0.0, t_end, dt);
    const size_t stride =
        std::max<size_t>(1, static_cast<size_t>(std::llround(sample_every / dt)));
    for (size_t k = 0; k < samples.size(); k += stride)
      ode_rows.push_back({samples[k].t, samples[k].y, exact(samples[k].t)});
    if ((samples.size() - 1) % stride != 0)
      ode_rows.push_back(
          {samples.back().t, samples.back().y, exact(samples.back().t)});
  }

  std::string stationarity_report;
  if (mode == "pde" || mode == "both") {
    const double t_end =
        ov.t_end.value_or(1.0);  // pde window defaults to [0, 1]
    gf::Grid grid;
    grid.m = 1;
    grid.lo[0] = 0.0;
    grid.hi[0] = 2.0 * M_PI;
    grid.points[0] = ov.points;
    grid.periodic[0] = (id == "hs2");
    auto exact_map = gf::exact_map_oracle(ex);
    gf::BoundaryCondition bc;
    if (!grid.periodic[0]) bc = gf::dirichlet_from_example(ex);
    gf::FlowState s = gf::make_state(
        grid, gf::parse_model(gf::example_model(id)), bc,
        [&](const std::array<double, 2>& x) { return exact_map(x[0], 0.0); });

    const int mid = grid.points[0] / 2;
    const double x_mid = grid.coord(0, mid);
    auto probe = [&](const gf::FlowState& st) -> Row {
      const double* p = st.f.data() + static_cast<size_t>(mid) * st.n;
      if (id == "hs1") {
        const double t0 = gf::hs1_t0_for(ov.d0.value_or(1.0));
        return {st.t, p[1], gf::hs1_d(st.t, t0)};
      }
      if (id == "hs2") {
        double rad = 0.0;
        for (int i = 0; i < st.grid.count(); ++i) {
          const double* q = st.f.data() + static_cast<size_t>(i) * st.n;
          rad = std::max(rad, std::hypot(q[0], q[1]));
        }
        const double c1 = ov.c1 ? *ov.c1 : gf::hs2_c1_for(ov.r0.value_or(0.3));
        return {st.t, rad, gf::hs2_r(st.t, c1)};
      }
      const gf::Vec y0 = exact_map(x_mid, 0.0);
      const int comp = (id == "hs3a") ? 1 : 0;
      return {st.t, p[comp], y0[comp]};
    };

    // Stationary examples: record the velocity residual before stepping.
    double vsup = 0.0;
    if (id == "hs3a" || id == "hs3b") {
      for (int i = 0; i < grid.points[0]; ++i) {
        const gf::MapJet jet = gf::spatial_jet(s, i);
        const gf::MetricData md = gf::metric_at(s.model, jet.value);
        const gf::Vec v = gf::mcf_velocity(jet, md);
        double norm2 = 0.0;
        for (int a = 0; a < s.n; ++a)
          for (int b = 0; b < s.n; ++b) norm2 += md.g(a, b) * v[a] * v[b];
        vsup = std::max(vsup, std::sqrt(norm2));
      }
    }
    const std::vector<double> f0 = s.f;

    gf::StepControl ctl;
    ctl.t_end = t_end;
    ctl.threads = gf::resolve_threads(threads);
    gf::run(s, ctl, sample_every,
            [&](const gf::FlowState& st) { pde_rows.push_back(probe(st)); });

    if (id == "hs3a" || id == "hs3b") {
      double drift = 0.0;
      for (size_t i = 0; i < s.f.size(); ++i)
        drift = std::max(drift, std::fabs(s.f[i] - f0[i]));
      const double h = grid.spacing(0);
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "stationarity %s: sup|V| = %.3g at t = 0, sup drift = "
                    "%.3g over [0, %g] (10h^2 = %.3g)\n",
                    id.c_str(), vsup, drift, t_end, 10.0 * h * h);
      stationarity_report = buf;
    }
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw gf::ConfigError("cannot open output file " + out_path);
    os = &file;
  }
  *os << "t,numeric,exact,abs_err\n";
  if (!ode_rows.empty()) write_rows(*os, "ode", ode_rows);
  if (!pde_rows.empty()) write_rows(*os, "pde", pde_rows);
  if (!stationarity_report.empty()) std::cerr << stationarity_report;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graphical mean curvature flow into negatively curved targets"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  auto* run_cmd = app.add_subcommand("run", "run a flow from a config file");
  run_cmd->add_option("--config", config_path, "config file path")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides config)");
  run_cmd->add_option("--threads", threads, "worker threads (0 = auto)");

  std::string suite;
  unsigned long seed = 12345;
  int vthreads = 0;
  bool inject_fault = false;
  auto* verify_cmd =
      app.add_subcommand("verify", "run an acceptance suite");
  verify_cmd->add_option("suite", suite, "examples, invariants or all")
      ->required();
  verify_cmd->add_option("--seed", seed, "seed for randomized properties");
  verify_cmd->add_option("--threads", vthreads, "worker threads (0 = auto)");
  verify_cmd->add_flag("--inject-fault", inject_fault)->group("");  // hidden

  std::string example_id, example_out;
  ExampleOverrides ov;
  int ethreads = 0;
  auto* example_cmd = app.add_subcommand(
      "example", "reproduce a closed-form example, emit comparison CSV");
  example_cmd->add_option("id", example_id, "hs1, hs2, hs3a or hs3b")
      ->required();
  double d0 = 0, r0 = 0, c1 = 0, c = 0, x0 = 0, t_end = 0;
  auto* od0 = example_cmd->add_option("--d0", d0, "hs1 initial distance");
  auto* or0 = example_cmd->add_option("--r0", r0, "hs2 initial radius");
  auto* oc1 = example_cmd->add_option("--c1", c1, "hs2 profile constant");
  auto* oc = example_cmd->add_option("--c", c, "hs3 slope constant");
  auto* ox0 = example_cmd->add_option("--x0", x0, "hs3a base point");
  auto* ot = example_cmd->add_option("--t-end", t_end, "end time");
  example_cmd->add_option("--grid,--points", ov.points, "grid points");
  example_cmd->add_option("--mode", ov.mode, "ode, pde or both");
  example_cmd->add_option("--out", example_out, "CSV path (default stdout)");
  example_cmd->add_option("--threads", ethreads, "worker threads (0 = auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(config_path, out_dir, threads);
    if (verify_cmd->parsed())
      return cmd_verify(suite, seed, vthreads, inject_fault);
    if (example_cmd->parsed()) {
      if (od0->count()) ov.d0 = d0;
      if (or0->count()) ov.r0 = r0;
      if (oc1->count()) ov.c1 = c1;
      if (oc->count()) ov.c = c;
      if (ox0->count()) ov.x0 = x0;
      if (ot->count()) ov.t_end = t_end;
      return cmd_example(example_id, ov, example_out, ethreads);
    }
  } catch (const gf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gf::ChartExit& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const gf::NumericalBlowup& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const gf::ChartViolation& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const gf::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gf::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
