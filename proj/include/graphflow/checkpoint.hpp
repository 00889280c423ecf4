#pragma once

// Versioned text checkpoints.  Field values are written with %.17g so
// a write/read round trip reproduces the state bit for bit.  Dirichlet
// oracles are stored by registry id plus parameters and rebuilt on
// load; runtime statistics are not part of the format.

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "graphflow/errors.hpp"
#include "graphflow/flow.hpp"

namespace graphflow {

inline constexpr const char* kCheckpointHeader = "GRAPHFLOW v1";

inline void write_checkpoint(std::ostream& os, const FlowState& s) {
  char buf[64];
  auto num = [&](double v) {
    snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << kCheckpointHeader << "\n";
  os << "model " << model_to_string(s.model) << "\n";
  os << "t " << num(s.t) << "\n";
  os << "m " << s.grid.m << "\n";
  os << "n " << s.n << "\n";
  for (int a = 0; a < s.grid.m; ++a)
    os << "axis " << a << " " << num(s.grid.lo[a]) << " " << num(s.grid.hi[a])
       << " " << s.grid.points[a] << " " << (s.grid.periodic[a] ? 1 : 0)
       << "\n";
  switch (s.bc.kind) {
    case BcKind::Periodic:
      os << "bc periodic\n";
      break;
    case BcKind::DirichletOracle:
      os << "bc dirichlet-oracle " << s.bc.oracle_id << "\n";
      for (const auto& [k, v] : s.bc.oracle_params)
        os << "bcparam " << k << " " << num(v) << "\n";
      break;
    case BcKind::LinearExtrapolation:
      os << "bc linear-extrapolation\n";
      break;
  }
  os << "data\n";
  const int count = s.grid.count();
  for (int idx = 0; idx < count; ++idx) {
    for (int a = 0; a < s.n; ++a) {
      if (a) os << " ";
      os << num(s.f[static_cast<size_t>(idx) * s.n + a]);
    }
    os << "\n";
  }
  os << "end\n";
}

inline FlowState read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointHeader)
    throw ConfigError("checkpoint: missing '" + std::string(kCheckpointHeader) +
                      "' header");
  FlowState s;
  std::string model_str, bc_kind, bc_oracle;
  std::map<std::string, double> bc_params;
  int n = -1;
  bool have_data = false;

  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "model") {
      ls >> model_str;
    } else if (key == "t") {
      ls >> s.t;
    } else if (key == "m") {
      ls >> s.grid.m;
    } else if (key == "n") {
      ls >> n;
    } else if (key == "axis") {
      int a, per;
      ls >> a;
      if (a < 0 || a > 1) throw ConfigError("checkpoint: bad axis index");
      ls >> s.grid.lo[a] >> s.grid.hi[a] >> s.grid.points[a] >> per;
      s.grid.periodic[a] = per != 0;
    } else if (key == "bc") {
      ls >> bc_kind;
      if (bc_kind == "dirichlet-oracle") ls >> bc_oracle;
    } else if (key == "bcparam") {
      std::string k;
      double v;
      ls >> k >> v;
      bc_params[k] = v;
    } else if (key == "data") {
      have_data = true;
      break;
    } else {
      throw ConfigError("checkpoint: unknown field '" + key + "'");
    }
    if (ls.fail())
      throw ConfigError("checkpoint: malformed line '" + line + "'");
  }
  if (model_str.empty() || n < 0 || !have_data)
    throw ConfigError("checkpoint: incomplete header");

  s.model = parse_model(model_str);
  if (s.model.n != n)
    throw ConfigError("checkpoint: field dimension does not match model");
  s.n = n;
  s.grid.validate();

  if (bc_kind == "periodic") {
    s.bc.kind = BcKind::Periodic;
  } else if (bc_kind == "linear-extrapolation") {
    s.bc.kind = BcKind::LinearExtrapolation;
  } else if (bc_kind == "dirichlet-oracle") {
    s.bc = dirichlet_from_example(ExampleSpec{bc_oracle, bc_params});
  } else {
    throw ConfigError("checkpoint: unknown boundary kind '" + bc_kind + "'");
  }

  const int count = s.grid.count();
  s.f.resize(static_cast<size_t>(count) * n);
  for (int idx = 0; idx < count; ++idx) {
    if (!std::getline(in, line))
      throw ConfigError("checkpoint: truncated data block");
    std::istringstream ls(line);
    for (int a = 0; a < n; ++a)
      if (!(ls >> s.f[static_cast<size_t>(idx) * n + a]))
        throw ConfigError("checkpoint: bad data row " + std::to_string(idx));
  }
  if (!std::getline(in, line) || line != "end")
    throw ConfigError("checkpoint: missing end marker");
  return s;
}

}  // namespace graphflow
