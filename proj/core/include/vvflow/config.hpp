// Run configuration: flat key = value files plus flag overrides.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vvflow/errors.hpp"

namespace vvflow {

enum class Command { Solve, StokesNonstd, Decompose, Study, Verify };

const char* command_name(Command c);
Command parse_command(const std::string& name);

struct RunConfig {
  Command command = Command::Solve;

  int mesh_nx = 4, mesh_ny = 4, mesh_nz = 4;
  double extent_x = 1, extent_y = 1, extent_z = 1;

  double nu = 0.1;
  double alpha = 1.0;

  // zero | manufactured | expr (then fx/fy/fz hold the component grammar).
  std::string forcing = "manufactured";
  std::string fx = "0", fy = "0", fz = "0";

  // nonstandard-Stokes coefficient field: zero | manufactured.
  std::string a_field = "zero";

  double tol = 1e-9;
  int max_iter = 100;
  double theta = 1.0;
  int lambda_steps = 1;
  int quad_degree = 4;

  std::string out_dir = "out";
  int threads = 1;
  std::uint64_t seed = 12345;

  // study meshes
  std::vector<int> study_ns{2, 4, 8};
};

// Parses the flat key = value format ('#' comments, one key per line), then
// applies flag overrides. Unknown keys raise ConfigError listing them;
// domain violations name the offending key. Expression forcing is parsed
// here, before any solver state is allocated.
RunConfig parse_config(const std::optional<std::string>& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

// Applies one key/value pair; shared by the file parser and flag layer.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value,
                      int line = -1);

// Post-parse validation (nu > 0, mesh counts, expressions parse, ...).
void validate_config(const RunConfig& cfg);

std::string config_echo(const RunConfig& cfg);

}  // namespace vvflow
