#include "vvflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "vvflow/expression.hpp"

namespace vvflow {

const char* command_name(Command c) {
  switch (c) {
    case Command::Solve: return "solve";
    case Command::StokesNonstd: return "stokes-nonstd";
    case Command::Decompose: return "decompose";
    case Command::Study: return "study";
    case Command::Verify: return "verify";
  }
  return "?";
}

Command parse_command(const std::string& name) {
  if (name == "solve") return Command::Solve;
  if (name == "stokes-nonstd") return Command::StokesNonstd;
  if (name == "decompose") return Command::Decompose;
  if (name == "study") return Command::Study;
  if (name == "verify") return Command::Verify;
  throw ConfigError("unknown command '" + name +
                    "' (expected solve|stokes-nonstd|decompose|study|verify)");
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v, int line) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'", line);
  }
}

long parse_int(const std::string& key, const std::string& v, int line) {
  try {
    size_t used = 0;
    long d = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw ConfigError("key '" + key + "': not an integer: '" + v + "'", line);
  }
}

std::vector<long> parse_int_list(const std::string& key, const std::string& v, int line) {
  std::istringstream ss(v);
  std::vector<long> out;
  std::string tok;
  while (ss >> tok) out.push_back(parse_int(key, tok, line));
  if (out.empty()) throw ConfigError("key '" + key + "': empty value", line);
  return out;
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value,
                      int line) {
  if (key == "command") {
    cfg.command = parse_command(value);
  } else if (key == "mesh") {
    auto v = parse_int_list(key, value, line);
    if (v.size() != 3) throw ConfigError("key 'mesh': expected three counts", line);
    cfg.mesh_nx = static_cast<int>(v[0]);
    cfg.mesh_ny = static_cast<int>(v[1]);
    cfg.mesh_nz = static_cast<int>(v[2]);
  } else if (key == "extent") {
    std::istringstream ss(value);
    if (!(ss >> cfg.extent_x >> cfg.extent_y >> cfg.extent_z))
      throw ConfigError("key 'extent': expected three lengths", line);
  } else if (key == "nu") {
    cfg.nu = parse_double(key, value, line);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value, line);
  } else if (key == "forcing") {
    cfg.forcing = value;
  } else if (key == "fx") {
    cfg.fx = value;
  } else if (key == "fy") {
    cfg.fy = value;
  } else if (key == "fz") {
    cfg.fz = value;
  } else if (key == "a") {
    cfg.a_field = value;
  } else if (key == "tol") {
    cfg.tol = parse_double(key, value, line);
  } else if (key == "max_iter") {
    cfg.max_iter = static_cast<int>(parse_int(key, value, line));
  } else if (key == "theta") {
    cfg.theta = parse_double(key, value, line);
  } else if (key == "lambda_steps") {
    cfg.lambda_steps = static_cast<int>(parse_int(key, value, line));
  } else if (key == "quad_degree") {
    cfg.quad_degree = static_cast<int>(parse_int(key, value, line));
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_int(key, value, line));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(key, value, line));
  } else if (key == "study_meshes") {
    auto v = parse_int_list(key, value, line);
    cfg.study_ns.assign(v.begin(), v.end());
  } else {
    throw ConfigError("unknown key '" + key + "'", line);
  }
}

void validate_config(const RunConfig& cfg) {
  auto bad = [](const std::string& what) { throw ConfigError(what); };
  if (!(cfg.nu > 0)) bad("nu must be positive (got " + std::to_string(cfg.nu) + ")");
  if (cfg.alpha < 0) bad("alpha must be nonnegative");
  if (cfg.mesh_nx < 1 || cfg.mesh_ny < 1 || cfg.mesh_nz < 1) bad("mesh counts must be >= 1");
  if (!(cfg.extent_x > 0 && cfg.extent_y > 0 && cfg.extent_z > 0)) bad("extent must be positive");
  if (!(cfg.tol > 0)) bad("tol must be positive");
  if (cfg.max_iter < 1) bad("max_iter must be >= 1");
  if (!(cfg.theta > 0 && cfg.theta <= 1)) bad("theta must be in (0,1]");
  if (cfg.lambda_steps < 1) bad("lambda_steps must be >= 1");
  if (cfg.quad_degree != 4 && cfg.quad_degree != 6) bad("quad_degree must be 4 or 6");
  if (cfg.threads < 1) bad("threads must be >= 1");
  if (cfg.forcing != "zero" && cfg.forcing != "manufactured" && cfg.forcing != "expr")
    bad("forcing must be zero|manufactured|expr");
  if (cfg.a_field != "zero" && cfg.a_field != "manufactured")
    bad("a must be zero|manufactured");
  for (int n : cfg.study_ns)
    if (n < 1) bad("study_meshes entries must be >= 1");
  if (cfg.forcing == "expr") {
    // Parse now: expression errors must surface before solver allocation.
    parse_expression(cfg.fx);
    parse_expression(cfg.fy);
    parse_expression(cfg.fz);
  }
}

RunConfig parse_config(const std::optional<std::string>& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (path) {
    std::ifstream is(*path);
    if (!is) throw ConfigError("cannot open config file '" + *path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const size_t eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value", lineno);
      apply_config_key(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), lineno);
    }
  }
  for (const auto& [k, v] : overrides) apply_config_key(cfg, k, v);
  validate_config(cfg);
  return cfg;
}

std::string config_echo(const RunConfig& cfg) {
  std::ostringstream os;
  os << "command = " << command_name(cfg.command) << "\n";
  os << "mesh = " << cfg.mesh_nx << " " << cfg.mesh_ny << " " << cfg.mesh_nz << "\n";
  os << "extent = " << cfg.extent_x << " " << cfg.extent_y << " " << cfg.extent_z << "\n";
  os << "nu = " << cfg.nu << "\n";
  os << "alpha = " << cfg.alpha << "\n";
  os << "forcing = " << cfg.forcing << "\n";
  if (cfg.forcing == "expr")
    os << "fx = " << cfg.fx << "\nfy = " << cfg.fy << "\nfz = " << cfg.fz << "\n";
  os << "a = " << cfg.a_field << "\n";
  os << "tol = " << cfg.tol << "\n";
  os << "max_iter = " << cfg.max_iter << "\n";
  os << "theta = " << cfg.theta << "\n";
  os << "lambda_steps = " << cfg.lambda_steps << "\n";
  os << "quad_degree = " << cfg.quad_degree << "\n";
  os << "threads = " << cfg.threads << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "out = " << cfg.out_dir << "\n";
  {
    os << "study_meshes =";
    for (int n : cfg.study_ns) os << " " << n;
    os << "\n";
  }
  return os.str();
}

}  // namespace vvflow
