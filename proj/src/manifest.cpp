#include "pbeam/manifest.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pbeam/csv.hpp"
#include "pbeam/errors.hpp"
#include "pbeam/operators.hpp"
#include "pbeam/rhs.hpp"
#include "pbeam/version.hpp"

namespace pbeam {
namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& where, const std::string& val) {
  const std::string v = trim(val);
  if (v.empty()) throw ConfigError("key '" + where + "': empty value");
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size())
    throw ConfigError("key '" + where + "': not a number: '" + v + "'");
  return x;
}

int parse_int(const std::string& where, const std::string& val) {
  const std::string v = trim(val);
  if (v.empty()) throw ConfigError("key '" + where + "': empty value");
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size())
    throw ConfigError("key '" + where + "': not an integer: '" + v + "'");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& where, const std::string& val) {
  const std::string v = trim(val);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + where + "': not a boolean: '" + v + "'");
}

std::vector<double> parse_list(const std::string& where,
                               const std::string& val) {
  std::vector<double> out;
  const std::string v = trim(val);
  if (v.empty()) return out;
  size_t pos = 0;
  while (pos <= v.size()) {
    const size_t comma = v.find(',', pos);
    const std::string item =
        v.substr(pos, comma == std::string::npos ? std::string::npos
                                                 : comma - pos);
    out.push_back(parse_double(where, item));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::string join_list(const std::vector<double>& xs) {
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += fmt17(xs[i]);
  }
  return out;
}

// One switchboard for file keys and --set overrides alike. Returns false
// when the key is not known to `section` (caller builds the error).
bool apply_kv(RunManifest& m, const std::string& sec, const std::string& key,
              const std::string& val) {
  const std::string where = sec + "." + key;
  if (sec == "beam") {
    BeamConfig& b = m.beam;
    if (key == "ell") b.ell = parse_double(where, val);
    else if (key == "k") b.k = parse_double(where, val);
    else if (key == "mu") b.mu = parse_double(where, val);
    else if (key == "U") b.U = parse_double(where, val);
    else if (key == "lambda") b.lambda_flag = parse_int(where, val);
    else if (key == "b") b.b = parse_double(where, val);
    else if (key == "b0") b.b0 = parse_double(where, val);
    else if (key == "n_cells") b.n_cells = parse_int(where, val);
    else if (key == "pressure") b.pressure.value = parse_double(where, val);
    else if (key == "pressure_profile") b.pressure.profile = parse_list(where, val);
    else if (key == "init") b.init.preset = trim(val);
    else if (key == "init_amplitude") b.init.amplitude = parse_double(where, val);
    else if (key == "init_u0") b.init.u0 = parse_list(where, val);
    else if (key == "init_v0") b.init.v0 = parse_list(where, val);
    else return false;
    return true;
  }
  if (sec == "integrator") {
    IntegratorConfig& ic = m.integrator;
    if (key == "scheme") ic.scheme = scheme_from_string(trim(val));
    else if (key == "rtol") ic.rtol = parse_double(where, val);
    else if (key == "atol") ic.atol = parse_double(where, val);
    else if (key == "dt_init") ic.dt_init = parse_double(where, val);
    else if (key == "dt_min") ic.dt_min = parse_double(where, val);
    else if (key == "dt_max") ic.dt_max = parse_double(where, val);
    else if (key == "sample_dt") ic.sample_dt = parse_double(where, val);
    else if (key == "newton_tol") ic.newton_tol = parse_double(where, val);
    else if (key == "newton_max_iters") ic.newton_max_iters = parse_int(where, val);
    else if (key == "blowup_energy") ic.blowup_energy = parse_double(where, val);
    else return false;
    return true;
  }
  if (sec == "experiment") {
    ExperimentParams& e = m.experiment;
    if (key == "T") e.T = parse_double(where, val);
    else if (key == "u_lo") e.u_lo = parse_double(where, val);
    else if (key == "u_hi") e.u_hi = parse_double(where, val);
    else if (key == "tol_U") e.tol_U = parse_double(where, val);
    else if (key == "ucrit_horizon") e.ucrit_horizon = parse_double(where, val);
    else if (key == "probe_band") e.probe_band = parse_double(where, val);
    else if (key == "fit_window") e.fit_window = parse_double(where, val);
    else if (key == "continuation") e.continuation = parse_bool(where, val);
    else if (key == "ramp_step") e.ramp_step = parse_double(where, val);
    else if (key == "stab_T") e.stab_T = parse_double(where, val);
    else if (key == "cycle_T") e.cycle_T = parse_double(where, val);
    else if (key == "tail_fraction") e.tail_fraction = parse_double(where, val);
    else if (key == "cycle_rel_tol") e.cycle_rel_tol = parse_double(where, val);
    else if (key == "cycle_floor") e.cycle_floor = parse_double(where, val);
    else if (key == "dominance") e.dominance = parse_double(where, val);
    else if (key == "axis") e.axis = trim(val);
    else if (key == "values") e.values = parse_list(where, val);
    else if (key == "sweep_T") e.sweep_T = parse_double(where, val);
    else return false;
    return true;
  }
  if (sec == "meta") {
    if (key == "version") { m.version = trim(val); return true; }
    if (key == "checksum") return true; // informational; always recomputed
    return false;
  }
  return false;
}

void apply_override(RunManifest& m, const std::string& entry) {
  const size_t eq = entry.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + entry + "' is not of the form key=value");
  std::string key = trim(entry.substr(0, eq));
  const std::string val = trim(entry.substr(eq + 1));
  const size_t dot = key.find('.');
  if (dot != std::string::npos) {
    const std::string sec = key.substr(0, dot);
    const std::string k = key.substr(dot + 1);
    if (sec != "beam" && sec != "integrator" && sec != "experiment" &&
        sec != "meta")
      throw ConfigError("unknown section '" + sec + "' in override '" + entry + "'");
    if (!apply_kv(m, sec, k, val))
      throw ConfigError("unknown key '" + sec + "." + k + "'");
    return;
  }
  // bare key: must match exactly one section
  int hits = 0;
  std::string sec_hit;
  RunManifest probe = m; // dry-run target so a failed match has no effect
  for (const char* sec : {"beam", "integrator", "experiment"}) {
    if (apply_kv(probe, sec, key, val)) {
      ++hits;
      sec_hit = sec;
    }
  }
  if (hits == 0) throw ConfigError("unknown key '" + key + "'");
  if (hits > 1)
    throw ConfigError("ambiguous key '" + key + "': qualify as section." + key);
  apply_kv(m, sec_hit, key, val);
}

void validate_manifest(RunManifest& m) {
  Mesh mesh = build_mesh(m.beam.ell, m.beam.n_cells);
  validate(m.beam, mesh);
  const IntegratorConfig& ic = m.integrator;
  if (!(ic.rtol > 0.0)) throw ConfigError("integrator.rtol must be positive");
  if (!(ic.atol > 0.0)) throw ConfigError("integrator.atol must be positive");
  if (!(ic.sample_dt > 0.0))
    throw ConfigError("integrator.sample_dt must be positive");
  if (!(ic.dt_min > 0.0) || !(ic.dt_max >= ic.dt_min) || !(ic.dt_init > 0.0))
    throw ConfigError("integrator dt_min/dt_init/dt_max must be positive with dt_min <= dt_max");
  if (!(ic.newton_tol > 0.0))
    throw ConfigError("integrator.newton_tol must be positive");
  if (ic.newton_max_iters < 1)
    throw ConfigError("integrator.newton_max_iters must be at least 1");
  if (!(ic.blowup_energy > 0.0))
    throw ConfigError("integrator.blowup_energy must be positive");
  if (m.version.empty()) m.version = kVersion;
  m.checksum = manifest_checksum(m);
}

std::string emit_body(const RunManifest& m) {
  std::ostringstream os;
  const BeamConfig& b = m.beam;
  os << "[beam]\n";
  os << "ell = " << fmt17(b.ell) << '\n';
  os << "k = " << fmt17(b.k) << '\n';
  os << "mu = " << fmt17(b.mu) << '\n';
  os << "U = " << fmt17(b.U) << '\n';
  os << "lambda = " << b.lambda_flag << '\n';
  os << "b = " << fmt17(b.b) << '\n';
  os << "b0 = " << fmt17(b.b0) << '\n';
  os << "n_cells = " << b.n_cells << '\n';
  os << "pressure = " << fmt17(b.pressure.value) << '\n';
  os << "pressure_profile = " << join_list(b.pressure.profile) << '\n';
  os << "init = " << b.init.preset << '\n';
  os << "init_amplitude = " << fmt17(b.init.amplitude) << '\n';
  os << "init_u0 = " << join_list(b.init.u0) << '\n';
  os << "init_v0 = " << join_list(b.init.v0) << '\n';
  os << '\n';
  const IntegratorConfig& ic = m.integrator;
  os << "[integrator]\n";
  os << "scheme = " << to_string(ic.scheme) << '\n';
  os << "rtol = " << fmt17(ic.rtol) << '\n';
  os << "atol = " << fmt17(ic.atol) << '\n';
  os << "dt_init = " << fmt17(ic.dt_init) << '\n';
  os << "dt_min = " << fmt17(ic.dt_min) << '\n';
  os << "dt_max = " << fmt17(ic.dt_max) << '\n';
  os << "sample_dt = " << fmt17(ic.sample_dt) << '\n';
  os << "newton_tol = " << fmt17(ic.newton_tol) << '\n';
  os << "newton_max_iters = " << ic.newton_max_iters << '\n';
  os << "blowup_energy = " << fmt17(ic.blowup_energy) << '\n';
  os << '\n';
  const ExperimentParams& e = m.experiment;
  os << "[experiment]\n";
  os << "T = " << fmt17(e.T) << '\n';
  os << "u_lo = " << fmt17(e.u_lo) << '\n';
  os << "u_hi = " << fmt17(e.u_hi) << '\n';
  os << "tol_U = " << fmt17(e.tol_U) << '\n';
  os << "ucrit_horizon = " << fmt17(e.ucrit_horizon) << '\n';
  os << "probe_band = " << fmt17(e.probe_band) << '\n';
  os << "fit_window = " << fmt17(e.fit_window) << '\n';
  os << "continuation = " << (e.continuation ? "true" : "false") << '\n';
  os << "ramp_step = " << fmt17(e.ramp_step) << '\n';
  os << "stab_T = " << fmt17(e.stab_T) << '\n';
  os << "cycle_T = " << fmt17(e.cycle_T) << '\n';
  os << "tail_fraction = " << fmt17(e.tail_fraction) << '\n';
  os << "cycle_rel_tol = " << fmt17(e.cycle_rel_tol) << '\n';
  os << "cycle_floor = " << fmt17(e.cycle_floor) << '\n';
  os << "dominance = " << fmt17(e.dominance) << '\n';
  os << "axis = " << e.axis << '\n';
  os << "values = " << join_list(e.values) << '\n';
  os << "sweep_T = " << fmt17(e.sweep_T) << '\n';
  return os.str();
}

} // namespace

RunManifest default_manifest() {
  RunManifest m;
  m.version = kVersion;
  m.checksum = manifest_checksum(m);
  return m;
}

std::uint64_t manifest_checksum(const RunManifest& m) {
  const std::string body = emit_body(m);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : body) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RunManifest parse_config_text(const std::string& text,
                              const std::vector<std::string>& overrides) {
  RunManifest m;
  m.version = kVersion;
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) +
                          ": malformed section header: " + line);
      section = trim(line.substr(1, line.size() - 2));
      if (section != "beam" && section != "integrator" &&
          section != "experiment" && section != "meta")
        throw ConfigError("unknown section '" + section + "'");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value, got: " + line);
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) +
                        ": key outside any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!apply_kv(m, section, key, val))
      throw ConfigError("unknown key '" + section + "." + key + "'");
  }
  for (const std::string& o : overrides) apply_override(m, o);
  validate_manifest(m);
  return m;
}

RunManifest parse_config(const std::string& path,
                         const std::vector<std::string>& overrides) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), overrides);
}

std::string emit_config(const RunManifest& m) {
  std::ostringstream os;
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(manifest_checksum(m)));
  os << "[meta]\n";
  os << "version = " << (m.version.empty() ? kVersion : m.version) << '\n';
  os << "checksum = " << hex << '\n';
  os << '\n';
  os << emit_body(m);
  return os.str();
}

} // namespace pbeam
