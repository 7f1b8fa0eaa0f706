#include "gibbsdim/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gibbsdim/errors.hpp"

namespace gibbsdim {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const auto out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError, where + ": expected an integer, got '" + v + "'");
  }
}

double parse_f64(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError, where + ": expected a number, got '" + v + "'");
  }
}

std::vector<std::uint64_t> parse_checkpoints(const std::string& v,
                                             const std::string& where) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_u64(item, where));
  }
  if (out.empty()) fail(ErrorCode::ParseError, where + ": empty checkpoint list");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::effective_checkpoints() const {
  std::vector<std::uint64_t> cps;
  if (!checkpoints.empty()) {
    for (const auto c : checkpoints)
      if (c >= 1 && c <= length) cps.push_back(c);
  } else {
    for (std::uint64_t c = 100; c < length; c *= 10) cps.push_back(c);
  }
  if (cps.empty() || cps.back() != length) cps.push_back(length);
  return cps;
}

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
  const std::string where = "key '" + key + "'";
  if (key == "partition") cfg.partition = value;
  else if (key == "measure") cfg.measure = value;
  else if (key == "model") {
    if (value != "pl" && value != "gauss")
      fail(ErrorCode::ParseError, where + ": expected pl or gauss");
    cfg.model = value;
  }
  else if (key == "orbits") cfg.orbits = parse_u64(value, where);
  else if (key == "length") cfg.length = parse_u64(value, where);
  else if (key == "seed") cfg.seed = parse_u64(value, where);
  else if (key == "checkpoints") cfg.checkpoints = parse_checkpoints(value, where);
  else if (key == "alpha") cfg.alpha = parse_f64(value, where);
  else if (key == "delta") cfg.delta = parse_f64(value, where);
  else if (key == "eta") cfg.eta = parse_f64(value, where);
  else if (key == "kmin") cfg.kmin = parse_u64(value, where);
  else if (key == "kmax") cfg.kmax = parse_u64(value, where);
  else if (key == "nmax") cfg.nmax = parse_u64(value, where);
  else if (key == "k0") cfg.k0 = parse_u64(value, where);
  else if (key == "lstar") cfg.lstar = parse_f64(value, where);
  else if (key == "position") cfg.position = parse_u64(value, where);
  else if (key == "depth_cap") cfg.depth_cap = static_cast<int>(parse_u64(value, where));
  else if (key == "burn_in") cfg.burn_in = parse_u64(value, where);
  else if (key == "output") cfg.output = value;
  else if (key == "threads") cfg.threads = static_cast<unsigned>(parse_u64(value, where));
  else fail(ErrorCode::ParseError, "unknown config key '" + key + "'");
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::ParseError,
           path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    try {
      apply_override(cfg, key, value);
    } catch (const Error& e) {
      fail(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void apply_env(ExperimentConfig& cfg) {
  if (const char* s = std::getenv("GIBBSDIM_SEED"))
    cfg.seed = parse_u64(s, "GIBBSDIM_SEED");
  if (const char* t = std::getenv("GIBBSDIM_THREADS"))
    cfg.threads = static_cast<unsigned>(parse_u64(t, "GIBBSDIM_THREADS"));
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "partition=" << cfg.partition << " measure=" << cfg.measure
     << " model=" << cfg.model << " orbits=" << cfg.orbits
     << " length=" << cfg.length << " seed=" << cfg.seed << " checkpoints=";
  const auto cps = cfg.effective_checkpoints();
  for (std::size_t i = 0; i < cps.size(); ++i)
    os << (i ? "," : "") << cps[i];
  return os.str();
}

}  // namespace gibbsdim
