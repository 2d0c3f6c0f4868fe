#include "config.hpp"

#include "crystal_heat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cli {

using crystal_heat::validation_error;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw validation_error("'" + key + "' expects a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x)) {
    throw validation_error("'" + key + "' expects a finite number, got '" + v + "'");
  }
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw validation_error("'" + key + "' expects an integer, got '" + v + "'");
  }
  if (pos != v.size() || x < -2147483647L || x > 2147483647L) {
    throw validation_error("'" + key + "' expects an integer, got '" + v + "'");
  }
  return static_cast<int>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw validation_error("'" + key + "' expects true or false, got '" + v + "'");
}

void check_value(const KeySpec& s, const std::string& v) {
  switch (s.kind) {
    case Kind::real:
      parse_real(s.key, v);
      break;
    case Kind::integer:
      parse_int(s.key, v);
      break;
    case Kind::boolean:
      parse_bool(s.key, v);
      break;
    case Kind::int_list:
      if (v.empty()) throw validation_error("'" + s.key + "' must not be empty");
      for (const auto& part : split(v, ',')) parse_int(s.key, part);
      break;
    case Kind::real_list:
      if (v.empty()) throw validation_error("'" + s.key + "' must not be empty");
      for (const auto& part : split(v, ',')) parse_real(s.key, part);
      break;
    case Kind::text:
      break;
  }
}

std::vector<KeySpec> with_physics(std::vector<KeySpec> extra) {
  std::vector<KeySpec> keys{
      {"omega", Kind::real, "1", "nearest-neighbour frequency"},
      {"gamma", Kind::real, "1", "pinning frequency (> 0)"},
      {"lambda", Kind::real, "1", "bath coupling"},
      {"out", Kind::text, "results", "output directory"},
  };
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

}  // namespace

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

const std::vector<KeySpec>& schema_for(const std::string& command) {
  static const std::map<std::string, std::vector<KeySpec>> schemas{
      {"solve", with_physics({
                    {"n", Kind::integer, "64", "chain length"},
                    {"tl", Kind::real, "2", "left temperature"},
                    {"tr", Kind::real, "1", "right temperature"},
                    {"couplings", Kind::text, "uniform", "uniform[:x] | every-m:x,m | list:FILE"},
                    {"covariance", Kind::boolean, "false", "also write covariance.csv"},
                })},
      {"kappa-scan", with_physics({
                         {"n_values", Kind::int_list, "16,32,64,128", "chain lengths"},
                         {"tl", Kind::real, "2", "left temperature"},
                         {"tr", Kind::real, "1", "right temperature"},
                     })},
      {"greenkubo", with_physics({
                        {"n", Kind::integer, "64", "chain length"},
                        {"n_values", Kind::int_list, "32,64,128", "sizes for extrapolation"},
                        {"g_points", Kind::integer, "201", "samples of g_N(t)"},
                        {"g_tmax", Kind::real, "0", "last sample time; 0 selects 10 / decay floor"},
                    })},
      {"highdim", with_physics({
                      {"n", Kind::integer, "8", "longitudinal size for the lattice oracle"},
                      {"n_transverse", Kind::int_list, "4", "transverse sizes"},
                      {"dmax", Kind::integer, "64", "largest dimension tabulated"},
                      {"tl", Kind::real, "2", "left temperature"},
                      {"tr", Kind::real, "1", "right temperature"},
                      {"oracle", Kind::boolean, "true", "run the full-lattice oracle (d = 2 only)"},
                  })},
      {"montecarlo", with_physics({
                         {"n", Kind::integer, "4", "chain length"},
                         {"tl", Kind::real, "1", "left temperature"},
                         {"tr", Kind::real, "1", "right temperature"},
                         {"profile", Kind::text, "self-consistent", "self-consistent | linear"},
                         {"seed", Kind::integer, "1", "random seed"},
                         {"step", Kind::real, "0.1", "sampling interval"},
                         {"total_time", Kind::real, "10000", "sampled time per trajectory"},
                         {"burn_in", Kind::real, "0", "discarded time; 0 selects 10 / decay floor"},
                         {"trajectories", Kind::integer, "1", "independent trajectories"},
                         {"dump_trajectory", Kind::boolean, "false", "write trajectory.csv"},
                     })},
      {"selftest", {}},
  };
  const auto it = schemas.find(command);
  if (it == schemas.end()) throw validation_error("unknown command '" + command + "'");
  return it->second;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot read config file '" + path + "'");
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw validation_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (out.count(key)) {
      throw validation_error(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> parse_manifest(const std::string& path,
                                                  const std::string& command) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot read manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw validation_error("manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!j.contains("command") || !j.contains("config") || !j["config"].is_object()) {
    throw validation_error("manifest lacks command/config");
  }
  if (j["command"] != command) {
    throw validation_error("manifest was written by '" + j["command"].get<std::string>() + "'");
  }
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : j["config"].items()) {
    if (!v.is_string()) throw validation_error("manifest config values must be strings");
    out[k] = v.get<std::string>();
  }
  return out;
}

Config Config::resolve(const std::string& command,
                       const std::map<std::string, std::string>& file_values,
                       const std::map<std::string, std::string>& flag_values) {
  const auto& schema = schema_for(command);
  Config c;
  c.command_ = command;
  for (const auto& s : schema) c.values_[s.key] = s.fallback;
  for (const auto* layer : {&file_values, &flag_values}) {
    for (const auto& [k, v] : *layer) {
      if (!c.values_.count(k)) {
        throw validation_error("unknown key '" + k + "' for command '" + command + "'");
      }
      c.values_[k] = v;
    }
  }
  for (const auto& s : schema) check_value(s, c.values_[s.key]);
  return c;
}

const KeySpec& Config::spec(const std::string& key) const {
  for (const auto& s : schema_for(command_)) {
    if (s.key == key) return s;
  }
  throw validation_error("key '" + key + "' not in schema");
}

double Config::real(const std::string& key) const { return parse_real(key, values_.at(spec(key).key)); }
int Config::integer(const std::string& key) const { return parse_int(key, values_.at(spec(key).key)); }
const std::string& Config::text(const std::string& key) const { return values_.at(spec(key).key); }
bool Config::boolean(const std::string& key) const { return parse_bool(key, values_.at(spec(key).key)); }

std::vector<int> Config::int_list(const std::string& key) const {
  std::vector<int> out;
  for (const auto& part : split(values_.at(spec(key).key), ',')) out.push_back(parse_int(key, part));
  return out;
}

std::vector<double> Config::real_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split(values_.at(spec(key).key), ',')) out.push_back(parse_real(key, part));
  return out;
}

nlohmann::ordered_json Config::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& s : schema_for(command_)) j[s.key] = values_.at(s.key);
  return j;
}

}  // namespace cli
