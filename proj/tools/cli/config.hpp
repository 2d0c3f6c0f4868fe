#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cli {

enum class Kind { real, integer, text, boolean, int_list, real_list };

struct KeySpec {
  std::string key;
  Kind kind;
  std::string fallback;
  std::string help;
};

/// Typed keys accepted by a command; anything else is rejected.
const std::vector<KeySpec>& schema_for(const std::string& command);

/// `key = value` lines; blank lines and `#` comments are ignored.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// The "config" object of a manifest written by a previous run.
std::map<std::string, std::string> parse_manifest(const std::string& path,
                                                  const std::string& command);

class Config {
 public:
  /// Layering: schema defaults < file < flags. Every value is parsed and
  /// validated against its kind before returning.
  static Config resolve(const std::string& command,
                        const std::map<std::string, std::string>& file_values,
                        const std::map<std::string, std::string>& flag_values);

  double real(const std::string& key) const;
  int integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;
  std::vector<double> real_list(const std::string& key) const;

  const std::string& command() const { return command_; }
  nlohmann::ordered_json to_json() const;

 private:
  const KeySpec& spec(const std::string& key) const;

  std::string command_;
  std::map<std::string, std::string> values_;
};

/// Flag spelling of a config key: n_values -> --n-values.
std::string flag_name(const std::string& key);

}  // namespace cli
