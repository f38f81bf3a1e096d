#pragma once

// Experiment configuration: INI-style sections with key = value pairs.
// Every key has a default; unknown sections or keys are errors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigwave {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;           // "section.key"
  std::string default_value;
  std::string help;
};

/// Every recognized key, in canonical order.
const std::vector<ConfigKey>& config_keys();
/// One line per key: "section.key = default    help".
std::string config_help();

class ExperimentConfig {
 public:
  /// All defaults.
  ExperimentConfig();

  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig from_string(const std::string& text);

  /// Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& name, const std::string& value);
  const std::string& raw(const std::string& name) const;

  double get_double(const std::string& name) const;
  std::int64_t get_int(const std::string& name) const;
  std::uint64_t get_u64(const std::string& name) const;
  std::size_t get_size(const std::string& name) const;
  bool get_bool(const std::string& name) const;
  /// Comma-separated list; empty entries rejected.
  std::vector<double> get_double_list(const std::string& name) const;
  std::vector<std::size_t> get_size_list(const std::string& name) const;

  /// "section.key=value" lines for every key, sorted by name.
  std::string canonical_text() const;
  /// SHA-256 of canonical_text(), lowercase hex.
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Writes manifest.json: command, resolved config, hash, outputs and extra fields.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& cfg,
                    const std::vector<std::string>& outputs, const std::map<std::string, std::string>& extra);

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);

}  // namespace sigwave
