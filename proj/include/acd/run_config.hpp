#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "acd/eval.hpp"

namespace acd {

// Flat key-value run configuration: one JSON object (same object syntax as
// the corpus header line). Flags override file values. Every key a command
// resolves is recorded together with the value actually used, so the
// manifest written next to the artifacts replays the run exactly.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);

  // flag overrides; value is parsed as JSON when possible, else kept string
  void set(const std::string& key, const nlohmann::json& value);

  bool has(const std::string& key) const;

  int get_int(const std::string& key, int fallback) const;
  int require_int(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t require_seed() const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback) const;
  std::vector<std::vector<double>> get_matrix(
      const std::string& key, std::vector<std::vector<double>> fallback) const;

  // keys present in the input that were never resolved (besides "command")
  std::vector<std::string> unused_keys() const;

  // canonical manifest body: all resolved keys plus the command name
  std::string manifest(const std::string& command) const;

 private:
  template <typename T>
  T get_or(const std::string& key, T fallback, const char* type_name) const;
  template <typename T>
  T require(const std::string& key, const char* type_name) const;

  nlohmann::json values_ = nlohmann::json::object();
  mutable nlohmann::json resolved_ = nlohmann::json::object();
};

// Builders resolving whole config blocks; each records what it used.
FeatureConfig feature_config_from(const RunConfig& rc);
HAConfig ha_config_from(const RunConfig& rc);
LspiConfig lspi_config_from(const RunConfig& rc);
BaselineHyper baseline_hyper_from(const RunConfig& rc);
PipelineConfig pipeline_config_from(const RunConfig& rc);
SynthConfig synth_config_from(const RunConfig& rc);

}  // namespace acd
