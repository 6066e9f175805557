#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "thinlaw/convergence.hpp"
#include "thinlaw/distributions.hpp"
#include "thinlaw/point_process.hpp"

namespace thinlaw::cli {

// Bad or missing configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem trouble while reading configs or writing results.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { large_numbers, thin_numbers, thin_processes, verify_properties };

const char* experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

// Ordered key-value bag; duplicate keys are rejected at insertion.
class KeyValues {
 public:
  void set(const std::string& key, const std::string& value);
  // Later sources win over earlier ones, key by key.
  void override_with(const KeyValues& stronger);
  const std::string* find(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

// Flat `key=value` tokens (with # comments) or a JSON object.
KeyValues parse_key_values(const std::string& text);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::thin_numbers;
  std::optional<IntegerDistribution> dist;
  std::optional<ProcessSpec> process;
  int dim = 2;
  std::vector<std::uint64_t> n_list;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  std::string out;
  CurveMode mode = CurveMode::exact;
  std::vector<std::string> region_ids;
  std::vector<std::string> dict_ids;
  std::string dump_pattern;
};

ExperimentConfig build_config(const KeyValues& keys);
ExperimentConfig parse_config(const std::string& text);

// Executes the experiment, writes <out>.csv and <out>.summary.txt, and returns
// the exit status: 0 all checks pass, 1 any check failed.
int run(const ExperimentConfig& config);

// Full command-line entry: merges config file, key=value arguments, and flags.
int main_entry(int argc, const char* const* argv);

}  // namespace thinlaw::cli
