#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace membrane::cli {

/// Bad configuration; maps to exit code 64.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int dim = 2;
  std::vector<int> sizes;       // N values
  std::vector<int> margins{0};  // L values
  double gamma = 0.25;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::uint64_t first_stream = 0;
  std::size_t block_size = 512;
  unsigned workers = 1;
  std::string out = ".";
  std::string event = "positivity";  // positivity | smallness
  std::string method = "tilted";     // direct | tilted
  std::string shift = "none";        // none | phi (sample only)
  double alpha = 0.0;                // 0: search
  std::uint64_t count = 1;           // fields written by `sample`

  /// Hash of every key that can change results; `workers` and `out` are excluded.
  std::uint64_t hash(const std::string& command) const;
};

/// Flat "key = value" lines, '#' comments. Unknown keys and malformed values throw UsageError.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies raw pairs in order over the defaults and validates the result.
ExperimentConfig resolve_config(const std::vector<std::pair<std::string, std::string>>& entries);

/// Splits "key=value"; throws UsageError without '='.
std::pair<std::string, std::string> split_override(const std::string& text);

const std::vector<std::string>& known_keys();

}  // namespace membrane::cli
