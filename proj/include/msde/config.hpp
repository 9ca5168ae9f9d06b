#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "msde/model.hpp"
#include "msde/paths.hpp"

namespace msde {

/// Model selection plus parameter overrides. Scalar parameters are kept as a
/// name -> value map so unknown names can be rejected with a precise message;
/// x0 is separate because it may be a vector.
struct ModelConfig {
  std::string name = "ou";
  std::map<std::string, double> scalars;
  std::vector<double> x0;
  bool has_x0 = false;
};

struct TruncationConfig {
  double xi = -1.0;  // <= 0 means: use the model's declared exponent
  std::vector<int> levels = {1, 2, 4};
  int n_start = 1;
  int n_max = 4096;
  long cert_samples = 2000;
};

struct MalliavinConfig {
  std::vector<int> orders = {1, 2};
  long steps = 250;  // dedicated (coarser) grid; the second field is O(N^3)
  std::vector<long> output_times;  // empty -> final step only
  double eps = 1e-4;
  std::vector<double> direction;  // empty -> all-ones direction
};

struct McConfig {
  long samples = 1000;
  std::uint64_t seed0 = 1;
  std::vector<double> p = {2.0};
  long hnorm_samples = 32;
};

struct ConvergenceConfig {
  std::vector<int> levels;  // empty -> truncation.levels
  int n_ref = 8;
  long samples = 0;  // 0 -> mc.samples
};

struct ExperimentConfig {
  int schema_version = 1;
  ModelConfig model;
  TimeGrid grid{1.0, 500};
  TruncationConfig truncation;
  MalliavinConfig malliavin;
  McConfig mc;
  ConvergenceConfig convergence;
  std::string out_dir;  // optional; the CLI applies its own fallback chain
  std::vector<std::string> experiments = {
      "hypothesis", "cutoff_cert", "simulate", "malliavin",
      "oracles",    "moments",     "convergence"};
};

/// Parses and validates a JSON config. Unknown keys anywhere in the document
/// are rejected, as are out-of-range values; messages name the offending
/// field. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);

/// Loads a config from a file path, or from a bundled preset when the
/// argument matches a preset name and no such file exists. `source_text`
/// receives the raw JSON (used for hashing).
ExperimentConfig load_config(const std::string& path_or_preset,
                             std::string* source_text = nullptr);

/// Instantiates the built-in model named in the config with its overrides.
ModelSpec build_model(const ModelConfig& mc);

/// Bundled ready-to-run configs: (name, description, json text).
struct Preset {
  std::string name;
  std::string description;
  std::string text;
};
const std::vector<Preset>& bundled_presets();

std::uint64_t fnv1a64(const std::string& text);

/// 16 hex digits of fnv1a64 over the raw config text.
std::string config_hash_hex(const std::string& text);

}  // namespace msde
