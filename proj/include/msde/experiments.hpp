#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "msde/config.hpp"
#include "msde/parallel.hpp"

namespace msde {

inline constexpr const char* kProjectVersion = "0.1.0";

struct RunOptions {
  std::string out_dir;
  std::optional<std::uint64_t> seed_override;
  ExecPolicy exec;
  std::string config_text;  // raw JSON, hashed into the manifest
};

/// Runs the configured experiments in order, writing one CSV artifact set
/// plus manifest.json into out_dir. Returns the process exit code: 0 when
/// every experiment verdict passes, 1 on a runtime failure, 2 on a
/// configuration error discovered while running, 3 when an experiment
/// completes with a failing verdict (including an unsettled truncation).
/// The manifest is written in every case and records per-experiment verdicts,
/// errors, and the final exit code; apart from its timestamp the entire
/// artifact set is a deterministic function of config and seed.
int run_experiments(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace msde
