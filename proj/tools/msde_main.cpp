#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msde/builtin_models.hpp"
#include "msde/config.hpp"
#include "msde/errors.hpp"
#include "msde/experiments.hpp"

namespace {

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) {
    prev[j] = j;
  }
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone-drift SDE laboratory: truncated Euler simulation, "
               "derivative fields, and moment certification"};
  app.require_subcommand(1);

  auto* run_cmd =
      app.add_subcommand("run", "Run an experiment config (file or preset)");
  std::string config_arg;
  run_cmd->add_option("config", config_arg, "config file path or preset name")
      ->required();
  std::string out_arg;
  run_cmd->add_option(
      "--out", out_arg,
      "output directory (default: MSDE_OUT env, then outputs.dir, then out)");
  std::uint64_t seed_arg = 0;
  auto* seed_opt =
      run_cmd->add_option("--seed", seed_arg, "override the base seed");
  int threads_arg = 1;
  run_cmd->add_option("--threads", threads_arg,
                      "worker threads (results never depend on this)");

  auto* list_cmd = app.add_subcommand("list", "List bundled presets");
  auto* describe_cmd =
      app.add_subcommand("describe", "Print a built-in model summary");
  std::string model_arg;
  describe_cmd->add_option("model", model_arg, "model name")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      if (threads_arg < 1) {
        throw msde::ConfigError("--threads: must be at least 1");
      }
      std::string text;
      const msde::ExperimentConfig cfg = msde::load_config(config_arg, &text);
      msde::RunOptions opts;
      opts.config_text = text;
      if (!out_arg.empty()) {
        opts.out_dir = out_arg;
      } else if (const char* env = std::getenv("MSDE_OUT");
                 env != nullptr && *env != '\0') {
        opts.out_dir = env;
      } else if (!cfg.out_dir.empty()) {
        opts.out_dir = cfg.out_dir;
      } else {
        opts.out_dir = "out";
      }
      if (seed_opt->count() > 0) {
        opts.seed_override = seed_arg;
      }
      opts.exec.threads = threads_arg;
      const int code = msde::run_experiments(cfg, opts);
      if (code != 0) {
        std::cerr << "run finished with exit code " << code
                  << " (see manifest.json in " << opts.out_dir << ")\n";
      }
      return code;
    }
    if (list_cmd->parsed()) {
      for (const auto& preset : msde::bundled_presets()) {
        std::cout << preset.name << "  -  " << preset.description << "\n";
      }
      return 0;
    }
    if (describe_cmd->parsed()) {
      const auto& names = msde::builtin_model_names();
      if (std::find(names.begin(), names.end(), model_arg) == names.end()) {
        const std::string* best = nullptr;
        std::size_t best_d = static_cast<std::size_t>(-1);
        for (const auto& name : names) {
          const std::size_t d = edit_distance(model_arg, name);
          if (d < best_d) {
            best_d = d;
            best = &name;
          }
        }
        std::cerr << "unknown model '" << model_arg << "'";
        if (best != nullptr) {
          std::cerr << "; did you mean '" << *best << "'?";
        }
        std::cerr << "\n";
        return 2;
      }
      msde::ModelConfig mc;
      mc.name = model_arg;
      const std::string summary = msde::model_summary(msde::build_model(mc));
      std::cout << summary;
      if (summary.empty() || summary.back() != '\n') {
        std::cout << '\n';
      }
      return 0;
    }
  } catch (const msde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
