#include "msde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "msde/builtin_models.hpp"
#include "msde/csv.hpp"
#include "msde/cutoff.hpp"
#include "msde/errors.hpp"
#include "msde/estimators.hpp"
#include "msde/malliavin.hpp"
#include "msde/paths.hpp"
#include "msde/rng.hpp"

namespace msde {

namespace {

using nlohmann::json;

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

std::string join_path(const std::string& dir, const char* file) {
  return (std::filesystem::path(dir) / file).string();
}

/// Everything one experiment needs, pre-resolved once per run.
struct RunContext {
  const ExperimentConfig& cfg;
  const ModelSpec& model;
  const CutoffFamily& family;
  std::string dir;
  std::uint64_t seed0 = 0;
  ExecPolicy exec;
  std::uint64_t seed_max = 0;

  void touch_seed(std::uint64_t s) { seed_max = std::max(seed_max, s); }
};

bool run_hypothesis(RunContext& ctx, json& entry) {
  const double radius = 5.0;
  const long n_samples = 2000;
  std::vector<std::pair<std::string, HypothesisReport>> checks;
  checks.emplace_back(
      "semi_monotone",
      check_semi_monotone(ctx.model, radius, n_samples, ctx.seed0));
  checks.emplace_back(
      "dissipativity",
      check_dissipativity(ctx.model, radius, n_samples, ctx.seed0 + 1));
  checks.emplace_back(
      "growth_metadata",
      check_growth_metadata(ctx.model, radius, n_samples, ctx.seed0 + 2));
  checks.emplace_back("derivatives",
                      check_derivatives(ctx.model, radius, 200, ctx.seed0 + 3));
  ctx.touch_seed(ctx.seed0 + 3);
  write_hypothesis_csv(join_path(ctx.dir, "hypothesis.csv"), checks);
  bool ok = true;
  json detail = json::object();
  for (const auto& [name, rep] : checks) {
    detail[name] = rep.passed;
    ok = ok && rep.passed;
  }
  entry["checks"] = detail;
  return ok;
}

bool run_cutoff_cert(RunContext& ctx, json& entry) {
  const auto rep = certify_uniform_bounds(
      ctx.family, ctx.model, {1, 2}, ctx.cfg.truncation.levels,
      ctx.cfg.truncation.cert_samples, ctx.seed0 + 10);
  ctx.touch_seed(ctx.seed0 + 10);
  write_certification_csv(join_path(ctx.dir, "cutoff_cert.csv"), rep);
  write_phi_profile_csv(join_path(ctx.dir, "phi_profile.csv"), ctx.family,
                        ctx.cfg.truncation.levels, 201);
  entry["levels"] = ctx.cfg.truncation.levels;
  entry["violations"] = rep.violation_count;
  return rep.passed;
}

bool run_simulate(RunContext& ctx, json& entry) {
  const long n_paths = std::min<long>(ctx.cfg.mc.samples, 8);
  std::vector<NoisePath> noises;
  std::vector<PathSolution> paths;
  std::vector<int> settled;
  for (long i = 0; i < n_paths; ++i) {
    NoisePath noise =
        sample_noise(ctx.cfg.grid, ctx.model.dim, ctx.seed0 + i);
    paths.push_back(euler_original(ctx.model, ctx.family, noise,
                                   ctx.cfg.truncation.n_start,
                                   ctx.cfg.truncation.n_max));
    settled.push_back(paths.back().settled_level);
    noises.push_back(std::move(noise));
  }
  ctx.touch_seed(ctx.seed0 + static_cast<std::uint64_t>(n_paths) - 1);
  write_paths_csv(join_path(ctx.dir, "paths.csv"), paths);
  write_noise_csv(join_path(ctx.dir, "noise.csv"), noises);
  entry["settled_levels"] = settled;
  return true;
}

/// Shared setup for the field experiments: one settled path on the dedicated
/// (coarser) field grid plus its first-order derivative field.
struct FieldSetup {
  TimeGrid grid;
  NoisePath noise;
  PathSolution path;
  TruncatedModel tm;
  FirstDerivField first;
};

FieldSetup make_field_setup(RunContext& ctx) {
  TimeGrid fgrid(ctx.cfg.grid.horizon, ctx.cfg.malliavin.steps);
  NoisePath noise = sample_noise(fgrid, ctx.model.dim, ctx.seed0);
  PathSolution path =
      euler_original(ctx.model, ctx.family, noise, ctx.cfg.truncation.n_start,
                     ctx.cfg.truncation.n_max);
  TruncatedModel tm =
      make_truncated(ctx.model, path.settled_level, ctx.family);
  FirstDerivField first = propagate_first(tm, path, noise);
  return FieldSetup{fgrid, std::move(noise), std::move(path), std::move(tm),
                    std::move(first)};
}

bool run_malliavin(RunContext& ctx, json& entry) {
  FieldSetup fs = make_field_setup(ctx);
  const std::vector<long> touts =
      ctx.cfg.malliavin.output_times.empty()
          ? std::vector<long>{fs.grid.steps}
          : ctx.cfg.malliavin.output_times;
  write_first_field_csv(join_path(ctx.dir, "first_field.csv"), fs.first,
                        touts);
  const bool want_second =
      std::find(ctx.cfg.malliavin.orders.begin(),
                ctx.cfg.malliavin.orders.end(),
                2) != ctx.cfg.malliavin.orders.end();
  if (want_second) {
    const SecondDerivField second =
        propagate_second(fs.tm, fs.path, fs.noise, fs.first, touts);
    write_second_field_csv(join_path(ctx.dir, "second_field.csv"), second,
                           std::max<long>(1, ctx.cfg.malliavin.steps / 25));
  }
  entry["settled_level"] = fs.path.settled_level;
  entry["field_steps"] = ctx.cfg.malliavin.steps;
  entry["orders"] = ctx.cfg.malliavin.orders;
  return true;
}

bool run_oracles(RunContext& ctx, json& entry) {
  FieldSetup fs = make_field_setup(ctx);
  Vec h;
  if (ctx.cfg.malliavin.direction.empty()) {
    h = Vec::Ones(ctx.model.dim);
  } else {
    if (static_cast<int>(ctx.cfg.malliavin.direction.size()) !=
        ctx.model.dim) {
      throw ConfigError("malliavin.direction: expected " +
                        std::to_string(ctx.model.dim) + " entries");
    }
    h = Eigen::Map<const Vec>(ctx.cfg.malliavin.direction.data(),
                              ctx.model.dim);
  }
  const auto cm = cameron_martin_check(fs.tm, fs.noise,
                                       CMDirection::constant(h),
                                       ctx.cfg.malliavin.eps);
  const auto flow = flow_factorization_check(fs.tm, fs.path, fs.noise,
                                             fs.first);
  std::vector<OracleRow> rows;
  rows.push_back({"cameron_martin_rel_err", cm.rel_err, 1e-2,
                  cm.rel_err <= 1e-2});
  rows.push_back({"flow_factorization_max_gap", flow.max_gap, 1e-8,
                  flow.max_gap <= 1e-8});
  write_oracles_csv(join_path(ctx.dir, "oracles.csv"), rows);
  entry["cameron_martin_rel_err"] = cm.rel_err;
  entry["flow_max_gap"] = flow.max_gap;
  entry["flow_pairs_skipped"] = flow.pairs_skipped;
  bool ok = true;
  for (const auto& row : rows) {
    ok = ok && row.passed;
  }
  return ok;
}

bool run_moments(RunContext& ctx, json& entry) {
  std::vector<MomentReport> abs_reports;
  std::vector<MomentReport> cent_reports;
  std::vector<MomentReport> hnorm_reports;
  std::vector<std::vector<double>> cent_bounds;
  bool ok = true;
  std::string first_violation;
  double max_ri = 0.0;
  for (double p : ctx.cfg.mc.p) {
    const auto ubr = uniform_bound_report(
        ctx.model, ctx.family, ctx.cfg.truncation.levels, ctx.cfg.grid, p,
        ctx.cfg.mc.samples, ctx.seed0, ctx.cfg.mc.hnorm_samples, ctx.exec);
    for (const auto& rep : ubr.state_moments) {
      abs_reports.push_back(rep);
      cent_reports.push_back(rep);
      cent_bounds.push_back(ubr.bound);
    }
    for (const auto& rep : ubr.hnorm_moments) {
      hnorm_reports.push_back(rep);
    }
    if (!ubr.verdict && first_violation.empty()) {
      first_violation = ubr.first_violation;
    }
    ok = ok && ubr.verdict;
    max_ri = std::max(max_ri, ubr.max_rel_increase);
  }
  ctx.touch_seed(ctx.seed0 + static_cast<std::uint64_t>(ctx.cfg.mc.samples) -
                 1);
  write_moments_csv(join_path(ctx.dir, "moments_abs.csv"), abs_reports, false,
                    nullptr);
  write_moments_csv(join_path(ctx.dir, "moments_centered.csv"), cent_reports,
                    true, &cent_bounds);
  write_moments_csv(join_path(ctx.dir, "hnorm_moments.csv"), hnorm_reports,
                    false, nullptr);
  entry["max_rel_increase"] = max_ri;
  if (!first_violation.empty()) {
    entry["first_violation"] = first_violation;
  }
  return ok;
}

bool run_convergence(RunContext& ctx, json& entry) {
  const std::vector<int>& levels = ctx.cfg.convergence.levels.empty()
                                       ? ctx.cfg.truncation.levels
                                       : ctx.cfg.convergence.levels;
  const long samples = ctx.cfg.convergence.samples > 0
                           ? ctx.cfg.convergence.samples
                           : ctx.cfg.mc.samples;
  const auto rep = convergence_report(ctx.model, ctx.family, levels,
                                      ctx.cfg.convergence.n_ref, ctx.cfg.grid,
                                      ctx.cfg.mc.p.front(), samples, ctx.seed0,
                                      ctx.exec);
  ctx.touch_seed(ctx.seed0 + static_cast<std::uint64_t>(samples) - 1);
  write_convergence_csv(join_path(ctx.dir, "convergence.csv"), rep);
  entry["settled_gaps_zero"] = rep.settled_gaps_zero;
  entry["monotone_trend"] = rep.monotone_trend;
  return rep.settled_gaps_zero && rep.monotone_trend;
}

}  // namespace

int run_experiments(const ExperimentConfig& cfg, const RunOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);

  const ModelSpec model = build_model(cfg.model);
  const double xi = cfg.truncation.xi > 0.0 ? cfg.truncation.xi : model.xi;
  const CutoffFamily family(xi, model.dim);
  const std::uint64_t seed0 =
      opts.seed_override ? *opts.seed_override : cfg.mc.seed0;

  RunContext ctx{cfg, model, family, opts.out_dir, seed0, opts.exec, seed0};

  json entries = json::array();
  bool all_pass = true;
  int hard_exit = 0;
  for (const std::string& name : cfg.experiments) {
    json entry;
    entry["name"] = name;
    try {
      bool verdict = false;
      if (name == "hypothesis") {
        verdict = run_hypothesis(ctx, entry);
      } else if (name == "cutoff_cert") {
        verdict = run_cutoff_cert(ctx, entry);
      } else if (name == "simulate") {
        verdict = run_simulate(ctx, entry);
      } else if (name == "malliavin") {
        verdict = run_malliavin(ctx, entry);
      } else if (name == "oracles") {
        verdict = run_oracles(ctx, entry);
      } else if (name == "moments") {
        verdict = run_moments(ctx, entry);
      } else if (name == "convergence") {
        verdict = run_convergence(ctx, entry);
      } else {
        throw ConfigError("experiments: unknown experiment '" + name + "'");
      }
      entry["verdict"] = verdict;
      all_pass = all_pass && verdict;
    } catch (const SettleError& e) {
      entry["verdict"] = false;
      entry["error"] = e.what();
      all_pass = false;
    } catch (const ConfigError& e) {
      entry["verdict"] = false;
      entry["error"] = e.what();
      hard_exit = 2;
    } catch (const std::exception& e) {
      entry["verdict"] = false;
      entry["error"] = e.what();
      hard_exit = 1;
    }
    entries.push_back(std::move(entry));
    if (hard_exit != 0) {
      break;
    }
  }

  const int code = hard_exit != 0 ? hard_exit : (all_pass ? 0 : 3);

  json manifest;
  manifest["version"] = kProjectVersion;
  manifest["generated_at"] = iso_utc_now();
  manifest["config_hash"] = config_hash_hex(opts.config_text);
  manifest["generator_id"] = kGeneratorId;
  manifest["model"] = model.name;
  manifest["seed0"] = seed0;
  manifest["seed_max"] = ctx.seed_max;
  manifest["experiments"] = std::move(entries);
  manifest["exit_code"] = code;
  std::ofstream ofs(join_path(opts.out_dir, "manifest.json"),
                    std::ios::binary);
  if (ofs) {
    ofs << manifest.dump(2) << '\n';
  }

  return code;
}

}  // namespace msde
