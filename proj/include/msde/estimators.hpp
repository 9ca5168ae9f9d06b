#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msde/cutoff.hpp"
#include "msde/malliavin.hpp"
#include "msde/model.hpp"
#include "msde/parallel.hpp"
#include "msde/paths.hpp"

namespace msde {

/// Across-level sups must not grow by more than this relative amount between
/// successive levels for a uniform-bound verdict to pass. Nesting makes true
/// stabilization exact once the radii exceed the path sups, so one percent
/// separates genuine non-uniformity from Monte Carlo noise.
inline constexpr double kStabilizationTol = 0.01;

/// Monte Carlo moment curve for one quantity at one truncation level.
/// Estimates and standard errors (sample std / sqrt(samples)) are stored per
/// grid time. State-moment reports carry both the raw moment E|X_t|^p and
/// the start-point-centered moment E|X_t - x0|^p; H-norm reports fill only
/// the raw columns.
struct MomentReport {
  std::string quantity;
  std::string level_label;  // "n=3", or "settled" for the nesting estimator
  int level = -1;           // -1 when per-seed settled levels were used
  double p = 2.0;
  long samples = 0;
  std::uint64_t seed_lo = 0;
  std::uint64_t seed_hi = 0;
  std::vector<double> times;
  std::vector<double> est_abs;
  std::vector<double> se_abs;
  std::vector<double> est_centered;
  std::vector<double> se_centered;
};

struct UniformBoundReport {
  std::vector<MomentReport> state_moments;  // one per level, input order
  std::vector<MomentReport> hnorm_moments;  // one per level, input order
  std::vector<double> bound;                // centered-moment bound per time
  bool verdict = false;
  std::string first_violation;  // empty when the verdict passes
  double max_rel_increase = 0.0;
};

struct ConvergenceReport {
  std::vector<int> levels;
  int n_ref = 0;
  double p = 2.0;
  long samples = 0;
  std::uint64_t seed_lo = 0;
  std::uint64_t seed_hi = 0;
  std::vector<double> gap;  // E |X_T^n - X_T^ref|^p per level
  std::vector<double> se;
  std::vector<double> settled_fraction;
  bool settled_gaps_zero = true;
  bool monotone_trend = true;
};

/// Integral consequence of m'(t) <= beta_p m(t) + alpha_p at p = 2:
/// (m0 + a/b) e^{bt} - a/b for b != 0, else m0 + a t, with m0 = x0_norm^2.
/// Higher orders are composed internally by moment_bound; only the base case
/// is exposed.
double gronwall_bound(double alpha_p, double beta_p, double p, double x0_norm,
                      double t);

/// Moment bound for even integer p built from the model's generator
/// constants: the p = 2 case is gronwall_bound, and each higher even order
/// integrates the previous curve against e^{beta_p (t-s)} (composite Simpson,
/// inflated by a 1e-9 relative guard so quadrature error cannot understate
/// the bound).
double moment_bound(const ModelSpec& model, double p, double x0_norm,
                    double t);

/// Simulates paths with seeds seed0 .. seed0+samples-1 at a fixed truncation
/// level and reports E|X_t|^p and E|X_t - x0|^p at every grid time. Blocked
/// accumulation in fixed seed order keeps results independent of the thread
/// count.
MomentReport mc_moment(const TruncatedModel& tm, const TimeGrid& grid,
                       double p, long samples, std::uint64_t seed0,
                       const ExecPolicy& exec = {});

/// Same estimator with each path simulated by the level-doubling loop, so
/// every seed uses its own settled level ("settled" rows).
MomentReport mc_moment(const ModelSpec& model, const CutoffFamily& family,
                       const TimeGrid& grid, double p, long samples,
                       std::uint64_t seed0, int n_start = 1, int n_max = 4096,
                       const ExecPolicy& exec = {});

/// Moments of the squared-H-norm quantity: E (sum_r |D_r X_t|_F^2 dt)^{p/2}
/// at every grid time, from first-order fields propagated on common seeds.
MomentReport hnorm_moment(const TruncatedModel& tm, const TimeGrid& grid,
                          double p, long samples, std::uint64_t seed0);

/// Runs the moment estimators at every level on common seeds and verdicts:
/// every centered estimate must stay below the zero-start moment bound plus
/// three standard errors at every grid time, and the across-level sups of
/// both quantities must not grow by more than kStabilizationTol between
/// successive levels. The first violated (level, t) is named.
UniformBoundReport uniform_bound_report(const ModelSpec& model,
                                        const CutoffFamily& family,
                                        const std::vector<int>& levels,
                                        const TimeGrid& grid, double p,
                                        long samples, std::uint64_t seed0,
                                        long hnorm_samples = 64,
                                        const ExecPolicy& exec = {});

/// Coupled terminal-gap estimator: per seed, every level and the reference
/// level are simulated on the SAME noise, so a seed whose trajectory settles
/// at level n contributes exactly zero gap for every level >= n.
/// settled_gaps_zero records that this held bitwise; monotone_trend checks
/// gap_{i+1} <= gap_i + 3 (se_i + se_{i+1}) along the level list.
ConvergenceReport convergence_report(const ModelSpec& model,
                                     const CutoffFamily& family,
                                     const std::vector<int>& levels, int n_ref,
                                     const TimeGrid& grid, double p,
                                     long samples, std::uint64_t seed0,
                                     const ExecPolicy& exec = {});

}  // namespace msde
