#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "msde/cutoff.hpp"
#include "msde/linalg.hpp"
#include "msde/model.hpp"

namespace msde {

/// Uniform partition of [0, horizon] into `steps` intervals.
struct TimeGrid {
  double horizon = 1.0;
  long steps = 1;

  TimeGrid() = default;
  TimeGrid(double horizon_, long steps_);

  double dt() const { return horizon / static_cast<double>(steps); }
  double time(long k) const {
    return horizon * (static_cast<double>(k) / static_cast<double>(steps));
  }
  bool same_as(const TimeGrid& other) const {
    return steps == other.steps && horizon == other.horizon;
  }
};

/// Brownian increments on a grid. (seed, generator_id, grid) fully determine
/// the increments: sampling fills step-major, coordinate-minor, so any two
/// runs agree bitwise.
struct NoisePath {
  TimeGrid grid;
  int dim = 0;
  std::uint64_t seed = 0;
  std::string generator_id;
  Mat increments;  // steps x dim, row k holds the increment over [t_k, t_k+1]

  Vec dw(long k) const { return increments.row(k).transpose(); }
};

NoisePath sample_noise(const TimeGrid& grid, int dim, std::uint64_t seed);

/// Wraps externally supplied increments (crafted noise for tests).
NoisePath noise_from_increments(const TimeGrid& grid, Mat increments,
                                std::string label = "crafted");

struct PathSolution {
  TimeGrid grid;
  int dim = 0;
  Mat states;  // (steps+1) x dim, row k = state at t_k
  std::string model_id;
  std::string scheme = "euler-maruyama";
  std::uint64_t seed = 0;
  /// Level reached by the nesting loop, or the simulated level when the
  /// trajectory stayed strictly inside its identity ball; -1 otherwise.
  int settled_level = -1;
  /// n -> first grid index k with |X_k| >= n^xi; levels never reached absent.
  std::map<int, long> exit_radius_events;
  double sup_norm = 0.0;

  long steps() const { return grid.steps; }
  Vec state(long k) const { return states.row(k).transpose(); }
};

/// Explicit Euler step X_{k+1} = X_k + [b_n(X_k) + f(X_k)] dt + sigma(X_k) dW_k
/// on the truncated model. Exit events are recorded for every level whose
/// threshold the trajectory reaches.
PathSolution euler_truncated(const TruncatedModel& tm, const NoisePath& noise);

/// Simulates at level n_start and doubles the level, rerunning on the SAME
/// noise, until the trajectory never reaches its identity radius; by the
/// nesting property the settled path is unchanged under any further increase
/// and stands in for the untruncated dynamics. Throws SettleError past n_max.
PathSolution euler_original(const ModelSpec& model, const CutoffFamily& family,
                            const NoisePath& noise, int n_start = 1,
                            int n_max = 4096);

/// First grid index k with |X_k| >= n^xi (closed threshold); empty if the
/// trajectory never reaches it.
std::optional<long> stopping_time(const PathSolution& path, int n, double xi);

}  // namespace msde
