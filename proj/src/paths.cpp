#include "msde/paths.hpp"

#include <cmath>
#include <utility>

#include "msde/errors.hpp"
#include "msde/rng.hpp"

namespace msde {

TimeGrid::TimeGrid(double horizon_, long steps_)
    : horizon(horizon_), steps(steps_) {
  if (!(horizon > 0.0)) throw ConfigError("time grid requires horizon > 0");
  if (steps < 1) throw ConfigError("time grid requires steps >= 1");
}

NoisePath sample_noise(const TimeGrid& grid, int dim, std::uint64_t seed) {
  if (dim < 1) throw ConfigError("noise dimension must be >= 1");
  NoisePath noise;
  noise.grid = grid;
  noise.dim = dim;
  noise.seed = seed;
  noise.generator_id = kGeneratorId;
  noise.increments.resize(grid.steps, dim);
  NormalSampler sampler(seed);
  const double root_dt = std::sqrt(grid.dt());
  for (long k = 0; k < grid.steps; ++k)
    for (int l = 0; l < dim; ++l)
      noise.increments(k, l) = root_dt * sampler.next();
  return noise;
}

NoisePath noise_from_increments(const TimeGrid& grid, Mat increments,
                                std::string label) {
  if (increments.rows() != grid.steps)
    throw ConfigError("increment rows must equal the number of grid steps");
  if (increments.cols() < 1)
    throw ConfigError("increments need at least one column");
  NoisePath noise;
  noise.grid = grid;
  noise.dim = static_cast<int>(increments.cols());
  noise.seed = 0;
  noise.generator_id = std::move(label);
  noise.increments = std::move(increments);
  return noise;
}

namespace {

void finalize_path(PathSolution& path, double xi) {
  const long n_states = path.states.rows();
  path.sup_norm = 0.0;
  for (long k = 0; k < n_states; ++k)
    path.sup_norm = std::max(path.sup_norm, path.states.row(k).norm());

  for (int n = 1;; ++n) {
    const double rad = std::pow(static_cast<double>(n), xi);
    if (rad > path.sup_norm) break;
    for (long k = 0; k < n_states; ++k) {
      if (path.states.row(k).norm() >= rad) {
        path.exit_radius_events.emplace(n, k);
        break;
      }
    }
  }
}

}  // namespace

PathSolution euler_truncated(const TruncatedModel& tm, const NoisePath& noise) {
  const ModelSpec& m = tm.spec();
  if (m.dim != noise.dim)
    throw ConfigError("model and noise dimensions do not match");

  const long n_steps = noise.grid.steps;
  const int d = m.dim;
  const double dt = noise.grid.dt();

  PathSolution path;
  path.grid = noise.grid;
  path.dim = d;
  path.model_id = tm.id();
  path.seed = noise.seed;
  path.states.resize(n_steps + 1, d);

  Vec x = m.x0;
  Vec bv(d), fv(d);
  Mat sg(d, d);
  path.states.row(0) = x.transpose();
  for (long k = 0; k < n_steps; ++k) {
    m.b(x, bv);
    m.f(x, fv);
    m.sigma(x, sg);
    x += (bv + fv) * dt;
    x.noalias() += sg * noise.dw(k);
    if (!x.allFinite())
      throw ExplosionError("non-finite state during Euler step", k, noise.seed);
    path.states.row(k + 1) = x.transpose();
  }

  finalize_path(path, tm.family().xi());
  if (path.sup_norm < tm.radius_identity()) path.settled_level = tm.level();
  return path;
}

PathSolution euler_original(const ModelSpec& model, const CutoffFamily& family,
                            const NoisePath& noise, int n_start, int n_max) {
  if (n_start < 1) throw ConfigError("nesting loop requires n_start >= 1");
  if (n_max < n_start) throw ConfigError("nesting loop requires n_max >= n_start");

  for (long n = n_start; n <= n_max; n *= 2) {
    TruncatedModel tm(model, static_cast<int>(n), family);
    PathSolution path = euler_truncated(tm, noise);
    if (path.sup_norm < tm.radius_identity()) {
      path.model_id = model.name + "[original-via-nesting]";
      path.settled_level = static_cast<int>(n);
      return path;
    }
  }
  throw SettleError("truncation not settled: trajectory kept reaching the identity radius",
                    n_max, noise.seed);
}

std::optional<long> stopping_time(const PathSolution& path, int n, double xi) {
  const double rad = std::pow(static_cast<double>(n), xi);
  for (long k = 0; k < path.states.rows(); ++k)
    if (path.states.row(k).norm() >= rad) return k;
  return std::nullopt;
}

}  // namespace msde
