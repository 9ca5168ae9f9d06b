#include "msde/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <utility>

#include "msde/errors.hpp"

namespace msde {

namespace {

double power_of_sq(double r2, double p) {
  return p == 2.0 ? r2 : std::pow(r2, 0.5 * p);
}

double sup_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

std::string format_msg(const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

struct BlockSums {
  std::vector<double> s1a, s2a, s1c, s2c;
};

MomentReport mc_core(const std::function<PathSolution(std::uint64_t)>& simulate,
                     const TimeGrid& grid, const Vec& x0, double p,
                     long samples, std::uint64_t seed0,
                     const ExecPolicy& exec) {
  if (samples < 2)
    throw ConfigError("moment estimation requires samples >= 2");
  if (!(p >= 1.0)) throw ConfigError("moment order must satisfy p >= 1");

  const long n_times = grid.steps + 1;
  const long n_blocks = (samples + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));

  for_each_block(samples, exec, [&](long lo, long hi, long bi) {
    BlockSums& acc = blocks[static_cast<std::size_t>(bi)];
    acc.s1a.assign(n_times, 0.0);
    acc.s2a.assign(n_times, 0.0);
    acc.s1c.assign(n_times, 0.0);
    acc.s2c.assign(n_times, 0.0);
    for (long i = lo; i < hi; ++i) {
      const PathSolution path =
          simulate(seed0 + static_cast<std::uint64_t>(i));
      for (long k = 0; k < n_times; ++k) {
        const double va = power_of_sq(path.states.row(k).squaredNorm(), p);
        const double vc = power_of_sq(
            (path.states.row(k).transpose() - x0).squaredNorm(), p);
        acc.s1a[k] += va;
        acc.s2a[k] += va * va;
        acc.s1c[k] += vc;
        acc.s2c[k] += vc * vc;
      }
    }
  });

  std::vector<double> t1a(n_times, 0.0), t2a(n_times, 0.0), t1c(n_times, 0.0),
      t2c(n_times, 0.0);
  for (const BlockSums& acc : blocks) {
    for (long k = 0; k < n_times; ++k) {
      t1a[k] += acc.s1a[k];
      t2a[k] += acc.s2a[k];
      t1c[k] += acc.s1c[k];
      t2c[k] += acc.s2c[k];
    }
  }

  MomentReport rep;
  rep.quantity = "E|X_t|^p";
  rep.p = p;
  rep.samples = samples;
  rep.seed_lo = seed0;
  rep.seed_hi = seed0 + static_cast<std::uint64_t>(samples) - 1;
  rep.times.resize(n_times);
  rep.est_abs.resize(n_times);
  rep.se_abs.resize(n_times);
  rep.est_centered.resize(n_times);
  rep.se_centered.resize(n_times);
  const double m = static_cast<double>(samples);
  for (long k = 0; k < n_times; ++k) {
    rep.times[k] = grid.time(k);
    rep.est_abs[k] = t1a[k] / m;
    rep.est_centered[k] = t1c[k] / m;
    const double var_a =
        std::max(0.0, (t2a[k] - t1a[k] * t1a[k] / m) / (m - 1.0));
    const double var_c =
        std::max(0.0, (t2c[k] - t1c[k] * t1c[k] / m) / (m - 1.0));
    rep.se_abs[k] = std::sqrt(var_a / m);
    rep.se_centered[k] = std::sqrt(var_c / m);
  }
  return rep;
}

}  // namespace

double gronwall_bound(double alpha_p, double beta_p, double p, double x0_norm,
                      double t) {
  if (p != 2.0)
    throw ConfigError(
        "gronwall_bound exposes the p = 2 base case only; higher orders go "
        "through moment_bound");
  if (t < 0.0) throw ConfigError("bound horizon must be nonnegative");
  const double m0 = x0_norm * x0_norm;
  if (beta_p == 0.0) return m0 + alpha_p * t;
  const double ratio = alpha_p / beta_p;
  return (m0 + ratio) * std::exp(beta_p * t) - ratio;
}

double moment_bound(const ModelSpec& model, double p, double x0_norm,
                    double t) {
  const long ip = std::lround(p);
  if (static_cast<double>(ip) != p || ip < 2 || ip % 2 != 0)
    throw ConfigError("moment bounds are computed for even integer p only");
  if (t < 0.0) throw ConfigError("bound horizon must be nonnegative");

  const auto [alpha_p, beta_p] = moment_generator_constants(model, p);
  if (ip == 2) return gronwall_bound(alpha_p, beta_p, 2.0, x0_norm, t);

  const double m0 = std::pow(x0_norm, static_cast<double>(ip));
  if (t == 0.0) return m0;

  const int panels = 1024;
  const double h = t / panels;
  double integral = 0.0;
  auto integrand = [&](double s) {
    return std::exp(beta_p * (t - s)) * moment_bound(model, p - 2.0, x0_norm, s);
  };
  for (int i = 0; i < panels; ++i) {
    const double a = i * h;
    integral +=
        (h / 6.0) * (integrand(a) + 4.0 * integrand(a + 0.5 * h) +
                     integrand(a + h));
  }
  return (std::exp(beta_p * t) * m0 + alpha_p * integral) * (1.0 + 1e-9);
}

MomentReport mc_moment(const TruncatedModel& tm, const TimeGrid& grid,
                       double p, long samples, std::uint64_t seed0,
                       const ExecPolicy& exec) {
  const int d = tm.spec().dim;
  auto simulate = [&tm, &grid, d](std::uint64_t seed) {
    return euler_truncated(tm, sample_noise(grid, d, seed));
  };
  MomentReport rep =
      mc_core(simulate, grid, tm.spec().x0, p, samples, seed0, exec);
  rep.level = tm.level();
  rep.level_label = "n=" + std::to_string(tm.level());
  return rep;
}

MomentReport mc_moment(const ModelSpec& model, const CutoffFamily& family,
                       const TimeGrid& grid, double p, long samples,
                       std::uint64_t seed0, int n_start, int n_max,
                       const ExecPolicy& exec) {
  const int d = model.dim;
  auto simulate = [&](std::uint64_t seed) {
    return euler_original(model, family, sample_noise(grid, d, seed), n_start,
                          n_max);
  };
  MomentReport rep = mc_core(simulate, grid, model.x0, p, samples, seed0, exec);
  rep.level = -1;
  rep.level_label = "settled";
  return rep;
}

MomentReport hnorm_moment(const TruncatedModel& tm, const TimeGrid& grid,
                          double p, long samples, std::uint64_t seed0) {
  if (samples < 2)
    throw ConfigError("moment estimation requires samples >= 2");
  if (!(p >= 1.0)) throw ConfigError("moment order must satisfy p >= 1");

  const int d = tm.spec().dim;
  const long n_times = grid.steps + 1;
  std::vector<double> s1(n_times, 0.0), s2(n_times, 0.0);
  for (long i = 0; i < samples; ++i) {
    const NoisePath noise =
        sample_noise(grid, d, seed0 + static_cast<std::uint64_t>(i));
    const PathSolution path = euler_truncated(tm, noise);
    const FirstDerivField field = propagate_first(tm, path, noise);
    for (long k = 0; k < n_times; ++k) {
      const double v = power_of_sq(hnorm_sq(field, k), p);
      s1[k] += v;
      s2[k] += v * v;
    }
  }

  MomentReport rep;
  rep.quantity = "E||DX_t||_H^p";
  rep.level = tm.level();
  rep.level_label = "n=" + std::to_string(tm.level());
  rep.p = p;
  rep.samples = samples;
  rep.seed_lo = seed0;
  rep.seed_hi = seed0 + static_cast<std::uint64_t>(samples) - 1;
  rep.times.resize(n_times);
  rep.est_abs.resize(n_times);
  rep.se_abs.resize(n_times);
  const double m = static_cast<double>(samples);
  for (long k = 0; k < n_times; ++k) {
    rep.times[k] = grid.time(k);
    rep.est_abs[k] = s1[k] / m;
    const double var = std::max(0.0, (s2[k] - s1[k] * s1[k] / m) / (m - 1.0));
    rep.se_abs[k] = std::sqrt(var / m);
  }
  return rep;
}

UniformBoundReport uniform_bound_report(const ModelSpec& model,
                                        const CutoffFamily& family,
                                        const std::vector<int>& levels,
                                        const TimeGrid& grid, double p,
                                        long samples, std::uint64_t seed0,
                                        long hnorm_samples,
                                        const ExecPolicy& exec) {
  if (levels.empty())
    throw ConfigError("uniform bound report requires at least one level");

  UniformBoundReport rep;
  const long n_times = grid.steps + 1;
  rep.bound.resize(n_times);
  for (long k = 0; k < n_times; ++k)
    rep.bound[k] = moment_bound(model, p, 0.0, grid.time(k));

  for (int n : levels) {
    const TruncatedModel tm = make_truncated(model, n, family);
    rep.state_moments.push_back(mc_moment(tm, grid, p, samples, seed0, exec));
    rep.hnorm_moments.push_back(
        hnorm_moment(tm, grid, p, hnorm_samples, seed0));
  }

  rep.verdict = true;
  for (std::size_t li = 0; li < rep.state_moments.size(); ++li) {
    const MomentReport& mr = rep.state_moments[li];
    for (long k = 0; k < n_times; ++k) {
      if (mr.est_centered[k] <= rep.bound[k] + 3.0 * mr.se_centered[k])
        continue;
      rep.verdict = false;
      if (rep.first_violation.empty())
        rep.first_violation = format_msg(
            "level n=%d at t=%.6g: centered estimate %.6g exceeds bound %.6g "
            "+ 3*SE %.6g",
            levels[li], mr.times[k], mr.est_centered[k], rep.bound[k],
            mr.se_centered[k]);
      break;
    }
  }

  for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
    const double s_lo = sup_of(rep.state_moments[li].est_centered);
    const double s_hi = sup_of(rep.state_moments[li + 1].est_centered);
    const double h_lo = sup_of(rep.hnorm_moments[li].est_abs);
    const double h_hi = sup_of(rep.hnorm_moments[li + 1].est_abs);
    const double up_s = std::max(0.0, (s_hi - s_lo) / std::max(s_lo, 1e-12));
    const double up_h = std::max(0.0, (h_hi - h_lo) / std::max(h_lo, 1e-12));
    rep.max_rel_increase = std::max({rep.max_rel_increase, up_s, up_h});
  }
  if (rep.max_rel_increase > kStabilizationTol) {
    rep.verdict = false;
    if (rep.first_violation.empty())
      rep.first_violation = format_msg(
          "across-level sup grows by %.3g relative between successive levels "
          "(tolerance %.3g)",
          rep.max_rel_increase, kStabilizationTol);
  }
  return rep;
}

ConvergenceReport convergence_report(const ModelSpec& model,
                                     const CutoffFamily& family,
                                     const std::vector<int>& levels, int n_ref,
                                     const TimeGrid& grid, double p,
                                     long samples, std::uint64_t seed0,
                                     const ExecPolicy& exec) {
  if (levels.empty())
    throw ConfigError("convergence report requires at least one level");
  if (samples < 2)
    throw ConfigError("convergence report requires samples >= 2");
  const int n_max_level = *std::max_element(levels.begin(), levels.end());
  if (n_ref <= n_max_level)
    throw ConfigError("reference level must exceed every compared level");

  const int d = model.dim;
  const std::size_t n_levels = levels.size();
  std::vector<TruncatedModel> tms;
  tms.reserve(n_levels);
  for (int n : levels) tms.push_back(make_truncated(model, n, family));
  const TruncatedModel ref = make_truncated(model, n_ref, family);
  const long last = grid.steps;

  struct ConvBlock {
    std::vector<double> s1, s2;
    std::vector<long> settled;
    bool zero_ok = true;
  };
  const long n_blocks = (samples + kBlockSize - 1) / kBlockSize;
  std::vector<ConvBlock> blocks(static_cast<std::size_t>(n_blocks));

  for_each_block(samples, exec, [&](long lo, long hi, long bi) {
    ConvBlock& acc = blocks[static_cast<std::size_t>(bi)];
    acc.s1.assign(n_levels, 0.0);
    acc.s2.assign(n_levels, 0.0);
    acc.settled.assign(n_levels, 0);
    for (long i = lo; i < hi; ++i) {
      const NoisePath noise =
          sample_noise(grid, d, seed0 + static_cast<std::uint64_t>(i));
      const PathSolution pref = euler_truncated(ref, noise);
      for (std::size_t li = 0; li < n_levels; ++li) {
        const PathSolution pn = euler_truncated(tms[li], noise);
        const double gap2 =
            (pn.states.row(last) - pref.states.row(last)).squaredNorm();
        const double v = power_of_sq(gap2, p);
        acc.s1[li] += v;
        acc.s2[li] += v * v;
        if (pn.settled_level == levels[li]) {
          ++acc.settled[li];
          if (v != 0.0) acc.zero_ok = false;
        }
      }
    }
  });

  ConvergenceReport rep;
  rep.levels = levels;
  rep.n_ref = n_ref;
  rep.p = p;
  rep.samples = samples;
  rep.seed_lo = seed0;
  rep.seed_hi = seed0 + static_cast<std::uint64_t>(samples) - 1;
  rep.gap.assign(n_levels, 0.0);
  rep.se.assign(n_levels, 0.0);
  rep.settled_fraction.assign(n_levels, 0.0);

  std::vector<double> t1(n_levels, 0.0), t2(n_levels, 0.0);
  std::vector<long> settled(n_levels, 0);
  for (const ConvBlock& acc : blocks) {
    rep.settled_gaps_zero = rep.settled_gaps_zero && acc.zero_ok;
    for (std::size_t li = 0; li < n_levels; ++li) {
      t1[li] += acc.s1[li];
      t2[li] += acc.s2[li];
      settled[li] += acc.settled[li];
    }
  }
  const double m = static_cast<double>(samples);
  for (std::size_t li = 0; li < n_levels; ++li) {
    rep.gap[li] = t1[li] / m;
    const double var =
        std::max(0.0, (t2[li] - t1[li] * t1[li] / m) / (m - 1.0));
    rep.se[li] = std::sqrt(var / m);
    rep.settled_fraction[li] = static_cast<double>(settled[li]) / m;
  }
  for (std::size_t li = 0; li + 1 < n_levels; ++li) {
    if (rep.gap[li + 1] > rep.gap[li] + 3.0 * (rep.se[li] + rep.se[li + 1]))
      rep.monotone_trend = false;
  }
  return rep;
}

}  // namespace msde
