#include "msde/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "msde/errors.hpp"

namespace msde {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream ofs(path, std::ios::binary);
  if (!ofs) {
    throw std::runtime_error("cannot open output file: " + path);
  }
  return ofs;
}

}  // namespace

void write_moments_csv(const std::string& path,
                       const std::vector<MomentReport>& reports, bool centered,
                       const std::vector<std::vector<double>>* bounds) {
  auto ofs = open_csv(path);
  ofs << "level,t,p,estimate,stderr,bound\n";
  for (std::size_t ri = 0; ri < reports.size(); ++ri) {
    const auto& rep = reports[ri];
    const auto& est = centered ? rep.est_centered : rep.est_abs;
    const auto& se = centered ? rep.se_centered : rep.se_abs;
    const std::vector<double>* curve =
        (bounds != nullptr && ri < bounds->size()) ? &(*bounds)[ri] : nullptr;
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
      const double b =
          (curve != nullptr && k < curve->size()) ? (*curve)[k] : std::nan("");
      ofs << rep.level << ',' << fmt_double(rep.times[k]) << ','
          << fmt_double(rep.p) << ',' << fmt_double(est[k]) << ','
          << fmt_double(se[k]) << ',' << fmt_double(b) << '\n';
    }
  }
}

void write_convergence_csv(const std::string& path,
                           const ConvergenceReport& rep) {
  auto ofs = open_csv(path);
  ofs << "n,p,gap,stderr,settled_fraction\n";
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    ofs << rep.levels[i] << ',' << fmt_double(rep.p) << ','
        << fmt_double(rep.gap[i]) << ',' << fmt_double(rep.se[i]) << ','
        << fmt_double(rep.settled_fraction[i]) << '\n';
  }
}

void write_first_field_csv(const std::string& path,
                           const FirstDerivField& field,
                           const std::vector<long>& t_indices) {
  auto ofs = open_csv(path);
  ofs << "r,t,i,j,value\n";
  const int d = field.dim();
  for (long t : t_indices) {
    for (long r = 0; r <= t; ++r) {
      const Mat& m = field.at(r, t);
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          ofs << r << ',' << t << ',' << i << ',' << j << ','
              << fmt_double(m(i, j)) << '\n';
        }
      }
    }
  }
}

void write_second_field_csv(const std::string& path,
                            const SecondDerivField& field, long pair_stride) {
  auto ofs = open_csv(path);
  ofs << "r,tau,t,i,j,k,value\n";
  const int d = field.dim();
  const long stride = pair_stride < 1 ? 1 : pair_stride;
  for (long t : field.output_times()) {
    for (long r = 0; r <= t; r += stride) {
      for (long tau = 0; tau <= t; tau += stride) {
        const Tensor3& u = field.at(r, tau, t);
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
              ofs << r << ',' << tau << ',' << t << ',' << i << ',' << j << ','
                  << k << ',' << fmt_double(u(i, j, k)) << '\n';
            }
          }
        }
      }
    }
  }
}

void write_paths_csv(const std::string& path,
                     const std::vector<PathSolution>& paths) {
  auto ofs = open_csv(path);
  ofs << "seed,t";
  const int d = paths.empty() ? 0 : paths.front().dim;
  for (int j = 1; j <= d; ++j) {
    ofs << ",x" << j;
  }
  ofs << '\n';
  for (const auto& sol : paths) {
    if (sol.dim != d) {
      throw ConfigError("paths csv: mixed state dimensions");
    }
    for (long k = 0; k <= sol.steps(); ++k) {
      ofs << sol.seed << ',' << fmt_double(sol.grid.time(k));
      for (int j = 0; j < d; ++j) {
        ofs << ',' << fmt_double(sol.states(k, j));
      }
      ofs << '\n';
    }
  }
}

void write_noise_csv(const std::string& path,
                     const std::vector<NoisePath>& noises) {
  auto ofs = open_csv(path);
  ofs << "seed,k,t";
  const int d = noises.empty() ? 0 : noises.front().dim;
  for (int j = 1; j <= d; ++j) {
    ofs << ",dw" << j;
  }
  ofs << '\n';
  for (const auto& noise : noises) {
    if (noise.dim != d) {
      throw ConfigError("noise csv: mixed noise dimensions");
    }
    for (long k = 0; k < noise.grid.steps; ++k) {
      ofs << noise.seed << ',' << k << ',' << fmt_double(noise.grid.time(k));
      for (int j = 0; j < d; ++j) {
        ofs << ',' << fmt_double(noise.increments(k, j));
      }
      ofs << '\n';
    }
  }
}

void write_phi_profile_csv(const std::string& path, const CutoffFamily& family,
                           const std::vector<int>& levels,
                           int points_per_level) {
  if (points_per_level < 2) {
    throw ConfigError("phi profile csv: need at least 2 points per level");
  }
  auto ofs = open_csv(path);
  ofs << "n,radius,phi,dphi,d2phi\n";
  Vec x = Vec::Zero(family.dim());
  Vec g(family.dim());
  Mat h(family.dim(), family.dim());
  for (int n : levels) {
    const double rmax = 2.5 * family.radius_identity(n);
    for (int i = 0; i < points_per_level; ++i) {
      const double radius = rmax * static_cast<double>(i) /
                            static_cast<double>(points_per_level - 1);
      x[0] = radius;
      const double phi = family.value(n, x);
      family.gradient(n, x, g);
      family.hessian(n, x, h);
      ofs << n << ',' << fmt_double(radius) << ',' << fmt_double(phi) << ','
          << fmt_double(g[0]) << ',' << fmt_double(h(0, 0)) << '\n';
    }
  }
}

void write_hypothesis_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, HypothesisReport>>& checks) {
  auto ofs = open_csv(path);
  ofs << "check,passed,violations,samples\n";
  for (const auto& [name, rep] : checks) {
    ofs << name << ',' << (rep.passed ? 1 : 0) << ',' << rep.violation_count
        << ',' << rep.samples_used << '\n';
  }
}

void write_certification_csv(const std::string& path,
                             const HypothesisReport& rep) {
  auto ofs = open_csv(path);
  ofs << "key,value\n";
  for (const auto& [key, value] : rep.measurements) {
    ofs << key << ',' << fmt_double(value) << '\n';
  }
  ofs << "passed," << (rep.passed ? 1 : 0) << '\n';
}

void write_oracles_csv(const std::string& path,
                       const std::vector<OracleRow>& rows) {
  auto ofs = open_csv(path);
  ofs << "check,value,threshold,passed\n";
  for (const auto& row : rows) {
    ofs << row.check << ',' << fmt_double(row.value) << ','
        << fmt_double(row.threshold) << ',' << (row.passed ? 1 : 0) << '\n';
  }
}

}  // namespace msde
