#include "msde/malliavin.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <utility>

#include "msde/errors.hpp"

namespace msde {

FirstDerivField::FirstDerivField(TimeGrid grid, int dim)
    : grid_(grid), dim_(dim) {
  const long n = grid_.steps;
  data_.assign(static_cast<std::size_t>((n + 1) * (n + 2) / 2), Mat());
  zero_ = Mat::Zero(dim, dim);
}

long FirstDerivField::index(long r, long t) const {
  return t * (t + 1) / 2 + r;
}

const Mat& FirstDerivField::at(long r, long t) const {
  if (r < 0 || t < 0 || r > grid_.steps || t > grid_.steps)
    throw ConfigError("derivative field index out of range");
  if (r > t) return zero_;
  return data_[static_cast<std::size_t>(index(r, t))];
}

Mat& FirstDerivField::slot(long r, long t) {
  return data_[static_cast<std::size_t>(index(r, t))];
}

SecondDerivField::SecondDerivField(TimeGrid grid, int dim,
                                   std::vector<long> output_times)
    : grid_(grid), dim_(dim), touts_(std::move(output_times)) {
  if (touts_.empty()) touts_.push_back(grid_.steps);
  std::sort(touts_.begin(), touts_.end());
  touts_.erase(std::unique(touts_.begin(), touts_.end()), touts_.end());
  for (long t : touts_)
    if (t < 0 || t > grid_.steps)
      throw ConfigError("output index out of range for the grid");
  data_.resize(touts_.size());
  for (std::size_t s = 0; s < touts_.size(); ++s)
    data_[s].assign(static_cast<std::size_t>((touts_[s] + 1) * (touts_[s] + 1)),
                    Tensor3());
  zero_.resize(dim_);
  zero_.setZero();
}

long SecondDerivField::tout_slot(long t_out) const {
  const auto it = std::find(touts_.begin(), touts_.end(), t_out);
  if (it == touts_.end())
    throw ConfigError("index is not an output index of this field");
  return it - touts_.begin();
}

const Tensor3& SecondDerivField::at(long r, long tau, long t_out) const {
  const long s = tout_slot(t_out);
  if (r < 0 || tau < 0 || r > grid_.steps || tau > grid_.steps)
    throw ConfigError("derivative field index out of range");
  if (r > t_out || tau > t_out) return zero_;
  return data_[static_cast<std::size_t>(s)]
              [static_cast<std::size_t>(r * (t_out + 1) + tau)];
}

Tensor3& SecondDerivField::slot(long r, long tau, long t_out) {
  const long s = tout_slot(t_out);
  return data_[static_cast<std::size_t>(s)]
              [static_cast<std::size_t>(r * (t_out + 1) + tau)];
}

CMDirection CMDirection::constant(const Vec& value) {
  CMDirection dir;
  dir.dim = static_cast<int>(value.size());
  const Vec v = value;
  dir.h = [v](double) { return v; };
  return dir;
}

CMDirection CMDirection::zero(int dim) { return constant(Vec::Zero(dim)); }

CMDirection CMDirection::pulse(int dim, int coord, double t_lo, double t_hi,
                               double height) {
  if (coord < 0 || coord >= dim)
    throw ConfigError("pulse coordinate out of range");
  if (!(t_lo < t_hi)) throw ConfigError("pulse window must satisfy t_lo < t_hi");
  CMDirection dir;
  dir.dim = dim;
  dir.h = [dim, coord, t_lo, t_hi, height](double t) {
    Vec v = Vec::Zero(dim);
    if (t >= t_lo && t < t_hi) v[coord] = height;
    return v;
  };
  return dir;
}

std::vector<Mat> linear_step_maps(const TruncatedModel& tm,
                                  const PathSolution& path,
                                  const NoisePath& noise) {
  if (!path.grid.same_as(noise.grid))
    throw ConfigError("path and noise grids do not match");
  const ModelSpec& m = tm.spec();
  if (m.dim != path.dim || m.dim != noise.dim)
    throw ConfigError("model, path, and noise dimensions do not match");

  const int d = m.dim;
  const long n = noise.grid.steps;
  const double dt = noise.grid.dt();

  std::vector<Mat> maps;
  maps.reserve(static_cast<std::size_t>(n));
  Mat jb(d, d), jf(d, d);
  std::vector<Mat> js;
  for (long k = 0; k < n; ++k) {
    const Vec x = path.state(k);
    m.b_jac(x, jb);
    m.f_jac(x, jf);
    m.sigma_jac(x, js);
    Mat a = Mat::Identity(d, d) + (jb + jf) * dt;
    for (int l = 0; l < d; ++l) a.noalias() += js[l] * noise.increments(k, l);
    maps.push_back(std::move(a));
  }
  return maps;
}

FirstDerivField propagate_first(const TruncatedModel& tm,
                                const PathSolution& path,
                                const NoisePath& noise) {
  const std::vector<Mat> maps = linear_step_maps(tm, path, noise);
  const int d = tm.spec().dim;
  const long n = noise.grid.steps;

  FirstDerivField field(noise.grid, d);
  Mat sg(d, d);
  for (long r = 0; r <= n; ++r) {
    tm.spec().sigma(path.state(r), sg);
    field.slot(r, r) = sg;
    Mat cur = sg;
    for (long k = r; k < n; ++k) {
      Mat& next = field.slot(r, k + 1);
      next = maps[k] * cur;
      if (!next.allFinite())
        throw ExplosionError("non-finite first-order derivative entry", k,
                             noise.seed);
      cur = next;
    }
  }
  return field;
}

Tensor3 second_initial(const TruncatedModel& tm, const PathSolution& path,
                       const FirstDerivField& first, long r, long tau) {
  const int d = tm.spec().dim;
  const long n = first.steps();
  if (r < 0 || tau < 0 || r > n || tau > n)
    throw ConfigError("initialization indices out of range");

  const long t0 = std::max(r, tau);
  std::vector<Mat> js;
  tm.spec().sigma_jac(path.state(t0), js);

  Tensor3 out;
  out.resize(d);
  out.setZero();
  if (tau < r) {
    const Mat& dd = first.at(tau, r);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double acc = 0.0;
          for (int a = 0; a < d; ++a) acc += js[j](i, a) * dd(a, k);
          out(i, j, k) = acc;
        }
  } else if (r < tau) {
    const Mat& dd = first.at(r, tau);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double acc = 0.0;
          for (int a = 0; a < d; ++a) acc += js[k](i, a) * dd(a, j);
          out(i, j, k) = acc;
        }
  } else {
    const Mat& dd = first.at(r, r);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double acc_jk = 0.0;
          for (int a = 0; a < d; ++a) acc_jk += js[j](i, a) * dd(a, k);
          double acc_kj = 0.0;
          for (int a = 0; a < d; ++a) acc_kj += js[k](i, a) * dd(a, j);
          out(i, j, k) = acc_jk + acc_kj;
        }
  }
  return out;
}

SecondDerivField propagate_second(const TruncatedModel& tm,
                                  const PathSolution& path,
                                  const NoisePath& noise,
                                  const FirstDerivField& first,
                                  std::vector<long> output_times) {
  if (!first.grid().same_as(noise.grid))
    throw ConfigError("field and noise grids do not match");
  const int d = tm.spec().dim;
  if (first.dim() != d)
    throw ConfigError("field and model dimensions do not match");

  SecondDerivField field(noise.grid, d, std::move(output_times));
  const std::vector<long>& touts = field.output_times();
  const long t_last = touts.back();
  const double dt = noise.grid.dt();

  const std::vector<Mat> maps = linear_step_maps(tm, path, noise);
  std::vector<Tensor3> hb(static_cast<std::size_t>(t_last)),
      hf(static_cast<std::size_t>(t_last));
  std::vector<std::vector<Tensor3>> hsig(static_cast<std::size_t>(t_last));
  for (long s = 0; s < t_last; ++s) {
    const Vec x = path.state(s);
    tm.spec().b_hess(x, hb[s]);
    tm.spec().f_hess(x, hf[s]);
    tm.spec().sigma_hess(x, hsig[s]);
  }

  Vec fcol(d), gcol(d), u(d), au(d), hv_b(d), hv_f(d), hv_s(d);
  Tensor3 cur, nxt;
  nxt.resize(d);
  for (long r = 0; r <= t_last; ++r) {
    for (long tau = 0; tau <= t_last; ++tau) {
      const long t0 = std::max(r, tau);
      cur = second_initial(tm, path, first, r, tau);
      for (long t = t0; t <= t_last; ++t) {
        if (std::binary_search(touts.begin(), touts.end(), t)) {
          if (!std::isfinite(cur.max_abs()))
            throw ExplosionError("non-finite second-order derivative entry", t,
                                 noise.seed);
          field.slot(r, tau, t) = cur;
        }
        if (t == t_last) break;
        const Mat& a = maps[t];
        const Mat& first_tau = first.at(tau, t);
        const Mat& first_r = first.at(r, t);
        for (int k = 0; k < d; ++k) {
          fcol = first_tau.col(k);
          for (int j = 0; j < d; ++j) {
            gcol = first_r.col(j);
            for (int i = 0; i < d; ++i) u[i] = cur(i, j, k);
            au.noalias() = a * u;
            hb[t].contract_sym(fcol, gcol, hv_b);
            hf[t].contract_sym(fcol, gcol, hv_f);
            for (int i = 0; i < d; ++i)
              nxt(i, j, k) = au[i] + (hv_b[i] + hv_f[i]) * dt;
            for (int l = 0; l < d; ++l) {
              hsig[t][l].contract_sym(fcol, gcol, hv_s);
              const double dw = noise.increments(t, l);
              for (int i = 0; i < d; ++i) nxt(i, j, k) += hv_s[i] * dw;
            }
          }
        }
        std::swap(cur, nxt);
      }
    }
  }
  return field;
}

double hnorm_sq(const FirstDerivField& first, long t_index) {
  if (t_index < 0 || t_index > first.steps())
    throw ConfigError("output index out of range for the grid");
  double acc = 0.0;
  for (long r = 0; r < t_index; ++r) acc += first.at(r, t_index).squaredNorm();
  return acc * first.grid().dt();
}

CameronMartinReport cameron_martin_check(const TruncatedModel& tm,
                                         const NoisePath& noise,
                                         const CMDirection& h, double eps) {
  if (!(eps > 0.0)) throw ConfigError("shift size eps must be positive");
  if (h.dim != tm.spec().dim)
    throw ConfigError("direction and model dimensions do not match");

  const long n = noise.grid.steps;
  const double dt = noise.grid.dt();

  const PathSolution base = euler_truncated(tm, noise);
  const FirstDerivField first = propagate_first(tm, base, noise);

  NoisePath shifted = noise;
  shifted.generator_id = noise.generator_id + "+shift";
  for (long k = 0; k < n; ++k)
    shifted.increments.row(k) +=
        (eps * dt) * h.eval(noise.grid.time(k)).transpose();
  const PathSolution bumped = euler_truncated(tm, shifted);

  CameronMartinReport rep;
  rep.lhs = (bumped.state(n) - base.state(n)) / eps;
  rep.rhs = Vec::Zero(h.dim);
  for (long r = 0; r < n; ++r)
    rep.rhs += first.at(r, n) * h.eval(noise.grid.time(r)) * dt;
  const double denom = std::max(rep.lhs.norm(), rep.rhs.norm());
  rep.rel_err = denom == 0.0 ? 0.0 : (rep.lhs - rep.rhs).norm() / denom;
  return rep;
}

FlowCheckReport flow_factorization_check(const TruncatedModel& tm,
                                         const PathSolution& path,
                                         const NoisePath& noise,
                                         const FirstDerivField& first) {
  const std::vector<Mat> maps = linear_step_maps(tm, path, noise);
  const int d = tm.spec().dim;
  const long n = noise.grid.steps;

  std::vector<Mat> flow(static_cast<std::size_t>(n + 1));
  flow[0] = Mat::Identity(d, d);
  for (long k = 0; k < n; ++k) flow[k + 1] = maps[k] * flow[k];

  FlowCheckReport rep;
  const long stride = std::max<long>(1, n / 16);
  Mat sg(d, d);
  for (long r = 0; r <= n; r += stride) {
    Eigen::PartialPivLU<Mat> lu(flow[static_cast<std::size_t>(r)]);
    if (lu.rcond() < 1e-12) {
      ++rep.pairs_skipped;
      continue;
    }
    tm.spec().sigma(path.state(r), sg);
    const Mat w = lu.solve(sg);
    for (long t = r; t <= n; t += stride) {
      const Mat gap = flow[static_cast<std::size_t>(t)] * w - first.at(r, t);
      rep.max_gap = std::max(rep.max_gap, gap.cwiseAbs().maxCoeff());
      ++rep.pairs_checked;
    }
  }
  return rep;
}

}  // namespace msde
