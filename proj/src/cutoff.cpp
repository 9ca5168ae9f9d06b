#include "msde/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include "msde/errors.hpp"
#include "msde/rng.hpp"

namespace msde {

namespace {

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence.
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  const int half = (m + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double p0 = 0.0, p1 = 0.0, dp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < m; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      dp = m * (t * p0 - p1) / (t * t - 1.0);
      const double step = p0 / dp;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    x[i] = -t;
    x[m - 1 - i] = t;
    w[i] = w[m - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

double MollifierKernel::raw(double u) const {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

MollifierKernel::MollifierKernel() {
  gauss_legendre(16, gl_nodes_, gl_weights_);

  cum_.assign(kPanels + 1, 0.0);
  const double h = 2.0 / kPanels;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = -1.0 + k * h;
    cum_[k + 1] = cum_[k] + panel_integral(lo, lo + h);
  }
  z_ = cum_[kPanels];
  sup_ = raw(0.0) / z_;

  const int grid = 100000;
  double best_u = 0.0;
  for (int i = 1; i < grid; ++i) {
    const double u = -1.0 + 2.0 * i / grid;
    const double v = std::abs(density_deriv(u));
    if (v > deriv_sup_) {
      deriv_sup_ = v;
      best_u = u;
    }
  }
  // Ternary-search polish around the grid argmax; the grid alone can
  // undershoot the smooth maximum by more than the certification slack.
  double lo = best_u - 2.0 / grid;
  double hi = best_u + 2.0 / grid;
  for (int it = 0; it < 200; ++it) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (std::abs(density_deriv(m1)) < std::abs(density_deriv(m2))) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  deriv_sup_ =
      std::max(deriv_sup_, std::abs(density_deriv(0.5 * (lo + hi))));
}

double MollifierKernel::panel_integral(double lo, double hi) const {
  const double mid = 0.5 * (lo + hi);
  const double rad = 0.5 * (hi - lo);
  double acc = 0.0;
  for (std::size_t q = 0; q < gl_nodes_.size(); ++q)
    acc += gl_weights_[q] * raw(mid + rad * gl_nodes_[q]);
  return acc * rad;
}

double MollifierKernel::density(double u) const { return raw(u) / z_; }

double MollifierKernel::density_deriv(double u) const {
  if (std::abs(u) >= 1.0) return 0.0;
  const double g = 1.0 - u * u;
  return density(u) * (-2.0 * u / (g * g));
}

double MollifierKernel::cdf(double t) const {
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double h = 2.0 / kPanels;
  int k = static_cast<int>((t + 1.0) / h);
  k = std::clamp(k, 0, kPanels - 1);
  const double lo = -1.0 + k * h;
  const double v = (cum_[k] + panel_integral(lo, t)) / z_;
  return std::clamp(v, 0.0, 1.0);
}

const MollifierKernel& standard_mollifier() {
  static const MollifierKernel kernel;
  return kernel;
}

CutoffFamily::CutoffFamily(double xi, int dim)
    : xi_(xi), dim_(dim), kernel_(&standard_mollifier()) {
  if (!(xi > 0.0)) throw ConfigError("cutoff family requires xi > 0");
  if (dim < 1) throw ConfigError("cutoff family requires dim >= 1");
}

double CutoffFamily::radius_identity(int n) const {
  if (n < 1) throw ConfigError("cutoff level must satisfy n >= 1");
  return std::pow(static_cast<double>(n), xi_);
}

double CutoffFamily::radius_support(int n) const {
  return 2.0 * radius_identity(n);
}

double CutoffFamily::epsilon(int n) const { return 0.5 * radius_identity(n); }

double CutoffFamily::profile(double s) const {
  return 1.0 - kernel_->cdf(2.0 * s - 1.0);
}

double CutoffFamily::profile_d1(double s) const {
  return -2.0 * kernel_->density(2.0 * s - 1.0);
}

double CutoffFamily::profile_d2(double s) const {
  return -4.0 * kernel_->density_deriv(2.0 * s - 1.0);
}

double CutoffFamily::profile_d1_sup() const { return 2.0 * kernel_->sup_norm(); }

double CutoffFamily::profile_d2_sup() const {
  return 4.0 * kernel_->deriv_sup_norm();
}

double CutoffFamily::value(int n, const Vec& x) const {
  const double rad = radius_identity(n);
  const double r = x.norm();
  if (r <= rad) return 1.0;
  if (r >= 2.0 * rad) return 0.0;
  return profile((r - rad) / rad);
}

void CutoffFamily::gradient(int n, const Vec& x, Vec& out) const {
  const double rad = radius_identity(n);
  const double r = x.norm();
  out.resize(x.size());
  if (r <= rad || r >= 2.0 * rad) {
    out.setZero();
    return;
  }
  const double d1 = profile_d1((r - rad) / rad);
  out = x * (d1 / (rad * r));
}

void CutoffFamily::hessian(int n, const Vec& x, Mat& out) const {
  const int d = static_cast<int>(x.size());
  const double rad = radius_identity(n);
  const double r = x.norm();
  out.resize(d, d);
  if (r <= rad || r >= 2.0 * rad) {
    out.setZero();
    return;
  }
  const double s = (r - rad) / rad;
  const double c_rad = profile_d2(s) / (rad * rad);
  const double c_tan = profile_d1(s) / (rad * r);
  const Vec unit = x / r;
  out = c_tan * Mat::Identity(d, d);
  out.noalias() += (c_rad - c_tan) * (unit * unit.transpose());
}

double CutoffFamily::hess_contract(int n, const Vec& x, const Vec& u,
                                   const Vec& v) const {
  const double rad = radius_identity(n);
  const double r = x.norm();
  if (r <= rad || r >= 2.0 * rad) return 0.0;
  const double s = (r - rad) / rad;
  const double c_rad = profile_d2(s) / (rad * rad);
  const double c_tan = profile_d1(s) / (rad * r);
  const double ux = u.dot(x) / r;
  const double vx = v.dot(x) / r;
  return c_rad * ux * vx + c_tan * (u.dot(v) - ux * vx);
}

TruncatedModel::TruncatedModel(ModelSpec base, int level, CutoffFamily family)
    : base_(std::move(base)), n_(level), family_(std::move(family)) {
  if (n_ < 1) throw ConfigError("truncation level must satisfy n >= 1");
  if (family_.dim() != base_.dim)
    throw ConfigError("cutoff family dimension does not match the model");

  spec_ = base_;
  const CutoffFamily fam = family_;
  const int n = n_;
  auto eval_b = base_.b;
  auto eval_jac = base_.b_jac;
  auto eval_hess = base_.b_hess;

  spec_.b = [fam, n, eval_b](const Vec& x, Vec& out) {
    const double phi = fam.value(n, x);
    if (phi == 0.0) {
      out.setZero(x.size());
      return;
    }
    eval_b(x, out);
    if (phi != 1.0) out *= phi;
  };

  spec_.b_jac = [fam, n, eval_b, eval_jac](const Vec& x, Mat& out) {
    const double phi = fam.value(n, x);
    if (phi == 0.0) {
      out.setZero(x.size(), x.size());
      return;
    }
    eval_jac(x, out);
    if (phi == 1.0) return;
    out *= phi;
    Vec g(x.size());
    fam.gradient(n, x, g);
    Vec bx(x.size());
    eval_b(x, bx);
    out.noalias() += bx * g.transpose();
  };

  spec_.b_hess = [fam, n, eval_b, eval_jac, eval_hess](const Vec& x,
                                                       Tensor3& out) {
    const int d = static_cast<int>(x.size());
    const double phi = fam.value(n, x);
    if (phi == 0.0) {
      out.resize(d);
      out.setZero();
      return;
    }
    eval_hess(x, out);
    if (phi == 1.0) return;
    Vec g(d);
    fam.gradient(n, x, g);
    Mat hphi(d, d);
    fam.hessian(n, x, hphi);
    Mat jb(d, d);
    eval_jac(x, jb);
    Vec bx(d);
    eval_b(x, bx);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c)
          out(i, a, c) = phi * out(i, a, c) + g[a] * jb(i, c) +
                         g[c] * jb(i, a) + bx[i] * hphi(a, c);
  };
}

std::string TruncatedModel::id() const {
  return base_.name + "[n=" + std::to_string(n_) + "]";
}

TruncatedModel make_truncated(const ModelSpec& model, int n,
                              const CutoffFamily& family) {
  return TruncatedModel(model, n, family);
}

HypothesisReport certify_uniform_bounds(const CutoffFamily& family,
                                        const ModelSpec& model,
                                        const std::vector<int>& orders,
                                        const std::vector<int>& n_range,
                                        long n_samples, std::uint64_t seed) {
  if (family.dim() != model.dim)
    throw ConfigError("cutoff family dimension does not match the model");
  if (n_range.empty())
    throw ConfigError("certification requires a nonempty level range");
  for (int n : n_range)
    if (n < 1) throw ConfigError("certification levels must satisfy n >= 1");
  if (n_samples < 8)
    throw ConfigError("certification requires at least 8 samples per level");

  std::vector<double> gamma(3, -1.0);
  for (int l : orders) {
    if (l != 1 && l != 2)
      throw ConfigError("only derivative orders 1 and 2 are certified");
    for (const GrowthEntry& e : model.growth)
      if (e.order == l) gamma[l] = e.gamma;
    if (gamma[l] < 0.0)
      throw ConfigError("model metadata lacks a growth entry for order " +
                        std::to_string(l));
  }

  HypothesisReport rep;
  const int d = model.dim;
  NormalSampler rng(seed);
  const double psi_sup = family.kernel().sup_norm();
  const double c1 = family.profile_d1_sup();
  const double c2 = std::sqrt(family.profile_d2_sup() * family.profile_d2_sup() +
                              (d - 1) * c1 * c1);
  const double tol = 1.0 + 1e-9;
  const bool want1 = std::count(orders.begin(), orders.end(), 1) > 0;
  const bool want2 = std::count(orders.begin(), orders.end(), 2) > 0;

  double scaled1 = 0.0, scaled2 = 0.0, fd_worst = 0.0;
  Vec g(d), bx(d), fd(d), xp, xm;
  Mat hs(d, d);

  for (int n : n_range) {
    const double rad = family.radius_identity(n);
    rep.domain_radius = std::max(rep.domain_radius, 3.0 * rad);
    const long m_side = std::max<long>(2, n_samples / 4);

    for (long i = 0; i < m_side; ++i) {
      const Vec x = rng.next_in_ball(d, rad);
      const double v = family.value(n, x);
      ++rep.samples_used;
      if (v != 1.0) rep.record({"identity_exact", x, Vec(), v, 1.0});
    }
    for (long i = 0; i < m_side; ++i) {
      const double r = 2.0 * rad + rng.next_uniform() * rad;
      const Vec x = r * rng.next_direction(d);
      const double v = family.value(n, x);
      ++rep.samples_used;
      if (v != 0.0) rep.record({"support_exact", x, Vec(), v, 0.0});
    }

    std::vector<std::pair<double, double>> shell;
    shell.reserve(static_cast<std::size_t>(n_samples));
    double a1 = 0.0, a2 = 0.0, p1 = 0.0, p2 = 0.0;
    for (long i = 0; i < n_samples; ++i) {
      const double r = rad * (1.0 + rng.next_uniform());
      const Vec x = r * rng.next_direction(d);
      const double v = family.value(n, x);
      ++rep.samples_used;
      if (v < 0.0 || v > 1.0) rep.record({"range", x, Vec(), v, 1.0});
      shell.emplace_back(r, v);

      family.gradient(n, x, g);
      const double gn = g.norm();
      a1 = std::max(a1, gn);
      family.hessian(n, x, hs);
      const double hn = hs.norm();
      a2 = std::max(a2, hn);
      model.b(x, bx);
      p1 = std::max(p1, std::abs(bx.dot(g)));
      p2 = std::max(p2, bx.norm() * hn);
    }

    std::sort(shell.begin(), shell.end());
    for (std::size_t i = 1; i < shell.size(); ++i) {
      if (shell[i].second > shell[i - 1].second + 1e-12) {
        Vec r0(1), r1(1);
        r0[0] = shell[i - 1].first;
        r1[0] = shell[i].first;
        rep.record({"radial_monotone", r0, r1, shell[i].second,
                    shell[i - 1].second});
      }
    }

    for (int i = 0; i < 16; ++i) {
      const double r = rad * (1.25 + 0.5 * rng.next_uniform());
      const Vec x = r * rng.next_direction(d);
      family.gradient(n, x, g);
      const double h = 1e-6 * (1.0 + r);
      fd.resize(d);
      for (int a = 0; a < d; ++a) {
        xp = x;
        xm = x;
        xp[a] += h;
        xm[a] -= h;
        fd[a] = (family.value(n, xp) - family.value(n, xm)) / (2.0 * h);
      }
      ++rep.samples_used;
      const double rel = (fd - g).norm() / g.norm();
      fd_worst = std::max(fd_worst, rel);
      if (rel > 1e-4) rep.record({"gradient_fd", x, Vec(), rel, 1e-4});
    }

    scaled1 = std::max(scaled1, a1 * rad);
    scaled2 = std::max(scaled2, a2 * rad * rad);
    if (want1) {
      rep.measurements["order1_product_n" + std::to_string(n)] = p1;
      if (a1 * rad > c1 * tol) {
        Vec lvl(1);
        lvl[0] = n;
        rep.record({"scaled_gradient_uniformity", lvl, Vec(), a1 * rad, c1});
      }
    }
    if (want2) {
      rep.measurements["order2_product_n" + std::to_string(n)] = p2;
      if (a2 * rad * rad > c2 * tol) {
        Vec lvl(1);
        lvl[0] = n;
        rep.record({"scaled_hessian_uniformity", lvl, Vec(), a2 * rad * rad,
                    c2});
      }
    }
  }

  if (want1) {
    rep.measurements["order1_scaled_sup"] = scaled1;
    rep.measurements["order1_kernel_const"] = c1;
    rep.measurements["order1_product_ref"] =
        std::ldexp(gamma[1] * psi_sup, 1) * std::pow(2.0, family.xi());
  }
  if (want2) {
    rep.measurements["order2_scaled_sup"] = scaled2;
    rep.measurements["order2_kernel_const"] = c2;
    rep.measurements["order2_product_ref"] =
        std::ldexp(gamma[2] * psi_sup, 1) * std::pow(2.0, family.xi());
  }
  rep.measurements["grad_fd_worst_rel"] = fd_worst;
  rep.passed = rep.violation_count == 0;
  return rep;
}

}  // namespace msde
