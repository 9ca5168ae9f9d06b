#include "msde/model.hpp"

#include <cmath>
#include <stdexcept>

#include "msde/errors.hpp"
#include "msde/rng.hpp"

namespace msde {

void HypothesisReport::record(Violation v) {
  ++violation_count;
  passed = false;
  if (static_cast<int>(violations.size()) < kMaxStoredViolations) {
    violations.push_back(std::move(v));
  }
}

double monotonicity_tolerance(double gap_sq) { return 1e-9 * (1.0 + gap_sq); }

HypothesisReport check_semi_monotone(const ModelSpec& model, double radius,
                                     long n_pairs, std::uint64_t seed) {
  if (!(radius > 0.0)) throw ConfigError("check_semi_monotone: radius must be > 0");
  HypothesisReport rep;
  rep.domain_radius = radius;
  NormalSampler rng(seed);
  Vec bx(model.dim), by(model.dim);
  double worst = -1e300;
  for (long it = 0; it < n_pairs; ++it) {
    const Vec x = rng.next_in_ball(model.dim, radius);
    const Vec y = rng.next_in_ball(model.dim, radius);
    const double gap_sq = (y - x).squaredNorm();
    if (gap_sq == 0.0) continue;
    model.b(x, bx);
    model.b(y, by);
    const double measured = (by - bx).dot(y - x);
    const double allowed = -model.K * gap_sq + monotonicity_tolerance(gap_sq);
    worst = std::max(worst, measured + model.K * gap_sq);
    ++rep.samples_used;
    if (measured > allowed) {
      rep.record({"semi_monotone", x, y, measured, allowed});
    }
  }
  rep.measurements["worst_margin"] = worst;
  return rep;
}

HypothesisReport check_dissipativity(const ModelSpec& model, double radius,
                                     long n_samples, std::uint64_t seed) {
  if (!(radius > 0.0)) throw ConfigError("check_dissipativity: radius must be > 0");
  HypothesisReport rep;
  rep.domain_radius = radius;
  NormalSampler rng(seed);
  Mat jac(model.dim, model.dim);
  double worst = -1e300;
  for (long it = 0; it < n_samples; ++it) {
    const Vec x = rng.next_in_ball(model.dim, radius);
    const Vec y = rng.next_in_ball(model.dim, radius);
    const double y_sq = y.squaredNorm();
    if (y_sq == 0.0) continue;
    model.b_jac(x, jac);
    const double measured = y.dot(jac * y);
    const double allowed = -model.K * y_sq + monotonicity_tolerance(y_sq);
    worst = std::max(worst, measured + model.K * y_sq);
    ++rep.samples_used;
    if (measured > allowed) {
      rep.record({"dissipativity", x, y, measured, allowed});
    }
  }
  rep.measurements["worst_margin"] = worst;
  return rep;
}

namespace {

double tensor_frobenius_sq(const Tensor3& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return s;
}

}  // namespace

HypothesisReport check_growth_metadata(const ModelSpec& model, double radius,
                                       long n_samples, std::uint64_t seed) {
  HypothesisReport rep;
  rep.domain_radius = radius;
  NormalSampler rng(seed);

  Mat jac(model.dim, model.dim);
  Tensor3 hess(model.dim);
  Vec fx(model.dim), fy(model.dim);
  Mat sx(model.dim, model.dim), sy(model.dim, model.dim);

  double max_q = 0.0;
  for (const GrowthEntry& g : model.growth) {
    if (g.order >= 1) max_q = std::max(max_q, g.q);
    if (g.order > 2) rep.measurements["unchecked_order_" + std::to_string(g.order)] = 1.0;
  }
  rep.measurements["max_declared_q"] = max_q;
  rep.measurements["xi_covers_declared_growth"] = (model.xi >= max_q) ? 1.0 : 0.0;

  for (long it = 0; it < n_samples; ++it) {
    const Vec x = rng.next_in_ball(model.dim, radius);
    const Vec y = rng.next_in_ball(model.dim, radius);
    const double r2 = x.squaredNorm();
    ++rep.samples_used;

    for (const GrowthEntry& g : model.growth) {
      double deriv_sq = 0.0;
      if (g.order == 1) {
        model.b_jac(x, jac);
        deriv_sq = jac.squaredNorm();
      } else if (g.order == 2) {
        model.b_hess(x, hess);
        deriv_sq = tensor_frobenius_sq(hess);
      } else {
        continue;
      }
      const double envelope = g.gamma * (1.0 + std::pow(std::sqrt(r2), g.q));
      if (deriv_sq > envelope * (1.0 + 1e-9) + 1e-12) {
        rep.record({"growth_order_" + std::to_string(g.order), x, Vec(),
                    deriv_sq, envelope});
      }
    }

    // Lipschitz and linear-growth declarations for f and sigma.
    const double dist = (y - x).norm();
    model.f(x, fx);
    model.f(y, fy);
    model.sigma(x, sx);
    model.sigma(y, sy);
    const double slack = 1e-9 * (1.0 + dist) + 1e-12;
    if ((fy - fx).norm() > model.k1 * dist + slack) {
      rep.record({"f_lipschitz", x, y, (fy - fx).norm(), model.k1 * dist});
    }
    if ((sy - sx).norm() > model.k1 * dist + slack) {
      rep.record({"sigma_lipschitz", x, y, (sy - sx).norm(), model.k1 * dist});
    }
    const double lin = model.k1 * (1.0 + std::sqrt(r2));
    if (fx.norm() > lin * (1.0 + 1e-9) + 1e-12) {
      rep.record({"f_linear_growth", x, Vec(), fx.norm(), lin});
    }
  }
  return rep;
}

namespace {

using EvalVec = std::function<void(const Vec&, Vec&)>;

void fd_jacobian(const EvalVec& g, const Vec& x, double h, Mat& out) {
  const int d = static_cast<int>(x.size());
  Vec hi(d), lo(d), xp;
  out.resize(d, d);
  for (int a = 0; a < d; ++a) {
    xp = x;
    xp[a] = x[a] + h;
    g(xp, hi);
    xp[a] = x[a] - h;
    g(xp, lo);
    out.col(a) = (hi - lo) / (2.0 * h);
  }
}

void fd_hessian(const EvalVec& g, const Vec& x, double h, Tensor3& out) {
  const int d = static_cast<int>(x.size());
  Vec pp(d), pm(d), mp(d), mm(d), xp;
  out.resize(d);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      xp = x;
      xp[a] += h;
      xp[b] += h;
      g(xp, pp);
      xp = x;
      xp[a] += h;
      xp[b] -= h;
      g(xp, pm);
      xp = x;
      xp[a] -= h;
      xp[b] += h;
      g(xp, mp);
      xp = x;
      xp[a] -= h;
      xp[b] -= h;
      g(xp, mm);
      for (int i = 0; i < d; ++i) {
        const double v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
        out(i, a, b) = v;
        out(i, b, a) = v;
      }
    }
  }
}

}  // namespace

HypothesisReport check_derivatives(const ModelSpec& model, double radius,
                                   long n_samples, std::uint64_t seed,
                                   double h1, double h2, double rel_tol) {
  HypothesisReport rep;
  rep.domain_radius = radius;
  NormalSampler rng(seed);
  const int d = model.dim;

  Mat jac(d, d), fd_jac(d, d);
  Tensor3 hess(d), fd_hess_t(d);
  std::vector<Mat> sjac;
  std::vector<Tensor3> shess;
  double worst = 0.0;

  auto check_jac = [&](const char* tag, const EvalVec& val, const Mat& analytic,
                       const Vec& x) {
    fd_jacobian(val, x, h1, fd_jac);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < d; ++a) {
        const double err =
            std::abs(analytic(i, a) - fd_jac(i, a)) / (1.0 + std::abs(analytic(i, a)));
        worst = std::max(worst, err);
        if (err > rel_tol) {
          rep.record({std::string(tag) + "_jacobian", x, Vec(), fd_jac(i, a),
                      analytic(i, a)});
          return;
        }
      }
  };
  auto check_hess = [&](const char* tag, const EvalVec& val,
                        const Tensor3& analytic, const Vec& x) {
    fd_hessian(val, x, h2, fd_hess_t);
    for (int i = 0; i < d; ++i)
      for (int a = 0; a < d; ++a)
        for (int bb = 0; bb < d; ++bb) {
          const double err = std::abs(analytic(i, a, bb) - fd_hess_t(i, a, bb)) /
                             (1.0 + std::abs(analytic(i, a, bb)));
          worst = std::max(worst, err);
          if (err > rel_tol) {
            rep.record({std::string(tag) + "_hessian", x, Vec(),
                        fd_hess_t(i, a, bb), analytic(i, a, bb)});
            return;
          }
        }
  };

  for (long it = 0; it < n_samples; ++it) {
    const Vec x = rng.next_in_ball(d, radius);
    ++rep.samples_used;

    model.b_jac(x, jac);
    check_jac("b", model.b, jac, x);
    model.f_jac(x, jac);
    check_jac("f", model.f, jac, x);
    model.b_hess(x, hess);
    check_hess("b", model.b, hess, x);
    model.f_hess(x, hess);
    check_hess("f", model.f, hess, x);

    model.sigma_jac(x, sjac);
    model.sigma_hess(x, shess);
    for (int l = 0; l < d; ++l) {
      EvalVec col = [&model, l](const Vec& p, Vec& out) {
        Mat s;
        model.sigma(p, s);
        out = s.col(l);
      };
      check_jac("sigma", col, sjac[l], x);
      check_hess("sigma", col, shess[l], x);
    }
  }
  rep.measurements["worst_relative_error"] = worst;
  return rep;
}

std::pair<double, double> growth_constants(const ModelSpec& model) {
  const Vec zero = Vec::Zero(model.dim);
  Vec b0(model.dim);
  Mat s0(model.dim, model.dim);
  model.b(zero, b0);
  model.sigma(zero, s0);
  const double alpha =
      std::max(0.5 * b0.squaredNorm() + model.k1 * model.k1, 2.0 * s0.squaredNorm());
  const double beta =
      std::max(-model.K + 1.0 + model.k1 * model.k1, 2.0 * model.k1 * model.k1);
  return {alpha, beta};
}

std::pair<double, double> moment_generator_constants(const ModelSpec& model,
                                                     double p) {
  if (!(p >= 1.0)) throw ConfigError("moment_generator_constants: p must be >= 1");
  const auto [alpha, beta] = growth_constants(model);
  const double alpha_p = p * (alpha + (p - 1.0) * model.k1 * model.k1);
  const double beta_p = p * (beta + (p - 1.0) * model.k1 * model.k1);
  return {alpha_p, beta_p};
}

double apply_generator(const ModelSpec& model, double p, const Vec& x) {
  if (!(p >= 2.0)) throw ConfigError("apply_generator: p must be >= 2");
  const int d = model.dim;
  Vec bx(d), fx(d);
  Mat sx(d, d);
  model.b(x, bx);
  model.f(x, fx);
  model.sigma(x, sx);

  const double r2 = x.squaredNorm();
  const double pm2 = (p == 2.0) ? 1.0 : ((r2 == 0.0) ? 0.0 : std::pow(r2, p / 2.0 - 1.0));
  double value = p * pm2 * x.dot(bx + fx) + 0.5 * p * pm2 * sx.squaredNorm();
  if (p != 2.0) {
    const double cross = (sx.transpose() * x).squaredNorm();
    const double pm4 = (r2 == 0.0) ? 0.0 : std::pow(r2, p / 2.0 - 2.0);
    if (r2 != 0.0) value += 0.5 * p * (p - 2.0) * pm4 * cross;
  }
  return value;
}

Vec eval_b(const ModelSpec& m, const Vec& x) {
  Vec out(m.dim);
  m.b(x, out);
  return out;
}
Vec eval_f(const ModelSpec& m, const Vec& x) {
  Vec out(m.dim);
  m.f(x, out);
  return out;
}
Mat eval_sigma(const ModelSpec& m, const Vec& x) {
  Mat out(m.dim, m.dim);
  m.sigma(x, out);
  return out;
}

}  // namespace msde
