#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msde/linalg.hpp"

namespace msde {

/// Declared polynomial-growth envelope for derivatives of the drift:
/// |d^m b(x)|^2 <= gamma * (1 + |x|^q) for every multiindex of order m,
/// where |d^m b| is the Frobenius norm over all components and index slots.
struct GrowthEntry {
  int order = 1;
  double gamma = 0.0;
  double q = 0.0;
};

/// Coefficient set for
///   dX_t = [b(X_t) + f(X_t)] dt + sigma(X_t) dW_t,  X_0 = x0,
/// with a semi-monotone drift b (one-sided Lipschitz with constant -K),
/// a globally Lipschitz perturbation f of linear growth, and a globally
/// Lipschitz diffusion sigma. k1 is the shared Lipschitz/linear-growth
/// constant declared for f and sigma; xi is the exponent of the truncation
/// radii n^xi used by the cutoff machinery.
///
/// Evaluator conventions:
///  - Jacobians are row-major in the analytic sense: out(i, a) = d g^i / dx_a,
///    so a first variation V propagates as dV = J V dt + ...
///  - sigma's columns index the Brownian coordinates; sigma_jac fills one
///    Jacobian per column l with out[l](i, a) = d sigma^i_l / dx_a.
///  - Hessians are full rank-3 tensors (see Tensor3); contraction with
///    directions F, G happens through Tensor3::contract_sym.
struct ModelSpec {
  std::string name;
  int dim = 1;

  double K = 1.0;
  double k1 = 0.0;
  double xi = 1.0;
  std::vector<GrowthEntry> growth;
  Vec x0;

  std::function<void(const Vec&, Vec&)> b;
  std::function<void(const Vec&, Mat&)> b_jac;
  std::function<void(const Vec&, Tensor3&)> b_hess;

  std::function<void(const Vec&, Vec&)> f;
  std::function<void(const Vec&, Mat&)> f_jac;
  std::function<void(const Vec&, Tensor3&)> f_hess;

  std::function<void(const Vec&, Mat&)> sigma;
  std::function<void(const Vec&, std::vector<Mat>&)> sigma_jac;
  std::function<void(const Vec&, std::vector<Tensor3>&)> sigma_hess;
};

/// One recorded counterexample from a sampling check.
struct Violation {
  std::string property;
  Vec x;
  Vec y;        // second sample point (or direction), when the check uses one
  double measured = 0.0;
  double allowed = 0.0;
};

/// Outcome of a sampling-based hypothesis or certification check.
/// passed is true exactly when no violation was found; `violations` retains
/// at most kMaxStoredViolations witnesses, violation_count is the full tally.
struct HypothesisReport {
  static constexpr int kMaxStoredViolations = 16;

  bool passed = true;
  std::vector<Violation> violations;
  long violation_count = 0;
  long samples_used = 0;
  double domain_radius = 0.0;
  std::map<std::string, double> measurements;

  void record(Violation v);
};

/// Slack used by the monotonicity-type checks: a sampled inequality is
/// accepted up to 1e-9 * (1 + |y - x|^2) to absorb rounding.
double monotonicity_tolerance(double gap_sq);

/// Samples pairs (x, y) in the ball of the given radius and verifies the
/// one-sided Lipschitz inequality <b(y) - b(x), y - x> <= -K |y - x|^2.
HypothesisReport check_semi_monotone(const ModelSpec& model, double radius,
                                     long n_pairs, std::uint64_t seed);

/// Samples points x and directions y and verifies the differential form
/// <grad b(x) y, y> <= -K |y|^2.
HypothesisReport check_dissipativity(const ModelSpec& model, double radius,
                                     long n_samples, std::uint64_t seed);

/// Verifies the declared growth entries of the drift derivatives and the
/// declared k1 (Lipschitz constants of f and sigma, linear growth of f)
/// on sampled points. Entries of order > 2 exceed the stored derivative
/// depth and are recorded as unchecked. xi is user-declared and is only
/// reported against max q_m (measurements "max_declared_q",
/// "xi_covers_declared_growth"), never failed on.
HypothesisReport check_growth_metadata(const ModelSpec& model, double radius,
                                       long n_samples, std::uint64_t seed);

/// Finite-difference audit of every analytic derivative evaluator against
/// central differences (step h1 for first order, h2 for second order).
HypothesisReport check_derivatives(const ModelSpec& model, double radius,
                                   long n_samples, std::uint64_t seed,
                                   double h1 = 1e-5, double h2 = 2e-4,
                                   double rel_tol = 1e-4);

/// Constants (alpha, beta) with <b(x) + f(x), x> v |sigma(x)|_F^2 <=
/// alpha + beta |x|^2:
///   alpha = max(|b(0)|^2 / 2 + k1^2, 2 |sigma(0)|_F^2)
///   beta  = max(-K + 1 + k1^2, 2 k1^2)
std::pair<double, double> growth_constants(const ModelSpec& model);

/// Constants (alpha_p, beta_p) of the p-th moment generator inequality
///   L |x|^p <= beta_p |x|^p + alpha_p |x|^(p-2),
/// namely alpha_p = p (alpha + (p-1) k1^2), beta_p = p (beta + (p-1) k1^2).
/// Both are nondecreasing in p for p >= 1.
std::pair<double, double> moment_generator_constants(const ModelSpec& model,
                                                     double p);

/// Applies the generator of the diffusion to |x|^p at the point x:
///   L|x|^p = p |x|^(p-2) <x, b + f>
///          + (p/2) |x|^(p-2) |sigma|_F^2
///          + (p (p-2) / 2) |x|^(p-4) |sigma^T x|^2,
/// with the |x|^(p-4) term read as 0 at x = 0. Requires p >= 2.
double apply_generator(const ModelSpec& model, double p, const Vec& x);

// --- small evaluation helpers (value-returning wrappers) ---

Vec eval_b(const ModelSpec& m, const Vec& x);
Vec eval_f(const ModelSpec& m, const Vec& x);
Mat eval_sigma(const ModelSpec& m, const Vec& x);

/// Matrix/vector conventions used across the derivative propagation code,
/// kept next to the evaluators they describe: for a vector u and matrix C,
/// the contraction written "u.C" acts as the product C*u, i.e. the gradient
/// of a scalar component paired with the columns of a derivative matrix.
struct NotationConvention {
  static constexpr const char* dot_product_rule =
      "u.C = C*u (gradient row applied to each column of C)";
};

}  // namespace msde
