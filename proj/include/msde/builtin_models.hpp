#pragma once

#include <string>
#include <vector>

#include "msde/model.hpp"

namespace msde {

/// Linear test family: b = -K x, f = 0, sigma = sigma0 * I. Every quantity
/// of interest has a closed form, which makes it the reference oracle model.
/// k1 is 0 for the actual coefficients; a larger value may be declared to
/// exercise the constant bookkeeping.
struct OuParams {
  int dim = 1;
  double K = 1.0;
  double sigma0 = 1.0;
  double k1 = 0.0;
  double xi = 1.0;
  std::vector<double> x0 = {1.0};
};
ModelSpec make_ou(const OuParams& p);

/// One-dimensional cubic family: b = -x - x^3 (K = 1), f = kappa sin x,
/// sigma = a + c tanh x with |c| < a. The drift grows super-linearly, so the
/// truncation machinery does real work here. Declared growth follows the
/// derivatives of b: |b'|^2 <= 16 (1 + x^4), |b''|^2 <= 36 (1 + x^2),
/// |b'''|^2 <= 36, hence xi = 4.
struct CubicParams {
  double kappa = 0.5;
  double a = 0.5;
  double c = 0.25;
  double x0 = 0.5;
};
ModelSpec make_cubic(const CubicParams& p);

/// Two-dimensional coupled variant: b = -(1 + |x|^2) x (K = 1),
/// f = kappa (sin x2, sin x1), sigma = diag(a + c tanh x2, a + c tanh x1).
/// The perturbation and the diffusion couple the coordinates, so none of the
/// derivative fields are diagonal.
struct CoupledParams {
  double kappa = 0.4;
  double a = 0.6;
  double c = 0.3;
  std::vector<double> x0 = {0.5, -0.25};
};
ModelSpec make_coupled(const CoupledParams& p);

const std::vector<std::string>& builtin_model_names();

/// Human-readable coefficient and constant summary (used by the CLI).
std::string model_summary(const ModelSpec& model);

}  // namespace msde
