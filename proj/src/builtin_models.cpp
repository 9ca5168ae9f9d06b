#include "msde/builtin_models.hpp"

#include <cmath>
#include <sstream>

#include "msde/errors.hpp"

namespace msde {

namespace {

Vec to_vec(const std::vector<double>& v) {
  Vec x(static_cast<int>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) x[static_cast<int>(i)] = v[i];
  return x;
}

void zero_vec(const Vec& x, Vec& out) { out = Vec::Zero(x.size()); }
void zero_mat(const Vec& x, Mat& out) { out = Mat::Zero(x.size(), x.size()); }
void zero_tensor(const Vec& x, Tensor3& out) {
  out.resize(static_cast<int>(x.size()));
}

}  // namespace

ModelSpec make_ou(const OuParams& p) {
  if (p.dim < 1) throw ConfigError("ou: dim must be >= 1");
  if (!(p.K > 0.0)) throw ConfigError("ou: K must be > 0");
  if (p.sigma0 < 0.0) throw ConfigError("ou: sigma0 must be >= 0");
  if (p.k1 < 0.0) throw ConfigError("ou: k1 must be >= 0");
  if (!(p.xi > 0.0)) throw ConfigError("ou: xi must be > 0");
  if (static_cast<int>(p.x0.size()) != p.dim)
    throw ConfigError("ou: x0 must have dim entries");

  ModelSpec m;
  m.name = "ou";
  m.dim = p.dim;
  m.K = p.K;
  m.k1 = p.k1;
  m.xi = p.xi;
  m.x0 = to_vec(p.x0);
  m.growth = {{1, p.K * p.K, 0.0}, {2, 0.0, 0.0}, {3, 0.0, 0.0}};

  const double K = p.K;
  const double s0 = p.sigma0;
  m.b = [K](const Vec& x, Vec& out) { out = -K * x; };
  m.b_jac = [K](const Vec& x, Mat& out) {
    out = -K * Mat::Identity(x.size(), x.size());
  };
  m.b_hess = zero_tensor;
  m.f = zero_vec;
  m.f_jac = zero_mat;
  m.f_hess = zero_tensor;
  m.sigma = [s0](const Vec& x, Mat& out) {
    out = s0 * Mat::Identity(x.size(), x.size());
  };
  m.sigma_jac = [](const Vec& x, std::vector<Mat>& out) {
    out.assign(x.size(), Mat::Zero(x.size(), x.size()));
  };
  m.sigma_hess = [](const Vec& x, std::vector<Tensor3>& out) {
    out.assign(x.size(), Tensor3(static_cast<int>(x.size())));
  };
  return m;
}

ModelSpec make_cubic(const CubicParams& p) {
  if (!(p.a > 0.0)) throw ConfigError("cubic: a must be > 0");
  if (!(std::abs(p.c) < p.a))
    throw ConfigError("cubic: |c| must be < a (nondegenerate diffusion)");

  ModelSpec m;
  m.name = "cubic";
  m.dim = 1;
  m.K = 1.0;
  m.k1 = std::max(std::abs(p.kappa), std::abs(p.c));
  m.xi = 4.0;
  m.x0 = Vec::Constant(1, p.x0);
  m.growth = {{1, 16.0, 4.0}, {2, 36.0, 2.0}, {3, 36.0, 0.0}};

  const double kappa = p.kappa, a = p.a, c = p.c;
  m.b = [](const Vec& x, Vec& out) {
    out.resize(1);
    out[0] = -x[0] - x[0] * x[0] * x[0];
  };
  m.b_jac = [](const Vec& x, Mat& out) {
    out.resize(1, 1);
    out(0, 0) = -1.0 - 3.0 * x[0] * x[0];
  };
  m.b_hess = [](const Vec& x, Tensor3& out) {
    out.resize(1);
    out(0, 0, 0) = -6.0 * x[0];
  };
  m.f = [kappa](const Vec& x, Vec& out) {
    out.resize(1);
    out[0] = kappa * std::sin(x[0]);
  };
  m.f_jac = [kappa](const Vec& x, Mat& out) {
    out.resize(1, 1);
    out(0, 0) = kappa * std::cos(x[0]);
  };
  m.f_hess = [kappa](const Vec& x, Tensor3& out) {
    out.resize(1);
    out(0, 0, 0) = -kappa * std::sin(x[0]);
  };
  m.sigma = [a, c](const Vec& x, Mat& out) {
    out.resize(1, 1);
    out(0, 0) = a + c * std::tanh(x[0]);
  };
  m.sigma_jac = [c](const Vec& x, std::vector<Mat>& out) {
    const double t = std::tanh(x[0]);
    out.assign(1, Mat::Zero(1, 1));
    out[0](0, 0) = c * (1.0 - t * t);
  };
  m.sigma_hess = [c](const Vec& x, std::vector<Tensor3>& out) {
    const double t = std::tanh(x[0]);
    out.assign(1, Tensor3(1));
    out[0](0, 0, 0) = -2.0 * c * t * (1.0 - t * t);
  };
  return m;
}

ModelSpec make_coupled(const CoupledParams& p) {
  if (!(p.a > 0.0)) throw ConfigError("coupled: a must be > 0");
  if (!(std::abs(p.c) < p.a))
    throw ConfigError("coupled: |c| must be < a (nondegenerate diffusion)");
  if (p.x0.size() != 2) throw ConfigError("coupled: x0 must have 2 entries");

  ModelSpec m;
  m.name = "coupled";
  m.dim = 2;
  m.K = 1.0;
  // f = kappa (sin x2, sin x1) is kappa-Lipschitz but |f| <= kappa * sqrt(2),
  // so the shared constant must cover the linear-growth form as well.
  m.k1 = std::max(std::sqrt(2.0) * std::abs(p.kappa), std::abs(p.c));
  m.xi = 4.0;
  m.x0 = to_vec(p.x0);
  m.growth = {{1, 24.0, 4.0}, {2, 48.0, 2.0}, {3, 96.0, 0.0}};

  const double kappa = p.kappa, a = p.a, c = p.c;
  m.b = [](const Vec& x, Vec& out) { out = -(1.0 + x.squaredNorm()) * x; };
  m.b_jac = [](const Vec& x, Mat& out) {
    const double s = x.squaredNorm();
    out = -(1.0 + s) * Mat::Identity(2, 2) - 2.0 * x * x.transpose();
  };
  m.b_hess = [](const Vec& x, Tensor3& out) {
    out.resize(2);
    for (int i = 0; i < 2; ++i)
      for (int aa = 0; aa < 2; ++aa)
        for (int bb = 0; bb < 2; ++bb) {
          double v = 0.0;
          if (aa == bb) v -= 2.0 * x[i];
          if (i == bb) v -= 2.0 * x[aa];
          if (i == aa) v -= 2.0 * x[bb];
          out(i, aa, bb) = v;
        }
  };
  m.f = [kappa](const Vec& x, Vec& out) {
    out.resize(2);
    out[0] = kappa * std::sin(x[1]);
    out[1] = kappa * std::sin(x[0]);
  };
  m.f_jac = [kappa](const Vec& x, Mat& out) {
    out = Mat::Zero(2, 2);
    out(0, 1) = kappa * std::cos(x[1]);
    out(1, 0) = kappa * std::cos(x[0]);
  };
  m.f_hess = [kappa](const Vec& x, Tensor3& out) {
    out.resize(2);
    out(0, 1, 1) = -kappa * std::sin(x[1]);
    out(1, 0, 0) = -kappa * std::sin(x[0]);
  };
  m.sigma = [a, c](const Vec& x, Mat& out) {
    out = Mat::Zero(2, 2);
    out(0, 0) = a + c * std::tanh(x[1]);
    out(1, 1) = a + c * std::tanh(x[0]);
  };
  m.sigma_jac = [c](const Vec& x, std::vector<Mat>& out) {
    out.assign(2, Mat::Zero(2, 2));
    const double t1 = std::tanh(x[0]);
    const double t2 = std::tanh(x[1]);
    out[0](0, 1) = c * (1.0 - t2 * t2);  // d sigma^0_0 / dx2
    out[1](1, 0) = c * (1.0 - t1 * t1);  // d sigma^1_1 / dx1
  };
  m.sigma_hess = [c](const Vec& x, std::vector<Tensor3>& out) {
    out.assign(2, Tensor3(2));
    const double t1 = std::tanh(x[0]);
    const double t2 = std::tanh(x[1]);
    out[0](0, 1, 1) = -2.0 * c * t2 * (1.0 - t2 * t2);
    out[1](1, 0, 0) = -2.0 * c * t1 * (1.0 - t1 * t1);
  };
  return m;
}

const std::vector<std::string>& builtin_model_names() {
  static const std::vector<std::string> names = {"ou", "cubic", "coupled"};
  return names;
}

std::string model_summary(const ModelSpec& model) {
  std::ostringstream os;
  os << "model " << model.name << " (dim=" << model.dim << ")\n";
  os << "  K=" << model.K << " k1=" << model.k1 << " xi=" << model.xi << "\n";
  os << "  x0=[";
  for (int i = 0; i < model.x0.size(); ++i)
    os << (i ? ", " : "") << model.x0[i];
  os << "]\n";
  const auto [alpha, beta] = growth_constants(model);
  os << "  alpha=" << alpha << " beta=" << beta << "\n";
  for (double p : {2.0, 4.0}) {
    const auto [ap, bp] = moment_generator_constants(model, p);
    os << "  p=" << p << ": alpha_p=" << ap << " beta_p=" << bp << "\n";
  }
  os << "  drift derivative growth:";
  for (const auto& g : model.growth)
    os << " [order " << g.order << ": gamma=" << g.gamma << " q=" << g.q << "]";
  os << "\n";
  return os.str();
}

}  // namespace msde
