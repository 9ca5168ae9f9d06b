#pragma once

#include <Eigen/Dense>

#include <cassert>
#include <vector>

namespace msde {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Dense rank-3 array of second derivatives for a vector field g : R^d -> R^d.
/// Entry (i, a, b) holds d2 g^i / dx_a dx_b, so the slice for fixed i is the
/// (symmetric) Hessian of the i-th component.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int d) : d_(d), v_(static_cast<size_t>(d) * d * d, 0.0) {}

  void resize(int d) {
    d_ = d;
    v_.assign(static_cast<size_t>(d) * d * d, 0.0);
  }
  void setZero() { std::fill(v_.begin(), v_.end(), 0.0); }

  int dim() const { return d_; }

  double& operator()(int i, int a, int b) {
    return v_[static_cast<size_t>((i * d_ + a)) * d_ + b];
  }
  double operator()(int i, int a, int b) const {
    return v_[static_cast<size_t>((i * d_ + a)) * d_ + b];
  }

  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }

  /// Contracts the two derivative slots with directions F and G:
  ///   out_i = sum_{a,b} (i,a,b) F^a G^b.
  /// The slices must be symmetric in (a, b), which holds for Hessians. Terms
  /// are accumulated through the symmetrized products F^a G^b + F^b G^a, so
  /// swapping F and G returns a bitwise-identical result (IEEE addition and
  /// multiplication are commutative).
  void contract_sym(const Vec& F, const Vec& G, Vec& out) const {
    assert(F.size() == d_ && G.size() == d_);
    out.resize(d_);
    for (int i = 0; i < d_; ++i) {
      double acc = 0.0;
      for (int a = 0; a < d_; ++a) {
        acc += (*this)(i, a, a) * (F[a] * G[a]);
        for (int b = a + 1; b < d_; ++b) {
          acc += (*this)(i, a, b) * (F[a] * G[b] + F[b] * G[a]);
        }
      }
      out[i] = acc;
    }
  }

  Tensor3& operator+=(const Tensor3& o) {
    assert(o.d_ == d_);
    for (size_t n = 0; n < v_.size(); ++n) v_[n] += o.v_[n];
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  int d_ = 0;
  std::vector<double> v_;
};

}  // namespace msde
