#pragma once

#include <functional>
#include <vector>

#include "msde/cutoff.hpp"
#include "msde/linalg.hpp"
#include "msde/paths.hpp"

namespace msde {

/// First-order derivative field of a simulated path: for r <= t, at(r, t) is
/// the d x d matrix whose column j is the derivative of the state at t_t with
/// respect to the j-th Brownian coordinate at time t_r. Entries with r > t
/// are identically zero and share one stored zero block.
class FirstDerivField {
 public:
  FirstDerivField() = default;
  FirstDerivField(TimeGrid grid, int dim);

  const Mat& at(long r, long t) const;
  Mat& slot(long r, long t);  // r <= t only; used by the propagator

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }
  long steps() const { return grid_.steps; }

 private:
  long index(long r, long t) const;
  TimeGrid grid_;
  int dim_ = 0;
  std::vector<Mat> data_;
  Mat zero_;
};

/// Second-order derivative tensors at designated output indices: for output
/// index t and r, tau <= t, at(r, tau, t) has entry (i, j, k) equal to the
/// derivative of state component i at t taken first in Brownian coordinate k
/// at time tau, then in coordinate j at time r. Zero when max(r, tau) > t.
class SecondDerivField {
 public:
  SecondDerivField() = default;
  SecondDerivField(TimeGrid grid, int dim, std::vector<long> output_times);

  const Tensor3& at(long r, long tau, long t_out) const;
  Tensor3& slot(long r, long tau, long t_out);

  const std::vector<long>& output_times() const { return touts_; }
  const TimeGrid& grid() const { return grid_; }
  int dim() const { return dim_; }

 private:
  long tout_slot(long t_out) const;
  TimeGrid grid_;
  int dim_ = 0;
  std::vector<long> touts_;
  std::vector<std::vector<Tensor3>> data_;  // per output slot, (t+1)^2 pairs
  Tensor3 zero_;
};

/// Square-integrable direction h: [0, T] -> R^d for shift experiments.
struct CMDirection {
  int dim = 0;
  std::function<Vec(double)> h;

  Vec eval(double t) const { return h(t); }

  static CMDirection constant(const Vec& value);
  static CMDirection zero(int dim);
  static CMDirection pulse(int dim, int coord, double t_lo, double t_hi,
                           double height);
};

struct CameronMartinReport {
  Vec lhs;  // finite-difference directional derivative of the terminal state
  Vec rhs;  // grid pairing of the first-order field with the direction
  double rel_err = 0.0;
};

struct FlowCheckReport {
  double max_gap = 0.0;
  long pairs_checked = 0;
  long pairs_skipped = 0;  // flow matrix too ill-conditioned to invert
};

/// Per-step linear factor shared by every variational recursion here:
///   A_k = I + [grad b_n(X_k) + grad f(X_k)] dt + sum_l grad sigma_l(X_k) dW^l_k.
/// State sensitivities, the Jacobian flow, and the homogeneous part of the
/// second-order field all advance by multiplication with the same A_k, which
/// is what makes the flow-factorization cross-check an algebraic identity.
std::vector<Mat> linear_step_maps(const TruncatedModel& tm,
                                  const PathSolution& path,
                                  const NoisePath& noise);

/// Propagates M_{k+1} = A_k M_k from M_r = sigma(X_r) for every start index r.
FirstDerivField propagate_first(const TruncatedModel& tm,
                                const PathSolution& path,
                                const NoisePath& noise);

/// Initial tensor of the second-order field for the pair (r, tau), evaluated
/// at t = max(r, tau): the later derivative differentiates the diffusion
/// coefficient seeding the earlier one, giving
///   tau < r:  out(:, j, k) = grad sigma_j(X_r) * first(tau, r).col(k)
///   r < tau:  out(:, j, k) = grad sigma_k(X_tau) * first(r, tau).col(j)
/// and the symmetrized sum of both when r == tau (where first(r, r) is
/// sigma(X_r)). Swapping (r, j) with (tau, k) reproduces the same arithmetic,
/// so the initialization is symmetric bitwise.
Tensor3 second_initial(const TruncatedModel& tm, const PathSolution& path,
                       const FirstDerivField& first, long r, long tau);

/// Propagates each pair (r, tau) from second_initial at max(r, tau) by
///   U_{s+1} = A_s U_s + [Hess(b_n + f)(X_s) dt + sum_l Hess sigma_l(X_s) dW^l_s]
///             contracted against first(tau, s).col(k) and first(r, s).col(j),
/// recording the tensor at each requested output index (an empty list means
/// the final index only). Contractions are symmetrized so the field is
/// bitwise invariant under (r, j) <-> (tau, k).
SecondDerivField propagate_second(const TruncatedModel& tm,
                                  const PathSolution& path,
                                  const NoisePath& noise,
                                  const FirstDerivField& first,
                                  std::vector<long> output_times = {});

/// Left-rule grid approximation of the squared Hilbert norm of the field at
/// one output index: sum over r < t of |at(r, t)|_F^2 dt.
double hnorm_sq(const FirstDerivField& first, long t_index);

/// Independent check of the first-order field: compares the finite-difference
/// response of the terminal state to a drift shift eps * h(t) dt against the
/// field paired with h. rel_err is the gap over the larger of the two norms
/// (zero when both vanish).
CameronMartinReport cameron_martin_check(const TruncatedModel& tm,
                                         const NoisePath& noise,
                                         const CMDirection& h, double eps);

/// Cross-check: the flow J_k (propagated from the identity by the same step
/// maps) factorizes the field as at(r, t) = J_t J_r^{-1} sigma(X_r). Reports
/// the max elementwise gap over a grid of sampled (r, t) pairs; start indices
/// whose flow matrix is numerically singular are counted as skipped.
FlowCheckReport flow_factorization_check(const TruncatedModel& tm,
                                         const PathSolution& path,
                                         const NoisePath& noise,
                                         const FirstDerivField& first);

}  // namespace msde
