#pragma once

#include "stabprobe/linalg.hpp"
#include "stabprobe/signal.hpp"
#include "stabprobe/stats.hpp"

#include <vector>

namespace stabprobe {

// z'(t) = Q^T z(t): the candidate sources under the reparameterization
// H0 -> H0 Q.  Q must be orthogonal within 1e-10.
SignalBlock rotate_signals(const SignalBlock& z, const Mat& q);

// Evaluates the constraint family at a right-orthogonal reparameterization
// of the reference point H0 = I.  Sample evaluators recompute the
// statistics from back-rotated signals; population evaluators apply the
// exact transformation law of the family.
class ObservationEvaluator {
 public:
  // Lagged covariances of the held sample, lags 1..lag_count.
  static ObservationEvaluator sample_sos(SignalBlock z, int lag_count, bool symmetrize);

  // Cumulant matrices of the held sample.  keep > 0 truncates to the
  // `keep` largest matrices by Frobenius norm; the selection and its order
  // are frozen at the identity so the map stays continuous in Q.
  static ObservationEvaluator sample_hos(SignalBlock z, int keep = 0);

  // Exact constraint operators with their lag tags; lag 0 denotes the
  // whitening constraint R(0) = I itself.
  static ObservationEvaluator population_sos(std::vector<Mat> r_list, std::vector<int> lags,
                                             bool symmetrize = true);

  // Exact cumulant operators of independent unit-variance sources with the
  // given per-channel excess kurtosis; keep > 0 truncates like sample_hos.
  static ObservationEvaluator population_hos(Vec kurtosis, int keep = 0);

  ConstraintSet evaluate(const Mat& q) const;

  // Stacked vector: vec(A_1), ..., vec(A_k) concatenated in set order.
  Vec phi(const Mat& q) const;

  int channels() const { return n_; }
  int constraint_count() const;
  ConstraintFamily family() const { return family_; }
  bool population() const { return population_; }

 private:
  ObservationEvaluator() = default;

  ConstraintSet evaluate_all(const Mat& q) const;  // HOS modes, before truncation

  ConstraintFamily family_ = ConstraintFamily::sos;
  bool population_ = false;
  int n_ = 0;

  SignalBlock z_;              // sample modes
  int lag_count_ = 0;          // sample SOS
  bool symmetrize_ = true;     // SOS modes
  std::vector<int> selected_;  // sample HOS: frozen basis order after truncation

  std::vector<Mat> r_list_;    // population SOS
  std::vector<int> lags_;
  Vec kurtosis_;               // population HOS
};

// Jacobian of the stacked observation map with respect to the skew basis.
struct JacobianReport {
  long rows = 0;
  long cols = 0;
  std::vector<double> singular_values;  // descending
  double probe = 0.0;                   // smallest singular value
  int kernel_dim = 0;                   // sigma <= tol * max(sigma_max, 1)
  double tol = 0.0;
};

// Central difference: column k = [phi(exp(h W_k)) - phi(exp(-h W_k))] / 2h,
// both evaluations on the same held sample.
Mat jacobian_fd(const ObservationEvaluator& ev, const SkewBasis& basis, double step);

// Exact derivative of R -> Q^T R Q at Q = I: column k stacks
// vec([R(tau), W_k]) over the list.
Mat jacobian_sos_analytic(const std::vector<Mat>& r_list, const SkewBasis& basis);

enum class JacobianMode { finite_difference, analytic_sos };

inline constexpr double kDefaultFdStep = 1e-4;
inline constexpr double kDefaultKernelTol = 1e-8;

JacobianReport report_from_jacobian(const Mat& j, double tol = kDefaultKernelTol);

JacobianReport probe(const ObservationEvaluator& ev, const SkewBasis& basis, JacobianMode mode,
                     double step = kDefaultFdStep, double tol = kDefaultKernelTol);

// Vertical stack of Jacobians sharing the column dimension; the kernel of
// the stack is the intersection of the individual kernels.
struct StackedKernel {
  Mat stacked;
  JacobianReport report;
};
StackedKernel kernel_intersection_check(const std::vector<Mat>& jacobians,
                                        double tol = kDefaultKernelTol);

}  // namespace stabprobe
