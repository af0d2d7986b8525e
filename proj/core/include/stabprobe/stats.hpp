#pragma once

#include "stabprobe/linalg.hpp"
#include "stabprobe/signal.hpp"

#include <string>
#include <utility>
#include <vector>

namespace stabprobe {

// Affine map z = W (x - mean) fitted so that the sample covariance of the
// output is the identity.
struct Whitener {
  Vec mean;
  Mat w;

  SignalBlock apply(const SignalBlock& x) const;
};

// Per-channel mean and the 1/T sample covariance.
std::pair<Vec, Mat> sample_mean_cov(const SignalBlock& x);

// W = Lambda^{-1/2} U^T from the eigendecomposition of the sample
// covariance, eigenvalues descending.  Throws if the smallest eigenvalue
// falls below 1e-10 of the largest.
Whitener fit_whitener(const SignalBlock& x);

// R(tau) = 1/(T-tau) * sum_{t>tau} z(t) z(t-tau)^T, optionally symmetrized
// to (R + R^T)/2.
Mat lagged_cov(const SignalBlock& z, long lag, bool symmetrize);

enum class ConstraintFamily { hos, sos };

// Identifies one constraint operator: the lag for SOS matrices, the
// symmetric-basis pair (0-based, bi <= bj) for HOS matrices.
struct ConstraintMeta {
  int lag = -1;
  int bi = -1;
  int bj = -1;

  std::string label() const;  // "3" for SOS lag 3, "1_2" for HOS basis (1,2)
};

// Ordered family {A_i} of n x n symmetric constraint operators.
struct ConstraintSet {
  ConstraintFamily family = ConstraintFamily::sos;
  std::vector<Mat> matrices;
  std::vector<ConstraintMeta> meta;
  std::vector<double> frobenius_norms;

  int size() const { return static_cast<int>(matrices.size()); }
  int order() const { return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows()); }
};

// Lagged covariances R(1), ..., R(L) in lag order; tau = 0 is excluded
// because whitening already fixes it.
ConstraintSet sos_constraints(const SignalBlock& z, int lag_count, bool symmetrize);

// Symmetric basis M_(i,i) = e_i e_i^T, M_(i,j) = (e_i e_j^T + e_j e_i^T)/sqrt(2)
// for i < j, ordered (0,0),(0,1),...,(0,n-1),(1,1),...,(n-1,n-1).
std::vector<Mat> symmetric_basis(int n);

// JADE-style fourth-order cumulant matrices of whitened data:
// Q(M) = E[(z^T M z) z z^T] - tr(M) I - M - M^T, one per symmetric basis
// element, n(n+1)/2 in total.  Requires |R(0) - I|_F <= 0.05 n and T >= 100.
ConstraintSet cumulant_matrices(const SignalBlock& z);

// Sorts by Frobenius norm descending (ties keep original order) and keeps
// the first `keep` matrices.
ConstraintSet sort_truncate(const ConstraintSet& c, int keep);

}  // namespace stabprobe
