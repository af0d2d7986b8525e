#pragma once

#include "stabprobe/linalg.hpp"
#include "stabprobe/signal.hpp"

#include <vector>

namespace stabprobe {

struct DiagonalizerResult {
  Mat v;                                 // accumulated rotations, orthogonal
  double off_residual = 0.0;             // sum_k |offdiag(V^T A_k V)|_F^2
  int sweeps = 0;
  bool converged = false;
  std::vector<double> residual_history;  // off_residual after each sweep
};

// Jacobi joint approximate diagonalization of symmetric matrices: Givens
// sweeps over all pairs, each angle the closed-form minimizer of the summed
// squared off-diagonal mass of the pair across all matrices.  Stops when
// every |sin theta| in a sweep falls below angle_tol.
DiagonalizerResult joint_diagonalize(const std::vector<Mat>& mats, double angle_tol = 1e-12,
                                     int max_sweeps = 100);

// Whiten, build cumulant matrices, jointly diagonalize; returns the full
// demixing matrix V^T W.
Mat jade_separate(const SignalBlock& x);

// Whiten, build symmetrized lagged covariances for lags 1..lag_count,
// jointly diagonalize; returns V^T W.
Mat sobi_separate(const SignalBlock& x, int lag_count);

// Amari performance index of a square matrix; 0 exactly when P is a
// permutation times a nonsingular diagonal.
double amari_index(const Mat& p);

}  // namespace stabprobe
