#pragma once

#include <Eigen/Dense>

#include <vector>

namespace stabprobe {

// Dense real matrix: the carrier used for mixing matrices, whiteners,
// constraint operators and Jacobians alike.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Throws std::invalid_argument if m has a NaN or Inf entry.
void require_finite(const Mat& m, const char* what);

// Column-wise vectorization: entry (i,j) lands at index j*rows + i.
Vec vec(const Mat& m);

// AB - BA for square matrices of equal size.
Mat commutator(const Mat& a, const Mat& b);

/// Basis of skew-symmetric matrices of order n in canonical pair order
/// (0,1),(0,2),...,(0,n-1),(1,2),...,(n-2,n-1), with
/// generator(a,b) = e_a e_b^T - e_b e_a^T.  Generators are pairwise
/// orthogonal under the Frobenius inner product, each with norm sqrt(2).
struct SkewBasis {
  int n = 0;
  std::vector<Mat> generators;  // d = n(n-1)/2 entries

  int dim() const { return static_cast<int>(generators.size()); }
};

SkewBasis skew_basis(int n);

// Orthogonal exponential of a skew-symmetric matrix, computed by scaling
// and squaring with a truncated Taylor series.  The input must satisfy
// |omega + omega^T|_F <= 1e-12 * max(1, |omega|_F).
Mat expm_skew(const Mat& omega);

// Singular values of j in descending order.
std::vector<double> singular_spectrum(const Mat& j);

// Thin SVD for callers that also need the singular vectors.
struct Svd {
  Mat u;
  Vec sigma;  // descending
  Mat v;
};
Svd svd(const Mat& j);

}  // namespace stabprobe
