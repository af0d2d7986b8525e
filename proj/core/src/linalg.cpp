#include "stabprobe/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stabprobe {

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}

Vec vec(const Mat& m) {
  // MatrixXd is column-major, so the raw buffer already is the column-wise
  // vectorization.
  return Eigen::Map<const Vec>(m.data(), m.size());
}

Mat commutator(const Mat& a, const Mat& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw std::invalid_argument("commutator: inputs must be square and of equal size");
  }
  return a * b - b * a;
}

SkewBasis skew_basis(int n) {
  if (n < 2) {
    throw std::invalid_argument("skew_basis: dimension must be at least 2");
  }
  SkewBasis basis;
  basis.n = n;
  basis.generators.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      Mat g = Mat::Zero(n, n);
      g(a, b) = 1.0;
      g(b, a) = -1.0;
      basis.generators.push_back(std::move(g));
    }
  }
  return basis;
}

Mat expm_skew(const Mat& omega) {
  if (omega.rows() != omega.cols()) {
    throw std::invalid_argument("expm_skew: matrix must be square");
  }
  require_finite(omega, "expm_skew");
  const double norm = omega.norm();
  if ((omega + omega.transpose()).norm() > 1e-12 * std::max(1.0, norm)) {
    throw std::invalid_argument("expm_skew: matrix is not skew-symmetric");
  }
  const long n = omega.rows();

  // Scale until |A| <= 0.5, run the Taylor series to convergence, square back.
  int squarings = 0;
  double scaled = norm;
  while (scaled > 0.5) {
    scaled *= 0.5;
    ++squarings;
  }
  const Mat a = omega / std::ldexp(1.0, squarings);

  Mat result = Mat::Identity(n, n);
  Mat term = Mat::Identity(n, n);
  for (int k = 1; k < 64; ++k) {
    term = (term * a / static_cast<double>(k)).eval();
    result += term;
    if (term.norm() < 1e-16) {
      break;
    }
  }
  for (int s = 0; s < squarings; ++s) {
    result = (result * result).eval();
  }
  return result;
}

std::vector<double> singular_spectrum(const Mat& j) {
  if (j.size() == 0) {
    throw std::invalid_argument("singular_spectrum: empty matrix");
  }
  require_finite(j, "singular_spectrum");
  Eigen::JacobiSVD<Mat> solver(j);
  const Vec& sv = solver.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

Svd svd(const Mat& j) {
  if (j.size() == 0) {
    throw std::invalid_argument("svd: empty matrix");
  }
  require_finite(j, "svd");
  Eigen::JacobiSVD<Mat> solver(j, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return Svd{solver.matrixU(), solver.singularValues(), solver.matrixV()};
}

}  // namespace stabprobe
