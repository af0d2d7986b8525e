#include "stabprobe/separation.hpp"

#include "stabprobe/stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace stabprobe {

namespace {

double offdiag_mass(const std::vector<Mat>& mats) {
  double total = 0.0;
  for (const Mat& m : mats) {
    total += m.norm() * m.norm() - m.diagonal().squaredNorm();
  }
  return total;
}

// Right-multiplication by the Givens rotation with columns
// (c e_p + s e_q, -s e_p + c e_q).
void rotate_cols(Mat& m, int p, int q, double c, double s) {
  const Vec col_p = m.col(p);
  m.col(p) = c * col_p + s * m.col(q);
  m.col(q) = -s * col_p + c * m.col(q);
}

void rotate_rows(Mat& m, int p, int q, double c, double s) {
  const Eigen::RowVectorXd row_p = m.row(p);
  m.row(p) = c * row_p + s * m.row(q);
  m.row(q) = -s * row_p + c * m.row(q);
}

}  // namespace

DiagonalizerResult joint_diagonalize(const std::vector<Mat>& mats, double angle_tol,
                                     int max_sweeps) {
  if (mats.empty()) {
    throw std::invalid_argument("joint_diagonalize: empty matrix list");
  }
  const long n = mats.front().rows();
  for (const Mat& m : mats) {
    if (m.rows() != n || m.cols() != n) {
      throw std::invalid_argument("joint_diagonalize: sizes differ");
    }
    if ((m - m.transpose()).norm() > 1e-10 * std::max(1.0, m.norm())) {
      throw std::invalid_argument("joint_diagonalize: matrix is not symmetric");
    }
  }

  std::vector<Mat> work = mats;
  DiagonalizerResult result;
  result.v = Mat::Identity(n, n);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_abs_sin = 0.0;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        // Closed-form principal-axis angle over the accumulated 2x2 forms.
        double gxx = 0.0;
        double gyy = 0.0;
        double gxy = 0.0;
        for (const Mat& m : work) {
          const double u = m(p, p) - m(q, q);
          const double v = m(p, q) + m(q, p);
          gxx += u * u;
          gyy += v * v;
          gxy += u * v;
        }
        const double ton = gxx - gyy;
        const double toff = 2.0 * gxy;
        // toff = 0 with ton < 0 needs the quarter-turn branch atan2 cannot
        // pick (all mass sits off-diagonal, e.g. [[0,1],[1,0]]).
        const double theta = (toff == 0.0 && ton < 0.0)
                                 ? M_PI / 4.0
                                 : 0.5 * std::atan2(toff, ton + std::hypot(ton, toff));
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        max_abs_sin = std::max(max_abs_sin, std::abs(s));
        if (std::abs(s) >= angle_tol) {
          for (Mat& m : work) {
            rotate_cols(m, p, q, c, s);
            rotate_rows(m, p, q, c, s);
          }
          rotate_cols(result.v, p, q, c, s);
        }
      }
    }
    ++result.sweeps;
    result.residual_history.push_back(offdiag_mass(work));
    if (max_abs_sin < angle_tol) {
      result.converged = true;
      break;
    }
  }
  result.off_residual = result.residual_history.back();
  return result;
}

Mat jade_separate(const SignalBlock& x) {
  const Whitener wh = fit_whitener(x);
  const SignalBlock z = wh.apply(x);
  const ConstraintSet cumulants = cumulant_matrices(z);
  const DiagonalizerResult diag = joint_diagonalize(cumulants.matrices);
  return diag.v.transpose() * wh.w;
}

Mat sobi_separate(const SignalBlock& x, int lag_count) {
  if (lag_count < 1) {
    throw std::invalid_argument("sobi_separate: lag count must be positive");
  }
  const Whitener wh = fit_whitener(x);
  const SignalBlock z = wh.apply(x);
  const ConstraintSet lagged = sos_constraints(z, lag_count, true);
  const DiagonalizerResult diag = joint_diagonalize(lagged.matrices);
  return diag.v.transpose() * wh.w;
}

double amari_index(const Mat& p) {
  const long n = p.rows();
  if (n != p.cols() || n < 2) {
    throw std::invalid_argument("amari_index: matrix must be square");
  }
  require_finite(p, "amari_index");
  const Mat a = p.cwiseAbs();
  const Vec row_max = a.rowwise().maxCoeff();
  const Vec col_max = a.colwise().maxCoeff();
  if (row_max.minCoeff() <= 0.0 || col_max.minCoeff() <= 0.0) {
    throw std::invalid_argument("amari_index: zero row or column");
  }
  double total = 0.0;
  for (long i = 0; i < n; ++i) {
    total += a.row(i).sum() / row_max[i] - 1.0;
  }
  for (long j = 0; j < n; ++j) {
    total += a.col(j).sum() / col_max[j] - 1.0;
  }
  return total / (2.0 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace stabprobe
