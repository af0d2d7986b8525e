#include "stabprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace stabprobe {

SignalBlock Whitener::apply(const SignalBlock& x) const {
  if (x.channels() != mean.size()) {
    throw std::invalid_argument("Whitener: channel mismatch");
  }
  SignalBlock out;
  out.samples = (x.samples.rowwise() - mean.transpose()) * w.transpose();
  return out;
}

std::pair<Vec, Mat> sample_mean_cov(const SignalBlock& x) {
  const long t = x.length();
  if (t < 2) {
    throw std::invalid_argument("sample_mean_cov: need at least two samples");
  }
  require_finite(x.samples, "sample_mean_cov");
  Vec mean = x.samples.colwise().mean();
  Mat centered = x.samples.rowwise() - mean.transpose();
  Mat cov = centered.transpose() * centered / static_cast<double>(t);
  cov = ((cov + cov.transpose()) / 2.0).eval();  // clean up rounding asymmetry
  return {std::move(mean), std::move(cov)};
}

Whitener fit_whitener(const SignalBlock& x) {
  auto [mean, cov] = sample_mean_cov(x);
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("fit_whitener: eigendecomposition failed");
  }
  const Vec& values = eig.eigenvalues();  // ascending
  const int n = static_cast<int>(values.size());
  const double largest = values[n - 1];
  if (!(values[0] > 1e-10 * largest)) {
    throw std::runtime_error("fit_whitener: singular covariance, eigenvalue " +
                             std::to_string(values[0]) + " below 1e-10 of largest " +
                             std::to_string(largest));
  }
  // Rows ordered by descending eigenvalue.
  Whitener wh;
  wh.mean = std::move(mean);
  wh.w.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const int src = n - 1 - i;
    wh.w.row(i) = eig.eigenvectors().col(src).transpose() / std::sqrt(values[src]);
  }
  return wh;
}

Mat lagged_cov(const SignalBlock& z, long lag, bool symmetrize) {
  const long t = z.length();
  if (lag < 0 || lag >= t) {
    throw std::invalid_argument("lagged_cov: lag " + std::to_string(lag) +
                                " out of range for " + std::to_string(t) + " samples");
  }
  const long span = t - lag;
  Mat r = z.samples.bottomRows(span).transpose() * z.samples.topRows(span) /
          static_cast<double>(span);
  if (symmetrize) {
    r = ((r + r.transpose()) / 2.0).eval();
  }
  return r;
}

std::string ConstraintMeta::label() const {
  if (lag >= 0) {
    return std::to_string(lag);
  }
  return std::to_string(bi + 1) + "_" + std::to_string(bj + 1);
}

ConstraintSet sos_constraints(const SignalBlock& z, int lag_count, bool symmetrize) {
  if (lag_count < 1 || lag_count >= z.length()) {
    throw std::invalid_argument("sos_constraints: lag count out of range");
  }
  ConstraintSet set;
  set.family = ConstraintFamily::sos;
  for (int tau = 1; tau <= lag_count; ++tau) {
    Mat r = lagged_cov(z, tau, symmetrize);
    set.frobenius_norms.push_back(r.norm());
    set.matrices.push_back(std::move(r));
    set.meta.push_back(ConstraintMeta{tau, -1, -1});
  }
  return set;
}

std::vector<Mat> symmetric_basis(int n) {
  std::vector<Mat> basis;
  basis.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Mat m = Mat::Zero(n, n);
      if (i == j) {
        m(i, i) = 1.0;
      } else {
        m(i, j) = inv_sqrt2;
        m(j, i) = inv_sqrt2;
      }
      basis.push_back(std::move(m));
    }
  }
  return basis;
}

ConstraintSet cumulant_matrices(const SignalBlock& z) {
  const long t = z.length();
  const int n = z.channels();
  if (t < 100) {
    throw std::invalid_argument("cumulant_matrices: need at least 100 samples");
  }
  const Mat r0 = lagged_cov(z, 0, true);
  if ((r0 - Mat::Identity(n, n)).norm() > 0.05 * n) {
    throw std::invalid_argument("cumulant_matrices: input is not whitened");
  }

  const double sqrt2 = std::sqrt(2.0);
  ConstraintSet set;
  set.family = ConstraintFamily::hos;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      // w_t = z^T M z per sample; E[w z z^T] = Z^T diag(w) Z / T.
      Vec w = z.samples.col(i).cwiseProduct(z.samples.col(j));
      if (i != j) {
        w *= sqrt2;
      }
      Mat moment = z.samples.transpose() * (z.samples.array().colwise() * w.array()).matrix() /
                   static_cast<double>(t);
      Mat m = Mat::Zero(n, n);
      if (i == j) {
        m(i, i) = 1.0;
        moment -= Mat::Identity(n, n);  // tr(M) I
      } else {
        m(i, j) = 1.0 / sqrt2;
        m(j, i) = 1.0 / sqrt2;
      }
      moment -= 2.0 * m;  // M + M^T for symmetric M
      moment = ((moment + moment.transpose()) / 2.0).eval();
      set.frobenius_norms.push_back(moment.norm());
      set.matrices.push_back(std::move(moment));
      set.meta.push_back(ConstraintMeta{-1, i, j});
    }
  }
  return set;
}

ConstraintSet sort_truncate(const ConstraintSet& c, int keep) {
  if (keep < 1 || keep > c.size()) {
    throw std::invalid_argument("sort_truncate: keep count " + std::to_string(keep) +
                                " out of range for " + std::to_string(c.size()) + " matrices");
  }
  std::vector<int> order(c.matrices.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return c.frobenius_norms[a] > c.frobenius_norms[b];
  });
  ConstraintSet out;
  out.family = c.family;
  for (int k = 0; k < keep; ++k) {
    const int idx = order[k];
    out.matrices.push_back(c.matrices[idx]);
    out.meta.push_back(c.meta[idx]);
    out.frobenius_norms.push_back(c.frobenius_norms[idx]);
  }
  return out;
}

}  // namespace stabprobe
