#include "stabprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace stabprobe {

SignalBlock rotate_signals(const SignalBlock& z, const Mat& q) {
  const int n = z.channels();
  if (q.rows() != n || q.cols() != n) {
    throw std::invalid_argument("rotate_signals: rotation size mismatch");
  }
  if ((q * q.transpose() - Mat::Identity(n, n)).norm() > 1e-10) {
    throw std::invalid_argument("rotate_signals: matrix is not orthogonal");
  }
  // z'(t) = Q^T z(t), one row per sample.
  SignalBlock out;
  out.samples = z.samples * q;
  return out;
}

ObservationEvaluator ObservationEvaluator::sample_sos(SignalBlock z, int lag_count,
                                                      bool symmetrize) {
  if (lag_count < 1 || lag_count >= z.length()) {
    throw std::invalid_argument("ObservationEvaluator: lag count out of range");
  }
  ObservationEvaluator ev;
  ev.family_ = ConstraintFamily::sos;
  ev.population_ = false;
  ev.n_ = z.channels();
  ev.z_ = std::move(z);
  ev.lag_count_ = lag_count;
  ev.symmetrize_ = symmetrize;
  return ev;
}

ObservationEvaluator ObservationEvaluator::sample_hos(SignalBlock z, int keep) {
  ObservationEvaluator ev;
  ev.family_ = ConstraintFamily::hos;
  ev.population_ = false;
  ev.n_ = z.channels();

  // Freeze the truncation order at the identity so the observation map
  // stays continuous in Q.
  const ConstraintSet at_identity = cumulant_matrices(z);
  const int full = at_identity.size();
  if (keep < 0 || keep > full) {
    throw std::invalid_argument("ObservationEvaluator: keep count out of range");
  }
  if (keep == 0 || keep == full) {
    ev.selected_.resize(full);
    std::iota(ev.selected_.begin(), ev.selected_.end(), 0);
  } else {
    std::vector<int> order(full);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return at_identity.frobenius_norms[a] > at_identity.frobenius_norms[b];
    });
    ev.selected_.assign(order.begin(), order.begin() + keep);
  }
  ev.z_ = std::move(z);
  return ev;
}

ObservationEvaluator ObservationEvaluator::population_sos(std::vector<Mat> r_list,
                                                          std::vector<int> lags,
                                                          bool symmetrize) {
  if (r_list.empty() || r_list.size() != lags.size()) {
    throw std::invalid_argument("ObservationEvaluator: need one lag tag per matrix");
  }
  const long n = r_list.front().rows();
  for (const Mat& r : r_list) {
    if (r.rows() != n || r.cols() != n) {
      throw std::invalid_argument("ObservationEvaluator: constraint sizes differ");
    }
    require_finite(r, "population_sos");
  }
  ObservationEvaluator ev;
  ev.family_ = ConstraintFamily::sos;
  ev.population_ = true;
  ev.n_ = static_cast<int>(n);
  ev.r_list_ = std::move(r_list);
  ev.lags_ = std::move(lags);
  ev.symmetrize_ = symmetrize;
  return ev;
}

ObservationEvaluator ObservationEvaluator::population_hos(Vec kurtosis, int keep) {
  if (kurtosis.size() < 2) {
    throw std::invalid_argument("ObservationEvaluator: need at least two channels");
  }
  ObservationEvaluator ev;
  ev.family_ = ConstraintFamily::hos;
  ev.population_ = true;
  ev.n_ = static_cast<int>(kurtosis.size());
  ev.kurtosis_ = std::move(kurtosis);
  const int full = ev.n_ * (ev.n_ + 1) / 2;
  if (keep < 0 || keep > full) {
    throw std::invalid_argument("ObservationEvaluator: keep count out of range");
  }
  if (keep == 0 || keep == full) {
    ev.selected_.resize(full);
    std::iota(ev.selected_.begin(), ev.selected_.end(), 0);
  } else {
    const ConstraintSet at_identity = ev.evaluate_all(Mat::Identity(ev.n_, ev.n_));
    std::vector<int> order(full);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return at_identity.frobenius_norms[a] > at_identity.frobenius_norms[b];
    });
    ev.selected_.assign(order.begin(), order.begin() + keep);
  }
  return ev;
}

int ObservationEvaluator::constraint_count() const {
  if (family_ == ConstraintFamily::sos) {
    return population_ ? static_cast<int>(r_list_.size()) : lag_count_;
  }
  return static_cast<int>(selected_.size());
}

ConstraintSet ObservationEvaluator::evaluate_all(const Mat& q) const {
  if (!population_) {
    return cumulant_matrices(rotate_signals(z_, q));
  }
  if ((q * q.transpose() - Mat::Identity(n_, n_)).norm() > 1e-10) {
    throw std::invalid_argument("ObservationEvaluator: matrix is not orthogonal");
  }
  // Exact cumulant operators of z' = Q^T z for independent unit-variance
  // sources: Q(M) = sum_i kappa_i (g_i^T M g_i) g_i g_i^T with g_i = row i
  // of Q.
  ConstraintSet set;
  set.family = ConstraintFamily::hos;
  const std::vector<Mat> basis = symmetric_basis(n_);
  int b = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j, ++b) {
      Mat a = Mat::Zero(n_, n_);
      for (int src = 0; src < n_; ++src) {
        const Vec g = q.row(src).transpose();
        const double weight = kurtosis_[src] * g.dot(basis[b] * g);
        a += weight * g * g.transpose();
      }
      set.frobenius_norms.push_back(a.norm());
      set.matrices.push_back(std::move(a));
      set.meta.push_back(ConstraintMeta{-1, i, j});
    }
  }
  return set;
}

ConstraintSet ObservationEvaluator::evaluate(const Mat& q) const {
  if (family_ == ConstraintFamily::sos) {
    if (!population_) {
      return sos_constraints(rotate_signals(z_, q), lag_count_, symmetrize_);
    }
    if ((q * q.transpose() - Mat::Identity(n_, n_)).norm() > 1e-10) {
      throw std::invalid_argument("ObservationEvaluator: matrix is not orthogonal");
    }
    // Exact congruence law R -> Q^T R Q.
    ConstraintSet set;
    set.family = ConstraintFamily::sos;
    for (std::size_t i = 0; i < r_list_.size(); ++i) {
      Mat a = q.transpose() * r_list_[i] * q;
      if (symmetrize_) {
        a = ((a + a.transpose()) / 2.0).eval();
      }
      set.frobenius_norms.push_back(a.norm());
      set.matrices.push_back(std::move(a));
      set.meta.push_back(ConstraintMeta{lags_[i], -1, -1});
    }
    return set;
  }

  const ConstraintSet full = evaluate_all(q);
  if (static_cast<int>(selected_.size()) == full.size()) {
    return full;
  }
  ConstraintSet out;
  out.family = full.family;
  for (int idx : selected_) {
    out.matrices.push_back(full.matrices[idx]);
    out.meta.push_back(full.meta[idx]);
    out.frobenius_norms.push_back(full.frobenius_norms[idx]);
  }
  return out;
}

Vec ObservationEvaluator::phi(const Mat& q) const {
  const ConstraintSet set = evaluate(q);
  const int n2 = n_ * n_;
  Vec out(static_cast<long>(set.size()) * n2);
  for (int i = 0; i < set.size(); ++i) {
    out.segment(static_cast<long>(i) * n2, n2) = vec(set.matrices[i]);
  }
  return out;
}

Mat jacobian_fd(const ObservationEvaluator& ev, const SkewBasis& basis, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("jacobian_fd: step must be positive");
  }
  if (basis.n != ev.channels()) {
    throw std::invalid_argument("jacobian_fd: basis dimension mismatch");
  }
  const long rows = static_cast<long>(ev.constraint_count()) * ev.channels() * ev.channels();
  Mat j(rows, basis.dim());
  for (int k = 0; k < basis.dim(); ++k) {
    const Vec forward = ev.phi(expm_skew(step * basis.generators[k]));
    const Vec backward = ev.phi(expm_skew(-step * basis.generators[k]));
    j.col(k) = (forward - backward) / (2.0 * step);
  }
  return j;
}

Mat jacobian_sos_analytic(const std::vector<Mat>& r_list, const SkewBasis& basis) {
  if (r_list.empty()) {
    throw std::invalid_argument("jacobian_sos_analytic: empty constraint list");
  }
  const long n = r_list.front().rows();
  if (n != basis.n) {
    throw std::invalid_argument("jacobian_sos_analytic: basis dimension mismatch");
  }
  for (const Mat& r : r_list) {
    if (r.rows() != n || r.cols() != n) {
      throw std::invalid_argument("jacobian_sos_analytic: constraint sizes differ");
    }
  }
  Mat j(static_cast<long>(r_list.size()) * n * n, basis.dim());
  for (int k = 0; k < basis.dim(); ++k) {
    for (std::size_t i = 0; i < r_list.size(); ++i) {
      j.col(k).segment(static_cast<long>(i) * n * n, n * n) =
          vec(commutator(r_list[i], basis.generators[k]));
    }
  }
  return j;
}

JacobianReport report_from_jacobian(const Mat& j, double tol) {
  JacobianReport report;
  report.rows = j.rows();
  report.cols = j.cols();
  report.singular_values = singular_spectrum(j);
  report.probe = report.singular_values.back();
  report.tol = tol;
  const double cutoff = tol * std::max(report.singular_values.front(), 1.0);
  int rank = 0;
  for (double s : report.singular_values) {
    if (s > cutoff) {
      ++rank;
    }
  }
  report.kernel_dim = static_cast<int>(report.cols) - rank;
  return report;
}

JacobianReport probe(const ObservationEvaluator& ev, const SkewBasis& basis, JacobianMode mode,
                     double step, double tol) {
  if (mode == JacobianMode::analytic_sos) {
    if (ev.family() != ConstraintFamily::sos) {
      throw std::invalid_argument("probe: analytic mode requires the SOS family");
    }
    const ConstraintSet at_identity = ev.evaluate(Mat::Identity(ev.channels(), ev.channels()));
    return report_from_jacobian(jacobian_sos_analytic(at_identity.matrices, basis), tol);
  }
  return report_from_jacobian(jacobian_fd(ev, basis, step), tol);
}

StackedKernel kernel_intersection_check(const std::vector<Mat>& jacobians, double tol) {
  if (jacobians.empty()) {
    throw std::invalid_argument("kernel_intersection_check: empty list");
  }
  const long cols = jacobians.front().cols();
  long rows = 0;
  for (const Mat& j : jacobians) {
    if (j.cols() != cols) {
      throw std::invalid_argument("kernel_intersection_check: column dimensions differ");
    }
    rows += j.rows();
  }
  StackedKernel out;
  out.stacked.resize(rows, cols);
  long at = 0;
  for (const Mat& j : jacobians) {
    out.stacked.middleRows(at, j.rows()) = j;
    at += j.rows();
  }
  out.report = report_from_jacobian(out.stacked, tol);
  return out;
}

}  // namespace stabprobe
