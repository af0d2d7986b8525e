#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabprobe/probe.hpp"
#include "stabprobe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace stabprobe;

namespace {

SignalBlock gg_block(double p, int n, long t, std::uint64_t stream) {
  SourceSpec spec;
  spec.kind = SourceKind::iid_gg;
  spec.shape = p;
  return generate_sources(spec, n, t, {1234, stream});
}

SignalBlock ar_block(int n, long t, std::uint64_t stream) {
  SourceSpec spec;
  spec.kind = SourceKind::ar1_gaussian;
  spec.ar = {0.2, 0.6, 0.9};
  spec.ar.resize(n, 0.5);
  return generate_sources(spec, n, t, {4321, stream});
}

// Brute-force sample cumulant: Cum(a,b,c,d) from raw moments of centered data.
Mat brute_force_cumulant(const Mat& z, const Mat& m) {
  const long t = z.rows();
  const int n = static_cast<int>(z.cols());
  Mat q = Mat::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double e_abkl = 0.0;
          for (long i = 0; i < t; ++i) {
            e_abkl += z(i, a) * z(i, b) * z(i, k) * z(i, l);
          }
          e_abkl /= static_cast<double>(t);
          const double e_ab = z.col(a).dot(z.col(b)) / t;
          const double e_kl = z.col(k).dot(z.col(l)) / t;
          const double e_ak = z.col(a).dot(z.col(k)) / t;
          const double e_bl = z.col(b).dot(z.col(l)) / t;
          const double e_al = z.col(a).dot(z.col(l)) / t;
          const double e_bk = z.col(b).dot(z.col(k)) / t;
          const double cum = e_abkl - e_ab * e_kl - e_ak * e_bl - e_al * e_bk;
          q(k, l) += m(a, b) * cum;
        }
      }
    }
  }
  return q;
}

}  // namespace

TEST_CASE("sample_mean_cov on degenerate inputs") {
  SignalBlock constant;
  constant.samples = Mat::Ones(50, 3) * 2.5;
  const auto [mean, cov] = sample_mean_cov(constant);
  CHECK((mean.array() - 2.5).abs().maxCoeff() == 0.0);
  CHECK(cov.norm() == 0.0);

  SignalBlock dup;
  dup.samples.resize(200, 2);
  std::mt19937 gen(5);
  std::normal_distribution<double> dist;
  for (long i = 0; i < 200; ++i) {
    dup.samples(i, 0) = dist(gen);
    dup.samples(i, 1) = dup.samples(i, 0);
  }
  const auto [m2, c2] = sample_mean_cov(dup);
  Eigen::SelfAdjointEigenSolver<Mat> eig(c2);
  CHECK(std::abs(eig.eigenvalues()[0]) <= 1e-12);

  SignalBlock single;
  single.samples = Mat::Ones(1, 2);
  CHECK_THROWS_AS(sample_mean_cov(single), std::invalid_argument);
}

TEST_CASE("sample covariance of white noise shrinks toward I") {
  auto max_dev = [](long t) {
    const SignalBlock x = gg_block(2.0, 3, t, 1);
    const auto [mean, cov] = sample_mean_cov(x);
    return (cov - Mat::Identity(3, 3)).cwiseAbs().maxCoeff();
  };
  const double at_1e4 = max_dev(10000);
  const double at_1e6 = max_dev(1000000);
  CHECK(max_dev(100000) <= 0.02);
  CHECK(at_1e6 < at_1e4);  // ~1/sqrt(T) shrinkage
}

TEST_CASE("fit_whitener produces an exact whitener for the fitting sample") {
  // Already-white data: covariance I, so W is orthogonal.
  SignalBlock raw = ar_block(3, 20000, 2);
  const Whitener pre = fit_whitener(raw);
  SignalBlock white = pre.apply(raw);
  const Whitener wh = fit_whitener(white);
  CHECK((wh.w * wh.w.transpose() - Mat::Identity(3, 3)).norm() <= 1e-9);

  // Scaling: rows of W shrink by the same factor.
  SignalBlock scaled;
  scaled.samples = 3.0 * white.samples;
  const Whitener ws = fit_whitener(scaled);
  for (int i = 0; i < 3; ++i) {
    CHECK(ws.w.row(i).norm() == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  }

  // Mixed AR sources through a random mixing matrix.
  const Mat h = random_orthogonal(3, {77, 0}) * 2.0;
  const SignalBlock x = mix(h, ar_block(3, 100000, 3));
  const Whitener wx = fit_whitener(x);
  const auto [mean, cov] = sample_mean_cov(wx.apply(x));
  CHECK((cov - Mat::Identity(3, 3)).norm() <= 1e-10);
}

TEST_CASE("fit_whitener names the offending eigenvalue") {
  SignalBlock dup;
  dup.samples.resize(500, 2);
  std::mt19937 gen(6);
  std::normal_distribution<double> dist;
  for (long i = 0; i < 500; ++i) {
    dup.samples(i, 0) = dist(gen);
    dup.samples(i, 1) = 2.0 * dup.samples(i, 0);
  }
  CHECK_THROWS_WITH_AS(fit_whitener(dup), doctest::Contains("eigenvalue"), std::runtime_error);
}

TEST_CASE("lagged_cov matches whitening and AR oracles") {
  const SignalBlock x = ar_block(3, 100000, 4);
  const Whitener wh = fit_whitener(x);
  const SignalBlock z = wh.apply(x);
  CHECK((lagged_cov(z, 0, false) - Mat::Identity(3, 3)).norm() <= 1e-10);

  const Vec slow = sample_ar1(0.9, 100000, std::nullopt, {55, 0});
  SignalBlock one;
  one.samples = slow;
  CHECK(lagged_cov(one, 1, true)(0, 0) == doctest::Approx(0.9).epsilon(0.012));

  const SignalBlock white = gg_block(2.0, 3, 100000, 5);
  CHECK(lagged_cov(white, 1, false).cwiseAbs().maxCoeff() <= 0.02);

  CHECK_THROWS_AS(lagged_cov(one, 100000, false), std::invalid_argument);
}

TEST_CASE("sos_constraints carries lag tags in order") {
  const SignalBlock z = ar_block(3, 5000, 6);
  const ConstraintSet one = sos_constraints(z, 1, true);
  REQUIRE(one.size() == 1);
  CHECK(one.meta[0].lag == 1);

  const ConstraintSet seven = sos_constraints(z, 7, true);
  REQUIRE(seven.size() == 7);
  for (int i = 0; i < 7; ++i) {
    CHECK(seven.meta[i].lag == i + 1);
    CHECK(seven.meta[i].label() == std::to_string(i + 1));
    CHECK((seven.matrices[i] - lagged_cov(z, i + 1, true)).norm() == 0.0);
  }
  CHECK_THROWS_AS(sos_constraints(z, 0, true), std::invalid_argument);
}

TEST_CASE("white-noise lagged covariances sit at the sampling-noise scale") {
  // Monte Carlo oracle: entries are O(1/sqrt(T)), so norms are O(n/sqrt(T)).
  const long t = 20000;
  const double expected_scale = 3.0 / std::sqrt(static_cast<double>(t));
  double mean_norm = 0.0;
  const int trials = 50;
  for (int i = 0; i < trials; ++i) {
    const ConstraintSet set = sos_constraints(gg_block(2.0, 3, t, 100 + i), 3, true);
    for (const Mat& m : set.matrices) {
      mean_norm += m.norm();
    }
  }
  mean_norm /= trials * 3;
  CHECK(mean_norm > 0.2 * expected_scale);
  CHECK(mean_norm < 2.0 * expected_scale);
}

TEST_CASE("symmetric basis is orthonormal in canonical order") {
  const std::vector<Mat> basis = symmetric_basis(3);
  REQUIRE(basis.size() == 6);
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j, ++k) {
      CHECK(basis[k].norm() == doctest::Approx(1.0).epsilon(1e-15));
      CHECK(basis[k](i, j) != 0.0);
    }
  }
  for (std::size_t a = 0; a < basis.size(); ++a) {
    for (std::size_t b = a + 1; b < basis.size(); ++b) {
      CHECK(std::abs(basis[a].cwiseProduct(basis[b]).sum()) <= 1e-15);
    }
  }
}

TEST_CASE("cumulant_matrices vanish for Gaussian data") {
  const SignalBlock raw = gg_block(2.0, 3, 100000, 7);
  const SignalBlock z = fit_whitener(raw).apply(raw);
  const ConstraintSet set = cumulant_matrices(z);
  REQUIRE(set.size() == 6);
  for (const Mat& q : set.matrices) {
    CHECK(q.norm() <= 0.1);
  }
}

TEST_CASE("cumulant_matrices recover the kurtosis diagonal") {
  // Independent Laplace channels have population Q(M_ii) = 3 e_i e_i^T.
  const SignalBlock z = gg_block(1.0, 3, 1000000, 8);
  const ConstraintSet set = cumulant_matrices(z);
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j, ++k) {
      Mat expected = Mat::Zero(3, 3);
      if (i == j) {
        expected(i, i) = 3.0;
      }
      CHECK((set.matrices[k] - expected).cwiseAbs().maxCoeff() <= 0.12);
    }
  }
}

TEST_CASE("cumulant_matrices agree with the brute-force cumulant contraction") {
  const SignalBlock raw = gg_block(1.0, 2, 20000, 9);
  const SignalBlock z = fit_whitener(raw).apply(raw);
  const ConstraintSet set = cumulant_matrices(z);
  const std::vector<Mat> basis = symmetric_basis(2);
  for (int b = 0; b < set.size(); ++b) {
    const Mat oracle = brute_force_cumulant(z.samples, basis[b]);
    // The estimator assumes E[zz^T] = I; the fitted sample satisfies it to
    // rounding, so both routes agree up to that substitution.
    CHECK((set.matrices[b] - oracle).cwiseAbs().maxCoeff() <= 0.02);
  }
}

TEST_CASE("cumulant_matrices rejects unwhitened input") {
  SignalBlock loud;
  loud.samples = 3.0 * gg_block(2.0, 3, 1000, 10).samples;
  CHECK_THROWS_AS(cumulant_matrices(loud), std::invalid_argument);

  SignalBlock tiny;
  tiny.samples = Mat::Ones(50, 2);
  CHECK_THROWS_AS(cumulant_matrices(tiny), std::invalid_argument);
}

TEST_CASE("cumulant matrices are symmetric and time-order invariant") {
  const SignalBlock raw = gg_block(1.0, 3, 5000, 11);
  const SignalBlock z = fit_whitener(raw).apply(raw);
  const ConstraintSet set = cumulant_matrices(z);
  for (const Mat& q : set.matrices) {
    CHECK((q - q.transpose()).norm() <= 1e-12);
  }

  SignalBlock shuffled = z;
  std::vector<long> order(z.length());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(12));
  for (long i = 0; i < z.length(); ++i) {
    shuffled.samples.row(i) = z.samples.row(order[i]);
  }
  const ConstraintSet reordered = cumulant_matrices(shuffled);
  for (int b = 0; b < set.size(); ++b) {
    CHECK((set.matrices[b] - reordered.matrices[b]).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("finite-sample congruence law holds exactly") {
  const SignalBlock raw = ar_block(3, 20000, 13);
  const SignalBlock z = fit_whitener(raw).apply(raw);
  const Mat q = random_orthogonal(3, {91, 0});
  const SignalBlock zq = rotate_signals(z, q);
  for (int tau : {1, 2, 3}) {
    for (bool sym : {false, true}) {
      const Mat direct = lagged_cov(zq, tau, sym);
      const Mat congruent = sym ? Mat(((q.transpose() * lagged_cov(z, tau, false) * q +
                                        q.transpose() * lagged_cov(z, tau, false).transpose() * q) /
                                       2.0))
                                : Mat(q.transpose() * lagged_cov(z, tau, false) * q);
      CHECK((direct - congruent).norm() <= 1e-12 * std::max(1.0, congruent.norm()));
    }
  }
}

TEST_CASE("sort_truncate orders by norm with stable ties") {
  ConstraintSet set;
  set.family = ConstraintFamily::sos;
  for (int i = 0; i < 3; ++i) {
    set.matrices.push_back(Mat::Identity(2, 2));
    set.meta.push_back(ConstraintMeta{i + 1, -1, -1});
  }
  set.frobenius_norms = {3.0, 1.0, 2.0};
  const ConstraintSet top2 = sort_truncate(set, 2);
  REQUIRE(top2.size() == 2);
  CHECK(top2.meta[0].lag == 1);
  CHECK(top2.meta[1].lag == 3);

  const ConstraintSet all = sort_truncate(set, 3);
  CHECK(all.meta[0].lag == 1);
  CHECK(all.meta[1].lag == 3);
  CHECK(all.meta[2].lag == 2);

  set.frobenius_norms = {1.0, 1.0, 1.0};
  const ConstraintSet ties = sort_truncate(set, 3);
  CHECK(ties.meta[0].lag == 1);
  CHECK(ties.meta[1].lag == 2);
  CHECK(ties.meta[2].lag == 3);

  CHECK_THROWS_AS(sort_truncate(set, 0), std::invalid_argument);
  CHECK_THROWS_AS(sort_truncate(set, 4), std::invalid_argument);
}
