#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stabprobe/linalg.hpp"

#include <cmath>
#include <random>

using namespace stabprobe;

namespace {

Mat random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      m(i, j) = dist(gen);
    }
  }
  return m;
}

Mat random_skew(int n, unsigned seed) {
  const Mat m = random_matrix(n, n, seed);
  return (m - m.transpose()) / 2.0;
}

// so(3) closed form, the test-side oracle for expm_skew.
Mat rodrigues(const Mat& omega) {
  Vec axis(3);
  axis << omega(2, 1), omega(0, 2), omega(1, 0);
  const double theta = axis.norm();
  if (theta == 0.0) {
    return Mat::Identity(3, 3);
  }
  return Mat::Identity(3, 3) + std::sin(theta) / theta * omega +
         (1.0 - std::cos(theta)) / (theta * theta) * (omega * omega);
}

}  // namespace

TEST_CASE("skew basis has canonical order and exact orthogonality") {
  const SkewBasis b2 = skew_basis(2);
  REQUIRE(b2.dim() == 1);
  Mat expected(2, 2);
  expected << 0, 1, -1, 0;
  CHECK((b2.generators[0] - expected).norm() == 0.0);

  CHECK(skew_basis(3).dim() == 3);

  const SkewBasis b5 = skew_basis(5);
  REQUIRE(b5.dim() == 10);
  int k = 0;
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b, ++k) {
      CHECK(b5.generators[k](a, b) == 1.0);
      CHECK(b5.generators[k](b, a) == -1.0);
    }
  }
  for (int i = 0; i < b5.dim(); ++i) {
    CHECK(b5.generators[i].cwiseProduct(b5.generators[i]).sum() == 2.0);
    CHECK((b5.generators[i] + b5.generators[i].transpose()).norm() == 0.0);
    for (int j = i + 1; j < b5.dim(); ++j) {
      CHECK(b5.generators[i].cwiseProduct(b5.generators[j]).sum() == 0.0);
    }
  }

  CHECK_THROWS_AS(skew_basis(1), std::invalid_argument);
}

TEST_CASE("expm_skew matches closed forms") {
  CHECK((expm_skew(Mat::Zero(4, 4)) - Mat::Identity(4, 4)).norm() == 0.0);

  Mat omega(2, 2);
  omega << 0, -M_PI / 2, M_PI / 2, 0;
  Mat quarter(2, 2);
  quarter << 0, -1, 1, 0;
  CHECK((expm_skew(omega) - quarter).norm() <= 1e-12);

  const SkewBasis basis = skew_basis(3);
  CHECK((expm_skew(0.3 * basis.generators[0]) - rodrigues(0.3 * basis.generators[0])).norm() <=
        1e-12);
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const Mat w = random_skew(3, seed);
    CHECK((expm_skew(w) - rodrigues(w)).norm() <= 1e-12 * std::max(1.0, w.norm()));
  }
}

TEST_CASE("expm_skew output is orthogonal with positive determinant") {
  for (unsigned seed = 10; seed < 16; ++seed) {
    const Mat w = random_skew(5, seed) * 3.0;
    const Mat q = expm_skew(w);
    CHECK((q * q.transpose() - Mat::Identity(5, 5)).norm() <= 1e-12 * 5);
    CHECK(q.determinant() > 0.0);
  }
}

TEST_CASE("expm_skew inverse property up to norm 10") {
  for (unsigned seed = 20; seed < 26; ++seed) {
    Mat w = random_skew(4, seed);
    w *= 10.0 / w.norm();
    CHECK((expm_skew(w) * expm_skew(-w) - Mat::Identity(4, 4)).norm() <= 1e-11);
  }
}

TEST_CASE("expm_skew rejects bad input") {
  CHECK_THROWS_AS(expm_skew(Mat::Ones(2, 3)), std::invalid_argument);
  CHECK_THROWS_AS(expm_skew(Mat::Ones(3, 3)), std::invalid_argument);
}

TEST_CASE("commutator on closed-form cases") {
  const Mat id = Mat::Identity(3, 3);
  const Mat w = random_skew(3, 3);
  CHECK(commutator(id, w).norm() == 0.0);

  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 1.5;
  a(1, 1) = -0.5;
  Mat b(2, 2);
  b << 0, 1, -1, 0;
  Mat expected(2, 2);
  expected << 0, 2, 2, 0;
  CHECK((commutator(a, b) - expected).norm() == 0.0);
  CHECK((commutator(a, b) - (a * b - b * a)).norm() == 0.0);  // brute-force multiply

  CHECK_THROWS_AS(commutator(Mat::Identity(2, 2), Mat::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("commutator antisymmetry and bilinearity") {
  for (unsigned seed = 30; seed < 34; ++seed) {
    const Mat a = random_matrix(3, 3, seed);
    const Mat b = random_matrix(3, 3, seed + 100);
    const Mat c = random_matrix(3, 3, seed + 200);
    CHECK((commutator(a, b) + commutator(b, a)).norm() == 0.0);
    const double beta = 0.37;
    const double gamma = -1.2;
    const Mat lhs = commutator(a, beta * b + gamma * c);
    const Mat rhs = beta * commutator(a, b) + gamma * commutator(a, c);
    CHECK((lhs - rhs).norm() <= 1e-13 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("vec is column-wise and linear") {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  const Vec v = vec(m);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 3.0);
  CHECK(v[2] == 2.0);
  CHECK(v[3] == 4.0);

  CHECK(vec(Mat::Zero(3, 2)).norm() == 0.0);

  const Mat a = random_matrix(3, 4, 40);
  const Mat b = random_matrix(3, 4, 41);
  CHECK((vec(2.5 * a - 0.5 * b) - (2.5 * vec(a) - 0.5 * vec(b))).norm() == 0.0);
}

TEST_CASE("singular_spectrum on known spectra") {
  const std::vector<double> id3 = singular_spectrum(Mat::Identity(3, 3));
  REQUIRE(id3.size() == 3);
  for (double s : id3) {
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }

  Mat padded = Mat::Zero(4, 2);
  padded(0, 0) = 3.0;
  const std::vector<double> sv = singular_spectrum(padded);
  REQUIRE(sv.size() == 2);
  CHECK(sv[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(sv[1] == 0.0);

  // Orthogonal columns scaled to known norms: values are the norms.
  const Mat q = expm_skew(random_skew(3, 50));
  const double s2 = std::sqrt(2.0);
  Mat j(3, 3);
  j.col(0) = s2 * 0.7 * q.col(0);
  j.col(1) = s2 * 0.4 * q.col(1);
  j.col(2) = s2 * 0.3 * q.col(2);
  const std::vector<double> got = singular_spectrum(j);
  CHECK(got[0] == doctest::Approx(s2 * 0.7).epsilon(1e-12));
  CHECK(got[1] == doctest::Approx(s2 * 0.4).epsilon(1e-12));
  CHECK(got[2] == doctest::Approx(s2 * 0.3).epsilon(1e-12));
}

TEST_CASE("singular_spectrum is descending and orthogonally invariant") {
  const Mat j = random_matrix(6, 3, 60);
  const std::vector<double> base = singular_spectrum(j);
  for (std::size_t i = 1; i < base.size(); ++i) {
    CHECK(base[i] <= base[i - 1]);
  }
  const Mat ql = expm_skew(random_skew(6, 61));
  const Mat qr = expm_skew(random_skew(3, 62));
  const std::vector<double> rotated = singular_spectrum(ql * j * qr);
  for (std::size_t i = 0; i < base.size(); ++i) {
    CHECK(rotated[i] == doctest::Approx(base[i]).epsilon(1e-10));
  }
}

TEST_CASE("svd reconstructs the input") {
  const Mat j = random_matrix(8, 3, 70);
  const Svd f = svd(j);
  const Mat rebuilt = f.u * f.sigma.asDiagonal() * f.v.transpose();
  CHECK((j - rebuilt).norm() <= 1e-10 * std::max(1.0, j.norm()));
}

TEST_CASE("singular_spectrum rejects non-finite input") {
  Mat bad = Mat::Zero(2, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(singular_spectrum(bad), std::invalid_argument);
  bad(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(singular_spectrum(bad), std::invalid_argument);
}
