#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/digamma.hpp>

#include "bavardage/error.hpp"
#include "bavardage/numerics.hpp"
#include "support.hpp"

using namespace bavardage;
using numerics::digamma;

TEST_CASE("digamma at known constants") {
  constexpr double euler_gamma = 0.57721566490153286061;
  CHECK(std::abs(digamma(1.0) + euler_gamma) < 1e-10);
  CHECK(std::abs(digamma(2.0) - (1.0 - euler_gamma)) < 1e-10);
  CHECK(std::abs(digamma(0.5) - (-euler_gamma - 2.0 * std::log(2.0))) < 1e-10);
}

TEST_CASE("digamma matches a finite difference of log-gamma") {
  const double h = 1e-6;
  const double x = 10.5;
  const double fd = (std::lgamma(x + h) - std::lgamma(x - h)) / (2 * h);
  CHECK(std::abs(digamma(x) - fd) < 1e-5);
}

TEST_CASE("digamma agrees with boost to 1e-10 from 1e-3 upward") {
  for (double x = 1e-3; x < 500.0; x *= 1.07) {
    INFO("x = " << x);
    CHECK(std::abs(digamma(x) - boost::math::digamma(x)) < 1e-10);
  }
}

TEST_CASE("digamma recurrence on a 1000-point grid") {
  for (int i = 0; i < 1000; ++i) {
    const double x = 0.1 + (100.0 - 0.1) * i / 999.0;
    INFO("x = " << x);
    CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-10);
  }
}

TEST_CASE("digamma rejects non-positive arguments") {
  CHECK_THROWS_AS(digamma(0.0), Error);
  CHECK_THROWS_AS(digamma(-1.5), Error);
  CHECK_THROWS_AS(digamma(std::nan("")), Error);
}

namespace {

void check_eigen_invariants(const Matrix& a, const numerics::EigenDecomposition& eig) {
  const auto n = a.rows();
  REQUIRE(eig.values.size() == n);
  REQUIRE(eig.vectors.rows() == n);
  REQUIRE(eig.vectors.cols() == n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector v = eig.vectors.col(i);
    CHECK((a * v - eig.values[i] * v).norm() <= 1e-8 * (1.0 + std::abs(eig.values[i])) * v.norm());
    if (i > 0) CHECK(eig.values[i - 1] >= eig.values[i]);
  }
  CHECK((eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-8);
}

}  // namespace

TEST_CASE("sym_eigh on the identity") {
  const Matrix id = Matrix::Identity(4, 4);
  const auto eig = numerics::sym_eigh(id);
  check_eigen_invariants(id, eig);
  CHECK((eig.values.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("sym_eigh on diag(3, 1) returns axis-aligned vectors") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = 3.0;
  const auto eig = numerics::sym_eigh(a);
  CHECK(eig.values[0] == doctest::Approx(3.0));
  CHECK(eig.values[1] == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(eig.vectors(1, 0)) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(eig.vectors(0, 1)) - 1.0) < 1e-12);
  // sign convention: largest-magnitude entry positive
  CHECK(eig.vectors(1, 0) > 0.0);
  CHECK(eig.vectors(0, 1) > 0.0);
}

TEST_CASE("sym_eigh reconstructs random symmetric matrices") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing::random_symmetric(gen, 6);
    const auto eig = numerics::sym_eigh(a);
    check_eigen_invariants(a, eig);
    const Matrix rebuilt = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((rebuilt - a).norm() <= 1e-8 * a.norm());
    CHECK(std::abs(eig.values.sum() - a.trace()) <= 1e-8 * std::max(1.0, std::abs(a.trace())));
  }
}

TEST_CASE("sym_eigh rejects asymmetric input") {
  Matrix a = Matrix::Identity(3, 3);
  a(0, 2) = 1e-3;
  CHECK_THROWS_AS(numerics::sym_eigh(a), Error);
  CHECK_THROWS_AS(numerics::sym_eigh(Matrix::Zero(2, 3)), Error);
}

TEST_CASE("normalize_log_rows examples") {
  Matrix logits(3, 3);
  logits << 0, 0, 0, std::log(2.0), 0, 0, 1000, 0, -1000;
  const Matrix p = numerics::normalize_log_rows(logits);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(p(0, k) - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(p(1, 0) - 0.5) < 1e-15);
  CHECK(std::abs(p(1, 1) - 0.25) < 1e-15);
  CHECK(std::abs(p(1, 2) - 0.25) < 1e-15);
  CHECK(p(2, 0) == 1.0);
  CHECK(p(2, 1) >= 0.0);
  CHECK(p(2, 1) < 1e-300);
  CHECK(p.allFinite());
}

TEST_CASE("normalize_log_rows is shift-invariant and row-stochastic") {
  std::mt19937_64 gen(3);
  const Matrix logits = testing::random_matrix(gen, 50, 6, 20.0);
  Matrix shifted = logits;
  std::uniform_real_distribution<double> u(-500, 500);
  for (Eigen::Index r = 0; r < shifted.rows(); ++r) shifted.row(r).array() += u(gen);
  const Matrix a = numerics::normalize_log_rows(logits);
  const Matrix b = numerics::normalize_log_rows(shifted);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  Eigen::RowVectorXd row(4);
  row << 0.1, 0.4, 0.4, 0.1;
  CHECK(numerics::argmax(row) == 1);
}

TEST_CASE("Rng streams are reproducible and independent") {
  numerics::Rng a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("Rng draws have the right first two moments") {
  numerics::Rng rng(5);
  const int n = 200000;
  double s_n = 0, ss_n = 0, s_g = 0, ss_g = 0, s_s = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s_n += z;
    ss_n += z * z;
    const double g = rng.gamma(2.5);
    s_g += g;
    ss_g += g * g;
    s_s += rng.gamma(0.4);
  }
  CHECK(std::abs(s_n / n) < 0.01);
  CHECK(std::abs(ss_n / n - 1.0) < 0.02);
  CHECK(std::abs(s_g / n - 2.5) < 0.02);
  CHECK(std::abs(ss_g / n - (s_g / n) * (s_g / n) - 2.5) < 0.06);
  CHECK(std::abs(s_s / n - 0.4) < 0.01);

  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[rng.uniform_index(7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 400);
}
