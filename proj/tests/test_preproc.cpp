#include <doctest.h>

#include "bavardage/error.hpp"
#include "bavardage/preproc.hpp"
#include "support.hpp"

using namespace bavardage;

TEST_CASE("all-off preprocessing is the identity") {
  std::mt19937_64 gen(2);
  const Matrix x = testing::random_matrix(gen, 6, 4);
  const PreprocConfig off{false, false, std::nullopt};
  const auto out = preprocess(x, Vector::Ones(4), off);
  CHECK(out.features == x);
  CHECK(std::none_of(out.zero_norm.begin(), out.zero_norm.end(), [](bool b) { return b; }));
}

TEST_CASE("a row equal to the base mean becomes a flagged zero row") {
  Matrix x(2, 3);
  x << 1, 2, 3, 1, 2, 4;
  const Vector mean = x.row(0).transpose();
  const auto out = preprocess(x, mean, PreprocConfig{});
  CHECK(out.features.row(0).isZero(0.0));
  CHECK(out.zero_norm[0]);
  CHECK_FALSE(out.zero_norm[1]);
  CHECK(out.features(1, 2) == 1.0);
}

TEST_CASE("center and normalize (3, 4)") {
  Matrix x(1, 2);
  x << 3, 4;
  const auto out = preprocess(x, Vector::Zero(2), PreprocConfig{});
  CHECK(std::abs(out.features(0, 0) - 0.6) < 1e-15);
  CHECK(std::abs(out.features(0, 1) - 0.8) < 1e-15);
}

TEST_CASE("normalized rows have unit norm and rows are processed independently") {
  std::mt19937_64 gen(9);
  const Matrix x = testing::random_matrix(gen, 30, 8, 3.0);
  const Vector mean = testing::random_matrix(gen, 8, 1);
  const auto out = preprocess(x, mean, PreprocConfig{});
  for (Eigen::Index r = 0; r < x.rows(); ++r) CHECK(std::abs(out.features.row(r).norm() - 1.0) < 1e-12);

  Matrix reversed = x.colwise().reverse();
  const auto out_rev = preprocess(reversed, mean, PreprocConfig{});
  CHECK(out_rev.features == Matrix(out.features.colwise().reverse()));
}

TEST_CASE("power transform precedes centering") {
  Matrix x(2, 2);
  x << 4, -9, 16, 1;
  PreprocConfig cfg{true, false, 0.5};
  const Vector mean = preprocessing_mean(x, cfg);
  CHECK(mean[0] == doctest::Approx(3.0));
  CHECK(mean[1] == doctest::Approx(-1.0));
  const auto out = preprocess(x, mean, cfg);
  CHECK(out.features(0, 0) == doctest::Approx(-1.0));
  CHECK(out.features(0, 1) == doctest::Approx(-2.0));
}

TEST_CASE("preprocessing errors") {
  CHECK_THROWS_AS(preprocess(Matrix::Zero(2, 3), Vector::Zero(2), PreprocConfig{}), Error);
  CHECK_THROWS_AS(preprocess(Matrix::Zero(2, 3), Vector::Zero(3), PreprocConfig{true, true, 1.5}), Error);
  CHECK_THROWS_AS(preprocess(Matrix::Zero(2, 3), Vector::Zero(3), PreprocConfig{true, true, 0.0}), Error);
}

TEST_CASE("prepare_splits maps both splits into one space") {
  std::mt19937_64 gen(5);
  Matrix means = testing::random_matrix(gen, 4, 3, 5.0);
  const Matrix cov = Matrix::Identity(3, 3);
  const auto base = testing::gaussian_bundle(gen, means.topRows(2), cov, 20, SplitTag::base);
  const auto novel = testing::gaussian_bundle(gen, means.bottomRows(2), cov, 20, SplitTag::novel);
  const auto prepared = prepare_splits(base, novel, PreprocConfig{});
  CHECK((prepared.centering_mean - base.features.colwise().mean().transpose()).norm() < 1e-12);
  for (Eigen::Index r = 0; r < prepared.novel.rows(); ++r)
    CHECK(std::abs(prepared.novel.features.row(r).norm() - 1.0) < 1e-12);
  const auto direct = compute_base_statistics(prepared.base);
  CHECK(prepared.stats.scatter == direct.scatter);
}
