#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <stdexcept>

#include "kfbias/fusion.hpp"
#include "kfbias/kalman.hpp"
#include "kfbias/model.hpp"

using namespace kfbias;

namespace {

SensorSuite position_pair() {
  SensorSuite suite;
  Sensor a;
  a.h = Matrix{{1.0, 0.0}};
  a.r = Matrix{{3.0}};
  a.name = "radar-a";
  Sensor b = a;
  b.r = Matrix{{4.0}};
  b.name = "radar-b";
  suite.sensors = {a, b};
  return suite;
}

SensorSuite pv_pair() {
  SensorSuite suite;
  Sensor a;
  a.h = Matrix::Identity(2, 2);
  a.r = Matrix::Zero(2, 2);
  a.r(0, 0) = 3.0;
  a.r(1, 1) = 4.0;
  a.name = "pv-a";
  Sensor b = a;
  b.r(0, 0) = 4.0;
  b.r(1, 1) = 5.0;
  b.name = "pv-b";
  suite.sensors = {a, b};
  return suite;
}

}  // namespace

TEST_CASE("identical-H fusion: harmonic-mean noise and information weights") {
  const EquivalentSensor e = fuse_identical_h(position_pair());
  // 1/r_e = 1/3 + 1/4 = 7/12.
  CHECK(e.fused.r(0, 0) == doctest::Approx(12.0 / 7.0).epsilon(1e-14));
  REQUIRE(e.weights.size() == 2);
  CHECK(e.weights[0](0, 0) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(e.weights[1](0, 0) == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  // Weights are convex: they sum to the identity.
  CHECK(e.weights[0](0, 0) + e.weights[1](0, 0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.fused.h(0, 0) == 1.0);
  CHECK(e.fused.h(0, 1) == 0.0);
}

TEST_CASE("identical-H fusion rejects sensors with different maps") {
  SensorSuite suite = position_pair();
  suite.sensors[1].h = Matrix{{0.0, 1.0}};
  CHECK_THROWS_AS(fuse_identical_h(suite), std::invalid_argument);
}

TEST_CASE("observable fusion of two position-velocity sensors") {
  const EquivalentSensor e = fuse_observable(pv_pair());
  // Position info 1/3 + 1/4, velocity info 1/4 + 1/5.
  CHECK(e.fused.r(0, 0) == doctest::Approx(12.0 / 7.0).epsilon(1e-14));
  CHECK(e.fused.r(1, 1) == doctest::Approx(20.0 / 9.0).epsilon(1e-14));
  CHECK(std::abs(e.fused.r(0, 1)) < 1e-15);
  CHECK(e.fused.h.isIdentity(1e-15));

  REQUIRE(e.weights.size() == 2);
  CHECK(e.weights[0](0, 0) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(e.weights[0](1, 1) == doctest::Approx(5.0 / 9.0).epsilon(1e-14));
  CHECK(e.weights[1](0, 0) == doctest::Approx(3.0 / 7.0).epsilon(1e-14));
  CHECK(e.weights[1](1, 1) == doctest::Approx(4.0 / 9.0).epsilon(1e-14));

  // sum_i C_i H_i = H_e = I.
  Matrix sum = Matrix::Zero(2, 2);
  for (std::size_t i = 0; i < e.weights.size(); ++i) {
    sum += e.weights[i] * pv_pair().sensors[i].h;
  }
  CHECK(sum.isIdentity(1e-12));
}

TEST_CASE("observable fusion rejects a position-only suite") {
  // Velocity is unobserved: H^T R^-1 H is singular.
  CHECK_THROWS_AS(fuse_observable(position_pair()), std::invalid_argument);
}

TEST_CASE("fused filter matches the stacked-measurement filter") {
  const StateSpaceModel m = build_dwna_model(1.0, 0.25);
  SteadyStateOptions tight;
  tight.tol = 1e-12;

  SUBCASE("position pair") {
    const SensorSuite suite = position_pair();
    const GainSchedule fused =
        steady_state(m, fuse_identical_h(suite).fused, tight);
    const GainSchedule stacked = steady_state(m, stack_suite(suite), tight);
    REQUIRE(fused.steady);
    REQUIRE(stacked.steady);
    CHECK((fused.steady_covariance() - stacked.steady_covariance())
              .cwiseAbs()
              .maxCoeff() < 1e-8);
  }
  SUBCASE("position-velocity pair") {
    const SensorSuite suite = pv_pair();
    const GainSchedule fused =
        steady_state(m, fuse_observable(suite).fused, tight);
    const GainSchedule stacked = steady_state(m, stack_suite(suite), tight);
    REQUIRE(fused.steady);
    REQUIRE(stacked.steady);
    CHECK((fused.steady_covariance() - stacked.steady_covariance())
              .cwiseAbs()
              .maxCoeff() < 1e-8);
  }
}

TEST_CASE("equivalent bias covariance is the weighted quadratic form") {
  const EquivalentSensor e = fuse_identical_h(position_pair());

  SUBCASE("fully correlated optimal allocation") {
    Vector sigma(2);
    sigma << 43.81780460041329, 32.86335345030997;
    const Matrix joint = sigma * sigma.transpose();  // rho = +1
    const Matrix se = equivalent_bias_covariance(e.weights, joint);
    // (sum_i c_i sigma_i)^2 = a^2 ||c||^2 = 3000 * 25/49.
    CHECK(se(0, 0) == doctest::Approx(3000.0 * 25.0 / 49.0).epsilon(1e-12));
  }
  SUBCASE("equal-power fully correlated strategy") {
    Vector sigma(2);
    sigma << std::sqrt(1500.0), std::sqrt(1500.0);
    const Matrix joint = sigma * sigma.transpose();
    const Matrix se = equivalent_bias_covariance(e.weights, joint);
    CHECK(se(0, 0) == doctest::Approx(1500.0).epsilon(1e-12));
  }
  SUBCASE("independent biases add in quadrature") {
    Matrix joint = Matrix::Zero(2, 2);
    joint(0, 0) = 1500.0;
    joint(1, 1) = 1500.0;
    const Matrix se = equivalent_bias_covariance(e.weights, joint);
    // (4/7)^2 1500 + (3/7)^2 1500 = 1500 * 25/49.
    CHECK(se(0, 0) == doctest::Approx(1500.0 * 25.0 / 49.0).epsilon(1e-12));
  }
}

TEST_CASE("bias covariance shape mismatches are rejected") {
  const EquivalentSensor e = fuse_identical_h(position_pair());
  const Matrix joint = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(equivalent_bias_covariance(e.weights, joint),
                  std::invalid_argument);
}
