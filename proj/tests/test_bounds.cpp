#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gram_spectra/bounds.hpp"
#include "gram_spectra/errors.hpp"

namespace bounds = gram_spectra::bounds;
using gram_spectra::ValidationError;

namespace {

constexpr double e = std::numbers::e;

// Independent transcription of the negative-moment bound.
double oracle_min_sv(double n, double p, double r, double K) {
  const double c1 = r * std::pow(K, r / 2) / 2;
  const double c2 = 21 * e / K;
  const double c3 = 27 * r * std::pow(3 * e, r / 2 - 1) / (8 * K * std::sqrt(std::numbers::pi));
  return c1 / std::pow(n - p - 1, r / 2) + c3 * std::pow(c2, (n - p - r + 1) / 2) / std::pow(n - p - 1, (r - 4) / 2);
}

double oracle_normalized(double n, double p, double r, double K) {
  const double c1 = r * std::pow(K, r / 2) / 2;
  const double c2 = 21 * e / K;
  const double c3 = 27 * r * std::pow(3 * e, r / 2 - 1) / (8 * K * std::sqrt(std::numbers::pi));
  const double d = std::pow(1 - p / n - 1 / n, r / 2);
  return c1 / d + (n - p - 1) * (n - p - 1) * std::pow(c2, (n - p - r + 1) / 2) * c3 / d;
}

}  // namespace

TEST(MinSvBound, Constants) {
  const auto rep = bounds::min_sv_negative_moment_bound(200, 50, 2.0, 42 * e);
  EXPECT_TRUE(rep.valid);
  EXPECT_NEAR(rep.constants.at("c1"), 42 * e, 1e-12);
  EXPECT_NEAR(rep.constants.at("c2"), 0.5, 1e-15);
  EXPECT_NEAR(bounds::kDefaultK, 42 * e, 1e-15);
}

TEST(MinSvBound, DualImplementation) {
  for (double r : {0.5, 1.0, 2.0, 3.5}) {
    for (auto [n, p] : {std::pair{200.0, 50.0}, std::pair{60.0, 30.0}, std::pair{1000.0, 10.0}}) {
      const auto rep = bounds::min_sv_negative_moment_bound(static_cast<std::size_t>(n), static_cast<std::size_t>(p), r);
      EXPECT_NEAR(rep.value / oracle_min_sv(n, p, r, bounds::kDefaultK), 1.0, 1e-12);
      const auto norm = bounds::min_sv_normalized_moment_bound(static_cast<std::size_t>(n), static_cast<std::size_t>(p), r);
      EXPECT_NEAR(norm.value / oracle_normalized(n, p, r, bounds::kDefaultK), 1.0, 1e-12);
    }
  }
}

TEST(MinSvBound, Preconditions) {
  auto rep = bounds::min_sv_negative_moment_bound(10, 9, 2.0);  // n > p + r − 1 fails
  EXPECT_FALSE(rep.valid);
  EXPECT_TRUE(std::isinf(rep.value));
  EXPECT_FALSE(rep.reason.empty());
  EXPECT_TRUE(rep.to_json().at("value").is_null());
  rep = bounds::min_sv_negative_moment_bound(200, 50, 2.0, 21 * e);  // K must exceed 21e
  EXPECT_FALSE(rep.valid);
  rep = bounds::min_sv_negative_moment_bound(10, 9, 0.5);  // n > p + r − 1 holds but n − p − 1 = 0
  EXPECT_FALSE(rep.valid);
}

TEST(MinSvBound, NormalizedExamples) {
  const auto rep = bounds::min_sv_normalized_moment_bound(200, 50, 2.0);
  EXPECT_TRUE(rep.valid);
  EXPECT_GE(rep.value, rep.constants.at("c1") / (1 - 0.255));
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    const double rem = bounds::min_sv_normalized_moment_bound(n, n / 2, 2.0).constants.at("remainder_term");
    EXPECT_LT(rem, prev);
    prev = rem;
  }
  const auto zero = bounds::min_sv_normalized_moment_bound(200, 50, 0.0);
  EXPECT_TRUE(zero.valid);
  EXPECT_EQ(zero.constants.at("c1"), 0.0);
  EXPECT_EQ(zero.value, 0.0);
}

TEST(MaxSvBound, Examples) {
  const auto rep = bounds::max_sv_moment_bound(100, 25, 2.0);
  EXPECT_NEAR(rep.constants.at("c1_tilde"), 2.0, 1e-14);
  EXPECT_NEAR(rep.constants.at("c2_tilde"), 32.0, 1e-12);
  EXPECT_NEAR(rep.value, 482.0, 1e-10);
  EXPECT_NEAR(rep.constants.at("normalized_value"), 4.82, 1e-12);
  EXPECT_THROW(bounds::max_sv_moment_bound(100, 25, 0.0), ValidationError);
}

TEST(DongarraTail, Examples) {
  const auto rep = bounds::dongarra_kappa_tail(10, 5, 10.0, 6.414);
  EXPECT_NEAR(rep.value, std::pow(32.07 / 420.0, 6) / std::sqrt(2 * std::numbers::pi), 1e-18);
  double prev = std::numeric_limits<double>::infinity();
  for (double t = 10; t < 200; t *= 1.7) {
    const double v = bounds::dongarra_kappa_tail(10, 5, t).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  // exponent n − p + 1 = 1: linear decay in 1/t
  const double a = bounds::dongarra_kappa_tail(20, 20, 40.0).value;
  const double b = bounds::dongarra_kappa_tail(20, 20, 80.0).value;
  EXPECT_NEAR(a / b, 2.0, 1e-12);
  EXPECT_FALSE(bounds::dongarra_kappa_tail(10, 5, 5.0).valid);
  EXPECT_FALSE(bounds::dongarra_kappa_tail(10, 5, 20.0, 7.0).valid);
}

TEST(ExpectedLogKappa, Examples) {
  EXPECT_NEAR(bounds::expected_log_kappa_bound(2, 2), std::log(2.0) + 2.258, 1e-15);
  EXPECT_NEAR(bounds::expected_log_kappa_bound(100, 50), 2.931, 5e-4);
  EXPECT_NEAR(bounds::expected_log_kappa_bound(1'000'000, 2), 2.258, 1e-5);
  EXPECT_THROW(bounds::expected_log_kappa_bound(10, 1), ValidationError);
}

TEST(GdIterationUpper, Examples) {
  EXPECT_NEAR(bounds::gd_iteration_upper(1.0, 0.1), std::log(10.0) + 1, 1e-14);
  EXPECT_NEAR(bounds::gd_iteration_upper(3.0, 1.0 - 1e-12), 1.0, 1e-9);
  EXPECT_NEAR(bounds::gd_iteration_upper(10.0, 1e-6), 1382.55, 0.01);
  EXPECT_THROW(bounds::gd_iteration_upper(2.0, 1.0), ValidationError);
  EXPECT_THROW(bounds::gd_iteration_upper(2.0, 0.0), ValidationError);
}

TEST(GdWorstcaseLower, Examples) {
  EXPECT_EQ(bounds::gd_worstcase_lower(3.0, 3.0, 0.01), 0);
  EXPECT_EQ(bounds::gd_worstcase_lower(2.0, 1.0, std::exp(-2.0)), 1);
  EXPECT_EQ(bounds::gd_worstcase_lower(101.0, 1.0, std::exp(-1.0)), 50);
  EXPECT_THROW(bounds::gd_worstcase_lower(2.0, 0.0, 0.1), ValidationError);
  EXPECT_THROW(bounds::gd_worstcase_lower(1.0, 2.0, 0.1), ValidationError);
}

TEST(SmallBall, Examples) {
  EXPECT_DOUBLE_EQ(bounds::rv_smallball_bound(20, 10, 0.0, 1.0, 0.5), std::exp(-10.0));
  EXPECT_NEAR(bounds::rv_smallball_bound(20, 10, 0.1, 1.0, 0.5), std::pow(0.1, 11) + std::exp(-10.0), 1e-20);
  double prev = 0.0;
  for (double eps = 0.0; eps < 2.0; eps += 0.1) {
    const double v = bounds::rv_smallball_bound(20, 10, eps, 1.0, 0.5);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(RidgeRiskUpper, Examples) {
  EXPECT_EQ(bounds::ridge_risk_upper(1.0, 0.0, 3, 1.0, 10, 2.0, 1.0).bias_bound, 0.0);
  EXPECT_DOUBLE_EQ(bounds::ridge_risk_upper(1.0, 4.0, 3, 1.0, 10, 1.0, 1.0).bias_bound, 1.0);
  EXPECT_EQ(bounds::ridge_risk_upper(1.0, 4.0, 3, 0.0, 10, 1.0, 1.0).variance_bound, 0.0);
  EXPECT_THROW(bounds::ridge_risk_upper(0.0, 4.0, 3, 0.0, 10, 1.0, 1.0), ValidationError);
}

TEST(Bounds, Deterministic) {
  const auto a = bounds::min_sv_normalized_moment_bound(321, 123, 2.5);
  const auto b = bounds::min_sv_normalized_moment_bound(321, 123, 2.5);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
}
