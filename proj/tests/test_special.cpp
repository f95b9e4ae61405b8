#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <vector>

#include "gram_spectra/errors.hpp"
#include "gram_spectra/rng.hpp"
#include "gram_spectra/special.hpp"

namespace special = gram_spectra::special;
namespace rng = gram_spectra::rng;

TEST(Special, GammaAgainstBoost) {
  for (double r = 0.05; r <= 100.0; r += 0.35) {
    const double x = r / 2.0;
    const double ref = boost::math::tgamma(x);
    EXPECT_NEAR(special::gamma(x) / ref, 1.0, 1e-10) << "x = " << x;
    EXPECT_NEAR(special::log_gamma(x), boost::math::lgamma(x), 1e-10 * std::max(1.0, std::abs(boost::math::lgamma(x))));
  }
  EXPECT_NEAR(special::gamma(1.0), 1.0, 1e-15);
  EXPECT_NEAR(special::gamma(0.5), std::sqrt(std::numbers::pi), 1e-14);
}

TEST(Special, IncompleteGammaAgainstBoost) {
  for (double a : {0.5, 1.0, 2.5, 10.5, 40.0}) {
    for (double x : {1e-3, 0.1, 0.9, 2.0, 5.0, 11.0, 30.0, 80.0}) {
      EXPECT_NEAR(special::regularized_gamma_p(a, x), boost::math::gamma_p(a, x), 1e-12) << a << " " << x;
      EXPECT_NEAR(special::regularized_gamma_q(a, x), boost::math::gamma_q(a, x), 1e-12) << a << " " << x;
    }
  }
  EXPECT_EQ(special::regularized_gamma_p(2.0, 0.0), 0.0);
  EXPECT_EQ(special::regularized_gamma_q(2.0, 0.0), 1.0);
  EXPECT_THROW(special::regularized_gamma_p(0.0, 1.0), gram_spectra::ValidationError);
}

TEST(Special, InverseChiSquaredCdf) {
  const double k = 21.0;
  const boost::math::chi_squared chi(k);
  for (double x : {0.01, 0.03, 0.05, 0.08, 0.2, 1.0}) {
    // P(1/V <= x) = P(V >= 1/x)
    EXPECT_NEAR(special::inverse_chisq_cdf(x, k), boost::math::cdf(boost::math::complement(chi, 1.0 / x)), 1e-12);
  }
  EXPECT_EQ(special::inverse_chisq_cdf(0.0, k), 0.0);
  EXPECT_EQ(special::inverse_chisq_cdf(-1.0, k), 0.0);
}

TEST(Special, InverseChiSquaredMedianSelfConsistent) {
  const double k = 21.0;
  double lo = 1e-6;
  double hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (special::inverse_chisq_cdf(mid, k) < 0.5 ? lo : hi) = mid;
  }
  EXPECT_NEAR(special::inverse_chisq_cdf(0.5 * (lo + hi), k), 0.5, 1e-8);
}

TEST(Special, KsDistanceSmallCases) {
  const auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const std::vector<double> one{0.5};
  EXPECT_DOUBLE_EQ(special::ks_distance(one, uniform), 0.5);
  const std::vector<double> grid{0.125, 0.375, 0.625, 0.875};
  EXPECT_DOUBLE_EQ(special::ks_distance(grid, uniform), 0.125);
  EXPECT_THROW(special::ks_distance(std::vector<double>{}, uniform), gram_spectra::ValidationError);
  EXPECT_NEAR(special::ks_critical_value_1pct(2000), 0.0364, 1e-4);
}

TEST(Special, KsSelfTestOnExactInverseChiSquaredSamples) {
  const int dof = 21;
  const std::size_t count = 2000;
  int passes = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    rng::Generator gen({555, rep});
    std::vector<double> samples(count);
    for (double& s : samples) {
      double v = 0.0;
      for (int j = 0; j < dof; ++j) {
        const double z = rng::standard_normal(gen);
        v += z * z;
      }
      s = 1.0 / v;
    }
    const double d = special::ks_distance(samples, [&](double x) { return special::inverse_chisq_cdf(x, dof); });
    if (d < special::ks_critical_value_1pct(count)) ++passes;
  }
  EXPECT_GE(passes, 98);
}

TEST(Special, AdaptiveSimpson) {
  EXPECT_NEAR(special::adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12), 2.0,
              1e-11);
  // ∫₀^∞ e^{−2s}/(1+s)² ds = 1 − 2e²E₁(2)
  const double ref = 1.0 - 2.0 * std::exp(2.0) * boost::math::expint(1, 2.0);
  double total = 0.0;
  for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{1.0, 10.0}, std::pair{10.0, 60.0}}) {
    total += special::adaptive_simpson([](double s) { return std::exp(-2 * s) / ((1 + s) * (1 + s)); }, a, b, 1e-13);
  }
  EXPECT_NEAR(total, ref, 1e-10);
}
