#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gram_spectra/errors.hpp"
#include "gram_spectra/mc.hpp"

namespace mc = gram_spectra::mc;
namespace ens = gram_spectra::ensembles;
namespace rng = gram_spectra::rng;
using gram_spectra::ValidationError;

TEST(Mc, PairwiseSumIsOrderFixed) {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / static_cast<double>(i + 1);
  const double a = mc::pairwise_sum(v.data(), v.size());
  const double b = mc::pairwise_sum(v.data(), v.size());
  EXPECT_EQ(a, b);
  double naive = 0.0;
  for (double x : v) naive += x;
  EXPECT_NEAR(a, naive, 1e-12);
  EXPECT_EQ(mc::pairwise_sum(v.data(), 0), 0.0);
}

TEST(Mc, SummarizeCheckpointsAndOverflow) {
  std::vector<double> v(1234, 2.0);
  v[5] = std::numeric_limits<double>::infinity();
  v[700] = 10.0;
  const mc::MomentEstimate est = mc::summarize(v, "x", 1.0);
  EXPECT_EQ(est.trials, 1234u);
  EXPECT_EQ(est.overflow_count, 1u);
  EXPECT_TRUE(est.reliable);
  EXPECT_EQ(est.max_sample, 10.0);
  ASSERT_EQ(est.running_means.size(), 4u);  // 10, 100, 1000, 1234
  EXPECT_EQ(est.running_means[0].trials, 10u);
  EXPECT_EQ(est.running_means[0].mean, 2.0);
  EXPECT_EQ(est.running_means[0].std_error, 0.0);
  EXPECT_EQ(est.running_means[3].trials, 1234u);
  EXPECT_NEAR(est.mean, (2.0 * 1232 + 10.0) / 1233.0, 1e-14);
  EXPECT_EQ(est.running_means[3].mean, est.mean);

  std::vector<double> bad(100, 1.0);
  bad[0] = bad[1] = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(mc::summarize(bad, "x", 1.0).reliable);
}

TEST(Mc, OneByOneKappaIsOne) {
  const auto est = mc::estimate_moment(ens::DesignSpec::gaussian(1, 1), mc::Statistic::kappa, 3.7, 50, 1);
  EXPECT_EQ(est.mean, 1.0);
  EXPECT_EQ(est.std_error, 0.0);
}

TEST(Mc, BaiYinRatioAtQuarter) {
  const auto rows = mc::sweep_gamma(200, {0.25}, mc::Statistic::kappa, 1.0, 200, rng::kDefaultSeed);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].p, 50u);
  EXPECT_NEAR(rows[0].estimate.mean, 3.0, 0.3);
  EXPECT_TRUE(mc::sweep_gamma(200, {}, mc::Statistic::kappa, 1.0, 10, 1).empty());
}

TEST(Mc, SweepUsesDisjointTrialRanges) {
  const auto rows = mc::sweep_gamma(30, {0.5, 0.2}, mc::Statistic::kappa, 1.0, 20, 9, 2);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(rows[0].gamma, rows[1].gamma);
  const auto second = mc::estimate_moment(ens::DesignSpec::gaussian(30, 15), mc::Statistic::kappa, 1.0, 20, 9, 1, 20);
  EXPECT_EQ(rows[1].estimate.mean, second.mean);
  EXPECT_THROW(mc::sweep_gamma(30, {0.001}, mc::Statistic::kappa, 1.0, 20, 9), ValidationError);
}

TEST(Mc, WorkerCountDoesNotChangeResults) {
  const auto spec = ens::DesignSpec::gaussian(40, 20);
  const auto a = mc::estimate_moment(spec, mc::Statistic::sqrt_n_over_smin, 2.0, 300, 5, 1);
  const auto b = mc::estimate_moment(spec, mc::Statistic::sqrt_n_over_smin, 2.0, 300, 5, 3);
  const auto c = mc::estimate_moment(spec, mc::Statistic::sqrt_n_over_smin, 2.0, 300, 5, 8);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_EQ(a.to_json().dump(), c.to_json().dump());
}

TEST(Mc, EstimateValidation) {
  const auto spec = ens::DesignSpec::gaussian(10, 5);
  EXPECT_THROW(mc::estimate_moment(spec, mc::Statistic::kappa, 1.0, 1, 1), ValidationError);
  EXPECT_THROW(mc::estimate_moment(spec, mc::Statistic::kappa, 0.0, 10, 1), ValidationError);
  EXPECT_THROW(mc::estimate_moment(ens::DesignSpec::gaussian(5, 10), mc::Statistic::inv_cov_error, 1.0, 10, 1),
               ValidationError);
  EXPECT_EQ(mc::parse_statistic("log_kappa"), mc::Statistic::log_kappa);
  EXPECT_THROW(mc::parse_statistic("trace"), ValidationError);
}

TEST(Mc, ExceptionsPropagateFromWorkers) {
  EXPECT_THROW(mc::parallel_for(100, 4,
                                [](std::size_t i) {
                                  if (i == 37) throw ValidationError("boom");
                                }),
               ValidationError);
}

TEST(Mc, TailEstimate) {
  const auto spec = ens::DesignSpec::gaussian(10, 5);
  const std::vector<double> t{0.5, 10.0, 20.0, 40.0, std::numeric_limits<double>::infinity()};
  const auto tail = mc::tail_estimate(spec, mc::Statistic::kappa, t, 2000, rng::kDefaultSeed);
  ASSERT_EQ(tail.size(), t.size());
  EXPECT_EQ(tail[0].probability, 1.0);
  EXPECT_EQ(tail.back().probability, 0.0);
  for (std::size_t i = 1; i < tail.size(); ++i) EXPECT_LE(tail[i].probability, tail[i - 1].probability);
  EXPECT_THROW(mc::tail_estimate(spec, mc::Statistic::kappa, t, 50, 1), ValidationError);
  EXPECT_THROW(mc::tail_estimate(spec, mc::Statistic::kappa, {3.0, 2.0}, 200, 1), ValidationError);
}

TEST(Mc, InverseChiSquaredCheck) {
  const auto ks = mc::inv_chisq_check(30, 10, 2000, rng::kDefaultSeed);
  EXPECT_EQ(ks.dof, 21.0);
  EXPECT_NEAR(ks.critical_value_1pct, 0.0364, 1e-4);
  EXPECT_TRUE(ks.passes()) << ks.ks_statistic;
  EXPECT_THROW(mc::inv_chisq_check(11, 10, 100, 1), ValidationError);
}

TEST(Mc, CounterexampleRunningMeansGrow) {
  const auto est = mc::divergence_diagnostic(ens::DesignSpec::counterexample(3, 3), mc::Statistic::sqrt_n_over_smin,
                                             10000, rng::kDefaultSeed);
  ASSERT_GE(est.running_means.size(), 3u);
  EXPECT_GT(est.running_means.back().mean, est.running_means[1].mean);
  EXPECT_THROW(mc::divergence_diagnostic(ens::DesignSpec::counterexample(3, 3), mc::Statistic::log_kappa, 100, 1),
               ValidationError);
}
