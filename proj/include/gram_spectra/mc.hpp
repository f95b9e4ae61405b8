#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gram_spectra/ensembles.hpp"
#include "gram_spectra/rng.hpp"
#include "json.hpp"

namespace gram_spectra::mc {

enum class Statistic { kappa, sqrt_n_over_smin, smax_over_sqrt_n, log_kappa, inv_cov_error, cov_error };

std::string to_string(Statistic statistic);
Statistic parse_statistic(const std::string& text);

/// Value of the statistic (before raising to r) on one design matrix.
/// May be +inf, e.g. κ of an exactly rank-deficient draw.
double evaluate_statistic(Statistic statistic, const ensembles::DesignSpec& spec, const DenseMatrix& x);

/// Draws one design from StreamKey(seed, trial) and evaluates the statistic.
double sample_statistic(Statistic statistic, const ensembles::DesignSpec& spec, std::uint64_t seed,
                        std::uint64_t trial);

/// 0 means one worker per hardware thread.
inline constexpr unsigned kAutoWorkers = 0;

/// Runs task(i) for i in [0, count) on `workers` threads. Tasks must only
/// write state owned by index i. The first exception thrown is rethrown.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

/// Evaluates fn(trial_index) for trial indices first, ..., first + count - 1
/// and returns the values in index order.
std::vector<double> run_trials(std::size_t count, std::uint64_t first, unsigned workers,
                               const std::function<double(std::uint64_t)>& fn);

/// Sum in fixed pairwise order; the result depends only on the input order.
double pairwise_sum(const double* values, std::size_t count);

struct Checkpoint {
  std::size_t trials = 0;  // prefix length in trial-index order
  double mean = 0.0;
  double std_error = 0.0;
};

struct MomentEstimate {
  std::string statistic_name;
  double r = 1.0;
  std::size_t trials = 0;          // trials run
  std::size_t overflow_count = 0;  // non-finite trials, excluded from the mean
  double mean = 0.0;
  double std_error = 0.0;
  double max_sample = 0.0;  // largest finite statistic^r
  bool reliable = true;     // overflow_count <= 1% of trials
  std::vector<Checkpoint> running_means;

  nlohmann::json to_json() const;
};

/// Reduces per-trial values (already raised to r) in index order. Checkpoints
/// are placed at every power of ten below the count and at the count itself.
MomentEstimate summarize(const std::vector<double>& values, std::string statistic_name, double r);

/// Mean of statistic^r over trials seeded by StreamKey(seed, first + i).
MomentEstimate estimate_moment(const ensembles::DesignSpec& spec, Statistic statistic, double r,
                               std::size_t trials, std::uint64_t seed, unsigned workers = kAutoWorkers,
                               std::uint64_t first_trial = 0);

struct SweepRow {
  std::size_t n = 0;
  std::size_t p = 0;
  double gamma = 0.0;
  MomentEstimate estimate;
};

/// One estimate per grid point with p = round(γ n). Grid point k uses trial
/// indices [k·trials, (k+1)·trials) of the same master seed. Rows are sorted by γ.
/// `covariance` uses the CovarianceModel::parse syntax and is built per p.
std::vector<SweepRow> sweep_gamma(std::size_t n, const std::vector<double>& gamma_grid, Statistic statistic,
                                  double r, std::size_t trials, std::uint64_t seed,
                                  unsigned workers = kAutoWorkers, const std::string& covariance = "identity",
                                  ensembles::EntryLaw law = ensembles::EntryLaw::gaussian);

/// p = round(γ n); throws ValidationError when that is zero.
std::size_t dimension_for_gamma(std::size_t n, double gamma);

struct TailPoint {
  double threshold = 0.0;
  double probability = 0.0;
  double std_error = 0.0;
};

/// Empirical P(statistic >= t) with binomial standard errors. Requires trials >= 100.
std::vector<TailPoint> tail_estimate(const ensembles::DesignSpec& spec, Statistic statistic,
                                     const std::vector<double>& thresholds, std::size_t trials,
                                     std::uint64_t seed, unsigned workers = kAutoWorkers);

/// Running-mean report of a statistic under the counterexample law. Growth of
/// the running means across checkpoints is evidence of an infinite mean; no
/// convergence is claimed. A Gaussian spec is accepted as a control.
MomentEstimate divergence_diagnostic(const ensembles::DesignSpec& spec, Statistic statistic, std::size_t trials,
                                     std::uint64_t seed, unsigned workers = kAutoWorkers);

struct KsResult {
  double ks_statistic = 0.0;
  double critical_value_1pct = 0.0;
  double dof = 0.0;
  bool passes() const { return ks_statistic < critical_value_1pct; }
};

/// Samples e₁ᵀ(ZᵀZ)⁻¹e₁ for n×p Gaussian Z and compares with Inverse-χ²_{n−p+1}.
KsResult inv_chisq_check(std::size_t n, std::size_t p, std::size_t trials, std::uint64_t seed,
                         unsigned workers = kAutoWorkers);

}  // namespace gram_spectra::mc
