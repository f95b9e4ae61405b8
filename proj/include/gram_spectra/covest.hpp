#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "gram_spectra/ensembles.hpp"
#include "gram_spectra/mc.hpp"
#include "gram_spectra/rng.hpp"

namespace gram_spectra::covest {

struct CovErrorSample {
  double forward_error = 0.0;   // ‖S − Σ‖₂
  double inverse_error = 0.0;   // ‖S⁻¹ − Σ⁻¹‖₂, +inf when S is numerically singular or p > n
  double rate_denominator = 0.0;  // max(√(p/n), p/n)
  /// ‖S⁻¹‖₂ ‖Σ − S‖₂ ‖Σ⁻¹‖₂, the resolvent-identity upper bound on inverse_error.
  double resolvent_bound = 0.0;
};

/// E[U²] = ∫₀^∞ e^{−2s} / (1 + s)² ds for U with CDF 1/log(e/u).
/// Computed once by adaptive quadrature and cached.
double counterexample_second_moment();

/// Population covariance that S = XᵀX/n estimates: spec.covariance for the
/// Gaussian law, E[U²]·I for the counterexample law.
double population_isotropic_scale(const ensembles::DesignSpec& spec);

/// Errors of S = XᵀX/n for a given design. The spectrum of S comes from the
/// SVD of X, so small eigenvalues of S keep their relative accuracy.
CovErrorSample cov_errors_of(const ensembles::DesignSpec& spec, const DenseMatrix& x);

/// Draws one design per spec and returns its errors.
CovErrorSample cov_errors(const ensembles::DesignSpec& spec, rng::Generator& gen);

struct RateRow {
  std::size_t n = 0;
  std::size_t p = 0;
  double r = 0.0;
  std::size_t trials = 0;
  bool valid = true;  // n > p + 2r − 1
  double rate_denominator = 0.0;
  double forward_norm_moment = 0.0;  // (E‖S−Σ‖ʳ)^{1/r}
  double forward_ratio = 0.0;
  double forward_ratio_stderr = 0.0;
  double inverse_norm_moment = 0.0;  // (E‖S⁻¹−Σ⁻¹‖ʳ)^{1/r}
  double inverse_ratio = 0.0;
  double inverse_ratio_stderr = 0.0;
  std::size_t overflow_count = 0;
  /// Instances where inverse_error exceeded resolvent_bound beyond 1e-9 slack.
  std::size_t resolvent_violations = 0;
};

/// Normalized moment rates on a grid of (n, p). Grid point k uses trial
/// indices [k·trials, (k+1)·trials). Standard errors use the delta method.
std::vector<RateRow> rate_experiment(const std::vector<std::pair<std::size_t, std::size_t>>& grid, double r,
                                     std::size_t trials, std::uint64_t seed,
                                     ensembles::EntryLaw law = ensembles::EntryLaw::gaussian,
                                     unsigned workers = mc::kAutoWorkers);

/// Running-mean divergence report for inverse_error under the counterexample law.
mc::MomentEstimate counterexample_inverse_divergence(std::size_t n, std::size_t p, std::size_t trials,
                                                     std::uint64_t seed, unsigned workers = mc::kAutoWorkers);

}  // namespace gram_spectra::covest
