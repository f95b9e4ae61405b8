#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "gram_spectra/dense_matrix.hpp"
#include "gram_spectra/ensembles.hpp"
#include "gram_spectra/mc.hpp"

namespace gram_spectra::ridge {

/// Y = X B + E with rows of E i.i.d. N(0, Σ_ε). An empty noise model means Σ_ε = 0.
struct RidgeProblem {
  DenseMatrix x;  // n×p
  DenseMatrix b;  // p×q
  std::optional<ensembles::CovarianceModel> noise;
  double lambda = 1.0;  // unscaled penalty

  std::size_t n() const { return x.rows(); }
  std::size_t p() const { return x.cols(); }
  std::size_t q() const { return b.cols(); }
  double lambda_tilde() const { return lambda / static_cast<double>(x.rows()); }
  double noise_trace() const { return noise ? noise->trace() : 0.0; }

  /// Throws ValidationError on inconsistent shapes, λ <= 0 or non-finite data.
  void validate() const;
};

struct RiskReport {
  double bias_term = 0.0;
  double variance_term = 0.0;
  double total = 0.0;
  double bias_upper = 0.0;
  double variance_upper = 0.0;
};

/// Ridge estimate for a fixed design, factored once and reused across responses.
/// (XᵀX + λI) = W diag(ω) Wᵀ by sym_eig; B̂ = W diag(1/ω) Wᵀ XᵀY.
class RidgeSolver {
 public:
  RidgeSolver(const DenseMatrix& x, double lambda);

  DenseMatrix fit(const DenseMatrix& y) const;
  /// (1/n)‖X(B̂ − B)‖_F² for response y and true coefficients b.
  double prediction_loss(const DenseMatrix& y, const DenseMatrix& b) const;

 private:
  DenseMatrix x_;
  DenseMatrix hat_;  // (XᵀX + λI)⁻¹ Xᵀ, p×n
};

/// (XᵀX + λI)⁻¹ XᵀY. Throws for λ <= 0 or mismatched shapes.
DenseMatrix ridge_fit(const DenseMatrix& x, const DenseMatrix& y, double lambda);

/// Closed-form conditional risk from the eigendecomposition S = gram(X) = UΛUᵀ:
/// bias = λ̃² Σᵢ λᵢ/(λᵢ+λ̃)² ‖(UᵀB)ᵢ‖², variance = tr(Σ_ε)/n Σᵢ λᵢ²/(λᵢ+λ̃)².
RiskReport exact_conditional_risk(const RidgeProblem& problem);

struct McRisk {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Brute-force oracle: holds X fixed, draws E per trial from StreamKey(seed, i),
/// refits, and averages (1/n)‖X(B̂ − B)‖_F².
McRisk mc_conditional_risk(const RidgeProblem& problem, std::size_t error_trials, std::uint64_t seed,
                           unsigned workers = mc::kAutoWorkers);

enum class BSpecKind { fixed, random };

/// fixed: every entry equals `value`. random: i.i.d. N(0, value²/(pq)), drawn once per design trial.
struct BSpec {
  BSpecKind kind = BSpecKind::fixed;
  double value = 1.0;

  /// "fixed:<b0>" or "random:<alpha>".
  static BSpec parse(const std::string& text);
  std::string to_text() const;
};

struct MeanRisk {
  std::size_t design_trials = 0;
  double lambda_tilde = 0.0;
  double mean_risk = 0.0;
  double std_error = 0.0;
  double mean_bias = 0.0;
  double mean_variance = 0.0;
  double mean_bias_upper = 0.0;
  double mean_variance_upper = 0.0;
  double mean_b_frob_sq = 0.0;
};

/// Outer Monte Carlo over designs of the closed-form conditional risk. The
/// inner expectation over noise is exact, so `error_trials` is accepted for
/// symmetry with mc_conditional_risk and ignored. Design trial i draws X (then
/// B, when random) from StreamKey(seed, i). Default noise is I_q.
MeanRisk mean_risk_experiment(std::size_t n, std::size_t p, std::size_t q, double lambda,
                              const ensembles::CovarianceModel& covariance, const BSpec& b_spec,
                              std::size_t design_trials, std::size_t error_trials, std::uint64_t seed,
                              std::optional<ensembles::CovarianceModel> noise = std::nullopt,
                              unsigned workers = mc::kAutoWorkers);

}  // namespace gram_spectra::ridge
