#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>

#include "json.hpp"

namespace gram_spectra::bounds {

/// Default K = 42e, which makes c₂ = 21e/K = 1/2.
inline constexpr double kDefaultK = 42.0 * std::numbers::e;
/// Upper end of the admissible tail constant interval [5.013, 6.414].
inline constexpr double kDefaultTailC = 6.414;
inline constexpr double kTailCMin = 5.013;
inline constexpr double kTailCMax = 6.414;

/// Evaluated closed-form bound with the constants that produced it.
///
/// When a precondition fails, `valid` is false, `reason` says why, and
/// `value` is +inf (a vacuous bound).
struct BoundReport {
  double value = 0.0;
  std::map<std::string, double> constants;
  bool valid = true;
  std::string reason;

  /// {"value": ..., "constants": {...}, "valid": ...}; non-finite values become null.
  nlohmann::json to_json() const;
};

/// Bound on E[s_min(X)^{-r}] for an n×p matrix of i.i.d. N(0,1) entries:
/// c₁/(n−p−1)^{r/2} + c₃ c₂^{(n−p−r+1)/2} / (n−p−1)^{(r−4)/2}, with
/// c₁ = rK^{r/2}/2, c₂ = 21e/K, c₃ = 27r(3e)^{r/2−1} / (8K√π).
/// Requires n > p + r − 1, n > p + 1, and K > 21e.
BoundReport min_sv_negative_moment_bound(std::size_t n, std::size_t p, double r, double K = kDefaultK);

/// The same bound rescaled to E[(√n / s_min)^r]:
/// [c₁ + (n−p−1)² c₂^{(n−p−r+1)/2} c₃] / (1 − p/n − 1/n)^{r/2}.
/// At r = 0 both terms vanish; the report stays valid and the constants say so.
BoundReport min_sv_normalized_moment_bound(std::size_t n, std::size_t p, double r, double K = kDefaultK);

/// Bound on E[s_max(X)^r]: c̃₁(√n+√p)^r + c̃₂ with c̃₁ = rC^r/2, c̃₂ = rΓ(r/2)c^{−r},
/// C = √2, c = 1/4. The normalized value (divided by n^{r/2}) is in
/// constants["normalized_value"]. Throws ValidationError for r <= 0.
BoundReport max_sv_moment_bound(std::size_t n, std::size_t p, double r);

/// Tail bound P(κ(Z) >= t) <= (1/√(2π)) (C p / (7 t (n−p+1)))^{n−p+1}, stated for t >= n.
BoundReport dongarra_kappa_tail(std::size_t n, std::size_t p, double t, double C = kDefaultTailC);

/// log(n / (n − p + 1)) + 2.258, for n, p >= 2.
double expected_log_kappa_bound(std::size_t n, std::size_t p);

/// κ² log(1/ε) + 1. Throws for ε outside (0, 1) or κ < 1.
double gd_iteration_upper(double kappa, double epsilon);

/// ⌈(L − μ) / (2μ) · log(1/ε)⌉. Throws for μ <= 0, L < μ, or ε outside (0, 1).
std::int64_t gd_worstcase_lower(double L, double mu, double epsilon);

/// (Cε)^{n−p+1} + exp(−cn).
double rv_smallball_bound(std::size_t n, std::size_t p, double epsilon, double C, double c);

struct RidgeRiskBounds {
  double bias_bound = 0.0;
  double variance_bound = 0.0;
};

/// bias <= λ̃² λ_max / (λ_min + λ̃)² ‖B‖_F²,
/// variance <= p tr(Σ_ε)/n · λ_max² / (λ_min + λ̃)².
RidgeRiskBounds ridge_risk_upper(double lambda_tilde, double b_frob_sq, std::size_t p,
                                 double trace_sigma_eps, std::size_t n, double lambda_max_s,
                                 double lambda_min_s);

}  // namespace gram_spectra::bounds
