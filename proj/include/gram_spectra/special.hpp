#pragma once

#include <functional>
#include <span>

namespace gram_spectra::special {

/// Γ(x) by the Lanczos approximation (g = 7, 9 terms), with reflection for x < 1/2.
double gamma(double x);

/// log Γ(x) for x > 0.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, x). Series for x < a + 1,
/// continued fraction for the complement otherwise.
double regularized_gamma_p(double a, double x);

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// CDF of Inverse-χ²_k: P(1/V <= x) for V ~ χ²_k, i.e. Q(k/2, 1/(2x)).
double inverse_chisq_cdf(double x, double dof);

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `cdf`.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Asymptotic 1% critical value 1.628 / sqrt(count).
double ks_critical_value_1pct(std::size_t count);

/// Adaptive Simpson quadrature of f on [lo, hi] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double tol,
                        int max_depth = 50);

}  // namespace gram_spectra::special
