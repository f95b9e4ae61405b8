#include "gram_spectra/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "gram_spectra/errors.hpp"

namespace gram_spectra::special {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

constexpr int kMaxIterations = 10000;
constexpr double kTargetRelError = 1e-15;

// Lanczos partial sum A_g(x) for the shifted argument x (Γ(x + 1) form).
double lanczos_sum(double x) {
  double a = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) a += kLanczosCoef[i] / (x + static_cast<double>(i));
  return a;
}

double gamma_series_p(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kTargetRelError) break;
  }
  return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double gamma_fraction_q(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kTargetRelError) break;
  }
  return std::exp(-x + a * std::log(x) - log_gamma(a)) * h;
}

double simpson_step(const std::function<double(double)>& f, double lo, double hi, double f_lo,
                    double f_mid, double f_hi, double whole, double tol, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left_mid = 0.5 * (lo + mid);
  const double right_mid = 0.5 * (mid + hi);
  const double f_lm = f(left_mid);
  const double f_rm = f(right_mid);
  const double left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid);
  const double right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * tol, depth - 1) +
         simpson_step(f, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * tol, depth - 1);
}

}  // namespace

double gamma(double x) {
  if (x < 0.5) {
    // Γ(x) Γ(1 - x) = π / sin(πx)
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * gamma(1.0 - x));
  }
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, z + 0.5) * std::exp(-t) * lanczos_sum(z);
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw ValidationError("log_gamma: argument must be positive");
  if (x < 0.5) return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  const double z = x - 1.0;
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(lanczos_sum(z));
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw ValidationError("regularized_gamma_p: shape must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return gamma_series_p(a, x);
  return 1.0 - gamma_fraction_q(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw ValidationError("regularized_gamma_q: shape must be positive");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_series_p(a, x);
  return gamma_fraction_q(a, x);
}

double inverse_chisq_cdf(double x, double dof) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 / x);
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ValidationError("ks_distance: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value_1pct(std::size_t count) {
  return 1.628 / std::sqrt(static_cast<double>(count));
}

double adaptive_simpson(const std::function<double(double)>& f, double lo, double hi, double tol,
                        int max_depth) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  const double f_mid = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
  return simpson_step(f, lo, hi, f_lo, f_mid, f_hi, whole, tol, max_depth);
}

}  // namespace gram_spectra::special
