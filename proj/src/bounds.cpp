#include "gram_spectra/bounds.hpp"

#include <cmath>
#include <limits>

#include "gram_spectra/errors.hpp"
#include "gram_spectra/special.hpp"

namespace gram_spectra::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BoundReport invalid(BoundReport report, std::string reason) {
  report.valid = false;
  report.value = kInf;
  report.reason = std::move(reason);
  return report;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

void require_epsilon(double epsilon, const char* op) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw ValidationError(std::string(op) + ": epsilon must lie in (0, 1)");
  }
}

// Shared constants of the negative-moment bound.
BoundReport negative_moment_constants(std::size_t n, std::size_t p, double r, double K) {
  BoundReport report;
  report.constants["K"] = K;
  report.constants["r"] = r;
  report.constants["c1"] = r * std::pow(K, r / 2.0) / 2.0;
  report.constants["c2"] = 21.0 * std::numbers::e / K;
  report.constants["c3"] =
      27.0 * r * std::pow(3.0 * std::numbers::e, r / 2.0 - 1.0) / (8.0 * K * std::sqrt(std::numbers::pi));
  if (!(r >= 0.0)) return invalid(report, "moment order r must be >= 0");
  if (!(K > 21.0 * std::numbers::e)) return invalid(report, "K must exceed 21e so that c2 < 1");
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  if (!(nd > pd + r - 1.0)) return invalid(report, "requires n > p + r - 1");
  if (!(nd > pd + 1.0)) return invalid(report, "requires n > p + 1 so that n - p - 1 > 0");
  return report;
}

}  // namespace

nlohmann::json BoundReport::to_json() const {
  nlohmann::json c = nlohmann::json::object();
  for (const auto& [name, v] : constants) c[name] = number_or_null(v);
  nlohmann::json j = {{"value", number_or_null(value)}, {"constants", c}, {"valid", valid}};
  if (!reason.empty()) j["reason"] = reason;
  return j;
}

BoundReport min_sv_negative_moment_bound(std::size_t n, std::size_t p, double r, double K) {
  BoundReport report = negative_moment_constants(n, p, r, K);
  if (!report.valid) return report;
  const double gap = static_cast<double>(n) - static_cast<double>(p) - 1.0;
  const double decay_exp = (static_cast<double>(n) - static_cast<double>(p) - r + 1.0) / 2.0;
  const double leading = report.constants["c1"] / std::pow(gap, r / 2.0);
  const double remainder =
      report.constants["c3"] * std::pow(report.constants["c2"], decay_exp) / std::pow(gap, (r - 4.0) / 2.0);
  report.constants["leading_term"] = leading;
  report.constants["remainder_term"] = remainder;
  report.value = leading + remainder;
  return report;
}

BoundReport min_sv_normalized_moment_bound(std::size_t n, std::size_t p, double r, double K) {
  BoundReport report = negative_moment_constants(n, p, r, K);
  if (!report.valid) return report;
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  const double gap = nd - pd - 1.0;
  const double shrink = std::pow(1.0 - pd / nd - 1.0 / nd, r / 2.0);
  const double decay_exp = (nd - pd - r + 1.0) / 2.0;
  const double leading = report.constants["c1"] / shrink;
  const double remainder =
      gap * gap * std::pow(report.constants["c2"], decay_exp) * report.constants["c3"] / shrink;
  report.constants["leading_term"] = leading;
  report.constants["remainder_term"] = remainder;
  if (r == 0.0) report.constants["zeroth_moment_degenerate"] = 1.0;
  report.value = leading + remainder;
  return report;
}

BoundReport max_sv_moment_bound(std::size_t n, std::size_t p, double r) {
  if (!(r > 0.0)) throw ValidationError("max_sv_moment_bound: r must be > 0");
  constexpr double C = std::numbers::sqrt2;
  constexpr double c = 0.25;
  BoundReport report;
  report.constants["C"] = C;
  report.constants["c"] = c;
  report.constants["r"] = r;
  const double c1 = r * std::pow(C, r) / 2.0;
  const double c2 = r * special::gamma(r / 2.0) * std::pow(c, -r);
  report.constants["c1_tilde"] = c1;
  report.constants["c2_tilde"] = c2;
  const double edge = std::sqrt(static_cast<double>(n)) + std::sqrt(static_cast<double>(p));
  report.value = c1 * std::pow(edge, r) + c2;
  report.constants["normalized_value"] = report.value / std::pow(static_cast<double>(n), r / 2.0);
  return report;
}

BoundReport dongarra_kappa_tail(std::size_t n, std::size_t p, double t, double C) {
  BoundReport report;
  report.constants["C"] = C;
  report.constants["t"] = t;
  const double nd = static_cast<double>(n);
  const double pd = static_cast<double>(p);
  report.constants["exponent"] = nd - pd + 1.0;
  if (!(n >= p)) return invalid(report, "requires n >= p");
  if (!(C >= kTailCMin && C <= kTailCMax)) return invalid(report, "C must lie in [5.013, 6.414]");
  if (!(t >= nd)) return invalid(report, "the tail formula is stated for t >= n");
  const double exponent = nd - pd + 1.0;
  report.value = std::pow(C * pd / (7.0 * t * exponent), exponent) / std::sqrt(2.0 * std::numbers::pi);
  return report;
}

double expected_log_kappa_bound(std::size_t n, std::size_t p) {
  if (n < 2 || p < 2) throw ValidationError("expected_log_kappa_bound: requires n, p >= 2");
  if (p > n) throw ValidationError("expected_log_kappa_bound: requires p <= n");
  const double nd = static_cast<double>(n);
  return std::log(nd / (nd - static_cast<double>(p) + 1.0)) + 2.258;
}

double gd_iteration_upper(double kappa, double epsilon) {
  require_epsilon(epsilon, "gd_iteration_upper");
  if (!(kappa >= 1.0)) throw ValidationError("gd_iteration_upper: kappa must be >= 1");
  return kappa * kappa * std::log(1.0 / epsilon) + 1.0;
}

std::int64_t gd_worstcase_lower(double L, double mu, double epsilon) {
  require_epsilon(epsilon, "gd_worstcase_lower");
  if (!(mu > 0.0)) throw ValidationError("gd_worstcase_lower: mu must be > 0");
  if (!(L >= mu)) throw ValidationError("gd_worstcase_lower: requires L >= mu");
  const double value = (L - mu) / (2.0 * mu) * std::log(1.0 / epsilon);
  return static_cast<std::int64_t>(std::ceil(value));
}

double rv_smallball_bound(std::size_t n, std::size_t p, double epsilon, double C, double c) {
  if (p > n) throw ValidationError("rv_smallball_bound: requires n >= p");
  if (!(epsilon >= 0.0)) throw ValidationError("rv_smallball_bound: epsilon must be >= 0");
  if (!(C > 0.0 && c > 0.0)) throw ValidationError("rv_smallball_bound: C and c must be > 0");
  const double exponent = static_cast<double>(n) - static_cast<double>(p) + 1.0;
  return std::pow(C * epsilon, exponent) + std::exp(-c * static_cast<double>(n));
}

RidgeRiskBounds ridge_risk_upper(double lambda_tilde, double b_frob_sq, std::size_t p,
                                 double trace_sigma_eps, std::size_t n, double lambda_max_s,
                                 double lambda_min_s) {
  if (!(lambda_tilde > 0.0)) throw ValidationError("ridge_risk_upper: lambda_tilde must be > 0");
  if (b_frob_sq < 0.0 || trace_sigma_eps < 0.0 || lambda_max_s < 0.0 || lambda_min_s < 0.0) {
    throw ValidationError("ridge_risk_upper: inputs must be non-negative");
  }
  if (n == 0) throw ValidationError("ridge_risk_upper: n must be >= 1");
  const double denom = (lambda_min_s + lambda_tilde) * (lambda_min_s + lambda_tilde);
  RidgeRiskBounds out;
  out.bias_bound = lambda_tilde * lambda_tilde * lambda_max_s / denom * b_frob_sq;
  out.variance_bound = static_cast<double>(p) * trace_sigma_eps / static_cast<double>(n) *
                       lambda_max_s * lambda_max_s / denom;
  return out;
}

}  // namespace gram_spectra::bounds
