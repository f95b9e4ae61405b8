#include "gram_spectra/covest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gram_spectra/errors.hpp"
#include "gram_spectra/linalg.hpp"
#include "gram_spectra/special.hpp"

namespace gram_spectra::covest {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double rate_denominator(std::size_t n, std::size_t p) {
  const double g = static_cast<double>(p) / static_cast<double>(n);
  return std::max(std::sqrt(g), g);
}

// V diag(d) Vᵀ for V with orthonormal columns.
DenseMatrix reassemble(const DenseMatrix& v, const Vector& d) {
  DenseMatrix scaled = v;
  for (std::size_t r = 0; r < v.rows(); ++r) {
    for (std::size_t c = 0; c < v.cols(); ++c) scaled(r, c) *= d[c];
  }
  DenseMatrix out = multiply_transposed_right(scaled, v);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = i + 1; j < out.cols(); ++j) {
      const double m = 0.5 * (out(i, j) + out(j, i));
      out(i, j) = m;
      out(j, i) = m;
    }
  }
  return out;
}

CovErrorSample isotropic_errors(const DenseMatrix& x, double c) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const Vector s = linalg::singular_values(x);
  const double nd = static_cast<double>(n);
  CovErrorSample out;
  out.rate_denominator = rate_denominator(n, p);
  for (double sv : s) out.forward_error = std::max(out.forward_error, std::abs(sv * sv / nd - c));
  const double s_max = s.front();
  const double s_min = s.back();
  const bool singular = p > n || s_min <= linalg::default_rank_tol(n, p, s_max);
  if (p > n) out.forward_error = std::max(out.forward_error, c);
  if (singular) {
    out.inverse_error = kInf;
    out.resolvent_bound = kInf;
    return out;
  }
  for (double sv : s) out.inverse_error = std::max(out.inverse_error, std::abs(nd / (sv * sv) - 1.0 / c));
  out.resolvent_bound = nd / (s_min * s_min) * out.forward_error / c;
  return out;
}

CovErrorSample general_errors(const DenseMatrix& x, const ensembles::CovarianceModel& cov) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const double nd = static_cast<double>(n);
  const linalg::SvdResult f = linalg::svd(x);
  CovErrorSample out;
  out.rate_denominator = rate_denominator(n, p);
  Vector eig(f.s.size());
  for (std::size_t k = 0; k < f.s.size(); ++k) eig[k] = f.s[k] * f.s[k] / nd;
  out.forward_error = linalg::symmetric_spectral_norm(reassemble(f.v, eig) - cov.matrix());
  const double s_max = f.s.front();
  const double s_min = f.s.back();
  if (p > n || s_min <= linalg::default_rank_tol(n, p, s_max)) {
    out.inverse_error = kInf;
    out.resolvent_bound = kInf;
    return out;
  }
  Vector inv(f.s.size());
  for (std::size_t k = 0; k < f.s.size(); ++k) inv[k] = 1.0 / eig[k];
  out.inverse_error = linalg::symmetric_spectral_norm(reassemble(f.v, inv) - cov.inverse());
  out.resolvent_bound = nd / (s_min * s_min) * out.forward_error / cov.c_min();
  return out;
}

}  // namespace

double counterexample_second_moment() {
  static const double value = [] {
    auto integrand = [](double s) { return std::exp(-2.0 * s) / ((1.0 + s) * (1.0 + s)); };
    // Tail beyond s = 60 is below e^{-120}.
    constexpr double cuts[] = {0.0, 0.5, 2.0, 6.0, 20.0, 60.0};
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) {
      total += special::adaptive_simpson(integrand, cuts[i], cuts[i + 1], 1e-13);
    }
    return total;
  }();
  return value;
}

double population_isotropic_scale(const ensembles::DesignSpec& spec) {
  if (spec.law == ensembles::EntryLaw::counterexample) return counterexample_second_moment();
  if (!spec.covariance.isotropic()) {
    throw ValidationError("population_isotropic_scale: covariance is not isotropic");
  }
  return spec.covariance.isotropic_scale();
}

CovErrorSample cov_errors_of(const ensembles::DesignSpec& spec, const DenseMatrix& x) {
  if (x.rows() != spec.n || x.cols() != spec.p) throw ValidationError("cov_errors: design shape does not match spec");
  if (spec.law == ensembles::EntryLaw::counterexample || spec.covariance.isotropic()) {
    return isotropic_errors(x, population_isotropic_scale(spec));
  }
  return general_errors(x, spec.covariance);
}

CovErrorSample cov_errors(const ensembles::DesignSpec& spec, rng::Generator& gen) {
  spec.validate();
  return cov_errors_of(spec, ensembles::draw_design(spec, gen));
}

std::vector<RateRow> rate_experiment(const std::vector<std::pair<std::size_t, std::size_t>>& grid, double r,
                                     std::size_t trials, std::uint64_t seed, ensembles::EntryLaw law,
                                     unsigned workers) {
  if (!(r > 0.0)) throw ValidationError("rate_experiment: r must be > 0");
  if (trials < 2) throw ValidationError("rate_experiment: trials must be >= 2");
  std::vector<RateRow> rows;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ensembles::DesignSpec spec = law == ensembles::EntryLaw::gaussian
                                     ? ensembles::DesignSpec::gaussian(grid[k].first, grid[k].second)
                                     : ensembles::DesignSpec::counterexample(grid[k].first, grid[k].second);
    spec.validate();
    RateRow row;
    row.n = spec.n;
    row.p = spec.p;
    row.r = r;
    row.trials = trials;
    row.valid = static_cast<double>(spec.n) > static_cast<double>(spec.p) + 2.0 * r - 1.0;
    row.rate_denominator = rate_denominator(spec.n, spec.p);

    std::vector<CovErrorSample> samples(trials);
    const std::uint64_t first = k * trials;
    mc::parallel_for(trials, workers, [&](std::size_t i) {
      rng::Generator gen({seed, first + i});
      samples[i] = cov_errors_of(spec, ensembles::draw_design(spec, gen));
    });

    std::vector<double> forward(trials);
    std::vector<double> inverse(trials);
    for (std::size_t i = 0; i < trials; ++i) {
      forward[i] = std::pow(samples[i].forward_error, r);
      inverse[i] = std::pow(samples[i].inverse_error, r);
      const double bound = samples[i].resolvent_bound;
      if (std::isfinite(samples[i].inverse_error) &&
          samples[i].inverse_error > bound + 1e-9 * std::max(1.0, bound)) {
        ++row.resolvent_violations;
      }
    }
    const mc::MomentEstimate fwd = mc::summarize(forward, "cov_error", r);
    const mc::MomentEstimate inv = mc::summarize(inverse, "inv_cov_error", r);
    row.overflow_count = inv.overflow_count;
    // Delta method: d(M^{1/r}) = (1/r) M^{1/r − 1} dM.
    auto root = [r](const mc::MomentEstimate& e, double& value, double& se) {
      value = std::pow(e.mean, 1.0 / r);
      se = std::pow(e.mean, 1.0 / r - 1.0) * e.std_error / r;
    };
    double se = 0.0;
    root(fwd, row.forward_norm_moment, se);
    row.forward_ratio = row.forward_norm_moment / row.rate_denominator;
    row.forward_ratio_stderr = se / row.rate_denominator;
    root(inv, row.inverse_norm_moment, se);
    row.inverse_ratio = row.inverse_norm_moment / row.rate_denominator;
    row.inverse_ratio_stderr = se / row.rate_denominator;
    rows.push_back(row);
  }
  return rows;
}

mc::MomentEstimate counterexample_inverse_divergence(std::size_t n, std::size_t p, std::size_t trials,
                                                     std::uint64_t seed, unsigned workers) {
  if (p > n) throw ValidationError("counterexample_inverse_divergence: requires p <= n");
  if (p < 2) throw ValidationError("counterexample_inverse_divergence: requires p >= 2");
  return mc::divergence_diagnostic(ensembles::DesignSpec::counterexample(n, p), mc::Statistic::inv_cov_error,
                                   trials, seed, workers);
}

}  // namespace gram_spectra::covest
