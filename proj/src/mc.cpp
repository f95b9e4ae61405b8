#include "gram_spectra/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "gram_spectra/covest.hpp"
#include "gram_spectra/errors.hpp"
#include "gram_spectra/linalg.hpp"
#include "gram_spectra/special.hpp"

namespace gram_spectra::mc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kPairwiseBlock = 8;

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

unsigned resolve_workers(unsigned workers) {
  if (workers != kAutoWorkers) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Mean and standard error of the first m entries.
std::pair<double, double> mean_and_stderr(const std::vector<double>& finite, std::size_t m) {
  if (m == 0) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = pairwise_sum(finite.data(), m) / static_cast<double>(m);
  if (m < 2) return {mean, std::numeric_limits<double>::quiet_NaN()};
  std::vector<double> sq(m);
  for (std::size_t i = 0; i < m; ++i) sq[i] = (finite[i] - mean) * (finite[i] - mean);
  const double var = pairwise_sum(sq.data(), m) / static_cast<double>(m - 1);
  return {mean, std::sqrt(var / static_cast<double>(m))};
}

}  // namespace

std::string to_string(Statistic statistic) {
  switch (statistic) {
    case Statistic::kappa: return "kappa";
    case Statistic::sqrt_n_over_smin: return "sqrt_n_over_smin";
    case Statistic::smax_over_sqrt_n: return "smax_over_sqrt_n";
    case Statistic::log_kappa: return "log_kappa";
    case Statistic::inv_cov_error: return "inv_cov_error";
    case Statistic::cov_error: return "cov_error";
  }
  return "unknown";
}

Statistic parse_statistic(const std::string& text) {
  for (Statistic s : {Statistic::kappa, Statistic::sqrt_n_over_smin, Statistic::smax_over_sqrt_n,
                      Statistic::log_kappa, Statistic::inv_cov_error, Statistic::cov_error}) {
    if (text == to_string(s)) return s;
  }
  throw ValidationError("unknown statistic '" + text +
                        "' (expected kappa, sqrt_n_over_smin, smax_over_sqrt_n, log_kappa, inv_cov_error, cov_error)");
}

double evaluate_statistic(Statistic statistic, const ensembles::DesignSpec& spec, const DenseMatrix& x) {
  const double root_n = std::sqrt(static_cast<double>(x.rows()));
  switch (statistic) {
    case Statistic::inv_cov_error: return covest::cov_errors_of(spec, x).inverse_error;
    case Statistic::cov_error: return covest::cov_errors_of(spec, x).forward_error;
    default: break;
  }
  const linalg::SpectralSummary summary = linalg::summarize_spectrum(linalg::singular_values(x));
  switch (statistic) {
    case Statistic::kappa: return summary.kappa;
    case Statistic::log_kappa: return std::log(summary.kappa);
    case Statistic::sqrt_n_over_smin: return summary.s_min > 0.0 ? root_n / summary.s_min : kInf;
    case Statistic::smax_over_sqrt_n: return summary.s_max / root_n;
    default: break;
  }
  throw ValidationError("evaluate_statistic: unhandled statistic");
}

double sample_statistic(Statistic statistic, const ensembles::DesignSpec& spec, std::uint64_t seed,
                        std::uint64_t trial) {
  rng::Generator gen({seed, trial});
  return evaluate_statistic(statistic, spec, ensembles::draw_design(spec, gen));
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), count));
  if (w <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (!stop.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (unsigned t = 0; t < w; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<double> run_trials(std::size_t count, std::uint64_t first, unsigned workers,
                               const std::function<double(std::uint64_t)>& fn) {
  std::vector<double> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = fn(first + i); });
  return out;
}

double pairwise_sum(const double* values, std::size_t count) {
  if (count <= kPairwiseBlock) {
    double s = 0.0;
    for (std::size_t i = 0; i < count; ++i) s += values[i];
    return s;
  }
  const std::size_t half = count / 2;
  return pairwise_sum(values, half) + pairwise_sum(values + half, count - half);
}

nlohmann::json MomentEstimate::to_json() const {
  nlohmann::json checkpoints = nlohmann::json::array();
  for (const auto& c : running_means) {
    checkpoints.push_back({{"trials", c.trials}, {"mean", number_or_null(c.mean)}, {"stderr", number_or_null(c.std_error)}});
  }
  return {{"statistic", statistic_name},
          {"r", r},
          {"trials", trials},
          {"mean", number_or_null(mean)},
          {"stderr", number_or_null(std_error)},
          {"max_sample", number_or_null(max_sample)},
          {"overflow_count", overflow_count},
          {"reliable", reliable},
          {"running_means", checkpoints}};
}

MomentEstimate summarize(const std::vector<double>& values, std::string statistic_name, double r) {
  MomentEstimate est;
  est.statistic_name = std::move(statistic_name);
  est.r = r;
  est.trials = values.size();

  std::vector<double> finite;
  finite.reserve(values.size());
  // Checkpoint prefix lengths; finite_at_mark holds the finite count inside each prefix.
  std::vector<std::size_t> marks;
  for (std::size_t k = 10; k < values.size(); k *= 10) marks.push_back(k);
  marks.push_back(values.size());

  std::vector<std::size_t> finite_at_mark;
  std::size_t mark_idx = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isfinite(values[i])) {
      finite.push_back(values[i]);
      est.max_sample = std::max(est.max_sample, values[i]);
    } else {
      ++est.overflow_count;
    }
    while (mark_idx < marks.size() && marks[mark_idx] == i + 1) {
      finite_at_mark.push_back(finite.size());
      ++mark_idx;
    }
  }
  for (std::size_t m = 0; m < finite_at_mark.size(); ++m) {
    const auto [mean, se] = mean_and_stderr(finite, finite_at_mark[m]);
    est.running_means.push_back({marks[m], mean, se});
  }
  const auto [mean, se] = mean_and_stderr(finite, finite.size());
  est.mean = mean;
  est.std_error = se;
  est.reliable = est.overflow_count * 100 <= est.trials;
  return est;
}

MomentEstimate estimate_moment(const ensembles::DesignSpec& spec, Statistic statistic, double r,
                               std::size_t trials, std::uint64_t seed, unsigned workers,
                               std::uint64_t first_trial) {
  spec.validate();
  if (trials < 2) throw ValidationError("estimate_moment: trials must be >= 2");
  if (!(r > 0.0) || !std::isfinite(r)) throw ValidationError("estimate_moment: r must be a finite value > 0");
  if (statistic == Statistic::inv_cov_error && spec.p > spec.n) {
    throw ValidationError("estimate_moment: inv_cov_error requires p <= n");
  }
  const std::vector<double> values = run_trials(trials, first_trial, workers, [&](std::uint64_t trial) {
    const double v = sample_statistic(statistic, spec, seed, trial);
    return r == 1.0 ? v : std::pow(v, r);
  });
  return summarize(values, to_string(statistic), r);
}

std::size_t dimension_for_gamma(std::size_t n, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("sweep: gamma must be a finite value > 0");
  const double p = std::round(gamma * static_cast<double>(n));
  if (p < 1.0) {
    throw ValidationError("sweep: gamma " + std::to_string(gamma) + " gives p = 0 at n = " + std::to_string(n));
  }
  return static_cast<std::size_t>(p);
}

std::vector<SweepRow> sweep_gamma(std::size_t n, const std::vector<double>& gamma_grid, Statistic statistic,
                                  double r, std::size_t trials, std::uint64_t seed, unsigned workers,
                                  const std::string& covariance, ensembles::EntryLaw law) {
  std::vector<double> grid = gamma_grid;
  std::stable_sort(grid.begin(), grid.end());
  std::vector<SweepRow> rows;
  for (double g : grid) dimension_for_gamma(n, g);  // validate everything before running
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ensembles::DesignSpec spec;
    spec.n = n;
    spec.p = dimension_for_gamma(n, grid[k]);
    spec.covariance = ensembles::CovarianceModel::parse(covariance, spec.p);
    spec.law = law;
    SweepRow row;
    row.n = spec.n;
    row.p = spec.p;
    row.gamma = spec.gamma();
    row.estimate = estimate_moment(spec, statistic, r, trials, seed, workers, k * trials);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TailPoint> tail_estimate(const ensembles::DesignSpec& spec, Statistic statistic,
                                     const std::vector<double>& thresholds, std::size_t trials,
                                     std::uint64_t seed, unsigned workers) {
  spec.validate();
  if (trials < 100) throw ValidationError("tail_estimate: trials must be >= 100");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ValidationError("tail_estimate: thresholds must be ascending");
  }
  const std::vector<double> values = run_trials(
      trials, 0, workers, [&](std::uint64_t trial) { return sample_statistic(statistic, spec, seed, trial); });
  std::vector<TailPoint> out;
  const double t_count = static_cast<double>(trials);
  for (double t : thresholds) {
    TailPoint point;
    point.threshold = t;
    if (t != kInf) {
      const auto hits = std::count_if(values.begin(), values.end(), [t](double v) { return v >= t; });
      point.probability = static_cast<double>(hits) / t_count;
    }
    point.std_error = std::sqrt(point.probability * (1.0 - point.probability) / t_count);
    out.push_back(point);
  }
  return out;
}

MomentEstimate divergence_diagnostic(const ensembles::DesignSpec& spec, Statistic statistic, std::size_t trials,
                                     std::uint64_t seed, unsigned workers) {
  if (statistic != Statistic::sqrt_n_over_smin && statistic != Statistic::kappa &&
      statistic != Statistic::inv_cov_error) {
    throw ValidationError("divergence_diagnostic: statistic must be sqrt_n_over_smin, kappa or inv_cov_error");
  }
  return estimate_moment(spec, statistic, 1.0, trials, seed, workers);
}

KsResult inv_chisq_check(std::size_t n, std::size_t p, std::size_t trials, std::uint64_t seed, unsigned workers) {
  if (!(n > p + 1)) throw ValidationError("inv_chisq_check: requires n > p + 1");
  if (p == 0) throw ValidationError("inv_chisq_check: requires p >= 1");
  if (trials < 2) throw ValidationError("inv_chisq_check: trials must be >= 2");
  // e₁ᵀ(ZᵀZ)⁻¹e₁ = Σ_k V(0,k)² / s_k².
  const std::vector<double> samples = run_trials(trials, 0, workers, [&](std::uint64_t trial) {
    rng::Generator gen({seed, trial});
    const linalg::SvdResult f = linalg::svd(ensembles::gaussian_iid(n, p, gen));
    double u = 0.0;
    for (std::size_t k = 0; k < p; ++k) u += f.v(0, k) * f.v(0, k) / (f.s[k] * f.s[k]);
    return u;
  });
  KsResult out;
  out.dof = static_cast<double>(n - p + 1);
  out.ks_statistic = special::ks_distance(samples, [&](double x) { return special::inverse_chisq_cdf(x, out.dof); });
  out.critical_value_1pct = special::ks_critical_value_1pct(trials);
  return out;
}

}  // namespace gram_spectra::mc
