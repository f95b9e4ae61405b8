#include "gram_spectra/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gram_spectra/bounds.hpp"
#include "gram_spectra/errors.hpp"
#include "gram_spectra/linalg.hpp"

namespace gram_spectra::ridge {

namespace {

double frobenius_sq(const DenseMatrix& a) {
  const double f = frobenius_norm(a);
  return f * f;
}

DenseMatrix noise_draw(std::size_t n, const ensembles::CovarianceModel& noise, rng::Generator& gen) {
  ensembles::DesignSpec spec;
  spec.n = n;
  spec.p = noise.dimension();
  spec.covariance = noise;
  return ensembles::correlated_gaussian(spec, gen);
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || !std::isfinite(v)) throw ValidationError("invalid number '" + text + "' in " + what);
  return v;
}

}  // namespace

void RidgeProblem::validate() const {
  if (x.rows() == 0 || x.cols() == 0) throw ValidationError("ridge: design must be non-empty");
  if (b.rows() != x.cols()) throw ValidationError("ridge: B must have p rows");
  if (b.cols() == 0) throw ValidationError("ridge: q must be >= 1");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("ridge: lambda must be a finite value > 0");
  if (!x.all_finite() || !b.all_finite()) throw ValidationError("ridge: X and B must be finite");
  if (noise && noise->dimension() != b.cols()) throw ValidationError("ridge: noise covariance must be q×q");
}

RidgeSolver::RidgeSolver(const DenseMatrix& x, double lambda) : x_(x) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("ridge_fit: lambda must be a finite value > 0");
  DenseMatrix g = multiply_transposed_left(x, x);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += lambda;
  const linalg::EigenDecomposition eig = linalg::sym_eig(g);
  DenseMatrix scaled = eig.vectors;
  for (std::size_t r = 0; r < scaled.rows(); ++r) {
    for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) /= eig.values[c];
  }
  const DenseMatrix inverse = multiply_transposed_right(scaled, eig.vectors);
  hat_ = multiply_transposed_right(inverse, x);
}

DenseMatrix RidgeSolver::fit(const DenseMatrix& y) const {
  if (y.rows() != x_.rows()) throw ValidationError("ridge_fit: Y must have n rows");
  return multiply(hat_, y);
}

double RidgeSolver::prediction_loss(const DenseMatrix& y, const DenseMatrix& b) const {
  DenseMatrix diff = fit(y);
  diff -= b;
  return frobenius_sq(multiply(x_, diff)) / static_cast<double>(x_.rows());
}

DenseMatrix ridge_fit(const DenseMatrix& x, const DenseMatrix& y, double lambda) {
  return RidgeSolver(x, lambda).fit(y);
}

RiskReport exact_conditional_risk(const RidgeProblem& problem) {
  problem.validate();
  const double lt = problem.lambda_tilde();
  const linalg::EigenDecomposition eig = linalg::sym_eig(ensembles::gram(problem.x));
  const DenseMatrix rotated = multiply_transposed_left(eig.vectors, problem.b);  // UᵀB
  double bias = 0.0;
  double spectral = 0.0;
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    const double lambda = std::max(eig.values[i], 0.0);
    const double denom = (lambda + lt) * (lambda + lt);
    double row_sq = 0.0;
    for (double v : rotated.row(i)) row_sq += v * v;
    bias += lambda / denom * row_sq;
    spectral += lambda * lambda / denom;
  }
  RiskReport report;
  report.bias_term = lt * lt * bias;
  report.variance_term = problem.noise_trace() / static_cast<double>(problem.n()) * spectral;
  report.total = report.bias_term + report.variance_term;
  const bounds::RidgeRiskBounds upper = bounds::ridge_risk_upper(
      lt, frobenius_sq(problem.b), problem.p(), problem.noise_trace(), problem.n(),
      std::max(eig.values.front(), 0.0), std::max(eig.values.back(), 0.0));
  report.bias_upper = upper.bias_bound;
  report.variance_upper = upper.variance_bound;
  return report;
}

McRisk mc_conditional_risk(const RidgeProblem& problem, std::size_t error_trials, std::uint64_t seed,
                           unsigned workers) {
  problem.validate();
  if (error_trials < 2) throw ValidationError("mc_conditional_risk: error_trials must be >= 2");
  const RidgeSolver solver(problem.x, problem.lambda);
  const DenseMatrix signal = multiply(problem.x, problem.b);
  if (!problem.noise) {
    // Noiseless responses are deterministic: every trial gives the same loss.
    return {solver.prediction_loss(signal, problem.b), 0.0};
  }
  const std::vector<double> losses = mc::run_trials(error_trials, 0, workers, [&](std::uint64_t trial) {
    rng::Generator gen({seed, trial});
    DenseMatrix y = noise_draw(problem.n(), *problem.noise, gen);
    y += signal;
    return solver.prediction_loss(y, problem.b);
  });
  const mc::MomentEstimate est = mc::summarize(losses, "prediction_loss", 1.0);
  return {est.mean, est.std_error};
}

BSpec BSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon == std::string::npos) throw ValidationError("b-spec must be fixed:<b0> or random:<alpha>, got '" + text + "'");
  BSpec out;
  out.value = parse_number(text.substr(colon + 1), "b-spec");
  if (kind == "fixed") {
    out.kind = BSpecKind::fixed;
  } else if (kind == "random") {
    out.kind = BSpecKind::random;
  } else {
    throw ValidationError("b-spec kind must be fixed or random, got '" + kind + "'");
  }
  return out;
}

std::string BSpec::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << (kind == BSpecKind::fixed ? "fixed:" : "random:") << value;
  return os.str();
}

MeanRisk mean_risk_experiment(std::size_t n, std::size_t p, std::size_t q, double lambda,
                              const ensembles::CovarianceModel& covariance, const BSpec& b_spec,
                              std::size_t design_trials, std::size_t /*error_trials*/, std::uint64_t seed,
                              std::optional<ensembles::CovarianceModel> noise, unsigned workers) {
  if (design_trials < 2) throw ValidationError("mean_risk_experiment: design_trials must be >= 2");
  if (q == 0) throw ValidationError("mean_risk_experiment: q must be >= 1");
  if (!noise) noise = ensembles::CovarianceModel::identity(q);
  ensembles::DesignSpec design;
  design.n = n;
  design.p = p;
  design.covariance = covariance;
  design.validate();

  std::vector<RiskReport> reports(design_trials);
  std::vector<double> b_frob(design_trials);
  mc::parallel_for(design_trials, workers, [&](std::size_t i) {
    rng::Generator gen({seed, i});
    RidgeProblem problem;
    problem.x = ensembles::correlated_gaussian(design, gen);
    problem.lambda = lambda;
    problem.noise = noise;
    if (b_spec.kind == BSpecKind::fixed) {
      problem.b = DenseMatrix(p, q, b_spec.value);
    } else {
      const double sd = b_spec.value / std::sqrt(static_cast<double>(p * q));
      problem.b = DenseMatrix(p, q);
      for (double& v : problem.b.entries()) v = sd * rng::standard_normal(gen);
    }
    reports[i] = exact_conditional_risk(problem);
    b_frob[i] = frobenius_sq(problem.b);
  });

  auto mean_of = [&](auto field) {
    std::vector<double> v(design_trials);
    for (std::size_t i = 0; i < design_trials; ++i) v[i] = field(i);
    return mc::summarize(v, "", 1.0);
  };
  MeanRisk out;
  out.design_trials = design_trials;
  out.lambda_tilde = lambda / static_cast<double>(n);
  const mc::MomentEstimate total = mean_of([&](std::size_t i) { return reports[i].total; });
  out.mean_risk = total.mean;
  out.std_error = total.std_error;
  out.mean_bias = mean_of([&](std::size_t i) { return reports[i].bias_term; }).mean;
  out.mean_variance = mean_of([&](std::size_t i) { return reports[i].variance_term; }).mean;
  out.mean_bias_upper = mean_of([&](std::size_t i) { return reports[i].bias_upper; }).mean;
  out.mean_variance_upper = mean_of([&](std::size_t i) { return reports[i].variance_upper; }).mean;
  out.mean_b_frob_sq = mean_of([&](std::size_t i) { return b_frob[i]; }).mean;
  return out;
}

}  // namespace gram_spectra::ridge
