#include "gram_spectra/gramsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gram_spectra/bounds.hpp"
#include "gram_spectra/ensembles.hpp"
#include "gram_spectra/errors.hpp"
#include "gram_spectra/linalg.hpp"

namespace gram_spectra::gramsolve {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kRangeTol = 1e-8;

double eigen_rank_tol(std::size_t p, double lambda_max) { return static_cast<double>(p) * kEps * lambda_max; }

// Keeps the columns of `vectors` whose eigenvalue exceeds the rank tolerance.
void set_spectrum(GramSystem& system, const Vector& values, const DenseMatrix& vectors) {
  const std::size_t p = system.s.rows();
  const double lambda_max = values.empty() ? 0.0 : values.front();
  const double tol = eigen_rank_tol(p, lambda_max);
  std::size_t rank = 0;
  while (rank < values.size() && values[rank] > tol) ++rank;
  if (rank == 0 || !(lambda_max > 0.0)) throw ValidationError("gram system: S has rank 0");
  system.rank = rank;
  system.eigenvalues.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank));
  system.L = system.eigenvalues.front();
  system.mu = system.eigenvalues.back();
  system.basis = DenseMatrix(p, rank);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < rank; ++k) system.basis(i, k) = vectors(i, k);
  }
}

void require_in_range(const GramSystem& system) {
  const Vector proj = range_project(system, system.b);
  double diff = 0.0;
  for (std::size_t i = 0; i < proj.size(); ++i) diff += (proj[i] - system.b[i]) * (proj[i] - system.b[i]);
  if (std::sqrt(diff) > kRangeTol * std::max(norm2(system.b), std::numeric_limits<double>::min())) {
    throw ValidationError("gram system: b is not in range(S)");
  }
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

struct GapTracker {
  const GramSystem& system;
  Vector theta_star;
  Vector r_star;  // Sθ* − b

  explicit GapTracker(const GramSystem& sys) : system(sys), theta_star(pinv_solution(sys)) {
    r_star = matvec(sys.s, theta_star);
    for (std::size_t i = 0; i < r_star.size(); ++i) r_star[i] -= sys.b[i];
    double scale = 0.0;
    for (std::size_t i = 0; i < r_star.size(); ++i) scale += theta_star[i] * sys.b[i];
    floor = 1e-13 * std::abs(scale);
  }

  // Initial gaps at rounding level of |g(θ*)| = ½|θ*ᵀb| count as converged at t = 0.
  bool converged_at_start(double gap0) const { return gap0 <= floor; }

  double floor = 0.0;

  // ½ eᵀ(g + r*) for gradient g = Sθ − b.
  double gap(std::span<const double> theta, std::span<const double> g) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) acc += (theta[i] - theta_star[i]) * (g[i] + r_star[i]);
    return std::max(0.5 * acc, 0.0);
  }
};

void validate_options(const SolveOptions& options) {
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) throw ValidationError("solve: epsilon must lie in (0, 1)");
  if (options.max_iter < 0) throw ValidationError("solve: max_iter must be >= 0");
}

void record(GdTrace& trace, const SolveOptions& options, const Vector& theta, const Vector& theta_star) {
  if (options.record_errors) trace.errors.push_back(subtract(theta, theta_star));
  if (options.record_iterates) trace.iterates.push_back(theta);
}

}  // namespace

Vector GramSystem::v_min() const { return basis.column_copy(rank - 1); }

std::string to_string(BMode mode) { return mode == BMode::random_in_range ? "random_in_range" : "from_regression"; }

BMode parse_b_mode(const std::string& text) {
  if (text == "random_in_range") return BMode::random_in_range;
  if (text == "from_regression") return BMode::from_regression;
  throw ValidationError("b mode must be random_in_range or from_regression, got '" + text + "'");
}

GramSystem make_system(const DenseMatrix& x, BMode b_mode, rng::Generator& gen) {
  if (!x.all_finite()) throw ValidationError("make_system: X must be finite");
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  GramSystem system;
  system.s = ensembles::gram(x);
  const linalg::SvdResult f = linalg::svd(x);
  Vector values(f.s.size());
  for (std::size_t k = 0; k < f.s.size(); ++k) values[k] = f.s[k] * f.s[k] / static_cast<double>(n);
  set_spectrum(system, values, f.v);
  if (b_mode == BMode::random_in_range) {
    Vector w(p);
    for (double& v : w) v = rng::standard_normal(gen);
    system.b = matvec(system.s, w);
  } else {
    Vector y(n);
    for (double& v : y) v = rng::standard_normal(gen);
    system.b = transpose_matvec(x, y);
    for (double& v : system.b) v /= static_cast<double>(n);
  }
  return system;
}

GramSystem system_from_matrix(const DenseMatrix& s, Vector b) {
  if (!s.is_square()) throw ValidationError("system_from_matrix: S must be square");
  if (b.size() != s.rows()) throw ValidationError("system_from_matrix: b has the wrong length");
  const linalg::EigenDecomposition eig = linalg::sym_eig(s);
  const double scale = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  if (eig.values.back() < -1e-10 * scale) throw ValidationError("system_from_matrix: S is not positive semi-definite");
  GramSystem system;
  system.s = s;
  system.b = std::move(b);
  set_spectrum(system, eig.values, eig.vectors);
  require_in_range(system);
  return system;
}

Vector range_project(const GramSystem& system, std::span<const double> theta) {
  if (theta.size() != system.dimension()) throw ValidationError("range_project: vector has the wrong length");
  const Vector coords = transpose_matvec(system.basis, theta);
  return matvec(system.basis, coords);
}

Vector pinv_solution(const GramSystem& system) {
  require_in_range(system);
  Vector coords = transpose_matvec(system.basis, system.b);
  for (std::size_t k = 0; k < coords.size(); ++k) coords[k] /= system.eigenvalues[k];
  return matvec(system.basis, coords);
}

Vector worst_case_init(const GramSystem& system, double alpha) {
  if (alpha == 0.0 || !std::isfinite(alpha)) throw ValidationError("worst_case_init: alpha must be finite and nonzero");
  Vector theta = pinv_solution(system);
  const Vector v = system.v_min();
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += alpha * v[i];
  return theta;
}

GdTrace gd_solve(const GramSystem& system, std::span<const double> theta0, const SolveOptions& options) {
  validate_options(options);
  const GapTracker tracker(system);
  GdTrace trace;
  trace.solver = "gd";
  trace.q_factor = 1.0 - system.mu / system.L;
  trace.step_size = 1.0 / system.L;
  Vector theta = range_project(system, theta0);
  double gap0 = 0.0;
  for (std::int64_t t = 0;; ++t) {
    Vector g = matvec(system.s, theta);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= system.b[i];
    const double gap = tracker.gap(theta, g);
    trace.gaps.push_back(gap);
    record(trace, options, theta, tracker.theta_star);
    if (t == 0) gap0 = gap;
    if (gap <= options.epsilon * gap0 || (t == 0 && tracker.converged_at_start(gap))) {
      trace.t_epsilon = t;
      break;
    }
    if (t >= options.max_iter) {
      trace.t_epsilon = kCensored;
      trace.censored = true;
      break;
    }
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= trace.step_size * g[i];
    trace.iterations = t + 1;
  }
  trace.theta = std::move(theta);
  return trace;
}

GdTrace cg_solve(const GramSystem& system, std::span<const double> theta0, const SolveOptions& options) {
  validate_options(options);
  const GapTracker tracker(system);
  GdTrace trace;
  trace.solver = "cg";
  trace.q_factor = 1.0 - system.mu / system.L;
  trace.step_size = 0.0;
  Vector theta = range_project(system, theta0);
  Vector g = matvec(system.s, theta);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= system.b[i];
  Vector dir(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) dir[i] = -g[i];
  double gg = dot(g, g);
  double gap0 = 0.0;
  for (std::int64_t t = 0;; ++t) {
    const double gap = tracker.gap(theta, g);
    trace.gaps.push_back(gap);
    record(trace, options, theta, tracker.theta_star);
    if (t == 0) gap0 = gap;
    if (gap <= options.epsilon * gap0 || (t == 0 && tracker.converged_at_start(gap))) {
      trace.t_epsilon = t;
      break;
    }
    const Vector sd = matvec(system.s, dir);
    const double curvature = dot(dir, sd);
    if (t >= options.max_iter || !(curvature > 0.0)) {
      trace.t_epsilon = kCensored;
      trace.censored = true;
      break;
    }
    const double step = gg / curvature;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] += step * dir[i];
      g[i] += step * sd[i];
    }
    const double gg_next = dot(g, g);
    const double beta = gg_next / gg;
    gg = gg_next;
    for (std::size_t i = 0; i < dir.size(); ++i) dir[i] = -g[i] + beta * dir[i];
    trace.iterations = t + 1;
  }
  trace.theta = std::move(theta);
  return trace;
}

std::string to_string(Solver solver) { return solver == Solver::gd ? "gd" : "cg"; }
std::string to_string(Init init) { return init == Init::random ? "random" : "worstcase"; }

Solver parse_solver(const std::string& text) {
  if (text == "gd") return Solver::gd;
  if (text == "cg") return Solver::cg;
  throw ValidationError("solver must be gd or cg, got '" + text + "'");
}

Init parse_init(const std::string& text) {
  if (text == "random") return Init::random;
  if (text == "worstcase") return Init::worstcase;
  throw ValidationError("init must be random or worstcase, got '" + text + "'");
}

std::vector<ComplexityRow> complexity_experiment(std::size_t n, const std::vector<double>& gamma_grid,
                                                 double epsilon, std::size_t trials, std::uint64_t seed,
                                                 const ComplexityOptions& options) {
  if (trials < 2) throw ValidationError("complexity_experiment: trials must be >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("complexity_experiment: epsilon must lie in (0, 1)");
  if (options.max_iter < 1) throw ValidationError("complexity_experiment: max_iter must be >= 1");
  std::vector<double> grid = gamma_grid;
  std::stable_sort(grid.begin(), grid.end());
  for (double g : grid) mc::dimension_for_gamma(n, g);

  std::vector<ComplexityRow> rows;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::size_t p = mc::dimension_for_gamma(n, grid[k]);
    struct Outcome {
      std::int64_t t = 0;
      double upper = 0.0;
      double lower = 0.0;
    };
    std::vector<Outcome> outcomes(trials);
    const std::uint64_t first = k * trials;
    mc::parallel_for(trials, options.workers, [&](std::size_t i) {
      rng::Generator gen({seed, first + i});
      const DenseMatrix x = ensembles::gaussian_iid(n, p, gen);
      const GramSystem system = make_system(x, options.b_mode, gen);
      Vector theta0;
      if (options.init == Init::random) {
        Vector w(p);
        for (double& v : w) v = rng::standard_normal(gen);
        theta0 = range_project(system, w);
      } else {
        theta0 = worst_case_init(system, 1.0);
      }
      SolveOptions solve;
      solve.epsilon = epsilon;
      solve.max_iter = options.max_iter;
      const GdTrace trace =
          options.solver == Solver::gd ? gd_solve(system, theta0, solve) : cg_solve(system, theta0, solve);
      outcomes[i].t = trace.t_epsilon;
      outcomes[i].upper = bounds::gd_iteration_upper(std::sqrt(system.kappa_sq()), epsilon);
      outcomes[i].lower = static_cast<double>(bounds::gd_worstcase_lower(system.L, system.mu, epsilon));
    });

    ComplexityRow row;
    row.n = n;
    row.p = p;
    row.gamma = static_cast<double>(p) / static_cast<double>(n);
    row.solver = options.solver;
    row.init = options.init;
    row.epsilon = epsilon;
    row.trials = trials;
    std::vector<double> t_vals(trials);
    std::vector<double> upper(trials);
    std::vector<double> lower(trials);
    std::size_t censored = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      const Outcome& o = outcomes[i];
      row.t_values.push_back(o.t);
      if (o.t == kCensored) {
        ++censored;
        t_vals[i] = static_cast<double>(options.max_iter);
      } else {
        t_vals[i] = static_cast<double>(o.t);
        if (static_cast<double>(o.t) > o.upper) ++row.upper_violations;
        if (options.init == Init::worstcase && static_cast<double>(o.t) < o.lower) ++row.lower_violations;
      }
      upper[i] = o.upper;
      lower[i] = o.lower;
    }
    const mc::MomentEstimate t_est = mc::summarize(t_vals, "T", 1.0);
    row.mean_T = t_est.mean;
    row.stderr_T = t_est.std_error;
    row.mean_upper_bound = mc::summarize(upper, "upper", 1.0).mean;
    row.mean_lower_bound = mc::summarize(lower, "lower", 1.0).mean;
    row.censored_fraction = static_cast<double>(censored) / static_cast<double>(trials);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gram_spectra::gramsolve
