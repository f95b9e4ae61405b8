#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gram_spectra/dense_matrix.hpp"
#include "gram_spectra/mc.hpp"
#include "gram_spectra/rng.hpp"

namespace gram_spectra::gramsolve {

/// S θ = b with S symmetric PSD and b in range(S).
struct GramSystem {
  DenseMatrix s;
  Vector b;
  double L = 0.0;   // λ_max(S)
  double mu = 0.0;  // smallest nonzero eigenvalue
  std::size_t rank = 0;
  Vector eigenvalues;  // the `rank` nonzero eigenvalues, non-increasing
  DenseMatrix basis;   // p×rank orthonormal eigenvectors spanning range(S)

  std::size_t dimension() const { return s.rows(); }
  /// Unit eigenvector for mu (last column of basis).
  Vector v_min() const;
  double kappa_sq() const { return L / mu; }
};

enum class BMode { random_in_range, from_regression };

std::string to_string(BMode mode);
BMode parse_b_mode(const std::string& text);

/// S = gram(X). The spectrum and range basis come from the SVD of X
/// (eigenvalues s²/n); eigenvalues at or below p·eps·λ_max count as zero.
/// random_in_range: b = S w, w ~ N(0, I_p). from_regression: b = Xᵀy/n, y ~ N(0, I_n).
/// Throws ValidationError for non-finite X or rank 0.
GramSystem make_system(const DenseMatrix& x, BMode b_mode, rng::Generator& gen);

/// System from an explicit PSD matrix; the spectrum comes from sym_eig.
/// Throws when S is not PSD, has rank 0, or b is outside range(S).
GramSystem system_from_matrix(const DenseMatrix& s, Vector b);

/// Orthogonal projection onto range(S).
Vector range_project(const GramSystem& system, std::span<const double> theta);

/// θ* = S⁺b. Throws ValidationError when b is outside range(S) beyond 1e-8 relative.
Vector pinv_solution(const GramSystem& system);

/// θ* + α v_min.
Vector worst_case_init(const GramSystem& system, double alpha);

struct SolveOptions {
  double epsilon = 1e-6;
  std::int64_t max_iter = 1'000'000;
  bool record_errors = false;  // keep every error vector e^t = θ^t − θ*
  bool record_iterates = false;
};

inline constexpr std::int64_t kCensored = -1;

struct GdTrace {
  std::string solver;
  Vector gaps;                      // g(θ^t) − g(θ*), t = 0 .. last
  std::int64_t t_epsilon = 0;       // first t with gap_t <= ε gap_0, or kCensored
  bool censored = false;
  std::int64_t iterations = 0;      // steps taken
  double q_factor = 0.0;            // 1 − μ/L
  double step_size = 0.0;           // 1/L for gradient descent, 0 for CG (variable steps)
  Vector theta;                     // final iterate
  std::vector<Vector> errors;       // when record_errors
  std::vector<Vector> iterates;     // when record_iterates
};

/// θ^{t+1} = θ^t − (Sθ^t − b)/L from the projection of theta0 onto range(S).
/// The gap is evaluated as ½ eᵀ(g + r*) with g = Sθ − b and r* = Sθ* − b,
/// which equals ½ eᵀSe + eᵀr* and needs one product with S per step.
GdTrace gd_solve(const GramSystem& system, std::span<const double> theta0, const SolveOptions& options);

/// Conjugate gradients on the same system and stopping rule.
GdTrace cg_solve(const GramSystem& system, std::span<const double> theta0, const SolveOptions& options);

enum class Solver { gd, cg };
enum class Init { random, worstcase };

std::string to_string(Solver solver);
std::string to_string(Init init);
Solver parse_solver(const std::string& text);
Init parse_init(const std::string& text);

struct ComplexityOptions {
  Solver solver = Solver::gd;
  Init init = Init::random;
  BMode b_mode = BMode::random_in_range;
  std::int64_t max_iter = 1'000'000;
  unsigned workers = mc::kAutoWorkers;
};

struct ComplexityRow {
  std::size_t n = 0;
  std::size_t p = 0;
  double gamma = 0.0;
  Solver solver = Solver::gd;
  Init init = Init::random;
  double epsilon = 0.0;
  std::size_t trials = 0;
  /// Censored runs enter as max_iter, so with censoring this is a lower bound.
  double mean_T = 0.0;
  double stderr_T = 0.0;
  double mean_upper_bound = 0.0;  // mean of κ(X)² log(1/ε) + 1
  double mean_lower_bound = 0.0;  // mean of ⌈(L−μ)/(2μ) log(1/ε)⌉
  double censored_fraction = 0.0;
  std::size_t upper_violations = 0;  // uncensored runs with T > upper bound
  std::size_t lower_violations = 0;  // worst-case runs with T < lower bound (censored count as satisfied)
  std::vector<std::int64_t> t_values;  // per trial, kCensored for censored runs
};

/// Per γ (p = round(γ n)): Gaussian X, b per options, θ0 random in range or
/// worst-case (α = 1). Grid point k uses trial indices [k·trials, (k+1)·trials).
std::vector<ComplexityRow> complexity_experiment(std::size_t n, const std::vector<double>& gamma_grid,
                                                 double epsilon, std::size_t trials, std::uint64_t seed,
                                                 const ComplexityOptions& options = {});

}  // namespace gram_spectra::gramsolve
