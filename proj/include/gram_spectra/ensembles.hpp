#pragma once

#include <cstddef>
#include <string>

#include "gram_spectra/dense_matrix.hpp"
#include "gram_spectra/rng.hpp"
#include "json.hpp"

namespace gram_spectra::ensembles {

enum class CovarianceKind { identity, scaled_identity, diagonal, ar1, explicit_matrix };

std::string to_string(CovarianceKind kind);

/// Population covariance with certified eigenvalue bounds 0 < c_m <= c_M.
///
/// Construction computes the square root used to correlate Gaussian rows and
/// the inverse used by covariance error measurements.
class CovarianceModel {
 public:
  static CovarianceModel identity(std::size_t p);
  static CovarianceModel scaled_identity(std::size_t p, double c);
  static CovarianceModel diagonal(Vector values);
  static CovarianceModel ar1(std::size_t p, double rho);
  /// Any symmetric positive definite matrix; bounds certified by sym_eig.
  static CovarianceModel from_matrix(const DenseMatrix& sigma);

  /// Parses "identity", "scaled:<c>", "diag:<v1>,<v2>,...", "ar1:<rho>".
  static CovarianceModel parse(const std::string& text, std::size_t p);

  CovarianceKind kind() const { return kind_; }
  std::size_t dimension() const { return sigma_.rows(); }
  double c_min() const { return c_min_; }
  double c_max() const { return c_max_; }
  double trace() const;
  /// True for identity and scaled identity.
  bool isotropic() const;
  /// Scale c of c·I for isotropic models.
  double isotropic_scale() const { return scale_; }

  const DenseMatrix& matrix() const { return sigma_; }
  const DenseMatrix& sqrt_matrix() const { return sqrt_; }
  const DenseMatrix& inverse() const { return inverse_; }

  /// {"kind": ..., "params": {...}}
  nlohmann::json to_json() const;
  static CovarianceModel from_json(const nlohmann::json& j, std::size_t p);
  /// Inverse of parse().
  std::string to_text() const;

 private:
  CovarianceModel() = default;
  void certify();

  CovarianceKind kind_ = CovarianceKind::identity;
  DenseMatrix sigma_;
  DenseMatrix sqrt_;
  DenseMatrix inverse_;
  Vector params_;
  double scale_ = 1.0;
  double c_min_ = 1.0;
  double c_max_ = 1.0;
};

enum class EntryLaw { gaussian, counterexample };

std::string to_string(EntryLaw law);
EntryLaw parse_entry_law(const std::string& text);

/// Design of an n×p random matrix. γ = p/n is kept as the exact pair (p, n).
struct DesignSpec {
  std::size_t n = 1;
  std::size_t p = 1;
  CovarianceModel covariance = CovarianceModel::identity(1);
  EntryLaw law = EntryLaw::gaussian;

  double gamma() const { return static_cast<double>(p) / static_cast<double>(n); }

  /// Throws ValidationError on n or p of zero, covariance dimension mismatch,
  /// or a counterexample law combined with a non-identity covariance.
  void validate() const;

  static DesignSpec gaussian(std::size_t n, std::size_t p);
  static DesignSpec counterexample(std::size_t n, std::size_t p);

  nlohmann::json to_json() const;
  static DesignSpec from_json(const nlohmann::json& j);
};

/// n×p matrix of i.i.d. N(0, 1) entries, filled row by row.
DenseMatrix gaussian_iid(std::size_t n, std::size_t p, rng::Generator& gen);

/// Z · Σ^{1/2}: rows are i.i.d. N(0, Σ).
DenseMatrix correlated_gaussian(const DesignSpec& spec, rng::Generator& gen);

/// i.i.d. entries Z·U with Z Rademacher and U ~ F(u) = 1/log(e/u).
DenseMatrix counterexample_matrix(std::size_t n, std::size_t p, rng::Generator& gen);

/// Draws one design according to spec.law.
DenseMatrix draw_design(const DesignSpec& spec, rng::Generator& gen);

/// Uncentered Gram matrix XᵀX / n.
DenseMatrix gram(const DenseMatrix& x);

}  // namespace gram_spectra::ensembles
