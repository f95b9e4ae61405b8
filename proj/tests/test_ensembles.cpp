#include <gtest/gtest.h>

#include <cmath>

#include "gram_spectra/ensembles.hpp"
#include "gram_spectra/errors.hpp"
#include "gram_spectra/linalg.hpp"

using gram_spectra::DenseMatrix;
using gram_spectra::ValidationError;
using gram_spectra::Vector;
namespace ens = gram_spectra::ensembles;
namespace linalg = gram_spectra::linalg;
namespace rng = gram_spectra::rng;

namespace {

// Uncentered empirical covariance of the rows.
DenseMatrix row_covariance(const DenseMatrix& x) { return ens::gram(x); }

}  // namespace

TEST(GaussianIid, EntryMoments) {
  rng::Generator gen({rng::kDefaultSeed, 0});
  const DenseMatrix z = ens::gaussian_iid(200, 200, gen);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : z.entries()) {
    sum += v;
    sum_sq += v * v;
  }
  const double count = static_cast<double>(z.size());
  EXPECT_NEAR(sum / count, 0.0, 0.02);
  EXPECT_NEAR(sum_sq / count - (sum / count) * (sum / count), 1.0, 0.03);
}

TEST(CorrelatedGaussian, IdentityCovariance) {
  rng::Generator gen({rng::kDefaultSeed, 1});
  const DenseMatrix x = ens::correlated_gaussian(ens::DesignSpec::gaussian(5000, 5), gen);
  const DenseMatrix c = row_covariance(x);
  EXPECT_LE(frobenius_norm(c - DenseMatrix::identity(5)) / 5.0, 0.05);
}

TEST(CorrelatedGaussian, DiagonalCovariance) {
  ens::DesignSpec spec{10000, 2, ens::CovarianceModel::diagonal({4.0, 1.0}), ens::EntryLaw::gaussian};
  rng::Generator gen({rng::kDefaultSeed, 2});
  const DenseMatrix c = row_covariance(ens::correlated_gaussian(spec, gen));
  EXPECT_NEAR(c(0, 0), 4.0, 0.15);
  EXPECT_NEAR(c(1, 1), 1.0, 0.05);
}

TEST(CorrelatedGaussian, Ar1Covariance) {
  ens::DesignSpec spec{10000, 3, ens::CovarianceModel::ar1(3, 0.5), ens::EntryLaw::gaussian};
  rng::Generator gen({rng::kDefaultSeed, 3});
  const DenseMatrix c = row_covariance(ens::correlated_gaussian(spec, gen));
  EXPECT_NEAR(c(0, 1), 0.5, 0.04);
  EXPECT_NEAR(c(0, 2), 0.25, 0.04);
}

TEST(CorrelatedGaussian, RejectsDimensionMismatch) {
  ens::DesignSpec spec{10, 3, ens::CovarianceModel::identity(4), ens::EntryLaw::gaussian};
  rng::Generator gen({1, 0});
  EXPECT_THROW(ens::correlated_gaussian(spec, gen), ValidationError);
}

TEST(CounterexampleMatrix, SupportMeanAndCdf) {
  rng::Generator gen({rng::kDefaultSeed, 4});
  const DenseMatrix x = ens::counterexample_matrix(1000, 1000, gen);
  double sum = 0.0;
  std::size_t below = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x.entries()[i];
    ASSERT_GT(v, -1.0);
    ASSERT_LT(v, 1.0);
    sum += v;
    if (i < 100000 && std::abs(v) <= std::exp(-1.0)) ++below;
  }
  EXPECT_NEAR(sum / static_cast<double>(x.size()), 0.0, 0.002);
  EXPECT_NEAR(static_cast<double>(below) / 1e5, 0.5, 0.01);
}

TEST(Gram, Examples) {
  EXPECT_LE(max_abs_diff(ens::gram(DenseMatrix::identity(3)), DenseMatrix::identity(3) * (1.0 / 3.0)), 1e-16);
  EXPECT_DOUBLE_EQ(ens::gram(DenseMatrix(4, 1, 1.0))(0, 0), 1.0);
}

TEST(Gram, EigenvaluesAreScaledSquaredSingularValues) {
  rng::Generator gen({rng::kDefaultSeed, 5});
  const DenseMatrix x = ens::gaussian_iid(60, 20, gen);
  const Vector s = linalg::singular_values(x);
  const DenseMatrix g = ens::gram(x);
  EXPECT_EQ(asymmetry(g), 0.0);
  const Vector lambda = linalg::sym_eigenvalues(g);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(lambda[i], s[i] * s[i] / 60.0, 1e-10 * lambda[i]);
}

TEST(Gram, FullRankAlmostSurely) {
  for (std::uint64_t t = 0; t < 1000; ++t) {
    rng::Generator gen({rng::kDefaultSeed, 1000 + t});
    const DenseMatrix x = ens::correlated_gaussian(ens::DesignSpec::gaussian(40, 25), gen);
    ASSERT_EQ(linalg::numerical_rank(ens::gram(x)), 25u) << "trial " << t;
  }
}

TEST(CovarianceModel, CertifiedBounds) {
  const auto iso = ens::CovarianceModel::scaled_identity(4, 2.5);
  EXPECT_DOUBLE_EQ(iso.c_min(), 2.5);
  EXPECT_DOUBLE_EQ(iso.c_max(), 2.5);
  EXPECT_DOUBLE_EQ(iso.trace(), 10.0);
  const auto diag = ens::CovarianceModel::diagonal({4.0, 1.0});
  EXPECT_NEAR(diag.c_max(), 4.0, 1e-15);
  EXPECT_NEAR(diag.c_min(), 1.0, 1e-15);
  EXPECT_EQ(diag.inverse(), (DenseMatrix{{0.25, 0.0}, {0.0, 1.0}}));
  EXPECT_THROW(ens::CovarianceModel::diagonal({1.0, 0.0}), ValidationError);
  EXPECT_THROW(ens::CovarianceModel::ar1(3, 1.0), ValidationError);
  EXPECT_THROW(ens::CovarianceModel::from_matrix(DenseMatrix{{1, 2}, {2, 1}}), ValidationError);
}

TEST(CovarianceModel, Ar1BoundsUpToDimension500) {
  for (double rho : {-0.9, 0.5, 0.9}) {
    for (std::size_t p : {2u, 50u, 500u}) {
      if (p == 500 && rho != 0.9) continue;
      const auto m = ens::CovarianceModel::ar1(p, rho);
      // Toeplitz symbol bounds: (1−|ρ|)/(1+|ρ|) <= λ <= (1+|ρ|)/(1−|ρ|)
      const double a = std::abs(rho);
      EXPECT_GT(m.c_min(), 0.0);
      EXPECT_GE(m.c_min(), (1 - a) / (1 + a) - 1e-12);
      EXPECT_LE(m.c_max(), (1 + a) / (1 - a) + 1e-12);
      EXPECT_LE(m.c_min(), m.c_max());
      if (p <= 50) {
        EXPECT_LE(linalg::spectral_norm(multiply(m.sqrt_matrix(), m.sqrt_matrix()) - m.matrix()), 1e-10);
        EXPECT_LE(linalg::spectral_norm(multiply(m.inverse(), m.matrix()) - DenseMatrix::identity(p)), 1e-10);
      }
    }
  }
}

TEST(CovarianceModel, TextAndJsonRoundTrip) {
  for (const std::string text : {"identity", "scaled:2.5", "diag:1,2,3", "ar1:0.25"}) {
    const auto m = ens::CovarianceModel::parse(text, 3);
    EXPECT_EQ(m.to_text(), text);
    const auto back = ens::CovarianceModel::from_json(m.to_json(), 3);
    EXPECT_EQ(back.matrix(), m.matrix());
    EXPECT_EQ(back.kind(), m.kind());
  }
  EXPECT_THROW(ens::CovarianceModel::parse("diag:1,2", 3), ValidationError);
  EXPECT_THROW(ens::CovarianceModel::parse("toeplitz:1", 3), ValidationError);
  EXPECT_THROW(ens::CovarianceModel::parse("ar1:x", 3), ValidationError);
}

TEST(DesignSpec, ValidationAndJson) {
  ens::DesignSpec bad{10, 3, ens::CovarianceModel::ar1(3, 0.5), ens::EntryLaw::counterexample};
  EXPECT_THROW(bad.validate(), ValidationError);
  ens::DesignSpec zero{0, 3, ens::CovarianceModel::identity(3), ens::EntryLaw::gaussian};
  EXPECT_THROW(zero.validate(), ValidationError);

  ens::DesignSpec spec{50, 4, ens::CovarianceModel::diagonal({1, 2, 3, 4}), ens::EntryLaw::gaussian};
  const nlohmann::json j = spec.to_json();
  EXPECT_EQ(j.at("covariance").at("kind"), "diagonal");
  const auto back = ens::DesignSpec::from_json(j);
  EXPECT_EQ(back.to_json(), j);
  EXPECT_DOUBLE_EQ(back.gamma(), 4.0 / 50.0);

  nlohmann::json missing = j;
  missing.erase("n");
  try {
    ens::DesignSpec::from_json(missing);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("'n'"), std::string::npos);
  }
}
