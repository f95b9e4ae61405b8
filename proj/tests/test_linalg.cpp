#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "gram_spectra/ensembles.hpp"
#include "gram_spectra/errors.hpp"
#include "gram_spectra/linalg.hpp"
#include "gram_spectra/rng.hpp"

using gram_spectra::DenseMatrix;
using gram_spectra::Vector;
namespace linalg = gram_spectra::linalg;
namespace rng = gram_spectra::rng;

namespace {

DenseMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t trial) {
  rng::Generator gen({99, trial});
  return gram_spectra::ensembles::gaussian_iid(rows, cols, gen);
}

Eigen::MatrixXd to_eigen(const DenseMatrix& a) {
  Eigen::MatrixXd m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
  }
  return m;
}

DenseMatrix reconstruct(const linalg::SvdResult& f) {
  DenseMatrix us = f.u;
  for (std::size_t i = 0; i < us.rows(); ++i) {
    for (std::size_t k = 0; k < us.cols(); ++k) us(i, k) *= f.s[k];
  }
  return multiply_transposed_right(us, f.v);
}

double orthonormality_error(const DenseMatrix& q) {
  const DenseMatrix g = multiply_transposed_left(q, q);
  return max_abs_diff(g, DenseMatrix::identity(q.cols()));
}

// Random PSD matrix of the given rank: G Gᵀ with G p×rank.
DenseMatrix random_psd(std::size_t p, std::size_t rank, std::uint64_t trial) {
  const DenseMatrix g = gaussian(p, rank, trial);
  return multiply_transposed_right(g, g);
}

}  // namespace

TEST(Svd, DiagonalAndIdentity) {
  EXPECT_EQ(linalg::singular_values(DenseMatrix{{3, 0}, {0, 1}}), (Vector{3.0, 1.0}));
  const Vector s = linalg::singular_values(DenseMatrix::identity(4));
  for (double v : s) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Svd, ShearMatrixGoldenRatio) {
  const Vector s = linalg::svd(DenseMatrix{{1, 1}, {0, 1}}).s;
  EXPECT_NEAR(s[0], std::sqrt((3 + std::sqrt(5.0)) / 2), 1e-14);
  EXPECT_NEAR(s[1], std::sqrt((3 - std::sqrt(5.0)) / 2), 1e-14);
}

TEST(Svd, RejectsNonFinite) {
  DenseMatrix a(2, 2, 1.0);
  a(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(linalg::svd(a), gram_spectra::ValidationError);
  EXPECT_THROW(linalg::singular_values(a), gram_spectra::ValidationError);
}

class SvdShapes : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

TEST_P(SvdShapes, RoundTripAndOrthonormality) {
  const auto [rows, cols] = GetParam();
  const DenseMatrix a = gaussian(rows, cols, rows * 1000 + cols);
  const linalg::SvdResult f = linalg::svd(a);
  ASSERT_EQ(f.s.size(), std::min(rows, cols));
  for (std::size_t k = 1; k < f.s.size(); ++k) EXPECT_GE(f.s[k - 1], f.s[k]);
  const double s_max = f.s.front();
  EXPECT_LE(linalg::spectral_norm(a - reconstruct(f)), 1e-10 * s_max);
  EXPECT_LE(orthonormality_error(f.u), 1e-10);
  EXPECT_LE(orthonormality_error(f.v), 1e-10);

  // independent oracle
  Eigen::JacobiSVD<Eigen::MatrixXd> ref(to_eigen(a));
  const Eigen::VectorXd sv = ref.singularValues();
  for (std::size_t k = 0; k < f.s.size(); ++k) EXPECT_NEAR(f.s[k], sv(static_cast<Eigen::Index>(k)), 1e-12 * s_max);

  // values-only path agrees with the full decomposition
  const Vector s_only = linalg::singular_values(a);
  for (std::size_t k = 0; k < f.s.size(); ++k) EXPECT_NEAR(s_only[k], f.s[k], 1e-12 * s_max);
}

INSTANTIATE_TEST_SUITE_P(Shapes, SvdShapes,
                         ::testing::Values(std::pair<std::size_t, std::size_t>{1, 1},
                                           std::pair<std::size_t, std::size_t>{5, 1},
                                           std::pair<std::size_t, std::size_t>{1, 5},
                                           std::pair<std::size_t, std::size_t>{30, 30},
                                           std::pair<std::size_t, std::size_t>{60, 17},
                                           std::pair<std::size_t, std::size_t>{17, 60},
                                           std::pair<std::size_t, std::size_t>{120, 80}));

TEST(Svd, TransposeHasSameSingularValues) {
  const DenseMatrix a = gaussian(70, 40, 1);
  const Vector s = linalg::singular_values(a);
  const Vector st = linalg::singular_values(a.transposed());
  ASSERT_EQ(s.size(), st.size());
  for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(s[k], st[k], 1e-10 * s[0]);
}

TEST(Svd, RankDeficientInput) {
  // rank 3 matrix 20×10: trailing singular values are zero to rounding
  const DenseMatrix a = multiply(gaussian(20, 3, 2), gaussian(3, 10, 3));
  const linalg::SvdResult f = linalg::svd(a);
  EXPECT_LE(f.s[3], 1e-13 * f.s[0]);
  EXPECT_LE(orthonormality_error(f.v), 1e-10);
  EXPECT_LE(orthonormality_error(f.u), 1e-10);
  EXPECT_LE(linalg::spectral_norm(a - reconstruct(f)), 1e-10 * f.s[0]);
  EXPECT_EQ(linalg::numerical_rank(a), 3u);
}

TEST(Svd, ZeroMatrix) {
  const linalg::SvdResult f = linalg::svd(DenseMatrix(4, 3));
  for (double v : f.s) EXPECT_EQ(v, 0.0);
  EXPECT_LE(orthonormality_error(f.v), 1e-12);
}

TEST(SpectralSummary, ConditionNumber) {
  const auto d = linalg::spectral_summary(DenseMatrix{{3, 0}, {0, 1}});
  EXPECT_DOUBLE_EQ(d.kappa, 3.0);
  const auto ones = linalg::spectral_summary(DenseMatrix{{1, 1}, {1, 1}});
  EXPECT_NEAR(ones.s_max, 2.0, 1e-15);
  EXPECT_EQ(ones.s_min, 0.0);
  EXPECT_TRUE(std::isinf(ones.kappa));
  EXPECT_THROW(linalg::spectral_summary(DenseMatrix(0, 3)), gram_spectra::ValidationError);
}

TEST(SpectralSummary, ScaleInvariance) {
  const DenseMatrix a = gaussian(40, 25, 4);
  const double k = linalg::spectral_summary(a).kappa;
  for (double c : {1e-3, 0.7, -2.0, 1e4}) {
    EXPECT_NEAR(linalg::spectral_summary(c * a).kappa, k, 1e-12 * k);
  }
}

TEST(SpectralSummary, ProductInequalities) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const DenseMatrix a = gaussian(15, 15, 100 + t);
    const DenseMatrix b = gaussian(15, 15, 200 + t);
    const auto sa = linalg::spectral_summary(a);
    const auto sb = linalg::spectral_summary(b);
    const auto sab = linalg::spectral_summary(multiply(a, b));
    EXPECT_GE(sab.s_min, sa.s_min * sb.s_min - 1e-9);
    EXPECT_LE(sab.s_max, sa.s_max * sb.s_max + 1e-9);
  }
}

TEST(SymEig, Examples) {
  EXPECT_EQ(linalg::sym_eigenvalues(DenseMatrix{{5, 0, 0}, {0, 2, 0}, {0, 0, 2}}), (Vector{5, 2, 2}));
  const Vector v = linalg::sym_eigenvalues(DenseMatrix{{2, 1}, {1, 2}});
  EXPECT_NEAR(v[0], 3.0, 1e-15);
  EXPECT_NEAR(v[1], 1.0, 1e-15);
  for (double x : linalg::sym_eigenvalues(DenseMatrix::identity(5))) EXPECT_DOUBLE_EQ(x, 1.0);
}

TEST(SymEig, RejectsAsymmetric) {
  EXPECT_THROW(linalg::sym_eig(DenseMatrix{{1, 2}, {0, 1}}), gram_spectra::ValidationError);
  EXPECT_THROW(linalg::sym_eig(DenseMatrix(2, 3)), gram_spectra::ValidationError);
}

TEST(SymEig, ResidualsAndOracle) {
  const DenseMatrix g = gaussian(40, 40, 5);
  const DenseMatrix s = g + g.transposed();
  const linalg::EigenDecomposition eig = linalg::sym_eig(s);
  const double scale = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    const Vector v = eig.vectors.column_copy(i);
    const Vector sv = matvec(s, v);
    double r = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) r = std::max(r, std::abs(sv[k] - eig.values[i] * v[k]));
    EXPECT_LE(r, 1e-10 * scale);
  }
  EXPECT_LE(orthonormality_error(eig.vectors), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(to_eigen(s));
  const Eigen::VectorXd w = ref.eigenvalues();  // ascending
  for (std::size_t i = 0; i < s.rows(); ++i) {
    EXPECT_NEAR(eig.values[i], w(static_cast<Eigen::Index>(s.rows() - 1 - i)), 1e-12 * scale);
  }
}

TEST(SqrtPsd, Examples) {
  const DenseMatrix r = linalg::sqrt_psd(DenseMatrix{{4, 0}, {0, 9}});
  EXPECT_LE(max_abs_diff(r, DenseMatrix{{2, 0}, {0, 3}}), 1e-14);
  EXPECT_LE(max_abs_diff(linalg::sqrt_psd(DenseMatrix::identity(3)), DenseMatrix::identity(3)), 1e-15);
  const DenseMatrix ar{{1, 0.5, 0.25}, {0.5, 1, 0.5}, {0.25, 0.5, 1}};
  const DenseMatrix root = linalg::sqrt_psd(ar);
  EXPECT_LE(linalg::spectral_norm(multiply(root, root) - ar), 1e-10);
  EXPECT_EQ(asymmetry(root), 0.0);
}

TEST(SqrtPsd, ClampsRoundingAndRejectsIndefinite) {
  DenseMatrix s = random_psd(6, 3, 6);  // rank 3: zero eigenvalues up to rounding
  const DenseMatrix root = linalg::sqrt_psd(s);
  EXPECT_LE(linalg::spectral_norm(multiply(root, root) - s), 1e-9 * linalg::spectral_norm(s));
  EXPECT_THROW(linalg::sqrt_psd(DenseMatrix{{1, 0}, {0, -0.1}}), gram_spectra::ValidationError);
}

TEST(Pinv, Examples) {
  EXPECT_LE(max_abs_diff(linalg::pinv(DenseMatrix{{2, 0}, {0, 4}}), DenseMatrix{{0.5, 0}, {0, 0.25}}), 1e-15);
  EXPECT_LE(max_abs_diff(linalg::pinv(DenseMatrix{{1, 1}, {1, 1}}), DenseMatrix(2, 2, 0.25)), 1e-15);
  EXPECT_EQ(linalg::pinv(DenseMatrix(3, 2)), DenseMatrix(2, 3));
}

TEST(Pinv, PenroseConditionsAcrossRanks) {
  const std::size_t p = 12;
  for (std::size_t rank = 1; rank <= p; ++rank) {
    const DenseMatrix s = random_psd(p, rank, 300 + rank);
    const DenseMatrix sp = linalg::pinv(s);
    const double ns = linalg::spectral_norm(s);
    const double nsp = linalg::spectral_norm(sp);
    const DenseMatrix ss = multiply(s, sp);
    const DenseMatrix pss = multiply(sp, s);
    EXPECT_LE(linalg::spectral_norm(multiply(ss, s) - s), 1e-8 * ns) << "rank " << rank;
    EXPECT_LE(linalg::spectral_norm(multiply(pss, sp) - sp), 1e-8 * nsp) << "rank " << rank;
    EXPECT_LE(linalg::spectral_norm(ss - ss.transposed()), 1e-8) << "rank " << rank;
    EXPECT_LE(linalg::spectral_norm(pss - pss.transposed()), 1e-8) << "rank " << rank;
    EXPECT_EQ(linalg::numerical_rank(s), rank);
  }
}

TEST(Pinv, CustomTolerance) {
  const DenseMatrix a{{1, 0}, {0, 1e-6}};
  EXPECT_DOUBLE_EQ(linalg::pinv(a, 1e-3)(1, 1), 0.0);
  EXPECT_NEAR(linalg::pinv(a)(1, 1), 1e6, 1e-4);
}

TEST(Norms, SpectralNorms) {
  EXPECT_NEAR(linalg::spectral_norm(DenseMatrix{{3, 0}, {0, -4}}), 4.0, 1e-15);
  EXPECT_NEAR(linalg::symmetric_spectral_norm(DenseMatrix{{1, 0}, {0, -5}}), 5.0, 1e-15);
  EXPECT_DOUBLE_EQ(linalg::default_rank_tol(10, 4, 2.0), 10 * std::numeric_limits<double>::epsilon() * 2.0);
}
