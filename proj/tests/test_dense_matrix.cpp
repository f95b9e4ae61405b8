#include <gtest/gtest.h>

#include <limits>

#include "gram_spectra/dense_matrix.hpp"
#include "gram_spectra/errors.hpp"

using gram_spectra::DenseMatrix;

TEST(DenseMatrix, RejectsWrongEntryCount) {
  EXPECT_THROW(DenseMatrix(2, 2, std::vector<double>{1.0, 2.0, 3.0}), gram_spectra::ValidationError);
}

TEST(DenseMatrix, RowMajorLayout) {
  const DenseMatrix a{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(a.rows(), 2u);
  EXPECT_EQ(a.cols(), 3u);
  EXPECT_EQ(a.data()[3], 4.0);
  EXPECT_EQ(a(1, 2), 6.0);
}

TEST(DenseMatrix, ProductsAgreeWithExplicitTranspose) {
  const DenseMatrix a{{1, 2}, {3, 4}, {5, 6}};
  const DenseMatrix b{{1, 0, 2}, {0, 1, 1}, {1, 1, 0}};
  EXPECT_EQ(multiply_transposed_left(a, b), multiply(a.transposed(), b));
  EXPECT_EQ(multiply_transposed_right(b, b), multiply(b, b.transposed()));
  const std::vector<double> x{1.0, -1.0};
  EXPECT_EQ(matvec(a, x), (std::vector<double>{-1.0, -1.0, -1.0}));
  const std::vector<double> y{1.0, 1.0, 1.0};
  EXPECT_EQ(transpose_matvec(a, y), (std::vector<double>{9.0, 12.0}));
}

TEST(DenseMatrix, NormsAndAsymmetry) {
  const DenseMatrix a{{3, 4}, {0, 0}};
  EXPECT_DOUBLE_EQ(frobenius_norm(a), 5.0);
  EXPECT_DOUBLE_EQ(asymmetry(DenseMatrix{{1, 2}, {2, 1}}), 0.0);
  EXPECT_GT(asymmetry(DenseMatrix{{1, 2}, {0, 1}}), 0.5);
}

TEST(DenseMatrix, FiniteCheck) {
  DenseMatrix a(2, 2);
  EXPECT_TRUE(a.all_finite());
  a(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(a.all_finite());
}
