#include <gtest/gtest.h>

#include <cmath>

#include "dcflow/errors.hpp"
#include "dcflow/oracle.hpp"

namespace dcflow::oracle {
namespace {

TEST(Oracle, JacobiOnKnownMatrix) {
  // Eigenvalues of [[2,1,0],[1,2,1],[0,1,2]] are 2 - sqrt2, 2, 2 + sqrt2.
  DenseMatrix a(3, 3);
  for (int i = 0; i < 3; ++i) a(i, i) = 2.0;
  a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = 1.0;
  DenseMatrix q;
  const auto e = dense_symmetric_eigs(a, &q);
  EXPECT_NEAR(e[0], 2.0 - std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(e[1], 2.0, 1e-14);
  EXPECT_NEAR(e[2], 2.0 + std::sqrt(2.0), 1e-14);
  for (int i = 0; i < 3; ++i) {
    for (int r = 0; r < 3; ++r) {
      double av = 0.0;
      for (int c = 0; c < 3; ++c) av += a(r, c) * q(c, i);
      EXPECT_NEAR(av, e[i] * q(r, i), 1e-12);
    }
  }
}

TEST(Oracle, JacobiRejectsNonSymmetric) {
  DenseMatrix a(2, 2);
  a(0, 1) = 1.0;
  EXPECT_THROW(dense_symmetric_eigs(a), DimensionError);
  EXPECT_THROW(dense_symmetric_eigs(DenseMatrix(2, 3)), DimensionError);
}

TEST(Oracle, FiniteDifferenceOfQuadratic) {
  const auto f = [](std::span<const double> x) { return 3 * x[0] * x[0] + x[0] * x[1] - x[1]; };
  const std::vector<double> x{0.5, -2.0};
  const auto g = finite_diff_gradient(f, x);
  EXPECT_NEAR(g[0], 6 * 0.5 - 2.0, 1e-8);
  EXPECT_NEAR(g[1], 0.5 - 1.0, 1e-8);
}

TEST(Oracle, RestrictPicksPrincipalSubmatrix) {
  DenseMatrix a(3, 3);
  for (int i = 0; i < 9; ++i) a.data[i] = i;
  const std::vector<int> idx{0, 2};
  const DenseMatrix r = restrict(a, idx);
  EXPECT_EQ(r(0, 0), 0.0);
  EXPECT_EQ(r(0, 1), 2.0);
  EXPECT_EQ(r(1, 0), 6.0);
  EXPECT_EQ(r(1, 1), 8.0);
}

}  // namespace
}  // namespace dcflow::oracle
