#include "confmax/liegroup.hpp"

#include <gtest/gtest.h>

using namespace confmax;

TEST(LieGroup, AlgebraDimensionAndBasis) {
  for (int n = 2; n <= 4; ++n) {
    EXPECT_EQ(algebra_dim(n), (n + 2) * (n + 1) / 2);
    auto B = algebra_basis(n);
    ASSERT_EQ(static_cast<int>(B.size()), algebra_dim(n));
    for (const Mat& X : B) EXPECT_NO_THROW(AlgebraElement::from_matrix(X));
  }
}

TEST(LieGroup, RejectsNonLorentzMatrices) {
  Mat m = Mat::Identity(4, 4);
  m(0, 1) = 0.3;
  EXPECT_THROW(GroupElement::from_matrix(m), std::invalid_argument);
  EXPECT_NO_THROW(GroupElement::from_matrix(boost(2, 1.5).mat()));
}

TEST(LieGroup, ExpLogRoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    AlgebraElement X = random_algebra(2 + i % 2, rng, 0.5);
    GroupElement g = exp_algebra(X);
    EXPECT_TRUE(lorentz_check(g.mat(), 1e-10).ok);
    EXPECT_LT(max_abs(log_group(g).mat() - X.mat()), 1e-10);
  }
}

TEST(LieGroup, NilpotentExponentialIsQuadratic) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    AlgebraElement X = random_plus(3, rng, 3.0);
    const Mat& M = X.mat();
    EXPECT_EQ(max_abs(M * M * M), 0.0);
    EXPECT_LT(max_abs(exp_algebra(X).mat() - (Mat::Identity(5, 5) + M + 0.5 * M * M)), 1e-12);
  }
}

TEST(LieGroup, AdjointIsAHomomorphism) {
  Rng rng(3);
  GroupElement g = random_group_element(2, rng, 2.0), h = random_group_element(2, rng, 2.0);
  EXPECT_LT(max_abs(adjoint(g * h) - adjoint(g) * adjoint(h)), 1e-8);
  AlgebraElement X = random_algebra(2, rng);
  Mat conj = g.mat() * X.mat() * g.inverse().mat();
  EXPECT_LT(max_abs(adjoint(g) * X.coords() - AlgebraElement::from_matrix(conj, 1e-8).coords()), 1e-8);
}

TEST(LieGroup, ParabolicMatrixRoundTripAndProduct) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    ParabolicElement p = random_parabolic(3, rng), q = random_parabolic(3, rng);
    ParabolicElement back = parabolic_from_matrix(parabolic_to_matrix(p));
    EXPECT_NEAR(back.lambda, p.lambda, 1e-12);
    EXPECT_LT(max_abs(back.A - p.A), 1e-12);
    EXPECT_LT((back.v - p.v).norm(), 1e-12);
    EXPECT_LT(max_abs(parabolic_to_matrix(p * q).mat() - (parabolic_to_matrix(p) * parabolic_to_matrix(q)).mat()),
              1e-10);
    EXPECT_LT(parabolic_residual(parabolic_to_matrix(p)), 1e-12);
  }
}

TEST(LieGroup, KakReconstructsRandomAndLargeElements) {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    KAKDecomposition d = kak(random_group_element(2 + i % 3, rng));
    EXPECT_LT(d.residual, 1e-9);
    EXPECT_GE(d.t, 0.0);
  }
  Mat R = random_orthogonal(3, rng);
  for (double t : {0.0, 5.0, 19.0, 25.0}) {
    KAKDecomposition d = kak(compact_element(R) * boost(2, t));
    EXPECT_LT(d.residual, 1e-9) << "t = " << t;
    EXPECT_NEAR(d.t, t, 1e-9 * std::max(1.0, t));
  }
}

TEST(LieGroup, InverseUsesLorentzTranspose) {
  Rng rng(6);
  GroupElement g = random_group_element(3, rng, 3.0);
  EXPECT_LT(max_abs((g * g.inverse()).mat() - Mat::Identity(5, 5)), 1e-9);
}
