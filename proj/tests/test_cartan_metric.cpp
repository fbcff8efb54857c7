#include "confmax/cartan_metric.hpp"

#include <gtest/gtest.h>

using namespace confmax;

TEST(CartanMetric, RightJacobianMatchesAdjoint) {
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    GroupElement p = parabolic_to_matrix(random_parabolic(2 + i % 2, rng));
    EXPECT_LT(right_jacobian_check(p).residual, 1e-6);
  }
  EXPECT_LT(right_jacobian_check(GroupElement::identity(3)).residual, 1e-8);
}

TEST(CartanMetric, BoostBilipschitzConstants) {
  Bilipschitz b = bilipschitz_of_right_action(boost(2, 1.0));
  EXPECT_NEAR(b.c_min, std::exp(-1.0), 1e-12);
  EXPECT_NEAR(b.c_max, std::exp(1.0), 1e-12);
}

TEST(CartanMetric, FrameIsOrthonormalAtEveryPoint) {
  Rng rng(2);
  FrameMetric m(2);
  Mat G = m.gram_at(random_group_element(2, rng, 2.0));
  EXPECT_LT(max_abs(G - Mat::Identity(G.rows(), G.cols())), 1e-8);
}

TEST(CartanMetric, OneParameterPathLengthEqualsChord) {
  Rng rng(3);
  AlgebraElement Y = random_algebra(2, rng, 1.0);
  DistanceEstimate d = approx_distance(GroupElement::identity(2), exp_algebra(Y));
  EXPECT_NEAR(d.length, Y.coords().norm(), 1e-10);
  EXPECT_NEAR(path_length(d.path), d.length, 1e-10);
}

TEST(CartanMetric, OptimizerIsMonotoneInBudget) {
  ParabolicElement p = ParabolicElement::identity(2);
  p.lambda = std::exp(1.0);
  p.v = Vec::Ones(2);
  GroupElement g = GroupElement::identity(2), h = parabolic_to_matrix(p);
  double prev = approx_distance(g, h, {0, 33}).length;
  for (int b : {4, 8, 16}) {
    const double cur = approx_distance(g, h, {b, 33}).length;
    EXPECT_LE(cur, prev);
    prev = cur;
  }
  EXPECT_LT(prev, approx_distance(g, h, {0, 33}).length);
}

TEST(CartanMetric, CauchyProbeFibers) {
  Rng rng(4);
  Mat flip = Mat::Identity(3, 3);
  flip(0, 0) = flip(2, 2) = -1.0;
  for (int i = 0; i < 3; ++i) {
    GroupElement q1 = parabolic_to_matrix(random_parabolic(2, rng));
    GroupElement q2 = parabolic_to_matrix(random_parabolic(2, rng));
    GroupPath s1 = cauchy_tail(q1, random_algebra(2, rng)), s2 = cauchy_tail(q2, random_algebra(2, rng));
    CauchyReport same = cauchy_probe(CauchyFixture::SphereMinusPoint, s1, s2);
    EXPECT_EQ(same.verdict, CauchyVerdict::Equivalent);
    EXPECT_LT(same.coset_residual, 1e-8);
    GroupPath s3 = cauchy_tail(compact_element(flip) * q2, random_algebra(2, rng));
    EXPECT_EQ(cauchy_probe(CauchyFixture::SphereMinusTwoPoints, s1, s3).verdict, CauchyVerdict::Inequivalent);
  }
}

TEST(CartanMetric, CauchyTailRequiresPlusPart) {
  AlgebraElement Y = AlgebraElement::from_parts(Vec::Zero(2), 1.0, Mat::Zero(2, 2), Vec::Zero(2));
  EXPECT_THROW(cauchy_tail(GroupElement::identity(2), Y), std::invalid_argument);
}

TEST(CartanMetric, NormalityGate) {
  EXPECT_TRUE(normality_gate(CauchyFixture::SphereMinusPoint, 2).normal);
  EXPECT_FALSE(normality_gate_codim(1).normal);
}
