#include "confmax/kleinian.hpp"

#include <gtest/gtest.h>

using namespace confmax;

namespace {

Vec axis(int n, int i) {
  Vec v = Vec::Zero(n);
  v(i) = 1.0;
  return v;
}

GroupPresentation schottky() {
  return {{hyperbolic_boost(2, axis(2, 0), 3.0), hyperbolic_boost(2, axis(2, 1), 3.0)}, {"a", "b"}};
}

GroupPresentation translation_group() {
  ParabolicElement p = ParabolicElement::identity(2);
  p.v = axis(2, 0);
  return {{parabolic_to_matrix(p)}, {"t"}};
}

}  // namespace

TEST(Kleinian, WordBallCounts) {
  GroupPresentation G = schottky();
  EXPECT_EQ(word_ball(G, 0).elements.size(), 1u);
  WordBall b = word_ball(G, 3);
  EXPECT_EQ(b.elements.size(), 53u);
  EXPECT_EQ(b.collisions, 0u);
  GroupPresentation cyc{{hyperbolic_boost(2, axis(2, 0), 1.0)}, {"g"}};
  EXPECT_EQ(word_ball(cyc, 5).elements.size(), 11u);
}

TEST(Kleinian, WordBallIsDeterministic) {
  WordBall a = word_ball(schottky(), 4), b = word_ball(schottky(), 4);
  ASSERT_EQ(a.elements.size(), b.elements.size());
  for (std::size_t i = 0; i < a.elements.size(); ++i) EXPECT_EQ(max_abs(a.elements[i].mat() - b.elements[i].mat()), 0.0);
}

TEST(Kleinian, TrivialGroupHasEmptyLimitSet) {
  GroupPresentation G;
  LimitSetApprox l = limit_set(G, 4, LimitMethod::OrbitAccumulation);
  EXPECT_TRUE(l.empty());
  EXPECT_FALSE(l.warnings.empty());
  EXPECT_EQ(maximality_verdict(G, DomainFixture::Hemisphere, 0.05, 4).verdict, Maximality::NotMaximal);
}

TEST(Kleinian, CyclicLoxodromicLimitSetIsTwoPoints) {
  GroupPresentation G{{hyperbolic_boost(2, axis(2, 0), 2.0)}, {"g"}};
  LimitSetApprox f = limit_set(G, 6, LimitMethod::LoxodromicFixedPoints);
  ASSERT_EQ(f.points.size(), 2u);
  double best = M_PI;
  for (const Vec& p : f.points) best = std::min(best, round_distance(p, Vec(Vec::Unit(3, 0))));
  EXPECT_LT(best, 1e-9);
  LimitSetApprox o = limit_set(G, 6, LimitMethod::OrbitAccumulation);
  ASSERT_FALSE(o.empty());
  EXPECT_LT(hausdorff(o.as_sampled(0.01), f.as_sampled(0.01)), 1e-3);
}

TEST(Kleinian, SchottkyMethodsAgreeAndLeaveGaps) {
  GroupPresentation G = schottky();
  MethodAgreement m = compare_methods(G, 6);
  EXPECT_TRUE(m.agree) << m.hausdorff;
  LimitSetApprox l = limit_set(G, 6, LimitMethod::LoxodromicFixedPoints);
  DensityReport d = density_report(l, 2, 0.05);
  EXPECT_FALSE(d.dense);
  EXPECT_GE(d.gap, 0.693);
  for (const Vec& p : l.points) EXPECT_LT(std::abs(p(2)), 1e-9);
}

TEST(Kleinian, DensityOfTwoPointsAndFullGrid) {
  LimitSetApprox two;
  two.points = {Vec::Unit(3, 0), Vec(-Vec::Unit(3, 0))};
  DensityReport d = density_report(two, 2, 0.3);
  EXPECT_FALSE(d.dense);
  EXPECT_NEAR(d.gap, M_PI, 0.1);
  LimitSetApprox full;
  for (double a = 0.0; a < 2 * M_PI; a += 0.001) {
    Vec p = Vec::Zero(3);
    p(0) = std::cos(a);
    p(1) = std::sin(a);
    full.points.push_back(p);
  }
  EXPECT_TRUE(density_report(full, 2, 0.05).dense);
  EXPECT_TRUE(density_report(full, 2, 0.1).dense);
}

TEST(Kleinian, MaximalityFixtures) {
  EXPECT_EQ(maximality_verdict(translation_group(), DomainFixture::SphereMinusPoint, 0.05, 4).verdict,
            Maximality::Maximal);
  Mat R = Mat::Identity(4, 4);
  R(0, 0) = R(1, 1) = std::cos(0.7);
  R(0, 1) = -std::sin(0.7);
  R(1, 0) = std::sin(0.7);
  GroupPresentation rot{{compact_element(R)}, {"r"}};
  EXPECT_EQ(maximality_verdict(rot, DomainFixture::SphereMinusSphere, 0.05, 4).verdict, Maximality::Maximal);
  EXPECT_THROW(maximality_verdict(schottky(), DomainFixture::SphereMinusPoint, 0.05, 4), std::invalid_argument);
  EXPECT_THROW(parse_fixture("torus"), std::invalid_argument);
}

TEST(Kleinian, SimpleDivergenceCases) {
  std::vector<double> sched;
  for (int k = 0; k <= 16; ++k) sched.push_back(k);
  SimpleDivergence pure = simple_divergence([](double k) { return boost(2, k); }, sched);
  ASSERT_TRUE(pure.simple);
  EXPECT_LT(max_abs(pure.l1->mat() - Mat::Identity(4, 4)), 1e-12);
  EXPECT_LT((pure.p_plus - basepoint(2).xi).norm(), 1e-12);

  Mat R = Mat::Identity(3, 3);
  R(0, 0) = R(2, 2) = std::cos(0.5);
  R(0, 2) = -std::sin(0.5);
  R(2, 0) = std::sin(0.5);
  GroupElement r = compact_element(R);
  SimpleDivergence rot = simple_divergence([&](double k) { return r * boost(2, k); }, sched);
  ASSERT_TRUE(rot.simple);
  EXPECT_LT(max_abs(rot.l1->mat() - r.mat()), 1e-8);
  for (double res : rot.reconstruction) EXPECT_LT(res, 1e-9);

  GroupElement ri = r.inverse();
  SimpleDivergence alt =
      simple_divergence([&](double k) { return (static_cast<int>(k) % 2 ? ri : r) * boost(2, k); }, sched);
  EXPECT_FALSE(alt.simple);
  EXPECT_THROW(simple_divergence([](double) { return boost(2, 1.0); }, sched), std::domain_error);
}

TEST(Kleinian, SigmaHyperplaneTangency) {
  Vec x = Vec::Zero(3);
  x << 1.0, 1.0, 0.0;  // isotropic in R^{1,2}
  SigmaHyperplane s = sigma_hyperplane(x);
  EXPECT_NEAR(s.eval(x), 0.0, 1e-12);
  Vec inside(3);
  inside << 1.0, 0.2, -0.3;
  EXPECT_TRUE(s.omega_side(inside));
  Vec bad(3);
  bad << 1.0, 0.0, 0.0;
  EXPECT_THROW(sigma_hyperplane(bad), std::invalid_argument);
}

TEST(Kleinian, PropernessProbe) {
  SampledSet with_o{{basepoint(2).xi}, 0.05};
  PropernessReport r = properness_probe(translation_group(), with_o, 3);
  EXPECT_FALSE(r.free_ok);
  PropernessReport trivial = properness_probe(GroupPresentation{}, with_o, 3);
  EXPECT_TRUE(trivial.free_ok);
  EXPECT_TRUE(trivial.proper_ok);
}
