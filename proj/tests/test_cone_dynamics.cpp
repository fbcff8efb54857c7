#include "confmax/cone_dynamics.hpp"

#include <gtest/gtest.h>

using namespace confmax;

namespace {

Cone test_cone() {
  Vec c(2);
  c << 0.0, 1.0;
  return Cone{c, 0.5, 1.0};
}

ParabolicSequence homothety(double sign) {
  return {[sign](double k) {
            ParabolicElement p = ParabolicElement::identity(2);
            p.lambda = std::exp2(sign * k);
            return p;
          },
          integer_schedule(12), "homothety", std::nullopt};
}

}  // namespace

TEST(ConeDynamics, SamplerPointsPassMembership) {
  Cone c = test_cone();
  SampledSet s = sample_cone(c, 0.05);
  ASSERT_FALSE(s.points.empty());
  bool has_vertex = false;
  for (const Vec& p : s.points) {
    EXPECT_TRUE(cone_membership(c, SpherePoint{p}));
    has_vertex = has_vertex || round_distance(p, basepoint(2).xi) == 0.0;
  }
  EXPECT_TRUE(has_vertex);
}

TEST(ConeDynamics, IdentityActionIsExact) {
  Cone c = test_cone();
  EXPECT_EQ(hausdorff(act_on_cone(ParabolicElement::identity(2), c, 0.05), sample_cone(c, 0.05)), 0.0);
}

TEST(ConeDynamics, RejectsDegenerateCones) {
  Cone c = test_cone();
  c.alpha = 1e-7;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ConeDynamics, TailLimitKinds) {
  EXPECT_EQ(tail_limit({1, 2, 3, 3, 3, 3}).kind, LimitKind::Finite);
  EXPECT_EQ(tail_limit({1, 1e3, 1e6, 1e9, 1e12}).kind, LimitKind::Infinity);
  EXPECT_EQ(tail_limit({1, 1e-3, 1e-6, 1e-9, 1e-12}).kind, LimitKind::Zero);
  EXPECT_EQ(tail_limit({1, 2, 1, 2, 1, 2}).kind, LimitKind::NonStabilizing);
}

TEST(ConeDynamics, HomothetyBranches) {
  Cone c = test_cone();
  ConeLimitVerdict up = classify_sequence(homothety(1.0), c);
  EXPECT_EQ(up.kind, ConeCase::ShrinkToVertex);
  ASSERT_TRUE(up.subball.has_value());
  EXPECT_TRUE(up.subball->full_cap);
  EXPECT_FALSE(up.renorm.has_value());

  ConeLimitVerdict down = classify_sequence(homothety(-1.0), c);
  EXPECT_EQ(down.kind, ConeCase::Renormalizable);
  ASSERT_TRUE(down.renorm.has_value());
  EXPECT_FALSE(down.subball.has_value());
  EXPECT_NEAR(down.renorm->limit_cone.lambda, 1.0, 1e-12);
  EXPECT_LT(down.renorm->l_limit.norm(), 1e-12);
}

TEST(ConeDynamics, TranslationAvoidsOppositeDirection) {
  Cone c = test_cone();
  Vec dir(2);
  dir << 0.0, -1.0;
  ParabolicSequence seq{[dir](double k) {
                          ParabolicElement p = ParabolicElement::identity(2);
                          p.v = std::exp2(k) * dir;
                          return p;
                        },
                        integer_schedule(12), "translation", std::nullopt};
  ConeLimitVerdict v = classify_sequence(seq, c);
  ASSERT_EQ(v.kind, ConeCase::ShrinkToVertex);
  ASSERT_TRUE(v.subball.has_value());
  EXPECT_GT(v.subball->alpha, 0.0);
  EXPECT_LE(angle_between(v.subball->center, c.center) + v.subball->alpha, c.alpha + 1e-12);
  EXPECT_GE(angle_between(v.subball->center, -v.u_limit) - v.subball->alpha, v.subball->delta - 1e-12);
}

TEST(ConeDynamics, VerifyShrinkingHomothety) {
  Cone c = test_cone();
  ParabolicSequence seq = homothety(1.0);
  ConeLimitVerdict v = classify_sequence(seq, c);
  VerifyReport r = verify_verdict(seq, c, v, 10, 0.05, 0.1);
  EXPECT_TRUE(r.passed) << r.failure;
  EXPECT_TRUE(r.decreasing);
}

TEST(ConeDynamics, SubcapContainment) {
  Cone c = test_cone();
  SubBall b = avoiding_subcap(c, c.center, 0.1);
  EXPECT_GE(b.alpha, std::min(c.alpha, 0.1) / 2 - 1e-12);
  EXPECT_LE(angle_between(b.center, c.center) + b.alpha, c.alpha + 1e-12);
}

TEST(ConeDynamics, BoundedSequenceIsRejected) {
  ParabolicSequence seq{[](double) { return ParabolicElement::identity(2); }, integer_schedule(12), "id",
                        std::nullopt};
  EXPECT_THROW(classify_sequence(seq, test_cone()), std::domain_error);
}

TEST(ConeDynamics, HalflineVerdicts) {
  Vec e1(2), e2(2);
  e1 << 1.0, 0.0;
  e2 << 0.0, 1.0;
  auto x = [e1](double k) { return Vec(k * e1); };
  auto sched = dyadic_schedule(12);
  HalflineReport t = halfline_limit(x, [e2](double) { return e2; }, sched);
  EXPECT_EQ(t.verdict, HalflineVerdict::ConvergesToVertex);
  EXPECT_LT(t.oracle_sup.back(), 0.05);
  HalflineReport back = halfline_limit(x, [e1](double) { return Vec(-e1); }, sched);
  EXPECT_EQ(back.verdict, HalflineVerdict::Inconclusive);
  EXPECT_GT(back.oracle_sup.back(), 3.0);  // the half-line crosses the antipode of o
}
