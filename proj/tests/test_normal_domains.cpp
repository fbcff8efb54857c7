#include "confmax/normal_domains.hpp"

#include <gtest/gtest.h>

using namespace confmax;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::shared_ptr<LipschitzGraphDomain> cone(double k) {
  return std::make_shared<LipschitzGraphDomain>(
      2, [k](const Vec& z) { return -k * std::abs(z(0)); }, k, 1, v2(-1.5, -2.0), v2(1.5, 1.0), "cone");
}

}  // namespace

TEST(NormalDomains, ConePairAndSymmetry) {
  auto D = cone(1.0);
  IntrinsicResult a = intrinsic_distance(*D, v2(-1, -0.99), v2(1, -0.99));
  IntrinsicResult b = intrinsic_distance(*D, v2(1, -0.99), v2(-1, -0.99));
  ASSERT_TRUE(a.reachable);
  EXPECT_GE(a.estimate, 2.79);
  EXPECT_LE(a.estimate, 2.84);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_GE(a.estimate, a.euclidean);
}

TEST(NormalDomains, RefinementIsMonotone) {
  auto D = cone(1.0);
  PathOptions coarse, fine;
  coarse.h = 0.04;
  fine.h = 0.02;
  IntrinsicResult a = intrinsic_distance(*D, v2(-1, -0.9), v2(1, -0.9), coarse);
  IntrinsicResult b = intrinsic_distance(*D, v2(-1, -0.9), v2(1, -0.9), fine);
  EXPECT_LE(b.grid_length, a.grid_length + 1e-12);
}

TEST(NormalDomains, HalfPlaneIsConvex) {
  LipschitzGraphDomain D(2, [](const Vec&) { return 0.0; }, 0.0, 1, v2(-1, 0), v2(1, 1), "half-plane");
  IntrinsicResult r = intrinsic_distance(D, v2(-0.8, 0.2), v2(0.7, 0.9));
  EXPECT_NEAR(r.estimate, r.euclidean, 1e-12);
}

TEST(NormalDomains, PointDeletedSpaceRatioNearOne) {
  SmallBoundaryDomain D(3, {Vec::Zero(3)}, std::nullopt, -Vec::Ones(3), Vec::Ones(3));
  Vec x = Vec::Zero(3), y = Vec::Zero(3);
  x(0) = 0.5;
  y(0) = -0.5;
  PathOptions opt;
  opt.h = 0.02;
  IntrinsicResult r = intrinsic_distance(D, x, y, opt);
  ASSERT_TRUE(r.reachable);
  EXPECT_LE(r.estimate / r.euclidean, 1.0 + grid_slack(3, opt.h, 0.5));
  EXPECT_GT(r.estimate, r.euclidean);
}

TEST(NormalDomains, EmpiricalLipschitzWithinDeclared) {
  Rng rng(1);
  auto D = cone(2.0);
  EXPECT_LE(D->empirical_lipschitz(500, rng), 2.0 + 1e-12);
}

TEST(NormalDomains, BilipschitzReportSmallSweep) {
  Rng rng(2);
  auto D = cone(1.0);
  PathOptions opt;
  opt.h = 0.02;
  auto pairs = sample_pairs(*D, 5, 0.04, 0.5, rng);
  BilipschitzReport r = bilipschitz_report(*D, pairs, D->lipschitz(), 0.5, opt);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.pairs.size(), 5u);
  EXPECT_NEAR(r.eta, grid_slack(2, 0.02, 0.5), 1e-15);
}

TEST(NormalDomains, ProductLength) {
  Vec y1 = Vec::Zero(1), y2 = Vec::Constant(1, 4.0);
  EXPECT_NEAR(product_min_length(3.0, y1, y2).minimum, 5.0, 1e-15);
  EXPECT_NEAR(product_min_length(3.0, y1, y1).length, 3.0, 1e-12);
  std::vector<Vec> bad{Vec::Constant(1, 1.0), y2};
  EXPECT_THROW(product_min_length(3.0, y1, y2, bad), std::invalid_argument);
}

TEST(NormalDomains, TrivialFiberReducesToBase) {
  Rng rng(3);
  auto D = cone(1.0);
  PathOptions opt;
  opt.h = 0.02;
  auto pairs = sample_pairs(*D, 3, 0.04, 0.5, rng);
  FiberedReport f = fibered_constant_check(D, 0, pairs, 0.5, opt);
  BilipschitzReport b = bilipschitz_report(*D, pairs, D->lipschitz(), 0.5, opt);
  EXPECT_NEAR(f.bilipschitz.worst_ratio, b.worst_ratio, 1e-12);
  EXPECT_TRUE(f.composite_ok);
}
