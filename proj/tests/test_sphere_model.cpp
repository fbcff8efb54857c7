#include "confmax/sphere_model.hpp"

#include <gtest/gtest.h>

using namespace confmax;

TEST(SphereModel, InversionRadiusLawAndInvolution) {
  Rng rng(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec u(3);
    for (int j = 0; j < 3; ++j) u(j) = nd(rng);
    EXPECT_NEAR(s_plus(u).norm() * u.norm(), 1.0, 1e-12);
    EXPECT_LT((s_plus(s_plus(u)) - u).norm(), 1e-12 * std::max(1.0, u.norm()));
  }
}

TEST(SphereModel, ChartRoundTripAndBasepoint) {
  Vec x(2);
  x << 0.3, -2.0;
  EXPECT_LT((chart(chart_inv(x)) - x).norm(), 1e-12);
  EXPECT_LT(round_distance(antipode(2), chart_inv(Vec::Zero(2))), 1e-15);
  EXPECT_NEAR(round_distance(basepoint(2), antipode(2)), M_PI, 1e-15);
}

TEST(SphereModel, ParabolicActsAsSimilarityInChart) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    ParabolicElement p = random_parabolic(2, rng);
    GroupElement g = parabolic_to_matrix(p);
    EXPECT_LT(round_distance(act(g, basepoint(2)), basepoint(2)), 1e-12);
    Vec x(2);
    x << 0.7, -0.4;
    EXPECT_LT((chart(act(g, chart_inv(x))) - p.apply(x)).norm(), 1e-9);
  }
}

TEST(SphereModel, CompactElementsAreIsometries) {
  Rng rng(3);
  GroupElement k = compact_element(random_orthogonal(4, rng));
  SpherePoint p = SpherePoint::from_vector(Vec::Ones(4)), q = chart_inv(Vec::Constant(3, 0.5));
  EXPECT_NEAR(round_distance(act(k, p), act(k, q)), round_distance(p, q), 1e-10);
}

TEST(SphereModel, HausdorffSymmetricAndTriangle) {
  SampledSet a{sphere_grid(3, 0.4), 0.4}, b{sphere_grid(3, 0.2), 0.2};
  SampledSet c{{basepoint(2).xi, antipode(2).xi}, 0.1};
  EXPECT_EQ(hausdorff(a, b), hausdorff(b, a));
  EXPECT_LE(hausdorff(a, c), hausdorff(a, b) + hausdorff(b, c));
  EXPECT_EQ(hausdorff(a, a), 0.0);
  EXPECT_EQ(directed_hausdorff(a, b), 0.0);  // nested grids
}

TEST(SphereModel, GridsAreNestedAndCovering) {
  auto coarse = sphere_grid(3, 0.3), fine = sphere_grid(3, 0.15);
  NearestIndex idx(fine);
  for (const Vec& p : coarse) EXPECT_EQ(idx.distance(p), 0.0);
  Rng rng(4);
  std::normal_distribution<double> nd(0.0, 1.0);
  NearestIndex cidx(coarse);
  for (int i = 0; i < 200; ++i) {
    Vec q(3);
    for (int j = 0; j < 3; ++j) q(j) = nd(rng);
    EXPECT_LT(cidx.distance(q / q.norm()), 0.3);
  }
}

TEST(SphereModel, BoxDimensionOfCircle) {
  std::vector<Vec> circle;
  for (int i = 0; i < 20000; ++i) {
    Vec p = Vec::Zero(3);
    p(0) = std::cos(2 * M_PI * i / 20000.0);
    p(1) = std::sin(2 * M_PI * i / 20000.0);
    circle.push_back(p);
  }
  BoxDimension bd = box_counting_dimension(circle, {0.16, 0.08, 0.04, 0.02, 0.01});
  EXPECT_NEAR(bd.estimate, 1.0, 0.1);
  EXPECT_FALSE(bd.degenerate);
}

TEST(SphereModel, SampledSetValidation) {
  SampledSet empty;
  EXPECT_THROW(empty.validate(), std::invalid_argument);
  SampledSet bad{{Vec::Ones(3)}, 0.1};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}
