#pragma once

#include "confmax/liegroup.hpp"

#include <memory>
#include <string>
#include <vector>

namespace confmax {

// Unit vector xi in R^{n+1}; the null line through (1, xi).
struct SpherePoint {
  Vec xi;

  static SpherePoint from_vector(const Vec& v);  // normalizes, rejects zero
  int n() const { return static_cast<int>(xi.size()) - 1; }
};

// o = e_{n+1} (null line of e_0 + e_{n+1}); its antipode is chart_inv(0).
SpherePoint basepoint(int n);
SpherePoint antipode(int n);
Vec null_vector(const SpherePoint& p);

SpherePoint act(const GroupElement& g, const SpherePoint& p);

// Stereographic chart with o at infinity.
Vec chart(const SpherePoint& p);
SpherePoint chart_inv(const Vec& x);
// Point at angle theta from o in unit chart direction w.
SpherePoint from_polar(const Vec& w, double theta);
double angle_from_basepoint(const SpherePoint& p);

// Inversion u -> u / |u|^2 under n+ ~ R^n.
Vec s_plus(const Vec& u);

// arccos(<p, q>) evaluated as 2 atan2(|p - q|, |p + q|).
double round_distance(const Vec& p, const Vec& q);
double round_distance(const SpherePoint& p, const SpherePoint& q);
double angle_between(const Vec& a, const Vec& b);

struct SampledSet {
  std::vector<Vec> points;
  double resolution = 0.01;

  void validate() const;  // nonempty, unit vectors
  std::size_t size() const { return points.size(); }
};

// Exact nearest neighbour on the unit sphere (chordal order = angular order).
class NearestIndex {
 public:
  explicit NearestIndex(const std::vector<Vec>& pts);
  ~NearestIndex();
  NearestIndex(const NearestIndex&) = delete;
  NearestIndex& operator=(const NearestIndex&) = delete;

  std::size_t nearest(const Vec& q) const;
  double distance(const Vec& q) const;  // angle to the nearest point

  struct Impl;

 private:
  const std::vector<Vec>* pts_;
  std::unique_ptr<Impl> impl_;
};

double directed_hausdorff(const SampledSet& X, const SampledSet& Y);
double hausdorff(const SampledSet& X, const SampledSet& Y);

struct BoxDimension {
  double estimate = 0.0;
  double residual = 0.0;  // rms of the log-log fit
  std::vector<double> scales;
  std::vector<double> counts;
  bool degenerate = false;
  std::string estimator = "box-counting (upper proxy for Hausdorff dimension)";
};

BoxDimension box_counting_dimension(const SampledSet& X, const std::vector<double>& scales);
// Same estimator for points of any Euclidean space.
BoxDimension box_counting_dimension(const std::vector<Vec>& points, const std::vector<double>& scales);

// Points on the unit sphere of R^d from a cube-face grid; consecutive points
// are within `spacing` (chordal). Coarser spacings give subsets.
std::vector<Vec> sphere_grid(int d, double spacing);

}  // namespace confmax
