#pragma once

#include "confmax/liegroup.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace confmax {

// Open subset of R^d given by a clearance function that is positive inside.
class Domain {
 public:
  virtual ~Domain() = default;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual double clearance(const Vec& x) const = 0;
  virtual double lipschitz() const = 0;
  // Lower bound of the clearance along the segment [a, b].
  virtual double segment_clearance(const Vec& a, const Vec& b) const;
  bool contains(const Vec& x, double margin = 0.0) const { return clearance(x) > margin; }

  Vec box_lo, box_hi;  // region for pair sampling and path search
};

// Epigraph {t > f(z)} (side = +1) or hypograph {t < f(z)} (side = -1), with
// x = (z, t). Clearance is the signed vertical gap.
class LipschitzGraphDomain : public Domain {
 public:
  LipschitzGraphDomain(int d, std::function<double(const Vec&)> f, double k, int side, Vec lo, Vec hi,
                       std::string label);
  int dim() const override { return d_; }
  std::string name() const override { return label_; }
  double clearance(const Vec& x) const override;
  double lipschitz() const override { return std::sqrt(1.0 + k_ * k_); }
  double k() const { return k_; }
  double f(const Vec& z) const { return f_(z); }
  // Max sampled difference quotient |f(a) - f(b)| / |a - b| over a seeded sample.
  double empirical_lipschitz(std::size_t samples, Rng& rng) const;

 private:
  int d_;
  std::function<double(const Vec&)> f_;
  double k_;
  int side_;
  std::string label_;
};

// R^d minus finitely many points and optionally one round circle in R^3.
struct DeletedCircle {
  Vec center;
  Vec normal;
  double radius = 1.0;
};

class SmallBoundaryDomain : public Domain {
 public:
  SmallBoundaryDomain(int d, std::vector<Vec> points, std::optional<DeletedCircle> circle, Vec lo, Vec hi);
  int dim() const override { return d_; }
  std::string name() const override;
  double clearance(const Vec& x) const override;
  double lipschitz() const override { return 1.0; }
  double segment_clearance(const Vec& a, const Vec& b) const override;
  // Sample of the deleted set (for the dimension estimate).
  std::vector<Vec> deleted_sample(std::size_t per_circle = 4096) const;
  double declared_dimension() const { return circle_ ? 1.0 : 0.0; }

 private:
  int d_;
  std::vector<Vec> points_;
  std::optional<DeletedCircle> circle_;
};

// base x (0,1)^m.
class ProductDomain : public Domain {
 public:
  ProductDomain(std::shared_ptr<const Domain> base, int fiber_dim);
  int dim() const override { return base_->dim() + m_; }
  std::string name() const override;
  double clearance(const Vec& x) const override;
  double lipschitz() const override { return std::max(1.0, base_->lipschitz()); }
  const Domain& base() const { return *base_; }
  int fiber_dim() const { return m_; }

 private:
  std::shared_ptr<const Domain> base_;
  int m_;
};

struct PathOptions {
  double h = 0.01;
  double pad = 0.25;             // window padding around the domain box
  double connect_radius = 0.05;  // endpoints link to nodes within this radius
  std::size_t max_expansions = 20'000'000;
};

struct IntrinsicResult {
  bool reachable = false;
  double euclidean = 0.0;
  double grid_length = 0.0;  // raw lattice path (nested-monotone in h)
  double estimate = 0.0;     // shortcut polyline, >= euclidean
  std::vector<Vec> path;     // shortcut polyline from x to y
  std::size_t expanded = 0;
};

// Grid slack used in bound checks: 2 sqrt(d) h / d_min.
double grid_slack(int d, double h, double d_min);

IntrinsicResult intrinsic_distance(const Domain& D, const Vec& x, const Vec& y, const PathOptions& opt = {});

struct PairRatio {
  Vec x, y;
  double euclidean = 0.0;
  double intrinsic = 0.0;
  double ratio = 0.0;
};

struct BilipschitzReport {
  double worst_ratio = 0.0;
  std::size_t worst_index = 0;
  double eta = 0.0;
  double bound = 0.0;
  bool ok = false;
  std::vector<PairRatio> pairs;
  std::size_t unreachable = 0;
};

// bound_factor is sqrt(1 + k^2) for graphs, 1 for small-boundary domains.
BilipschitzReport bilipschitz_report(const Domain& D, const std::vector<std::pair<Vec, Vec>>& pairs,
                                     double bound_factor, double d_min, const PathOptions& opt = {});

// Random pairs in the domain box with clearance > margin and separation >= d_min.
std::vector<std::pair<Vec, Vec>> sample_pairs(const Domain& D, std::size_t count, double margin, double d_min,
                                              Rng& rng);

struct ProductLength {
  double length = 0.0;
  double minimum = 0.0;  // sqrt(L^2 + |dy|^2)
  bool bound_ok = false;
};

// beta: samples beta(s_i) at s_i = i L / (N - 1).
ProductLength product_min_length(double L, const Vec& y1, const Vec& y2,
                                 const std::optional<std::vector<Vec>>& beta = std::nullopt);

struct FiberedReport {
  double k_base = 0.0;
  double K = 0.0;  // 2 k_base
  BilipschitzReport bilipschitz;
  bool composite_ok = false;
};

FiberedReport fibered_constant_check(std::shared_ptr<const LipschitzGraphDomain> base, int fiber_dim,
                                     const std::vector<std::pair<Vec, Vec>>& pairs, double d_min,
                                     const PathOptions& opt = {});

}  // namespace confmax
