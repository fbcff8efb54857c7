#include "confmax/sphere_model.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace confmax {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

SpherePoint SpherePoint::from_vector(const Vec& v) {
  double r = v.norm();
  if (!(r > 0.0) || !v.allFinite()) throw std::invalid_argument("SpherePoint: zero or non-finite vector");
  return {v / r};
}

SpherePoint basepoint(int n) {
  Vec xi = Vec::Zero(n + 1);
  xi(n) = 1.0;
  return {xi};
}

SpherePoint antipode(int n) {
  Vec xi = Vec::Zero(n + 1);
  xi(n) = -1.0;
  return {xi};
}

Vec null_vector(const SpherePoint& p) {
  Vec w(p.xi.size() + 1);
  w(0) = 1.0;
  w.tail(p.xi.size()) = p.xi;
  return w;
}

SpherePoint act(const GroupElement& g, const SpherePoint& p) {
  if (g.n() != p.n()) throw std::invalid_argument("act: dimension mismatch");
  Vec w = g.mat() * null_vector(p);
  // For exact group elements w(0) = |w_rest|; renormalize the unit part.
  Vec rest = w.tail(p.xi.size());
  double r = rest.norm();
  if (w(0) < 0.0) rest = -rest;
  return {rest / r};
}

Vec chart(const SpherePoint& p) {
  const int n = p.n();
  const double last = p.xi(n);
  Vec head = p.xi.head(n);
  double h2 = head.squaredNorm();
  if (last < 0.0) return head / (1.0 - last);
  if (h2 == 0.0) throw std::domain_error("chart: point at infinity");
  // Same value, without the cancellation in 1 - last near o.
  return head * ((1.0 + last) / h2);
}

SpherePoint chart_inv(const Vec& x) {
  const int n = static_cast<int>(x.size());
  double r2 = x.squaredNorm();
  Vec xi(n + 1);
  xi.head(n) = 2.0 * x / (1.0 + r2);
  xi(n) = (r2 - 1.0) / (r2 + 1.0);
  return {xi / xi.norm()};
}

SpherePoint from_polar(const Vec& w, double theta) {
  const int n = static_cast<int>(w.size());
  Vec xi(n + 1);
  xi.head(n) = std::sin(theta) * w;
  xi(n) = std::cos(theta);
  return {xi};
}

double angle_from_basepoint(const SpherePoint& p) { return round_distance(p, basepoint(p.n())); }

Vec s_plus(const Vec& u) {
  double r2 = u.squaredNorm();
  if (!(r2 > 0.0)) throw std::invalid_argument("s_plus: u = 0");
  return u / r2;
}

double round_distance(const Vec& p, const Vec& q) {
  return 2.0 * std::atan2((p - q).norm(), (p + q).norm());
}

double round_distance(const SpherePoint& p, const SpherePoint& q) { return round_distance(p.xi, q.xi); }

double angle_between(const Vec& a, const Vec& b) {
  return round_distance(Vec(a / a.norm()), Vec(b / b.norm()));
}

void SampledSet::validate() const {
  if (points.empty()) throw std::invalid_argument("SampledSet: empty");
  for (const Vec& p : points)
    if (std::abs(p.norm() - 1.0) > 1e-12) throw std::invalid_argument("SampledSet: point off the unit sphere");
}

// ---------------------------------------------------------------- nearest

struct NearestIndex::Impl {
  virtual ~Impl() = default;
  virtual std::size_t nearest(const Vec& q) const = 0;
};

namespace {

template <std::size_t D>
struct RTreeImpl final : NearestIndex::Impl {
  using Point = bg::model::point<double, D, bg::cs::cartesian>;
  using Value = std::pair<Point, std::size_t>;
  bgi::rtree<Value, bgi::rstar<16>> tree;

  static Point to_point(const Vec& v) {
    Point p;
    [&]<std::size_t... I>(std::index_sequence<I...>) { (bg::set<I>(p, v(I)), ...); }(
        std::make_index_sequence<D>{});
    return p;
  }

  explicit RTreeImpl(const std::vector<Vec>& pts) {
    std::vector<Value> vals;
    vals.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals.emplace_back(to_point(pts[i]), i);
    tree = bgi::rtree<Value, bgi::rstar<16>>(vals.begin(), vals.end());
  }

  std::size_t nearest(const Vec& q) const override {
    std::vector<Value> out;
    tree.query(bgi::nearest(to_point(q), 1), std::back_inserter(out));
    return out.front().second;
  }
};

struct BruteImpl final : NearestIndex::Impl {
  const std::vector<Vec>& pts;
  explicit BruteImpl(const std::vector<Vec>& p) : pts(p) {}
  std::size_t nearest(const Vec& q) const override {
    std::size_t best = 0;
    double bd = (pts[0] - q).squaredNorm();
    for (std::size_t i = 1; i < pts.size(); ++i) {
      double d = (pts[i] - q).squaredNorm();
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return best;
  }
};

std::unique_ptr<NearestIndex::Impl> make_impl(const std::vector<Vec>& pts) {
  const auto d = static_cast<std::size_t>(pts.front().size());
  if (pts.size() < 64) return std::make_unique<BruteImpl>(pts);
  switch (d) {
    case 2: return std::make_unique<RTreeImpl<2>>(pts);
    case 3: return std::make_unique<RTreeImpl<3>>(pts);
    case 4: return std::make_unique<RTreeImpl<4>>(pts);
    case 5: return std::make_unique<RTreeImpl<5>>(pts);
    case 6: return std::make_unique<RTreeImpl<6>>(pts);
    default: return std::make_unique<BruteImpl>(pts);
  }
}

}  // namespace

NearestIndex::NearestIndex(const std::vector<Vec>& pts) : pts_(&pts) {
  if (pts.empty()) throw std::invalid_argument("NearestIndex: empty point set");
  impl_ = make_impl(pts);
}

NearestIndex::~NearestIndex() = default;

std::size_t NearestIndex::nearest(const Vec& q) const { return impl_->nearest(q); }

double NearestIndex::distance(const Vec& q) const { return round_distance((*pts_)[nearest(q)], q); }

double directed_hausdorff(const SampledSet& X, const SampledSet& Y) {
  X.validate();
  Y.validate();
  NearestIndex idx(Y.points);
  double worst = 0.0;
  for (const Vec& x : X.points) worst = std::max(worst, idx.distance(x));
  return worst;
}

double hausdorff(const SampledSet& X, const SampledSet& Y) {
  return std::max(directed_hausdorff(X, Y), directed_hausdorff(Y, X));
}

// ---------------------------------------------------------------- box counting

BoxDimension box_counting_dimension(const SampledSet& X, const std::vector<double>& scales) {
  X.validate();
  return box_counting_dimension(X.points, scales);
}

BoxDimension box_counting_dimension(const std::vector<Vec>& points, const std::vector<double>& scales) {
  if (points.empty()) throw std::invalid_argument("box_counting_dimension: empty point set");
  if (scales.size() < 3) throw std::invalid_argument("box_counting_dimension: need >= 3 scales");
  auto [lo, hi] = std::minmax_element(scales.begin(), scales.end());
  if (!(*lo > 0.0) || *hi / *lo < 10.0 - 1e-9)
    throw std::invalid_argument("box_counting_dimension: scales must be positive and span >= 1 decade");

  BoxDimension out;
  out.scales = scales;
  std::vector<double> xs, ys;
  for (double eps : scales) {
    std::set<std::vector<long long>> boxes;
    for (const Vec& p : points) {
      std::vector<long long> key(p.size());
      for (Eigen::Index i = 0; i < p.size(); ++i) key[i] = static_cast<long long>(std::floor(p(i) / eps));
      boxes.insert(std::move(key));
    }
    double N = static_cast<double>(boxes.size());
    out.counts.push_back(N);
    xs.push_back(std::log(1.0 / eps));
    ys.push_back(std::log(N));
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / m;
    my += ys[i] / m;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  out.estimate = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double r = ys[i] - (my + out.estimate * (xs[i] - mx));
    rss += r * r;
  }
  out.residual = std::sqrt(rss / m);
  double finest = out.counts[std::min_element(scales.begin(), scales.end()) - scales.begin()];
  out.degenerate = finest >= 0.5 * static_cast<double>(points.size()) && points.size() > 20;
  out.degenerate = out.degenerate || out.residual > 0.25;
  return out;
}

std::vector<Vec> sphere_grid(int d, double spacing) {
  if (d < 2 || !(spacing > 0.0)) throw std::invalid_argument("sphere_grid: bad arguments");
  // Dyadic step counts make grids for different spacings nested.
  int steps = 1;
  while (2.0 / steps > 0.9 * spacing) steps *= 2;
  std::vector<Vec> out;
  std::vector<int> idx(d - 1, 0);
  for (int axis = 0; axis < d; ++axis) {
    for (int sign = -1; sign <= 1; sign += 2) {
      std::fill(idx.begin(), idx.end(), 0);
      for (;;) {
        Vec p(d);
        int k = 0;
        for (int i = 0; i < d; ++i) {
          if (i == axis) p(i) = sign;
          else p(i) = -1.0 + 2.0 * idx[k++] / steps;
        }
        out.push_back(p / p.norm());
        int j = 0;
        while (j < d - 1 && ++idx[j] > steps) idx[j++] = 0;
        if (j == d - 1) break;
      }
    }
  }
  return out;
}

}  // namespace confmax
