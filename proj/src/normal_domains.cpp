#include "confmax/normal_domains.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace confmax {

namespace {

constexpr double kWindowAlign = 0.25;
constexpr double kMaxSampleSpacing = 1.0 / 800.0;

double segment_point_distance(const Vec& a, const Vec& b, const Vec& p) {
  Vec ab = b - a;
  const double L2 = ab.squaredNorm();
  double s = L2 > 0.0 ? std::clamp((p - a).dot(ab) / L2, 0.0, 1.0) : 0.0;
  return (a + s * ab - p).norm();
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

double Domain::segment_clearance(const Vec& a, const Vec& b) const {
  const double len = (b - a).norm();
  const double spacing_target = std::min(len / 16.0, kMaxSampleSpacing);
  const int ns = spacing_target > 0.0 ? std::max(17, static_cast<int>(std::ceil(len / spacing_target)) + 1) : 1;
  const double spacing = ns > 1 ? len / (ns - 1) : 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ns; ++i) {
    const double s = ns > 1 ? static_cast<double>(i) / (ns - 1) : 0.0;
    lo = std::min(lo, clearance(a + s * (b - a)));
  }
  // Between samples the clearance cannot drop by more than Lip * spacing / 2.
  return lo - lipschitz() * spacing / 2.0;
}

// ---------------------------------------------------------------- graph

LipschitzGraphDomain::LipschitzGraphDomain(int d, std::function<double(const Vec&)> f, double k, int side, Vec lo,
                                           Vec hi, std::string label)
    : d_(d), f_(std::move(f)), k_(k), side_(side), label_(std::move(label)) {
  if (d < 2 || (side != 1 && side != -1) || !(k >= 0.0)) throw std::invalid_argument("LipschitzGraphDomain: bad arguments");
  if (lo.size() != d || hi.size() != d) throw std::invalid_argument("LipschitzGraphDomain: box dimension mismatch");
  box_lo = std::move(lo);
  box_hi = std::move(hi);
}

double LipschitzGraphDomain::clearance(const Vec& x) const {
  return side_ * (x(d_ - 1) - f_(x.head(d_ - 1)));
}

double LipschitzGraphDomain::empirical_lipschitz(std::size_t samples, Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    Vec a(d_ - 1), b(d_ - 1);
    for (int j = 0; j < d_ - 1; ++j) {
      a(j) = box_lo(j) + (box_hi(j) - box_lo(j)) * u(rng);
      b(j) = box_lo(j) + (box_hi(j) - box_lo(j)) * u(rng);
    }
    const double dz = (a - b).norm();
    if (dz > 0.0) worst = std::max(worst, std::abs(f_(a) - f_(b)) / dz);
  }
  return worst;
}

// ---------------------------------------------------------------- small boundary

SmallBoundaryDomain::SmallBoundaryDomain(int d, std::vector<Vec> points, std::optional<DeletedCircle> circle, Vec lo,
                                         Vec hi)
    : d_(d), points_(std::move(points)), circle_(std::move(circle)) {
  if (d < 2) throw std::invalid_argument("SmallBoundaryDomain: d >= 2");
  for (const Vec& p : points_)
    if (p.size() != d) throw std::invalid_argument("SmallBoundaryDomain: point dimension mismatch");
  if (circle_) {
    if (d != 3) throw std::invalid_argument("SmallBoundaryDomain: deleted circle needs d = 3");
    circle_->normal /= circle_->normal.norm();
  }
  if (points_.empty() && !circle_) throw std::invalid_argument("SmallBoundaryDomain: empty deleted set");
  box_lo = std::move(lo);
  box_hi = std::move(hi);
}

std::string SmallBoundaryDomain::name() const {
  return "R^" + std::to_string(d_) + " minus " + std::to_string(points_.size()) + " point(s)" +
         (circle_ ? " and a circle" : "");
}

double SmallBoundaryDomain::clearance(const Vec& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const Vec& p : points_) d = std::min(d, (x - p).norm());
  if (circle_) {
    Vec r = x - circle_->center;
    const double axial = r.dot(circle_->normal);
    const double rho = (r - axial * circle_->normal).norm();
    d = std::min(d, std::hypot(axial, rho - circle_->radius));
  }
  return d;
}

double SmallBoundaryDomain::segment_clearance(const Vec& a, const Vec& b) const {
  double d = std::numeric_limits<double>::infinity();
  for (const Vec& p : points_) d = std::min(d, segment_point_distance(a, b, p));
  if (circle_) {
    SmallBoundaryDomain only_circle(d_, {}, circle_, box_lo, box_hi);
    d = std::min(d, only_circle.Domain::segment_clearance(a, b));
  }
  return d;
}

std::vector<Vec> SmallBoundaryDomain::deleted_sample(std::size_t per_circle) const {
  std::vector<Vec> out = points_;
  if (circle_) {
    Vec n = circle_->normal;
    Eigen::Index imin = 0;
    n.cwiseAbs().minCoeff(&imin);
    Vec e = Vec::Zero(3);
    e(imin) = 1.0;
    Vec u = (e - e.dot(n) * n).normalized();
    Eigen::Vector3d n3 = n, u3 = u;
    Vec v = n3.cross(u3);
    for (std::size_t i = 0; i < per_circle; ++i) {
      const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(per_circle);
      out.push_back(circle_->center + circle_->radius * (std::cos(th) * u + std::sin(th) * v));
    }
  }
  return out;
}

// ---------------------------------------------------------------- product

ProductDomain::ProductDomain(std::shared_ptr<const Domain> base, int fiber_dim) : base_(std::move(base)), m_(fiber_dim) {
  if (!base_ || m_ < 0) throw std::invalid_argument("ProductDomain: bad arguments");
  const int d = base_->dim() + m_;
  box_lo = Vec::Zero(d);
  box_hi = Vec::Ones(d);
  box_lo.head(base_->dim()) = base_->box_lo;
  box_hi.head(base_->dim()) = base_->box_hi;
}

std::string ProductDomain::name() const { return base_->name() + " x (0,1)^" + std::to_string(m_); }

double ProductDomain::clearance(const Vec& x) const {
  const int b = base_->dim();
  double c = base_->clearance(x.head(b));
  for (int i = 0; i < m_; ++i) c = std::min({c, x(b + i), 1.0 - x(b + i)});
  return c;
}

// ---------------------------------------------------------------- search

double grid_slack(int d, double h, double d_min) { return 2.0 * std::sqrt(static_cast<double>(d)) * h / d_min; }

namespace {

struct Lattice {
  int d;
  double h;
  std::vector<long long> lo, hi;  // inclusive integer ranges
  std::vector<std::uint64_t> stride;

  Lattice(const Domain& D, double h_, double pad) : d(D.dim()), h(h_), lo(d), hi(d), stride(d) {
    for (int i = 0; i < d; ++i) {
      const double wlo = std::floor((D.box_lo(i) - pad) / kWindowAlign) * kWindowAlign;
      const double whi = std::ceil((D.box_hi(i) + pad) / kWindowAlign) * kWindowAlign;
      lo[i] = static_cast<long long>(std::ceil(wlo / h - 1e-9));
      hi[i] = static_cast<long long>(std::floor(whi / h + 1e-9));
    }
    std::uint64_t s = 1;
    for (int i = d - 1; i >= 0; --i) {
      stride[i] = s;
      s *= static_cast<std::uint64_t>(hi[i] - lo[i] + 1);
    }
  }
  bool inside(const std::vector<long long>& c) const {
    for (int i = 0; i < d; ++i)
      if (c[i] < lo[i] || c[i] > hi[i]) return false;
    return true;
  }
  std::uint64_t index(const std::vector<long long>& c) const {
    std::uint64_t k = 0;
    for (int i = 0; i < d; ++i) k += static_cast<std::uint64_t>(c[i] - lo[i]) * stride[i];
    return k;
  }
  std::vector<long long> coords(std::uint64_t k) const {
    std::vector<long long> c(d);
    for (int i = 0; i < d; ++i) {
      c[i] = lo[i] + static_cast<long long>(k / stride[i]);
      k %= stride[i];
    }
    return c;
  }
  Vec point(const std::vector<long long>& c) const {
    Vec p(d);
    for (int i = 0; i < d; ++i) p(i) = static_cast<double>(c[i]) * h;
    return p;
  }
  // Obstacle-free shortest path length between two nodes of the 3^d - 1 lattice.
  double free_distance(const std::vector<long long>& a, const std::vector<long long>& b) const {
    std::vector<long long> m(d);
    for (int i = 0; i < d; ++i) m[i] = std::llabs(a[i] - b[i]);
    std::sort(m.begin(), m.end(), std::greater<>());
    double L = 0.0;
    for (int i = 0; i < d; ++i) {
      const long long next = i + 1 < d ? m[i + 1] : 0;
      L += std::sqrt(static_cast<double>(i + 1)) * static_cast<double>(m[i] - next);
    }
    return L * h;
  }
  // Lattice nodes within radius r of x (lexicographic order).
  std::vector<std::vector<long long>> ball(const Vec& x, double r) const {
    std::vector<long long> a(d), b(d), c(d);
    for (int i = 0; i < d; ++i) {
      a[i] = std::max(lo[i], static_cast<long long>(std::ceil((x(i) - r) / h)));
      b[i] = std::min(hi[i], static_cast<long long>(std::floor((x(i) + r) / h)));
      if (a[i] > b[i]) return {};
    }
    std::vector<std::vector<long long>> out;
    c = a;
    for (;;) {
      if ((point(c) - x).norm() <= r) out.push_back(c);
      int i = d - 1;
      while (i >= 0 && ++c[i] > b[i]) c[i] = a[i], --i;
      if (i < 0) break;
    }
    return out;
  }
};

std::vector<Vec> shortcut(const Domain& D, const std::vector<Vec>& pts, double margin) {
  std::vector<Vec> out{pts.front()};
  std::size_t i = 0;
  while (i + 1 < pts.size()) {
    std::size_t j = pts.size() - 1;
    while (j > i + 1 && !(D.segment_clearance(pts[i], pts[j]) > margin)) --j;
    out.push_back(pts[j]);
    i = j;
  }
  return out;
}

double polyline_length(const std::vector<Vec>& pts) {
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) L += (pts[i + 1] - pts[i]).norm();
  return L;
}

IntrinsicResult search(const Domain& D, const Vec& x, const Vec& y, const PathOptions& opt) {
  const int d = D.dim();
  const double margin = opt.h / 4.0;
  IntrinsicResult res;
  res.euclidean = (y - x).norm();
  if (!D.contains(x, margin) || !D.contains(y, margin))
    throw std::invalid_argument("intrinsic_distance: endpoints need clearance > h/4");
  if (D.segment_clearance(x, y) > margin) {
    res.reachable = true;
    res.grid_length = res.estimate = res.euclidean;
    res.path = {x, y};
    return res;
  }
  Lattice lat(D, opt.h, opt.pad);
  const double R = std::max(opt.connect_radius, 2.0 * std::sqrt(static_cast<double>(d)) * opt.h);

  std::unordered_map<std::uint64_t, double> target;
  std::vector<long long> yhat(d);
  for (int i = 0; i < d; ++i) yhat[i] = std::llround(y(i) / opt.h);
  double C = -std::numeric_limits<double>::infinity();
  for (const auto& c : lat.ball(y, R)) {
    Vec p = lat.point(c);
    if (D.contains(p, margin) && D.segment_clearance(p, y) > margin) {
      const double last = (y - p).norm();
      target.emplace(lat.index(c), last);
      C = std::max(C, lat.free_distance(c, yhat) - last);
    }
  }
  // max of two consistent lower bounds on the remaining cost
  auto heuristic = [&](const std::vector<long long>& c, const Vec& p) {
    return std::max((y - p).norm(), lat.free_distance(c, yhat) - C);
  };

  struct State {
    double g;
    double clearance;
    std::uint64_t parent;
    bool closed;
  };
  constexpr std::uint64_t kStart = std::numeric_limits<std::uint64_t>::max();
  constexpr std::uint64_t kSink = kStart - 1;
  std::unordered_map<std::uint64_t, State> state;
  using Item = std::pair<double, std::uint64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> open;
  for (const auto& c : lat.ball(x, R)) {
    Vec p = lat.point(c);
    const double cl = D.clearance(p);
    if (!(cl > margin) || !(D.segment_clearance(x, p) > margin)) continue;
    const std::uint64_t k = lat.index(c);
    const double g = (p - x).norm();
    state[k] = {g, cl, kStart, false};
    open.emplace(g + heuristic(c, p), k);
  }

  std::vector<std::vector<long long>> moves;
  {
    std::vector<long long> o(d, -1);
    for (;;) {
      if (std::any_of(o.begin(), o.end(), [](long long v) { return v != 0; })) moves.push_back(o);
      int i = d - 1;
      while (i >= 0 && ++o[i] > 1) o[i] = -1, --i;
      if (i < 0) break;
    }
  }

  std::vector<double> move_len;
  for (const auto& mv : moves) {
    int nnz = 0;
    for (long long v : mv) nnz += v != 0;
    move_len.push_back(opt.h * std::sqrt(static_cast<double>(nnz)));
  }
  constexpr double kUnreached = std::numeric_limits<double>::infinity();
  Vec p_buf(d), q_buf(d);
  std::vector<long long> nc(d);
  state.reserve(1 << 20);

  const double lip = D.lipschitz();
  std::uint64_t found = kStart;
  double sink_cost = std::numeric_limits<double>::infinity();
  std::uint64_t sink_parent = kStart;
  while (!open.empty()) {
    auto [f, k] = open.top();
    open.pop();
    if (k == kSink) {
      if (f != sink_cost) continue;
      found = sink_parent;
      res.grid_length = sink_cost;
      break;
    }
    State& s = state.at(k);
    if (s.closed) continue;
    s.closed = true;
    if (++res.expanded > opt.max_expansions)
      throw std::length_error("intrinsic_distance: expansion budget exceeded");
    const double g = s.g;
    const double cl_p = s.clearance;
    if (auto t = target.find(k); t != target.end() && g + t->second < sink_cost) {
      sink_cost = g + t->second;
      sink_parent = k;
      open.emplace(sink_cost, kSink);
    }
    const std::vector<long long> c = lat.coords(k);
    p_buf = lat.point(c);
    for (std::size_t mi = 0; mi < moves.size(); ++mi) {
      const auto& mv = moves[mi];
      for (int i = 0; i < d; ++i) nc[i] = c[i] + mv[i];
      if (!lat.inside(nc)) continue;
      const std::uint64_t nk = lat.index(nc);
      const double ng = g + move_len[mi];
      auto it = state.find(nk);
      if (it == state.end()) {
        for (int i = 0; i < d; ++i) q_buf(i) = static_cast<double>(nc[i]) * opt.h;
        it = state.emplace(nk, State{kUnreached, D.clearance(q_buf), kStart, false}).first;
      }
      State& t = it->second;
      if (t.closed || t.g <= ng || !(t.clearance > margin)) continue;
      for (int i = 0; i < d; ++i) q_buf(i) = static_cast<double>(nc[i]) * opt.h;
      // Endpoint clearances certify the edge when they beat the Lipschitz drop.
      const bool clear = std::min(cl_p, t.clearance) - lip * move_len[mi] / 2.0 > margin ||
                         D.segment_clearance(p_buf, q_buf) > margin;
      if (!clear) continue;
      t.g = ng;
      t.parent = k;
      open.emplace(ng + heuristic(nc, q_buf), nk);
    }
  }
  if (found == kStart) return res;

  std::vector<Vec> pts{y};
  for (std::uint64_t k = found; k != kStart; k = state.at(k).parent) pts.push_back(lat.point(lat.coords(k)));
  pts.push_back(x);
  std::reverse(pts.begin(), pts.end());
  res.reachable = true;
  res.path = shortcut(D, pts, margin);
  res.estimate = std::max(res.euclidean, polyline_length(res.path));
  return res;
}

}  // namespace

IntrinsicResult intrinsic_distance(const Domain& D, const Vec& x, const Vec& y, const PathOptions& opt) {
  if (x.size() != D.dim() || y.size() != D.dim()) throw std::invalid_argument("intrinsic_distance: dimension mismatch");
  if (!(opt.h > 0.0)) throw std::invalid_argument("intrinsic_distance: h must be positive");
  if (lex_less(y, x)) {
    IntrinsicResult r = search(D, y, x, opt);
    std::reverse(r.path.begin(), r.path.end());
    return r;
  }
  return search(D, x, y, opt);
}

BilipschitzReport bilipschitz_report(const Domain& D, const std::vector<std::pair<Vec, Vec>>& pairs,
                                     double bound_factor, double d_min, const PathOptions& opt) {
  BilipschitzReport rep;
  rep.eta = grid_slack(D.dim(), opt.h, d_min);
  rep.bound = bound_factor * (1.0 + rep.eta);
  for (const auto& [x, y] : pairs) {
    IntrinsicResult r = intrinsic_distance(D, x, y, opt);
    if (!r.reachable) {
      ++rep.unreachable;
      continue;
    }
    PairRatio pr{x, y, r.euclidean, r.estimate, r.estimate / r.euclidean};
    if (pr.ratio > rep.worst_ratio) {
      rep.worst_ratio = pr.ratio;
      rep.worst_index = rep.pairs.size();
    }
    rep.pairs.push_back(std::move(pr));
  }
  rep.ok = !rep.pairs.empty() && rep.worst_ratio <= rep.bound;
  return rep;
}

std::vector<std::pair<Vec, Vec>> sample_pairs(const Domain& D, std::size_t count, double margin, double d_min,
                                              Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = D.dim();
  auto draw = [&] {
    for (int attempt = 0; attempt < 100000; ++attempt) {
      Vec p(d);
      for (int i = 0; i < d; ++i) p(i) = D.box_lo(i) + (D.box_hi(i) - D.box_lo(i)) * u(rng);
      if (D.contains(p, margin)) return p;
    }
    throw std::runtime_error("sample_pairs: domain box has no interior points");
  };
  std::vector<std::pair<Vec, Vec>> out;
  while (out.size() < count) {
    Vec a = draw(), b = draw();
    if ((a - b).norm() >= d_min) out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

ProductLength product_min_length(double L, const Vec& y1, const Vec& y2, const std::optional<std::vector<Vec>>& beta) {
  if (!(L > 0.0)) throw std::invalid_argument("product_min_length: L must be positive");
  ProductLength out;
  out.minimum = std::hypot(L, (y2 - y1).norm());
  if (!beta) {
    out.length = out.minimum;
    out.bound_ok = true;
    return out;
  }
  const auto& b = *beta;
  if (b.size() < 2) throw std::invalid_argument("product_min_length: beta needs >= 2 samples");
  const double tol = 1e-12 * std::max(1.0, y1.norm() + y2.norm());
  if ((b.front() - y1).norm() > tol || (b.back() - y2).norm() > tol)
    throw std::invalid_argument("product_min_length: beta endpoints do not match y1, y2");
  const double ds = L / static_cast<double>(b.size() - 1);
  // Trapezoid rule for sqrt(1 + |beta'|^2) with the piecewise-constant difference quotient.
  for (std::size_t i = 0; i + 1 < b.size(); ++i) out.length += std::hypot(ds, (b[i + 1] - b[i]).norm());
  out.bound_ok = out.length >= out.minimum * (1.0 - 1e-12);
  return out;
}

FiberedReport fibered_constant_check(std::shared_ptr<const LipschitzGraphDomain> base, int fiber_dim,
                                     const std::vector<std::pair<Vec, Vec>>& pairs, double d_min,
                                     const PathOptions& opt) {
  FiberedReport rep;
  rep.k_base = base->lipschitz();
  rep.K = 2.0 * rep.k_base;
  const int b = base->dim();
  ProductDomain prod(base, fiber_dim);
  rep.bilipschitz = bilipschitz_report(prod, pairs, rep.K, d_min, opt);
  rep.composite_ok = true;
  for (const PairRatio& pr : rep.bilipschitz.pairs) {
    const double L = (pr.y.head(b) - pr.x.head(b)).norm();
    const double dy = (pr.y.tail(fiber_dim) - pr.x.tail(fiber_dim)).norm();
    const double composite = std::hypot(rep.k_base * L, dy);
    const bool consistent = composite <= rep.K * std::hypot(L, dy) + 1e-12;
    const bool dominates = pr.intrinsic <= composite * (1.0 + rep.bilipschitz.eta);
    rep.composite_ok = rep.composite_ok && consistent && dominates;
  }
  return rep;
}

}  // namespace confmax
