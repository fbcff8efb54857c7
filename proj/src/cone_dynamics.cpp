#include "confmax/cone_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace confmax {

namespace {

constexpr int kTail = 4;

double chord(const Vec& a, const Vec& b) { return (a - b).norm(); }

template <class T, class Dist>
bool tail_stable(const std::vector<T>& xs, double tol, Dist dist) {
  if (xs.size() < kTail) return false;
  const T& last = xs.back();
  for (std::size_t i = xs.size() - kTail; i < xs.size(); ++i)
    if (!(dist(xs[i], last) <= tol)) return false;
  return true;
}

// Lower bound on |lambda A t w + v| over the cone {t w : angle(w, center) <= alpha, t >= t0}.
double min_image_radius(const ParabolicElement& p, const Vec& center, double alpha, double t0) {
  const double mu = p.v.norm();
  if (mu == 0.0) return p.lambda * t0;
  Vec up = p.A.transpose() * p.v / mu;
  const double phi = std::max(0.0, angle_between(center, Vec(-up)) - alpha);
  const double lam = p.lambda;
  const double tstar = mu * std::cos(phi) / lam;
  if (tstar <= t0) {
    double val = lam * lam * t0 * t0 - 2.0 * lam * t0 * mu * std::cos(phi) + mu * mu;
    return std::sqrt(std::max(0.0, val));
  }
  return mu * std::sin(phi);
}

double radius_to_angle(double r) { return r > 0.0 ? 2.0 * std::atan(1.0 / r) : M_PI; }

double max_rotation_angle(const Mat& A, const Mat& B) {
  Eigen::JacobiSVD<Mat> svd(A - B);
  double s = std::min(2.0, svd.singularValues()(0));
  return 2.0 * std::asin(s / 2.0);
}

Vec deterministic_perpendicular(const Vec& c) {
  const int n = static_cast<int>(c.size());
  Eigen::Index imin = 0;
  c.cwiseAbs().minCoeff(&imin);
  Vec e = Vec::Zero(n);
  e(imin) = 1.0;
  Vec t = e - e.dot(c) * c;
  return t / t.norm();
}

}  // namespace

void Cone::validate() const {
  if (center.size() < 2) throw std::invalid_argument("Cone: dimension must be >= 2");
  if (std::abs(center.norm() - 1.0) > 1e-9) throw std::invalid_argument("Cone: center must be a unit vector");
  if (!(alpha > 1e-6) || !(alpha < M_PI / 2)) throw std::invalid_argument("Cone: alpha must lie in (1e-6, pi/2)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("Cone: lambda must be positive");
}

bool cone_membership(const Cone& c, const SpherePoint& p, double tol) {
  if (round_distance(p, basepoint(p.n())) < 1e-12) return true;
  Vec x = chart(p);
  double r = x.norm();
  if (r < (1.0 / c.lambda) * (1.0 - tol)) return false;
  return angle_between(x, c.center) <= c.alpha + tol;
}

SampledSet sample_cone_image(const Cone& c, const std::function<Vec(const Vec&)>& map,
                             double resolution, std::size_t budget) {
  c.validate();
  if (!(resolution > 0.0)) throw std::invalid_argument("sample_cone: resolution must be positive");
  const int n = c.n();
  const int d = n;  // n-1 cap coordinates, then the polar angle
  const int capdims = n - 1;
  Eigen::HouseholderQR<Mat> qr(c.center);
  Mat Q = qr.householderQ();
  Mat tangent = Q.rightCols(capdims);
  const double theta0 = 2.0 * std::atan(c.lambda);
  constexpr int kLevels = 24;
  constexpr std::uint32_t kFull = 1u << kLevels;
  const double chord_res = 2.0 * std::sin(resolution / 2.0);

  using Key = std::vector<std::uint32_t>;
  auto coord = [&](int dim, std::uint32_t k) {
    double f = static_cast<double>(k) / kFull;
    return dim < capdims ? -c.alpha + 2.0 * c.alpha * f : f;
  };
  auto source = [&](const Key& key) {
    Vec psi(capdims);
    for (int i = 0; i < capdims; ++i) psi(i) = coord(i, key[i]);
    double r = psi.norm();
    if (r > c.alpha) {
      psi *= c.alpha / r;
      r = c.alpha;
    }
    Vec w = c.center;
    if (r > 0.0) w = std::cos(r) * c.center + std::sin(r) * (tangent * (psi / r));
    w /= w.norm();
    double theta = theta0 * (1.0 - coord(capdims, key[capdims]));
    return from_polar(w, theta).xi;
  };

  std::map<Key, Vec> cache;
  auto image = [&](const Key& key) -> const Vec& {
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Vec y = map(source(key));
    return cache.emplace(key, y / y.norm()).first->second;
  };

  struct Cell {
    Key lo;
    Key size;
  };
  std::map<Key, char> emitted;
  std::vector<Cell> stack{{Key(d, 0), Key(d, kFull)}};
  const int ncorners = 1 << d;
  std::vector<Key> corners(ncorners, Key(d));
  std::vector<const Vec*> imgs(ncorners);

  while (!stack.empty()) {
    Cell cell = std::move(stack.back());
    stack.pop_back();

    if (capdims > 0) {
      double m2 = 0.0;
      for (int i = 0; i < capdims; ++i) {
        double a = coord(i, cell.lo[i]), b = coord(i, cell.lo[i] + cell.size[i]);
        double m = (a <= 0.0 && b >= 0.0) ? 0.0 : std::min(std::abs(a), std::abs(b));
        m2 += m * m;
      }
      if (std::sqrt(m2) > c.alpha * (1.0 + 1e-12)) continue;
    }

    for (int mask = 0; mask < ncorners; ++mask) {
      for (int i = 0; i < d; ++i) corners[mask][i] = cell.lo[i] + (((mask >> i) & 1) ? cell.size[i] : 0);
      imgs[mask] = &image(corners[mask]);
    }
    double diam = 0.0;
    std::vector<double> edge(d, 0.0);
    for (int a = 0; a < ncorners; ++a)
      for (int b = a + 1; b < ncorners; ++b) {
        double l = chord(*imgs[a], *imgs[b]);
        diam = std::max(diam, l);
        int diff = a ^ b;
        if ((diff & (diff - 1)) == 0) {
          int dim = 0;
          while (!((diff >> dim) & 1)) ++dim;
          edge[dim] = std::max(edge[dim], l);
        }
      }
    int split = -1;
    double best = -1.0;
    for (int i = 0; i < d; ++i)
      if (cell.size[i] > 1 && edge[i] > best) {
        best = edge[i];
        split = i;
      }
    if (diam <= chord_res || split < 0) {
      for (int mask = 0; mask < ncorners; ++mask) emitted.emplace(corners[mask], 1);
      if (emitted.size() > budget)
        throw std::length_error("sample_cone: more than " + std::to_string(budget) +
                                " points needed at resolution " + std::to_string(resolution) +
                                " (" + std::to_string(emitted.size()) + " emitted, " +
                                std::to_string(stack.size()) + " cells pending)");
      continue;
    }
    Cell hi = cell;
    cell.size[split] /= 2;
    hi.size[split] = cell.size[split];
    hi.lo[split] += cell.size[split];
    stack.push_back(std::move(hi));
    stack.push_back(std::move(cell));
  }

  SampledSet out;
  out.resolution = resolution;
  out.points.reserve(emitted.size());
  for (const auto& [key, _] : emitted) out.points.push_back(cache.at(key));
  return out;
}

SampledSet sample_cone(const Cone& c, double resolution, std::size_t budget) {
  return sample_cone_image(c, [](const Vec& xi) { return xi; }, resolution, budget);
}

SampledSet act_on_cone(const GroupElement& g, const Cone& c, double resolution, std::size_t budget) {
  if (g.mat() == Mat::Identity(g.mat().rows(), g.mat().cols())) return sample_cone(c, resolution, budget);
  return sample_cone_image(
      c, [&](const Vec& xi) { return act(g, SpherePoint{xi}).xi; }, resolution, budget);
}

SampledSet act_on_cone(const ParabolicElement& p, const Cone& c, double resolution, std::size_t budget) {
  return act_on_cone(parabolic_to_matrix(p), c, resolution, budget);
}

// ---------------------------------------------------------------- limits

const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::Finite: return "finite";
    case LimitKind::Infinity: return "infinity";
    case LimitKind::Zero: return "zero";
    case LimitKind::NonStabilizing: return "non-stabilizing";
  }
  return "?";
}

const char* to_string(ConeCase c) {
  return c == ConeCase::ShrinkToVertex ? "ShrinkToVertex" : "Renormalizable";
}

const char* to_string(HalflineVerdict v) {
  return v == HalflineVerdict::ConvergesToVertex ? "ConvergesToVertex" : "Inconclusive";
}

ScalarLimit tail_limit(const std::vector<double>& s, double rel_tol, double threshold) {
  if (s.size() < kTail) return {LimitKind::NonStabilizing, 0.0};
  std::vector<double> t(s.end() - kTail, s.end());
  const double last = t.back();
  if (std::all_of(t.begin(), t.end(), [](double x) { return std::isinf(x) && x > 0; }))
    return {LimitKind::Infinity, std::numeric_limits<double>::infinity()};
  if (std::all_of(t.begin(), t.end(), [](double x) { return std::isfinite(x); })) {
    auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    if (*hi - *lo <= rel_tol * std::max(1.0, std::abs(last))) return {LimitKind::Finite, last};
    bool inc = true, dec = true;
    for (int i = 1; i < kTail; ++i) {
      inc = inc && t[i] > t[i - 1];
      dec = dec && t[i] < t[i - 1];
    }
    if (inc && last >= threshold) return {LimitKind::Infinity, std::numeric_limits<double>::infinity()};
    if (dec && *lo > 0.0 && last <= 1.0 / threshold) return {LimitKind::Zero, 0.0};
  }
  return {LimitKind::NonStabilizing, last};
}

std::vector<double> dyadic_schedule(int max_exp) {
  std::vector<double> s;
  for (int e = 0; e <= max_exp; ++e) s.push_back(std::ldexp(1.0, e));
  return s;
}

std::vector<double> integer_schedule(int max_k) {
  std::vector<double> s;
  for (int k = 0; k <= max_k; ++k) s.push_back(k);
  return s;
}

// ---------------------------------------------------------------- classifier

SubBall avoiding_subcap(const Cone& c, const Vec& excluded, double delta) {
  Vec e = excluded / excluded.norm();
  const double d = angle_between(c.center, e);
  SubBall b;
  b.delta = delta;
  if (d >= c.alpha + delta) {
    b.center = c.center;
    b.alpha = c.alpha;
    b.full_cap = true;
    return b;
  }
  const double s = (c.alpha + delta - d) / 2.0;
  const double alpha2 = c.alpha - s;
  if (alpha2 < std::min(c.alpha, delta) / 2.0)
    throw std::domain_error("avoiding_subcap: margin adjustment failed (cap too close to the excluded direction)");
  Vec away = -(e - e.dot(c.center) * c.center);
  Vec tau = away.norm() > 1e-12 ? Vec(away / away.norm()) : deterministic_perpendicular(c.center);
  b.center = std::cos(s) * c.center + std::sin(s) * tau;
  b.center /= b.center.norm();
  b.alpha = alpha2;
  b.full_cap = false;
  return b;
}

namespace {

// Smallest alpha0 > 1/lambda such that for alpha >= alpha0 the start directions
// (b alpha w + u)/|.| of the image half-lines stay delta away from -w.
double solve_alpha0(const SubBall& sub, const Vec& u, double b, double lambda, double delta) {
  const int n = static_cast<int>(u.size());
  std::vector<Vec> dirs{sub.center};
  Eigen::HouseholderQR<Mat> qr(sub.center);
  Mat Q = qr.householderQ();
  for (int i = 1; i < n; ++i)
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      Vec w = std::cos(sub.alpha) * sub.center + sgn * std::sin(sub.alpha) * Q.col(i);
      dirs.push_back(w / w.norm());
    }
  auto holds = [&](double alpha) {
    for (double a = alpha; a <= alpha * std::ldexp(1.0, 40); a *= 2.0)
      for (const Vec& w : dirs) {
        Vec start = b * a * w + u;
        if (start.norm() == 0.0 || angle_between(start, Vec(-w)) < delta * (1.0 - 1e-9)) return false;
      }
    return true;
  };
  double lo = 1.0 / lambda;
  double hi = lo;
  int guard = 0;
  while (!holds(hi)) {
    hi *= 2.0;
    if (++guard > 60) throw std::domain_error("classify_sequence: no alpha0 satisfies the margin");
  }
  if (hi > lo) {
    for (int it = 0; it < 60; ++it) {
      double mid = std::sqrt(lo * hi);
      if (holds(mid)) hi = mid;
      else lo = mid;
    }
  }
  return std::max(hi, (1.0 / lambda) * (1.0 + 1e-3));
}

}  // namespace

ConeLimitVerdict classify_sequence(const ParabolicSequence& seq, const Cone& c, const ClassifyOptions& opt) {
  c.validate();
  if (seq.schedule.size() < kTail) throw std::invalid_argument("classify_sequence: schedule too short");
  std::vector<double> lam, mu, ratio, norms;
  std::vector<Vec> uprime, vs;
  std::vector<Mat> As;
  for (double k : seq.schedule) {
    ParabolicElement p = seq.generator(k);
    p.validate();
    if (p.n() != c.n()) throw std::invalid_argument("classify_sequence: dimension mismatch");
    const double m = p.v.norm();
    lam.push_back(p.lambda);
    mu.push_back(m);
    ratio.push_back(m > 0.0 ? p.lambda / m : std::numeric_limits<double>::infinity());
    uprime.push_back(m > 0.0 ? Vec(p.A.transpose() * p.v / m) : Vec::Zero(p.n()));
    vs.push_back(p.v);
    As.push_back(p.A);
    norms.push_back(max_abs(parabolic_to_matrix(p).mat()));
  }
  bool grows = norms.back() >= opt.divergence_threshold;
  for (std::size_t i = norms.size() - kTail + 1; i < norms.size(); ++i) grows = grows && norms[i] >= norms[i - 1];
  if (!grows) throw std::domain_error("classify_sequence: non-divergent sequence");

  auto vdist = [](const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); };
  auto mdist = [](const Mat& a, const Mat& b) { return max_abs(a - b); };

  ConeLimitVerdict out;
  Vec u_lim, v_lim;
  Mat A_lim;
  bool u_ok, v_ok, A_ok;
  if (seq.limits) {
    out.lambda = seq.limits->lambda;
    out.mu = seq.limits->mu;
    out.ratio = seq.limits->ratio;
    u_lim = seq.limits->u;
    v_lim = seq.limits->v;
    A_lim = seq.limits->A;
    u_ok = u_lim.size() == c.n();
    v_ok = v_lim.size() == c.n();
    A_ok = A_lim.rows() == c.n();
  } else {
    out.lambda = tail_limit(lam, opt.rel_tol, opt.divergence_threshold);
    out.mu = tail_limit(mu, opt.rel_tol, opt.divergence_threshold);
    out.ratio = tail_limit(ratio, opt.rel_tol, opt.divergence_threshold);
    u_ok = tail_stable(uprime, opt.rel_tol, vdist);
    v_ok = tail_stable(vs, opt.rel_tol * std::max(1.0, vs.back().norm()), vdist);
    A_ok = tail_stable(As, opt.rel_tol, mdist);
    u_lim = uprime.back();
    v_lim = vs.back();
    A_lim = As.back();
  }
  const char* subseq = "limits do not stabilize along the schedule; pass a subsequence or assert limits";

  const bool mu_bounded = out.mu.kind == LimitKind::Finite || out.mu.kind == LimitKind::Zero;
  if (mu_bounded) {
    if (out.lambda.kind == LimitKind::Infinity) {
      out.kind = ConeCase::ShrinkToVertex;
      out.branch = "mu -> a < inf, lambda -> inf";
      SubBall b;
      b.center = c.center;
      b.alpha = c.alpha;
      b.lambda = c.lambda;
      b.alpha0 = std::numeric_limits<double>::quiet_NaN();
      b.delta = opt.delta;
      b.full_cap = true;
      out.subball = b;
      return out;
    }
    if (out.lambda.kind == LimitKind::Zero) {
      if (!v_ok || !A_ok) throw std::domain_error(std::string("classify_sequence: ") + subseq);
      out.kind = ConeCase::Renormalizable;
      out.branch = "mu -> a < inf, lambda -> 0";
      Renormalization r;
      r.eps = lam;
      for (const Vec& v : vs) r.l_translation.push_back(-v);
      r.l_limit = -v_lim;
      r.A_limit = A_lim;
      r.limit_cone = Cone{A_lim * c.center, c.alpha, 1.0};
      r.limit_cone.center /= r.limit_cone.center.norm();
      out.renorm = r;
      return out;
    }
    if (out.lambda.kind == LimitKind::Finite)
      throw std::domain_error("classify_sequence: non-divergent sequence (lambda and mu bounded)");
    throw std::domain_error(std::string("classify_sequence: ") + subseq);
  }
  if (out.mu.kind != LimitKind::Infinity) throw std::domain_error(std::string("classify_sequence: ") + subseq);
  if (!u_ok) throw std::domain_error(std::string("classify_sequence: ") + subseq);
  if (out.ratio.kind == LimitKind::NonStabilizing) throw std::domain_error(std::string("classify_sequence: ") + subseq);

  out.u_limit = u_lim / u_lim.norm();
  out.kind = ConeCase::ShrinkToVertex;
  SubBall b = avoiding_subcap(c, -out.u_limit, opt.delta);
  if (out.ratio.kind == LimitKind::Infinity) {
    out.branch = "mu -> inf, lambda/mu -> inf";
    b.lambda = c.lambda;
    b.alpha0 = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double bval = out.ratio.kind == LimitKind::Zero ? 0.0 : out.ratio.value;
    out.branch = "mu -> inf, lambda/mu -> b < inf";
    b.alpha0 = solve_alpha0(b, out.u_limit, bval, c.lambda, opt.delta);
    b.lambda = 1.0 / (2.0 * b.alpha0);
  }
  out.subball = b;
  return out;
}

VerifyReport verify_verdict(const ParabolicSequence& seq, const Cone& c, const ConeLimitVerdict& verdict,
                            std::size_t K, double resolution, double tolerance) {
  if (K >= seq.schedule.size()) throw std::invalid_argument("verify_verdict: K beyond the schedule");
  VerifyReport rep;
  rep.kind = verdict.kind;
  const SampledSet vertex{{basepoint(c.n()).xi}, resolution};

  if (verdict.kind == ConeCase::ShrinkToVertex) {
    if (!verdict.subball) throw std::invalid_argument("verify_verdict: missing subball");
    const SubBall& b = *verdict.subball;
    Cone sub{b.center, b.alpha, b.lambda};
    for (std::size_t i = 0; i <= K; ++i) {
      ParabolicElement p = seq.at(i);
      SampledSet img = act_on_cone(p, sub, resolution);
      VerifyRow row;
      row.k = seq.schedule[i];
      row.residual = directed_hausdorff(img, vertex);
      row.predicted = radius_to_angle(min_image_radius(p, sub.center, sub.alpha, 1.0 / sub.lambda));
      row.tol = row.predicted + 2.0 * resolution;
      row.samples = img.size();
      rep.rows.push_back(row);
    }
    rep.decreasing = true;
    const std::size_t from = rep.rows.size() >= kTail ? rep.rows.size() - kTail : 0;
    for (std::size_t i = from + 1; i < rep.rows.size(); ++i)
      rep.decreasing = rep.decreasing && rep.rows[i].residual <= rep.rows[i - 1].residual + 1e-12;
  } else {
    if (!verdict.renorm) throw std::invalid_argument("verify_verdict: missing renormalization");
    const Renormalization& r = *verdict.renorm;
    SampledSet limit = sample_cone(r.limit_cone, resolution);
    for (std::size_t i = 0; i <= K; ++i) {
      ParabolicElement p = seq.at(i);
      ParabolicElement l{1.0, Mat::Identity(c.n(), c.n()), r.l_translation.at(i)};
      Cone src{c.center, c.alpha, r.eps.at(i)};
      SampledSet img = act_on_cone(l * p, src, resolution);
      VerifyRow row;
      row.k = seq.schedule[i];
      row.residual = hausdorff(img, limit);
      row.predicted = max_rotation_angle(p.A, r.A_limit);
      row.tol = row.predicted + 2.0 * resolution;
      row.samples = img.size();
      rep.rows.push_back(row);
    }
    rep.decreasing = true;
  }
  rep.final_residual = rep.rows.back().residual;
  rep.final_tol = std::min(rep.rows.back().tol, tolerance);
  bool consistent = true;
  for (const VerifyRow& row : rep.rows) consistent = consistent && row.residual <= row.tol + 1e-12;
  rep.passed = consistent && rep.decreasing && rep.final_residual < rep.final_tol;
  if (!consistent) rep.failure = "oracle residual exceeds the predicted bound plus sampling slack";
  else if (!rep.decreasing) rep.failure = "residual does not decrease along the schedule tail";
  else if (!rep.passed) rep.failure = "final residual above tolerance";
  return rep;
}

// ---------------------------------------------------------------- half-lines

double halfline_sup_distance(const Vec& x, const Vec& u) {
  const Vec uu = u / u.norm();
  const double scale = std::max(1.0, x.norm());
  double best = 0.0;
  auto probe = [&](double s) {
    Vec y = x + s * uu;
    best = std::max(best, angle_from_basepoint(chart_inv(y)));
  };
  for (int j = 0; j <= 4096; ++j) probe(scale * j / 512.0);
  for (int m = 4; m <= 60; ++m) probe(scale * std::ldexp(1.0, m));
  return best;
}

HalflineReport halfline_limit(const std::function<Vec(double)>& x, const std::function<Vec(double)>& u,
                              const std::vector<double>& schedule, double delta) {
  if (schedule.size() < kTail) throw std::invalid_argument("halfline_limit: schedule too short");
  std::vector<double> norms;
  std::vector<Vec> vdir, udir;
  HalflineReport rep;
  for (double k : schedule) {
    Vec xk = x(k), uk = u(k);
    if (!(uk.norm() > 0.0)) throw std::invalid_argument("halfline_limit: zero direction");
    norms.push_back(xk.norm());
    vdir.push_back(xk.norm() > 0.0 ? Vec(xk / xk.norm()) : Vec::Zero(xk.size()));
    udir.push_back(uk / uk.norm());
    rep.oracle_sup.push_back(halfline_sup_distance(xk, uk));
  }
  if (tail_limit(norms).kind != LimitKind::Infinity)
    throw std::domain_error("halfline_limit: x_k does not tend to infinity along the schedule");
  auto vdist = [](const Vec& a, const Vec& b) { return (a - b).cwiseAbs().maxCoeff(); };
  if (!tail_stable(vdir, 1e-6, vdist) || !tail_stable(udir, 1e-6, vdist))
    throw std::domain_error("halfline_limit: directions do not stabilize; pass a subsequence");
  rep.v_limit = vdir.back();
  rep.u_limit = udir.back();
  rep.separation = angle_between(rep.v_limit, Vec(-rep.u_limit));
  rep.verdict = rep.separation > delta ? HalflineVerdict::ConvergesToVertex : HalflineVerdict::Inconclusive;
  return rep;
}

}  // namespace confmax
