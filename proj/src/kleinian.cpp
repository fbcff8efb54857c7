#include "confmax/kleinian.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace confmax {

namespace {

bool same_element(const Mat& a, const Mat& b, double tol) {
  return max_abs(a - b) < tol * std::max(1.0, max_abs(a));
}

Vec equator_point(const Vec& dir) {
  Vec xi = Vec::Zero(dir.size() + 1);
  xi.head(dir.size()) = dir / dir.norm();
  return xi;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

int GroupPresentation::n() const {
  if (generators.empty()) throw std::invalid_argument("GroupPresentation: no generators (dimension unknown)");
  return generators.front().n();
}

void GroupPresentation::validate(double dedup_tol) const {
  if (!labels.empty() && labels.size() != generators.size())
    throw std::invalid_argument("GroupPresentation: label count does not match generator count");
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const Mat& m = generators[i].mat();
    if (generators[i].n() != generators.front().n())
      throw std::invalid_argument("GroupPresentation: generators of mixed dimension");
    if (!lorentz_check(m).ok) throw std::invalid_argument("GroupPresentation: generator fails the Lorentz invariant");
    if (same_element(m, Mat::Identity(m.rows(), m.cols()), dedup_tol))
      throw std::invalid_argument("GroupPresentation: generator " + std::to_string(i) + " is the identity");
  }
}

std::vector<GroupElement> GroupPresentation::letters() const {
  std::vector<GroupElement> out;
  for (const GroupElement& g : generators) {
    out.push_back(g);
    out.push_back(g.inverse());
  }
  return out;
}

WordBall word_ball(const GroupPresentation& G, int L, const WordBallOptions& opt) {
  if (L < 0) throw std::invalid_argument("word_ball: L must be >= 0");
  G.validate(opt.dedup_tol);
  WordBall out;
  if (G.generators.empty()) throw std::invalid_argument("word_ball: presentation without generators");
  const std::vector<GroupElement> letters = G.letters();
  std::vector<int> last{-1};
  out.elements.push_back(GroupElement::identity(G.n()));
  out.lengths.push_back(0);
  std::multimap<double, std::size_t> index{{1.0, 0}};
  std::vector<std::size_t> frontier{0};

  for (int len = 1; len <= L; ++len) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier) {
      for (int a = 0; a < static_cast<int>(letters.size()); ++a) {
        if (last[idx] >= 0 && a == (last[idx] ^ 1)) continue;
        GroupElement cand = out.elements[idx] * letters[a];
        const Mat& m = cand.mat();
        const double scale = opt.dedup_tol * std::max(1.0, max_abs(m));
        bool dup = false;
        for (auto it = index.lower_bound(m(0, 0) - scale); it != index.end() && it->first <= m(0, 0) + scale; ++it)
          if (same_element(out.elements[it->second].mat(), m, opt.dedup_tol)) {
            dup = true;
            break;
          }
        if (dup) {
          ++out.collisions;
          continue;
        }
        if (out.elements.size() >= opt.budget)
          throw std::length_error("word_ball: element budget " + std::to_string(opt.budget) + " exceeded at length " +
                                  std::to_string(len));
        index.emplace(m(0, 0), out.elements.size());
        next.push_back(out.elements.size());
        out.elements.push_back(cand);
        out.lengths.push_back(len);
        last.push_back(a);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

GroupElement hyperbolic_boost(int n, const Vec& dir, double t) {
  if (dir.size() != n || !(dir.norm() > 0.0)) throw std::invalid_argument("hyperbolic_boost: bad direction");
  const Vec d = dir / dir.norm();
  Mat B = Mat::Identity(n + 2, n + 2);
  B(0, 0) = std::cosh(t);
  B.block(0, 1, 1, n) = std::sinh(t) * d.transpose();
  B.block(1, 0, n, 1) = std::sinh(t) * d;
  B.block(1, 1, n, n) += (std::cosh(t) - 1.0) * d * d.transpose();
  return GroupElement::trusted(std::move(B));
}

const char* to_string(LimitMethod m) {
  return m == LimitMethod::OrbitAccumulation ? "OrbitAccumulation" : "LoxodromicFixedPoints";
}

SampledSet LimitSetApprox::as_sampled(double resolution) const { return SampledSet{points, resolution}; }

bool preserves_hemisphere(const GroupPresentation& G, double tol) {
  for (const GroupElement& g : G.generators) {
    const Mat& m = g.mat();
    const int last = static_cast<int>(m.rows()) - 1;
    Vec col = m.col(last), row = m.row(last).transpose();
    col(last) -= 1.0;
    row(last) -= 1.0;
    if (col.cwiseAbs().maxCoeff() > tol || row.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

std::optional<Vec> attracting_fixed_point(const GroupElement& g, double t_min) {
  const int n = g.n();
  if (kak(g).t <= t_min) return std::nullopt;
  Mat B = g.mat().topLeftCorner(n + 1, n + 1);
  Eigen::EigenSolver<Mat> es(B);
  const auto& ev = es.eigenvalues();
  int best = -1;
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).imag()) > 1e-9 * std::abs(ev(i))) continue;
    if (best < 0 || std::abs(ev(i).real()) > std::abs(ev(best).real())) best = i;
  }
  if (best < 0 || std::abs(ev(best).real()) <= 1.0 + 1e-9) return std::nullopt;
  Vec v = es.eigenvectors().col(best).real();
  if (v(0) < 0.0) v = -v;
  if (!(v(0) > 0.0)) return std::nullopt;
  return equator_point(v.tail(n) / v(0));
}

LimitSetApprox limit_set(const GroupPresentation& G, int depth, LimitMethod method, const LimitSetOptions& opt) {
  LimitSetApprox out;
  out.method = method;
  out.depth = depth;
  if (G.generators.empty()) {
    out.warnings.push_back("trivial group: empty limit set");
    return out;
  }
  if (!preserves_hemisphere(G)) throw std::invalid_argument("limit_set: generators must fix e_{n+1} (hemisphere model)");
  const int n = G.n();
  WordBall ball = word_ball(G, depth, opt.words);
  std::multimap<double, std::size_t> by_first;
  for (const GroupElement& g : ball.elements) {
    if (method == LimitMethod::OrbitAccumulation) {
      Vec w = g.mat().col(0).head(n + 1);
      if (std::acosh(std::max(1.0, w(0))) > opt.cutoff) out.points.push_back(equator_point(w.tail(n)));
    } else if (auto p = attracting_fixed_point(g, opt.t_min)) {
      // Powers and repeats of a word share fixed points; keep the first copy.
      constexpr double kSame = 1e-9;
      bool seen = false;
      for (auto it = by_first.lower_bound((*p)(0) - kSame); it != by_first.end() && it->first <= (*p)(0) + kSame; ++it)
        if ((out.points[it->second] - *p).norm() < kSame) {
          seen = true;
          break;
        }
      if (!seen) {
        by_first.emplace((*p)(0), out.points.size());
        out.points.push_back(*p);
      }
    }
  }
  if (out.points.empty()) {
    bool any_lox = false;
    for (const GroupElement& g : G.generators) any_lox = any_lox || attracting_fixed_point(g, opt.t_min).has_value();
    out.warnings.push_back(any_lox ? "no points beyond the cutoff at this depth"
                                   : "no loxodromic generator (elliptic or parabolic only): empty limit set");
  }
  return out;
}

double sampling_radius(const std::vector<Vec>& pts) {
  if (pts.size() < 2) return 0.0;
  const Eigen::Index d = pts.front().size();
  Mat P(d, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) P.col(static_cast<Eigen::Index>(i)) = pts[i];
  double worst = 0.0;
  for (Eigen::Index i = 0; i < P.cols(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      if (j == i) continue;
      double c = (P.col(i) - P.col(j)).squaredNorm();
      if (c > 0.0) best = std::min(best, c);
    }
    if (std::isfinite(best)) worst = std::max(worst, 2.0 * std::asin(std::min(1.0, std::sqrt(best) / 2.0)));
  }
  return worst;
}

MethodAgreement compare_methods(const GroupPresentation& G, int depth, const LimitSetOptions& opt) {
  LimitSetApprox a = limit_set(G, depth, LimitMethod::OrbitAccumulation, opt);
  LimitSetApprox b = limit_set(G, depth, LimitMethod::LoxodromicFixedPoints, opt);
  MethodAgreement out;
  if (a.empty() || b.empty()) {
    out.agree = a.empty() == b.empty();
    return out;
  }
  out.hausdorff = hausdorff(a.as_sampled(0.0), b.as_sampled(0.0));
  out.radius_orbit = sampling_radius(a.points);
  out.radius_fixed = sampling_radius(b.points);
  out.agree = out.hausdorff <= 3.0 * std::max(out.radius_orbit, out.radius_fixed);
  return out;
}

DensityReport density_report(const LimitSetApprox& lim, int n, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("density_report: epsilon must be positive");
  DensityReport rep;
  rep.epsilon = epsilon;
  rep.grid_spacing = epsilon / 2.0;
  std::vector<Vec> grid = sphere_grid(n, rep.grid_spacing);
  rep.grid_points = grid.size();
  if (lim.empty()) {
    rep.gap_radius = M_PI;
    rep.gap = M_PI;
    rep.witness = equator_point(grid.front());
    return rep;
  }
  NearestIndex idx(lim.points);
  for (const Vec& g : grid) {
    Vec p = equator_point(g);
    double d = idx.distance(p);
    if (d > rep.gap_radius) {
      rep.gap_radius = d;
      rep.witness = p;
    }
  }
  if (rep.witness.size() == 0) rep.witness = equator_point(grid.front());
  rep.gap = std::min(M_PI, 2.0 * rep.gap_radius);
  rep.dense = rep.gap_radius <= epsilon;
  return rep;
}

const char* to_string(DomainFixture f) {
  switch (f) {
    case DomainFixture::Hemisphere: return "hemisphere";
    case DomainFixture::SphereMinusPoint: return "sphere-minus-point";
    case DomainFixture::SphereMinusSphere: return "sphere-minus-sphere";
  }
  return "?";
}

DomainFixture parse_fixture(const std::string& s) {
  if (s == "hemisphere") return DomainFixture::Hemisphere;
  if (s == "sphere-minus-point") return DomainFixture::SphereMinusPoint;
  if (s == "sphere-minus-sphere") return DomainFixture::SphereMinusSphere;
  throw std::invalid_argument("unknown domain fixture: " + s);
}

const char* to_string(Maximality m) {
  switch (m) {
    case Maximality::Maximal: return "Maximal";
    case Maximality::MaximalAtResolution: return "MaximalAtResolution";
    case Maximality::NotMaximal: return "NotMaximal";
  }
  return "?";
}

MaximalityReport maximality_verdict(const GroupPresentation& G, DomainFixture fixture, double epsilon, int depth,
                                    const LimitSetOptions& opt) {
  MaximalityReport rep;
  rep.fixture = fixture;
  rep.qualifier = "depth " + std::to_string(depth) + ", resolution " + fmt(epsilon) +
                  "; finite-word evidence, not a proof";
  const bool trivial = G.generators.empty();
  if (!trivial) G.validate();

  switch (fixture) {
    case DomainFixture::Hemisphere: {
      if (trivial) {
        rep.reason = "trivial group: empty limit set";
        DensityReport d;
        d.epsilon = epsilon;
        d.gap_radius = d.gap = M_PI;
        rep.density = d;
        return rep;
      }
      LimitSetApprox a = limit_set(G, depth, LimitMethod::OrbitAccumulation, opt);
      LimitSetApprox b = limit_set(G, depth, LimitMethod::LoxodromicFixedPoints, opt);
      a.points.insert(a.points.end(), b.points.begin(), b.points.end());
      rep.limit_points = a.points.size();
      DensityReport d = density_report(a, G.n(), epsilon);
      rep.density = d;
      rep.verdict = d.dense ? Maximality::MaximalAtResolution : Maximality::NotMaximal;
      rep.reason = d.dense ? "limit set is epsilon-dense in the boundary sphere"
                           : "limit set misses a cap of angular diameter " + fmt(d.gap);
      return rep;
    }
    case DomainFixture::SphereMinusPoint: {
      if (trivial) {
        rep.reason = "trivial group";
        return rep;
      }
      const SpherePoint o = basepoint(G.n());
      for (const GroupElement& g : G.generators)
        if (round_distance(act(g, o), o) > 1e-9)
          throw std::invalid_argument("maximality_verdict: generator does not fix the deleted point");
      rep.verdict = Maximality::Maximal;
      rep.reason = "nontrivial group fixing the deleted point";
      return rep;
    }
    case DomainFixture::SphereMinusSphere: {
      if (trivial) {
        rep.reason = "trivial group";
        return rep;
      }
      const int n = G.n();
      if (n < 2) throw std::invalid_argument("maximality_verdict: sphere-minus-sphere needs n >= 2");
      for (int s = 0; s < 64; ++s) {
        const double th = 2.0 * M_PI * s / 64.0;
        Vec xi = Vec::Zero(n + 1);
        xi(n - 1) = std::cos(th);
        xi(n) = std::sin(th);
        for (const GroupElement& g : G.generators)
          if (round_distance(act(g, SpherePoint{xi}).xi, xi) > 1e-9) {
            rep.reason = "a generator moves a point of the deleted sphere";
            return rep;
          }
      }
      rep.verdict = Maximality::Maximal;
      rep.reason = "nontrivial group fixing the deleted sphere pointwise";
      return rep;
    }
  }
  throw std::invalid_argument("maximality_verdict: unknown fixture");
}

SimpleDivergence simple_divergence(const std::function<GroupElement(double)>& seq,
                                   const std::vector<double>& schedule, double stab_tol) {
  if (schedule.size() < 4) throw std::invalid_argument("simple_divergence: schedule too short");
  SimpleDivergence out;
  std::vector<KAKDecomposition> parts;
  for (double k : schedule) {
    parts.push_back(kak(seq(k)));
    out.t.push_back(parts.back().t);
    out.reconstruction.push_back(parts.back().residual);
  }
  const std::size_t m = out.t.size();
  bool growing = out.t.back() >= 10.0;
  for (std::size_t i = m - 3; i < m; ++i) growing = growing && out.t[i] > out.t[i - 1];
  if (!growing) throw std::domain_error("simple_divergence: bounded sequence (translation length does not grow)");

  double var1 = 0.0, var2 = 0.0;
  for (std::size_t i = m - 4; i < m; ++i) {
    var1 = std::max(var1, max_abs(parts[i].k1.mat() - parts.back().k1.mat()));
    var2 = std::max(var2, max_abs(parts[i].k2.mat() - parts.back().k2.mat()));
  }
  if (var1 >= stab_tol || var2 >= stab_tol) {
    out.reason = "compact factors do not stabilize (variation " + fmt(std::max(var1, var2)) +
                 "); pass a subsequence";
    return out;
  }
  const int n = parts.back().k1.n();
  out.simple = true;
  out.l1 = parts.back().k1;
  out.l2 = parts.back().k2;
  out.p_plus = act(*out.l1, basepoint(n)).xi;
  out.p_minus = act(out.l2->inverse(), antipode(n)).xi;
  return out;
}

double SigmaHyperplane::eval(const Vec& w) const {
  return -w(0) * u(0) + w.tail(w.size() - 1).dot(u.tail(u.size() - 1));
}

Vec canonical_projective(const Vec& w) {
  const double r = w.norm();
  if (!(r > 0.0)) throw std::invalid_argument("canonical_projective: zero vector");
  Vec out = w / r;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (out(i) != 0.0) {
      if (out(i) < 0.0) out = -out;
      break;
    }
  return out;
}

SigmaHyperplane sigma_hyperplane(const Vec& x, double tol) {
  Vec u = canonical_projective(x);
  const double q = -u(0) * u(0) + u.tail(u.size() - 1).squaredNorm();
  if (std::abs(q) > tol) throw std::invalid_argument("sigma_hyperplane: point is not isotropic");
  if (u(0) < 0.0) u = -u;
  return SigmaHyperplane{u};
}

PropernessReport properness_probe(const GroupPresentation& G, const SampledSet& sample, int depth, double eps,
                                  double fix_tol) {
  sample.validate();
  PropernessReport rep;
  rep.qualifier = "at depth " + std::to_string(depth) + ": evidence, not proof";
  rep.min_displacement = M_PI;
  if (G.generators.empty()) {
    rep.words = 1;
    return rep;
  }
  WordBall ball = word_ball(G, depth);
  rep.words = ball.elements.size();
  for (std::size_t w = 0; w < ball.elements.size(); ++w) {
    if (ball.lengths[w] == 0) continue;
    for (const Vec& xi : sample.points) {
      Vec y = act(ball.elements[w], SpherePoint{xi}).xi;
      const double disp = round_distance(y, xi);
      if (disp < rep.min_displacement) {
        rep.min_displacement = disp;
        if (disp < fix_tol && rep.free_ok) {
          rep.free_ok = false;
          rep.fixed_witness = xi;
        }
      }
      for (const Vec& z : sample.points)
        if (round_distance(y, z) < eps) {
          ++rep.hits_depth;
          if (ball.lengths[w] < depth) ++rep.hits_previous;
        }
    }
  }
  rep.proper_ok = rep.hits_depth == rep.hits_previous;
  return rep;
}

}  // namespace confmax
