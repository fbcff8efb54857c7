#include "confmax/cartan_metric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace confmax {

namespace {

double seg_length(const GroupElement& a, const GroupElement& b) {
  return log_group(a.inverse() * b).coords().norm();
}

// Frobenius norm bounds the spectral radius, so this is a sufficient test.
bool cheap_in_region(const GroupElement& a, const GroupElement& b) {
  Mat D = (a.inverse() * b).mat();
  D -= Mat::Identity(D.rows(), D.cols());
  return D.norm() < kLogRegion;
}

GroupElement exp_coords(int n, const Vec& c) { return exp_algebra(AlgebraElement::from_coords(n, c)); }

DistanceEstimate run_optimizer(const GroupElement& g, const GroupElement& h, const DistanceOptions& opt) {
  const int n = g.n();
  const int m = algebra_dim(n);
  DistanceEstimate est;
  AlgebraElement Y = log_group(g.inverse() * h);
  est.chord = Y.coords().norm();
  est.length = est.chord;

  int N = 1;
  while (transition_radius(GroupElement::identity(n), exp_algebra(Y * (1.0 / N))) >= kLogRegion) {
    N *= 2;
    if (N > (1 << 20)) throw std::domain_error("approx_distance: cannot subdivide into the log region");
  }
  est.presubdivision = N;
  std::vector<GroupElement> nodes;
  for (int j = 0; j <= N; ++j) nodes.push_back(j == N ? h : g * exp_algebra(Y * (static_cast<double>(j) / N)));
  if (opt.budget <= 0 || est.chord == 0.0) {
    est.path.nodes = std::move(nodes);
    return est;
  }

  std::vector<double> seg(nodes.size() - 1);
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) seg[j] = seg_length(nodes[j], nodes[j + 1]);
  auto total = [&] {
    double t = 0.0;
    for (double s : seg) t += s;
    return t;
  };

  est.path.nodes = nodes;
  for (int round = 0; round < opt.budget; ++round) {
    if (2 * nodes.size() - 1 <= opt.max_nodes) {
      std::vector<GroupElement> refined;
      std::vector<double> rseg;
      for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        refined.push_back(nodes[j]);
        AlgebraElement Z = log_group(nodes[j].inverse() * nodes[j + 1]);
        GroupElement mid = nodes[j] * exp_algebra(Z * 0.5);
        refined.push_back(mid);
        rseg.push_back(seg_length(nodes[j], mid));
        rseg.push_back(seg_length(mid, nodes[j + 1]));
      }
      refined.push_back(nodes.back());
      nodes = std::move(refined);
      seg = std::move(rseg);
    }
    const double step = 0.25 * est.chord / static_cast<double>(nodes.size() - 1) * std::pow(0.6, round);
    std::vector<GroupElement> moves;
    for (int i = 0; i < m; ++i)
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        Vec c = Vec::Zero(m);
        c(i) = sgn * step;
        moves.push_back(exp_coords(n, c));
      }
    for (std::size_t j = 1; j + 1 < nodes.size(); ++j) {
      for (const GroupElement& mv : moves) {
        GroupElement cand = nodes[j] * mv;
        if (!cheap_in_region(nodes[j - 1], cand) || !cheap_in_region(cand, nodes[j + 1])) continue;
        double a = seg_length(nodes[j - 1], cand), b = seg_length(cand, nodes[j + 1]);
        if (a + b < seg[j - 1] + seg[j]) {
          nodes[j] = cand;
          seg[j - 1] = a;
          seg[j] = b;
        }
      }
    }
    // Keep the best path seen, so the bound is non-increasing in the budget.
    const double t = total();
    if (t < est.length) {
      est.length = t;
      est.path.nodes = nodes;
    }
  }
  return est;
}

}  // namespace

Mat FrameMetric::gram_at(const GroupElement& g) const {
  const int m = algebra_dim(n);
  std::vector<Mat> B = algebra_basis(n);
  Mat C(m, m);
  Mat gi = g.inverse().mat();
  for (int i = 0; i < m; ++i) {
    Mat tangent = g.mat() * B[i];
    C.col(i) = AlgebraElement::from_matrix(gi * tangent, 1e-8).coords();
  }
  return C.transpose() * C;
}

double transition_radius(const GroupElement& g, const GroupElement& h) {
  Mat D = (g.inverse() * h).mat();
  D -= Mat::Identity(D.rows(), D.cols());
  Eigen::EigenSolver<Mat> es(D, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void GroupPath::validate() const {
  if (nodes.empty()) throw std::invalid_argument("GroupPath: no nodes");
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j)
    if (transition_radius(nodes[j], nodes[j + 1]) >= kLogRegion)
      throw std::domain_error("GroupPath: transition " + std::to_string(j) + " outside the log region");
}

double path_length(const GroupPath& p) {
  p.validate();
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < p.nodes.size(); ++j) total += seg_length(p.nodes[j], p.nodes[j + 1]);
  return total;
}

DistanceEstimate approx_distance(const GroupElement& g, const GroupElement& h, const DistanceOptions& opt) {
  DistanceEstimate fwd = run_optimizer(g, h, opt);
  DistanceEstimate bwd = run_optimizer(h, g, opt);
  if (bwd.length < fwd.length) {
    std::reverse(bwd.path.nodes.begin(), bwd.path.nodes.end());
    bwd.chord = fwd.chord;
    return bwd;
  }
  return fwd;
}

JacobianCheck right_jacobian_check(const GroupElement& p, const GroupElement& g, double step) {
  const int n = p.n();
  const int m = algebra_dim(n);
  JacobianCheck out;
  out.analytic = adjoint(p.inverse());
  out.numeric = Mat(m, m);
  const GroupElement base_inv = (g * p).inverse();
  for (int i = 0; i < m; ++i) {
    Vec c = Vec::Zero(m);
    c(i) = step;
    Vec fwd = log_group(base_inv * g * exp_coords(n, c) * p).coords();
    Vec bwd = log_group(base_inv * g * exp_coords(n, Vec(-c)) * p).coords();
    out.numeric.col(i) = (fwd - bwd) / (2.0 * step);
  }
  out.residual = max_abs(out.numeric - out.analytic);
  return out;
}

JacobianCheck right_jacobian_check(const GroupElement& p, double step) {
  return right_jacobian_check(p, GroupElement::identity(p.n()), step);
}

Bilipschitz bilipschitz_of_right_action(const GroupElement& p) {
  Eigen::JacobiSVD<Mat> svd(adjoint(p.inverse()));
  const Vec& s = svd.singularValues();
  return {s.minCoeff(), s.maxCoeff()};
}

const char* to_string(CauchyFixture f) {
  return f == CauchyFixture::SphereMinusPoint ? "sphere-minus-point" : "sphere-minus-two-points";
}

std::vector<SpherePoint> deleted_points(CauchyFixture f, int n) {
  std::vector<SpherePoint> out{basepoint(n)};
  if (f == CauchyFixture::SphereMinusTwoPoints) out.push_back(antipode(n));
  return out;
}

const char* to_string(CauchyVerdict v) { return v == CauchyVerdict::Equivalent ? "Equivalent" : "Inequivalent"; }

GroupPath cauchy_tail(const GroupElement& q, const AlgebraElement& Y, int j0, int j1) {
  if (Y.plus().norm() == 0.0) throw std::invalid_argument("cauchy_tail: Y needs a nonzero n+ part");
  GroupPath p;
  for (int j = j0; j <= j1; ++j) p.nodes.push_back(q * exp_algebra(Y * std::ldexp(1.0, -j)));
  return p;
}

CauchyReport cauchy_probe(CauchyFixture fixture, const GroupPath& seq1, const GroupPath& seq2,
                          const CauchyOptions& opt) {
  if (seq1.nodes.size() != seq2.nodes.size() || seq1.nodes.size() < 4)
    throw std::invalid_argument("cauchy_probe: tails must have equal length >= 4");
  const int n = seq1.nodes.front().n();
  const std::vector<SpherePoint> deleted = deleted_points(fixture, n);
  const SpherePoint o = basepoint(n);
  for (const GroupPath* s : {&seq1, &seq2}) {
    double d = M_PI;
    for (const SpherePoint& x : deleted) d = std::min(d, round_distance(act(s->nodes.back(), o), x));
    if (!(d < opt.boundary_tol)) throw std::domain_error("cauchy_probe: tail does not approach the deleted set");
  }
  CauchyReport rep;
  rep.coset = seq1.nodes.back().inverse() * seq2.nodes.back();
  rep.coset_residual = round_distance(act(rep.coset, o), o);
  if (!(rep.coset_residual < opt.coset_tol)) {
    rep.reason = "no P-coset relates the limits (tails reach different deleted fibers)";
    return rep;
  }
  for (std::size_t j = 0; j < seq1.nodes.size(); ++j)
    rep.distances.push_back(approx_distance(seq1.nodes[j] * rep.coset, seq2.nodes[j]).length);
  rep.distances_decrease = true;
  for (std::size_t j = rep.distances.size() - 3; j < rep.distances.size(); ++j)
    rep.distances_decrease = rep.distances_decrease && rep.distances[j] <= rep.distances[j - 1];
  if (rep.distances_decrease && rep.distances.back() < opt.distance_threshold) {
    rep.verdict = CauchyVerdict::Equivalent;
    rep.reason = "same deleted fiber; matched tail distances tend to zero after right translation";
  } else {
    rep.reason = "coset found but tail distances do not tend below the threshold";
  }
  return rep;
}

NormalityGate normality_gate_codim(int codimension) {
  NormalityGate g;
  g.codimension = codimension;
  g.normal = codimension > 1;
  g.rationale = "deleted set has codimension " + std::to_string(codimension) +
                (g.normal ? " > 1 in the bundle: intrinsic and extrinsic distances are comparable near it"
                          : " <= 1: the intrinsic/extrinsic shortcut is refused");
  return g;
}

NormalityGate normality_gate(CauchyFixture f, int n) {
  // A fiber over a point is a coset of P; dim G - dim P = n.
  NormalityGate g = normality_gate_codim(n);
  g.rationale = std::string(to_string(f)) + ": fiber over a deleted point is a P-coset, " + g.rationale;
  return g;
}

}  // namespace confmax
