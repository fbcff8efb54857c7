#pragma once

#include "confmax/liegroup.hpp"
#include "confmax/sphere_model.hpp"

#include <string>
#include <vector>

namespace confmax {

// Left-invariant metric making the frame {g X_i} orthonormal.
struct FrameMetric {
  int n = 2;
  explicit FrameMetric(int n_) : n(n_) {}
  // Gram matrix of the frame at g, read back through left translation.
  Mat gram_at(const GroupElement& g) const;
  double norm(const AlgebraElement& X) const { return X.coords().norm(); }
};

struct GroupPath {
  std::vector<GroupElement> nodes;
  void validate() const;
};

// Spectral radius of g^-1 h - I.
double transition_radius(const GroupElement& g, const GroupElement& h);
constexpr double kLogRegion = 0.5;

double path_length(const GroupPath& p);

struct DistanceOptions {
  int budget = 0;             // optimization rounds
  std::size_t max_nodes = 33;
};

struct DistanceEstimate {
  double length = 0.0;        // upper bound on the distance
  double chord = 0.0;         // |log(g^-1 h)|
  GroupPath path;
  int presubdivision = 1;
};

DistanceEstimate approx_distance(const GroupElement& g, const GroupElement& h, const DistanceOptions& opt = {});

struct JacobianCheck {
  Mat analytic;
  Mat numeric;
  double residual = 0.0;
};

// Frame Jacobian of right multiplication by p at base point g.
JacobianCheck right_jacobian_check(const GroupElement& p, const GroupElement& g, double step = 1e-5);
JacobianCheck right_jacobian_check(const GroupElement& p, double step = 1e-5);

struct Bilipschitz {
  double c_min = 1.0;
  double c_max = 1.0;
};
Bilipschitz bilipschitz_of_right_action(const GroupElement& p);

enum class CauchyFixture { SphereMinusPoint, SphereMinusTwoPoints };
const char* to_string(CauchyFixture f);
// Deleted points on S^n: o, and additionally -o for the two-point fixture.
std::vector<SpherePoint> deleted_points(CauchyFixture f, int n);

enum class CauchyVerdict { Equivalent, Inequivalent };
const char* to_string(CauchyVerdict v);

struct CauchyReport {
  CauchyVerdict verdict = CauchyVerdict::Inequivalent;
  GroupElement coset;           // p = lim1^-1 lim2
  double coset_residual = 0.0;  // angle between p o and o
  std::vector<double> distances;  // upper bounds d(seq1_j p, seq2_j)
  bool distances_decrease = false;
  std::string reason;
};

struct CauchyOptions {
  double coset_tol = 1e-8;
  double distance_threshold = 1e-6;
  double boundary_tol = 1e-6;
};

CauchyReport cauchy_probe(CauchyFixture fixture, const GroupPath& seq1, const GroupPath& seq2,
                          const CauchyOptions& opt = {});

// q exp(2^-j Y) for j = j0..j1; Y needs a nonzero n+ part.
GroupPath cauchy_tail(const GroupElement& q, const AlgebraElement& Y, int j0 = 20, int j1 = 40);

struct NormalityGate {
  int codimension = 0;
  bool normal = false;
  std::string rationale;
};
NormalityGate normality_gate(CauchyFixture f, int n);
NormalityGate normality_gate_codim(int codimension);

}  // namespace confmax
