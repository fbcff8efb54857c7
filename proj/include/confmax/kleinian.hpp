#pragma once

#include "confmax/liegroup.hpp"
#include "confmax/sphere_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace confmax {

struct GroupPresentation {
  std::vector<GroupElement> generators;
  std::vector<std::string> labels;

  int n() const;
  void validate(double dedup_tol = 1e-8) const;
  // [g1, g1^-1, g2, g2^-1, ...]
  std::vector<GroupElement> letters() const;
};

struct WordBallOptions {
  double dedup_tol = 1e-8;
  std::size_t budget = 2'000'000;
};

struct WordBall {
  std::vector<GroupElement> elements;  // BFS order, identity first
  std::vector<int> lengths;
  std::size_t collisions = 0;  // products that matched an earlier element
};

WordBall word_ball(const GroupPresentation& G, int L, const WordBallOptions& opt = {});

// Boost of length t in the plane (e0, e_dir) with dir a unit vector of R^n;
// fixes e_{n+1}, so it preserves the hemisphere {xi_{n+1} < 0}.
GroupElement hyperbolic_boost(int n, const Vec& dir, double t);

enum class LimitMethod { OrbitAccumulation, LoxodromicFixedPoints };
const char* to_string(LimitMethod m);

struct LimitSetOptions {
  double cutoff = 8.0;   // hyperbolic distance from e0 for orbit points
  double t_min = 0.1;    // translation length threshold for loxodromics
  WordBallOptions words;
};

struct LimitSetApprox {
  std::vector<Vec> points;  // unit vectors of R^{n+1} with last coordinate 0
  LimitMethod method = LimitMethod::OrbitAccumulation;
  int depth = 0;
  std::vector<std::string> warnings;

  bool empty() const { return points.empty(); }
  SampledSet as_sampled(double resolution) const;
};

// Requires every generator to fix e_{n+1} (hemisphere model).
bool preserves_hemisphere(const GroupPresentation& G, double tol = 1e-9);
LimitSetApprox limit_set(const GroupPresentation& G, int depth, LimitMethod method,
                         const LimitSetOptions& opt = {});

// Attracting fixed point on the equator of a loxodromic element of the
// hemisphere-preserving subgroup; empty when not loxodromic.
std::optional<Vec> attracting_fixed_point(const GroupElement& g, double t_min = 0.1);

// Max over points of one set of the distance to the nearest other point of
// the same set: the sampling scale of an approximation.
double sampling_radius(const std::vector<Vec>& pts);

struct MethodAgreement {
  double hausdorff = 0.0;
  double radius_orbit = 0.0;
  double radius_fixed = 0.0;
  bool agree = false;
};
MethodAgreement compare_methods(const GroupPresentation& G, int depth, const LimitSetOptions& opt = {});

struct DensityReport {
  bool dense = false;
  double epsilon = 0.0;
  double grid_spacing = 0.0;
  std::size_t grid_points = 0;
  double gap_radius = 0.0;   // largest empty cap radius found on the grid
  double gap = 0.0;          // its angular diameter
  Vec witness;               // center of that cap
};

// Boundary sphere of dimension n-1 embedded in R^{n+1} (last coordinate 0).
DensityReport density_report(const LimitSetApprox& lim, int n, double epsilon);

enum class DomainFixture { Hemisphere, SphereMinusPoint, SphereMinusSphere };
const char* to_string(DomainFixture f);
DomainFixture parse_fixture(const std::string& s);

enum class Maximality { Maximal, MaximalAtResolution, NotMaximal };
const char* to_string(Maximality m);

struct MaximalityReport {
  Maximality verdict = Maximality::NotMaximal;
  DomainFixture fixture = DomainFixture::Hemisphere;
  std::string qualifier;
  std::string reason;
  std::optional<DensityReport> density;
  std::size_t limit_points = 0;
};

// For SphereMinusSphere, the deleted sphere is the great circle in the plane of
// the last two coordinates of R^{n+1}.
MaximalityReport maximality_verdict(const GroupPresentation& G, DomainFixture fixture, double epsilon,
                                    int depth, const LimitSetOptions& opt = {});

struct SimpleDivergence {
  bool simple = false;
  std::string reason;
  std::vector<double> t;
  std::vector<double> reconstruction;  // KAK residual per index
  std::optional<GroupElement> l1, l2;
  Vec p_plus, p_minus;
};

// Sequence given by a generator over a schedule; throws on bounded sequences.
SimpleDivergence simple_divergence(const std::function<GroupElement(double)>& seq,
                                   const std::vector<double>& schedule, double stab_tol = 1e-6);

// Linear functional w -> <w, u_x>_{q^{1,n}} on R^{1,n}; u_x is the lift of x
// with positive first coordinate, so lifts of Omega with w_0 > 0 pair negative.
struct SigmaHyperplane {
  Vec u;
  double eval(const Vec& w) const;
  // Side on the double cover: true when w lies on the side containing e0.
  bool omega_side(const Vec& w) const { return eval(w) < 0.0; }
};
Vec canonical_projective(const Vec& w);
SigmaHyperplane sigma_hyperplane(const Vec& x, double tol = 1e-9);

struct PropernessReport {
  bool free_ok = true;
  bool proper_ok = true;
  std::size_t words = 0;
  double min_displacement = 0.0;  // over non-identity words and sample points
  Vec fixed_witness;
  std::size_t hits_depth = 0;      // pairs (word, i, j) with d(g xi_i, xi_j) < eps
  std::size_t hits_previous = 0;   // same at depth - 1
  std::string qualifier;
};

PropernessReport properness_probe(const GroupPresentation& G, const SampledSet& sample, int depth,
                                  double eps = 0.05, double fix_tol = 1e-9);

}  // namespace confmax
