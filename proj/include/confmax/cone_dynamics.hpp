#pragma once

#include "confmax/liegroup.hpp"
#include "confmax/sphere_model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace confmax {

// Chart description: { t w : |w| = 1, angle(w, center) <= alpha, t >= 1/lambda } plus o.
struct Cone {
  Vec center;
  double alpha = 0.5;
  double lambda = 1.0;

  int n() const { return static_cast<int>(center.size()); }
  void validate() const;
};

bool cone_membership(const Cone& c, const SpherePoint& p, double tol = 1e-9);

// Adaptive sampler of the image of a cone under a sphere map. The parameter
// box (cap coordinates x polar angle) is bisected until the images of every
// cell's corners lie within `resolution` of each other.
SampledSet sample_cone_image(const Cone& c, const std::function<Vec(const Vec&)>& map,
                             double resolution, std::size_t budget = 4'000'000);
SampledSet sample_cone(const Cone& c, double resolution, std::size_t budget = 4'000'000);
SampledSet act_on_cone(const GroupElement& g, const Cone& c, double resolution,
                       std::size_t budget = 4'000'000);
SampledSet act_on_cone(const ParabolicElement& p, const Cone& c, double resolution,
                       std::size_t budget = 4'000'000);

enum class LimitKind { Finite, Infinity, Zero, NonStabilizing };
const char* to_string(LimitKind k);

struct ScalarLimit {
  LimitKind kind = LimitKind::NonStabilizing;
  double value = 0.0;
};

// Tail stabilization over the last four samples.
ScalarLimit tail_limit(const std::vector<double>& samples, double rel_tol = 1e-6,
                       double divergence_threshold = 1e3);

std::vector<double> dyadic_schedule(int max_exp);   // 2^0 .. 2^max_exp
std::vector<double> integer_schedule(int max_k);    // 0 .. max_k

struct AssertedLimits {
  ScalarLimit lambda;
  ScalarLimit mu;
  ScalarLimit ratio;  // lambda / mu
  Vec u;              // limit of A_k^{-1} v_k / |v_k|
  Mat A;
  Vec v;              // limit of v_k when mu has a finite limit
};

struct ParabolicSequence {
  std::function<ParabolicElement(double)> generator;
  std::vector<double> schedule;
  std::string description;
  std::optional<AssertedLimits> limits;

  ParabolicElement at(std::size_t i) const { return generator(schedule.at(i)); }
};

enum class ConeCase { ShrinkToVertex, Renormalizable };
const char* to_string(ConeCase c);

struct SubBall {
  Vec center;
  double alpha = 0.0;
  double lambda = 0.0;
  double alpha0 = 0.0;  // NaN when the scale is inherited from the input cone
  double delta = 0.0;
  bool full_cap = true;
};

struct Renormalization {
  std::vector<double> eps;                // eps_k = lambda_k
  std::vector<Vec> l_translation;         // l_k = translation by these vectors
  Vec l_limit;
  Cone limit_cone;
  Mat A_limit;
};

struct ConeLimitVerdict {
  ConeCase kind = ConeCase::ShrinkToVertex;
  std::string branch;  // which part of the case analysis fired
  std::optional<SubBall> subball;
  std::optional<Renormalization> renorm;
  ScalarLimit lambda, mu, ratio;
  Vec u_limit;
};

struct ClassifyOptions {
  double delta = 0.1;
  double rel_tol = 1e-6;
  double divergence_threshold = 1e3;
};

ConeLimitVerdict classify_sequence(const ParabolicSequence& seq, const Cone& c,
                                   const ClassifyOptions& opt = {});

// Closed cap inside c, avoiding `excluded` by at least delta. Throws when the
// margin cannot be met with alpha' >= min(alpha, delta) / 2.
SubBall avoiding_subcap(const Cone& c, const Vec& excluded, double delta);

struct VerifyRow {
  double k = 0.0;
  double residual = 0.0;
  double predicted = 0.0;
  double tol = 0.0;
  std::size_t samples = 0;
};

struct VerifyReport {
  ConeCase kind = ConeCase::ShrinkToVertex;
  std::vector<VerifyRow> rows;
  bool decreasing = false;
  bool passed = false;
  double final_residual = 0.0;
  double final_tol = 0.0;
  std::string failure;
};

// K is a position in seq.schedule (rows 0..K are produced).
VerifyReport verify_verdict(const ParabolicSequence& seq, const Cone& c,
                            const ConeLimitVerdict& verdict, std::size_t K, double resolution,
                            double tolerance = 0.05);

enum class HalflineVerdict { ConvergesToVertex, Inconclusive };
const char* to_string(HalflineVerdict v);

struct HalflineReport {
  HalflineVerdict verdict = HalflineVerdict::Inconclusive;
  Vec v_limit;
  Vec u_limit;
  double separation = 0.0;  // angle between v_limit and -u_limit
  std::vector<double> oracle_sup;  // sup distance to o along the schedule
};

// Half-lines {x_k + s u_k : s >= 0}.
HalflineReport halfline_limit(const std::function<Vec(double)>& x,
                              const std::function<Vec(double)>& u,
                              const std::vector<double>& schedule, double delta = 0.1);

// Brute-force sup of the distance to o over a sampled half-line.
double halfline_sup_distance(const Vec& x, const Vec& u);

}  // namespace confmax
