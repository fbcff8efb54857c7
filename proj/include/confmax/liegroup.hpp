#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace confmax {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

// Quadratic form diag(-1, 1, ..., 1) on R^{n+2}.
struct LorentzForm {
  int n;
  Mat J;
  explicit LorentzForm(int n);
};

Mat lorentz_J(int n);

struct LorentzCheck {
  bool ok;
  double residual;  // max |(m^T J m - J)_ij|
  double scaled;    // residual / max(1, max|m_ij|^2)
};

// Norms are max-abs-entry. The decision uses the scaled residual so that
// long products (entries ~1e10) are not rejected for roundoff alone.
LorentzCheck lorentz_check(const Mat& m, double tol = 1e-10);

double max_abs(const Mat& m);

// Flip the sign so that the first nonzero entry of row 0 is >= 0.
Mat canonicalize(Mat m);

class GroupElement {
 public:
  GroupElement() = default;

  // Validated entry point for external data. Violations below 1e-6 (scaled)
  // get one Newton step on g^T J g = J, larger ones throw.
  static GroupElement from_matrix(const Mat& m);
  // Caller guarantees membership; only the sign is canonicalized.
  static GroupElement trusted(Mat m);
  static GroupElement identity(int n);

  int n() const { return static_cast<int>(m_.rows()) - 2; }
  const Mat& mat() const { return m_; }

  GroupElement operator*(const GroupElement& o) const;
  GroupElement inverse() const;  // J g^T J

 private:
  explicit GroupElement(Mat m) : m_(std::move(m)) {}
  Mat m_;
};

// Graded Lie algebra o(1,n+1) = n+ (+) R (+) o(n) (+) n-.
// n- are the chart translations (inside the stabilizer of o), n+ is the
// transverse abelian part, R the chart dilations, o(n) chart rotations.
class AlgebraElement {
 public:
  AlgebraElement() = default;
  static AlgebraElement from_matrix(const Mat& X, double tol = 1e-10);
  static AlgebraElement from_parts(const Vec& plus, double scal, const Mat& rot,
                                   const Vec& minus);
  static AlgebraElement from_coords(int n, const Vec& c);

  int n() const { return static_cast<int>(m_.rows()) - 2; }
  const Mat& mat() const { return m_; }

  Vec plus() const;
  double scal() const;
  Mat rot() const;
  Vec minus() const;
  // Coordinates in the orthonormal basis returned by algebra_basis().
  Vec coords() const;
  // Max entry of the difference between mat() and the reassembled grading.
  double grading_residual() const;

  bool pure_plus() const;
  bool pure_minus() const;

  AlgebraElement operator+(const AlgebraElement& o) const;
  AlgebraElement operator*(double s) const;

 private:
  explicit AlgebraElement(Mat m) : m_(std::move(m)) {}
  Mat m_;
};

int algebra_dim(int n);
// X_1..X_m in graded order (n+, R, o(n) with i<j, n-), unit Frobenius norm.
std::vector<Mat> algebra_basis(int n);
Mat bracket(const Mat& X, const Mat& Y);

// Lightcone change of basis (a, m, b) = (x0 - x_{n+1}, x_1..x_n, x0 + x_{n+1}).
Mat lightcone_T(int n);
Mat lightcone_Tinv(int n);

GroupElement exp_algebra(const AlgebraElement& X);
// Principal matrix logarithm of a group element near the identity component.
AlgebraElement log_group(const GroupElement& g);

// Matrix of Ad(g) in the basis X_1..X_m.
Mat adjoint(const GroupElement& g);

// x -> lambda A x + v on the chart with o at infinity.
struct ParabolicElement {
  double lambda = 1.0;
  Mat A;
  Vec v;

  static ParabolicElement identity(int n);
  int n() const { return static_cast<int>(v.size()); }
  void validate() const;
  Vec apply(const Vec& x) const { return lambda * (A * x) + v; }
  ParabolicElement operator*(const ParabolicElement& o) const;
  ParabolicElement inverse() const;
};

GroupElement parabolic_to_matrix(const ParabolicElement& p);
// Reads back (lambda, A, v); throws if g does not fix o (tolerance scaled).
ParabolicElement parabolic_from_matrix(const GroupElement& g, double tol = 1e-9);
// Residual of g o = c o, normalized; zero iff g lies in P.
double parabolic_residual(const GroupElement& g);

// One-parameter boost; on the chart it is x -> e^t x.
GroupElement boost(int n, double t);
// Block diag(1, R) with R in O(n+1).
GroupElement compact_element(const Mat& R);

struct KAKDecomposition {
  GroupElement k1;
  double t = 0.0;
  GroupElement k2;
  bool degenerate = false;
  double residual = 0.0;  // max|k1 a(t) k2 - g| / max(1, max|g|)
};

// K is diag(1, O(n+1)), a(t) = boost(n, t), t >= 0.
// Convention: k2 = diag(1, R(v)) where v is the unit direction of the
// e^t-eigenvector of the symmetric polar factor and R(v) v = e_{n+1}
// (reflection based, continuous away from v = -e_{n+1} resp. v = e_{n+1}
// depending on the hemisphere of v). k1 = k k2^T with k the polar factor.
KAKDecomposition kak(const GroupElement& g, double degenerate_tol = 1e-9);

Mat random_orthogonal(int d, Rng& rng);
// Lorentz Gram-Schmidt of a matrix with entries uniform in [-scale, scale].
GroupElement random_group_element(int n, Rng& rng, double scale = 10.0);
ParabolicElement random_parabolic(int n, Rng& rng, double log_lambda_range = 1.0,
                                  double v_range = 1.0);
AlgebraElement random_algebra(int n, Rng& rng, double range = 1.0);
AlgebraElement random_plus(int n, Rng& rng, double range = 1.0);

}  // namespace confmax
