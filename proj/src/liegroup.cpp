#include "confmax/liegroup.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>
#include <string>

namespace confmax {

namespace {

constexpr double kRepairLimit = 1e-6;

// Frobenius norms of the unnormalized graded generators.
const double kPlusNorm = 2.0;
const double kMinusNorm = 2.0;
const double kScalNorm = std::sqrt(2.0);
const double kRotNorm = std::sqrt(2.0);

void require_square(const Mat& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 3)
    throw std::invalid_argument(std::string(what) + ": expected (n+2)x(n+2) matrix with n >= 1");
}

Mat to_lightcone(const Mat& X) {
  const int n = static_cast<int>(X.rows()) - 2;
  return lightcone_T(n) * X * lightcone_Tinv(n);
}

Mat from_lightcone(const Mat& X) {
  const int n = static_cast<int>(X.rows()) - 2;
  return lightcone_Tinv(n) * X * lightcone_T(n);
}

Mat reflector_to_last(const Vec& v) {
  const int d = static_cast<int>(v.size());
  Vec e = Vec::Zero(d);
  e(d - 1) = 1.0;
  Mat I = Mat::Identity(d, d);
  if (v(d - 1) >= 0.0) {
    Vec w = v + e;
    Mat H = I - 2.0 * w * w.transpose() / w.squaredNorm();
    Mat D = I;
    D(d - 1, d - 1) = -1.0;
    return D * H;
  }
  Vec w = v - e;
  return I - 2.0 * w * w.transpose() / w.squaredNorm();
}

Mat orthogonal_polar(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace

LorentzForm::LorentzForm(int n_) : n(n_), J(lorentz_J(n_)) {}

Mat lorentz_J(int n) {
  if (n < 1) throw std::invalid_argument("lorentz_J: n must be >= 1");
  Mat J = Mat::Identity(n + 2, n + 2);
  J(0, 0) = -1.0;
  return J;
}

double max_abs(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

LorentzCheck lorentz_check(const Mat& m, double tol) {
  require_square(m, "lorentz_check");
  const int n = static_cast<int>(m.rows()) - 2;
  Mat J = lorentz_J(n);
  double r = max_abs(m.transpose() * J * m - J);
  double s = r / std::max(1.0, max_abs(m) * max_abs(m));
  return {s < tol, r, s};
}

Mat canonicalize(Mat m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m(0, j) != 0.0) {
      if (m(0, j) < 0.0) m = -m;
      break;
    }
  }
  return m;
}

GroupElement GroupElement::from_matrix(const Mat& m) {
  LorentzCheck c = lorentz_check(m);
  if (c.ok) return GroupElement(canonicalize(m));
  if (c.scaled >= kRepairLimit)
    throw std::invalid_argument("GroupElement: Lorentz violation " + std::to_string(c.scaled) +
                                " exceeds repair limit");
  const int n = static_cast<int>(m.rows()) - 2;
  Mat J = lorentz_J(n);
  Mat E = m.transpose() * J * m - J;
  Mat fixed = m * (Mat::Identity(n + 2, n + 2) - 0.5 * J * E);
  return GroupElement(canonicalize(std::move(fixed)));
}

GroupElement GroupElement::trusted(Mat m) { return GroupElement(canonicalize(std::move(m))); }

GroupElement GroupElement::identity(int n) { return GroupElement(Mat::Identity(n + 2, n + 2)); }

GroupElement GroupElement::operator*(const GroupElement& o) const {
  if (m_.rows() != o.m_.rows()) throw std::invalid_argument("GroupElement: dimension mismatch");
  return GroupElement(canonicalize(m_ * o.m_));
}

GroupElement GroupElement::inverse() const {
  Mat J = lorentz_J(n());
  return GroupElement(canonicalize(J * m_.transpose() * J));
}

// ---------------------------------------------------------------- algebra

Mat lightcone_T(int n) {
  const int N = n + 2;
  Mat T = Mat::Zero(N, N);
  T(0, 0) = 1.0;
  T(0, N - 1) = -1.0;
  for (int i = 1; i <= n; ++i) T(i, i) = 1.0;
  T(N - 1, 0) = 1.0;
  T(N - 1, N - 1) = 1.0;
  return T;
}

Mat lightcone_Tinv(int n) {
  const int N = n + 2;
  Mat Ti = Mat::Zero(N, N);
  Ti(0, 0) = 0.5;
  Ti(0, N - 1) = 0.5;
  for (int i = 1; i <= n; ++i) Ti(i, i) = 1.0;
  Ti(N - 1, 0) = -0.5;
  Ti(N - 1, N - 1) = 0.5;
  return Ti;
}

AlgebraElement AlgebraElement::from_matrix(const Mat& X, double tol) {
  require_square(X, "AlgebraElement");
  const int n = static_cast<int>(X.rows()) - 2;
  Mat J = lorentz_J(n);
  double r = max_abs(X.transpose() * J + J * X);
  if (r > tol * std::max(1.0, max_abs(X)))
    throw std::invalid_argument("AlgebraElement: matrix is not in o(1,n+1), residual " +
                                std::to_string(r));
  return AlgebraElement(X);
}

AlgebraElement AlgebraElement::from_parts(const Vec& plus, double scal, const Mat& rot,
                                          const Vec& minus) {
  const int n = static_cast<int>(plus.size());
  if (n < 1 || minus.size() != n || rot.rows() != n || rot.cols() != n)
    throw std::invalid_argument("AlgebraElement::from_parts: inconsistent sizes");
  if (max_abs(rot + rot.transpose()) > 1e-12 * std::max(1.0, max_abs(rot)))
    throw std::invalid_argument("AlgebraElement::from_parts: rotation part is not skew");
  const int N = n + 2;
  Mat L = Mat::Zero(N, N);
  L(0, 0) = -scal;
  L(N - 1, N - 1) = scal;
  for (int i = 0; i < n; ++i) {
    L(0, 1 + i) = 2.0 * plus(i);
    L(1 + i, N - 1) = plus(i);
    L(1 + i, 0) = minus(i);
    L(N - 1, 1 + i) = 2.0 * minus(i);
    for (int j = 0; j < n; ++j) L(1 + i, 1 + j) = rot(i, j);
  }
  return AlgebraElement(from_lightcone(L));
}

AlgebraElement AlgebraElement::from_coords(int n, const Vec& c) {
  if (c.size() != algebra_dim(n))
    throw std::invalid_argument("AlgebraElement::from_coords: wrong coordinate count");
  Vec plus(n), minus(n);
  Mat rot = Mat::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i) plus(i) = c(k++) / kPlusNorm;
  double scal = c(k++) / kScalNorm;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      rot(i, j) = c(k) / kRotNorm;
      rot(j, i) = -c(k) / kRotNorm;
      ++k;
    }
  for (int i = 0; i < n; ++i) minus(i) = c(k++) / kMinusNorm;
  return from_parts(plus, scal, rot, minus);
}

Vec AlgebraElement::plus() const {
  Mat L = to_lightcone(m_);
  const int N = static_cast<int>(m_.rows());
  return L.block(1, N - 1, N - 2, 1);
}

double AlgebraElement::scal() const {
  Mat L = to_lightcone(m_);
  const int N = static_cast<int>(m_.rows());
  return L(N - 1, N - 1);
}

Mat AlgebraElement::rot() const {
  Mat L = to_lightcone(m_);
  const int N = static_cast<int>(m_.rows());
  return L.block(1, 1, N - 2, N - 2);
}

Vec AlgebraElement::minus() const {
  Mat L = to_lightcone(m_);
  const int N = static_cast<int>(m_.rows());
  return L.block(1, 0, N - 2, 1);
}

Vec AlgebraElement::coords() const {
  const int n = this->n();
  const int N = n + 2;
  Mat L = to_lightcone(m_);
  Vec c(algebra_dim(n));
  int k = 0;
  for (int i = 0; i < n; ++i) c(k++) = L(1 + i, N - 1) * kPlusNorm;
  c(k++) = L(N - 1, N - 1) * kScalNorm;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c(k++) = L(1 + i, 1 + j) * kRotNorm;
  for (int i = 0; i < n; ++i) c(k++) = L(1 + i, 0) * kMinusNorm;
  return c;
}

double AlgebraElement::grading_residual() const {
  Mat R = rot();
  Mat skew = 0.5 * (R - R.transpose());
  return max_abs(from_parts(plus(), scal(), skew, minus()).mat() - m_);
}

bool AlgebraElement::pure_plus() const {
  const double tol = 1e-14 * std::max(1.0, max_abs(m_));
  return std::abs(scal()) <= tol && max_abs(rot()) <= tol && max_abs(minus()) <= tol;
}

bool AlgebraElement::pure_minus() const {
  const double tol = 1e-14 * std::max(1.0, max_abs(m_));
  return std::abs(scal()) <= tol && max_abs(rot()) <= tol && max_abs(plus()) <= tol;
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const {
  return AlgebraElement(m_ + o.m_);
}

AlgebraElement AlgebraElement::operator*(double s) const { return AlgebraElement(m_ * s); }

int algebra_dim(int n) { return (n + 2) * (n + 1) / 2; }

std::vector<Mat> algebra_basis(int n) {
  const int m = algebra_dim(n);
  std::vector<Mat> out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    Vec c = Vec::Zero(m);
    c(i) = 1.0;
    out.push_back(AlgebraElement::from_coords(n, c).mat());
  }
  return out;
}

Mat bracket(const Mat& X, const Mat& Y) { return X * Y - Y * X; }

GroupElement exp_algebra(const AlgebraElement& X) {
  const Mat& M = X.mat();
  const int N = static_cast<int>(M.rows());
  if (X.pure_plus() || X.pure_minus()) {
    // Nilpotent of order 3.
    Mat E = Mat::Identity(N, N) + M + 0.5 * (M * M);
    return GroupElement::trusted(std::move(E));
  }
  Mat E = M.exp();
  return GroupElement::trusted(std::move(E));
}

AlgebraElement log_group(const GroupElement& g) {
  const int n = g.n();
  Mat L = g.mat().log();
  if (!L.allFinite()) throw std::domain_error("log_group: logarithm undefined");
  Mat J = lorentz_J(n);
  Mat P = 0.5 * (L - J * L.transpose() * J);
  return AlgebraElement::from_matrix(P, 1e-6);
}

Mat adjoint(const GroupElement& g) {
  const int n = g.n();
  const int m = algebra_dim(n);
  Mat gi = g.inverse().mat();
  std::vector<Mat> B = algebra_basis(n);
  Mat Ad(m, m);
  for (int i = 0; i < m; ++i) {
    Mat Y = g.mat() * B[i] * gi;
    Ad.col(i) = AlgebraElement::from_matrix(Y, 1e-6).coords();
  }
  return Ad;
}

// ---------------------------------------------------------------- parabolic

ParabolicElement ParabolicElement::identity(int n) {
  return {1.0, Mat::Identity(n, n), Vec::Zero(n)};
}

void ParabolicElement::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("ParabolicElement: lambda must be positive and finite");
  if (A.rows() != v.size() || A.cols() != v.size() || v.size() < 1)
    throw std::invalid_argument("ParabolicElement: inconsistent sizes");
  if (max_abs(A.transpose() * A - Mat::Identity(A.rows(), A.cols())) >= 1e-10)
    throw std::invalid_argument("ParabolicElement: A is not orthogonal");
  if (!v.allFinite()) throw std::invalid_argument("ParabolicElement: v not finite");
}

ParabolicElement ParabolicElement::operator*(const ParabolicElement& o) const {
  return {lambda * o.lambda, A * o.A, lambda * (A * o.v) + v};
}

ParabolicElement ParabolicElement::inverse() const {
  Mat At = A.transpose();
  return {1.0 / lambda, At, -(At * v) / lambda};
}

GroupElement parabolic_to_matrix(const ParabolicElement& p) {
  p.validate();
  const int n = p.n();
  const int N = n + 2;
  Mat M = Mat::Zero(N, N);
  M(0, 0) = 1.0 / p.lambda;
  M.block(1, 0, n, 1) = p.v / p.lambda;
  M.block(1, 1, n, n) = p.A;
  M(N - 1, 0) = p.v.squaredNorm() / p.lambda;
  M.block(N - 1, 1, 1, n) = 2.0 * p.v.transpose() * p.A;
  M(N - 1, N - 1) = p.lambda;
  return GroupElement::trusted(from_lightcone(M));
}

double parabolic_residual(const GroupElement& g) {
  Mat M = to_lightcone(g.mat());
  const int N = static_cast<int>(M.rows());
  double off = M.col(N - 1).head(N - 1).norm();
  return off / std::abs(M(N - 1, N - 1));
}

ParabolicElement parabolic_from_matrix(const GroupElement& g, double tol) {
  Mat M = to_lightcone(g.mat());
  const int N = static_cast<int>(M.rows());
  const int n = N - 2;
  double off = M.col(N - 1).head(N - 1).norm() / std::abs(M(N - 1, N - 1));
  if (!(off < tol)) throw std::invalid_argument("parabolic_from_matrix: element does not fix o");
  const double c = M(N - 1, N - 1) > 0.0 ? 1.0 : -1.0;
  ParabolicElement p;
  p.lambda = c * M(N - 1, N - 1);
  p.A = c * M.block(1, 1, n, n);
  p.v = c * M.block(1, 0, n, 1) * p.lambda;
  return p;
}

GroupElement boost(int n, double t) {
  const int N = n + 2;
  Mat B = Mat::Identity(N, N);
  B(0, 0) = std::cosh(t);
  B(N - 1, N - 1) = std::cosh(t);
  B(0, N - 1) = std::sinh(t);
  B(N - 1, 0) = std::sinh(t);
  return GroupElement::trusted(std::move(B));
}

GroupElement compact_element(const Mat& R) {
  const int d = static_cast<int>(R.rows());
  if (R.cols() != d || max_abs(R.transpose() * R - Mat::Identity(d, d)) > 1e-10)
    throw std::invalid_argument("compact_element: R must be orthogonal");
  Mat K = Mat::Zero(d + 1, d + 1);
  K(0, 0) = 1.0;
  K.block(1, 1, d, d) = R;
  return GroupElement::trusted(std::move(K));
}

KAKDecomposition kak(const GroupElement& g, double degenerate_tol) {
  LorentzCheck c = lorentz_check(g.mat(), 1e-8);
  if (!c.ok) throw std::invalid_argument("kak: input is not in O(1,n+1)");
  const Mat& G = g.mat();
  const int N = static_cast<int>(G.rows());
  const int n = N - 2;

  // The symmetric factor shares row 0 with g: (cosh t, sinh t v^T).
  Vec row = G.row(0).tail(N - 1).transpose();
  const double s = row.norm();
  KAKDecomposition out;
  out.t = std::asinh(s);
  out.degenerate = out.t < degenerate_tol;
  Mat K2 = Mat::Identity(N, N);
  if (s > 0.0) K2.block(1, 1, N - 1, N - 1) = reflector_to_last(row / s);
  out.k2 = GroupElement::trusted(K2);
  // Spatial block of g k2^T is R1 diag(1, .., 1, cosh t); its polar factor is
  // R1. Conditioning is cosh t here, against e^{2t} for the polar of g itself.
  Mat M = G.block(1, 1, N - 1, N - 1) * K2.block(1, 1, N - 1, N - 1).transpose();
  Mat K1 = Mat::Zero(N, N);
  K1(0, 0) = 1.0;
  K1.block(1, 1, N - 1, N - 1) = orthogonal_polar(M);
  out.k1 = GroupElement::trusted(K1);
  Mat rec = out.k1.mat() * boost(n, out.t).mat() * out.k2.mat();
  out.residual = max_abs(rec - G) / std::max(1.0, max_abs(G));
  return out;
}

// ---------------------------------------------------------------- random

Mat random_orthogonal(int d, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = nd(rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ();
  Mat Rr = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i)
    if (Rr(i, i) < 0.0) Q.col(i) = -Q.col(i);
  return Q;
}

GroupElement random_group_element(int n, Rng& rng, double scale) {
  const int N = n + 2;
  std::uniform_real_distribution<double> ud(-scale, scale);
  Mat J = lorentz_J(n);
  auto form = [&](const Vec& a, const Vec& b) { return a.dot(J * b); };
  for (;;) {
    Mat M(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) M(i, j) = ud(rng);
    Vec c0 = M.col(0);
    double q0 = form(c0, c0);
    if (q0 > -1e-3 * c0.squaredNorm()) continue;
    Mat G(N, N);
    G.col(0) = c0 / std::sqrt(-q0);
    bool ok = true;
    for (int i = 1; i < N && ok; ++i) {
      Vec c = M.col(i);
      for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < i; ++j) {
          double sign = j == 0 ? -1.0 : 1.0;
          c -= sign * form(c, G.col(j)) * G.col(j);
        }
      double q = form(c, c);
      if (q < 1e-6 * c.squaredNorm()) ok = false;
      else G.col(i) = c / std::sqrt(q);
    }
    if (!ok) continue;
    return GroupElement::from_matrix(G);
  }
}

ParabolicElement random_parabolic(int n, Rng& rng, double log_lambda_range, double v_range) {
  std::uniform_real_distribution<double> ul(-log_lambda_range, log_lambda_range);
  std::uniform_real_distribution<double> uv(-v_range, v_range);
  ParabolicElement p;
  p.lambda = std::exp(ul(rng));
  p.A = random_orthogonal(n, rng);
  p.v = Vec(n);
  for (int i = 0; i < n; ++i) p.v(i) = uv(rng);
  return p;
}

AlgebraElement random_algebra(int n, Rng& rng, double range) {
  std::uniform_real_distribution<double> ud(-range, range);
  Vec c(algebra_dim(n));
  for (int i = 0; i < c.size(); ++i) c(i) = ud(rng);
  return AlgebraElement::from_coords(n, c);
}

AlgebraElement random_plus(int n, Rng& rng, double range) {
  std::uniform_real_distribution<double> ud(-range, range);
  Vec u(n);
  for (int i = 0; i < n; ++i) u(i) = ud(rng);
  return AlgebraElement::from_parts(u, 0.0, Mat::Zero(n, n), Vec::Zero(n));
}

}  // namespace confmax
