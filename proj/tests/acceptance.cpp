// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned here.
#include "confmax/kleinian.hpp"
#include "confmax/liegroup.hpp"
#include "confmax/normal_domains.hpp"
#include "confmax/scenario.hpp"
#include "confmax/sphere_model.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace confmax;

namespace {

constexpr double kJacobianTol = 1e-6;
constexpr double kJacobianSeconds = 10.0;
constexpr double kConeTol = 0.05;
constexpr double kConeResolution = 0.01;
constexpr double kConeSeconds = 120.0;
constexpr double kRadiusLawTol = 1e-10;
constexpr double kNilpotentZero = 1e-15;
constexpr double kNilpotentExpTol = 1e-12;
constexpr double kKakTol = 1e-9;
constexpr double kSimpleTol = 1e-8;
constexpr double kMaximalitySeconds = 60.0;
constexpr double kSchottkySeparation = 0.693;  // pi/2 - 4 atan(e^{-3/2})
constexpr double kNormalSeconds = 120.0;
constexpr double kPinnedLo = 2.79, kPinnedHi = 2.84;
constexpr double kProductTol = 1e-8;
constexpr double kCosetTol = 1e-8;
constexpr double kCauchySeconds = 60.0;

std::map<std::string, Json> g_reports;

Json load(const std::string& name) {
  std::ifstream f(std::string(CONFMAX_CONFIG_DIR) + "/" + name + ".json");
  if (!f) throw std::runtime_error("missing config " + name);
  return Json::parse(f);
}

struct Timed {
  ScenarioResult res;
  double seconds = 0.0;
};

Timed run(const std::string& name) {
  const auto t0 = std::chrono::steady_clock::now();
  Timed t{run_scenario(load(name)), 0.0};
  t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  g_reports[name] = t.res.report;
  return t;
}

std::string failures(const Json& r) { return r.at("failures").dump(); }

int g_failed = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main() {
  // 1. Frame Jacobian of right translation against Ad(p^-1).
  guarded(1, [] {
    Timed t = run("jacobian_check");
    double worst = 0.0;
    bool dims_ok = true;
    const Json& dims = t.res.report.at("results").at("dimensions");
    for (const Json& d : dims) {
      worst = std::max(worst, d.at("max_residual").get<double>());
      dims_ok = dims_ok && d.at("samples") == 100;
    }
    const bool ok = t.res.exit_code == 0 && dims.size() == 2 && dims_ok && worst < kJacobianTol &&
                    t.seconds < kJacobianSeconds;
    report(1, ok, fmt("n=2,3 x100 max residual %.3g (< 1e-6), %.2f s", worst, t.seconds));
  });

  // 2. Cone classifier verified by brute-force Hausdorff at K = 2^12.
  guarded(2, [] {
    Timed t = run("cone_dynamics");
    const Json& res = t.res.report.at("results");
    double worst = 0.0;
    bool pinned = res.at("resolution") == kConeResolution && res.at("tolerance") == kConeTol;
    std::size_t count = 0;
    for (const Json& f : res.at("fixtures")) {
      ++count;
      pinned = pinned && f.at("schedule").at("last") == 4096.0;
      if (f.contains("verification")) worst = std::max(worst, f.at("verification").at("final_residual").get<double>());
      else pinned = false;
    }
    const bool ok = t.res.exit_code == 0 && pinned && count >= 5 && worst < kConeTol && t.seconds < kConeSeconds;
    report(2, ok,
           fmt("%.0f fixtures, worst final residual %.3g rad (< 0.05), %.1f s", double(count), worst, t.seconds) +
               (t.res.exit_code ? " failures " + failures(t.res.report) : ""));
  });

  // 3. Inversion radius law.
  guarded(3, [] {
    Rng rng(3);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> lr(-3.0, 3.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      Vec u(2 + i % 3);
      for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = nd(rng);
      u *= std::exp(lr(rng)) / u.norm();
      worst = std::max(worst, std::abs(s_plus(u).norm() * u.norm() - 1.0));
    }
    report(3, worst < kRadiusLawTol, fmt("1000 samples, max | |s(u)| |u| - 1 | = %.3g", worst));
  });

  // 4. exp on n+ is a quadratic polynomial.
  guarded(4, [] {
    Rng rng(4);
    double cube = 0.0, diff = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int n = 2 + i % 3;
      AlgebraElement X = random_plus(n, rng, 2.0);
      const Mat& M = X.mat();
      cube = std::max(cube, max_abs(M * M * M));
      Mat poly = Mat::Identity(n + 2, n + 2) + M + 0.5 * M * M;
      diff = std::max(diff, max_abs(exp_algebra(X).mat() - poly));
    }
    report(4, cube <= kNilpotentZero && diff < kNilpotentExpTol,
           fmt("100 samples, max|X^3| = %.3g, max|exp X - (I+X+X^2/2)| = %.3g", cube, diff));
  });

  // 5. KAK reconstruction and simple divergence.
  guarded(5, [] {
    Rng rng(5);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) worst = std::max(worst, kak(random_group_element(2 + i % 3, rng)).residual);
    Timed t = run("simple_divergence");
    double lerr = 0.0, recon = 0.0;
    bool verdicts = true;
    for (const Json& s : t.res.report.at("results").at("sequences")) {
      recon = std::max(recon, s.at("reconstruction_residual").get<double>());
      for (const char* key : {"l1_error", "l2_error"})
        if (s.contains(key)) lerr = std::max(lerr, s.at(key).get<double>());
      if (s.at("name") != "alternating-rotation") verdicts = verdicts && s.at("simple") == true && s.contains("l1_error");
    }
    const bool ok = worst < kKakTol && recon < kKakTol && lerr < kSimpleTol && verdicts && t.res.exit_code == 0;
    report(5, ok, fmt("1000 random KAK max residual %.3g; sequence reconstruction %.3g; l1/l2 error %.3g", worst,
                      recon, lerr));
  });

  // 6. Maximality verdicts.
  guarded(6, [] {
    Timed a = run("maximality_translation");
    Timed b = run("maximality_schottky");
    Timed c = run("maximality_circle");
    const Json& rb = b.res.report.at("results");
    const double gap = rb.contains("density") ? rb.at("density").at("gap").get<double>() : 0.0;
    const bool ok = a.res.exit_code == 0 && b.res.exit_code == 0 && c.res.exit_code == 0 &&
                    a.res.report.at("results").at("verdict") == "Maximal" && rb.at("verdict") == "NotMaximal" &&
                    c.res.report.at("results").at("verdict") == "Maximal" && gap >= kSchottkySeparation &&
                    a.seconds + b.seconds + c.seconds < kMaximalitySeconds;
    report(6, ok, fmt("translation Maximal, Schottky NotMaximal gap %.4f (>= 0.693), circle Maximal; %.2f s", gap,
                      a.seconds + b.seconds + c.seconds));
  });

  // 7. Normal-domain bi-Lipschitz bounds.
  guarded(7, [] {
    Timed t = run("normal_domains");
    const Json& res = t.res.report.at("results");
    bool ok = t.res.exit_code == 0 && res.at("h") == 0.01 && t.seconds < kNormalSeconds;
    double pinned = 0.0;
    std::string detail;
    for (const Json& f : res.at("fixtures")) {
      const Json& r = f.at("ratios");
      ok = ok && r.at("worst_ratio").get<double>() <= r.at("bound").get<double>() && r.at("unreachable") == 0;
      detail += f.at("name").get<std::string>() + " " + fmt("%.4f/%.4f ", r.at("worst_ratio").get<double>(),
                                                             r.at("bound").get<double>());
      if (f.contains("pinned") && !f.at("pinned").empty()) pinned = f.at("pinned")[0].at("intrinsic").get<double>();
    }
    ok = ok && pinned >= kPinnedLo && pinned <= kPinnedHi;
    report(7, ok, detail + fmt("pinned %.5f in [2.79, 2.84], %.1f s", pinned, t.seconds));
  });

  // 8. Linear paths minimize product length.
  guarded(8, [] {
    Vec y1 = Vec::Zero(1), y2 = Vec::Constant(1, 4.0);
    const double L = 3.0;
    const int N = 257;
    std::vector<Vec> lin;
    for (int i = 0; i < N; ++i) lin.push_back(y1 + (double(i) / (N - 1)) * (y2 - y1));
    ProductLength pl = product_min_length(L, y1, y2, lin);
    const double err = std::abs(pl.length - 5.0);
    Rng rng(8);
    std::normal_distribution<double> nd(0.0, 0.5);
    int exceed = 0;
    for (int r = 0; r < 100; ++r) {
      std::vector<Vec> b = lin;
      const double c1 = nd(rng), c2 = nd(rng), c3 = nd(rng);
      for (int i = 1; i + 1 < N; ++i) {
        const double s = double(i) / (N - 1);
        b[i](0) += c1 * std::sin(M_PI * s) + c2 * std::sin(2 * M_PI * s) + c3 * std::sin(5 * M_PI * s);
      }
      exceed += product_min_length(L, y1, y2, b).length > 5.0;
    }
    report(8, err < kProductTol && exceed == 100,
           fmt("linear length error %.3g; %.0f of 100 perturbed paths exceed 5", err, double(exceed)));
  });

  // 9. Cauchy-boundary probe.
  guarded(9, [] {
    Timed t = run("cauchy_probe");
    bool ok = t.res.exit_code == 0 && t.seconds < kCauchySeconds;
    int eq = 0, ineq = 0;
    double worst = 0.0;
    for (const Json& p : t.res.report.at("results").at("probes")) {
      for (const Json& row : p.at("pairs")) {
        if (p.at("mode") == "same-fiber" && p.at("fixture") == "sphere-minus-point") {
          eq += row.at("verdict") == "Equivalent";
          worst = std::max(worst, row.at("coset_residual").get<double>());
        }
        if (p.at("mode") == "cross-fiber") ineq += row.at("verdict") == "Inequivalent";
      }
    }
    ok = ok && eq == 10 && ineq >= 10 && worst < kCosetTol;
    report(9, ok, fmt("%.0f/10 Equivalent (coset residual %.3g), %.0f cross-fiber Inequivalent", double(eq), worst,
                      double(ineq)) +
                      fmt(", %.2f s", t.seconds));
  });

  // 10. Determinism: rerun every scenario and compare reports.
  guarded(10, [] {
    const std::vector<std::string> all{"jacobian_check",         "cone_dynamics",     "limit_set_schottky",
                                       "maximality_translation", "maximality_schottky", "maximality_circle",
                                       "simple_divergence",      "cauchy_probe",      "normal_domains"};
    std::string mismatched;
    for (const std::string& name : all) {
      if (!g_reports.count(name)) run(name);
      const std::string first = report_fingerprint(g_reports.at(name));
      const std::string second = report_fingerprint(run_scenario(load(name)).report);
      if (first != second) mismatched += name + " ";
    }
    report(10, mismatched.empty(),
           mismatched.empty() ? std::to_string(all.size()) + " scenarios byte-identical modulo wall clock"
                              : "mismatch: " + mismatched);
  });

  std::printf("%s\n", g_failed ? "ACCEPTANCE: FAIL" : "ACCEPTANCE: PASS");
  return g_failed ? 1 : 0;
}
