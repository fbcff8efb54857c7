#include "confmax/scenario.hpp"

#include "confmax/cartan_metric.hpp"
#include "confmax/cone_dynamics.hpp"
#include "confmax/kleinian.hpp"
#include "confmax/liegroup.hpp"
#include "confmax/normal_domains.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace confmax {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- config access

void check_keys(const Json& o, const std::set<std::string>& allowed, const std::string& where) {
  if (!o.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, _] : o.items())
    if (!allowed.count(k)) throw ConfigError(where + ": unknown field '" + k + "'");
}

const Json& field(const Json& o, const std::string& key, const std::string& where) {
  if (!o.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return o.at(key);
}

double num(const Json& o, const std::string& key, const std::string& where, std::optional<double> def = std::nullopt) {
  if (!o.contains(key)) {
    if (def) return *def;
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  const Json& v = o.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

long long integer(const Json& o, const std::string& key, const std::string& where,
                  std::optional<long long> def = std::nullopt) {
  if (!o.contains(key)) {
    if (def) return *def;
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  const Json& v = o.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<long long>();
}

std::string str(const Json& o, const std::string& key, const std::string& where,
                std::optional<std::string> def = std::nullopt) {
  if (!o.contains(key)) {
    if (def) return *def;
    throw ConfigError(where + ": missing field '" + key + "'");
  }
  const Json& v = o.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

bool boolean(const Json& o, const std::string& key, const std::string& where, bool def) {
  if (!o.contains(key)) return def;
  if (!o.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected a boolean");
  return o.at(key).get<bool>();
}

Vec vec_of(const Json& j, const std::string& where, int expect_size = -1) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a nonempty number array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  if (expect_size >= 0 && v.size() != expect_size)
    throw ConfigError(where + ": expected " + std::to_string(expect_size) + " entries");
  return v;
}

Mat mat_of(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a row-major matrix");
  const std::size_t r = j.size();
  Mat m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < r; ++i) {
    Vec row = vec_of(j[i], where, static_cast<int>(r));
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Mat& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Mat plane_rotation(int d, int i, int j, double angle) {
  if (i < 0 || j < 0 || i >= d || j >= d || i == j) throw ConfigError("rotation: bad plane indices");
  Mat R = Mat::Identity(d, d);
  R(i, i) = std::cos(angle);
  R(j, j) = std::cos(angle);
  R(i, j) = -std::sin(angle);
  R(j, i) = std::sin(angle);
  return R;
}

// ---------------------------------------------------------------- run context

struct Ctx {
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
  std::optional<int> max_exp;
  Json failures = Json::array();
  std::vector<NamedSet> sets;

  void fail(const std::string& check, const std::string& detail) {
    failures.push_back(Json{{"check", check}, {"detail", detail}});
  }
  void expect(bool ok, const std::string& check, const std::string& detail) {
    if (!ok) fail(check, detail);
  }
};

std::vector<double> schedule_of(const Json& s, const Ctx& ctx, const std::string& where) {
  check_keys(s, {"type", "max"}, where);
  const std::string type = str(s, "type", where, "integer");
  int max = static_cast<int>(integer(s, "max", where, 12));
  if (ctx.max_exp) max = *ctx.max_exp;
  if (max < 3) throw ConfigError(where + ": schedule needs max >= 3");
  if (type == "integer") return integer_schedule(max);
  if (type == "dyadic") return dyadic_schedule(max);
  throw ConfigError(where + ".type: expected 'integer' or 'dyadic'");
}

Json schedule_json(const std::vector<double>& s) { return Json{{"first", s.front()}, {"last", s.back()}, {"size", s.size()}}; }

// 'exp2': 2^(rate k); 'power': k^rate.
double law_value(const Json& spec, double k, const std::string& where) {
  const std::string law = str(spec, "law", where, "exp2");
  const double rate = num(spec, "rate", where, 1.0);
  if (law == "exp2") return std::exp2(rate * k);
  if (law == "power") {
    if (!(k > 0.0)) throw ConfigError(where + ": power law needs a schedule with k > 0 (use 'dyadic')");
    return std::pow(k, rate);
  }
  throw ConfigError(where + ".law: expected 'exp2' or 'power'");
}

void validate_parabolic_spec(const Json& spec, int n, const std::string& where) {
  const std::string kind = str(spec, "kind", where);
  if (kind == "homothety") {
    check_keys(spec, {"kind", "law", "rate"}, where);
  } else if (kind == "translation") {
    check_keys(spec, {"kind", "law", "rate", "direction"}, where);
    vec_of(field(spec, "direction", where), where + ".direction", n);
  } else if (kind == "rotation") {
    check_keys(spec, {"kind", "plane", "angle", "rate"}, where);
    Vec pl = vec_of(field(spec, "plane", where), where + ".plane", 2);
    plane_rotation(n, static_cast<int>(pl(0)), static_cast<int>(pl(1)), 0.0);
  } else if (kind == "product") {
    check_keys(spec, {"kind", "factors"}, where);
    const Json& f = field(spec, "factors", where);
    if (!f.is_array() || f.empty()) throw ConfigError(where + ".factors: expected a nonempty array");
    for (std::size_t i = 0; i < f.size(); ++i) validate_parabolic_spec(f[i], n, where + ".factors[" + std::to_string(i) + "]");
  } else {
    throw ConfigError(where + ".kind: unknown parabolic sequence kind '" + kind + "'");
  }
}

ParabolicElement parabolic_at(const Json& spec, int n, double k) {
  const std::string where = "sequence";
  const std::string kind = spec.at("kind").get<std::string>();
  ParabolicElement p = ParabolicElement::identity(n);
  if (kind == "homothety") {
    p.lambda = law_value(spec, k, where);
  } else if (kind == "translation") {
    p.v = law_value(spec, k, where) * vec_of(spec.at("direction"), where);
  } else if (kind == "rotation") {
    Vec pl = vec_of(spec.at("plane"), where);
    const double angle = num(spec, "angle", where, 0.0) + num(spec, "rate", where, 0.0) * k;
    p.A = plane_rotation(n, static_cast<int>(pl(0)), static_cast<int>(pl(1)), angle);
  } else {
    for (const Json& f : spec.at("factors")) p = p * parabolic_at(f, n, k);
  }
  return p;
}

void validate_group_spec(const Json& spec, int n, const std::string& where) {
  const std::string kind = str(spec, "kind", where);
  if (kind == "boost") {
    check_keys(spec, {"kind", "law", "rate"}, where);
  } else if (kind == "rotation") {
    check_keys(spec, {"kind", "plane", "angle", "rate", "alternate"}, where);
    Vec pl = vec_of(field(spec, "plane", where), where + ".plane", 2);
    plane_rotation(n + 1, static_cast<int>(pl(0)), static_cast<int>(pl(1)), 0.0);
  } else if (kind == "matrix") {
    check_keys(spec, {"kind", "matrix"}, where);
    Mat m = mat_of(field(spec, "matrix", where), where + ".matrix");
    if (m.rows() != n + 2) throw ConfigError(where + ".matrix: expected size n+2");
    try {
      GroupElement::from_matrix(m);
    } catch (const std::exception& e) {
      throw ConfigError(where + ".matrix: " + e.what());
    }
  } else if (kind == "product") {
    check_keys(spec, {"kind", "factors"}, where);
    const Json& f = field(spec, "factors", where);
    if (!f.is_array() || f.empty()) throw ConfigError(where + ".factors: expected a nonempty array");
    for (std::size_t i = 0; i < f.size(); ++i) validate_group_spec(f[i], n, where + ".factors[" + std::to_string(i) + "]");
  } else {
    throw ConfigError(where + ".kind: unknown group sequence kind '" + kind + "'");
  }
}

GroupElement group_at(const Json& spec, int n, double k) {
  const std::string where = "sequence";
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "boost") {
    const std::string law = str(spec, "law", where, "linear");
    const double rate = num(spec, "rate", where, 1.0);
    double t = 0.0;
    if (law == "linear") t = rate * k;
    else if (law == "exp2") t = std::exp2(rate * k);
    else throw ConfigError(where + ".law: expected 'linear' or 'exp2' for boosts");
    return boost(n, t);
  }
  if (kind == "rotation") {
    Vec pl = vec_of(spec.at("plane"), where);
    double angle = num(spec, "angle", where, 0.0) + num(spec, "rate", where, 0.0) * k;
    if (boolean(spec, "alternate", where, false) && static_cast<long long>(std::llround(k)) % 2 != 0) angle = -angle;
    return compact_element(plane_rotation(n + 1, static_cast<int>(pl(0)), static_cast<int>(pl(1)), angle));
  }
  if (kind == "matrix") return GroupElement::from_matrix(mat_of(spec.at("matrix"), where));
  GroupElement g = GroupElement::identity(n);
  for (const Json& f : spec.at("factors")) g = g * group_at(f, n, k);
  return g;
}

GroupElement generator_of(const Json& spec, int n, const std::string& where) {
  const std::string kind = str(spec, "kind", where);
  if (kind == "boost") {
    check_keys(spec, {"kind", "direction", "length", "label"}, where);
    return hyperbolic_boost(n, vec_of(field(spec, "direction", where), where + ".direction", n),
                            num(spec, "length", where));
  }
  if (kind == "rotation") {
    check_keys(spec, {"kind", "plane", "angle", "label"}, where);
    Vec pl = vec_of(field(spec, "plane", where), where + ".plane", 2);
    return compact_element(plane_rotation(n + 1, static_cast<int>(pl(0)), static_cast<int>(pl(1)), num(spec, "angle", where)));
  }
  if (kind == "translation") {
    check_keys(spec, {"kind", "v", "label"}, where);
    ParabolicElement p = ParabolicElement::identity(n);
    p.v = vec_of(field(spec, "v", where), where + ".v", n);
    return parabolic_to_matrix(p);
  }
  if (kind == "matrix") {
    check_keys(spec, {"kind", "matrix", "label"}, where);
    Mat m = mat_of(field(spec, "matrix", where), where + ".matrix");
    if (m.rows() != n + 2) throw ConfigError(where + ".matrix: expected size n+2");
    try {
      return GroupElement::from_matrix(m);
    } catch (const std::exception& e) {
      throw ConfigError(where + ".matrix: " + e.what());
    }
  }
  throw ConfigError(where + ".kind: unknown generator kind '" + kind + "'");
}

GroupPresentation presentation_of(const Json& cfg, int n) {
  GroupPresentation G;
  const Json& gens = field(cfg, "generators", "config");
  if (!gens.is_array()) throw ConfigError("config.generators: expected an array");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string where = "generators[" + std::to_string(i) + "]";
    G.generators.push_back(generator_of(gens[i], n, where));
    G.labels.push_back(gens[i].contains("label") ? str(gens[i], "label", where) : "g" + std::to_string(i + 1));
  }
  try {
    G.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("generators: ") + e.what());
  }
  return G;
}

int dimension_of(const Json& cfg) {
  const long long n = integer(cfg, "n", "config");
  if (n < 2 || n > 6) throw ConfigError("config.n: supported range is 2..6");
  return static_cast<int>(n);
}

// ---------------------------------------------------------------- jacobian-check

Json run_jacobian(const Json& cfg, Ctx& ctx) {
  check_keys(cfg, {"schema", "scenario", "name", "n", "seed", "samples", "step", "tolerance", "log_lambda_range",
                   "v_range"},
             "config");
  std::vector<int> dims;
  const Json& nj = field(cfg, "n", "config");
  if (nj.is_array()) {
    for (const Json& d : nj) {
      if (!d.is_number_integer()) throw ConfigError("config.n: expected integers");
      dims.push_back(d.get<int>());
    }
  } else {
    dims.push_back(dimension_of(cfg));
  }
  for (int d : dims)
    if (d < 2 || d > 6) throw ConfigError("config.n: supported range is 2..6");
  const long long samples = integer(cfg, "samples", "config", 100);
  const double step = num(cfg, "step", "config", 1e-5);
  const double tol = num(cfg, "tolerance", "config", 1e-6) * ctx.tol_scale;
  const double llr = num(cfg, "log_lambda_range", "config", 1.0);
  const double vr = num(cfg, "v_range", "config", 1.0);
  if (samples < 1 || !(step > 0.0)) throw ConfigError("config: samples >= 1 and step > 0 required");

  Json out = Json::array();
  for (int n : dims) {
    Rng rng(ctx.seed + static_cast<std::uint64_t>(n));
    double worst = 0.0, mean = 0.0;
    for (long long i = 0; i < samples; ++i) {
      const double r = right_jacobian_check(parabolic_to_matrix(random_parabolic(n, rng, llr, vr)), step).residual;
      worst = std::max(worst, r);
      mean += r / static_cast<double>(samples);
    }
    const double id_res = right_jacobian_check(GroupElement::identity(n), step).residual;
    Bilipschitz bl = bilipschitz_of_right_action(boost(n, 1.0));
    Json row{{"n", n},
             {"samples", samples},
             {"max_residual", worst},
             {"mean_residual", mean},
             {"identity_residual", id_res},
             {"boost1_singular_values", Json::array({bl.c_min, bl.c_max})},
             {"tolerance", tol},
             {"passed", worst < tol}};
    ctx.expect(worst < tol, "jacobian n=" + std::to_string(n), "max residual " + format17(worst));
    out.push_back(row);
  }
  return Json{{"dimensions", out}};
}

// ---------------------------------------------------------------- cone-dynamics

Json subball_json(const SubBall& b) {
  return Json{{"center", to_json(b.center)}, {"alpha", b.alpha},          {"lambda", b.lambda},
              {"alpha0", finite_or_null(b.alpha0)}, {"delta", b.delta}, {"full_cap", b.full_cap}};
}

Json limit_json(const ScalarLimit& l) { return Json{{"kind", to_string(l.kind)}, {"value", finite_or_null(l.value)}}; }

Json run_cone(const Json& cfg, Ctx& ctx) {
  check_keys(cfg, {"schema", "scenario", "name", "n", "seed", "cone", "resolution", "tolerance", "delta", "fixtures",
                   "halflines", "emit_sets"},
             "config");
  const int n = dimension_of(cfg);
  const Json& cj = field(cfg, "cone", "config");
  check_keys(cj, {"center", "alpha", "lambda"}, "cone");
  Cone cone{vec_of(field(cj, "center", "cone"), "cone.center", n), num(cj, "alpha", "cone"), num(cj, "lambda", "cone")};
  cone.center /= cone.center.norm();
  try {
    cone.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cone: ") + e.what());
  }
  const double res = num(cfg, "resolution", "config", 0.01);
  const double tol = num(cfg, "tolerance", "config", 0.05) * ctx.tol_scale;
  const double delta = num(cfg, "delta", "config", 0.1);
  const bool emit = boolean(cfg, "emit_sets", "config", false);
  if (!(res > 0.0) || !(delta > 0.0)) throw ConfigError("config: resolution and delta must be positive");

  const Json& fx = field(cfg, "fixtures", "config");
  if (!fx.is_array()) throw ConfigError("config.fixtures: expected an array");
  struct Prepared {
    std::string name;
    Json spec;
    std::vector<double> schedule;
    Json expect;
  };
  std::vector<Prepared> prepared;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const std::string where = "fixtures[" + std::to_string(i) + "]";
    check_keys(fx[i], {"name", "sequence", "schedule", "expect"}, where);
    validate_parabolic_spec(field(fx[i], "sequence", where), n, where + ".sequence");
    Json expect = fx[i].value("expect", Json::object());
    check_keys(expect, {"case", "error"}, where + ".expect");
    prepared.push_back({str(fx[i], "name", where), fx[i].at("sequence"),
                        schedule_of(fx[i].value("schedule", Json::object()), ctx, where + ".schedule"), expect});
  }

  Json fixtures = Json::array();
  for (const Prepared& p : prepared) {
    Json spec = p.spec;
    ParabolicSequence seq{[spec, n](double k) { return parabolic_at(spec, n, k); }, p.schedule, p.name, std::nullopt};
    Json row{{"name", p.name}, {"schedule", schedule_json(p.schedule)}};
    try {
      ConeLimitVerdict v = classify_sequence(seq, cone, ClassifyOptions{delta, 1e-6, 1e3});
      row["verdict"] = Json{{"case", to_string(v.kind)},
                            {"branch", v.branch},
                            {"lambda", limit_json(v.lambda)},
                            {"mu", limit_json(v.mu)},
                            {"ratio", limit_json(v.ratio)}};
      if (v.u_limit.size() > 0) row["verdict"]["u_limit"] = to_json(v.u_limit);
      if (v.subball) row["verdict"]["subball"] = subball_json(*v.subball);
      if (v.renorm)
        row["verdict"]["renormalization"] =
            Json{{"l_limit", to_json(v.renorm->l_limit)},
                 {"A_limit", to_json(v.renorm->A_limit)},
                 {"limit_cone", Json{{"center", to_json(v.renorm->limit_cone.center)},
                                     {"alpha", v.renorm->limit_cone.alpha},
                                     {"lambda", v.renorm->limit_cone.lambda}}}};
      VerifyReport rep = verify_verdict(seq, cone, v, p.schedule.size() - 1, res, tol);
      Json rows = Json::array();
      for (const VerifyRow& r : rep.rows)
        rows.push_back(Json{{"k", r.k}, {"residual", r.residual}, {"predicted", r.predicted}, {"tol", r.tol},
                            {"samples", r.samples}});
      row["verification"] = Json{{"rows", rows},
                                 {"decreasing", rep.decreasing},
                                 {"final_residual", rep.final_residual},
                                 {"final_tol", rep.final_tol},
                                 {"passed", rep.passed},
                                 {"failure", rep.failure},
                                 {"qualifier", "resolution " + format17(res) + " rad, K = schedule position " +
                                                   std::to_string(p.schedule.size() - 1)}};
      ctx.expect(rep.passed, "cone " + p.name, rep.failure);
      if (p.expect.contains("case"))
        ctx.expect(p.expect.at("case") == to_string(v.kind), "cone " + p.name + " case",
                   std::string("got ") + to_string(v.kind));
      ctx.expect(!p.expect.contains("error"), "cone " + p.name, "expected an error, got a verdict");
      if (emit) {
        ParabolicElement last = seq.at(p.schedule.size() - 1);
        if (v.kind == ConeCase::ShrinkToVertex)
          ctx.sets.push_back({p.name + ".image", act_on_cone(last, Cone{v.subball->center, v.subball->alpha,
                                                                         v.subball->lambda}, res)});
      }
    } catch (const std::domain_error& e) {
      row["error"] = e.what();
      ctx.expect(p.expect.contains("error"), "cone " + p.name, e.what());
    }
    fixtures.push_back(row);
  }

  Json halflines = Json::array();
  if (cfg.contains("halflines")) {
    const Json& hl = cfg.at("halflines");
    if (!hl.is_array()) throw ConfigError("config.halflines: expected an array");
    for (std::size_t i = 0; i < hl.size(); ++i) {
      const std::string where = "halflines[" + std::to_string(i) + "]";
      check_keys(hl[i], {"name", "x", "u", "schedule", "expect"}, where);
      const Json xs = field(hl[i], "x", where);
      check_keys(xs, {"direction", "law", "rate"}, where + ".x");
      const Vec xd = vec_of(field(xs, "direction", where + ".x"), where + ".x.direction", n);
      const Vec u = vec_of(field(hl[i], "u", where), where + ".u", n);
      law_value(xs, 1.0, where + ".x");
      const std::vector<double> sched = schedule_of(hl[i].value("schedule", Json::object()), ctx, where + ".schedule");
      const std::string expect = str(hl[i], "expect", where, "");
      Json row{{"name", str(hl[i], "name", where)}};
      try {
        HalflineReport r = halfline_limit([xs, xd](double k) { return Vec(law_value(xs, k, "x") * xd); },
                                          [u](double) { return u; }, sched, delta);
        row["verdict"] = to_string(r.verdict);
        row["separation"] = r.separation;
        row["oracle_sup_tail"] = Json::array();
        for (std::size_t j = r.oracle_sup.size() - 4; j < r.oracle_sup.size(); ++j)
          row["oracle_sup_tail"].push_back(r.oracle_sup[j]);
        if (!expect.empty()) ctx.expect(expect == to_string(r.verdict), "halfline " + row["name"].get<std::string>(),
                                        std::string("got ") + to_string(r.verdict));
        if (r.verdict == HalflineVerdict::ConvergesToVertex)
          ctx.expect(r.oracle_sup.back() < tol, "halfline oracle " + row["name"].get<std::string>(),
                     "oracle sup " + format17(r.oracle_sup.back()));
      } catch (const std::domain_error& e) {
        row["error"] = e.what();
        ctx.fail("halfline " + row["name"].get<std::string>(), e.what());
      }
      halflines.push_back(row);
    }
  }
  return Json{{"cone", Json{{"center", to_json(cone.center)}, {"alpha", cone.alpha}, {"lambda", cone.lambda}}},
              {"resolution", res},
              {"tolerance", tol},
              {"fixtures", fixtures},
              {"halflines", halflines}};
}

// ---------------------------------------------------------------- limit-set

Json density_json(const DensityReport& d) {
  return Json{{"dense", d.dense},           {"epsilon", d.epsilon},     {"grid_spacing", d.grid_spacing},
              {"grid_points", d.grid_points}, {"gap_radius", d.gap_radius}, {"gap", d.gap},
              {"witness", d.witness.size() ? to_json(d.witness) : Json(nullptr)}};
}

LimitSetOptions limit_options(const Json& cfg) {
  LimitSetOptions opt;
  opt.cutoff = num(cfg, "cutoff", "config", 8.0);
  opt.t_min = num(cfg, "t_min", "config", 0.1);
  return opt;
}

int depth_of(const Json& cfg) {
  const long long d = integer(cfg, "depth", "config", 8);
  if (d < 1 || d > 12) throw ConfigError("config.depth: supported range is 1..12");
  return static_cast<int>(d);
}

Json run_limit_set(const Json& cfg, Ctx& ctx) {
  check_keys(cfg, {"schema", "scenario", "name", "n", "seed", "generators", "depth", "cutoff", "t_min", "epsilon",
                   "dimension_scales", "expect", "emit_sets"},
             "config");
  const int n = dimension_of(cfg);
  const GroupPresentation G = presentation_of(cfg, n);
  const int depth = depth_of(cfg);
  const LimitSetOptions opt = limit_options(cfg);
  const double eps = num(cfg, "epsilon", "config", 0.05);
  const Json expect = cfg.value("expect", Json::object());
  check_keys(expect, {"agreement", "dense", "min_gap", "dimension_range"}, "config.expect");
  if (!G.generators.empty() && !preserves_hemisphere(G))
    throw ConfigError("generators: limit-set scenarios need generators fixing e_{n+1}");

  LimitSetApprox orbit = limit_set(G, depth, LimitMethod::OrbitAccumulation, opt);
  LimitSetApprox fixed = limit_set(G, depth, LimitMethod::LoxodromicFixedPoints, opt);
  MethodAgreement agree = compare_methods(G, depth, opt);
  LimitSetApprox all = orbit;
  all.points.insert(all.points.end(), fixed.points.begin(), fixed.points.end());
  DensityReport dens = density_report(all, n, eps);

  // Generator stability: g applied to the fixed point of w is the fixed point of g w g^-1.
  double stability = 0.0;
  if (!G.generators.empty()) {
    WordBall small = word_ball(G, std::min(depth, 3));
    for (const GroupElement& g : G.letters())
      for (const GroupElement& w : small.elements) {
        auto p = attracting_fixed_point(w, opt.t_min);
        if (!p) continue;
        auto q = attracting_fixed_point(g * w * g.inverse(), opt.t_min);
        if (!q) {
          stability = M_PI;
          continue;
        }
        stability = std::max(stability, round_distance(act(g, SpherePoint{*p}).xi, *q));
      }
  }
  ctx.expect(stability < 1e-8 * ctx.tol_scale, "limit-set generator stability", "residual " + format17(stability));

  Json out{{"depth", depth},
           {"orbit_points", orbit.points.size()},
           {"fixed_points", fixed.points.size()},
           {"warnings", orbit.warnings},
           {"agreement", Json{{"hausdorff", agree.hausdorff},
                              {"radius_orbit", agree.radius_orbit},
                              {"radius_fixed", agree.radius_fixed},
                              {"agree", agree.agree}}},
           {"density", density_json(dens)},
           {"stability_residual", stability},
           {"qualifier", "depth " + std::to_string(depth) + ", finite-word approximation"}};
  for (const std::string& w : fixed.warnings) out["warnings"].push_back(w);

  if (cfg.contains("dimension_scales") && !fixed.empty()) {
    Vec sc = vec_of(cfg.at("dimension_scales"), "config.dimension_scales");
    try {
      BoxDimension bd = box_counting_dimension(fixed.as_sampled(0.0), std::vector<double>(sc.data(), sc.data() + sc.size()));
      out["box_dimension"] = Json{{"estimate", bd.estimate},   {"residual", bd.residual}, {"degenerate", bd.degenerate},
                                  {"estimator", bd.estimator}, {"counts", bd.counts},     {"scales", bd.scales}};
      if (expect.contains("dimension_range")) {
        Vec r = vec_of(expect.at("dimension_range"), "expect.dimension_range", 2);
        ctx.expect(!bd.degenerate && bd.estimate > r(0) && bd.estimate < r(1), "limit-set box dimension",
                   "estimate " + format17(bd.estimate));
      }
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("dimension_scales: ") + e.what());
    }
  }
  if (expect.contains("agreement"))
    ctx.expect(expect.at("agreement").get<bool>() == agree.agree, "limit-set method agreement",
               "hausdorff " + format17(agree.hausdorff));
  if (expect.contains("dense"))
    ctx.expect(expect.at("dense").get<bool>() == dens.dense, "limit-set density", "gap " + format17(dens.gap));
  if (expect.contains("min_gap"))
    ctx.expect(dens.gap >= num(expect, "min_gap", "expect"), "limit-set gap", "gap " + format17(dens.gap));
  if (boolean(cfg, "emit_sets", "config", true)) {
    if (!orbit.empty()) ctx.sets.push_back({"orbit", orbit.as_sampled(eps)});
    if (!fixed.empty()) ctx.sets.push_back({"fixed", fixed.as_sampled(eps)});
  }
  return out;
}

// ---------------------------------------------------------------- maximality

Json run_maximality(const Json& cfg, Ctx& ctx) {
  check_keys(cfg, {"schema", "scenario", "name", "n", "seed", "fixture", "generators", "depth", "cutoff", "t_min",
                   "epsilon", "expect", "properness"},
             "config");
  const int n = dimension_of(cfg);
  DomainFixture fixture;
  try {
    fixture = parse_fixture(str(cfg, "fixture", "config"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const GroupPresentation G = presentation_of(cfg, n);
  const int depth = depth_of(cfg);
  const double eps = num(cfg, "epsilon", "config", 0.05);
  const Json expect = cfg.value("expect", Json::object());
  check_keys(expect, {"verdict", "min_gap"}, "config.expect");

  MaximalityReport rep;
  try {
    rep = maximality_verdict(G, fixture, eps, depth, limit_options(cfg));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("maximality: ") + e.what());
  }
  Json out{{"fixture", to_string(fixture)},
           {"verdict", to_string(rep.verdict)},
           {"reason", rep.reason},
           {"qualifier", rep.qualifier},
           {"limit_points", rep.limit_points}};
  if (rep.density) out["density"] = density_json(*rep.density);
  if (expect.contains("verdict"))
    ctx.expect(expect.at("verdict") == to_string(rep.verdict), "maximality verdict",
               std::string("got ") + to_string(rep.verdict));
  if (expect.contains("min_gap")) {
    const double gap = rep.density ? rep.density->gap : 0.0;
    ctx.expect(gap >= num(expect, "min_gap", "expect"), "maximality gap witness", "gap " + format17(gap));
  }

  if (cfg.contains("properness")) {
    const Json& pj = cfg.at("properness");
    check_keys(pj, {"points", "eps", "depth", "expect_free", "expect_proper"}, "properness");
    const Json& pts = field(pj, "points", "properness");
    if (!pts.is_array() || pts.empty()) throw ConfigError("properness.points: expected a nonempty array");
    SampledSet sample;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      Vec p = vec_of(pts[i], "properness.points", n + 1);
      sample.points.push_back(p / p.norm());
    }
    const int pdepth = static_cast<int>(integer(pj, "depth", "properness", depth));
    PropernessReport pr = properness_probe(G, sample, pdepth, num(pj, "eps", "properness", 0.05));
    out["properness"] = Json{{"free", pr.free_ok},
                             {"proper", pr.proper_ok},
                             {"words", pr.words},
                             {"min_displacement", pr.min_displacement},
                             {"hits_depth", pr.hits_depth},
                             {"hits_previous", pr.hits_previous},
                             {"fixed_witness", pr.fixed_witness.size() ? to_json(pr.fixed_witness) : Json(nullptr)},
                             {"qualifier", pr.qualifier}};
    if (pj.contains("expect_free"))
      ctx.expect(pj.at("expect_free").get<bool>() == pr.free_ok, "properness free check", pr.qualifier);
    if (pj.contains("expect_proper"))
      ctx.expect(pj.at("expect_proper").get<bool>() == pr.proper_ok, "properness count check", pr.qualifier);
  }
  return out;
}

// ---------------------------------------------------------------- simple-divergence

Json run_simple(const Json& cfg, Ctx& ctx) {
  check_keys(cfg, {"schema", "scenario", "name", "n", "seed", "sequences", "tolerance"}, "config");
  const int n = dimension_of(cfg);
  const double tol = num(cfg, "tolerance", "config", 1e-8) * ctx.tol_scale;
  const Json& sj = field(cfg, "sequences", "config");
  if (!sj.is_array() || sj.empty()) throw ConfigError("config.sequences: expected a nonempty array");
  Json out = Json::array();
  for (std::size_t i = 0; i < sj.size(); ++i) {
    const std::string where = "sequences[" + std::to_string(i) + "]";
    check_keys(sj[i], {"name", "sequence", "schedule", "expect"}, where);
    const std::string name = str(sj[i], "name", where);
    const Json spec = field(sj[i], "sequence", where);
    validate_group_spec(spec, n, where + ".sequence");
    const std::vector<double> sched = schedule_of(sj[i].value("schedule", Json::object()), ctx, where + ".schedule");
    const Json expect = sj[i].value("expect", Json::object());
    check_keys(expect, {"simple", "l1", "l2"}, where + ".expect");
    if (expect.contains("l1")) validate_group_spec(expect.at("l1"), n, where + ".expect.l1");
    if (expect.contains("l2")) validate_group_spec(expect.at("l2"), n, where + ".expect.l2");

    Json row{{"name", name}, {"schedule", schedule_json(sched)}};
    try {
      SimpleDivergence sd = simple_divergence([spec, n](double k) { return group_at(spec, n, k); }, sched);
      double recon = 0.0;
      for (double r : sd.reconstruction) recon = std::max(recon, r);
      row["simple"] = sd.simple;
      row["reason"] = sd.reason;
      row["t_tail"] = Json::array();
      for (std::size_t j = sd.t.size() - 4; j < sd.t.size(); ++j) row["t_tail"].push_back(sd.t[j]);
      row["reconstruction_residual"] = recon;
      ctx.expect(recon < 1e-9 * ctx.tol_scale, "kak reconstruction " + name, format17(recon));
      if (sd.simple) {
        row["l1"] = to_json(sd.l1->mat());
        row["l2"] = to_json(sd.l2->mat());
        row["p_plus"] = to_json(sd.p_plus);
        row["p_minus"] = to_json(sd.p_minus);
      }
      if (expect.contains("simple"))
        ctx.expect(expect.at("simple").get<bool>() == sd.simple, "simple divergence " + name, sd.reason);
      for (const char* key : {"l1", "l2"}) {
        if (!expect.contains(key) || !sd.simple) continue;
        const GroupElement want = group_at(expect.at(key), n, 0.0);
        const GroupElement& got = std::string(key) == "l1" ? *sd.l1 : *sd.l2;
        const double err = max_abs(want.mat() - got.mat());
        row[std::string(key) + "_error"] = err;
        ctx.expect(err < tol, std::string(key) + " " + name, "error " + format17(err));
      }
    } catch (const std::domain_error& e) {
      row["error"] = e.what();
      ctx.fail("simple divergence " + name, e.what());
    }
    out.push_back(row);
  }
  return Json{{"sequences", out}};
}

// ---------------------------------------------------------------- cauchy-probe

Json run_cauchy(const Json& cfg, Ctx& ctx) {
  check_keys(cfg, {"schema", "scenario", "name", "n", "seed", "probes", "coset_tol", "distance_threshold"}, "config");
  const int n = dimension_of(cfg);
  CauchyOptions copt;
  copt.coset_tol = num(cfg, "coset_tol", "config", 1e-8) * ctx.tol_scale;
  copt.distance_threshold = num(cfg, "distance_threshold", "config", 1e-6) * ctx.tol_scale;
  const Json& pj = field(cfg, "probes", "config");
  if (!pj.is_array() || pj.empty()) throw ConfigError("config.probes: expected a nonempty array");
  Rng rng(ctx.seed);
  Json out = Json::array();
  for (std::size_t i = 0; i < pj.size(); ++i) {
    const std::string where = "probes[" + std::to_string(i) + "]";
    check_keys(pj[i], {"name", "fixture", "mode", "pairs", "j0", "j1", "expect"}, where);
    const std::string fname = str(pj[i], "fixture", where);
    CauchyFixture fixture;
    if (fname == "sphere-minus-point") fixture = CauchyFixture::SphereMinusPoint;
    else if (fname == "sphere-minus-two-points") fixture = CauchyFixture::SphereMinusTwoPoints;
    else throw ConfigError(where + ".fixture: unknown fixture '" + fname + "'");
    const std::string mode = str(pj[i], "mode", where, "same-fiber");
    if (mode != "same-fiber" && mode != "cross-fiber" && mode != "identical")
      throw ConfigError(where + ".mode: expected same-fiber, cross-fiber or identical");
    if (mode == "cross-fiber" && fixture != CauchyFixture::SphereMinusTwoPoints)
      throw ConfigError(where + ": cross-fiber tails need the two-point fixture");
    const long long pairs = integer(pj[i], "pairs", where, 10);
    const int j0 = static_cast<int>(integer(pj[i], "j0", where, 20));
    const int j1 = static_cast<int>(integer(pj[i], "j1", where, 40));
    if (pairs < 1 || j1 - j0 < 3) throw ConfigError(where + ": need pairs >= 1 and j1 - j0 >= 3");
    const std::string expect = str(pj[i], "expect", where, "");

    Mat flip = Mat::Identity(n + 1, n + 1);
    flip(0, 0) = -1.0;
    flip(n, n) = -1.0;
    const GroupElement to_antipode = compact_element(flip);
    NormalityGate gate = normality_gate(fixture, n);
    Json rows = Json::array();
    bool all_match = true;
    double worst_equiv_residual = 0.0;
    for (long long k = 0; k < pairs; ++k) {
      GroupElement q1 = parabolic_to_matrix(random_parabolic(n, rng));
      GroupElement q2 = parabolic_to_matrix(random_parabolic(n, rng));
      AlgebraElement Y1 = random_algebra(n, rng), Y2 = random_algebra(n, rng);
      if (mode == "cross-fiber") q2 = to_antipode * q2;
      GroupPath s1 = cauchy_tail(q1, Y1, j0, j1);
      GroupPath s2 = mode == "identical" ? s1 : cauchy_tail(q2, Y2, j0, j1);
      CauchyReport r = cauchy_probe(fixture, s1, s2, copt);
      CauchyReport back = cauchy_probe(fixture, s2, s1, copt);
      const bool symmetric = r.verdict == back.verdict;
      ctx.expect(symmetric, "cauchy symmetry " + fname, "pair " + std::to_string(k));
      if (!expect.empty() && expect != to_string(r.verdict)) all_match = false;
      if (r.verdict == CauchyVerdict::Equivalent) worst_equiv_residual = std::max(worst_equiv_residual, r.coset_residual);
      rows.push_back(Json{{"verdict", to_string(r.verdict)},
                          {"coset_residual", r.coset_residual},
                          {"final_distance", r.distances.empty() ? Json(nullptr) : Json(r.distances.back())},
                          {"first_distance", r.distances.empty() ? Json(nullptr) : Json(r.distances.front())},
                          {"symmetric", symmetric},
                          {"reason", r.reason}});
    }
    ctx.expect(all_match, "cauchy " + str(pj[i], "name", where, fname), "expected " + expect);
    ctx.expect(gate.normal, "normality gate " + fname, gate.rationale);
    out.push_back(Json{{"name", str(pj[i], "name", where, fname)},
                       {"fixture", fname},
                       {"mode", mode},
                       {"normality_gate", Json{{"codimension", gate.codimension},
                                               {"normal", gate.normal},
                                               {"rationale", gate.rationale}}},
                       {"worst_equivalent_coset_residual", worst_equiv_residual},
                       {"pairs", rows}});
  }
  return Json{{"probes", out}, {"coset_tol", copt.coset_tol}, {"distance_threshold", copt.distance_threshold}};
}

// ---------------------------------------------------------------- normal-domain

std::shared_ptr<LipschitzGraphDomain> graph_of(const Json& j, const std::string& where) {
  check_keys(j, {"name", "kind", "f", "k", "side", "box", "pairs", "margin", "pinned"}, where);
  const std::string f = str(j, "f", where);
  const double k = num(j, "k", where, 1.0);
  const int side = static_cast<int>(integer(j, "side", where, 1));
  const Json& box = field(j, "box", where);
  check_keys(box, {"lo", "hi"}, where + ".box");
  Vec lo = vec_of(field(box, "lo", where), where + ".box.lo"), hi = vec_of(field(box, "hi", where), where + ".box.hi");
  if (lo.size() != hi.size() || lo.size() < 2) throw ConfigError(where + ".box: bad dimensions");
  std::function<double(const Vec&)> fn;
  if (f == "abs") fn = [k](const Vec& z) { return -k * z.norm(); };
  else if (f == "zero") fn = [](const Vec&) { return 0.0; };
  else throw ConfigError(where + ".f: expected 'abs' or 'zero'");
  const double kk = f == "zero" ? 0.0 : k;
  try {
    return std::make_shared<LipschitzGraphDomain>(static_cast<int>(lo.size()), fn, kk, side, lo, hi,
                                                  str(j, "name", where, f));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Json ratio_summary(const BilipschitzReport& r) {
  Json worst = Json(nullptr);
  if (!r.pairs.empty()) {
    const PairRatio& p = r.pairs[r.worst_index];
    worst = Json{{"x", to_json(p.x)}, {"y", to_json(p.y)}, {"euclidean", p.euclidean}, {"intrinsic", p.intrinsic}};
  }
  return Json{{"worst_ratio", r.worst_ratio}, {"bound", r.bound}, {"eta", r.eta},    {"ok", r.ok},
              {"pairs", r.pairs.size()},      {"unreachable", r.unreachable}, {"worst_pair", worst}};
}

Json run_normal(const Json& cfg, Ctx& ctx) {
  check_keys(cfg, {"schema", "scenario", "name", "seed", "h", "d_min", "fixtures", "product_length"}, "config");
  PathOptions popt;
  popt.h = num(cfg, "h", "config", 0.01);
  const double d_min = num(cfg, "d_min", "config", 0.5);
  if (!(popt.h > 0.0) || !(d_min > 0.0)) throw ConfigError("config: h and d_min must be positive");
  Rng rng(ctx.seed);
  Json out = Json::array();
  const Json& fx = cfg.value("fixtures", Json::array());
  if (!fx.is_array()) throw ConfigError("config.fixtures: expected an array");
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const std::string where = "fixtures[" + std::to_string(i) + "]";
    const std::string kind = str(fx[i], "kind", where);
    Json row{{"kind", kind}};
    if (kind == "graph") {
      auto D = graph_of(fx[i], where);
      row["name"] = D->name();
      const double lip = D->empirical_lipschitz(2000, rng);
      row["empirical_lipschitz"] = lip;
      ctx.expect(lip <= D->k() * (1.0 + 1e-6) + 1e-12, "graph lipschitz " + D->name(), format17(lip));
      auto pairs = sample_pairs(*D, static_cast<std::size_t>(integer(fx[i], "pairs", where, 50)),
                                num(fx[i], "margin", where, 2.0 * popt.h), d_min, rng);
      Json pinned = Json::array();
      if (fx[i].contains("pinned")) {
        for (const Json& pj : fx[i].at("pinned")) {
          check_keys(pj, {"x", "y", "range"}, where + ".pinned");
          Vec x = vec_of(field(pj, "x", where), where + ".pinned.x", D->dim());
          Vec y = vec_of(field(pj, "y", where), where + ".pinned.y", D->dim());
          IntrinsicResult r = intrinsic_distance(*D, x, y, popt);
          Json pr{{"x", to_json(x)}, {"y", to_json(y)}, {"intrinsic", r.estimate}, {"grid_length", r.grid_length},
                  {"euclidean", r.euclidean}, {"ratio", r.estimate / r.euclidean}};
          if (pj.contains("range")) {
            Vec rg = vec_of(pj.at("range"), where + ".pinned.range", 2);
            ctx.expect(r.reachable && r.estimate >= rg(0) && r.estimate <= rg(1), "pinned pair " + D->name(),
                       "intrinsic " + format17(r.estimate));
          }
          pinned.push_back(pr);
          pairs.emplace_back(x, y);
        }
      }
      BilipschitzReport rep = bilipschitz_report(*D, pairs, D->lipschitz(), d_min, popt);
      row["ratios"] = ratio_summary(rep);
      row["pinned"] = pinned;
      ctx.expect(rep.ok, "graph bound " + D->name(), "worst ratio " + format17(rep.worst_ratio));
    } else if (kind == "points") {
      check_keys(fx[i], {"name", "kind", "points", "circle", "box", "pairs", "antipodal", "margin"}, where);
      const Json& box = field(fx[i], "box", where);
      Vec lo = vec_of(field(box, "lo", where), where + ".box.lo"), hi = vec_of(field(box, "hi", where), where + ".box.hi");
      const int d = static_cast<int>(lo.size());
      std::vector<Vec> pts;
      for (const Json& p : fx[i].value("points", Json::array())) pts.push_back(vec_of(p, where + ".points", d));
      std::optional<DeletedCircle> circle;
      if (fx[i].contains("circle")) {
        const Json& c = fx[i].at("circle");
        check_keys(c, {"center", "normal", "radius"}, where + ".circle");
        circle = DeletedCircle{vec_of(field(c, "center", where), where + ".circle.center", 3),
                               vec_of(field(c, "normal", where), where + ".circle.normal", 3), num(c, "radius", where)};
      }
      std::unique_ptr<SmallBoundaryDomain> D;
      try {
        D = std::make_unique<SmallBoundaryDomain>(d, pts, circle, lo, hi);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
      }
      row["name"] = str(fx[i], "name", where, D->name());
      std::vector<Vec> del = D->deleted_sample();
      double dim_est = 0.0;
      if (circle) {
        BoxDimension bd = box_counting_dimension(del, {0.2, 0.1, 0.05, 0.02, 0.01});
        dim_est = bd.estimate;
      }
      row["deleted_dimension_estimate"] = dim_est;
      ctx.expect(dim_est <= (d - 2) + 0.1, "deleted set dimension", format17(dim_est));
      auto pairs = sample_pairs(*D, static_cast<std::size_t>(integer(fx[i], "pairs", where, 180)),
                                num(fx[i], "margin", where, 2.0 * popt.h), d_min, rng);
      const long long anti = integer(fx[i], "antipodal", where, 0);
      std::normal_distribution<double> nd(0.0, 1.0);
      std::uniform_real_distribution<double> ud(0.3, 0.9);
      for (long long a = 0; a < anti && !pts.empty(); ++a) {
        Vec u(d);
        for (int j = 0; j < d; ++j) u(j) = nd(rng);
        u /= u.norm();
        const double r1 = ud(rng), r2 = ud(rng);
        pairs.emplace_back(pts.front() + r1 * u, pts.front() - r2 * u);
      }
      BilipschitzReport rep = bilipschitz_report(*D, pairs, 1.0, d_min, popt);
      row["ratios"] = ratio_summary(rep);
      ctx.expect(rep.ok, "small-boundary bound " + row["name"].get<std::string>(),
                 "worst ratio " + format17(rep.worst_ratio));
    } else if (kind == "fibered") {
      check_keys(fx[i], {"name", "kind", "base", "fiber_dim", "pairs", "margin"}, where);
      auto base = graph_of(field(fx[i], "base", where), where + ".base");
      const int m = static_cast<int>(integer(fx[i], "fiber_dim", where, 1));
      if (m < 0 || m > 2) throw ConfigError(where + ".fiber_dim: supported range is 0..2");
      ProductDomain prod(base, m);
      auto pairs = sample_pairs(prod, static_cast<std::size_t>(integer(fx[i], "pairs", where, 100)),
                                num(fx[i], "margin", where, 2.0 * popt.h), d_min, rng);
      FiberedReport fr = fibered_constant_check(base, m, pairs, d_min, popt);
      row["name"] = str(fx[i], "name", where, prod.name());
      row["k_base"] = fr.k_base;
      row["K"] = fr.K;
      row["ratios"] = ratio_summary(fr.bilipschitz);
      row["composite_ok"] = fr.composite_ok;
      ctx.expect(fr.bilipschitz.ok, "fibered bound " + prod.name(), "worst ratio " + format17(fr.bilipschitz.worst_ratio));
      ctx.expect(fr.composite_ok, "fibered composite " + prod.name(), "composite inequality failed");
    } else {
      throw ConfigError(where + ".kind: expected graph, points or fibered");
    }
    row["qualifier"] = "h = " + format17(popt.h) + ", sampled pairs: necessary instances only";
    out.push_back(row);
  }

  Json product = Json(nullptr);
  if (cfg.contains("product_length")) {
    const Json& pl = cfg.at("product_length");
    check_keys(pl, {"L", "dy", "random", "samples", "amplitude"}, "product_length");
    const double L = num(pl, "L", "product_length", 3.0);
    const Vec dy = vec_of(field(pl, "dy", "product_length"), "product_length.dy");
    const long long nrand = integer(pl, "random", "product_length", 100);
    const long long ns = integer(pl, "samples", "product_length", 257);
    const double amp = num(pl, "amplitude", "product_length", 0.5);
    if (!(L > 0.0) || ns < 3) throw ConfigError("product_length: L > 0 and samples >= 3 required");
    const Vec y1 = Vec::Zero(dy.size()), y2 = dy;
    std::vector<Vec> linear;
    for (long long i = 0; i < ns; ++i) linear.push_back(y1 + (static_cast<double>(i) / (ns - 1)) * (y2 - y1));
    linear.back() = y2;
    ProductLength lin = product_min_length(L, y1, y2, linear);
    const double lin_err = std::abs(lin.length - lin.minimum);
    ctx.expect(lin_err < 1e-8 * ctx.tol_scale, "product length linear", format17(lin_err));
    std::normal_distribution<double> nd(0.0, 1.0);
    double min_excess = std::numeric_limits<double>::infinity();
    long long exceed = 0;
    for (long long r = 0; r < nrand; ++r) {
      std::vector<Vec> beta = linear;
      Vec c1(dy.size()), c2(dy.size());
      for (Eigen::Index j = 0; j < dy.size(); ++j) c1(j) = amp * nd(rng), c2(j) = amp * nd(rng);
      for (long long i = 1; i + 1 < ns; ++i) {
        const double s = static_cast<double>(i) / (ns - 1);
        beta[i] += std::sin(M_PI * s) * c1 + std::sin(2.0 * M_PI * s) * c2;
      }
      ProductLength pr = product_min_length(L, y1, y2, beta);
      min_excess = std::min(min_excess, pr.length - pr.minimum);
      exceed += pr.length > pr.minimum;
    }
    ctx.expect(exceed == nrand, "product length perturbed", std::to_string(exceed) + " of " + std::to_string(nrand));
    product = Json{{"minimum", lin.minimum}, {"linear_length", lin.length}, {"linear_error", lin_err},
                   {"random", nrand},        {"exceeding", exceed},         {"min_excess", finite_or_null(min_excess)}};
  }
  return Json{{"h", popt.h}, {"d_min", d_min}, {"eta_formula", "2 sqrt(d) h / d_min"}, {"fixtures", out},
              {"product_length", product}};
}

}  // namespace

// ---------------------------------------------------------------- entry points

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ScenarioResult run_scenario(const Json& config, const RunFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioResult res;
  Ctx ctx;
  ctx.tol_scale = flags.tolerance_scale;
  ctx.max_exp = flags.schedule_max_exp;
  Json report{{"config", config}};
  std::string scenario = "?";
  try {
    if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    if (!config.contains("schema") || config.at("schema") != 1) throw ConfigError("config.schema: expected 1");
    scenario = str(config, "scenario", "config");
    if (config.contains("name")) str(config, "name", "config");
    const long long seed = integer(config, "seed", "config", 1);
    if (seed < 0) throw ConfigError("config.seed: expected a nonnegative integer");
    ctx.seed = flags.seed ? *flags.seed : static_cast<std::uint64_t>(seed);
    if (!(flags.tolerance_scale > 0.0)) throw ConfigError("--tolerance-scale must be positive");

    static const std::map<std::string, std::function<Json(const Json&, Ctx&)>> table{
        {"jacobian-check", run_jacobian},     {"cone-dynamics", run_cone},   {"limit-set", run_limit_set},
        {"maximality", run_maximality},       {"simple-divergence", run_simple}, {"cauchy-probe", run_cauchy},
        {"normal-domain", run_normal}};
    auto it = table.find(scenario);
    if (it == table.end()) throw ConfigError("config.scenario: unknown scenario '" + scenario + "'");
    report["results"] = it->second(config, ctx);
    res.exit_code = ctx.failures.empty() ? 0 : 1;
  } catch (const ConfigError& e) {
    ctx.fail("config", e.what());
    res.exit_code = 2;
  } catch (const nlohmann::json::exception& e) {
    ctx.fail("config", e.what());
    res.exit_code = 2;
  } catch (const std::exception& e) {
    ctx.fail("runtime", e.what());
    res.exit_code = 1;
  }
  report["scenario"] = scenario;
  report["failures"] = ctx.failures;
  report["passed"] = res.exit_code == 0;
  report["exit_code"] = res.exit_code;
  report["provenance"] = Json{{"tool", kToolVersion},
                              {"seed", ctx.seed},
                              {"tolerance_scale", ctx.tol_scale},
                              {"schedule_max_exp", ctx.max_exp ? Json(*ctx.max_exp) : Json(nullptr)},
                              {"config_schema", 1}};
  report["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  res.report = std::move(report);
  res.point_sets = std::move(ctx.sets);
  return res;
}

std::string report_fingerprint(const Json& report) {
  Json copy = report;
  copy.erase("wall_clock_seconds");
  return copy.dump(2);
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

std::string chart_path(const std::string& csv_path) {
  const std::string ext = ".csv";
  if (csv_path.size() >= ext.size() && csv_path.compare(csv_path.size() - ext.size(), ext.size(), ext) == 0)
    return csv_path.substr(0, csv_path.size() - ext.size()) + ".chart.csv";
  return csv_path + ".chart.csv";
}

void write_point_csv(const SampledSet& set, const std::string& path) {
  set.validate();
  const Eigen::Index dim = set.points.front().size();
  std::ostringstream raw, ch;
  for (Eigen::Index i = 0; i < dim; ++i) raw << (i ? "," : "") << "x" << i;
  raw << "\n";
  for (Eigen::Index i = 0; i + 1 < dim; ++i) ch << (i ? "," : "") << "y" << i;
  ch << "\n";
  for (const Vec& p : set.points) {
    for (Eigen::Index i = 0; i < dim; ++i) raw << (i ? "," : "") << format17(p(i));
    raw << "\n";
    const SpherePoint sp{p};
    const bool at_o = round_distance(sp, basepoint(sp.n())) == 0.0;
    Vec c = at_o ? Vec::Constant(dim - 1, std::numeric_limits<double>::infinity()) : chart(sp);
    for (Eigen::Index i = 0; i + 1 < dim; ++i) ch << (i ? "," : "") << (std::isfinite(c(i)) ? format17(c(i)) : "inf");
    ch << "\n";
  }
  write_atomic(path, raw.str());
  write_atomic(chart_path(path), ch.str());
}

SampledSet read_point_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
  SampledSet out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    out.points.push_back(Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  return out;
}

int run_config_file(const std::string& config_path, const std::string& out_dir, const RunFlags& flags,
                    std::string* report_path) {
  Json config;
  ScenarioResult res;
  std::string name = fs::path(config_path).stem().string();
  bool parsed = false;
  try {
    std::ifstream f(config_path);
    if (!f) throw ConfigError("cannot open config " + config_path);
    config = Json::parse(f);
    parsed = true;
  } catch (const std::exception& e) {
    res.exit_code = 2;
    res.report = Json{{"scenario", "?"},
                      {"failures", Json::array({Json{{"check", "config"}, {"detail", e.what()}}})},
                      {"passed", false},
                      {"exit_code", 2},
                      {"provenance", Json{{"tool", kToolVersion}}},
                      {"wall_clock_seconds", 0.0}};
  }
  if (parsed) {
    res = run_scenario(config, flags);
    if (config.is_object() && config.contains("name") && config.at("name").is_string())
      name = config.at("name").get<std::string>();
  }
  fs::create_directories(out_dir);
  const std::string rp = (fs::path(out_dir) / (name + ".report.json")).string();
  write_atomic(rp, res.report.dump(2) + "\n");
  for (const NamedSet& s : res.point_sets)
    write_point_csv(s.set, (fs::path(out_dir) / (name + "." + s.name + ".csv")).string());
  if (report_path) *report_path = rp;
  return res.exit_code;
}

}  // namespace confmax
