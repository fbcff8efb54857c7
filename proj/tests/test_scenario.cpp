#include "confmax/scenario.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace confmax;

namespace {

Json jacobian_config() {
  return Json{{"schema", 1}, {"scenario", "jacobian-check"}, {"name", "jac"}, {"n", 2}, {"seed", 3}, {"samples", 5}};
}

std::string temp_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("confmax_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(p);
  return p.string();
}

}  // namespace

TEST(Scenario, JacobianConfigPasses) {
  ScenarioResult r = run_scenario(jacobian_config());
  EXPECT_EQ(r.exit_code, 0) << r.report.dump();
  EXPECT_TRUE(r.report.at("passed").get<bool>());
  EXPECT_EQ(r.report.at("provenance").at("seed"), 3);
}

TEST(Scenario, ConfigErrorsExitTwo) {
  Json c = jacobian_config();
  c["bogus"] = 1;
  EXPECT_EQ(run_scenario(c).exit_code, 2);
  c = jacobian_config();
  c["scenario"] = "nope";
  EXPECT_EQ(run_scenario(c).exit_code, 2);
  c = jacobian_config();
  c["schema"] = 2;
  EXPECT_EQ(run_scenario(c).exit_code, 2);
  c = jacobian_config();
  c["n"] = "two";
  ScenarioResult r = run_scenario(c);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.report.at("failures").empty());
}

TEST(Scenario, ToleranceScaleCanForceFailure) {
  RunFlags f;
  f.tolerance_scale = 1e-12;
  EXPECT_EQ(run_scenario(jacobian_config(), f).exit_code, 1);
}

TEST(Scenario, SeedOverrideAndDeterminism) {
  RunFlags f;
  f.seed = 99;
  ScenarioResult a = run_scenario(jacobian_config(), f), b = run_scenario(jacobian_config(), f);
  EXPECT_EQ(a.report.at("provenance").at("seed"), 99);
  EXPECT_EQ(report_fingerprint(a.report), report_fingerprint(b.report));
}

TEST(Scenario, MalformedFileWritesReport) {
  const std::string dir = temp_dir("bad");
  const std::string cfg = dir + "/broken.json";
  std::ofstream(cfg) << "{ not json";
  std::string rp;
  EXPECT_EQ(run_config_file(cfg, dir, {}, &rp), 2);
  EXPECT_TRUE(std::filesystem::exists(rp));
  std::filesystem::remove_all(dir);
}

TEST(Scenario, CsvRoundTripIsBitExact) {
  const std::string dir = temp_dir("csv");
  SampledSet s;
  s.points.push_back(Vec::Unit(3, 2));  // o, written as inf in the chart file
  Vec p(3);
  p << 0.1, -0.7, 0.3;
  s.points.push_back(p / p.norm());
  s.points.push_back(Vec(-Vec::Unit(3, 0)));
  const std::string path = dir + "/set.csv";
  write_point_csv(s, path);
  SampledSet back = read_point_csv(path);
  ASSERT_EQ(back.points.size(), s.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i)
    for (int j = 0; j < 3; ++j) EXPECT_EQ(back.points[i](j), s.points[i](j));
  std::ifstream chart(chart_path(path));
  std::string line;
  int rows = -1;
  bool saw_inf = false;
  while (std::getline(chart, line)) {
    ++rows;
    saw_inf = saw_inf || line.find("inf") != std::string::npos;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_TRUE(saw_inf);
  EXPECT_THROW(write_point_csv(SampledSet{}, dir + "/empty.csv"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST(Scenario, ShippedConfigsValidate) {
  // Cheap scenarios run fully; the heavy ones are exercised by the acceptance binary.
  for (const char* name : {"jacobian_check", "maximality_translation", "maximality_circle", "simple_divergence",
                           "cauchy_probe"}) {
    std::ifstream f(std::string(CONFMAX_CONFIG_DIR) + "/" + name + ".json");
    ASSERT_TRUE(f.good()) << name;
    ScenarioResult r = run_scenario(Json::parse(f));
    EXPECT_EQ(r.exit_code, 0) << name << " " << r.report.at("failures").dump();
  }
}

TEST(Scenario, LimitSetWritesTwoSets) {
  const std::string dir = temp_dir("lim");
  Json c{{"schema", 1},
         {"scenario", "limit-set"},
         {"name", "lim"},
         {"n", 2},
         {"depth", 5},
         {"generators",
          Json::array({Json{{"kind", "boost"}, {"direction", {1.0, 0.0}}, {"length", 3.0}},
                       Json{{"kind", "boost"}, {"direction", {0.0, 1.0}}, {"length", 3.0}}})}};
  const std::string cfg = dir + "/lim.json";
  std::ofstream(cfg) << c.dump();
  EXPECT_EQ(run_config_file(cfg, dir, {}), 0);
  EXPECT_TRUE(std::filesystem::exists(dir + "/lim.orbit.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir + "/lim.fixed.chart.csv"));
  std::filesystem::remove_all(dir);
}
