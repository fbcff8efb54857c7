#include "confmax/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Run a conformal-dynamics scenario from a JSON config"};
  std::string config, out_dir = ".";
  std::optional<std::uint64_t> seed;
  double tol_scale = 1.0;
  std::optional<int> max_exp;
  app.add_option("--config", config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out-dir", out_dir, "directory for the report and point clouds");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--tolerance-scale", tol_scale, "multiply every pass/fail tolerance")->check(CLI::PositiveNumber);
  app.add_option("--schedule-max-exp", max_exp, "override the schedule length")->check(CLI::Range(3, 40));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  confmax::RunFlags flags{seed, tol_scale, max_exp};
  try {
    std::string report;
    const int rc = confmax::run_config_file(config, out_dir, flags, &report);
    std::cout << report << (rc == 0 ? " PASS" : rc == 1 ? " FAIL" : " CONFIG-ERROR") << "\n";
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "confmax: " << e.what() << "\n";
    return 2;
  }
}
