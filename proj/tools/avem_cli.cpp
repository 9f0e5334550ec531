// Command-line driver: runs one adaptive experiment and writes its outputs.

#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "avem/errors.hpp"
#include "avem/io.hpp"

int main(int argc, char** argv) {
  avem::CliConfig cfg;
  std::string estimator = "heur";

  CLI::App app{"Adaptive anisotropic VEM solver for -lap u = f on the unit square"};
  app.add_option("--case", cfg.case_name, "test problem")
      ->check(CLI::IsMember({"1", "2", "3", "patch"}))
      ->capture_default_str();
  app.add_option("--order", cfg.order, "VEM order")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  app.add_option("--estimator", estimator, "estimator driving the refinement")
      ->check(CLI::IsMember({"theory", "heur", "iso"}))
      ->capture_default_str();
  app.add_option("--theta", cfg.theta, "Dorfler marking fraction in (0, 1)")
      ->capture_default_str();
  app.add_option("--tol", cfg.tol, "stop once the exact energy error is below this")
      ->capture_default_str();
  app.add_option("--max-iters", cfg.max_iters, "iteration limit")->capture_default_str();
  app.add_option("--max-dofs", cfg.max_dofs, "stop once this many DOFs are reached")
      ->capture_default_str();
  app.add_option("--grid-n", cfg.grid_n, "initial mesh is an n x n grid of squares")
      ->capture_default_str();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "recorded in the summary; the run is deterministic")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.estimator = avem::parse_estimator(estimator);
    avem::run(cfg, std::cout);
  } catch (const avem::Error& e) {
    std::cerr << "avem: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "avem: unexpected error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
