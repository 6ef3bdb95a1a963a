#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adgm/config.hpp"
#include "adgm/runner.hpp"

namespace {

/// ADGM_THREADS caps worker threads (default 1). Every algorithm in the
/// library is deterministic regardless of the cap; we validate the value and
/// keep the effective parallelism at the sequential baseline.
int thread_cap() {
  const char* env = std::getenv("ADGM_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) {
    std::cerr << "ADGM_THREADS must be a positive integer\n";
    std::exit(adgm::exit_config);
  }
  return (int)v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive DG Poisson solver"};
  app.require_subcommand(1);
  thread_cap();

  std::string config_path, suite, dir, mesh_name, mesh_out;
  bool gnuplot = false;

  CLI::App* run = app.add_subcommand("run", "Run a configured adaptive solve");
  run->add_option("config", config_path, "Configuration file")->required();
  run->add_flag("--gnuplot", gnuplot, "Also write whitespace-separated run.dat");

  CLI::App* verify = app.add_subcommand("verify", "Run a property suite");
  verify->add_option("suite", suite, "mesh|forms|estimator|interp|analysis|all")->required();

  CLI::App* classify = app.add_subcommand("classify", "Classify a recorded run directory");
  classify->add_option("dir", dir, "Run directory with recorded meshes")->required();

  CLI::App* mesh = app.add_subcommand("mesh", "Mesh utilities");
  CLI::App* gen = mesh->add_subcommand("gen", "Write a built-in initial mesh");
  gen->add_option("name", mesh_name, "unit-square|l-shape")->required();
  gen->add_option("out", mesh_out, "Output path")->required();
  mesh->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      adgm::Config cfg;
      try {
        cfg = adgm::parse_config_file(config_path);
      } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return adgm::exit_config;
      }
      return adgm::run_command(cfg, gnuplot, std::cout);
    }
    if (verify->parsed()) return adgm::verify_command(suite, std::cout);
    if (classify->parsed()) return adgm::classify_command(dir, std::cout, std::cerr);
    if (gen->parsed()) return adgm::mesh_gen_command(mesh_name, mesh_out, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return adgm::exit_config;
  }
  return adgm::exit_ok;
}
