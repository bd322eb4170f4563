#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "semiweyl/cli.hpp"

namespace sc = semiweyl::cli;

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical Weyl-law and functional-calculus experiments"};
  app.set_version_flag("--version", sc::version_string());
  std::string experiment, config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("experiment", experiment,
                 "trace_formula | weyl_law | funcalc_check | moyal_check | extension_check | class_check")
      ->required();
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the Monte Carlo seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  auto fail = [](const std::string& msg) {
    std::cerr << "error kind=config message=\"" << msg << "\"\n";
    return sc::exit_code_for(semiweyl::ErrorKind::config);
  };
  if (!sc::experiment_from_name(experiment)) return fail("unknown experiment '" + experiment + "'");

  std::ifstream in(config_path);
  if (!in) return fail("cannot read " + config_path);
  std::stringstream text;
  text << in.rdbuf();

  sc::ExperimentConfig cfg;
  try {
    cfg = sc::parse_config(text.str());
  } catch (const semiweyl::Error& e) {
    return fail(config_path + ": " + e.what());
  }
  if (sc::experiment_name(cfg.experiment) != experiment)
    return fail("config selects experiment '" + std::string(sc::experiment_name(cfg.experiment)) +
                "' but the command line asks for '" + experiment + "'");
  if (seed) cfg.seed = *seed;
  if (threads) cfg.threads = *threads;
  return sc::run(cfg, out_dir, std::cout, std::cerr);
}
