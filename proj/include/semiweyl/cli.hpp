#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semiweyl/common.hpp"
#include "semiweyl/schrodinger.hpp"

namespace semiweyl::cli {

enum class Experiment { trace_formula, weyl_law, funcalc_check, moyal_check, extension_check, class_check };

const char* experiment_name(Experiment e);
std::optional<Experiment> experiment_from_name(const std::string& name);

// A standard bump on [lo, hi], or nothing (the constant 1).
struct BumpSpec {
  bool present = false;
  double lo = 0.0, hi = 0.0;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::trace_formula;

  // potential: free_torus_1d | free_torus_2d | half_cos | two_cos | custom
  std::string potential = "half_cos";
  int dimension = 1;                                   // custom only
  std::map<schrodinger::Mode, cplx> coefficients;      // custom only

  double E = 1.0;
  double delta = 0.0;
  double c = 1.0;
  std::string window_base = "standard";  // standard | plateau

  double h_max = 0.2;
  double h_min = 0.02;
  int h_count = 10;
  std::vector<double> h_values;  // overrides the geometric grid when non-empty

  BumpSpec localizer_x, localizer_xi;

  int order = 8;
  int quad_x = 200, quad_y = 200;
  double grading = 2.0;
  double eps_y = 1e-6;
  std::string op = "torus";  // torus | diag123
  int modes = 0;             // 0: smallest K passing the containment check
  double containment_margin = 5.0;

  int grid_points = 1024;
  double half_width = 8.0;
  std::vector<int> moyal_orders{0, 1, 2};

  int shell_lo_exp = 1, shell_hi_exp = 7;
  int j_max = 4;

  std::uint64_t samples = std::uint64_t(1) << 20;
  std::uint64_t seed = 0x5eed;
  int threads = 1;
};

// Line-oriented `key = value`, `#` comments. Throws ConfigError naming the line and key.
ExperimentConfig parse_config(const std::string& text);

// Effective configuration in the same format; parse_config(echo_config(c)) reproduces c.
std::string echo_config(const ExperimentConfig& cfg);

schrodinger::TorusPotential make_potential(const ExperimentConfig& cfg);
std::vector<double> h_list(const ExperimentConfig& cfg);

struct CsvTable {
  std::string header;
  std::vector<std::vector<std::string>> rows;
  std::string str() const;
};

std::string format_number(double v);  // 17 significant digits

// Runs the experiment and returns its table; summary lines go to log.
CsvTable run_experiment(const ExperimentConfig& cfg, std::ostream& log);

int exit_code_for(ErrorKind kind);

// Writes <experiment>.csv and <experiment>.meta under out_dir. Errors become one
// `error kind=<kind> message="..."` line on err and a nonzero exit status.
int run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);

std::string version_string();

}  // namespace semiweyl::cli
