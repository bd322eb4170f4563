#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semiweyl/common.hpp"
#include "semiweyl/fit.hpp"
#include "semiweyl/schrodinger.hpp"
#include "semiweyl/symbolfam.hpp"

namespace semiweyl::experiments {

using semiweyl::fit_loglog;
using semiweyl::RemainderFit;

// h_i = h_max * ratio^i, i < count.
struct HGrid {
  double h_max = 0.2;
  double ratio = 0.774263682681127;  // 0.2 -> 0.02 in 10 points
  int count = 10;

  static HGrid between(double h_max, double h_min, int count);
  std::vector<double> values() const;
  void validate() const;
};

// b(x, xi) = b_x(x) b_xi(xi); an empty factor is the constant 1. On T^2 b_x acts on both coordinates.
struct LocalizerSpec {
  std::optional<symbolfam::BumpFunction> b_x;
  std::optional<symbolfam::BumpFunction> b_xi;
  double delta_b = 0.0;

  bool is_one() const { return !b_x && !b_xi; }
  double x_factor(double x) const { return b_x ? (*b_x)(x) : 1.0; }
  double xi_factor(double xi) const { return b_xi ? (*b_xi)(xi) : 1.0; }
};

// Integral of b (rho_h o p) over T*T^n, p = |xi|^2 + V(x).
double phase_space_integral(const LocalizerSpec& b, const symbolfam::CutoffFamily& fam,
                            const schrodinger::TorusPotential& V, double h);

// Volume of {(x, xi) : p in supp rho_h} intersected with supp b.
double support_volume(const LocalizerSpec& b, const symbolfam::CutoffFamily& fam,
                      const schrodinger::TorusPotential& V, double h);

struct TraceRow {
  double h;
  double lhs;
  double rhs;
  double remainder;
  double supp_volume;
  double slope_running;  // NaN until three points above the floor exist
  int K;
};

struct TraceFormulaResult {
  std::vector<TraceRow> rows;
  std::optional<RemainderFit> fit;
  bool at_floor = false;  // fewer than 3 remainders above the floor
};

constexpr double kRemainderFloor = 1e-10;

struct TraceOptions {
  double containment_margin = 5.0;
  int threads = 1;
};

TraceFormulaResult run_trace_formula_experiment(const schrodinger::TorusPotential& V,
                                                const symbolfam::CutoffFamily& fam, const LocalizerSpec& b,
                                                const HGrid& grid, TraceOptions opts = {});

struct LiouvilleOptions {
  std::uint64_t seed = 0x5eed;
  std::size_t samples = std::size_t(1) << 20;  // Monte Carlo points on T^2
};

// d/dE vol{p < E}: on T^1 the integral of dx / sqrt(E - V) over {V < E}; on T^2 pi |{V < E}|.
// A warning is stored when E is within 1e-6 of a critical value of V.
double liouville_volume(const schrodinger::TorusPotential& V, double E, std::string* warning = nullptr,
                        LiouvilleOptions opts = {});

struct WeylCountRow {
  double h;
  long long count;
  double scaled;
  double liouville;
  double deviation;  // (scaled - liouville) / liouville
  bool endpoint_tie = false;
};

struct WeylOptions {
  double containment_margin = 5.0;
  int threads = 1;
  int max_dim = 4096;
  LiouvilleOptions liouville;
};

// Counts of eigenvalues in [E, E + h^delta). Constant V uses exact lattice counting.
std::vector<WeylCountRow> run_weyl_count_experiment(const schrodinger::TorusPotential& V, double E, double delta,
                                                    const std::vector<double>& h_values, WeylOptions opts = {});

// Final quarter of |deviation| (at least two points) is non-increasing.
bool eventually_decreasing(const std::vector<WeylCountRow>& rows);

}  // namespace semiweyl::experiments
