#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "semiweyl/common.hpp"
#include "semiweyl/symbolfam.hpp"

namespace semiweyl::weylquant {

// Periodic position grid x_i = -L + i dx on [-L, L), dx = 2L/N, N a power of two.
// Dual variable eta_l = h pi l / L for l = -N/2 .. N/2-1, so the dual cutoff is h pi / dx.
struct GridSpec {
  double half_width = 8.0;
  int points = 1024;

  static GridSpec make(double half_width, int points);
  double dx() const { return 2.0 * half_width / points; }
  double x(int i) const { return -half_width + i * dx(); }
  double dual_step(double h) const { return h * pi / half_width; }
  double dual_cutoff(double h) const { return h * pi / dx(); }
  int dual_points() const { return points; }
};

struct SymbolClass {
  double delta = 0.0;
  double k = 0.0;
  symbolfam::OrderFunction order{};
};

using SymbolFn = std::function<cplx(double y, double eta)>;

// Symbol samples on the half grid y_m = -L + m dx/2 (m < 2N) times the dual grid.
class SymbolOnGrid {
 public:
  // compact: the symbol is claimed to vanish near the box edges (checked on quantization).
  static SymbolOnGrid sample(const SymbolFn& s, const GridSpec& grid, double h, bool compact = true,
                             SymbolClass claimed = {});
  SymbolOnGrid(GridSpec grid, double h, CMatrix values, bool compact, SymbolClass claimed = {});

  const GridSpec& grid() const { return grid_; }
  double h() const { return h_; }
  bool compact() const { return compact_; }
  const SymbolClass& claimed() const { return claimed_; }
  const CMatrix& values() const { return values_; }
  int rows() const { return int(values_.rows()); }
  int cols() const { return int(values_.cols()); }
  double y(int m) const { return -grid_.half_width + 0.5 * m * grid_.dx(); }
  double eta(int c) const { return grid_.dual_step(h_) * (c - grid_.points / 2); }
  bool is_real() const;

 private:
  GridSpec grid_;
  double h_;
  CMatrix values_;
  bool compact_;
  SymbolClass claimed_;
};

enum class Basis { position_grid, fourier_modes };

struct OperatorMatrix {
  CMatrix entries;
  Basis basis = Basis::position_grid;
  double h = 0.0;
  bool hermitian = false;
  Eigen::Index size() const { return entries.rows(); }
};

// Where the kernel K(x_i, x_j) evaluates the symbol.
//   periodic: midpoint along the shorter arc of the circle (default; compact symbols).
//   linear: (x_i + x_j)/2 on the line, for polynomial symbols.
enum class MidpointRule { periodic, linear };

OperatorMatrix weyl_quantize_line(const SymbolOnGrid& s, MidpointRule rule = MidpointRule::periodic);

// Same, with the grid and h of s checked against the arguments.
OperatorMatrix weyl_quantize_line(const SymbolOnGrid& s, const GridSpec& grid, double h);

struct TorusSymbol {
  std::function<cplx(double x, double xi)> fn;
  bool compact_in_xi = false;
};

// A[k',k] = (1/2pi) int e^{-i(k'-k)x} s(x, h k) dx, modes |k| <= K, order k = -K..K.
OperatorMatrix quantize_torus(const TorusSymbol& s, int modes, double h);

struct TraceEstimate {
  double value = 0.0;
  double tail_estimate = 0.0;  // max |s| on the box boundary times the box area
  bool truncated = false;
};

TraceEstimate trace_via_symbol(const SymbolOnGrid& s);

double trace_norm(const OperatorMatrix& a);
double op_norm(const OperatorMatrix& a);
cplx trace(const OperatorMatrix& a);

// Rows and columns with |x_i| < fraction * L.
OperatorMatrix interior_block(const OperatorMatrix& a, const GridSpec& grid, double fraction = 0.5);
std::vector<int> interior_indices(const GridSpec& grid, double fraction = 0.5);

// Largest singular value by power iteration on A*A.
double spectral_norm(const CMatrix& a, double rel_tol = 1e-12, int max_iter = 5000);

struct NormBoundFit {
  double slope = 0.0;
  bool within_bound = false;  // slope >= -k - 0.1
  std::vector<double> h;
  std::vector<double> norms;
};

NormBoundFit op_norm_bound_check(const std::function<SymbolOnGrid(double h)>& family,
                                 const std::vector<double>& h_grid, double k, double delta);

}  // namespace semiweyl::weylquant
