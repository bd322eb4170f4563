#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "semiweyl/common.hpp"
#include "semiweyl/symbolfam.hpp"
#include "semiweyl/weylquant.hpp"

namespace semiweyl::hsfunc {

// Uniform samples f(x0 + i dx), i < values.size(); f is taken to vanish outside.
struct SampledFunction {
  double x0 = 0.0;
  double dx = 1.0;
  std::vector<double> values;

  static SampledFunction sample(const std::function<double(double)>& f, double a, double b, int n);
  Interval window() const { return {x0, x0 + dx * double(values.size() - 1)}; }
  double x(std::size_t i) const { return x0 + dx * double(i); }
};

struct ExtensionOptions {
  double plateau_margin = 1.0;    // psi == 1 this far beyond supp f
  double transition_width = 2.0;  // psi falls to 0 over this distance
};

// Cutoff in Im z: 1 on [-1,1], supported in [-3,3].
symbolfam::BumpFunction default_extension_cutoff();

// f~(x+iy) = psi(x) chi(y) / (2 pi) int e^{i(x+iy) xi} chi(y xi) F(xi) dxi, F the Fourier transform of f.
class AlmostAnalyticExtension {
 public:
  AlmostAnalyticExtension(const SampledFunction& f, int order, symbolfam::BumpFunction chi, ExtensionOptions opts);

  int order() const { return order_; }
  const symbolfam::BumpFunction& chi() const { return chi_; }
  const symbolfam::BumpFunction& psi() const { return psi_; }
  Interval f_support() const { return f_support_; }
  Interval support_x() const { return psi_.support(); }
  double support_y() const { return std::max(std::abs(chi_.support().lo), std::abs(chi_.support().hi)); }
  bool is_zero() const { return zero_; }
  std::size_t dual_points() const { return xi_.size(); }

  cplx value(double x, double y) const;
  cplx dbar(double x, double y) const;
  // Rows follow xs, columns follow ys.
  CMatrix value_grid(const std::vector<double>& xs, const std::vector<double>& ys) const;
  CMatrix dbar_grid(const std::vector<double>& xs, const std::vector<double>& ys) const;

 private:
  void integrals(const std::vector<double>& xs, const std::vector<double>& ys, CMatrix& I, CMatrix* J) const;

  int order_;
  symbolfam::BumpFunction chi_;
  symbolfam::BumpFunction psi_;
  Interval f_support_;
  double center_ = 0.0;
  bool zero_ = false;
  std::vector<double> xi_;
  std::vector<cplx> weights_;  // dxi * F(xi) relative to center_
};

AlmostAnalyticExtension build_extension(const SampledFunction& f, int order,
                                        const symbolfam::BumpFunction& chi = default_extension_cutoff(),
                                        ExtensionOptions opts = {});

struct ShellSup {
  double y;
  double sup_dbar;
};

// For each shell value y_k, sup of |dbar f~(x +- i y)| over a grid of supp psi and |y| in [y_k/2, y_k].
std::vector<ShellSup> dbar_bound_profile(const AlmostAnalyticExtension& ext, const std::vector<double>& shells);

// Dyadic shells 2^-lo_exp, ..., 2^-hi_exp (descending).
std::vector<double> dyadic_shells(int lo_exp, int hi_exp);

// Tensor midpoint rule on [x_min, x_max] x [-y_max, y_max]. With grading p > 1 the y nodes are
// midpoints in u of y = y_max sign(u) |u|^p, clustering toward the real axis; weights are cell widths.
struct ComplexQuadrature {
  double x_min = 0, x_max = 0, y_max = 0;
  int qx = 0, qy = 0;
  double grading = 1.0;
  std::vector<double> x_nodes, x_weights, y_nodes, y_weights;

  static ComplexQuadrature midpoint(double x_min, double x_max, double y_max, int qx, int qy, double grading = 2.0);
  static ComplexQuadrature covering(const AlmostAnalyticExtension& ext, int qx, int qy, double grading = 2.0);
  std::size_t node_count() const { return x_nodes.size() * y_nodes.size(); }
  double area() const { return (x_max - x_min) * 2.0 * y_max; }
};

struct HsOptions {
  double eps_y = 1e-6;  // nodes with |Im z| < eps_y are skipped
  int threads = 1;
};

// (-1/pi) sum_q w_q dbar f~(z_q) (z_q - P)^{-1}, one dense LU per node pair z, conj(z).
weylquant::OperatorMatrix hs_funcalc(const weylquant::OperatorMatrix& P, const AlmostAnalyticExtension& ext,
                                     const ComplexQuadrature& quad, HsOptions opts = {});
weylquant::OperatorMatrix hs_funcalc(const weylquant::OperatorMatrix& P, const SampledFunction& f, int order,
                                     const ComplexQuadrature& quad, HsOptions opts = {});

struct ResolventNorm {
  cplx z;
  double norm;
};

std::vector<ResolventNorm> resolvent_norm_probe(const weylquant::OperatorMatrix& P, const std::vector<cplx>& zs);

}  // namespace semiweyl::hsfunc
