#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "semiweyl/common.hpp"
#include "semiweyl/symbolfam.hpp"
#include "semiweyl/weylquant.hpp"

namespace semiweyl::schrodinger {

using Mode = std::array<int, 2>;  // second entry is 0 when n = 1

// Real potential on T^n, n in {1,2}, from finitely many Fourier coefficients.
class TorusPotential {
 public:
  TorusPotential(int dimension, std::map<Mode, cplx> coeffs);
  static TorusPotential zero(int dimension);
  static TorusPotential cosine(double amplitude);  // amplitude * cos x on T^1

  int dimension() const { return dim_; }
  const std::map<Mode, cplx>& coeffs() const { return coeffs_; }
  cplx coeff(const Mode& k) const;
  bool is_constant() const;

  double operator()(std::span<const double> x) const;
  double operator()(double x) const;  // n = 1
  std::array<double, 2> gradient(std::span<const double> x) const;

  // Sampled extrema (dense grid plus local refinement); cached at construction.
  double min() const { return min_; }
  double max() const { return max_; }
  double sup_norm() const { return std::max(std::abs(min_), std::abs(max_)); }

 private:
  int dim_;
  std::map<Mode, cplx> coeffs_;
  double min_ = 0.0, max_ = 0.0;
};

struct ContainmentCheck {
  double window_max;     // largest energy of interest
  double margin = 5.0;   // extra room above window_max + ||V||
};

struct TorusOperator {
  double h = 0.0;
  int K = 0;
  int dimension = 1;
  std::vector<Mode> modes;  // lexicographic, |k|_inf <= K
  CMatrix matrix;
  weylquant::OperatorMatrix as_operator() const;
};

// Smallest K with h^2 K^2 >= window_max + ||V|| + margin.
int K_rule(double h, double window_max, const TorusPotential& V, double margin = 5.0);

TorusOperator assemble_torus_operator(const TorusPotential& V, double h, int K,
                                      std::optional<ContainmentCheck> containment = std::nullopt);

struct SpectralDecomposition {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors;
  double h = 0.0;
};

SpectralDecomposition eigensolve(const TorusOperator& op);
SpectralDecomposition eigensolve(const CMatrix& hermitian, double h);

// U diag(f(E)) U*, f evaluated at the mean of each eigenvalue cluster (tolerance 1e-9 ||A||).
weylquant::OperatorMatrix spectral_funcalc(const SpectralDecomposition& dec, const std::function<double(double)>& f);
weylquant::OperatorMatrix spectral_funcalc(const SpectralDecomposition& dec, const symbolfam::CutoffFamily& fam,
                                           double h);

// Eigenvalue clusters as index ranges [begin, end).
std::vector<std::pair<int, int>> eigenvalue_clusters(const RVector& eigenvalues, double tol);

double hamiltonian_eval(const TorusPotential& V, std::span<const double> x, std::span<const double> xi);
double hamiltonian_eval(const TorusPotential& V, double x, double xi);  // n = 1

}  // namespace semiweyl::schrodinger
