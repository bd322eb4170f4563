#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "semiweyl/common.hpp"
#include "semiweyl/fit.hpp"
#include "semiweyl/weylquant.hpp"

namespace semiweyl::moyal {

// y^deg_y * eta^deg_eta * h^h_power
struct Monomial {
  int deg_y = 0;
  int deg_eta = 0;
  int h_power = 0;
  auto operator<=>(const Monomial&) const = default;
};

class PolySymbol {
 public:
  PolySymbol() = default;
  static PolySymbol constant(cplx c);
  static PolySymbol monomial(int deg_y, int deg_eta, cplx coef = 1.0, int h_power = 0);
  static PolySymbol y() { return monomial(1, 0); }
  static PolySymbol eta() { return monomial(0, 1); }

  const std::map<Monomial, cplx>& terms() const { return terms_; }
  void add(const Monomial& m, cplx c);

  PolySymbol operator+(const PolySymbol& o) const;
  PolySymbol operator-(const PolySymbol& o) const;
  PolySymbol operator*(const PolySymbol& o) const;
  PolySymbol operator*(cplx c) const;

  PolySymbol d_y(int n = 1) const;
  PolySymbol d_eta(int n = 1) const;

  cplx operator()(double y, double eta, double h) const;
  // Substitute a numeric h, leaving h_power = 0 everywhere.
  PolySymbol at_h(double h) const;

  int total_degree() const;  // in (y, eta); -1 for the zero symbol
  int max_h_power() const;
  bool is_zero(double tol = 0.0) const;
  double max_abs_diff(const PolySymbol& o) const;  // coefficientwise
  std::string str() const;

 private:
  std::map<Monomial, cplx> terms_;
};

// k-th term of the composition expansion with h kept symbolic (h_power raised by k).
PolySymbol moyal_term(const PolySymbol& s1, const PolySymbol& s2, int k);
PolySymbol moyal_term(const PolySymbol& s1, const PolySymbol& s2, int k, double h);
PolySymbol moyal_compose(const PolySymbol& s1, const PolySymbol& s2, int K);
PolySymbol moyal_compose(const PolySymbol& s1, const PolySymbol& s2, int K, double h);

// Quantize a polynomial with the unwrapped midpoint rule (polynomials are not periodic).
weylquant::OperatorMatrix quantize_poly(const PolySymbol& s, const weylquant::GridSpec& grid, double h);

// Relative error of Op(s1)Op(s2)v against Op(s1 # s2)v on interior rows, stacked over a fixed
// set of Gaussian wave packets v. The expansion is taken to its exact termination order.
double polynomial_composition_residual(const PolySymbol& s1, const PolySymbol& s2,
                                       const weylquant::GridSpec& grid, double h);

// Spectral derivative d_y^a d_eta^b of the samples.
CMatrix spectral_derivative(const weylquant::SymbolOnGrid& s, int a, int b);

weylquant::SymbolOnGrid moyal_term_sampled(const weylquant::SymbolOnGrid& s1,
                                           const weylquant::SymbolOnGrid& s2, int k);
weylquant::SymbolOnGrid moyal_compose_sampled(const weylquant::SymbolOnGrid& s1,
                                              const weylquant::SymbolOnGrid& s2, int K);

struct CompositionFit {
  int K = 0;
  std::vector<double> h;
  std::vector<double> residual;
  std::vector<bool> at_floor;  // residual below 1e-13 * ||Op(s1)Op(s2)||, left out of the fit
  double slope = 0.0;
  bool fitted = false;
  RemainderFit fit;
};

// One fit per requested K; the matrix product is shared across K at each h.
std::vector<CompositionFit> verify_composition(const weylquant::SymbolFn& s1, const weylquant::SymbolFn& s2,
                                               const std::vector<int>& Ks, const std::vector<double>& h_grid,
                                               const weylquant::GridSpec& grid);

CompositionFit verify_composition(const weylquant::SymbolFn& s1, const weylquant::SymbolFn& s2, int K,
                                  const std::vector<double>& h_grid, const weylquant::GridSpec& grid);

}  // namespace semiweyl::moyal
