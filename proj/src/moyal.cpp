#include "semiweyl/moyal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/FFT>

namespace semiweyl::moyal {

using weylquant::GridSpec;
using weylquant::OperatorMatrix;
using weylquant::SymbolOnGrid;

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// 1-D spectral derivative multipliers (i kappa)^order for a length-n periodic FFT of
// spacing step. Nyquist mode dropped for odd orders.
std::vector<cplx> spectral_multiplier(int n, double step, int order) {
  std::vector<cplx> m(n, cplx(1.0));
  if (order == 0) return m;
  for (int q = 0; q < n; ++q) {
    int f = q < n / 2 ? q : q - n;
    double kappa = 2.0 * pi * f / (n * step);
    if (q == n / 2 && order % 2 == 1) kappa = 0.0;
    m[q] = std::pow(cplx(0.0, kappa), order);
  }
  return m;
}

// Forward 2-D FFT of the sample array (rows along y, columns along eta).
CMatrix fft2(const CMatrix& v, bool inverse) {
  Eigen::FFT<double> fft;
  CMatrix out(v.rows(), v.cols());
  std::vector<cplx> in, res;
  CMatrix tmp(v.rows(), v.cols());
  in.resize(v.rows());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (Eigen::Index r = 0; r < v.rows(); ++r) in[r] = v(r, c);
    inverse ? fft.inv(res, in) : fft.fwd(res, in);
    for (Eigen::Index r = 0; r < v.rows(); ++r) tmp(r, c) = res[r];
  }
  in.resize(v.cols());
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) in[c] = tmp(r, c);
    inverse ? fft.inv(res, in) : fft.fwd(res, in);
    for (Eigen::Index c = 0; c < v.cols(); ++c) out(r, c) = res[c];
  }
  return out;
}

CMatrix derivative_from_spectrum(const CMatrix& spec, const SymbolOnGrid& s, int a, int b) {
  const auto my = spectral_multiplier(int(spec.rows()), 0.5 * s.grid().dx(), a);
  const auto me = spectral_multiplier(int(spec.cols()), s.grid().dual_step(s.h()), b);
  CMatrix w(spec.rows(), spec.cols());
  for (Eigen::Index c = 0; c < spec.cols(); ++c)
    for (Eigen::Index r = 0; r < spec.rows(); ++r) w(r, c) = spec(r, c) * my[r] * me[c];
  return fft2(w, true);
}

void check_compatible(const SymbolOnGrid& s1, const SymbolOnGrid& s2) {
  if (s1.grid().points != s2.grid().points || s1.grid().half_width != s2.grid().half_width || s1.h() != s2.h())
    throw DomainError("sampled symbols must share grid and h");
}

// Term k from precomputed derivative tables d1[(a,b)], d2[(a,b)].
CMatrix term_from_tables(const std::map<std::pair<int, int>, CMatrix>& d1,
                         const std::map<std::pair<int, int>, CMatrix>& d2, int k, double h) {
  const cplx pref = std::pow(cplx(0.0, 0.5 * h), k) / factorial(k);
  CMatrix acc = CMatrix::Zero(d1.begin()->second.rows(), d1.begin()->second.cols());
  for (int j = 0; j <= k; ++j) {
    const double c = binom(k, j) * (((k - j) % 2) ? -1.0 : 1.0);
    // d_x^j d_xi^(k-j) s1 * d_eta^j d_y^(k-j) s2
    acc += c * d1.at({j, k - j}).cwiseProduct(d2.at({k - j, j}));
  }
  return pref * acc;
}

// Constant symbols (the unit) are resolved trivially; anything else must vanish at the box edges.
SymbolOnGrid sample_checked(const weylquant::SymbolFn& fn, const GridSpec& grid, double h) {
  SymbolOnGrid g = SymbolOnGrid::sample(fn, grid, h, false);
  const CMatrix& v = g.values();
  if ((v.array() == v(0, 0)).all()) return g;
  return SymbolOnGrid(grid, h, v, true);
}

std::map<std::pair<int, int>, CMatrix> derivative_table(const SymbolOnGrid& s, int K) {
  std::map<std::pair<int, int>, CMatrix> t;
  const CMatrix spec = fft2(s.values(), false);
  for (int k = 0; k <= K; ++k)
    for (int a = 0; a <= k; ++a) t[{a, k - a}] = k == 0 ? s.values() : derivative_from_spectrum(spec, s, a, k - a);
  return t;
}

}  // namespace

PolySymbol PolySymbol::constant(cplx c) { return monomial(0, 0, c); }

PolySymbol PolySymbol::monomial(int deg_y, int deg_eta, cplx coef, int h_power) {
  if (deg_y < 0 || deg_eta < 0 || h_power < 0) throw DomainError("monomial degrees must be nonnegative");
  PolySymbol p;
  p.add({deg_y, deg_eta, h_power}, coef);
  return p;
}

void PolySymbol::add(const Monomial& m, cplx c) {
  if (c == cplx(0.0)) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
    return;
  }
  it->second += c;
  if (it->second == cplx(0.0)) terms_.erase(it);
}

PolySymbol PolySymbol::operator+(const PolySymbol& o) const {
  PolySymbol r = *this;
  for (auto& [m, c] : o.terms_) r.add(m, c);
  return r;
}

PolySymbol PolySymbol::operator-(const PolySymbol& o) const { return *this + o * cplx(-1.0); }

PolySymbol PolySymbol::operator*(const PolySymbol& o) const {
  PolySymbol r;
  for (auto& [m1, c1] : terms_)
    for (auto& [m2, c2] : o.terms_)
      r.add({m1.deg_y + m2.deg_y, m1.deg_eta + m2.deg_eta, m1.h_power + m2.h_power}, c1 * c2);
  return r;
}

PolySymbol PolySymbol::operator*(cplx c) const {
  PolySymbol r;
  for (auto& [m, v] : terms_) r.add(m, v * c);
  return r;
}

PolySymbol PolySymbol::d_y(int n) const {
  PolySymbol r;
  for (auto& [m, c] : terms_) {
    if (m.deg_y < n) continue;
    double f = 1.0;
    for (int i = 0; i < n; ++i) f *= m.deg_y - i;
    r.add({m.deg_y - n, m.deg_eta, m.h_power}, c * f);
  }
  return r;
}

PolySymbol PolySymbol::d_eta(int n) const {
  PolySymbol r;
  for (auto& [m, c] : terms_) {
    if (m.deg_eta < n) continue;
    double f = 1.0;
    for (int i = 0; i < n; ++i) f *= m.deg_eta - i;
    r.add({m.deg_y, m.deg_eta - n, m.h_power}, c * f);
  }
  return r;
}

cplx PolySymbol::operator()(double y, double eta, double h) const {
  cplx s = 0.0;
  for (auto& [m, c] : terms_) s += c * std::pow(y, m.deg_y) * std::pow(eta, m.deg_eta) * std::pow(h, m.h_power);
  return s;
}

PolySymbol PolySymbol::at_h(double h) const {
  PolySymbol r;
  for (auto& [m, c] : terms_) r.add({m.deg_y, m.deg_eta, 0}, c * std::pow(h, m.h_power));
  return r;
}

int PolySymbol::total_degree() const {
  int d = -1;
  for (auto& [m, c] : terms_) d = std::max(d, m.deg_y + m.deg_eta);
  return d;
}

int PolySymbol::max_h_power() const {
  int d = 0;
  for (auto& [m, c] : terms_) d = std::max(d, m.h_power);
  return d;
}

bool PolySymbol::is_zero(double tol) const {
  for (auto& [m, c] : terms_)
    if (std::abs(c) > tol) return false;
  return true;
}

double PolySymbol::max_abs_diff(const PolySymbol& o) const {
  double worst = 0.0;
  for (auto& [m, c] : (*this - o).terms_) worst = std::max(worst, std::abs(c));
  return worst;
}

std::string PolySymbol::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (auto& [m, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    if (m.deg_y) os << " y^" << m.deg_y;
    if (m.deg_eta) os << " eta^" << m.deg_eta;
    if (m.h_power) os << " h^" << m.h_power;
  }
  return os.str();
}

PolySymbol moyal_term(const PolySymbol& s1, const PolySymbol& s2, int k) {
  if (k < 0) throw DomainError("expansion order k must be nonnegative");
  // (i h / 2)^k / k! * sum_j C(k,j) (-1)^(k-j) d_x^j d_xi^(k-j) s1 * d_eta^j d_y^(k-j) s2
  PolySymbol acc;
  for (int j = 0; j <= k; ++j) {
    const double c = binom(k, j) * (((k - j) % 2) ? -1.0 : 1.0);
    acc = acc + (s1.d_y(j).d_eta(k - j) * s2.d_eta(j).d_y(k - j)) * cplx(c);
  }
  const cplx pref = std::pow(cplx(0.0, 0.5), k) / factorial(k);
  return acc * PolySymbol::monomial(0, 0, pref, k);
}

PolySymbol moyal_term(const PolySymbol& s1, const PolySymbol& s2, int k, double h) {
  return moyal_term(s1, s2, k).at_h(h);
}

PolySymbol moyal_compose(const PolySymbol& s1, const PolySymbol& s2, int K) {
  if (K < 0) throw DomainError("expansion order K must be nonnegative");
  PolySymbol acc;
  for (int k = 0; k <= K; ++k) acc = acc + moyal_term(s1, s2, k);
  return acc;
}

PolySymbol moyal_compose(const PolySymbol& s1, const PolySymbol& s2, int K, double h) {
  return moyal_compose(s1, s2, K).at_h(h);
}

OperatorMatrix quantize_poly(const PolySymbol& s, const GridSpec& grid, double h) {
  const PolySymbol sh = s.at_h(h);
  auto sym = SymbolOnGrid::sample([&](double y, double eta) { return sh(y, eta, 0.0); }, grid, h, false);
  return weylquant::weyl_quantize_line(sym, weylquant::MidpointRule::linear);
}

double polynomial_composition_residual(const PolySymbol& s1, const PolySymbol& s2, const GridSpec& grid,
                                       double h) {
  const int K = std::max(0, std::min(s1.total_degree(), s2.total_degree()));
  const OperatorMatrix a1 = quantize_poly(s1, grid, h);
  const OperatorMatrix a2 = quantize_poly(s2, grid, h);
  const OperatorMatrix ac = quantize_poly(moyal_compose(s1, s2, K), grid, h);

  const std::vector<int> idx = weylquant::interior_indices(grid);
  double num = 0.0, den = 0.0;
  for (double x0 : {-1.0, 0.0, 1.0})
    for (double omega : {0.0, 1.0, -2.5}) {
      CVector v(grid.points);
      for (int i = 0; i < grid.points; ++i) {
        const double x = grid.x(i);
        v(i) = std::exp(-(x - x0) * (x - x0)) * std::polar(1.0, omega * x);
      }
      const CVector lhs = a1.entries * (a2.entries * v);
      const CVector rhs = ac.entries * v;
      for (int i : idx) {
        num += std::norm(lhs(i) - rhs(i));
        den += std::norm(rhs(i));
      }
    }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

CMatrix spectral_derivative(const SymbolOnGrid& s, int a, int b) {
  if (a < 0 || b < 0) throw DomainError("derivative orders must be nonnegative");
  if (a == 0 && b == 0) return s.values();
  return derivative_from_spectrum(fft2(s.values(), false), s, a, b);
}

SymbolOnGrid moyal_term_sampled(const SymbolOnGrid& s1, const SymbolOnGrid& s2, int k) {
  check_compatible(s1, s2);
  if (k < 0) throw DomainError("expansion order k must be nonnegative");
  const auto d1 = derivative_table(s1, k), d2 = derivative_table(s2, k);
  return SymbolOnGrid(s1.grid(), s1.h(), term_from_tables(d1, d2, k, s1.h()), true);
}

SymbolOnGrid moyal_compose_sampled(const SymbolOnGrid& s1, const SymbolOnGrid& s2, int K) {
  check_compatible(s1, s2);
  if (K < 0) throw DomainError("expansion order K must be nonnegative");
  const auto d1 = derivative_table(s1, K), d2 = derivative_table(s2, K);
  CMatrix acc = term_from_tables(d1, d2, 0, s1.h());
  for (int k = 1; k <= K; ++k) acc += term_from_tables(d1, d2, k, s1.h());
  return SymbolOnGrid(s1.grid(), s1.h(), std::move(acc), true);
}

std::vector<CompositionFit> verify_composition(const weylquant::SymbolFn& s1, const weylquant::SymbolFn& s2,
                                               const std::vector<int>& Ks, const std::vector<double>& h_grid,
                                               const GridSpec& grid) {
  if (Ks.empty()) throw DomainError("no expansion orders requested");
  const int K_max = *std::max_element(Ks.begin(), Ks.end());
  if (*std::min_element(Ks.begin(), Ks.end()) < 0 || K_max > 3)
    throw DomainError("expansion order must lie in [0, 3]");

  std::vector<CompositionFit> fits(Ks.size());
  for (std::size_t q = 0; q < Ks.size(); ++q) fits[q].K = Ks[q];

  for (double h : h_grid) {
    const SymbolOnGrid g1 = sample_checked(s1, grid, h);
    const SymbolOnGrid g2 = sample_checked(s2, grid, h);
    const OperatorMatrix a1 = weylquant::weyl_quantize_line(g1);
    const OperatorMatrix a2 = weylquant::weyl_quantize_line(g2);
    CMatrix product(grid.points, grid.points);
    product.noalias() = a1.entries * a2.entries;
    const double scale = weylquant::spectral_norm(product, 1e-10);

    const auto d1 = derivative_table(g1, K_max), d2 = derivative_table(g2, K_max);
    std::vector<CMatrix> partial;
    CMatrix acc = CMatrix::Zero(2 * grid.points, grid.points);
    for (int k = 0; k <= K_max; ++k) {
      acc += term_from_tables(d1, d2, k, h);
      partial.push_back(acc);
    }
    for (auto& f : fits) {
      const SymbolOnGrid comp(grid, h, partial[f.K], g1.compact() && g2.compact());
      const OperatorMatrix ac = weylquant::weyl_quantize_line(comp);
      const double r = weylquant::spectral_norm(product - ac.entries, 1e-10);
      f.h.push_back(h);
      f.residual.push_back(r);
      f.at_floor.push_back(r < 1e-13 * scale);
    }
  }

  for (auto& f : fits) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < f.h.size(); ++i)
      if (!f.at_floor[i]) {
        xs.push_back(f.h[i]);
        ys.push_back(f.residual[i]);
      }
    if (xs.size() >= 3) {
      f.fit = fit_loglog(xs, ys);
      f.slope = f.fit.slope;
      f.fitted = true;
    }
  }
  return fits;
}

CompositionFit verify_composition(const weylquant::SymbolFn& s1, const weylquant::SymbolFn& s2, int K,
                                  const std::vector<double>& h_grid, const GridSpec& grid) {
  return verify_composition(s1, s2, std::vector<int>{K}, h_grid, grid).front();
}

}  // namespace semiweyl::moyal
