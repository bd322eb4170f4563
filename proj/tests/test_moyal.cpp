#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "semiweyl/moyal.hpp"

using namespace semiweyl;
using namespace semiweyl::moyal;
using weylquant::GridSpec;
using weylquant::SymbolOnGrid;

namespace {

const GridSpec kGrid = GridSpec::make(8.0, 1024);

CVector gaussian(const GridSpec& g) {
  CVector v(g.points);
  for (int i = 0; i < g.points; ++i) v(i) = std::exp(-g.x(i) * g.x(i) / 2);
  return v;
}

double interior_rel(const CVector& a, const CVector& b, const GridSpec& g) {
  double num = 0, den = 0;
  for (int i : weylquant::interior_indices(g)) {
    num += std::norm(a(i) - b(i));
    den += std::norm(b(i));
  }
  return std::sqrt(num / den);
}

PolySymbol random_poly(std::mt19937_64& rng, int max_deg) {
  std::uniform_real_distribution<double> u(-1, 1);
  PolySymbol p;
  for (int a = 0; a <= max_deg; ++a)
    for (int b = 0; a + b <= max_deg; ++b) p.add({a, b, 0}, cplx(u(rng), u(rng)));
  return p;
}

}  // namespace

TEST_CASE("polynomial arithmetic and derivatives") {
  auto p = PolySymbol::y() * PolySymbol::y() * PolySymbol::eta() + PolySymbol::constant(2.0);
  CHECK(p.total_degree() == 3);
  CHECK(p(2.0, 3.0, 0.1) == cplx(14.0));
  CHECK(p.d_y()(2.0, 3.0, 0.1) == cplx(12.0));
  CHECK(p.d_eta()(2.0, 3.0, 0.1) == cplx(4.0));
  CHECK(p.d_y(3).is_zero());
  CHECK((p - p).is_zero());
  CHECK(PolySymbol().total_degree() == -1);
}

TEST_CASE("k = 0 term is the pointwise product") {
  std::mt19937_64 rng(1);
  auto s1 = random_poly(rng, 3), s2 = random_poly(rng, 2);
  CHECK(moyal_term(s1, s2, 0).max_abs_diff(s1 * s2) == 0.0);
  CHECK(moyal_compose(s1, s2, 0).max_abs_diff(s1 * s2) == 0.0);
}

TEST_CASE("eta composed with y: the first term is -ih/2, pinned by the matrix oracle") {
  const double h = 0.1;
  auto t1 = moyal_term(PolySymbol::eta(), PolySymbol::y(), 1, h);
  REQUIRE(t1.terms().size() == 1);
  const cplx c = t1.terms().begin()->second;
  CHECK(t1.total_degree() == 0);
  CHECK(std::abs(c - cplx(0, -h / 2)) < 1e-15);

  // oracle: Op(eta)Op(y)v - Op(y eta)v = t v on the interior, solve for t
  auto a_eta = quantize_poly(PolySymbol::eta(), kGrid, h);
  auto a_y = quantize_poly(PolySymbol::y(), kGrid, h);
  auto a_yeta = quantize_poly(PolySymbol::y() * PolySymbol::eta(), kGrid, h);
  CVector v = gaussian(kGrid);
  CVector diff = a_eta.entries * (a_y.entries * v) - a_yeta.entries * v;
  cplx num = 0, den = 0;
  for (int i : weylquant::interior_indices(kGrid)) {
    num += std::conj(v(i)) * diff(i);
    den += std::conj(v(i)) * v(i);
  }
  const cplx t = num / den;
  CHECK(std::abs(t - c) < 1e-10);
}

TEST_CASE("first term vanishes on equal symbols") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_poly(rng, 3);
    CHECK(moyal_term(s, s, 1).is_zero(1e-14));
  }
}

TEST_CASE("eta^2 composed with y terminates at k = 1") {
  const double h = 0.2;
  auto s1 = PolySymbol::eta() * PolySymbol::eta(), s2 = PolySymbol::y();
  CHECK(moyal_term(s1, s2, 2).is_zero());
  auto comp = moyal_compose(s1, s2, 5, h);
  auto expect = PolySymbol::monomial(1, 2) + PolySymbol::monomial(0, 1, cplx(0, -h));
  CHECK(comp.max_abs_diff(expect) < 1e-15);

  // Op(eta^2)Op(y)v = -h^2 (x v)'' = -h^2 (x^3 - 3x) v for the unit Gaussian
  CVector v = gaussian(kGrid), want(kGrid.points);
  for (int i = 0; i < kGrid.points; ++i) {
    double x = kGrid.x(i);
    want(i) = -h * h * (x * x * x - 3 * x) * v(i);
  }
  CHECK(interior_rel(quantize_poly(comp, kGrid, h).entries * v, want, kGrid) < 1e-9);
}

TEST_CASE("the unit symbol leaves the other factor unchanged") {
  std::mt19937_64 rng(4);
  auto s = random_poly(rng, 3);
  for (int K : {0, 1, 2, 4}) {
    CHECK(moyal_compose(PolySymbol::constant(1.0), s, K).max_abs_diff(s) == 0.0);
    CHECK(moyal_compose(s, PolySymbol::constant(1.0), K).max_abs_diff(s) == 0.0);
  }
}

TEST_CASE("property: degree bookkeeping") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto s1 = random_poly(rng, 1 + trial % 4), s2 = random_poly(rng, 1 + (trial / 4) % 3);
    for (int k = 0; k <= 4; ++k) {
      auto t = moyal_term(s1, s2, k);
      if (t.is_zero()) continue;
      CHECK(t.total_degree() <= s1.total_degree() + s2.total_degree() - 2 * k);
      for (auto& [m, c] : t.terms()) CHECK(m.h_power == k);
    }
    const int stop = std::min(s1.total_degree(), s2.total_degree());
    CHECK(moyal_term(s1, s2, stop + 1).is_zero());
  }
}

TEST_CASE("property: exact termination holds at the matrix level") {
  std::mt19937_64 rng(6);
  for (double h : {0.05, 0.2, 0.5}) {
    for (int trial = 0; trial < 3; ++trial) {
      auto s1 = random_poly(rng, 2), s2 = random_poly(rng, 2);
      CHECK(polynomial_composition_residual(s1, s2, kGrid, h) <= 1e-8);
    }
  }
  auto cubic = PolySymbol::monomial(3, 0) + PolySymbol::monomial(0, 2);
  auto quad = PolySymbol::monomial(1, 1) + PolySymbol::monomial(0, 2, 0.5);
  CHECK(polynomial_composition_residual(cubic, quad, kGrid, 0.1) <= 1e-8);
}

TEST_CASE("property: commutator is twice the odd terms") {
  std::mt19937_64 rng(7);
  const double h = 0.1;
  for (int trial = 0; trial < 3; ++trial) {
    auto s1 = random_poly(rng, 2), s2 = random_poly(rng, 2);
    PolySymbol odd;
    for (int k = 1; k <= 2; k += 2) odd = odd + moyal_term(s1, s2, k);
    auto a1 = quantize_poly(s1, kGrid, h), a2 = quantize_poly(s2, kGrid, h);
    auto ac = quantize_poly(odd * cplx(2.0), kGrid, h);
    CVector v = gaussian(kGrid);
    CVector lhs = a1.entries * (a2.entries * v) - a2.entries * (a1.entries * v);
    CHECK(interior_rel(lhs, ac.entries * v, kGrid) < 1e-8);
  }
}

TEST_CASE("spectral derivatives of sampled Gaussians") {
  const double h = 0.2;
  auto s = SymbolOnGrid::sample([](double y, double e) { return cplx(std::exp(-y * y - e * e)); }, kGrid, h);
  auto dy = spectral_derivative(s, 1, 0);
  auto dyde = spectral_derivative(s, 1, 1);
  auto de2 = spectral_derivative(s, 0, 2);
  double worst = 0;
  for (int m = 0; m < s.rows(); m += 7)
    for (int c = 0; c < s.cols(); c += 5) {
      double y = s.y(m), e = s.eta(c), g = std::exp(-y * y - e * e);
      worst = std::max(worst, std::abs(dy(m, c) - (-2 * y * g)));
      worst = std::max(worst, std::abs(dyde(m, c) - (4 * y * e * g)));
      worst = std::max(worst, std::abs(de2(m, c) - ((4 * e * e - 2) * g)));
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("sampled first term matches the analytic bracket of two Gaussians") {
  const double h = 0.2, a = 0.3, b = 0.4;
  auto s1 = SymbolOnGrid::sample([&](double y, double e) { return cplx(std::exp(-(y - a) * (y - a) - e * e)); }, kGrid, h);
  auto s2 = SymbolOnGrid::sample([&](double y, double e) { return cplx(std::exp(-y * y - (e - b) * (e - b))); }, kGrid, h);
  auto t1 = moyal_term_sampled(s1, s2, 1);
  double worst = 0;
  for (int m = 0; m < s1.rows(); m += 5)
    for (int c = 0; c < s1.cols(); c += 3) {
      double y = s1.y(m), e = s1.eta(c);
      double g = std::exp(-(y - a) * (y - a) - e * e - y * y - (e - b) * (e - b));
      cplx want = cplx(0, h / 2) * g * (4 * (y - a) * (e - b) - 4 * e * y);
      worst = std::max(worst, std::abs(t1.values()(m, c) - want));
    }
  CHECK(worst < 1e-10);
  auto t0 = moyal_term_sampled(s1, s2, 0);
  CHECK((t0.values() - s1.values().cwiseProduct(s2.values())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("composition residuals decay with the expected order") {
  const GridSpec g = GridSpec::make(8.0, 512);
  auto s1 = [](double y, double e) { return cplx(std::exp(-(y - 0.3) * (y - 0.3) / 2 - e * e / 2)); };
  auto s2 = [](double y, double e) { return cplx(std::exp(-y * y / 2 - (e - 0.4) * (e - 0.4) / 2)); };
  std::vector<double> hs{0.16, 0.135, 0.113, 0.095, 0.08};
  auto fits = verify_composition(s1, s2, {0, 1}, hs, g);
  REQUIRE(fits.size() == 2);
  CHECK(fits[0].fitted);
  CHECK(fits[0].slope >= 0.7);
  CHECK(fits[1].slope >= 1.7);
  for (std::size_t i = 0; i < hs.size(); ++i) CHECK(fits[1].residual[i] < fits[0].residual[i]);
}

TEST_CASE("composing with the unit symbol leaves residuals at the floor") {
  const GridSpec g = GridSpec::make(8.0, 256);
  auto s1 = [](double y, double e) { return cplx(std::exp(-y * y / 2 - e * e / 2)); };
  auto one = [](double, double) { return cplx(1.0); };
  auto fit = verify_composition(s1, one, 1, {0.5, 0.4, 0.3}, g);
  for (std::size_t i = 0; i < fit.residual.size(); ++i) {
    CHECK(fit.residual[i] < 1e-12);
    CHECK(fit.at_floor[i]);
  }
  CHECK_FALSE(fit.fitted);
}

TEST_CASE("invalid orders are rejected") {
  CHECK_THROWS_AS(moyal_term(PolySymbol::y(), PolySymbol::y(), -1), DomainError);
  auto s = [](double y, double e) { return cplx(std::exp(-y * y - e * e)); };
  CHECK_THROWS_AS(verify_composition(s, s, 4, {0.5, 0.4, 0.3}, GridSpec::make(8, 256)), DomainError);
}
