#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "semiweyl/hsfunc.hpp"
#include "semiweyl/schrodinger.hpp"

using namespace semiweyl;
using namespace semiweyl::hsfunc;

namespace {

double unit_bump(double t) { return std::abs(t) < 1 ? std::exp(1 - 1 / (1 - t * t)) : 0.0; }

SampledFunction bump_samples(double center, double half) {
  return SampledFunction::sample([=](double x) { return unit_bump((x - center) / half); }, center - half,
                                 center + half, 2001);
}

weylquant::OperatorMatrix diag123() {
  weylquant::OperatorMatrix P{CMatrix::Zero(3, 3), weylquant::Basis::fourier_modes, 0.1, true};
  for (int i = 0; i < 3; ++i) P.entries(i, i) = i + 1;
  return P;
}

double rel_frobenius(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("extension restricts to f on the real axis") {
  for (auto [c, half] : {std::pair{0.0, 1.0}, {2.0, 1.5}, {-1.0, 0.4}}) {
    auto ext = build_extension(bump_samples(c, half), 8);
    std::vector<double> xs, ys{0.0};
    for (int i = 0; i <= 200; ++i) xs.push_back(c - 2 * half + i * 4 * half / 200);
    const CMatrix v = ext.value_grid(xs, ys);
    double err = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      err = std::max(err, std::abs(v(Eigen::Index(i), 0) - unit_bump((xs[i] - c) / half)));
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("extension support") {
  auto ext = build_extension(bump_samples(0.0, 1.0), 8);
  // numerical support: samples below 1e-14 of the max are dropped
  CHECK(ext.f_support().lo >= -1.0);
  CHECK(ext.f_support().hi <= 1.0);
  CHECK(unit_bump(ext.f_support().lo) <= 1e-13);
  CHECK(unit_bump(ext.f_support().hi) <= 1e-13);
  CHECK(ext.support_x().lo == doctest::Approx(ext.f_support().lo - 3.0));
  CHECK(ext.support_x().hi == doctest::Approx(ext.f_support().hi + 3.0));
  CHECK(ext.psi()(ext.f_support().lo - 1.0) == 1.0);
  CHECK(ext.psi()(ext.f_support().hi + 1.0) == 1.0);
  CHECK(ext.support_y() == 3.0);
  const CMatrix v = ext.value_grid({-4.5, -4.0, 0.0, 4.0, 4.5}, {3.2, 3.0, -3.0, -3.5});
  CHECK(v.cwiseAbs().maxCoeff() == 0.0);
  const CMatrix d = ext.dbar_grid({-4.5, 4.5}, {0.5, -0.5, 0.0});
  CHECK(d.cwiseAbs().maxCoeff() == 0.0);
  // inside the support it is not identically zero
  CHECK(std::abs(ext.value(0.3, 0.5)) > 1e-3);
}

TEST_CASE("dbar matches finite differences of the value away from the axis") {
  auto ext = build_extension(bump_samples(0.5, 1.0), 8);
  const double s = 1e-3;
  auto d4 = [](cplx fm2, cplx fm1, cplx f1, cplx f2, double s) { return (fm2 - 8.0 * fm1 + 8.0 * f1 - f2) / (12 * s); };
  for (auto [x, y] : {std::pair{0.2, 0.6}, {1.7, -0.8}, {2.3, 1.4}, {-1.2, 2.1}}) {
    const cplx dx = d4(ext.value(x - 2 * s, y), ext.value(x - s, y), ext.value(x + s, y), ext.value(x + 2 * s, y), s);
    const cplx dy = d4(ext.value(x, y - 2 * s), ext.value(x, y - s), ext.value(x, y + s), ext.value(x, y + 2 * s), s);
    const cplx oracle = 0.5 * (dx + cplx(0, 1) * dy);
    CHECK(std::abs(ext.dbar(x, y) - oracle) <= 1e-7);
  }
}

TEST_CASE("dbar profile: zero function, monotone decay, order independence") {
  SampledFunction zero{-1.0, 0.01, std::vector<double>(201, 0.0)};
  auto ez = build_extension(zero, 4);
  CHECK(ez.is_zero());
  for (auto& s : dbar_bound_profile(ez, dyadic_shells(1, 7))) CHECK(s.sup_dbar == 0.0);

  auto e4 = build_extension(bump_samples(0.0, 1.0), 4);
  auto e8 = build_extension(bump_samples(0.0, 1.0), 8);
  auto p4 = dbar_bound_profile(e4, dyadic_shells(1, 7));
  auto p8 = dbar_bound_profile(e8, dyadic_shells(1, 7));
  REQUIRE(p4.size() == 7);
  for (std::size_t k = 1; k < p4.size(); ++k) CHECK(p4[k].sup_dbar < p4[k - 1].sup_dbar);
  // the construction does not depend on the order: the profiles coincide
  for (std::size_t k = 0; k < p4.size(); ++k) CHECK(p4[k].sup_dbar == p8[k].sup_dbar);

  CHECK_THROWS_AS(dbar_bound_profile(e4, {0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(dbar_bound_profile(e4, {3.5}), DomainError);
}

TEST_CASE("build_extension errors") {
  auto cut = SampledFunction::sample([](double x) { return unit_bump(x); }, -0.5, 1.0, 501);
  CHECK_THROWS_AS(build_extension(cut, 8), SupportError);
  CHECK_THROWS_AS(build_extension(bump_samples(0, 1), 0), DomainError);
}

TEST_CASE("complex quadrature") {
  auto q = ComplexQuadrature::midpoint(-2.0, 3.0, 1.5, 17, 24, 2.0);
  double wsum = 0.0;
  for (double wx : q.x_weights)
    for (double wy : q.y_weights) wsum += wx * wy;
  CHECK(wsum == doctest::Approx(q.area()).epsilon(1e-13));
  CHECK(q.area() == doctest::Approx(15.0));
  for (int k = 0; k < q.qy; ++k) {
    CHECK(q.y_nodes[k] == doctest::Approx(-q.y_nodes[q.qy - 1 - k]).epsilon(1e-15));
    CHECK(q.y_weights[k] > 0.0);
  }
  auto u = ComplexQuadrature::midpoint(0.0, 1.0, 1.0, 4, 4, 1.0);
  CHECK(u.y_nodes[0] == doctest::Approx(-0.75));
  CHECK(u.y_weights[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(ComplexQuadrature::midpoint(1.0, 0.0, 1.0, 4, 4), DomainError);
  CHECK_THROWS_AS(ComplexQuadrature::midpoint(0.0, 1.0, 1.0, 4, 4, 0.5), DomainError);
}

TEST_CASE("Helffer-Sjostrand on diag(1,2,3) against the spectral oracle") {
  auto ext = build_extension(bump_samples(1.0, 1.0), 8);
  const auto P = diag123();
  CMatrix oracle = CMatrix::Zero(3, 3);
  oracle(0, 0) = 1.0;
  std::vector<double> errs;
  for (int q : {60, 120, 240}) {
    auto A = hs_funcalc(P, ext, ComplexQuadrature::covering(ext, q, q));
    errs.push_back(rel_frobenius(A.entries, oracle));
    CHECK(A.hermitian);
    CHECK((A.entries - A.entries.adjoint()).norm() <= 1e-8);
  }
  CHECK(errs[1] < errs[0]);
  CHECK(errs[2] < errs[1]);
  CHECK(errs[2] <= 2e-5);

  // zero function gives the zero matrix
  SampledFunction zero{0.0, 0.01, std::vector<double>(101, 0.0)};
  auto Z = hs_funcalc(P, zero, 8, ComplexQuadrature::midpoint(-3, 3, 3, 10, 10));
  CHECK(Z.entries.norm() == 0.0);
}

TEST_CASE("Helffer-Sjostrand on a torus operator against eigen-decomposition") {
  const auto V = schrodinger::TorusPotential::cosine(2.0);
  const auto op = schrodinger::assemble_torus_operator(V, 0.5, 12);
  const auto dec = schrodinger::eigensolve(op);
  const double E = 0.5, half = 1.5;
  auto ext = build_extension(bump_samples(E, half), 8);
  const auto oracle = schrodinger::spectral_funcalc(dec, [&](double e) { return unit_bump((e - E) / half); });
  REQUIRE(oracle.entries.norm() > 0.5);
  double prev = 1e300;
  for (int q : {80, 160}) {
    auto A = hs_funcalc(op.as_operator(), ext, ComplexQuadrature::covering(ext, q, q), {1e-6, 2});
    const double err = rel_frobenius(A.entries, oracle.entries);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev <= 1e-4);
}

TEST_CASE("threads do not change the result") {
  auto ext = build_extension(bump_samples(1.5, 1.0), 8);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  CMatrix m(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) m(i, j) = cplx(g(rng), g(rng));
  weylquant::OperatorMatrix P{0.25 * (m + m.adjoint()), weylquant::Basis::position_grid, 0.1, true};
  auto quad = ComplexQuadrature::covering(ext, 50, 40);
  auto a1 = hs_funcalc(P, ext, quad, {1e-6, 1});
  auto a3 = hs_funcalc(P, ext, quad, {1e-6, 3});
  CHECK((a1.entries - a3.entries).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("halving the axis floor barely changes the result") {
  auto ext = build_extension(bump_samples(2.0, 1.0), 4);
  const auto P = diag123();
  auto quad = ComplexQuadrature::covering(ext, 80, 400);
  auto a = hs_funcalc(P, ext, quad, {1e-3, 1});
  auto b = hs_funcalc(P, ext, quad, {5e-4, 1});
  CHECK((a.entries - b.entries).norm() <= 1e-8);
}

TEST_CASE("hs_funcalc errors") {
  auto ext1 = build_extension(bump_samples(1.0, 1.0), 1);
  const auto P = diag123();
  // odd node count puts a node on the real axis
  CHECK_THROWS_AS(hs_funcalc(P, ext1, ComplexQuadrature::covering(ext1, 20, 21)), ConfigError);
  auto ext2 = build_extension(bump_samples(1.0, 1.0), 2);
  CHECK_NOTHROW(hs_funcalc(P, ext2, ComplexQuadrature::covering(ext2, 20, 21)));
  CHECK_THROWS_AS(hs_funcalc(P, ext2, ComplexQuadrature::midpoint(-1, 2, 3, 10, 10)), SupportError);
  CHECK_THROWS_AS(hs_funcalc(P, ext2, ComplexQuadrature::midpoint(-3, 5, 2, 10, 10)), SupportError);
  auto Q = P;
  Q.entries(0, 1) = 1.0;
  CHECK_THROWS_AS(hs_funcalc(Q, ext2, ComplexQuadrature::covering(ext2, 10, 10)), DomainError);
}

TEST_CASE("resolvent norm probe") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  CMatrix m(20, 20);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) m(i, j) = cplx(g(rng), g(rng));
  weylquant::OperatorMatrix P{0.5 * (m + m.adjoint()), weylquant::Basis::position_grid, 0.1, true};
  Eigen::SelfAdjointEigenSolver<CMatrix> es(P.entries);
  const RVector ev = es.eigenvalues();
  std::uniform_real_distribution<double> ux(-10, 10), uy(-3, 3);
  std::vector<cplx> zs;
  for (int k = 0; k < 50; ++k) {
    double y = uy(rng);
    if (y == 0.0) y = 0.1;
    zs.push_back({ux(rng), y});
  }
  for (auto& r : resolvent_norm_probe(P, zs)) {
    const double dist = ((ev.array() - r.z.real()).square() + r.z.imag() * r.z.imag()).sqrt().minCoeff();
    CHECK(r.norm == doctest::Approx(1.0 / dist).epsilon(1e-10));
    CHECK(r.norm <= 1.0 / std::abs(r.z.imag()) + 1e-10);
  }

  // far from the spectrum
  auto far = resolvent_norm_probe(diag123(), {cplx(2.0, 10.0)});
  CHECK(far[0].norm == doctest::Approx(0.1).epsilon(1e-12));

  // saturation in a spectral gap
  const double x = 1.4;
  double prev = 0.0;
  for (double y : {1.0, 0.1, 0.01, 1e-4}) {
    auto r = resolvent_norm_probe(diag123(), {cplx(x, y)});
    CHECK(r[0].norm > prev);
    prev = r[0].norm;
  }
  CHECK(prev == doctest::Approx(1.0 / 0.4).epsilon(1e-6));

  CHECK_THROWS_AS(resolvent_norm_probe(diag123(), {cplx(1.0, 0.0)}), DomainError);
}
