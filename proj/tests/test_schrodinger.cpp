#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "semiweyl/schrodinger.hpp"

using namespace semiweyl;
using namespace semiweyl::schrodinger;

namespace {

// Lowest characteristic value a_0(q=4) / 4 for y'' + (a - 2q cos 2t) y = 0, i.e. the ground
// state of -d^2/dx^2 + 2 cos x on [0, 2 pi) (independent tabulated value).
constexpr double kMathieuGround = -1.0701297045756306;

TorusPotential random_potential(std::mt19937_64& rng, int dim, int kmax) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::map<Mode, cplx> c;
  for (int a = -kmax; a <= kmax; ++a)
    for (int b = (dim == 1 ? 0 : -kmax); b <= (dim == 1 ? 0 : kmax); ++b) {
      Mode k{a, b}, mk{-a, -b};
      if (c.count(k)) continue;
      if (k == mk) {
        c[k] = u(rng);
      } else {
        cplx v(u(rng), u(rng));
        c[k] = v;
        c[mk] = std::conj(v);
      }
    }
  return TorusPotential(dim, c);
}

double unit_bump(double t) { return std::abs(t) < 1 ? std::exp(1 - 1 / (1 - t * t)) : 0.0; }

}  // namespace

TEST_CASE("potential evaluation and extrema") {
  auto V = TorusPotential::cosine(0.5);
  CHECK(V(0.0) == doctest::Approx(0.5));
  CHECK(V(pi) == doctest::Approx(-0.5));
  CHECK(V.min() == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(V.max() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(V.sup_norm() == doctest::Approx(0.5).epsilon(1e-12));
  double x = 0.7;
  CHECK(V.gradient(std::span<const double>(&x, 1))[0] == doctest::Approx(-0.5 * std::sin(0.7)));
  CHECK(TorusPotential::zero(2).is_constant());
}

TEST_CASE("non-Hermitian coefficients are rejected") {
  CHECK_THROWS_AS(TorusPotential(1, {{{1, 0}, cplx(1.0)}}), DomainError);
  CHECK_THROWS_AS(TorusPotential(1, {{{1, 0}, cplx(0, 1)}, {{-1, 0}, cplx(0, 1)}}), DomainError);
  CHECK_THROWS_AS(TorusPotential(1, {{{0, 1}, cplx(1.0)}, {{0, -1}, cplx(1.0)}}), DomainError);
  CHECK_THROWS_AS(TorusPotential(3, {}), DomainError);
  CHECK_NOTHROW(TorusPotential(1, {{{1, 0}, cplx(0, 1)}, {{-1, 0}, cplx(0, -1)}}));
}

TEST_CASE("property: random real potentials evaluate to real values consistent with the series") {
  std::mt19937_64 rng(8);
  for (int dim : {1, 2}) {
    auto V = random_potential(rng, dim, 3);
    std::uniform_real_distribution<double> ux(0, 2 * pi);
    for (int t = 0; t < 50; ++t) {
      std::array<double, 2> x{ux(rng), ux(rng)};
      cplx direct = 0;
      for (auto& [k, c] : V.coeffs()) direct += c * std::polar(1.0, k[0] * x[0] + (dim == 2 ? k[1] * x[1] : 0.0));
      CHECK(std::abs(direct.imag()) < 1e-12);
      CHECK(V(std::span<const double>(x.data(), dim)) == doctest::Approx(direct.real()).epsilon(1e-12));
      CHECK(V(std::span<const double>(x.data(), dim)) >= V.min() - 1e-12);
      CHECK(V(std::span<const double>(x.data(), dim)) <= V.max() + 1e-12);
    }
  }
}

TEST_CASE("free torus n = 1 spectrum") {
  auto op = assemble_torus_operator(TorusPotential::zero(1), 0.1, 10);
  auto dec = eigensolve(op);
  std::vector<double> want;
  for (int k = -10; k <= 10; ++k) want.push_back(0.01 * k * k);
  std::sort(want.begin(), want.end());
  REQUIRE(dec.eigenvalues.size() == 21);
  for (int i = 0; i < 21; ++i) CHECK(dec.eigenvalues(i) == doctest::Approx(want[i]).epsilon(1e-14));
}

TEST_CASE("free torus n = 2 spectrum matches lattice sums") {
  auto op = assemble_torus_operator(TorusPotential::zero(2), 1.0, 3);
  REQUIRE(op.modes.size() == 49);
  CHECK(op.modes.front() == Mode{-3, -3});
  CHECK(op.modes[1] == Mode{-3, -2});
  auto dec = eigensolve(op);
  std::vector<double> want;
  for (int j = -3; j <= 3; ++j)
    for (int k = -3; k <= 3; ++k) want.push_back(j * j + k * k);
  std::sort(want.begin(), want.end());
  for (int i = 0; i < 49; ++i) CHECK(dec.eigenvalues(i) == doctest::Approx(want[i]).epsilon(1e-13));
  CHECK(want[0] == 0);
  CHECK(want[1] == 1);
  CHECK(want[4] == 1);
  CHECK(want[5] == 2);
}

TEST_CASE("Mathieu ground state by K refinement") {
  auto V = TorusPotential::cosine(2.0);
  double prev = 0;
  double last_diff = 1;
  for (int K : {16, 32, 64}) {
    double e0 = eigensolve(assemble_torus_operator(V, 1.0, K)).eigenvalues(0);
    if (K > 16) last_diff = std::abs(e0 - prev);
    prev = e0;
  }
  CHECK(last_diff < 1e-10);
  CHECK(std::abs(prev - kMathieuGround) < 1e-10);
}

TEST_CASE("assembled matrix entries and Hermiticity") {
  std::mt19937_64 rng(9);
  for (int dim : {1, 2}) {
    auto V = random_potential(rng, dim, 2);
    auto op = assemble_torus_operator(V, 0.3, 4);
    CHECK((op.matrix - op.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t p = 0; p < op.modes.size(); p += 3)
      for (std::size_t q = 0; q < op.modes.size(); q += 2) {
        Mode d{op.modes[p][0] - op.modes[q][0], op.modes[p][1] - op.modes[q][1]};
        double kin = p == q ? 0.09 * (op.modes[p][0] * op.modes[p][0] + op.modes[p][1] * op.modes[p][1]) : 0.0;
        CHECK(std::abs(op.matrix(p, q) - (V.coeff(d) + kin)) < 1e-15);
      }
  }
}

TEST_CASE("decomposition invariants") {
  std::mt19937_64 rng(10);
  for (int dim : {1, 2}) {
    auto V = random_potential(rng, dim, 2);
    auto op = assemble_torus_operator(V, 0.5, dim == 1 ? 30 : 7);
    auto dec = eigensolve(op);
    const double anorm = op.matrix.cwiseAbs().rowwise().sum().maxCoeff();
    for (int j = 0; j < dec.eigenvalues.size(); ++j) {
      if (j > 0) CHECK(dec.eigenvalues(j) >= dec.eigenvalues(j - 1));
      CHECK((op.matrix * dec.eigenvectors.col(j) - dec.eigenvalues(j) * dec.eigenvectors.col(j)).norm() <= 1e-8 * anorm);
    }
    const Eigen::Index n = dec.eigenvectors.cols();
    CHECK((dec.eigenvectors.adjoint() * dec.eigenvectors - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("diagonal input gives sorted diagonal") {
  CMatrix d = CMatrix::Zero(4, 4);
  d.diagonal() << 3.0, -1.0, 2.0, 0.5;
  auto dec = eigensolve(d, 1.0);
  CHECK(dec.eigenvalues(0) == doctest::Approx(-1.0));
  CHECK(dec.eigenvalues(1) == doctest::Approx(0.5));
  CHECK(dec.eigenvalues(2) == doctest::Approx(2.0));
  CHECK(dec.eigenvalues(3) == doctest::Approx(3.0));
  CMatrix nh = d;
  nh(0, 1) = 1.0;
  CHECK_THROWS_AS(eigensolve(nh, 1.0), DomainError);
}

TEST_CASE("window eigenvalues agree with a doubled basis") {
  // With the default margin the truncation tail spans enough modes once h is semiclassically small.
  struct Case {
    double amplitude, h;
  };
  for (Case c : {Case{2.0, 0.1}, Case{2.0, 0.05}, Case{0.5, 0.2}, Case{0.5, 0.1}, Case{0.5, 0.02}}) {
    auto V = TorusPotential::cosine(c.amplitude);
    const double Emax = 3.0;
    const int K = K_rule(c.h, Emax, V);
    auto a = eigensolve(assemble_torus_operator(V, c.h, K, ContainmentCheck{Emax}));
    auto b = eigensolve(assemble_torus_operator(V, c.h, 2 * K));
    int checked = 0;
    for (int j = 0; j < a.eigenvalues.size() && a.eigenvalues(j) <= Emax; ++j, ++checked)
      CHECK(std::abs(a.eigenvalues(j) - b.eigenvalues(j)) < 1e-10);
    CHECK(checked > 10);
  }
}

TEST_CASE("containment violation is a resolution error") {
  auto V = TorusPotential::cosine(2.0);
  CHECK_THROWS_AS(assemble_torus_operator(V, 0.1, 20, ContainmentCheck{3.0}), ResolutionError);
  const int K = K_rule(0.1, 3.0, V);
  CHECK(K == int(std::ceil(std::sqrt(10.0) / 0.1)));
  CHECK_NOTHROW(assemble_torus_operator(V, 0.1, K, ContainmentCheck{3.0}));
}

TEST_CASE("spectral functional calculus") {
  auto V = TorusPotential::cosine(0.5);
  const double h = 0.2;
  auto dec = eigensolve(assemble_torus_operator(V, h, 25));
  const double lo = dec.eigenvalues(0), hi = dec.eigenvalues(dec.eigenvalues.size() - 1);

  SUBCASE("identity when the function is 1 on the spectrum") {
    auto chi = symbolfam::BumpFunction::plateau(lo - 2, lo - 1, hi + 1, hi + 2);
    auto fam = symbolfam::make_window_family(chi, 0.0, 0.0, 1.0);
    auto f = spectral_funcalc(dec, fam, h);
    CHECK((f.entries - CMatrix::Identity(f.size(), f.size())).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("zero when the support misses the spectrum") {
    auto fam = symbolfam::make_window_family(symbolfam::BumpFunction::standard(), lo - 5, 0.0, 1.0);
    CHECK(spectral_funcalc(dec, fam, h).entries.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("trace equals the sum of weights; spectrum maps through the function") {
    auto fam = symbolfam::make_window_family(symbolfam::BumpFunction::standard(), 1.0, 0.0, 0.6);
    auto f = spectral_funcalc(dec, fam, h);
    double want = 0;
    std::vector<double> weights;
    for (int j = 0; j < dec.eigenvalues.size(); ++j) {
      want += unit_bump((dec.eigenvalues(j) - 1.0) / 0.6);
      weights.push_back(unit_bump((dec.eigenvalues(j) - 1.0) / 0.6));
    }
    CHECK(std::abs(f.entries.trace() - want) < 1e-10);
    std::sort(weights.begin(), weights.end());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(f.entries, Eigen::EigenvaluesOnly);
    for (int j = 0; j < es.eigenvalues().size(); ++j) CHECK(std::abs(es.eigenvalues()(j) - weights[j]) < 1e-10);
    CHECK((f.entries - f.entries.adjoint()).norm() < 1e-12);
  }
  SUBCASE("product with a function that is 1 on the support") {
    auto fam = symbolfam::make_window_family(symbolfam::BumpFunction::standard(), 1.0, 0.0, 0.6);
    auto bar = symbolfam::make_window_family(symbolfam::BumpFunction::plateau(-3, -1, 1, 3), 1.0, 0.0, 0.6);
    auto f = spectral_funcalc(dec, fam, h);
    auto fg = spectral_funcalc(dec, [&](double e) { return fam.value(e, h) * bar.value(e, h); });
    CHECK((f.entries - fg.entries).cwiseAbs().maxCoeff() < 1e-14);
    auto g = spectral_funcalc(dec, bar, h);
    CHECK((f.entries * g.entries - f.entries).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("degenerate eigenvalues are projected per cluster") {
  auto dec = eigensolve(assemble_torus_operator(TorusPotential::zero(1), 0.5, 6));
  auto clusters = eigenvalue_clusters(dec.eigenvalues, 1e-9 * dec.eigenvalues.cwiseAbs().maxCoeff());
  CHECK(clusters.size() == 7);
  CHECK(clusters[0] == std::pair<int, int>{0, 1});
  for (std::size_t c = 1; c < clusters.size(); ++c) CHECK(clusters[c].second - clusters[c].first == 2);
  // projection onto the k = +-2 eigenspace is the diagonal pattern on those modes
  auto p = spectral_funcalc(dec, [](double e) { return std::abs(e - 1.0) < 1e-6 ? 1.0 : 0.0; });
  CHECK(std::abs(p.entries(6 - 2, 6 - 2) - 1.0) < 1e-12);
  CHECK(std::abs(p.entries(6 + 2, 6 + 2) - 1.0) < 1e-12);
  CHECK(std::abs(p.entries.trace() - 2.0) < 1e-12);
}

TEST_CASE("Hamiltonian evaluation") {
  CHECK(hamiltonian_eval(TorusPotential::zero(1), 0.3, 0.0) == 0.0);
  CHECK(hamiltonian_eval(TorusPotential::cosine(2.0), 0.0, 1.0) == doctest::Approx(3.0));
  CHECK(hamiltonian_eval(TorusPotential::cosine(0.5), pi, std::sqrt(2.0)) == doctest::Approx(1.5));
  std::array<double, 2> x{0.1, 0.2}, xi{1.0, 2.0};
  CHECK(hamiltonian_eval(TorusPotential::zero(2), x, xi) == doctest::Approx(5.0));
  CHECK(hamiltonian_eval(TorusPotential::cosine(2.0), 0.4, 0.0) >= -2.0);
}
