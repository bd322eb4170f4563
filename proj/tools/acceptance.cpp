// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "semiweyl/experiments.hpp"
#include "semiweyl/hsfunc.hpp"
#include "semiweyl/moyal.hpp"
#include "semiweyl/schrodinger.hpp"
#include "semiweyl/symbolfam.hpp"
#include "semiweyl/weylquant.hpp"

using namespace semiweyl;
using symbolfam::BumpFunction;
using weylquant::GridSpec;
using weylquant::SymbolFn;
using weylquant::SymbolOnGrid;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double unit_bump(double t) { return std::abs(t) < 1 ? std::exp(1 - 1 / (1 - t * t)) : 0.0; }

double unit_bump_mass() {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate([](double t) { return unit_bump(t); }, -1.0, 1.0);
}

std::vector<double> geomspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a * std::pow(b / a, double(i) / (n - 1));
  return v;
}

void trace_identity(Verdict& v) {
  const auto grid = GridSpec::make(8.0, 1024);
  const double mb = unit_bump_mass();
  struct Case {
    SymbolFn fn;
    double integral;
  };
  const std::vector<Case> cases{
      {[](double y, double e) { return cplx(std::exp(-y * y - e * e)); }, pi},
      {[](double y, double e) { return cplx(std::exp(-(y - 1) * (y - 1) / 2 - 2 * (e + 0.5) * (e + 0.5))); }, pi},
      {[](double y, double e) { return cplx(unit_bump(y / 3) * unit_bump(e / 2)); }, 6 * mb * mb},
      {[](double y, double e) { return cplx(unit_bump((y + 2) / 1.5) * std::exp(-e * e)); }, 1.5 * mb * std::sqrt(pi)},
      {[](double y, double e) { return cplx((1 + y * e) * std::exp(-y * y - e * e)); }, pi},
  };
  double worst = 0.0;
  for (double h : {0.05, 0.1, 0.2}) {
    for (auto& c : cases) {
      const double tr = weylquant::trace(weylquant::weyl_quantize_line(SymbolOnGrid::sample(c.fn, grid, h))).real();
      const double err = std::abs(tr - c.integral / (2 * pi * h)) / (1 + std::abs(tr));
      worst = std::max(worst, err);
    }
  }
  v.detail << "max |tr - (2 pi h)^-1 int s| / (1 + |tr|) = " << num(worst);
  v.require(worst <= 1e-6, "trace identity within 1e-6");
}

void moyal_order(Verdict& v) {
  const auto grid = GridSpec::make(8.0, 1024);
  const SymbolFn s1 = [](double y, double eta) { return cplx(std::exp(-0.5 * (y - 0.3) * (y - 0.3) - 0.5 * eta * eta)); };
  const SymbolFn s2 = [](double y, double eta) { return cplx(std::exp(-0.5 * y * y - 0.5 * (eta - 0.4) * (eta - 0.4))); };
  const auto fits = moyal::verify_composition(s1, s2, {0, 1, 2}, geomspace(0.16, 0.04, 8), grid);
  for (auto& f : fits) {
    v.detail << "K=" << f.K << " slope " << (f.fitted ? num(f.slope) : "floor");
    v.require(f.fitted && f.slope >= f.K + 1 - 0.3, "slope >= K + 0.7 for K = " + std::to_string(f.K));
    v.detail << "; ";
  }
  using moyal::PolySymbol;
  const std::vector<std::pair<PolySymbol, PolySymbol>> polys{
      {PolySymbol::y() * PolySymbol::eta(), PolySymbol::eta() * PolySymbol::eta()},
      {PolySymbol::monomial(3, 0) + PolySymbol::monomial(0, 2), PolySymbol::monomial(1, 1) + PolySymbol::monomial(0, 2, 0.5)},
      {PolySymbol::monomial(2, 1, 0.3) + PolySymbol::constant(1.0), PolySymbol::monomial(1, 2, cplx(0.0, 0.7))},
  };
  double worst = 0.0;
  for (double h : {0.05, 0.1, 0.2})
    for (auto& [a, b] : polys) worst = std::max(worst, moyal::polynomial_composition_residual(a, b, grid, h));
  v.detail << "polynomial residual " << num(worst);
  v.require(worst <= 1e-8, "polynomial composition exact to 1e-8");
}

void extension_decay(Verdict& v) {
  const auto f = hsfunc::SampledFunction::sample(unit_bump, -1.0, 1.0, 2001);
  for (int N : {4, 8}) {
    const auto ext = hsfunc::build_extension(f, N);
    double real_err = 0.0;
    for (int i = 0; i <= 4000; ++i) {
      const double x = -1.5 + 3.0 * i / 4000;
      real_err = std::max(real_err, std::abs(ext.value(x, 0.0) - unit_bump(x)));
    }
    const auto prof = hsfunc::dbar_bound_profile(ext, hsfunc::dyadic_shells(1, 7));
    std::vector<double> ys, sups;
    for (auto& s : prof) {
      ys.push_back(s.y);
      sups.push_back(s.sup_dbar);
    }
    const auto fit = fit_loglog(ys, sups);
    v.detail << "N=" << N << " shell slope " << num(fit.slope) << " real-axis err " << num(real_err);
    v.require(fit.slope >= N - 0.5, "dbar shell slope >= " + num(N - 0.5) + " at N = " + std::to_string(N));
    v.require(real_err <= 1e-8, "real-axis restriction within 1e-8 at N = " + std::to_string(N));
    v.detail << "; ";
  }
}

double hs_error(const weylquant::OperatorMatrix& P, const schrodinger::SpectralDecomposition& dec,
                const symbolfam::CutoffFamily& fam, double h) {
  const Interval supp = fam.support(h);
  const auto f = hsfunc::SampledFunction::sample([&](double x) { return fam.value(x, h); }, supp.lo, supp.hi, 2001);
  const auto ext = hsfunc::build_extension(f, 8);
  const auto quad = hsfunc::ComplexQuadrature::covering(ext, 200, 200);
  const auto A = hsfunc::hs_funcalc(P, ext, quad);
  const auto oracle = schrodinger::spectral_funcalc(dec, fam, h);
  return (A.entries - oracle.entries).norm() / oracle.entries.norm();
}

void helffer_sjostrand(Verdict& v) {
  // Window family at delta = 0 centred at 1 with half-width 1: f(1) = 1, f(2) = f(3) = 0.
  const auto fam = symbolfam::make_window_family(BumpFunction::standard(), 1.0, 0.0, 1.0);
  {
    const double h = 0.5;
    const auto V = schrodinger::TorusPotential::cosine(2.0);
    const auto op = schrodinger::assemble_torus_operator(V, h, 40);
    const double err = hs_error(op.as_operator(), schrodinger::eigensolve(op), fam, h);
    v.detail << "torus (dim " << op.as_operator().size() << ") rel Frobenius " << num(err);
    v.require(err <= 1e-6, "torus operator within 1e-6");
    v.detail << "; ";
  }
  {
    CMatrix d = CMatrix::Zero(3, 3);
    for (int i = 0; i < 3; ++i) d(i, i) = i + 1;
    const weylquant::OperatorMatrix P{d, weylquant::Basis::fourier_modes, 1.0, true};
    const double err = hs_error(P, schrodinger::eigensolve(d, 1.0), fam, 1.0);
    v.detail << "diag(1,2,3) rel Frobenius " << num(err);
    v.require(err <= 1e-6, "diag(1,2,3) within 1e-6");
  }
}

void trace_remainder(Verdict& v) {
  const auto V = schrodinger::TorusPotential::cosine(0.5);
  const experiments::HGrid grid;  // 0.2 -> 0.02, 10 points
  for (double delta : {0.0, 0.1, 0.25}) {
    const auto fam = symbolfam::make_window_family(BumpFunction::standard(), 1.5, delta, 1.5);
    const auto res = experiments::run_trace_formula_experiment(V, fam, {}, grid);
    v.detail << "delta=" << delta << ": ";
    if (!res.fit) {
      v.detail << "at floor; ";
      continue;
    }
    v.detail << "slope " << num(res.fit->slope) << " r2 " << num(res.fit->r_squared);
    v.require(res.fit->slope >= 1 - 2 * delta - 0.2, "slope >= " + num(0.8 - 2 * delta) + " at delta = " + num(delta));
    v.require(res.fit->r_squared >= 0.9, "r^2 >= 0.9 at delta = " + num(delta));
    v.detail << "; ";
  }
}

void weyl_law(Verdict& v) {
  {
    const auto rows = experiments::run_weyl_count_experiment(schrodinger::TorusPotential::zero(1), 1.0, 0.25,
                                                             geomspace(0.2, 1e-4, 20));
    const double dev = std::abs(rows.back().scaled - 2 * pi) / (2 * pi);
    const bool dec = experiments::eventually_decreasing(rows);
    v.detail << "free torus: deviation " << num(dev) << " at h=1e-4, eventually decreasing " << (dec ? "yes" : "no");
    v.require(dev <= 0.10, "free torus within 10% of 2 pi");
    v.require(dec, "free torus deviation eventually decreasing");
    v.detail << "; ";
  }
  {
    const auto V = schrodinger::TorusPotential::cosine(0.5);
    const auto rows = experiments::run_weyl_count_experiment(V, 1.0, 0.25, geomspace(0.2, 0.02, 10));
    const double dev = std::abs(rows.back().deviation);
    v.detail << "0.5 cos x: deviation " << num(dev) << " at h=0.02";
    v.require(dev <= 0.15, "0.5 cos x within 15% of the Liouville volume");
  }
}

void class_exponents(Verdict& v) {
  const auto hs = experiments::HGrid{}.values();
  for (double delta : {0.0, 0.25, 0.4}) {
    const auto fam = symbolfam::make_window_family(BumpFunction::standard(), 1.0, delta, 1.0);
    double worst = 0.0;
    for (auto& e : symbolfam::estimate_class_exponents(fam, 4, hs))
      worst = std::max(worst, std::abs(e.fitted_exponent - e.predicted_exponent));
    v.detail << "delta=" << delta << " max |fit + delta j| " << num(worst);
    v.require(worst <= 0.05, "exponents within 0.05 at delta = " + num(delta));
    v.detail << "; ";
  }
}

void resolvent_bound(Verdict& v) {
  const auto op = schrodinger::assemble_torus_operator(schrodinger::TorusPotential::cosine(2.0), 0.5, 40);
  std::mt19937_64 rng(20240501);
  std::uniform_real_distribution<double> re(-5.0, 15.0), logy(std::log(1e-4), std::log(10.0));
  std::bernoulli_distribution sign(0.5);
  std::vector<cplx> zs;
  for (int i = 0; i < 100; ++i) zs.emplace_back(re(rng), (sign(rng) ? 1 : -1) * std::exp(logy(rng)));
  double worst = -1e300;
  for (auto& r : hsfunc::resolvent_norm_probe(op.as_operator(), zs))
    worst = std::max(worst, r.norm - 1.0 / std::abs(r.z.imag()));
  v.detail << "max (norm - 1/|Im z|) = " << num(worst) << " over 100 z";
  v.require(worst <= 1e-10, "resolvent norm bound");
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Verdict&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "trace identity", trace_identity},     {2, "Moyal order", moyal_order},
      {3, "extension decay", extension_decay},   {4, "Helffer-Sjostrand vs spectral", helffer_sjostrand},
      {5, "trace formula remainder", trace_remainder}, {6, "shrinking-window Weyl law", weyl_law},
      {7, "symbol-class exponents", class_exponents},  {8, "resolvent bound", resolvent_bound},
  };
  bool ok = true;
  for (auto& c : all) {
    if (only && c.id != only) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d (%s): %s  %s (%.1f s)\n", c.id, c.name, v.pass ? "PASS" : "FAIL", v.detail.str().c_str(),
                secs);
    std::fflush(stdout);
    ok = ok && v.pass;
  }
  return ok ? 0 : 1;
}
