#include "semiweyl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "semiweyl/weylquant.hpp"

namespace semiweyl::experiments {

namespace {

constexpr double kQuadTol = 1e-13;
constexpr double kRefineTol = 1e-10;
constexpr double kTieTol = 1e-12;

// Run body(i) for i < n on up to `threads` workers; exceptions are rethrown in index order.
template <class Body>
void parallel_for(int n, int threads, Body body) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](int i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) guarded(i);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int i = t; i < n; i += threads) guarded(i);
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double gk(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, kQuadTol);
}

// b_x on the circle: the bump is periodized once in each direction.
double periodic_factor(const LocalizerSpec& b, double x) {
  if (!b.b_x) return 1.0;
  return (*b.b_x)(x) + (*b.b_x)(x - 2 * pi) + (*b.b_x)(x + 2 * pi);
}

std::vector<Interval> xi_intervals(double lo, double hi, double v) {
  if (hi <= v) return {};
  const double r_hi = std::sqrt(hi - v);
  if (lo <= v) return {{-r_hi, r_hi}};
  const double r_lo = std::sqrt(lo - v);
  return {{-r_hi, -r_lo}, {r_lo, r_hi}};
}

Interval intersect(Interval a, Interval b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

// int b_xi(xi) rho(xi^2 + v) dxi
double xi_integral_1d(const LocalizerSpec& b, const symbolfam::CutoffFamily& fam, double h, Interval supp, double v) {
  double s = 0.0;
  for (Interval iv : xi_intervals(supp.lo, supp.hi, v)) {
    if (b.b_xi) iv = intersect(iv, b.b_xi->support());
    s += gk([&](double xi) { return b.xi_factor(xi) * fam.value(xi * xi + v, h); }, iv.lo, iv.hi);
  }
  return s;
}

// int_{R^2} rho(|xi|^2 + v) dxi = pi int_{max(lo,v)}^{hi} rho
double xi_integral_2d(const symbolfam::CutoffFamily& fam, double h, Interval supp, double v) {
  return pi * gk([&](double e) { return fam.value(e, h); }, std::max(supp.lo, v), supp.hi);
}

// Periodic trapezoid on [0, 2pi)^n with doubling until the relative change is below kRefineTol.
double torus_trapezoid(int dim, const std::function<double(const double*)>& g, int start, int cap) {
  auto sum_at = [&](int n) {
    const double step = 2 * pi / n;
    double s = 0.0;
    double x[2] = {0, 0};
    for (int i = 0; i < n; ++i) {
      x[0] = i * step;
      if (dim == 1) {
        s += g(x);
      } else {
        for (int j = 0; j < n; ++j) {
          x[1] = j * step;
          s += g(x);
        }
      }
    }
    return s * std::pow(step, dim);
  };
  double prev = sum_at(start);
  for (int n = 2 * start; n <= cap; n *= 2) {
    const double cur = sum_at(n);
    if (std::abs(cur - prev) <= kRefineTol * std::max(std::abs(cur), 1e-300) || cur == prev) return cur;
    prev = cur;
  }
  throw ResolutionError("phase-space quadrature did not settle at " + std::to_string(cap) +
                        " points per direction");
}

void check_h(double h) {
  if (!(h > 0.0) || h > 1.0) throw DomainError("h must lie in (0, 1]");
}

// #{k in Z : k^2 < t}
long long lattice_below(double t) {
  if (t <= 0.0) return 0;
  long long m = (long long)std::floor(std::sqrt(t));
  while (m > 0 && double(m) * double(m) >= t) --m;
  while (double(m + 1) * double(m + 1) < t) ++m;
  return 2 * m + 1;
}

}  // namespace

HGrid HGrid::between(double h_max, double h_min, int count) {
  if (count < 2 || !(h_min > 0.0) || !(h_max > h_min)) throw DomainError("h grid needs h_max > h_min > 0");
  HGrid g{h_max, std::pow(h_min / h_max, 1.0 / (count - 1)), count};
  g.validate();
  return g;
}

void HGrid::validate() const {
  if (!(h_max > 0.0) || h_max > 1.0) throw DomainError("h_max must lie in (0, 1]");
  if (!(ratio > 0.0) || !(ratio < 1.0)) throw DomainError("h grid ratio must lie in (0, 1)");
  if (count < 6) throw DomainError("h grid needs at least 6 points");
}

std::vector<double> HGrid::values() const {
  validate();
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = h_max * std::pow(ratio, i);
  return out;
}

double phase_space_integral(const LocalizerSpec& b, const symbolfam::CutoffFamily& fam,
                            const schrodinger::TorusPotential& V, double h) {
  check_h(h);
  const Interval supp = fam.support(h);
  if (supp.hi <= V.min()) return 0.0;
  const int n = V.dimension();
  if (n == 1) {
    return torus_trapezoid(
        1,
        [&](const double* x) {
          const double bx = periodic_factor(b, x[0]);
          return bx == 0.0 ? 0.0 : bx * xi_integral_1d(b, fam, h, supp, V(x[0]));
        },
        64, 1 << 14);
  }
  if (b.b_xi) throw CapabilityError("xi-dependent localizers are supported on T^1 only");
  return torus_trapezoid(
      2,
      [&](const double* x) {
        const double bx = periodic_factor(b, x[0]) * periodic_factor(b, x[1]);
        return bx == 0.0 ? 0.0 : bx * xi_integral_2d(fam, h, supp, V(std::span<const double>(x, 2)));
      },
      32, 1024);
}

double support_volume(const LocalizerSpec& b, const symbolfam::CutoffFamily& fam,
                      const schrodinger::TorusPotential& V, double h) {
  check_h(h);
  const Interval supp = fam.support(h);
  const int n = V.dimension();
  const int m = n == 1 ? 1 << 16 : 512;
  const double step = 2 * pi / m;
  double s = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x0 = i * step;
    if (periodic_factor(b, x0) == 0.0) continue;
    if (n == 1) {
      const double v = V(x0);
      for (Interval iv : xi_intervals(supp.lo, supp.hi, v)) {
        if (b.b_xi) iv = intersect(iv, b.b_xi->support());
        s += std::max(0.0, iv.hi - iv.lo);
      }
    } else {
      for (int j = 0; j < m; ++j) {
        const double x[2] = {x0, j * step};
        if (periodic_factor(b, x[1]) == 0.0) continue;
        const double v = V(std::span<const double>(x, 2));
        s += pi * std::max(0.0, supp.hi - std::max(supp.lo, v));
      }
    }
  }
  return s * std::pow(step, n);
}

TraceFormulaResult run_trace_formula_experiment(const schrodinger::TorusPotential& V,
                                                const symbolfam::CutoffFamily& fam, const LocalizerSpec& b,
                                                const HGrid& grid, TraceOptions opts) {
  const auto hs = grid.values();
  const int n = V.dimension();
  if (n == 2 && !b.is_one()) throw CapabilityError("nontrivial localizers are supported on T^1 only");
  TraceFormulaResult res;
  res.rows.resize(hs.size());
  parallel_for(int(hs.size()), opts.threads, [&](int i) {
    const double h = hs[i];
    const Interval supp = fam.support(h);
    int K = schrodinger::K_rule(h, supp.hi, V, opts.containment_margin);
    if (b.b_xi) {
      // the localizer must be resolved by the mode set
      const Interval bs = b.b_xi->support();
      K = std::max(K, int(std::ceil(std::max(std::abs(bs.lo), std::abs(bs.hi)) / h)) + 1);
    }
    const auto op =
        schrodinger::assemble_torus_operator(V, h, K, schrodinger::ContainmentCheck{supp.hi, opts.containment_margin});
    const auto dec = schrodinger::eigensolve(op);
    double tr = 0.0;
    if (b.is_one()) {
      for (Eigen::Index j = 0; j < dec.eigenvalues.size(); ++j) tr += fam.value(dec.eigenvalues(j), h);
    } else {
      weylquant::TorusSymbol sym{[&](double x, double xi) { return cplx(periodic_factor(b, x) * b.xi_factor(xi)); },
                                 bool(b.b_xi)};
      const auto B = weylquant::quantize_torus(sym, K, h);
      const auto R = schrodinger::spectral_funcalc(dec, fam, h);
      tr = (B.entries * R.entries).trace().real();
    }
    TraceRow& row = res.rows[i];
    row.h = h;
    row.K = K;
    row.lhs = std::pow(2 * pi * h, n) * tr;
    row.rhs = phase_space_integral(b, fam, V, h);
    row.remainder = row.lhs - row.rhs;
    row.supp_volume = support_volume(b, fam, V, h);
  });

  std::vector<double> xs, ys;
  for (auto& row : res.rows) {
    const double r = std::abs(row.remainder);
    xs.push_back(row.h);
    ys.push_back(r >= kRemainderFloor ? r : 0.0);
    row.slope_running = std::numeric_limits<double>::quiet_NaN();
    const auto usable = std::count_if(ys.begin(), ys.end(), [](double y) { return y > 0.0; });
    if (usable >= 3) row.slope_running = fit_loglog(xs, ys).slope;
  }
  if (std::count_if(ys.begin(), ys.end(), [](double y) { return y > 0.0; }) >= 3)
    res.fit = fit_loglog(xs, ys);
  else
    res.at_floor = true;
  return res;
}

double liouville_volume(const schrodinger::TorusPotential& V, double E, std::string* warning,
                        LiouvilleOptions opts) {
  if (E <= V.min()) throw DomainError("energy " + std::to_string(E) + " is not above min V: empty level set");
  auto warn = [&](const std::string& msg) {
    if (warning) *warning = msg;
  };
  if (warning) warning->clear();

  if (V.dimension() == 2) {
    if (std::abs(E - V.min()) < 1e-6 || std::abs(E - V.max()) < 1e-6)
      warn("energy within 1e-6 of a critical value of V");
    if (E > V.max()) return pi * 4 * pi * pi;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> u(0.0, 2 * pi);
    std::size_t below = 0;
    for (std::size_t s = 0; s < opts.samples; ++s) {
      const double x[2] = {u(rng), u(rng)};
      if (V(std::span<const double>(x, 2)) < E) ++below;
    }
    return pi * 4 * pi * pi * double(below) / double(opts.samples);
  }

  // critical values on T^1: sign changes of V' on a fine grid, refined by bracketing
  constexpr int kSamples = 4096;
  const double step = 2 * pi / kSamples;
  auto dV = [&](double x) { return V.gradient(std::span<const double>(&x, 1))[0]; };
  for (int i = 0; i < kSamples; ++i) {
    const double a = i * step, c = a + step;
    const double fa = dV(a), fc = dV(c);
    if (fa == 0.0 || (fa < 0.0) != (fc < 0.0)) {
      double xc = a;
      if (fa != 0.0 && fc != 0.0) {
        boost::uintmax_t it = 100;
        auto r = boost::math::tools::toms748_solve(dV, a, c, fa, fc, boost::math::tools::eps_tolerance<double>(50), it);
        xc = 0.5 * (r.first + r.second);
      }
      if (std::abs(V(xc) - E) < 1e-6) warn("energy within 1e-6 of a critical value of V");
    }
  }

  if (E > V.max()) {
    return torus_trapezoid(
        1, [&](const double* x) { return 1.0 / std::sqrt(E - V(x[0])); }, 64, 1 << 20);
  }
  // turning points, scanning from a point where V > E
  double x0 = 0.0, best = -1e300;
  for (int i = 0; i < kSamples; ++i)
    if (V(i * step) > best) best = V(i * step), x0 = i * step;
  auto g = [&](double x) { return E - V(x); };
  std::vector<double> roots;
  for (int i = 0; i < kSamples; ++i) {
    const double a = x0 + i * step, c = a + step;
    const double ga = g(a), gc = g(c);
    if ((ga < 0.0) == (gc < 0.0)) continue;
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(g, a, c, ga, gc, boost::math::tools::eps_tolerance<double>(52), it);
    roots.push_back(0.5 * (r.first + r.second));
  }
  if (roots.size() % 2 != 0) throw NumericalError("odd number of turning points; energy is not regular");
  // x = a + (c - a)(1 - cos t)/2 removes the inverse square-root endpoint singularities
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < roots.size(); k += 2) {
    const double a = roots[k], c = roots[k + 1];
    total += gk(
        [&](double t) {
          const double x = a + 0.5 * (c - a) * (1.0 - std::cos(t));
          const double d = E - V(x);
          return d > 0.0 ? 0.5 * (c - a) * std::sin(t) / std::sqrt(d) : 0.0;
        },
        0.0, pi);
  }
  return total;
}

std::vector<WeylCountRow> run_weyl_count_experiment(const schrodinger::TorusPotential& V, double E, double delta,
                                                    const std::vector<double>& h_values, WeylOptions opts) {
  if (!(delta >= 0.0) || !(delta < 1.0 / 3.0)) throw DomainError("delta must lie in [0, 1/3) for the Weyl law");
  for (double h : h_values) check_h(h);
  const int n = V.dimension();
  const double lv = liouville_volume(V, E, nullptr, opts.liouville);
  std::vector<WeylCountRow> rows(h_values.size());
  const bool constant = V.is_constant();
  const double v0 = V.coeff({0, 0}).real();

  parallel_for(int(h_values.size()), opts.threads, [&](int i) {
    const double h = h_values[i];
    const double w = std::pow(h, delta);
    const double lo = E, hi = E + w;
    WeylCountRow& row = rows[i];
    row.h = h;
    long long count = 0;
    bool tie = false;
    if (constant) {
      // eigenvalues h^2 |k|^2 + v0 exactly
      const double t_lo = (lo - v0) / (h * h), t_hi = (hi - v0) / (h * h);
      auto near = [&](double t) {
        if (t < 0.0) return false;
        const double r = std::sqrt(t);
        for (double k : {std::floor(r), std::ceil(r)})
          if (std::abs(h * h * k * k - h * h * t) <= kTieTol * std::max(1.0, std::abs(h * h * t))) return true;
        return false;
      };
      if (n == 1) {
        count = lattice_below(t_hi) - lattice_below(t_lo);
        tie = near(t_lo) || near(t_hi);
      } else {
        const long long k1max = (long long)std::ceil(std::sqrt(std::max(t_hi, 0.0)));
        for (long long k1 = -k1max; k1 <= k1max; ++k1) {
          const double k1sq = double(k1) * double(k1);
          count += lattice_below(t_hi - k1sq) - lattice_below(t_lo - k1sq);
          tie = tie || near(t_lo - k1sq) || near(t_hi - k1sq);
        }
      }
    } else {
      const int K = schrodinger::K_rule(h, hi, V, opts.containment_margin);
      const long long dim = n == 1 ? 2LL * K + 1 : (2LL * K + 1) * (2LL * K + 1);
      if (dim > opts.max_dim)
        throw CapabilityError("torus matrix of dimension " + std::to_string(dim) + " at h = " + std::to_string(h) +
                              " exceeds the limit " + std::to_string(opts.max_dim));
      const auto op =
          schrodinger::assemble_torus_operator(V, h, K, schrodinger::ContainmentCheck{hi, opts.containment_margin});
      const auto dec = schrodinger::eigensolve(op);
      for (Eigen::Index j = 0; j < dec.eigenvalues.size(); ++j) {
        const double e = dec.eigenvalues(j);
        if (e >= lo && e < hi) ++count;
        if (std::abs(e - lo) <= kTieTol * std::max(1.0, std::abs(lo)) ||
            std::abs(e - hi) <= kTieTol * std::max(1.0, std::abs(hi)))
          tie = true;
      }
    }
    row.count = count;
    row.endpoint_tie = tie;
    row.scaled = std::pow(2 * pi, n) * std::pow(h, n - delta) * double(count);
    row.liouville = lv;
    row.deviation = (row.scaled - lv) / lv;
  });
  return rows;
}

bool eventually_decreasing(const std::vector<WeylCountRow>& rows) {
  const int m = int(rows.size());
  if (m < 2) return false;
  const int tail = std::max(2, int(std::ceil(m / 4.0)));
  for (int i = m - tail; i + 1 < m; ++i)
    if (std::abs(rows[i + 1].deviation) > std::abs(rows[i].deviation)) return false;
  return true;
}

}  // namespace semiweyl::experiments
