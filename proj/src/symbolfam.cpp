#include "semiweyl/symbolfam.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "semiweyl/fit.hpp"

namespace semiweyl::symbolfam {

namespace {

constexpr int kMaxSupportedOrder = 16;
constexpr int kStepPanels = 2048;

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

double unit_bump_value(double u) {
  if (!(std::abs(u) < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

// Cumulative mass of the mollifier at panel boundaries of (-1,1), plus the total.
struct StepTable {
  std::array<double, kStepPanels + 1> cum{};
  double mass = 0.0;

  StepTable() {
    using boost::math::quadrature::gauss;
    const double dv = 2.0 / kStepPanels;
    double acc = 0.0, comp = 0.0;
    cum[0] = 0.0;
    for (int i = 0; i < kStepPanels; ++i) {
      double lo = -1.0 + i * dv;
      double piece = gauss<double, 10>::integrate(unit_bump_value, lo, lo + dv);
      double y = piece - comp;
      double t = acc + y;
      comp = (t - acc) - y;
      acc = t;
      cum[i + 1] = acc;
    }
    mass = acc;
  }
};

const StepTable& step_table() {
  static const StepTable table;
  return table;
}

// Normalized primitive of the mollifier on (-1,1).
double bump_cdf(double v) {
  if (v <= -1.0) return 0.0;
  if (v >= 1.0) return 1.0;
  using boost::math::quadrature::gauss;
  const StepTable& tab = step_table();
  const double dv = 2.0 / kStepPanels;
  int i = std::clamp(int(std::floor((v + 1.0) / dv)), 0, kStepPanels - 1);
  double lo = -1.0 + i * dv;
  double part = v > lo ? gauss<double, 10>::integrate(unit_bump_value, lo, v) : 0.0;
  return (tab.cum[i] + part) / tab.mass;
}

}  // namespace

void unit_bump_derivatives(double u, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  if (out.empty() || !(std::abs(u) < 1.0)) return;
  const double g0 = 1.0 - 1.0 / (1.0 - u * u);
  if (g0 < -700.0) return;
  const int n = int(out.size()) - 1;
  // g^(k) = -k!/2 [(1-u)^(-k-1) + (-1)^k (1+u)^(-k-1)], k >= 1
  std::vector<double> g(n + 1, 0.0);
  const double a = 1.0 / (1.0 - u), b = 1.0 / (1.0 + u);
  double pa = a, pb = b, fact = 1.0;
  for (int k = 1; k <= n; ++k) {
    pa *= a;
    pb *= b;
    fact *= k;
    g[k] = -0.5 * fact * (pa + ((k % 2) ? -pb : pb));
  }
  out[0] = std::exp(g0);
  for (int m = 1; m <= n; ++m) {
    double s = 0.0;
    for (int k = 0; k < m; ++k) s += binom(m - 1, k) * g[k + 1] * out[m - 1 - k];
    out[m] = s;
  }
}

double unit_bump_mass() { return step_table().mass; }

double smooth_step(double s) { return bump_cdf(2.0 * s - 1.0); }

void smooth_step_derivatives(double s, std::span<double> out) {
  if (out.empty()) return;
  std::fill(out.begin(), out.end(), 0.0);
  out[0] = smooth_step(s);
  if (out.size() == 1 || s <= 0.0 || s >= 1.0) return;
  std::vector<double> phi(out.size() - 1);
  unit_bump_derivatives(2.0 * s - 1.0, phi);
  const double mass = unit_bump_mass();
  double scale = 1.0;
  for (std::size_t k = 1; k < out.size(); ++k) {
    scale *= 2.0;
    out[k] = scale * phi[k - 1] / mass;
  }
}

BumpFunction::BumpFunction(BumpKind kind, double a, double p, double q, double b, int max_order)
    : kind_(kind), a_(a), p_(p), q_(q), b_(b), max_order_(max_order) {
  if (!(a < b)) throw DomainError("bump support must satisfy a < b");
  if (max_order < 0 || max_order > kMaxSupportedOrder)
    throw CapabilityError("bump derivative order must lie in [0, " +
                          std::to_string(kMaxSupportedOrder) + "]");
  if (kind == BumpKind::plateau && !(a < p && p <= q && q < b))
    throw DomainError("plateau bump needs a < p <= q < b");
}

BumpFunction BumpFunction::standard(double a, double b, int max_order) {
  return BumpFunction(BumpKind::standard_mollifier, a, 0.5 * (a + b), 0.5 * (a + b), b,
                      max_order);
}

BumpFunction BumpFunction::plateau(double a, double p, double q, double b, int max_order) {
  return BumpFunction(BumpKind::plateau, a, p, q, b, max_order);
}

std::optional<Interval> BumpFunction::plateau_interval() const {
  if (kind_ == BumpKind::plateau) return Interval{p_, q_};
  return std::nullopt;
}

double BumpFunction::derivative(int j, double t) const {
  if (j < 0 || j > max_order_)
    throw CapabilityError("derivative order " + std::to_string(j) + " exceeds J = " +
                          std::to_string(max_order_));
  std::array<double, kMaxSupportedOrder + 1> buf{};
  derivatives(t, std::span<double>(buf.data(), std::size_t(j) + 1));
  return buf[std::size_t(j)];
}

void BumpFunction::derivatives(double t, std::span<double> out) const {
  if (out.empty()) return;
  if (int(out.size()) - 1 > max_order_)
    throw CapabilityError("derivative order " + std::to_string(out.size() - 1) +
                          " exceeds J = " + std::to_string(max_order_));
  std::fill(out.begin(), out.end(), 0.0);
  if (t <= a_ || t >= b_) return;
  const std::size_t n = out.size();

  if (kind_ == BumpKind::standard_mollifier) {
    const double scale = 2.0 / (b_ - a_);
    unit_bump_derivatives((2.0 * t - a_ - b_) / (b_ - a_), out);
    double f = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
      f *= scale;
      out[k] *= f;
    }
    return;
  }

  if (t >= p_ && t <= q_) {
    out[0] = 1.0;
    return;
  }
  std::array<double, kMaxSupportedOrder + 1> left{}, right{};
  if (t < p_) {
    smooth_step_derivatives((t - a_) / (p_ - a_), std::span<double>(left.data(), n));
    double f = 1.0;
    for (std::size_t k = 1; k < n; ++k) left[k] *= (f /= (p_ - a_));
  } else {
    left[0] = 1.0;
  }
  if (t > q_) {
    smooth_step_derivatives((b_ - t) / (b_ - q_), std::span<double>(right.data(), n));
    double f = 1.0;
    for (std::size_t k = 1; k < n; ++k) right[k] *= (f /= -(b_ - q_));
  } else {
    right[0] = 1.0;
  }
  for (std::size_t m = 0; m < n; ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k <= m; ++k) s += binom(int(m), int(k)) * left[k] * right[m - k];
    out[m] = s;
  }
}

CutoffFamily::CutoffFamily(BumpFunction base, double center, double delta, double width_scale)
    : base_(base), center_(center), delta_(delta), c_(width_scale) {
  if (!(delta >= 0.0 && delta < 0.5))
    throw DomainError("window exponent delta must lie in [0, 1/2), got " + std::to_string(delta));
  if (!(width_scale > 0.0))
    throw DomainError("window width scale c must be positive, got " + std::to_string(width_scale));
  if (!std::isfinite(center)) throw DomainError("window center must be finite");
}

double CutoffFamily::width(double h) const { return c_ * std::pow(h, delta_); }

double CutoffFamily::derivative(int j, double x, double h) const {
  const double w = width(h);
  return base_.derivative(j, (x - center_) / w) * std::pow(w, -j);
}

Interval CutoffFamily::support(double h) const {
  const double w = width(h);
  const Interval s = base_.support();
  return {center_ + w * s.lo, center_ + w * s.hi};
}

CutoffFamily make_window_family(BumpFunction base, double E, double delta, double c) {
  return CutoffFamily(base, E, delta, c);
}

double deriv_sup_norm(const CutoffFamily& fam, int j, double h) {
  if (j < 0 || j > fam.base().max_order())
    throw CapabilityError("derivative order " + std::to_string(j) + " exceeds J = " +
                          std::to_string(fam.base().max_order()));
  if (!(h > 0.0 && h <= 1.0)) throw DomainError("h must lie in (0, 1]");
  constexpr int kSamples = 4096;
  const Interval s = fam.support(h);
  double best = 0.0;
  for (int k = 0; k < kSamples; ++k) {
    double x = s.lo + (s.hi - s.lo) * double(k) / double(kSamples - 1);
    best = std::max(best, std::abs(fam.derivative(j, x, h)));
  }
  return best;
}

std::vector<ClassExponent> estimate_class_exponents(const CutoffFamily& fam, int j_max,
                                                    std::span<const double> h_grid) {
  if (h_grid.size() < 3)
    throw FitError("class exponent fit needs at least 3 h values, have " +
                   std::to_string(h_grid.size()));
  std::vector<ClassExponent> out;
  std::vector<double> norms(h_grid.size());
  for (int j = 0; j <= j_max; ++j) {
    for (std::size_t i = 0; i < h_grid.size(); ++i) norms[i] = deriv_sup_norm(fam, j, h_grid[i]);
    RemainderFit fit = fit_loglog(h_grid, norms);
    out.push_back({j, fit.slope, -fam.delta() * j});
  }
  return out;
}

}  // namespace semiweyl::symbolfam
