#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "semiweyl/common.hpp"

namespace semiweyl::symbolfam {

enum class BumpKind { standard_mollifier, plateau };

// Smooth compactly supported profile with values in [0,1].
//   standard_mollifier: exp(1 - 1/(1-u^2)) with u the affine image of t in (-1,1).
//   plateau: product of two smooth steps; equal to 1 on [p,q], support [a,b].
class BumpFunction {
 public:
  static BumpFunction standard(double a = -1.0, double b = 1.0, int max_order = 8);
  static BumpFunction plateau(double a, double p, double q, double b, int max_order = 8);

  double operator()(double t) const { return derivative(0, t); }
  double derivative(int j, double t) const;
  // out[k] = k-th derivative for k < out.size(); out.size() - 1 <= max_order.
  void derivatives(double t, std::span<double> out) const;

  BumpKind kind() const { return kind_; }
  Interval support() const { return {a_, b_}; }
  std::optional<Interval> plateau_interval() const;
  int max_order() const { return max_order_; }

 private:
  BumpFunction(BumpKind kind, double a, double p, double q, double b, int max_order);
  BumpKind kind_;
  double a_, p_, q_, b_;
  int max_order_;
};

// Derivatives of the unit mollifier phi(u) = exp(1 - 1/(1-u^2)) on (-1,1): out[k] = phi^(k)(u).
void unit_bump_derivatives(double u, std::span<double> out);

// Smooth step on [0,1]: 0 for s <= 0, 1 for s >= 1, the normalized primitive of the mollifier.
// out[k] = k-th derivative.
void smooth_step_derivatives(double s, std::span<double> out);
double smooth_step(double s);

// Integral of the unit mollifier over (-1,1).
double unit_bump_mass();

enum class OrderFunctionKind { one, jap_bracket_sq };

struct OrderFunction {
  OrderFunctionKind kind = OrderFunctionKind::one;
  double operator()(double eta) const {
    return kind == OrderFunctionKind::one ? 1.0 : 1.0 + eta * eta;
  }
};

// rho_h(x) = base((x - center) / (width_scale * h^delta)).
class CutoffFamily {
 public:
  CutoffFamily(BumpFunction base, double center, double delta, double width_scale);

  const BumpFunction& base() const { return base_; }
  double center() const { return center_; }
  double delta() const { return delta_; }
  double width_scale() const { return c_; }

  double width(double h) const;
  double value(double x, double h) const { return derivative(0, x, h); }
  double derivative(int j, double x, double h) const;
  Interval support(double h) const;

 private:
  BumpFunction base_;
  double center_, delta_, c_;
};

CutoffFamily make_window_family(BumpFunction base, double E, double delta, double c);

// Max of |rho_h^(j)| over 4096 uniform samples of the support.
double deriv_sup_norm(const CutoffFamily& fam, int j, double h);

struct ClassExponent {
  int j;
  double fitted_exponent;
  double predicted_exponent;  // -delta * j
};

std::vector<ClassExponent> estimate_class_exponents(const CutoffFamily& fam, int j_max,
                                                    std::span<const double> h_grid);

}  // namespace semiweyl::symbolfam
