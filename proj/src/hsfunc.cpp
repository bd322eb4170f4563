#include "semiweyl/hsfunc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace semiweyl::hsfunc {

namespace {

constexpr double kEdgeTol = 1e-12;    // |f| at the sample window edge, relative to max |f|
constexpr double kSuppTol = 1e-14;    // samples below this (relative) count as outside supp f
constexpr double kTailTol = 1e-16;    // |F| relative to ||f||_1 where the xi grid stops
constexpr int kTailBlock = 64;
constexpr int kChunks = 16;

}  // namespace

SampledFunction SampledFunction::sample(const std::function<double(double)>& f, double a, double b, int n) {
  if (!(b > a)) throw DomainError("sample window must have positive length");
  if (n < 3) throw DomainError("need at least 3 samples");
  SampledFunction s;
  s.x0 = a;
  s.dx = (b - a) / (n - 1);
  s.values.resize(n);
  for (int i = 0; i < n; ++i) s.values[i] = f(s.x(i));
  return s;
}

symbolfam::BumpFunction default_extension_cutoff() { return symbolfam::BumpFunction::plateau(-3, -1, 1, 3, 2); }

AlmostAnalyticExtension::AlmostAnalyticExtension(const SampledFunction& f, int order, symbolfam::BumpFunction chi,
                                                 ExtensionOptions opts)
    : order_(order), chi_(std::move(chi)), psi_(symbolfam::BumpFunction::plateau(-2, -1, 1, 2, 2)) {
  if (order < 1) throw DomainError("extension order must be at least 1");
  if (f.values.size() < 3 || !(f.dx > 0.0)) throw DomainError("sampled function needs >= 3 samples and dx > 0");
  if (!(opts.plateau_margin >= 0.0) || !(opts.transition_width > 0.0))
    throw DomainError("extension margins must be nonnegative with a positive transition width");
  auto pl = chi_.plateau_interval();
  if (!pl || pl->lo > 0.0 || pl->hi < 0.0) throw DomainError("chi must equal 1 near 0");

  const auto& v = f.values;
  const std::size_t n = v.size();
  double vmax = 0.0, l1 = 0.0;
  for (double a : v) {
    if (!std::isfinite(a)) throw DomainError("sampled function has non-finite values");
    vmax = std::max(vmax, std::abs(a));
    l1 += std::abs(a) * f.dx;
  }
  if (vmax == 0.0) {
    zero_ = true;
    f_support_ = {f.x(n / 2), f.x(n / 2)};
    center_ = f_support_.lo;
  } else {
    if (std::abs(v.front()) > kEdgeTol * vmax || std::abs(v.back()) > kEdgeTol * vmax)
      throw SupportError("f does not vanish at the edge of its sample window [" + std::to_string(f.window().lo) +
                         ", " + std::to_string(f.window().hi) + "]");
    std::size_t first = 0, last = n - 1;
    while (std::abs(v[first]) <= kSuppTol * vmax) ++first;
    while (std::abs(v[last]) <= kSuppTol * vmax) --last;
    f_support_ = {f.x(first > 0 ? first - 1 : 0), f.x(std::min(last + 1, n - 1))};
    center_ = 0.5 * (f_support_.lo + f_support_.hi);
  }
  const double p_lo = f_support_.lo - opts.plateau_margin, p_hi = f_support_.hi + opts.plateau_margin;
  psi_ = symbolfam::BumpFunction::plateau(p_lo - opts.transition_width, p_lo, p_hi, p_hi + opts.transition_width, 2);
  if (zero_) return;

  // Images of f under the xi-trapezoid period must miss supp psi.
  const double half_f = 0.5 * f_support_.length();
  const double half_psi = 0.5 * psi_.support().length();
  const double period = 2.0 * (half_f + half_psi) + 1.0;
  const double dxi = 2.0 * pi / period;
  const int k_nyquist = std::max(kTailBlock, int(0.9 * pi / (f.dx * dxi)));

  std::vector<double> rel(n);
  for (std::size_t m = 0; m < n; ++m) rel[m] = f.x(m) - center_;
  auto transform = [&](double xi) {
    cplx s = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      if (v[m] != 0.0) s += v[m] * std::polar(1.0, -rel[m] * xi);
    return s * f.dx;
  };
  std::vector<cplx> half{transform(0.0)};
  double block_max = 0.0;
  for (int k = 1; k <= k_nyquist; ++k) {
    half.push_back(transform(k * dxi));
    block_max = std::max(block_max, std::abs(half.back()));
    if (k % kTailBlock == 0) {
      if (block_max < kTailTol * l1) break;
      block_max = 0.0;
    }
  }
  const int kmax = int(half.size()) - 1;
  xi_.resize(2 * kmax + 1);
  weights_.resize(2 * kmax + 1);
  for (int k = -kmax; k <= kmax; ++k) {
    xi_[k + kmax] = k * dxi;
    weights_[k + kmax] = dxi * (k >= 0 ? half[k] : std::conj(half[-k]));
  }
}

void AlmostAnalyticExtension::integrals(const std::vector<double>& xs, const std::vector<double>& ys, CMatrix& I,
                                        CMatrix* J) const {
  const Eigen::Index nx = Eigen::Index(xs.size()), ny = Eigen::Index(ys.size()), nl = Eigen::Index(xi_.size());
  CMatrix E(nx, nl);
  for (Eigen::Index i = 0; i < nx; ++i)
    for (Eigen::Index l = 0; l < nl; ++l) E(i, l) = std::polar(1.0, (xs[i] - center_) * xi_[l]);
  CMatrix W1 = CMatrix::Zero(nl, ny), W2;
  if (J) W2 = CMatrix::Zero(nl, ny);
  const Interval cs = chi_.support();
  double d[2];
  for (Eigen::Index c = 0; c < ny; ++c)
    for (Eigen::Index l = 0; l < nl; ++l) {
      const double t = ys[c] * xi_[l];
      if (t <= cs.lo || t >= cs.hi) continue;
      chi_.derivatives(t, std::span<double>(d, 2));
      const cplx w = std::exp(-t) * weights_[l];
      W1(l, c) = w * d[0];
      if (J) W2(l, c) = w * xi_[l] * d[1];
    }
  I.noalias() = E * W1;
  if (J) J->noalias() = E * W2;
}

CMatrix AlmostAnalyticExtension::value_grid(const std::vector<double>& xs, const std::vector<double>& ys) const {
  CMatrix out = CMatrix::Zero(Eigen::Index(xs.size()), Eigen::Index(ys.size()));
  if (zero_ || xs.empty() || ys.empty()) return out;
  CMatrix I;
  integrals(xs, ys, I, nullptr);
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double cy = chi_(ys[c]);
    if (cy == 0.0) continue;
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, c) = psi_(xs[i]) * cy * I(i, c) / (2.0 * pi);
  }
  return out;
}

CMatrix AlmostAnalyticExtension::dbar_grid(const std::vector<double>& xs, const std::vector<double>& ys) const {
  CMatrix out = CMatrix::Zero(Eigen::Index(xs.size()), Eigen::Index(ys.size()));
  if (zero_ || xs.empty() || ys.empty()) return out;
  CMatrix I, J;
  integrals(xs, ys, I, &J);
  std::vector<std::array<double, 2>> px(xs.size()), cy(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) psi_.derivatives(xs[i], px[i]);
  for (std::size_t c = 0; c < ys.size(); ++c) chi_.derivatives(ys[c], cy[c]);
  const cplx iu(0.0, 1.0);
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      const auto& p = px[i];
      const auto& q = cy[c];
      out(i, c) = (p[1] * q[0] * I(i, c) + iu * p[0] * q[1] * I(i, c) + iu * p[0] * q[0] * J(i, c)) / (4.0 * pi);
    }
  return out;
}

cplx AlmostAnalyticExtension::value(double x, double y) const { return value_grid({x}, {y})(0, 0); }
cplx AlmostAnalyticExtension::dbar(double x, double y) const { return dbar_grid({x}, {y})(0, 0); }

AlmostAnalyticExtension build_extension(const SampledFunction& f, int order, const symbolfam::BumpFunction& chi,
                                        ExtensionOptions opts) {
  return AlmostAnalyticExtension(f, order, chi, opts);
}

std::vector<double> dyadic_shells(int lo_exp, int hi_exp) {
  if (hi_exp < lo_exp) throw DomainError("dyadic shell exponents out of order");
  std::vector<double> out;
  for (int k = lo_exp; k <= hi_exp; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

std::vector<ShellSup> dbar_bound_profile(const AlmostAnalyticExtension& ext, const std::vector<double>& shells) {
  const double ymax = ext.support_y();
  for (double y : shells)
    if (!(y > 0.0) || y > ymax) throw DomainError("shell y must lie in (0, " + std::to_string(ymax) + "]");
  constexpr int kX = 512, kY = 4;
  const Interval sx = ext.support_x();
  std::vector<double> xs(kX);
  for (int i = 0; i < kX; ++i) xs[i] = sx.lo + (i + 0.5) * sx.length() / kX;
  std::vector<ShellSup> out;
  for (double y : shells) {
    std::vector<double> ys;
    for (int k = 0; k < kY; ++k) {
      const double t = y * std::pow(0.5, double(k) / (kY - 1));
      ys.push_back(t);
      ys.push_back(-t);
    }
    out.push_back({y, ext.dbar_grid(xs, ys).cwiseAbs().maxCoeff()});
  }
  return out;
}

ComplexQuadrature ComplexQuadrature::midpoint(double x_min, double x_max, double y_max, int qx, int qy,
                                              double grading) {
  if (!(x_max > x_min) || !(y_max > 0.0)) throw DomainError("quadrature rectangle must have positive area");
  if (qx < 1 || qy < 1) throw DomainError("quadrature needs at least one node per direction");
  if (!(grading >= 1.0)) throw DomainError("quadrature grading must be >= 1");
  ComplexQuadrature q;
  q.x_min = x_min;
  q.x_max = x_max;
  q.y_max = y_max;
  q.qx = qx;
  q.qy = qy;
  q.grading = grading;
  const double hx = (x_max - x_min) / qx;
  for (int i = 0; i < qx; ++i) {
    q.x_nodes.push_back(x_min + (i + 0.5) * hx);
    q.x_weights.push_back(hx);
  }
  auto g = [&](double u) { return y_max * std::copysign(std::pow(std::abs(u), grading), u); };
  const double hu = 2.0 / qy;
  for (int k = 0; k < qy; ++k) {
    const double a = -1.0 + k * hu, b = a + hu;
    q.y_nodes.push_back(g(double(2 * k + 1 - qy) / qy));
    q.y_weights.push_back(g(b) - g(a));
  }
  return q;
}

ComplexQuadrature ComplexQuadrature::covering(const AlmostAnalyticExtension& ext, int qx, int qy, double grading) {
  return midpoint(ext.support_x().lo, ext.support_x().hi, ext.support_y(), qx, qy, grading);
}

weylquant::OperatorMatrix hs_funcalc(const weylquant::OperatorMatrix& P, const AlmostAnalyticExtension& ext,
                                     const ComplexQuadrature& quad, HsOptions opts) {
  const Eigen::Index n = P.size();
  if (P.entries.cols() != n) throw DomainError("operator matrix must be square");
  const double scale = std::max(P.entries.norm(), 1e-300);
  if ((P.entries - P.entries.adjoint()).norm() > 1e-12 * scale)
    throw DomainError("hs_funcalc needs a Hermitian operator");
  weylquant::OperatorMatrix out{CMatrix::Zero(n, n), P.basis, P.h, true};
  if (ext.is_zero() || n == 0) return out;
  const Interval sx = ext.support_x();
  constexpr double kCover = 1e-12;
  if (quad.x_min > sx.lo + kCover || quad.x_max < sx.hi - kCover || quad.y_max < ext.support_y() - kCover)
    throw SupportError("quadrature rectangle does not cover the extension support");
  if (opts.threads < 1) throw DomainError("thread count must be positive");
  if (!(opts.eps_y >= 0.0)) throw DomainError("eps_y must be nonnegative");

  // Pair y with -y: R(conj z) = R(z)^*. Midpoint y-nodes are symmetric, so pair by index.
  const int qy = int(quad.y_nodes.size());
  struct YPair {
    double y;
    int up, down;  // indices of +y and -y, down = -1 if unpaired
  };
  std::vector<YPair> pairs;
  for (int k = 0; k < qy; ++k) {
    const double y = quad.y_nodes[k];
    if (y == 0.0) {
      if (quad.y_weights[k] != 0.0 && ext.order() < 2)
        throw ConfigError("quadrature node on the real axis needs extension order >= 2");
      continue;
    }
    if (std::abs(y) < opts.eps_y) continue;
    if (y < 0.0) continue;
    const int mirror = qy - 1 - k;
    const bool paired = std::abs(quad.y_nodes[mirror] + y) <= 1e-14 * quad.y_max;
    pairs.push_back({y, k, paired ? mirror : -1});
  }
  for (int k = 0; k < qy; ++k) {
    const double y = quad.y_nodes[k];
    if (y < 0.0 && std::abs(y) >= opts.eps_y &&
        std::abs(quad.y_nodes[qy - 1 - k] + y) > 1e-14 * quad.y_max)
      pairs.push_back({y, k, -1});
  }
  if (pairs.empty()) return out;

  std::vector<double> ys;
  for (auto& p : pairs) {
    ys.push_back(quad.y_nodes[p.up]);
    if (p.down >= 0) ys.push_back(quad.y_nodes[p.down]);
  }
  const CMatrix D = ext.dbar_grid(quad.x_nodes, ys);

  const int qx = int(quad.x_nodes.size());
  const int chunks = std::min(kChunks, qx);
  std::vector<CMatrix> partial(chunks);
  const CMatrix Pm = P.entries;
  auto work = [&](int chunk) {
    CMatrix acc = CMatrix::Zero(n, n);
    const CMatrix id = CMatrix::Identity(n, n);
    Eigen::PartialPivLU<CMatrix> lu;
    for (int i = chunk * qx / chunks; i < (chunk + 1) * qx / chunks; ++i) {
      int col = 0;
      for (auto& p : pairs) {
        const cplx c_up = quad.x_weights[i] * quad.y_weights[p.up] * D(i, col++);
        cplx c_down = 0.0;
        if (p.down >= 0) c_down = quad.x_weights[i] * quad.y_weights[p.down] * D(i, col++);
        if (c_up == 0.0 && c_down == 0.0) continue;
        const cplx z(quad.x_nodes[i], p.y);
        CMatrix shifted = -Pm;
        shifted.diagonal().array() += z;
        lu.compute(shifted);
        const CMatrix R = lu.solve(id);
        if (!R.allFinite())
          throw NumericalError("resolvent is not finite at z = " + std::to_string(z.real()) + " + " +
                               std::to_string(z.imag()) + "i");
        acc += c_up * R;
        if (c_down != 0.0) acc += c_down * R.adjoint();
      }
    }
    partial[chunk] = std::move(acc);
  };
  const int threads = std::min(opts.threads, chunks);
  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) work(c);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (int c = t; c < chunks; c += threads) work(c);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  for (int c = 0; c < chunks; ++c) out.entries += partial[c];
  out.entries *= -1.0 / pi;
  return out;
}

weylquant::OperatorMatrix hs_funcalc(const weylquant::OperatorMatrix& P, const SampledFunction& f, int order,
                                     const ComplexQuadrature& quad, HsOptions opts) {
  return hs_funcalc(P, build_extension(f, order), quad, opts);
}

std::vector<ResolventNorm> resolvent_norm_probe(const weylquant::OperatorMatrix& P, const std::vector<cplx>& zs) {
  const Eigen::Index n = P.size();
  if (P.entries.cols() != n) throw DomainError("operator matrix must be square");
  std::vector<ResolventNorm> out;
  for (cplx z : zs) {
    if (z.imag() == 0.0) throw DomainError("resolvent probe needs Im z != 0");
    CMatrix shifted = -P.entries;
    shifted.diagonal().array() += z;
    Eigen::BDCSVD<CMatrix> svd(shifted);
    const double smin = svd.singularValues()(n - 1);
    out.push_back({z, smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity()});
  }
  return out;
}

}  // namespace semiweyl::hsfunc
