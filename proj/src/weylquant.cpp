#include "semiweyl/weylquant.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "semiweyl/fit.hpp"

namespace semiweyl::weylquant {

namespace {

constexpr double kEdgeTol = 1e-10;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wrap_half(int k, int n) {
  k %= n;
  if (k < 0) k += n;
  if (k >= n / 2) k -= n;
  return k;  // in [-n/2, n/2)
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_edges(const SymbolOnGrid& s) {
  const CMatrix& v = s.values();
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  const double eta_edge = std::max(v.col(0).cwiseAbs().maxCoeff(), v.col(v.cols() - 1).cwiseAbs().maxCoeff());
  if (eta_edge > kEdgeTol * peak)
    throw ResolutionError("symbol not resolved by the dual grid: |s| at eta = +-" +
                          sci(s.grid().dual_cutoff(s.h())) + " is " + sci(eta_edge / peak) +
                          " of its maximum; refine the grid or raise h (h = " + sci(s.h()) + ")");
  const double y_edge = std::max(v.row(0).cwiseAbs().maxCoeff(), v.row(v.rows() - 1).cwiseAbs().maxCoeff());
  if (y_edge > kEdgeTol * peak)
    throw ResolutionError("symbol support reaches the edge of the position box [-" +
                          std::to_string(s.grid().half_width) + ", " +
                          std::to_string(s.grid().half_width) + ")");
}

}  // namespace

GridSpec GridSpec::make(double half_width, int points) {
  if (!(half_width > 0.0)) throw DomainError("grid half width must be positive");
  if (!is_power_of_two(points) || points < 4) throw DomainError("grid point count must be a power of two >= 4");
  return GridSpec{half_width, points};
}

SymbolOnGrid::SymbolOnGrid(GridSpec grid, double h, CMatrix values, bool compact, SymbolClass claimed)
    : grid_(grid), h_(h), values_(std::move(values)), compact_(compact), claimed_(claimed) {
  if (values_.rows() != 2 * grid_.points || values_.cols() != grid_.points)
    throw DomainError("symbol samples must have shape (2N, N)");
  if (!values_.allFinite()) throw NumericalError("symbol samples contain non-finite values");
}

SymbolOnGrid SymbolOnGrid::sample(const SymbolFn& s, const GridSpec& grid, double h, bool compact,
                                  SymbolClass claimed) {
  if (!(h > 0.0 && h <= 1.0)) throw DomainError("h must lie in (0, 1]");
  const int n = grid.points;
  CMatrix v(2 * n, n);
  const double dy = 0.5 * grid.dx(), deta = grid.dual_step(h);
  for (int c = 0; c < n; ++c) {
    const double eta = deta * (c - n / 2);
    for (int m = 0; m < 2 * n; ++m) v(m, c) = s(-grid.half_width + m * dy, eta);
  }
  return SymbolOnGrid(grid, h, std::move(v), compact, claimed);
}

bool SymbolOnGrid::is_real() const { return (values_.imag().array() == 0.0).all(); }

OperatorMatrix weyl_quantize_line(const SymbolOnGrid& s, MidpointRule rule) {
  if (s.compact()) check_edges(s);
  const int n = s.grid().points;
  const CMatrix& v = s.values();

  // g(m, k) = (1/N) sum_l s(y_m, eta_l) e^{2 pi i k l / N}
  CMatrix g(2 * n, n);
  Eigen::FFT<double> fft;
  std::vector<cplx> in(n), out(n);
  for (int m = 0; m < 2 * n; ++m) {
    for (int c = 0; c < n; ++c) in[(c + n / 2) % n] = v(m, c);
    fft.inv(out, in);
    for (int k = 0; k < n; ++k) g(m, k) = out[k];
  }

  OperatorMatrix a;
  a.entries.resize(n, n);
  a.h = s.h();
  a.basis = Basis::position_grid;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int k = ((i - j) % n + n) % n;
      if (rule == MidpointRule::linear) {
        a.entries(i, j) = g(i + j, k);
        continue;
      }
      const int kw = wrap_half(i - j, n);
      const int m = ((2 * j + kw) % (2 * n) + 2 * n) % (2 * n);
      if (kw == -n / 2)
        a.entries(i, j) = 0.5 * (g(m, k) + g((m + n) % (2 * n), k));
      else
        a.entries(i, j) = g(m, k);
    }
  }
  if (s.is_real()) {
    CMatrix sym = 0.5 * (a.entries + a.entries.adjoint());
    a.entries = std::move(sym);
    a.hermitian = true;
  }
  return a;
}

OperatorMatrix weyl_quantize_line(const SymbolOnGrid& s, const GridSpec& grid, double h) {
  if (grid.points != s.grid().points || grid.half_width != s.grid().half_width)
    throw DomainError("symbol was sampled on a different grid");
  if (h != s.h()) throw DomainError("symbol was sampled at a different h");
  return weyl_quantize_line(s);
}

OperatorMatrix quantize_torus(const TorusSymbol& s, int modes, double h) {
  if (modes < 0) throw DomainError("mode cutoff K must be nonnegative");
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const int dim = 2 * modes + 1;

  if (s.compact_in_xi) {
    double peak = 0.0, edge = 0.0;
    for (int q = 0; q < 64; ++q) {
      const double x = 2.0 * pi * q / 64;
      for (int k = -modes; k <= modes; ++k) peak = std::max(peak, std::abs(s.fn(x, h * k)));
      edge = std::max({edge, std::abs(s.fn(x, h * modes)), std::abs(s.fn(x, -h * modes))});
    }
    if (peak > 0.0 && edge > kEdgeTol * peak)
      throw ResolutionError("mode cutoff K = " + std::to_string(modes) +
                            " truncates the xi-support of the symbol at h = " + std::to_string(h));
  }

  int q = 64;
  while (q < 4 * modes + 2) q *= 2;
  Eigen::FFT<double> fft;
  std::vector<cplx> samples, coef;
  for (;;) {
    OperatorMatrix a;
    a.entries = CMatrix::Zero(dim, dim);
    a.basis = Basis::fourier_modes;
    a.h = h;
    samples.assign(q, cplx(0));
    double worst_tail = 0.0;
    for (int k = -modes; k <= modes; ++k) {
      for (int t = 0; t < q; ++t) samples[t] = s.fn(2.0 * pi * t / q, h * k);
      fft.fwd(coef, samples);
      double peak = 0.0, tail = 0.0;
      for (int t = 0; t < q; ++t) {
        const double mag = std::abs(coef[t]);
        peak = std::max(peak, mag);
        const int freq = wrap_half(t, q);
        if (std::abs(freq) >= q / 2 - q / 16) tail = std::max(tail, mag);
      }
      if (peak > 0.0) worst_tail = std::max(worst_tail, tail / peak);
      for (int kp = -modes; kp <= modes; ++kp) {
        const int idx = ((kp - k) % q + q) % q;
        a.entries(kp + modes, k + modes) = coef[idx] / double(q);
      }
    }
    if (worst_tail <= 1e-13) return a;
    if (q >= (1 << 16))
      throw ResolutionError("symbol is not resolved in x by 65536 periodic samples");
    q *= 2;
  }
}

TraceEstimate trace_via_symbol(const SymbolOnGrid& s) {
  const CMatrix& v = s.values();
  const double cell = 0.5 * s.grid().dx() * s.grid().dual_step(s.h());
  const double scale = cell / (2.0 * pi * s.h());
  TraceEstimate est;
  est.value = v.real().sum() * scale;
  const double peak = v.cwiseAbs().maxCoeff();
  const double edge = std::max({v.col(0).cwiseAbs().maxCoeff(), v.col(v.cols() - 1).cwiseAbs().maxCoeff(),
                                v.row(0).cwiseAbs().maxCoeff(), v.row(v.rows() - 1).cwiseAbs().maxCoeff()});
  est.tail_estimate = edge * double(v.size()) * scale;
  est.truncated = peak > 0.0 && edge > kEdgeTol * peak;
  return est;
}

double trace_norm(const OperatorMatrix& a) {
  if (a.hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<CMatrix> svd(a.entries);
  return svd.singularValues().sum();
}

double op_norm(const OperatorMatrix& a) {
  if (a.entries.size() == 0) return 0.0;
  if (a.hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return spectral_norm(a.entries);
}

cplx trace(const OperatorMatrix& a) { return a.entries.trace(); }

std::vector<int> interior_indices(const GridSpec& grid, double fraction) {
  std::vector<int> idx;
  for (int i = 0; i < grid.points; ++i)
    if (std::abs(grid.x(i)) < fraction * grid.half_width) idx.push_back(i);
  return idx;
}

OperatorMatrix interior_block(const OperatorMatrix& a, const GridSpec& grid, double fraction) {
  const std::vector<int> idx = interior_indices(grid, fraction);
  OperatorMatrix b;
  b.basis = a.basis;
  b.h = a.h;
  b.hermitian = a.hermitian;
  b.entries = a.entries(idx, idx);
  return b;
}

double spectral_norm(const CMatrix& a, double rel_tol, int max_iter) {
  if (a.size() == 0) return 0.0;
  // Lanczos on a^H a with full reorthogonalization, restarted from the top Ritz vector.
  const Eigen::Index n = a.cols();
  const int basis_max = int(std::min<Eigen::Index>(n, 64));
  CVector start(n);
  for (Eigen::Index i = 0; i < n; ++i)
    start(i) = cplx(1.0 + 0.37 * std::sin(1.3 * double(i)), 0.21 * std::cos(0.7 * double(i)));
  start.normalize();
  double sigma = 0.0;
  int used = 0;
  while (used < max_iter) {
    CMatrix Q(n, basis_max);
    std::vector<double> alpha, beta;
    Q.col(0) = start;
    for (int j = 0; j < basis_max && used < max_iter; ++j, ++used) {
      CVector w = a.adjoint() * (a * Q.col(j));
      alpha.push_back(Q.col(j).dot(w).real());
      for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).adjoint() * w);
      const int m = j + 1;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) T(i, i) = alpha[i];
      for (int i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      const double top = std::max(0.0, es.eigenvalues()(m - 1));
      sigma = std::sqrt(top);
      const double b = w.norm();
      // |theta - lambda| <= b |last component of the Ritz vector|
      const double residual = b * std::abs(es.eigenvectors()(m - 1, m - 1));
      if (top == 0.0 && b == 0.0) return 0.0;
      if (residual <= rel_tol * top || b == 0.0) return sigma;
      if (m == basis_max) {
        start = Q.leftCols(m) * es.eigenvectors().col(m - 1).cast<cplx>();
        start.normalize();
        break;
      }
      beta.push_back(b);
      Q.col(j + 1) = w / b;
    }
  }
  return sigma;
}

NormBoundFit op_norm_bound_check(const std::function<SymbolOnGrid(double h)>& family,
                                 const std::vector<double>& h_grid, double k, double /*delta*/) {
  if (h_grid.size() < 3) throw FitError("norm bound fit needs at least 3 h values");
  NormBoundFit out;
  for (double h : h_grid) {
    SymbolOnGrid s = family(h);
    OperatorMatrix a = weyl_quantize_line(s);
    out.h.push_back(h);
    out.norms.push_back(op_norm(interior_block(a, s.grid())));
  }
  out.slope = fit_loglog(out.h, out.norms).slope;
  out.within_bound = out.slope >= -k - 0.1;
  return out;
}

}  // namespace semiweyl::weylquant
