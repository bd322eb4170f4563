#include "semiweyl/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/minima.hpp>

namespace semiweyl::schrodinger {

namespace {

constexpr double kSymTol = 1e-14;

}  // namespace

TorusPotential::TorusPotential(int dimension, std::map<Mode, cplx> coeffs)
    : dim_(dimension), coeffs_(std::move(coeffs)) {
  if (dim_ != 1 && dim_ != 2) throw DomainError("torus dimension must be 1 or 2");
  for (auto it = coeffs_.begin(); it != coeffs_.end();) {
    if (dim_ == 1 && it->first[1] != 0) throw DomainError("1-D potential has a mode with nonzero second index");
    if (it->second == cplx(0.0))
      it = coeffs_.erase(it);
    else
      ++it;
  }
  for (auto& [k, c] : coeffs_) {
    const cplx partner = coeff({-k[0], -k[1]});
    if (std::abs(partner - std::conj(c)) > kSymTol * (1.0 + std::abs(c)))
      throw DomainError("potential coefficients must satisfy V(-k) = conj V(k) (real-valued V)");
  }

  // extrema: dense sampling, then 1-D Brent refinement along each axis
  using boost::math::tools::brent_find_minima;
  const int n = dim_ == 1 ? 4096 : 256;
  const double step = 2.0 * pi / n;
  double best_min = 1e300, best_max = -1e300;
  std::array<double, 2> at_min{0, 0}, at_max{0, 0};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < (dim_ == 1 ? 1 : n); ++j) {
      std::array<double, 2> x{i * step, j * step};
      const double v = (*this)(std::span<const double>(x.data(), dim_));
      if (v < best_min) best_min = v, at_min = x;
      if (v > best_max) best_max = v, at_max = x;
    }
  auto refine = [&](std::array<double, 2> x, double sign) {
    double val = sign * (*this)(std::span<const double>(x.data(), dim_));
    for (int sweep = 0; sweep < 3; ++sweep)
      for (int d = 0; d < dim_; ++d) {
        auto line = [&](double t) {
          std::array<double, 2> y = x;
          y[d] = t;
          return sign * (*this)(std::span<const double>(y.data(), dim_));
        };
        auto r = brent_find_minima(line, x[d] - step, x[d] + step, 52);
        if (r.second < val) {
          val = r.second;
          x[d] = r.first;
        }
      }
    return sign * val;
  };
  min_ = std::min(best_min, refine(at_min, 1.0));
  max_ = std::max(best_max, refine(at_max, -1.0));
}

TorusPotential TorusPotential::zero(int dimension) { return TorusPotential(dimension, {}); }

TorusPotential TorusPotential::cosine(double amplitude) {
  return TorusPotential(1, {{{1, 0}, cplx(amplitude / 2)}, {{-1, 0}, cplx(amplitude / 2)}});
}

cplx TorusPotential::coeff(const Mode& k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? cplx(0.0) : it->second;
}

bool TorusPotential::is_constant() const {
  for (auto& [k, c] : coeffs_)
    if (k[0] != 0 || k[1] != 0) return false;
  return true;
}

double TorusPotential::operator()(std::span<const double> x) const {
  if (int(x.size()) != dim_) throw DomainError("point dimension does not match the torus");
  double s = 0.0;
  for (auto& [k, c] : coeffs_) {
    const double phase = k[0] * x[0] + (dim_ == 2 ? k[1] * x[1] : 0.0);
    s += (c * std::polar(1.0, phase)).real();
  }
  return s;
}

double TorusPotential::operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

std::array<double, 2> TorusPotential::gradient(std::span<const double> x) const {
  if (int(x.size()) != dim_) throw DomainError("point dimension does not match the torus");
  std::array<double, 2> g{0, 0};
  for (auto& [k, c] : coeffs_) {
    const double phase = k[0] * x[0] + (dim_ == 2 ? k[1] * x[1] : 0.0);
    const cplx d = cplx(0, 1) * c * std::polar(1.0, phase);
    g[0] += k[0] * d.real();
    g[1] += k[1] * d.real();
  }
  return g;
}

weylquant::OperatorMatrix TorusOperator::as_operator() const {
  return {matrix, weylquant::Basis::fourier_modes, h, true};
}

int K_rule(double h, double window_max, const TorusPotential& V, double margin) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  const double need = window_max + V.sup_norm() + margin;
  if (need <= 0.0) return 1;
  return std::max(1, int(std::ceil(std::sqrt(need) / h)));
}

TorusOperator assemble_torus_operator(const TorusPotential& V, double h, int K,
                                      std::optional<ContainmentCheck> containment) {
  if (!(h > 0.0)) throw DomainError("h must be positive");
  if (K < 0) throw DomainError("mode cutoff K must be nonnegative");
  if (containment) {
    const double need = containment->window_max + V.sup_norm() + containment->margin;
    if (h * h * double(K) * K < need)
      throw ResolutionError("mode cutoff K = " + std::to_string(K) + " at h = " + std::to_string(h) +
                            " gives h^2 K^2 = " + std::to_string(h * h * double(K) * K) + " < " +
                            std::to_string(need) + " (window max + ||V|| + margin)");
  }
  TorusOperator op;
  op.h = h;
  op.K = K;
  op.dimension = V.dimension();
  for (int a = -K; a <= K; ++a) {
    if (op.dimension == 1)
      op.modes.push_back({a, 0});
    else
      for (int b = -K; b <= K; ++b) op.modes.push_back({a, b});
  }
  const int n = int(op.modes.size());
  op.matrix = CMatrix::Zero(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const Mode diff{op.modes[p][0] - op.modes[q][0], op.modes[p][1] - op.modes[q][1]};
      op.matrix(p, q) = V.coeff(diff);
    }
  for (int p = 0; p < n; ++p) {
    const double k2 = double(op.modes[p][0]) * op.modes[p][0] + double(op.modes[p][1]) * op.modes[p][1];
    op.matrix(p, p) += h * h * k2;
  }
  return op;
}

SpectralDecomposition eigensolve(const CMatrix& a, double h) {
  if (a.rows() != a.cols()) throw DomainError("eigensolve needs a square matrix");
  const double scale = a.norm();
  const double defect = (a - a.adjoint()).norm();
  if (defect > 1e-12 * std::max(scale, 1e-300))
    throw DomainError("eigensolve needs a Hermitian matrix (defect " + std::to_string(defect) + ")");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  if (es.info() != Eigen::Success)
    throw NumericalError("Hermitian eigensolver did not converge (dim " + std::to_string(a.rows()) +
                         ", Frobenius norm " + std::to_string(scale) + ", Hermitian defect " +
                         std::to_string(defect) + ")");
  return {es.eigenvalues(), es.eigenvectors(), h};
}

SpectralDecomposition eigensolve(const TorusOperator& op) { return eigensolve(op.matrix, op.h); }

std::vector<std::pair<int, int>> eigenvalue_clusters(const RVector& ev, double tol) {
  std::vector<std::pair<int, int>> out;
  const int n = int(ev.size());
  int start = 0;
  for (int i = 1; i <= n; ++i)
    if (i == n || ev(i) - ev(i - 1) > tol) {
      out.push_back({start, i});
      start = i;
    }
  return out;
}

weylquant::OperatorMatrix spectral_funcalc(const SpectralDecomposition& dec,
                                           const std::function<double(double)>& f) {
  const int n = int(dec.eigenvalues.size());
  weylquant::OperatorMatrix out{CMatrix::Zero(n, n), weylquant::Basis::fourier_modes, dec.h, true};
  if (n == 0) return out;
  const double tol = 1e-9 * dec.eigenvalues.cwiseAbs().maxCoeff();
  std::vector<int> cols;
  std::vector<double> weights;
  for (auto [b, e] : eigenvalue_clusters(dec.eigenvalues, tol)) {
    const double mean = dec.eigenvalues.segment(b, e - b).mean();
    const double w = f(mean);
    if (w == 0.0) continue;
    for (int j = b; j < e; ++j) {
      cols.push_back(j);
      weights.push_back(w);
    }
  }
  if (cols.empty()) return out;
  const CMatrix u = dec.eigenvectors(Eigen::all, cols);
  const RVector w = Eigen::Map<const RVector>(weights.data(), Eigen::Index(weights.size()));
  out.entries.noalias() = u * w.asDiagonal() * u.adjoint();
  return out;
}

weylquant::OperatorMatrix spectral_funcalc(const SpectralDecomposition& dec, const symbolfam::CutoffFamily& fam,
                                           double h) {
  return spectral_funcalc(dec, [&](double e) { return fam.value(e, h); });
}

double hamiltonian_eval(const TorusPotential& V, std::span<const double> x, std::span<const double> xi) {
  if (x.size() != xi.size()) throw DomainError("point and covector dimensions differ");
  double k = 0.0;
  for (double c : xi) k += c * c;
  return k + V(x);
}

double hamiltonian_eval(const TorusPotential& V, double x, double xi) { return xi * xi + V(x); }

}  // namespace semiweyl::schrodinger
