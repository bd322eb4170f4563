#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace semiweyl {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;

// Error taxonomy. The CLI maps each kind to an exit status.
enum class ErrorKind { domain, capability, fit, config, numerical, resolution, support };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::domain, w) {}
};
struct CapabilityError : Error {
  explicit CapabilityError(const std::string& w) : Error(ErrorKind::capability, w) {}
};
struct FitError : Error {
  explicit FitError(const std::string& w) : Error(ErrorKind::fit, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::config, w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error(ErrorKind::numerical, w) {}
};
// Under-resolved grids, truncated bases, spectral windows outside the basis.
struct ResolutionError : Error {
  explicit ResolutionError(const std::string& w) : Error(ErrorKind::resolution, w) {}
};
struct SupportError : Error {
  explicit SupportError(const std::string& w) : Error(ErrorKind::support, w) {}
};

const char* error_kind_name(ErrorKind k) noexcept;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
};

}  // namespace semiweyl
