#include "semiweyl/fit.hpp"

#include <cmath>
#include <string>

#include "semiweyl/common.hpp"

namespace semiweyl {

const char* error_kind_name(ErrorKind k) noexcept {
  switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::capability: return "capability";
    case ErrorKind::fit: return "fit";
    case ErrorKind::config: return "config";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::resolution: return "resolution";
    case ErrorKind::support: return "support";
  }
  return "unknown";
}

RemainderFit fit_loglog(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw FitError("fit_loglog: xs and ys differ in length");
  RemainderFit fit;
  std::vector<double> lx, ly;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      fit.excluded.push_back(i);
      continue;
    }
    lx.push_back(std::log(xs[i]));
    ly.push_back(std::log(ys[i]));
    used.push_back(i);
  }
  const std::size_t n = lx.size();
  if (n < 3)
    throw FitError("fit_loglog: need at least 3 positive points, have " + std::to_string(n));

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw FitError("fit_loglog: all abscissae coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
    fit.table.push_back({xs[used[i]], ys[used[i]], r});
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  return fit;
}

}  // namespace semiweyl
