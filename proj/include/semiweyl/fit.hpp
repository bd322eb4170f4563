#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace semiweyl {

// Ordinary least squares on (log x, log y).
struct RemainderFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  struct Row {
    double x;
    double y;
    double residual;  // log y - (intercept + slope log x)
  };
  std::vector<Row> table;
  std::vector<std::size_t> excluded;  // indices with y <= 0 or non-finite
};

// Throws FitError when fewer than 3 usable points remain.
RemainderFit fit_loglog(std::span<const double> xs, std::span<const double> ys);

}  // namespace semiweyl
