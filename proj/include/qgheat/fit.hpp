#pragma once

#include <cmath>
#include <span>

#include "qgheat/errors.hpp"

namespace qgheat {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = slope * x + intercept with the usual
/// standard error of the slope.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  if (n != y.size() || n < 2) throw ValidationError("fit_line needs >= 2 matched samples");
  double sx = 0.0, sy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ValidationError("fit_line: degenerate abscissa");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double r = y[i] - (f.slope * x[i] + f.intercept);
      ss += r * r;
    }
    f.slope_stderr = std::sqrt(ss / (n - 2) / sxx);
  }
  return f;
}

}  // namespace qgheat
