#pragma once

#include <vector>

namespace signorini {

/// Least-squares line through (log x, log y).
struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log residuals
  double stderr_slope = 0.0;
  int points = 0;
};

/// Requires at least two points with x, y > 0.
LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace signorini
