#include "signorini/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace signorini {

LogLogFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("loglog_fit: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("loglog_fit: need at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw std::invalid_argument("loglog_fit: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    sx += lx[i];
    sy += ly[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0)) throw std::invalid_argument("loglog_fit: abscissae are all equal");
  LogLogFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  fit.stderr_slope = x.size() > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
  return fit;
}

}  // namespace signorini
