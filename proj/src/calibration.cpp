#include <cmath>
#include <limits>

#include "anyact/gadgets.hpp"

namespace anyact {

double grid_sup_error(const std::function<double(double)>& approx, const std::function<double(double)>& target,
                      double M, std::size_t n) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = n == 1 ? 0.0 : -M + 2.0 * M * static_cast<double>(i) / static_cast<double>(n - 1);
    const double t = target(x);
    if (std::isnan(t)) continue;  // target undefined here (e.g. a kink)
    const double e = std::fabs(approx(x) - t);
    if (!(e <= worst)) worst = e;
  }
  return worst;
}

ScaleSearch calibrate_scale(const std::function<double(double)>& error_at, double start, SearchDirection dir,
                            double tol, double limit) {
  const bool grow = dir == SearchDirection::Grow;
  ScaleSearch out;
  out.error = std::numeric_limits<double>::infinity();
  out.param = start;
  double p = start;
  double fail = std::nan("");
  double pass = 0.0;
  double pass_err = 0.0;
  bool found = false;
  for (int step = 0; step <= 60; ++step) {
    if (grow ? p > limit : p < limit) break;
    const double e = error_at(p);
    ++out.evaluations;
    if (e < out.error) {
      out.error = e;
      out.param = p;
    }
    if (e <= tol) {
      pass = p;
      pass_err = e;
      found = true;
      break;
    }
    fail = p;
    p = grow ? p * 2.0 : p / 2.0;
  }
  if (!found) return out;
  if (!std::isnan(fail)) {
    for (int i = 0; i < 20; ++i) {
      const double mid = std::sqrt(fail * pass);
      const double e = error_at(mid);
      ++out.evaluations;
      if (e <= tol) {
        pass = mid;
        pass_err = e;
      } else {
        fail = mid;
      }
    }
  }
  out.param = pass;
  out.error = pass_err;
  out.met = true;
  return out;
}

}  // namespace anyact
