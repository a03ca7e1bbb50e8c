#include "anyact/extremum.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

namespace anyact {

Extremum grid_argmax(const std::function<double(double)>& f, double lo, double hi, std::size_t n,
                     const SkipFn& skip) {
  Extremum best{lo, -std::numeric_limits<double>::infinity()};
  bool found = false;
  const double step = n > 1 ? (hi - lo) / static_cast<double>(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i + 1 == n ? hi : lo + step * static_cast<double>(i);
    if (skip && skip(x)) continue;
    const double v = f(x);
    if (std::isnan(v)) continue;
    if (!found || v >= best.value) {
      best = {x, v};
      found = true;
    }
  }
  if (!found) best.value = std::numeric_limits<double>::quiet_NaN();
  return best;
}

Extremum maximize(const std::function<double(double)>& f, double lo, double hi, std::size_t n, const SkipFn& skip) {
  Extremum best = grid_argmax(f, lo, hi, n, skip);
  if (std::isnan(best.value) || n < 2) return best;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  const double a = std::max(lo, best.x - step);
  const double b = std::min(hi, best.x + step);
  auto neg = [&](double x) {
    if (skip && skip(x)) return std::numeric_limits<double>::infinity();
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : -v;
  };
  std::uintmax_t iters = 200;
  auto [x, v] = boost::math::tools::brent_find_minima(neg, a, b, std::numeric_limits<double>::digits / 2, iters);
  if (-v > best.value) best = {x, -v};
  return best;
}

Extremum minimize(const std::function<double(double)>& f, double lo, double hi, std::size_t n, const SkipFn& skip) {
  Extremum e = maximize([&](double x) { return -f(x); }, lo, hi, n, skip);
  e.value = -e.value;
  return e;
}

}  // namespace anyact
