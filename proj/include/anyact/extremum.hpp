#pragma once

#include <cstddef>
#include <functional>

namespace anyact {

struct Extremum {
  double x = 0.0;
  double value = 0.0;
};

using SkipFn = std::function<bool(double)>;

// Largest f on an n-point uniform grid over [lo, hi]. Ties keep the larger x.
Extremum grid_argmax(const std::function<double(double)>& f, double lo, double hi, std::size_t n,
                     const SkipFn& skip = {});

// Grid search followed by Brent refinement in the neighbouring cells.
Extremum maximize(const std::function<double(double)>& f, double lo, double hi, std::size_t n,
                  const SkipFn& skip = {});
Extremum minimize(const std::function<double(double)>& f, double lo, double hi, std::size_t n,
                  const SkipFn& skip = {});

}  // namespace anyact
