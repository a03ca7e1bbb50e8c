#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "anyact/net_ir.hpp"

namespace anyact {

// Points in [-A, A]^d stored flat (point i occupies [i*d, (i+1)*d)).
struct SampleSet {
  std::size_t dim = 0;
  std::vector<double> points;
  std::size_t lattice = 0;
  std::size_t corners = 0;
  std::size_t random = 0;

  std::size_t size() const noexcept { return dim == 0 ? 0 : points.size() / dim; }
  const double* point(std::size_t i) const noexcept { return points.data() + i * dim; }
};

// n_lattice Halton points, the 2^min(d,10) corners, then max(1, n_lattice/4)
// uniform points drawn from a generator seeded with `seed`.
SampleSet sample_box(const Box& box, std::size_t n_lattice, std::uint64_t seed);

double radical_inverse(std::uint64_t index, unsigned base);

std::size_t worker_count(std::size_t n);
// Splits [0, n) into worker_count(n) contiguous ranges and runs
// fn(worker, begin, end) for each, on threads when more than one core exists.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace anyact
