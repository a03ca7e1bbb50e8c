#include "anyact/sampling.hpp"

#include <algorithm>
#include <random>
#include <mutex>
#include <thread>

namespace anyact {

namespace {

constexpr unsigned kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59,
                                61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};

unsigned nth_prime(std::size_t i) {
  if (i < std::size(kPrimes)) return kPrimes[i];
  unsigned p = kPrimes[std::size(kPrimes) - 1];
  std::size_t k = std::size(kPrimes) - 1;
  while (k < i) {
    ++p;
    bool prime = true;
    for (unsigned q = 2; q * q <= p; ++q) {
      if (p % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) ++k;
  }
  return p;
}

}  // namespace

double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

SampleSet sample_box(const Box& box, std::size_t n_lattice, std::uint64_t seed) {
  SampleSet s;
  s.dim = box.dim;
  const double a = box.half_width;
  const std::size_t d = box.dim;
  const std::size_t corner_dims = std::min<std::size_t>(d, 10);
  s.lattice = n_lattice;
  s.corners = std::size_t{1} << corner_dims;
  s.random = std::max<std::size_t>(1, n_lattice / 4);
  s.points.reserve((s.lattice + s.corners + s.random) * d);

  std::vector<unsigned> bases(d);
  for (std::size_t j = 0; j < d; ++j) bases[j] = nth_prime(j);
  // Index 0 of the Halton sequence is the origin of the unit cube, i.e. a
  // corner of the box, which the corner pass already covers.
  for (std::size_t i = 0; i < n_lattice; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      s.points.push_back(-a + 2.0 * a * radical_inverse(i + 1, bases[j]));
    }
  }
  // Dimensions beyond the tenth sit at the box centre for the corner pass.
  for (std::size_t mask = 0; mask < s.corners; ++mask) {
    for (std::size_t j = 0; j < d; ++j) {
      if (j < corner_dims) {
        s.points.push_back(((mask >> j) & 1U) ? a : -a);
      } else {
        s.points.push_back(0.0);
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-a, a);
  for (std::size_t i = 0; i < s.random; ++i) {
    for (std::size_t j = 0; j < d; ++j) s.points.push_back(u(rng));
  }
  return s;
}

std::size_t worker_count(std::size_t n) {
  const std::size_t hw = std::max(1U, std::thread::hardware_concurrency());
  if (hw <= 1 || n < 2048) return 1;
  return std::min<std::size_t>(hw, n / 1024);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t workers = worker_count(n);
  if (workers <= 1) {
    fn(0, 0, n);
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t step = (n + workers - 1) / workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(n, w * step);
    const std::size_t end = std::min(n, begin + step);
    threads.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace anyact
