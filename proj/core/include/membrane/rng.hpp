#pragma once

#include <algorithm>
#include <exception>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

namespace membrane {

std::uint64_t splitmix64(std::uint64_t x);

// Independent per-particle stream derived from (seed, index).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t index);

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

unsigned worker_count();

// Runs f(i) for i in [0, n) on a static partition; f must only write to slot i.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned w = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  for (unsigned k = 0; k < w; ++k) {
    pool.emplace_back([&, k] {
      try {
        for (std::size_t i = k; i < n; i += w) f(i);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace membrane
