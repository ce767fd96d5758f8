#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>

namespace mlsort {

// How per-PE local work inside a superstep is executed. Serial is the
// reference path; Parallel spreads PEs over OpenMP threads. Both must give
// bitwise identical results.
enum class Exec { Serial, Parallel };

// fn(i) for i in [0, n). An exception escaping fn is rethrown after the loop;
// when several iterations throw, the one with the lowest index wins so both
// execution modes report the same error.
template <class Fn>
void parallel_for(Exec exec, std::size_t n, Fn&& fn) {
  if (exec == Exec::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::mutex mu;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (static_cast<std::size_t>(i) < error_index) {
        error_index = static_cast<std::size_t>(i);
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

// Number of worker threads the Parallel path would use.
int available_threads();

}  // namespace mlsort
