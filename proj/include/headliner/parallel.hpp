#ifndef HEADLINER_PARALLEL_HPP_
#define HEADLINER_PARALLEL_HPP_

#include <omp.h>

#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <type_traits>
#include <vector>

#include "headliner/chain_crf.hpp"
#include "headliner/semicrf.hpp"

namespace headliner {

enum class Execution { kSerial, kParallel };

// out[i] = fn(i) for i in [0, n). The parallel path runs independent items on
// OpenMP threads (threads <= 0 means the runtime default); each slot is
// written once, so results match the serial path exactly. The first
// exception thrown by any item is rethrown after the loop.
template <typename Fn>
auto map_indices(std::size_t n, Fn&& fn, Execution exec = Execution::kParallel, int threads = 0)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> out(n);
  if (exec == Execution::kSerial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const int team = threads > 0 ? threads : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(team)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

// Batch versions of the inference kernels over independent sentences.
std::vector<double> batch_crf_log_partition(std::span<const PotentialTable> batch,
                                            Execution exec = Execution::kParallel, int threads = 0);
std::vector<ChainDecoding> batch_crf_viterbi(std::span<const PotentialTable> batch,
                                             Execution exec = Execution::kParallel, int threads = 0);
std::vector<double> batch_scrf_log_partition(std::span<const SegmentScores> batch, const SegmentTransitions& trans,
                                             Execution exec = Execution::kParallel, int threads = 0);
std::vector<std::vector<ScoredSegmentation>> batch_scrf_kbest(std::span<const SegmentScores> batch,
                                                              const SegmentTransitions& trans, std::size_t k,
                                                              Execution exec = Execution::kParallel,
                                                              int threads = 0);

}  // namespace headliner

#endif  // HEADLINER_PARALLEL_HPP_
