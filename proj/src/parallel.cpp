#include "headliner/parallel.hpp"

namespace headliner {

std::vector<double> batch_crf_log_partition(std::span<const PotentialTable> batch, Execution exec, int threads) {
  return map_indices(batch.size(), [&](std::size_t i) { return crf_log_partition(batch[i]); }, exec, threads);
}

std::vector<ChainDecoding> batch_crf_viterbi(std::span<const PotentialTable> batch, Execution exec, int threads) {
  return map_indices(batch.size(), [&](std::size_t i) { return crf_viterbi(batch[i]); }, exec, threads);
}

std::vector<double> batch_scrf_log_partition(std::span<const SegmentScores> batch, const SegmentTransitions& trans,
                                             Execution exec, int threads) {
  return map_indices(
      batch.size(), [&](std::size_t i) { return scrf_log_partition(batch[i], trans); }, exec, threads);
}

std::vector<std::vector<ScoredSegmentation>> batch_scrf_kbest(std::span<const SegmentScores> batch,
                                                              const SegmentTransitions& trans, std::size_t k,
                                                              Execution exec, int threads) {
  return map_indices(batch.size(), [&](std::size_t i) { return scrf_kbest(batch[i], trans, k); }, exec, threads);
}

}  // namespace headliner
