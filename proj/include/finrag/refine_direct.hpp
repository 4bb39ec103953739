// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "finrag/corpus.hpp"
#include "finrag/feedback.hpp"
#include "finrag/retrieval.hpp"

namespace finrag {

struct RefinementConfig {
  double alpha = 1e-4;
  std::size_t batch_size = 64;
  // When every weight clamps to zero: reset to uniform instead of throwing
  // DegenerateWeights.
  bool reset_on_degenerate = false;

  void validate() const;
};

struct WeightDelta {
  std::vector<double> deltas;
};

// +alpha for every source used by a correct record, -alpha for an incorrect one.
WeightDelta accumulate_batch(std::span<const FeedbackRecord> records, std::size_t k, double alpha);

// max(0, w + delta), renormalized to sum 1.
SourceWeights apply_delta(const SourceWeights& weights, const WeightDelta& delta,
                          bool reset_on_degenerate = false);

struct WeightSnapshot {
  std::size_t batch_index = 0;
  std::vector<double> weights;
};

struct DirectRefinementResult {
  SourceWeights weights;
  std::vector<WeightSnapshot> history;  // one snapshot after every batch
};

// Consumes the stream in batches of `batch_size` (last batch may be partial).
DirectRefinementResult run_direct_refinement(const SourceWeights& initial,
                                             std::span<const FeedbackRecord> stream,
                                             const RefinementConfig& config);

// [{"batch_index": i, "weights": [...]}, ...]
std::string history_to_json(std::span<const WeightSnapshot> history);
// {"<source name>": weight, ...} in catalog order.
std::string weights_to_json(const SourceWeights& weights, const SourceCatalog& catalog);
SourceWeights weights_from_json(std::string_view json_text, const SourceCatalog& catalog);
SourceWeights load_weights(const std::filesystem::path& path, const SourceCatalog& catalog);

}  // namespace finrag
