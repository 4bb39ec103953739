// SPDX-License-Identifier: Apache-2.0
#include "finrag/refine_direct.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "finrag/error.hpp"
#include "finrag/text.hpp"

namespace finrag {

using nlohmann::json;

void RefinementConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kConfig, "alpha must be a finite non-negative number");
  }
  if (batch_size == 0) throw Error(ErrorCode::kConfig, "batch_size must be >= 1");
}

WeightDelta accumulate_batch(std::span<const FeedbackRecord> records, std::size_t k, double alpha) {
  WeightDelta delta{std::vector<double>(k, 0.0)};
  for (const auto& record : records) {
    for (const SourceId j : record.sources_used) {
      if (j >= k) {
        throw Error(ErrorCode::kSourceIndexOutOfRange,
                    "record '" + record.query_id + "' uses source " + std::to_string(j) +
                        " but K = " + std::to_string(k));
      }
      delta.deltas[j] += record.correct ? alpha : -alpha;
    }
  }
  return delta;
}

SourceWeights apply_delta(const SourceWeights& weights, const WeightDelta& delta,
                          bool reset_on_degenerate) {
  if (delta.deltas.size() != weights.size()) {
    throw Error(ErrorCode::kInvalidArgument, "delta length differs from weight count");
  }
  if (std::all_of(delta.deltas.begin(), delta.deltas.end(), [](double d) { return d == 0.0; })) {
    return weights;
  }
  std::vector<double> next(weights.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < next.size(); ++j) {
    next[j] = std::max(0.0, weights[j] + delta.deltas[j]);
    sum += next[j];
  }
  if (!(sum > 0.0)) {
    if (reset_on_degenerate) return SourceWeights::uniform(weights.size());
    throw Error(ErrorCode::kDegenerateWeights,
                "every source weight clamped to zero; lower alpha or enable reset_on_degenerate");
  }
  for (auto& w : next) w /= sum;
  return SourceWeights(std::move(next));
}

DirectRefinementResult run_direct_refinement(const SourceWeights& initial,
                                             std::span<const FeedbackRecord> stream,
                                             const RefinementConfig& config) {
  config.validate();
  DirectRefinementResult result{initial, {}};
  std::size_t batch_index = 0;
  for (std::size_t start = 0; start < stream.size(); start += config.batch_size, ++batch_index) {
    const auto batch = stream.subspan(start, std::min(config.batch_size, stream.size() - start));
    const auto delta = accumulate_batch(batch, initial.size(), config.alpha);
    result.weights = apply_delta(result.weights, delta, config.reset_on_degenerate);
    result.history.push_back({batch_index, result.weights.values()});
  }
  return result;
}

std::string history_to_json(std::span<const WeightSnapshot> history) {
  json out = json::array();
  for (const auto& s : history) out.push_back({{"batch_index", s.batch_index}, {"weights", s.weights}});
  return out.dump(2) + "\n";
}

std::string weights_to_json(const SourceWeights& weights, const SourceCatalog& catalog) {
  if (weights.size() != catalog.size()) {
    throw Error(ErrorCode::kInvalidArgument, "weight count differs from catalog size");
  }
  // ordered_json keeps catalog order in the file
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& s : catalog.sources()) out[s.name] = weights[s.id];
  return out.dump(2) + "\n";
}

SourceWeights weights_from_json(std::string_view json_text, const SourceCatalog& catalog) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadRecord, std::string("weights file: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::kBadRecord, "weights file must be a JSON object");
  std::vector<double> w(catalog.size(), 0.0);
  for (const auto& [name, value] : root.items()) {
    const auto id = catalog.find(name);
    if (!id) throw Error(ErrorCode::kUnknownSource, "weights file names unknown source '" + name + "'");
    if (!value.is_number()) throw Error(ErrorCode::kBadRecord, "weight for '" + name + "' is not a number");
    w[*id] = value.get<double>();
  }
  return SourceWeights(std::move(w));
}

SourceWeights load_weights(const std::filesystem::path& path, const SourceCatalog& catalog) {
  return weights_from_json(read_file(path), catalog);
}

}  // namespace finrag
