#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "deideval/goldeval.hpp"
#include "deideval/metrics.hpp"

namespace deideval {

// Per-model gold scores in a fixed (model_id-sorted) order.
using GoldScores = std::vector<std::pair<std::string, GoldScore>>;

nlohmann::json gold_report_to_json(const GoldScores& scores, int resamples, std::uint64_t seed);
GoldScores gold_report_from_json(const nlohmann::json& doc);
std::string gold_report_to_markdown(const GoldScores& scores, int resamples);
std::string gold_report_to_csv(const GoldScores& scores);

// The consolidated human-readable report: proxy tables with the implied-n_avg
// ambiguity note, vote outcomes, and the gold section when present.
std::string consolidated_report(const std::vector<SummaryTable>& tables,
                                const std::vector<nlohmann::json>& vote_records,
                                const std::optional<nlohmann::json>& gold_report,
                                int gold_resamples);

}  // namespace deideval
