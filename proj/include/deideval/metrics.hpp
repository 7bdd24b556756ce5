#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deideval/corpus.hpp"
#include "deideval/extraction.hpp"
#include "deideval/judge.hpp"
#include "deideval/normalizer.hpp"

namespace deideval {

struct SummaryRow {
  std::string model_id;
  double precision = 0.0;
  double coverage = 0.0;     // predictions per corpus token
  std::int64_t num_correct = 0;
  double recall_proxy = 0.0;
  std::map<PhiCategory, double> per_category_precision;
  // Precision denominator: predictions on notes with a non-failed verdict.
  // 0 in fixtures reconstructed from published tables (unknown there).
  std::int64_t num_predictions = 0;
  bool zero_prediction_flag = false;
};

struct SummaryTable {
  std::string agent_id;
  double n_avg = 0.0;  // computed once per run, shared by all agents' tables
  std::vector<SummaryRow> rows;  // sorted by model_id

  const SummaryRow* find_row(const std::string& model_id) const;
};

// num_predictions = 0 yields 0.0 by convention (callers flag it).
double precision(std::int64_t num_correct, std::int64_t num_predictions);

// Σ predictions / Σ tokens over the same note set.
double coverage(const std::map<std::string, std::int64_t>& pred_counts,
                const std::map<std::string, std::int64_t>& token_counts);

// Mean corpus-wide prediction count over all de-id models in the run.
double n_avg(const std::map<std::string, std::int64_t>& prediction_counts);

// num_correct / n_avg; may exceed 1 when a model out-predicts the field.
double recall_proxy(std::int64_t num_correct, double n_avg_value);

// Aggregates one agent's verdicts over all models into a table.
SummaryTable build_summary_table(const std::string& agent_id,
                                 const std::vector<Verdict>& verdicts,
                                 const std::map<std::string, DeidRun>& deid_runs,
                                 const Corpus& corpus,
                                 const Normalizer& normalizer = Normalizer());

// The n_avg a table's own rows imply (num_correct / recall_proxy). Published
// tables disagree slightly across agents; reports surface the spread.
struct ImpliedNAvg {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t rows_used = 0;
};
std::optional<ImpliedNAvg> implied_n_avg(const SummaryTable& table);

nlohmann::json table_to_json(const SummaryTable& table);
SummaryTable table_from_json(const nlohmann::json& doc);
std::string table_to_csv(const SummaryTable& table);
// Bold = best per numeric column, italic = second best.
std::string table_to_markdown(const SummaryTable& table);
// Space-aligned rendering for LLM voter prompts.
std::string table_to_text(const SummaryTable& table);

}  // namespace deideval
