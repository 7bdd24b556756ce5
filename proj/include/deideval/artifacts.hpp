#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "deideval/extraction.hpp"
#include "deideval/judge.hpp"
#include "deideval/voting.hpp"

namespace deideval {

// Conservative mapping of model/agent ids onto file names.
std::string sanitize_id(const std::string& id);

// Prediction runs: one JSONL record per note,
// {"note_id", "model_id", "predictions": [{"category", "surface"}], "failed"}.
void save_prediction_run(const std::filesystem::path& path, const DeidRun& run);
DeidRun load_prediction_run(const std::filesystem::path& path);

// Verdicts: one JSONL record per (model, note),
// {"agent_id", "model_id", "note_id", "n_correct", "per_category", "clamped",
//  "consistency_warning", "failed"}; per_category is null when dropped.
void save_verdicts(const std::filesystem::path& path, const std::vector<Verdict>& verdicts);
std::vector<Verdict> load_verdicts(const std::filesystem::path& path);

nlohmann::json vote_result_to_json(const VoteResult& result, const std::string& voting_model);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace deideval
