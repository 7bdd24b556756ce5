#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deideval/corpus.hpp"
#include "deideval/gateway.hpp"
#include "deideval/normalizer.hpp"

namespace deideval {

struct Prediction {
  PhiCategory category;
  std::string surface;  // non-empty after trimming
};

struct PredictionSet {
  std::string model_id;
  std::string note_id;
  std::vector<Prediction> predictions;  // deduplicated under normalizer equivalence
  bool failed = false;                  // completion never parsed
};

// Finds the first balanced top-level {...} region, honoring JSON string
// literals and escapes, after dropping ``` code-fence markers.
std::optional<std::string> extract_first_json_object(const std::string& raw);

// Two messages: a system message with the task, category glossary, and output
// schema, and a user message holding the note text. Deterministic.
std::vector<ChatMessage> build_deid_prompt(const Note& note,
                                           const std::vector<PhiCategory>& categories);

// Parses a raw completion into a deduplicated PredictionSet.
// Throws ParseFailure when no usable JSON object can be recovered.
PredictionSet parse_deid_output(const std::string& raw, const std::string& note_id,
                                const std::string& model_id, const Normalizer& normalizer);

struct DeidRun {
  std::string model_id;
  std::map<std::string, PredictionSet> by_note;  // keyed by note_id
  std::vector<std::string> failed_notes;
  std::int64_t total_predictions = 0;  // Σ over notes of |predictions|
};

// Runs one de-id model over the whole corpus. Parse failures get one
// corrective retry; per-note backend failures are isolated and flagged.
DeidRun run_deid(const std::string& model_id, const std::string& backend_id,
                 const Corpus& corpus, Gateway& gateway, const Normalizer& normalizer,
                 const std::vector<PhiCategory>& categories, int max_workers = 4);

}  // namespace deideval
