#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deideval/corpus.hpp"
#include "deideval/extraction.hpp"
#include "deideval/gateway.hpp"

namespace deideval {

struct Verdict {
  std::string agent_id;
  std::string model_id;
  std::string note_id;
  int n_correct = 0;  // within [0, k]
  std::optional<std::map<PhiCategory, int>> per_category;  // dropped when inconsistent
  bool clamped = false;
  bool consistency_warning = false;  // per-category sum disagreed with n_correct
  bool failed = false;
};

// System message with the verification task, the variant-leniency rule, and
// the strict output schema; user message with the note and numbered pairs.
std::vector<ChatMessage> build_judge_prompt(const Note& note, const PredictionSet& pset);

struct VerdictFields {
  int n_correct = 0;
  std::optional<std::map<PhiCategory, int>> per_category;
  bool clamped = false;
  bool consistency_warning = false;
};

// Parses an agent completion for a prediction set of k pairs. The headline
// count is authoritative; per-category counts are kept only when they sum to
// it. Throws ParseFailure or NonIntegerCount.
VerdictFields parse_verdict(const std::string& raw, int k, const Normalizer& normalizer);

// Judges every (model, note) pair with one agent. Empty prediction sets
// short-circuit to n_correct=0 without a backend call; per-item failures
// yield failed Verdicts instead of aborting.
std::vector<Verdict> run_judge(const std::string& agent_id, const std::string& backend_id,
                               const std::map<std::string, DeidRun>& deid_runs,
                               const Corpus& corpus, Gateway& gateway,
                               const Normalizer& normalizer, int max_workers = 4);

}  // namespace deideval
