#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deideval/corpus.hpp"
#include "deideval/gateway.hpp"
#include "deideval/normalizer.hpp"

namespace deideval {

// Deterministic stand-in for live models, used to generate scripted-backend
// fixtures. It answers de-id, judge, and voter prompts from the corpus gold
// annotations with hash-derived imperfections (missed entities, spurious
// predictions, format quirks, agent strictness), so a replayed pipeline
// exercises the same paths as a live one while staying byte-reproducible.
class FixtureSynthesizer {
 public:
  FixtureSynthesizer(const Corpus& corpus, std::vector<std::string> deid_model_ids,
                     std::vector<std::string> judge_agent_ids, Normalizer normalizer);

  // Dispatches on the request's system prompt (de-id vs judge vs voter).
  std::string complete(const ChatRequest& request) const;

 private:
  std::string deid_completion(const ChatRequest& request) const;
  std::string judge_completion(const ChatRequest& request) const;
  std::string voter_completion(const ChatRequest& request) const;

  const Note* note_by_body(const std::string& body) const;
  std::size_t model_index(const std::string& model_id) const;
  std::size_t agent_index(const std::string& agent_id) const;

  const Corpus& corpus_;
  std::vector<std::string> deid_model_ids_;
  std::vector<std::string> judge_agent_ids_;
  Normalizer normalizer_;
};

std::uint64_t fnv1a(std::string_view s);

}  // namespace deideval
