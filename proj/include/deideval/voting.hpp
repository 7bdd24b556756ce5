#pragma once

#include <map>
#include <string>
#include <vector>

#include "deideval/gateway.hpp"
#include "deideval/metrics.hpp"

namespace deideval {

enum class VoterKind { kDeterministic, kLlm };
enum class VoteMode { kIndependent, kCrossInformed };

struct Ballot {
  std::string source_table;  // agent_id, or "all" in cross-informed mode
  std::string choice;        // model_id, present as a row in the source table(s)
  VoterKind voter_kind = VoterKind::kDeterministic;
};

struct VoteResult {
  std::string winner;
  std::map<std::string, int> tally;
  VoteMode mode = VoteMode::kIndependent;
  bool tie_broken = false;
  std::vector<Ballot> ballots;
};

// 2PR/(P+RP) over (precision, recall_proxy); 0 when both are 0.
double pseudo_f1(double precision, double recall_proxy);

// Argmax of pseudo_f1 over the table's rows; lexicographic tie-break.
std::string deterministic_voter(const SummaryTable& table);

// Casts one ballot from a single table (independent) or from all tables at
// once (cross-informed).
class Voter {
 public:
  virtual ~Voter() = default;
  virtual std::string vote_single(const SummaryTable& table) = 0;
  virtual std::string vote_combined(const std::vector<SummaryTable>& tables) = 0;
  virtual VoterKind kind() const = 0;
};

class DeterministicVoter : public Voter {
 public:
  std::string vote_single(const SummaryTable& table) override;
  // Pools tables by averaging each model's pseudo-F1 across them.
  std::string vote_combined(const std::vector<SummaryTable>& tables) override;
  VoterKind kind() const override { return VoterKind::kDeterministic; }
};

class LlmVoter : public Voter {
 public:
  LlmVoter(Gateway& gateway, std::string backend_id, std::string voting_model);

  std::string vote_single(const SummaryTable& table) override;
  std::string vote_combined(const std::vector<SummaryTable>& tables) override;
  VoterKind kind() const override { return VoterKind::kLlm; }

  // Closed-list answer parsing: exact match, else unique substring.
  // Exposed for tests.
  static std::string parse_choice(const std::string& answer,
                                  const std::vector<std::string>& model_ids);

 private:
  std::string ask(const std::string& rendered_tables, const std::vector<std::string>& model_ids);

  Gateway& gateway_;
  std::string backend_id_;
  std::string voting_model_;
};

// One ballot per table; plurality wins, ties break lexicographically.
VoteResult vote_independent(const std::vector<SummaryTable>& tables, Voter& voter);

// A single ballot cast over all tables together.
VoteResult vote_cross_informed(const std::vector<SummaryTable>& tables, Voter& voter);

}  // namespace deideval
