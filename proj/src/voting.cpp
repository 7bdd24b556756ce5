#include "deideval/voting.hpp"

#include <algorithm>
#include <set>

#include "deideval/errors.hpp"
#include "deideval/text.hpp"

namespace deideval {

namespace {

std::vector<std::string> model_ids_of(const SummaryTable& table) {
  std::vector<std::string> ids;
  ids.reserve(table.rows.size());
  for (const auto& row : table.rows) ids.push_back(row.model_id);
  return ids;
}

void require_consistent_models(const std::vector<SummaryTable>& tables) {
  if (tables.empty()) throw Error("voting requires at least one summary table");
  const auto reference = model_ids_of(tables.front());
  for (const auto& table : tables) {
    if (model_ids_of(table) != reference) {
      throw InconsistentModelSetsError("summary tables cover different model sets (" +
                                       tables.front().agent_id + " vs " + table.agent_id + ")");
    }
  }
}

VoteResult tally_ballots(std::vector<Ballot> ballots, VoteMode mode) {
  VoteResult result;
  result.mode = mode;
  result.ballots = std::move(ballots);
  for (const auto& ballot : result.ballots) ++result.tally[ballot.choice];

  int best = 0;
  for (const auto& [model_id, count] : result.tally) best = std::max(best, count);
  std::vector<std::string> leaders;
  for (const auto& [model_id, count] : result.tally) {
    if (count == best) leaders.push_back(model_id);
  }
  std::sort(leaders.begin(), leaders.end());
  result.winner = leaders.front();
  result.tie_broken = leaders.size() > 1;
  return result;
}

}  // namespace

double pseudo_f1(double precision, double recall_proxy) {
  const double sum = precision + recall_proxy;
  if (sum <= 0.0) return 0.0;
  return 2.0 * precision * recall_proxy / sum;
}

std::string deterministic_voter(const SummaryTable& table) {
  if (table.rows.empty()) throw Error("deterministic voter requires a non-empty table");
  const SummaryRow* best = nullptr;
  double best_score = -1.0;
  for (const auto& row : table.rows) {
    const double score = pseudo_f1(row.precision, row.recall_proxy);
    // Rows are sorted by model_id, so strict > is the lexicographic tie-break.
    if (score > best_score) {
      best_score = score;
      best = &row;
    }
  }
  return best->model_id;
}

std::string DeterministicVoter::vote_single(const SummaryTable& table) {
  return deterministic_voter(table);
}

std::string DeterministicVoter::vote_combined(const std::vector<SummaryTable>& tables) {
  require_consistent_models(tables);
  std::map<std::string, double> score_sums;
  for (const auto& table : tables) {
    for (const auto& row : table.rows) {
      score_sums[row.model_id] += pseudo_f1(row.precision, row.recall_proxy);
    }
  }
  // map iteration is sorted by model_id; strict > keeps the smallest id on ties.
  std::string best;
  double best_score = -1.0;
  for (const auto& [model_id, sum] : score_sums) {
    if (sum > best_score) {
      best_score = sum;
      best = model_id;
    }
  }
  return best;
}

LlmVoter::LlmVoter(Gateway& gateway, std::string backend_id, std::string voting_model)
    : gateway_(gateway), backend_id_(std::move(backend_id)),
      voting_model_(std::move(voting_model)) {}

std::string LlmVoter::parse_choice(const std::string& answer,
                                   const std::vector<std::string>& model_ids) {
  const std::string trimmed = text::trim(answer);
  for (const auto& id : model_ids) {
    if (text::equals_ci(trimmed, id)) return id;
  }
  const std::string haystack = text::lower(answer);
  std::vector<std::string> hits;
  for (const auto& id : model_ids) {
    if (haystack.find(text::lower(id)) != std::string::npos) hits.push_back(id);
  }
  if (hits.size() == 1) return hits.front();
  if (hits.empty()) throw VoterFailureError("answer names no listed model: " + trimmed);
  // Substring shadowing ("Llama-7" inside "Llama-70b") is resolvable when all
  // hits are substrings of one longest hit; otherwise the answer is ambiguous.
  const auto longest = std::max_element(
      hits.begin(), hits.end(),
      [](const std::string& a, const std::string& b) { return a.size() < b.size(); });
  const std::string longest_lower = text::lower(*longest);
  for (const auto& hit : hits) {
    if (longest_lower.find(text::lower(hit)) == std::string::npos) {
      throw VoterFailureError("answer is ambiguous between listed models: " + trimmed);
    }
  }
  return *longest;
}

std::string LlmVoter::ask(const std::string& rendered_tables,
                          const std::vector<std::string>& model_ids) {
  std::string closed_list;
  for (const auto& id : model_ids) {
    if (!closed_list.empty()) closed_list += ", ";
    closed_list += id;
  }

  ChatRequest request;
  request.backend_id = backend_id_;
  request.model_id = voting_model_;
  request.messages = {
      {"system",
       "You rank de-identification models from evaluation summary tables. Each row of a table "
       "reports one model's precision, coverage, number of correct predictions, and recall "
       "proxy as judged by one evaluation agent. Pick the single best-performing model "
       "overall. Answer with exactly one model identifier from the list you are given and "
       "nothing else."},
      {"user", rendered_tables + "\nChoose one of: " + closed_list + "\nBest model:"},
  };

  std::string answer;
  try {
    answer = gateway_.complete(request).text;
  } catch (const Error& e) {
    throw VoterFailureError(e.what());
  }
  return parse_choice(answer, model_ids);
}

std::string LlmVoter::vote_single(const SummaryTable& table) {
  return ask(table_to_text(table), model_ids_of(table));
}

std::string LlmVoter::vote_combined(const std::vector<SummaryTable>& tables) {
  require_consistent_models(tables);
  std::string rendered;
  for (const auto& table : tables) {
    rendered += table_to_text(table);
    rendered += "\n";
  }
  return ask(rendered, model_ids_of(tables.front()));
}

VoteResult vote_independent(const std::vector<SummaryTable>& tables, Voter& voter) {
  require_consistent_models(tables);
  std::vector<Ballot> ballots;
  ballots.reserve(tables.size());
  for (const auto& table : tables) {
    std::string choice;
    try {
      choice = voter.vote_single(table);
    } catch (const VoterFailureError& e) {
      throw VoterFailureError(std::string(e.what()) + " (table " + table.agent_id + ")");
    }
    if (!table.find_row(choice)) {
      throw VoterFailureError("choice " + choice + " is not a row of table " + table.agent_id);
    }
    ballots.push_back({table.agent_id, choice, voter.kind()});
  }
  return tally_ballots(std::move(ballots), VoteMode::kIndependent);
}

VoteResult vote_cross_informed(const std::vector<SummaryTable>& tables, Voter& voter) {
  require_consistent_models(tables);
  const std::string choice = voter.vote_combined(tables);
  if (!tables.front().find_row(choice)) {
    throw VoterFailureError("choice " + choice + " is not a row of the input tables");
  }
  return tally_ballots({Ballot{"all", choice, voter.kind()}}, VoteMode::kCrossInformed);
}

}  // namespace deideval
