#include "deideval/fixture_synth.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <sstream>

#include <json.hpp>

#include "deideval/errors.hpp"
#include "deideval/text.hpp"
#include "deideval/voting.hpp"

namespace deideval {

namespace {

using nlohmann::json;

constexpr const char* kCorrectiveNudge = "Return ONLY the JSON object.";

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

FixtureSynthesizer::FixtureSynthesizer(const Corpus& corpus,
                                       std::vector<std::string> deid_model_ids,
                                       std::vector<std::string> judge_agent_ids,
                                       Normalizer normalizer)
    : corpus_(corpus),
      deid_model_ids_(std::move(deid_model_ids)),
      judge_agent_ids_(std::move(judge_agent_ids)),
      normalizer_(std::move(normalizer)) {}

const Note* FixtureSynthesizer::note_by_body(const std::string& body) const {
  for (const auto& note : corpus_.notes()) {
    if (note.body() == body) return &note;
  }
  return nullptr;
}

std::size_t FixtureSynthesizer::model_index(const std::string& model_id) const {
  const auto it = std::find(deid_model_ids_.begin(), deid_model_ids_.end(), model_id);
  return it == deid_model_ids_.end() ? 0 : static_cast<std::size_t>(it - deid_model_ids_.begin());
}

std::size_t FixtureSynthesizer::agent_index(const std::string& agent_id) const {
  const auto it = std::find(judge_agent_ids_.begin(), judge_agent_ids_.end(), agent_id);
  return it == judge_agent_ids_.end() ? 0
                                      : static_cast<std::size_t>(it - judge_agent_ids_.begin());
}

std::string FixtureSynthesizer::complete(const ChatRequest& request) const {
  if (request.messages.empty()) throw Error("synthesizer received an empty prompt");
  const std::string& system = request.messages.front().content;
  if (system.rfind("You are a clinical de-identification system", 0) == 0) {
    return deid_completion(request);
  }
  if (system.rfind("You are verifying", 0) == 0) {
    return judge_completion(request);
  }
  if (system.rfind("You rank", 0) == 0) {
    return voter_completion(request);
  }
  throw Error("synthesizer cannot classify the prompt");
}

std::string FixtureSynthesizer::deid_completion(const ChatRequest& request) const {
  const Note* note = note_by_body(request.messages.at(1).content);
  if (!note) throw Error("synthesizer got a de-id prompt for an unknown note");
  const std::size_t index = model_index(request.model_id);
  const std::string run_key = request.model_id + "|" + note->id();

  const bool corrected = request.messages.back().content == kCorrectiveNudge;
  // One model in three is "flaky": its first completion for every third note
  // is unparseable prose, recovering only after the corrective nudge.
  if (index % 3 == 2 && fnv1a(run_key) % 3 == 0 && !corrected) {
    return "Sure! The protected entities are PERSON plus some dates, i.e. {\"PERSON\": [";
  }

  // Hash-driven imperfections per entity: misses grow with the model index,
  // surface variants exercise normalization downstream.
  const std::uint64_t miss_percent = (index * 13) % 45;
  json entities = json::object();
  const auto add = [&entities](const std::string& tag, std::string surface) {
    if (!entities.contains(tag)) entities[tag] = json::array();
    entities[tag].push_back(std::move(surface));
  };

  for (const auto* gold : corpus_.gold_for(note->id())) {
    const std::uint64_t h = fnv1a(run_key + "|" + gold->category.tag_string() + "|" +
                                  gold->surface);
    if (h % 100 < miss_percent) continue;  // missed entity

    std::string tag = gold->category.tag_string();
    std::string surface = gold->surface;
    switch ((h >> 8) % 5) {
      case 0:
        if (gold->category.tag() == PhiCategory::Tag::kPerson) surface = "Dr. " + surface;
        break;
      case 1:
        if (gold->category.tag() == PhiCategory::Tag::kDateTime) {
          surface = normalizer_.canonicalize(gold->category, surface).canonical_text;
        }
        break;
      case 2:
        surface = text::lower(surface);
        break;
      case 3:
        if ((h >> 16) % 4 == 0) tag = "ID";  // occasional category confusion
        break;
      default:
        break;
    }
    add(tag, std::move(surface));
  }

  // Spurious predictions not present in the note.
  const std::uint64_t spurious = fnv1a(run_key + "|spurious") % (index + 1);
  for (std::uint64_t s = 0; s < spurious; ++s) {
    add("ID", "record-" + std::to_string(fnv1a(run_key) % 9000 + 1000 + s));
  }

  const std::string body = entities.dump();
  if (index % 2 == 1) {
    return "Here are the detected PHI entities:\n```json\n" + body + "\n```\n";
  }
  return body;
}

std::string FixtureSynthesizer::judge_completion(const ChatRequest& request) const {
  const std::string& user = request.messages.at(1).content;
  constexpr const char* kNoteHead = "Clinical note:\n";
  constexpr const char* kPairsHead = "\n\nPredicted pairs:\n";
  const auto pairs_at = user.find(kPairsHead);
  if (user.rfind(kNoteHead, 0) != 0 || pairs_at == std::string::npos) {
    throw Error("synthesizer got a malformed judge prompt");
  }
  const Note* note = note_by_body(user.substr(std::strlen(kNoteHead), pairs_at - std::strlen(kNoteHead)));
  if (!note) throw Error("synthesizer got a judge prompt for an unknown note");

  // Reparse the numbered "(TAG) surface" pairs.
  std::vector<std::pair<PhiCategory, std::string>> pairs;
  for (const auto& line : split_lines(user.substr(pairs_at + std::strlen(kPairsHead)))) {
    const auto open = line.find('(');
    const auto close = line.find(") ", open);
    if (open == std::string::npos || close == std::string::npos) continue;
    const auto category = PhiCategory::parse(line.substr(open + 1, close - open - 1));
    if (!category) continue;
    pairs.emplace_back(*category, line.substr(close + 2));
  }

  const std::vector<const GoldEntity*> gold = corpus_.gold_for(note->id());
  const std::size_t index = agent_index(request.model_id);
  const std::string agent_key = request.model_id + "|" + note->id();

  int n_correct = 0;
  std::map<std::string, int> per_category;
  for (const auto& [category, surface] : pairs) {
    bool correct = false;
    for (const auto* g : gold) {
      if (normalizer_.equivalent({category, surface}, {g->category, g->surface})) {
        correct = true;
        break;
      }
    }
    // Strictness noise grows with the agent index: a true pair is sometimes
    // rejected anyway.
    if (correct && fnv1a(agent_key + "|" + surface) % 12 < index) correct = false;
    if (correct) {
      ++n_correct;
      ++per_category[normalizer_.fold_category(category).tag_string()];
    }
  }

  json breakdown = json::object();
  for (const auto& [tag, n] : per_category) breakdown[tag] = n;
  const json verdict = {{"Number of Correct Pairs", n_correct},
                        {"Per Category", std::move(breakdown)}};
  if (index % 2 == 1) return "```json\n" + verdict.dump(2) + "\n```";
  return verdict.dump();
}

std::string FixtureSynthesizer::voter_completion(const ChatRequest& request) const {
  // The rendered tables arrive in the user message followed by
  // "Choose one of: a, b, c". Re-derive pseudo-F1 from the aligned rows and
  // answer with the best model, phrased as prose.
  const std::string& user = request.messages.at(1).content;
  constexpr const char* kChoiceHead = "Choose one of: ";
  const auto choice_at = user.find(kChoiceHead);
  if (choice_at == std::string::npos) throw Error("synthesizer got a malformed voter prompt");

  std::vector<std::string> ids;
  {
    std::string list = user.substr(choice_at + std::strlen(kChoiceHead));
    if (const auto end = list.find('\n'); end != std::string::npos) list.resize(end);
    std::size_t start = 0;
    while (start < list.size()) {
      auto comma = list.find(", ", start);
      if (comma == std::string::npos) comma = list.size();
      ids.push_back(list.substr(start, comma - start));
      start = comma + 2;
    }
  }

  std::map<std::string, double> scores;
  std::map<std::string, int> seen;
  for (const auto& line : split_lines(user.substr(0, choice_at))) {
    const auto fields = text::split_ws(line);
    if (fields.size() < 5) continue;
    const auto id = std::find(ids.begin(), ids.end(), fields[0]);
    if (id == ids.end()) continue;
    try {
      scores[*id] += pseudo_f1(std::stod(fields[1]), std::stod(fields[4]));
      ++seen[*id];
    } catch (const std::exception&) {
    }
  }
  std::string best;
  double best_score = -1.0;
  for (const auto& id : ids) {
    const double s = seen.count(id) ? scores[id] / seen[id] : 0.0;
    if (s > best_score) {
      best_score = s;
      best = id;
    }
  }
  if (best.empty()) throw Error("synthesizer found no scorable voter rows");
  return "The best model is " + best + ".";
}

}  // namespace deideval
