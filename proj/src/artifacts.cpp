#include "deideval/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "deideval/errors.hpp"

namespace deideval {

namespace {

using nlohmann::json;

json parse_line(const std::string& line, std::size_t line_no, const std::string& file) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(file + ":" + std::to_string(line_no) + ": " + e.what());
  }
}

PhiCategory parse_category(const json& value, std::size_t line_no, const std::string& file) {
  const auto category = PhiCategory::parse(value.get<std::string>());
  if (!category) {
    throw Error(file + ":" + std::to_string(line_no) + ": unknown category tag " + value.dump());
  }
  return *category;
}

}  // namespace

std::string sanitize_id(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (const char c : id) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out.push_back(safe ? c : '_');
  }
  if (out.empty() || out == "." || out == "..") out = "_";
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void save_prediction_run(const std::filesystem::path& path, const DeidRun& run) {
  std::string out;
  for (const auto& [note_id, pset] : run.by_note) {
    json predictions = json::array();
    for (const auto& p : pset.predictions) {
      predictions.push_back({{"category", p.category.tag_string()}, {"surface", p.surface}});
    }
    const json record = {
        {"note_id", pset.note_id},
        {"model_id", pset.model_id},
        {"predictions", std::move(predictions)},
        {"failed", pset.failed},
    };
    out += record.dump() + "\n";
  }
  write_text_file(path, out);
}

DeidRun load_prediction_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path.string());

  DeidRun run;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json record = parse_line(line, line_no, path.string());

    PredictionSet pset;
    pset.note_id = record.at("note_id").get<std::string>();
    pset.model_id = record.at("model_id").get<std::string>();
    pset.failed = record.value("failed", false);
    for (const auto& p : record.at("predictions")) {
      Prediction prediction;
      prediction.category = parse_category(p.at("category"), line_no, path.string());
      prediction.surface = p.at("surface").get<std::string>();
      pset.predictions.push_back(std::move(prediction));
    }

    if (run.model_id.empty()) {
      run.model_id = pset.model_id;
    } else if (run.model_id != pset.model_id) {
      throw Error(path.string() + ": mixes model ids " + run.model_id + " and " + pset.model_id);
    }
    run.total_predictions += static_cast<std::int64_t>(pset.predictions.size());
    if (pset.failed) run.failed_notes.push_back(pset.note_id);
    if (!run.by_note.emplace(pset.note_id, std::move(pset)).second) {
      throw Error(path.string() + ": duplicate note record at line " + std::to_string(line_no));
    }
  }
  return run;
}

void save_verdicts(const std::filesystem::path& path, const std::vector<Verdict>& verdicts) {
  std::string out;
  for (const auto& v : verdicts) {
    json per_category;
    if (v.per_category) {
      per_category = json::object();
      for (const auto& [category, n] : *v.per_category) {
        per_category[category.tag_string()] = n;
      }
    }
    const json record = {
        {"agent_id", v.agent_id},
        {"model_id", v.model_id},
        {"note_id", v.note_id},
        {"n_correct", v.n_correct},
        {"per_category", std::move(per_category)},
        {"clamped", v.clamped},
        {"consistency_warning", v.consistency_warning},
        {"failed", v.failed},
    };
    out += record.dump() + "\n";
  }
  write_text_file(path, out);
}

std::vector<Verdict> load_verdicts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path.string());

  std::vector<Verdict> verdicts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json record = parse_line(line, line_no, path.string());

    Verdict v;
    v.agent_id = record.at("agent_id").get<std::string>();
    v.model_id = record.at("model_id").get<std::string>();
    v.note_id = record.at("note_id").get<std::string>();
    v.n_correct = record.at("n_correct").get<int>();
    v.clamped = record.value("clamped", false);
    v.consistency_warning = record.value("consistency_warning", false);
    v.failed = record.value("failed", false);
    if (const auto it = record.find("per_category"); it != record.end() && it->is_object()) {
      std::map<PhiCategory, int> per_category;
      for (const auto& [tag, n] : it->items()) {
        per_category[parse_category(json(tag), line_no, path.string())] = n.get<int>();
      }
      v.per_category = std::move(per_category);
    }
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

json vote_result_to_json(const VoteResult& result, const std::string& voting_model) {
  json ballots = json::array();
  for (const auto& b : result.ballots) {
    ballots.push_back({
        {"source_table", b.source_table},
        {"choice", b.choice},
        {"voter_kind", b.voter_kind == VoterKind::kLlm ? "llm" : "deterministic"},
    });
  }
  json tally = json::object();
  for (const auto& [model_id, count] : result.tally) tally[model_id] = count;
  json doc = {
      {"mode", result.mode == VoteMode::kIndependent ? "independent" : "cross_informed"},
      {"voter_kind", result.ballots.empty() ||
                             result.ballots.front().voter_kind == VoterKind::kDeterministic
                         ? "deterministic"
                         : "llm"},
      {"ballots", std::move(ballots)},
      {"tally", std::move(tally)},
      {"winner", result.winner},
      {"tie_broken", result.tie_broken},
  };
  if (!voting_model.empty()) doc["voting_model"] = voting_model;
  return doc;
}

}  // namespace deideval
