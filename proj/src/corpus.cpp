#include "deideval/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "deideval/errors.hpp"
#include "deideval/text.hpp"

namespace deideval {

namespace {

using nlohmann::json;

std::string require_string(const json& record, const char* key, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw MalformedRecordError(line, std::string("missing or non-string field \"") + key + "\"");
  }
  return it->get<std::string>();
}

}  // namespace

std::size_t tokenize(std::string_view s) { return text::count_tokens(s); }

Note::Note(std::string id, std::string body)
    : id_(std::move(id)), body_(std::move(body)), token_count_(tokenize(body_)) {
  if (id_.empty()) throw Error("note id is empty");
}

Corpus::Corpus(std::vector<Note> notes, std::optional<std::vector<GoldEntity>> gold,
               std::vector<PhiCategory> categories)
    : notes_(std::move(notes)), gold_(std::move(gold)), categories_(std::move(categories)) {
  std::sort(notes_.begin(), notes_.end(),
            [](const Note& a, const Note& b) { return a.id() < b.id(); });
  for (std::size_t i = 1; i < notes_.size(); ++i) {
    if (notes_[i - 1].id() == notes_[i].id()) throw DuplicateNoteIdError(notes_[i].id());
  }
  if (gold_) {
    for (const auto& g : *gold_) {
      if (!find_note(g.note_id)) throw DanglingGoldReferenceError(g.note_id);
      if (std::find(categories_.begin(), categories_.end(), g.category) == categories_.end()) {
        categories_.push_back(g.category);
      }
    }
  }
}

const std::vector<GoldEntity>& Corpus::gold() const {
  if (!gold_) throw NoGoldAnnotationsError();
  return *gold_;
}

const Note* Corpus::find_note(std::string_view id) const {
  const auto it = std::lower_bound(
      notes_.begin(), notes_.end(), id,
      [](const Note& n, std::string_view target) { return n.id() < target; });
  if (it == notes_.end() || it->id() != id) return nullptr;
  return &*it;
}

std::vector<const GoldEntity*> Corpus::gold_for(std::string_view note_id) const {
  std::vector<const GoldEntity*> out;
  if (!gold_) return out;
  for (const auto& g : *gold_) {
    if (g.note_id == note_id) out.push_back(&g);
  }
  return out;
}

std::size_t Corpus::total_tokens() const {
  std::size_t total = 0;
  for (const auto& n : notes_) total += n.token_count();
  return total;
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path.string());

  std::vector<Note> notes;
  std::vector<GoldEntity> gold;
  bool saw_gold = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;

    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedRecordError(line_no, e.what());
    }
    if (!record.is_object()) throw MalformedRecordError(line_no, "record is not a JSON object");

    const std::string kind = require_string(record, "kind", line_no);
    if (kind == "note") {
      const std::string id = require_string(record, "id", line_no);
      if (text::trim(id).empty()) throw MalformedRecordError(line_no, "note id is blank");
      notes.emplace_back(id, require_string(record, "text", line_no));
    } else if (kind == "gold") {
      saw_gold = true;
      GoldEntity g;
      g.note_id = require_string(record, "note_id", line_no);
      const std::string tag = require_string(record, "category", line_no);
      const auto category = PhiCategory::parse(tag);
      if (!category) throw MalformedRecordError(line_no, "unknown category tag \"" + tag + "\"");
      g.category = *category;
      g.surface = require_string(record, "surface", line_no);
      if (text::trim(g.surface).empty()) {
        throw MalformedRecordError(line_no, "gold surface is empty after trimming");
      }
      gold.push_back(std::move(g));
    } else {
      throw MalformedRecordError(line_no, "unknown record kind \"" + kind + "\"");
    }
  }

  std::optional<std::vector<GoldEntity>> maybe_gold;
  if (saw_gold) maybe_gold = std::move(gold);
  return Corpus(std::move(notes), std::move(maybe_gold), PhiCategory::closed_set());
}

}  // namespace deideval
