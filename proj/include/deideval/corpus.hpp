#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deideval/category.hpp"

namespace deideval {

// Whitespace tokenization over Unicode codepoints: the count of maximal runs
// of non-whitespace. Every coverage denominator in the harness uses this one
// function so token counts are comparable across models.
std::size_t tokenize(std::string_view s);

class Note {
 public:
  Note(std::string id, std::string body);

  const std::string& id() const { return id_; }
  const std::string& body() const { return body_; }
  std::size_t token_count() const { return token_count_; }

 private:
  std::string id_;
  std::string body_;
  std::size_t token_count_;  // cached at construction, never hand-set
};

struct GoldEntity {
  std::string note_id;
  PhiCategory category;
  std::string surface;
};

// Immutable evaluation corpus. Notes are kept sorted by id so every consumer
// iterates in one deterministic order regardless of input file layout.
class Corpus {
 public:
  Corpus(std::vector<Note> notes, std::optional<std::vector<GoldEntity>> gold,
         std::vector<PhiCategory> categories);

  const std::vector<Note>& notes() const { return notes_; }
  bool has_gold() const { return gold_.has_value(); }
  const std::vector<GoldEntity>& gold() const;
  const std::vector<PhiCategory>& categories() const { return categories_; }

  const Note* find_note(std::string_view id) const;
  std::vector<const GoldEntity*> gold_for(std::string_view note_id) const;
  std::size_t total_tokens() const;

 private:
  std::vector<Note> notes_;
  std::optional<std::vector<GoldEntity>> gold_;
  std::vector<PhiCategory> categories_;
};

// Loads a line-delimited JSON corpus file. Each line is either
//   {"kind": "note", "id": ..., "text": ...}
// or
//   {"kind": "gold", "note_id": ..., "category": ..., "surface": ...}
// Blank lines are skipped. Errors carry 1-based line numbers.
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace deideval
