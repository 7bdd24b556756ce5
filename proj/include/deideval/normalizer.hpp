#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deideval/category.hpp"

namespace deideval {

struct NormalizerConfig {
  // Leading tokens dropped from PERSON surfaces, matched with an optional
  // trailing period ("dr" matches both "dr" and "dr.").
  std::vector<std::string> honorifics = {"dr", "mr", "mrs", "ms", "prof", "rn", "md"};

  // Ambiguous numeric dates ("03/04/2024") read month-first when true
  // (US clinical convention), day-first when false. The other order is
  // never guessed: an impossible date degrades to generic text.
  bool month_first = true;

  // Two-digit years expand with this pivot: values below it map to 20xx,
  // the rest to 19xx.
  int two_digit_year_pivot = 50;

  // Category tag synonyms, applied case-insensitively before comparison and
  // when mapping model output tags. Keys are raw tag spellings, values are
  // canonical tag strings.
  std::map<std::string, std::string> synonyms = {
      {"date", "DATE_TIME"},
      {"time", "DATE_TIME"},
      {"hospital", "ORGANIZATION"},
  };
};

struct CanonicalForm {
  PhiCategory category;
  std::string canonical_text;

  friend bool operator==(const CanonicalForm&, const CanonicalForm&) = default;
  friend auto operator<=>(const CanonicalForm&, const CanonicalForm&) = default;
};

// Canonicalization and equivalence of (category, surface) pairs. All methods
// are pure; a Normalizer is cheap to copy and safe to share across threads.
class Normalizer {
 public:
  Normalizer() : Normalizer(NormalizerConfig{}) {}
  explicit Normalizer(NormalizerConfig config);

  const NormalizerConfig& config() const { return config_; }

  // Applies the category synonym map (one step). Extension labels that name
  // a synonym source or a closed tag fold into the closed category.
  PhiCategory fold_category(const PhiCategory& category) const;

  // Maps a raw model-output tag to a category: canonical tag spelling,
  // else synonym, else EXTENSION. Returns nullopt for blank tags.
  std::optional<PhiCategory> map_output_tag(std::string_view tag) const;

  // Throws EmptySurface when the surface trims to nothing. The returned
  // category is the synonym-folded one.
  CanonicalForm canonicalize(const PhiCategory& category, std::string_view surface) const;

  // True iff both sides canonicalize to the same CanonicalForm. Tolerates
  // blank surfaces (never equivalent).
  bool equivalent(const std::pair<PhiCategory, std::string>& a,
                  const std::pair<PhiCategory, std::string>& b) const;

  // Keeps the first member of every canonical-equivalence class, in order.
  std::vector<std::pair<PhiCategory, std::string>> dedupe(
      const std::vector<std::pair<PhiCategory, std::string>>& predictions) const;

 private:
  std::string normalize_generic(std::string_view surface) const;
  std::string normalize_person(const std::string& generic) const;
  std::string normalize_date_time(const std::string& generic) const;
  std::string normalize_age(const std::string& generic) const;

  NormalizerConfig config_;
};

}  // namespace deideval
