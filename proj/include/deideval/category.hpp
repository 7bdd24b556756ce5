#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deideval {

// Closed set of PHI categories plus an open EXTENSION escape hatch for tags
// the closed set does not cover. Extension labels are stored lowercased so
// tag comparison is case-insensitive by construction.
class PhiCategory {
 public:
  enum class Tag {
    kPerson,
    kDateTime,
    kLocation,
    kOrganization,
    kAge,
    kId,
    kContact,
    kExtension,
  };

  PhiCategory() : tag_(Tag::kPerson) {}
  explicit PhiCategory(Tag tag);  // throws for kExtension; use extension()

  // "EXT:<label>"; label must be non-empty after trimming.
  static PhiCategory extension(std::string_view label);

  // Case-insensitive parse of a canonical tag string ("PERSON", "EXT:mrn").
  // Returns nullopt for anything else.
  static std::optional<PhiCategory> parse(std::string_view tag);

  // The seven closed categories in their fixed order.
  static const std::vector<PhiCategory>& closed_set();

  Tag tag() const { return tag_; }
  bool is_extension() const { return tag_ == Tag::kExtension; }
  const std::string& extension_label() const { return label_; }

  // Canonical tag string, e.g. "PERSON" or "EXT:mrn".
  std::string tag_string() const;

  friend bool operator==(const PhiCategory& a, const PhiCategory& b) {
    return a.tag_ == b.tag_ && a.label_ == b.label_;
  }
  friend std::strong_ordering operator<=>(const PhiCategory& a, const PhiCategory& b) {
    if (auto c = a.tag_ <=> b.tag_; c != 0) return c;
    return a.label_ <=> b.label_;
  }

 private:
  Tag tag_;
  std::string label_;  // only for kExtension
};

}  // namespace deideval
