#include "deideval/category.hpp"

#include <array>
#include <utility>

#include "deideval/errors.hpp"
#include "deideval/text.hpp"

namespace deideval {

namespace {

constexpr std::array<std::pair<PhiCategory::Tag, std::string_view>, 7> kClosedTags = {{
    {PhiCategory::Tag::kPerson, "PERSON"},
    {PhiCategory::Tag::kDateTime, "DATE_TIME"},
    {PhiCategory::Tag::kLocation, "LOCATION"},
    {PhiCategory::Tag::kOrganization, "ORGANIZATION"},
    {PhiCategory::Tag::kAge, "AGE"},
    {PhiCategory::Tag::kId, "ID"},
    {PhiCategory::Tag::kContact, "CONTACT"},
}};

}  // namespace

PhiCategory::PhiCategory(Tag tag) : tag_(tag) {
  if (tag == Tag::kExtension) {
    throw Error("extension categories require a label; use PhiCategory::extension");
  }
}

PhiCategory PhiCategory::extension(std::string_view label) {
  PhiCategory c;
  c.tag_ = Tag::kExtension;
  c.label_ = text::lower(text::trim(label));
  if (c.label_.empty()) throw Error("extension category label is empty");
  return c;
}

std::optional<PhiCategory> PhiCategory::parse(std::string_view tag) {
  const std::string t = text::trim(tag);
  for (const auto& [value, name] : kClosedTags) {
    if (text::equals_ci(t, name)) return PhiCategory(value);
  }
  if (text::starts_with_ci(t, "EXT:")) {
    const std::string label = text::trim(std::string_view(t).substr(4));
    if (!label.empty()) return extension(label);
  }
  return std::nullopt;
}

const std::vector<PhiCategory>& PhiCategory::closed_set() {
  static const std::vector<PhiCategory> kSet = [] {
    std::vector<PhiCategory> v;
    for (const auto& [value, name] : kClosedTags) v.emplace_back(value);
    return v;
  }();
  return kSet;
}

std::string PhiCategory::tag_string() const {
  if (tag_ == Tag::kExtension) return "EXT:" + label_;
  for (const auto& [value, name] : kClosedTags) {
    if (value == tag_) return std::string(name);
  }
  return "PERSON";  // unreachable
}

}  // namespace deideval
