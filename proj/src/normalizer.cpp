#include "deideval/normalizer.hpp"

#include <array>
#include <cstdio>
#include <regex>
#include <set>

#include "deideval/errors.hpp"
#include "deideval/text.hpp"

namespace deideval {

namespace {

int month_from_name(const std::string& name) {
  static const std::map<std::string, int> kMonths = {
      {"january", 1},  {"jan", 1},  {"february", 2}, {"feb", 2},  {"march", 3},    {"mar", 3},
      {"april", 4},    {"apr", 4},  {"may", 5},      {"june", 6}, {"jun", 6},      {"july", 7},
      {"jul", 7},      {"august", 8},  {"aug", 8},   {"september", 9}, {"sept", 9}, {"sep", 9},
      {"october", 10}, {"oct", 10}, {"november", 11}, {"nov", 11}, {"december", 12}, {"dec", 12},
  };
  const auto it = kMonths.find(name);
  return it == kMonths.end() ? 0 : it->second;
}

int days_in_month(int year, int month) {
  static constexpr std::array<int, 13> kDays = {0, 31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month == 2) {
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month];
}

struct DateParts {
  int year = 0;
  int month = 0;
  int day = 0;
  bool has_time = false;
  int hour = 0;
  int minute = 0;
};

// Trailing time-of-day: "10:30", "at 10:30:00", "10:30 pm". Appended to every
// date pattern below as one optional group.
constexpr const char* kTimeTail = "(?: (?:at )?(\\d{1,2}):(\\d{2})(?::\\d{2})?(?: ?(am|pm))?)?";

bool fill_time(const std::smatch& m, std::size_t first_group, DateParts* parts) {
  if (!m[first_group].matched) return true;  // no time present
  int hour = std::stoi(m[first_group].str());
  const int minute = std::stoi(m[first_group + 1].str());
  const std::string ampm = m[first_group + 2].matched ? m[first_group + 2].str() : "";
  if (minute > 59) return false;
  if (ampm.empty()) {
    if (hour > 23) return false;
  } else {
    if (hour < 1 || hour > 12) return false;
    if (hour == 12) hour = 0;
    if (ampm == "pm") hour += 12;
  }
  parts->has_time = true;
  parts->hour = hour;
  parts->minute = minute;
  return true;
}

}  // namespace

Normalizer::Normalizer(NormalizerConfig config) : config_(std::move(config)) {
  for (auto& h : config_.honorifics) h = text::lower(text::trim(h));
  std::map<std::string, std::string> folded;
  for (const auto& [key, value] : config_.synonyms) {
    const auto target = PhiCategory::parse(value);
    if (!target) throw ConfigError("synonym target is not a valid category tag: " + value);
    folded[text::lower(text::trim(key))] = target->tag_string();
  }
  config_.synonyms = std::move(folded);
}

PhiCategory Normalizer::fold_category(const PhiCategory& category) const {
  const auto it = config_.synonyms.find(text::lower(category.tag_string()));
  if (it != config_.synonyms.end()) return *PhiCategory::parse(it->second);
  if (category.is_extension()) {
    // An extension label that spells a synonym source or a closed tag also
    // folds: model tags arrive here as EXT when they miss the closed list.
    const auto syn = config_.synonyms.find(category.extension_label());
    if (syn != config_.synonyms.end()) return *PhiCategory::parse(syn->second);
    if (const auto closed = PhiCategory::parse(category.extension_label());
        closed && !closed->is_extension()) {
      return *closed;
    }
  }
  return category;
}

std::optional<PhiCategory> Normalizer::map_output_tag(std::string_view tag) const {
  const std::string t = text::trim(tag);
  if (t.empty()) return std::nullopt;
  if (const auto parsed = PhiCategory::parse(t)) return fold_category(*parsed);
  const auto syn = config_.synonyms.find(text::lower(t));
  if (syn != config_.synonyms.end()) return *PhiCategory::parse(syn->second);
  return PhiCategory::extension(t);
}

std::string Normalizer::normalize_generic(std::string_view surface) const {
  std::string t = text::collapse_whitespace(text::lower(surface));
  // Punctuation stripping can expose whitespace and vice versa; iterate to a
  // fixed point so canonical text never carries edge punctuation or spaces.
  for (;;) {
    std::string next = text::trim(text::strip_edge_punct(t));
    if (next == t) break;
    t = std::move(next);
  }
  return t;
}

std::string Normalizer::normalize_person(const std::string& generic) const {
  auto tokens = text::split_ws(generic);
  const auto is_honorific = [this](std::string t) {
    if (!t.empty() && t.back() == '.') t.pop_back();
    for (const auto& h : config_.honorifics) {
      if (t == h) return true;
    }
    return false;
  };
  // Stacked honorifics strip repeatedly (idempotence); a bare honorific with
  // nothing after it stays as-is rather than emptying the surface.
  std::size_t begin = 0;
  while (tokens.size() - begin >= 2 && is_honorific(tokens[begin])) ++begin;
  if (begin == 0) return generic;
  std::string out;
  for (std::size_t i = begin; i < tokens.size(); ++i) {
    if (!out.empty()) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string Normalizer::normalize_date_time(const std::string& generic) const {
  static const std::regex kIso("^(\\d{4})[-/](\\d{1,2})[-/](\\d{1,2})" + std::string(kTimeTail) +
                               "$");
  static const std::regex kNumeric("^(\\d{1,2})[-/](\\d{1,2})[-/](\\d{4}|\\d{2})" +
                                   std::string(kTimeTail) + "$");
  static const std::regex kMonthFirst(
      "^([a-z]+)\\.? (\\d{1,2})(?:st|nd|rd|th)?,? (\\d{4}|\\d{2})" + std::string(kTimeTail) + "$");
  static const std::regex kDayFirst(
      "^(\\d{1,2})(?:st|nd|rd|th)? (?:of )?([a-z]+)\\.?,? (\\d{4}|\\d{2})" +
      std::string(kTimeTail) + "$");

  const auto expand_year = [this](const std::string& y) {
    int year = std::stoi(y);
    if (y.size() == 2) year += year < config_.two_digit_year_pivot ? 2000 : 1900;
    return year;
  };

  DateParts parts;
  std::smatch m;
  bool matched = false;
  if (std::regex_match(generic, m, kIso)) {
    parts.year = std::stoi(m[1].str());
    parts.month = std::stoi(m[2].str());
    parts.day = std::stoi(m[3].str());
    matched = fill_time(m, 4, &parts);
  } else if (std::regex_match(generic, m, kNumeric)) {
    const int a = std::stoi(m[1].str());
    const int b = std::stoi(m[2].str());
    parts.year = expand_year(m[3].str());
    parts.month = config_.month_first ? a : b;
    parts.day = config_.month_first ? b : a;
    matched = fill_time(m, 4, &parts);
  } else if (std::regex_match(generic, m, kMonthFirst)) {
    parts.month = month_from_name(m[1].str());
    parts.day = std::stoi(m[2].str());
    parts.year = expand_year(m[3].str());
    matched = parts.month != 0 && fill_time(m, 4, &parts);
  } else if (std::regex_match(generic, m, kDayFirst)) {
    parts.day = std::stoi(m[1].str());
    parts.month = month_from_name(m[2].str());
    parts.year = expand_year(m[3].str());
    matched = parts.month != 0 && fill_time(m, 4, &parts);
  }

  if (!matched || parts.month < 1 || parts.month > 12 || parts.day < 1 ||
      parts.day > days_in_month(parts.year, parts.month)) {
    return generic;
  }

  char buf[32];
  if (parts.has_time) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", parts.year, parts.month,
                  parts.day, parts.hour, parts.minute);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", parts.year, parts.month, parts.day);
  }
  return buf;
}

std::string Normalizer::normalize_age(const std::string& generic) const {
  static const std::regex kAge("^(?:aged?:? )?0*(\\d{1,9})(?:$|[^0-9].*)");
  std::smatch m;
  if (!std::regex_match(generic, m, kAge)) return generic;
  return std::to_string(std::stoi(m[1].str()));
}

CanonicalForm Normalizer::canonicalize(const PhiCategory& category,
                                       std::string_view surface) const {
  std::string current = normalize_generic(surface);
  if (current.empty()) throw EmptySurfaceError();

  const PhiCategory folded = fold_category(category);
  // Category rules can expose fresh edge punctuation (or, for PERSON, a new
  // leading honorific), so rule + generic pass repeat until stable. The cap
  // only guards against a pathological rule interaction; real surfaces
  // settle within two passes.
  for (int i = 0; i < 100; ++i) {
    std::string next;
    switch (folded.tag()) {
      case PhiCategory::Tag::kPerson:
        next = normalize_person(current);
        break;
      case PhiCategory::Tag::kDateTime:
        next = normalize_date_time(current);
        break;
      case PhiCategory::Tag::kAge:
        next = normalize_age(current);
        break;
      default:
        next = current;
        break;
    }
    next = normalize_generic(next);
    if (next == current || next.empty()) break;
    current = std::move(next);
  }
  return CanonicalForm{folded, std::move(current)};
}

bool Normalizer::equivalent(const std::pair<PhiCategory, std::string>& a,
                            const std::pair<PhiCategory, std::string>& b) const {
  try {
    return canonicalize(a.first, a.second) == canonicalize(b.first, b.second);
  } catch (const EmptySurfaceError&) {
    return false;  // blank surfaces are not entities, never equivalent
  }
}

std::vector<std::pair<PhiCategory, std::string>> Normalizer::dedupe(
    const std::vector<std::pair<PhiCategory, std::string>>& predictions) const {
  std::vector<std::pair<PhiCategory, std::string>> out;
  std::set<CanonicalForm> seen;
  for (const auto& p : predictions) {
    CanonicalForm form;
    try {
      form = canonicalize(p.first, p.second);
    } catch (const EmptySurfaceError&) {
      continue;
    }
    if (seen.insert(std::move(form)).second) out.push_back(p);
  }
  return out;
}

}  // namespace deideval
