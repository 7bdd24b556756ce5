#include "deideval/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include <json.hpp>

#include "deideval/errors.hpp"
#include "deideval/text.hpp"

namespace deideval {

namespace {

using nlohmann::json;

const char* category_gloss(PhiCategory::Tag tag) {
  switch (tag) {
    case PhiCategory::Tag::kPerson:
      return "names of patients, relatives, clinicians, or any other person";
    case PhiCategory::Tag::kDateTime:
      return "calendar dates, times of day, or combined date-time expressions";
    case PhiCategory::Tag::kLocation:
      return "addresses, cities, states, countries, or other places";
    case PhiCategory::Tag::kOrganization:
      return "hospitals, clinics, companies, or other organizations";
    case PhiCategory::Tag::kAge:
      return "ages of people, in any phrasing";
    case PhiCategory::Tag::kId:
      return "medical record numbers, account numbers, or other identifiers";
    case PhiCategory::Tag::kContact:
      return "phone numbers, fax numbers, email addresses, or similar";
    case PhiCategory::Tag::kExtension:
      return "site-specific protected information of this custom category";
  }
  return "";
}

std::string strip_code_fences(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  std::size_t i = 0;
  while (i < raw.size()) {
    if (raw.compare(i, 3, "```") == 0) {
      i += 3;
      // Drop an attached language tag such as "json".
      while (i < raw.size() && (std::isalnum(static_cast<unsigned char>(raw[i])) != 0)) ++i;
      continue;
    }
    out.push_back(raw[i]);
    ++i;
  }
  return out;
}

}  // namespace

std::optional<std::string> extract_first_json_object(const std::string& raw) {
  const std::string body = strip_code_fences(raw);
  const auto start = body.find('{');
  if (start == std::string::npos) return std::nullopt;

  int depth = 0;
  bool in_string = false;
  bool escape_next = false;
  for (std::size_t i = start; i < body.size(); ++i) {
    const char c = body[i];
    if (escape_next) {
      escape_next = false;
      continue;
    }
    if (c == '\\') {
      escape_next = in_string;
      continue;
    }
    if (c == '"') {
      in_string = !in_string;
      continue;
    }
    if (in_string) continue;
    if (c == '{') ++depth;
    if (c == '}') {
      --depth;
      if (depth == 0) return body.substr(start, i - start + 1);
    }
  }
  return std::nullopt;  // unbalanced (e.g. truncated completion)
}

std::vector<ChatMessage> build_deid_prompt(const Note& note,
                                           const std::vector<PhiCategory>& categories) {
  if (categories.empty()) throw Error("build_deid_prompt requires a non-empty category list");

  std::string system =
      "You are a clinical de-identification system. Find every span of protected health "
      "information (PHI) in the clinical note provided by the user.\n\n"
      "Use exactly these category tags:\n";
  for (const auto& c : categories) {
    system += "- " + c.tag_string() + ": " + category_gloss(c.tag()) + "\n";
  }
  system +=
      "\nRespond with exactly one JSON object and nothing else. Every key must be one of the "
      "category tags above and every value must be a list of the exact text spans copied from "
      "the note. Omit categories with no entities. Example:\n"
      "{\"PERSON\": [\"John Smith\"], \"DATE_TIME\": [\"03/15/2024\"]}";

  return {{"system", std::move(system)}, {"user", note.body()}};
}

PredictionSet parse_deid_output(const std::string& raw, const std::string& note_id,
                                const std::string& model_id, const Normalizer& normalizer) {
  const auto object_text = extract_first_json_object(raw);
  if (!object_text) throw ParseFailureError("no balanced JSON object in completion");

  json doc;
  try {
    doc = json::parse(*object_text);
  } catch (const json::exception& e) {
    throw ParseFailureError(e.what());
  }
  if (!doc.is_object()) throw ParseFailureError("top-level JSON value is not an object");

  std::vector<std::pair<PhiCategory, std::string>> pairs;
  for (const auto& [tag, value] : doc.items()) {
    const auto category = normalizer.map_output_tag(tag);
    if (!category) continue;  // blank tag carries no information

    const auto add_surface = [&](const json& item) {
      std::string surface;
      if (item.is_string()) {
        surface = item.get<std::string>();
      } else if (item.is_number() || item.is_boolean()) {
        surface = item.dump();  // models sometimes emit bare numbers for IDs/dates
      } else if (item.is_null()) {
        return;
      } else {
        throw ParseFailureError("entity list for " + tag + " holds a non-scalar value");
      }
      surface = text::trim(surface);
      if (!surface.empty()) pairs.emplace_back(*category, std::move(surface));
    };

    if (value.is_array()) {
      for (const auto& item : value) add_surface(item);
    } else {
      add_surface(value);
    }
  }

  PredictionSet pset;
  pset.model_id = model_id;
  pset.note_id = note_id;
  for (auto& [category, surface] : normalizer.dedupe(pairs)) {
    pset.predictions.push_back({category, surface});
  }
  return pset;
}

DeidRun run_deid(const std::string& model_id, const std::string& backend_id,
                 const Corpus& corpus, Gateway& gateway, const Normalizer& normalizer,
                 const std::vector<PhiCategory>& categories, int max_workers) {
  if (!gateway.has_backend(backend_id)) throw UnknownBackendError(backend_id);

  const auto& notes = corpus.notes();
  std::vector<PredictionSet> results(notes.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= notes.size()) return;
      const Note& note = notes[i];

      ChatRequest request;
      request.backend_id = backend_id;
      request.model_id = model_id;
      request.messages = build_deid_prompt(note, categories);

      PredictionSet pset;
      pset.model_id = model_id;
      pset.note_id = note.id();
      pset.failed = true;
      try {
        try {
          pset = parse_deid_output(gateway.complete(request).text, note.id(), model_id,
                                   normalizer);
        } catch (const ParseFailureError&) {
          // One corrective retry, then give up on this note.
          request.messages.push_back({"user", "Return ONLY the JSON object."});
          pset = parse_deid_output(gateway.complete(request).text, note.id(), model_id,
                                   normalizer);
        }
      } catch (const Error&) {
        // Parse or backend failure: keep the empty failed set, isolate the note.
      }
      results[i] = std::move(pset);
    }
  };

  const int workers = std::max(1, std::min<int>(max_workers, static_cast<int>(notes.size())));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  DeidRun run;
  run.model_id = model_id;
  for (auto& pset : results) {
    run.total_predictions += static_cast<std::int64_t>(pset.predictions.size());
    if (pset.failed) run.failed_notes.push_back(pset.note_id);
    run.by_note.emplace(pset.note_id, std::move(pset));
  }
  std::sort(run.failed_notes.begin(), run.failed_notes.end());
  return run;
}

}  // namespace deideval
