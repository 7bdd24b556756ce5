#include "deideval/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "deideval/errors.hpp"

namespace deideval {

namespace {

using nlohmann::json;

// Accepts 4 and 4.0 but rejects 4.5, "4", true, null.
std::optional<long long> as_integer(const json& value) {
  if (value.is_number_integer()) return value.get<long long>();
  if (value.is_number_unsigned()) return static_cast<long long>(value.get<unsigned long long>());
  if (value.is_number_float()) {
    const double d = value.get<double>();
    if (std::nearbyint(d) == d && std::abs(d) < 1e15) return static_cast<long long>(d);
  }
  return std::nullopt;
}

}  // namespace

std::vector<ChatMessage> build_judge_prompt(const Note& note, const PredictionSet& pset) {
  std::string system =
      "You are verifying the output of a clinical de-identification system. The user will give "
      "you a clinical note and a numbered list of (category, surface) pairs the system "
      "predicted. Decide for each pair whether the surface really is protected health "
      "information of that category in the note. Count reformatted variants as correct: an "
      "honorific-stripped name such as \"Smith\" for \"Dr. Smith\", or a rewritten date such "
      "as \"2024-03-15\" for \"March 15, 2024\", still counts.\n\n"
      "Respond with exactly one strict JSON object of the form\n"
      "{\"Number of Correct Pairs\": N, \"Per Category\": {\"PERSON\": n1, \"DATE_TIME\": n2}}\n"
      "where N is the integer total of correct pairs and \"Per Category\" breaks N down by "
      "category tag, listing only tags that appear in the pairs. Output nothing else.";

  std::string user = "Clinical note:\n" + note.body() + "\n\nPredicted pairs:\n";
  if (pset.predictions.empty()) {
    user += "(none)\n";
  } else {
    for (std::size_t i = 0; i < pset.predictions.size(); ++i) {
      user += std::to_string(i + 1) + ". (" + pset.predictions[i].category.tag_string() + ") " +
              pset.predictions[i].surface + "\n";
    }
  }
  return {{"system", std::move(system)}, {"user", std::move(user)}};
}

VerdictFields parse_verdict(const std::string& raw, int k, const Normalizer& normalizer) {
  if (k < 0) throw Error("parse_verdict requires k >= 0");

  const auto object_text = extract_first_json_object(raw);
  if (!object_text) throw ParseFailureError("no balanced JSON object in completion");
  json doc;
  try {
    doc = json::parse(*object_text);
  } catch (const json::exception& e) {
    throw ParseFailureError(e.what());
  }
  if (!doc.is_object()) throw ParseFailureError("top-level JSON value is not an object");

  const auto count_it = doc.find("Number of Correct Pairs");
  if (count_it == doc.end()) {
    throw ParseFailureError("missing \"Number of Correct Pairs\"");
  }
  const auto count = as_integer(*count_it);
  if (!count) throw NonIntegerCountError(count_it->dump());

  VerdictFields fields;
  const long long clamped_count = std::clamp<long long>(*count, 0, k);
  fields.clamped = clamped_count != *count;
  fields.n_correct = static_cast<int>(clamped_count);

  const auto per_cat_it = doc.find("Per Category");
  if (per_cat_it != doc.end() && !per_cat_it->is_object()) {
    fields.consistency_warning = true;  // breakdown present but unusable
  } else if (per_cat_it != doc.end()) {
    std::map<PhiCategory, int> per_category;
    bool usable = true;
    long long sum = 0;
    for (const auto& [tag, value] : per_cat_it->items()) {
      const auto category = normalizer.map_output_tag(tag);
      const auto n = as_integer(value);
      if (!category || !n) {
        usable = false;  // malformed breakdown; the headline count still stands
        break;
      }
      const long long clamped = std::max<long long>(0, *n);
      if (clamped != *n) fields.clamped = true;
      per_category[*category] += static_cast<int>(clamped);
      sum += clamped;
    }
    if (!usable || sum != fields.n_correct) {
      fields.consistency_warning = true;  // N wins; breakdown dropped, never rescaled
    } else {
      fields.per_category = std::move(per_category);
    }
  }
  return fields;
}

std::vector<Verdict> run_judge(const std::string& agent_id, const std::string& backend_id,
                               const std::map<std::string, DeidRun>& deid_runs,
                               const Corpus& corpus, Gateway& gateway,
                               const Normalizer& normalizer, int max_workers) {
  if (!gateway.has_backend(backend_id)) throw UnknownBackendError(backend_id);

  struct Item {
    const PredictionSet* pset;
    const Note* note;
  };
  std::vector<Item> items;
  for (const auto& [model_id, run] : deid_runs) {
    for (const auto& [note_id, pset] : run.by_note) {
      const Note* note = corpus.find_note(note_id);
      if (!note) throw Error("prediction set references unknown note: " + note_id);
      items.push_back({&pset, note});
    }
  }

  std::vector<Verdict> verdicts(items.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      const auto& [pset, note] = items[i];

      Verdict v;
      v.agent_id = agent_id;
      v.model_id = pset->model_id;
      v.note_id = pset->note_id;
      const int k = static_cast<int>(pset->predictions.size());
      if (k == 0) {
        verdicts[i] = std::move(v);  // nothing to judge, no backend call
        continue;
      }

      ChatRequest request;
      request.backend_id = backend_id;
      request.model_id = agent_id;
      request.messages = build_judge_prompt(*note, *pset);
      try {
        const VerdictFields fields = parse_verdict(gateway.complete(request).text, k, normalizer);
        v.n_correct = fields.n_correct;
        v.per_category = fields.per_category;
        v.clamped = fields.clamped;
        v.consistency_warning = fields.consistency_warning;
      } catch (const Error&) {
        v.failed = true;  // n_correct stays 0
      }
      verdicts[i] = std::move(v);
    }
  };

  const int workers = std::max(1, std::min<int>(max_workers, static_cast<int>(items.size())));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) {
    return std::tie(a.model_id, a.note_id) < std::tie(b.model_id, b.note_id);
  });
  return verdicts;
}

}  // namespace deideval
