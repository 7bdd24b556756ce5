#include "deideval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "deideval/errors.hpp"

namespace deideval {

namespace {

using nlohmann::json;

std::string fmt(double value, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, value);
  return buf;
}

std::string pm(double value, double std_value) { return fmt(value) + "±" + fmt(std_value); }

json prf_to_json(const PRF& prf) {
  return {{"precision", prf.precision},       {"recall", prf.recall},
          {"f1", prf.f1},                     {"std_precision", prf.std_precision},
          {"std_recall", prf.std_recall},     {"std_f1", prf.std_f1}};
}

PRF prf_from_json(const json& doc) {
  PRF prf;
  prf.precision = doc.at("precision").get<double>();
  prf.recall = doc.at("recall").get<double>();
  prf.f1 = doc.at("f1").get<double>();
  prf.std_precision = doc.value("std_precision", 0.0);
  prf.std_recall = doc.value("std_recall", 0.0);
  prf.std_f1 = doc.value("std_f1", 0.0);
  return prf;
}

json counts_to_json(const Counts& c) { return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}}; }

// PERSON and DATE_TIME lead (headline categories of the published layout),
// any further categories follow in tag order.
std::vector<PhiCategory> gold_category_columns(const GoldScores& scores) {
  std::set<PhiCategory> present;
  for (const auto& [model_id, score] : scores) {
    for (const auto& [category, prf] : score.per_category) present.insert(category);
  }
  std::vector<PhiCategory> columns;
  for (const auto tag : {PhiCategory::Tag::kPerson, PhiCategory::Tag::kDateTime}) {
    const PhiCategory c{tag};
    if (present.erase(c) > 0) columns.push_back(c);
  }
  columns.insert(columns.end(), present.begin(), present.end());
  return columns;
}

}  // namespace

json gold_report_to_json(const GoldScores& scores, int resamples, std::uint64_t seed) {
  json models = json::array();
  for (const auto& [model_id, score] : scores) {
    json per_category = json::object();
    json per_category_counts = json::object();
    for (const auto& [category, prf] : score.per_category) {
      per_category[category.tag_string()] = prf_to_json(prf);
    }
    for (const auto& [category, counts] : score.per_category_counts) {
      per_category_counts[category.tag_string()] = counts_to_json(counts);
    }
    models.push_back({
        {"model_id", model_id},
        {"overall", prf_to_json(score.overall)},
        {"macro", prf_to_json(score.macro)},
        {"counts", counts_to_json(score.counts)},
        {"per_category", std::move(per_category)},
        {"per_category_counts", std::move(per_category_counts)},
    });
  }
  return json{{"resamples", resamples}, {"seed", seed}, {"models", std::move(models)}};
}

GoldScores gold_report_from_json(const json& doc) {
  GoldScores scores;
  for (const auto& m : doc.at("models")) {
    GoldScore score;
    score.overall = prf_from_json(m.at("overall"));
    if (m.contains("macro")) score.macro = prf_from_json(m.at("macro"));
    for (const auto& [tag, prf] : m.at("per_category").items()) {
      const auto category = PhiCategory::parse(tag);
      if (!category) throw Error("gold report has unknown category tag: " + tag);
      score.per_category[*category] = prf_from_json(prf);
    }
    scores.emplace_back(m.at("model_id").get<std::string>(), std::move(score));
  }
  return scores;
}

std::string gold_report_to_markdown(const GoldScores& scores, int resamples) {
  const auto columns = gold_category_columns(scores);

  std::string out = "| Model | Overall P | Overall R | Overall F1 |";
  for (const auto& c : columns) {
    out += " " + c.tag_string() + " P | " + c.tag_string() + " R | " + c.tag_string() + " F1 |";
  }
  out += "\n|";
  for (std::size_t i = 0; i < 4 + columns.size() * 3; ++i) out += "---|";
  out += "\n";

  for (const auto& [model_id, score] : scores) {
    out += "| " + model_id;
    out += " | " + pm(score.overall.precision, score.overall.std_precision);
    out += " | " + pm(score.overall.recall, score.overall.std_recall);
    out += " | " + pm(score.overall.f1, score.overall.std_f1);
    for (const auto& c : columns) {
      const auto it = score.per_category.find(c);
      if (it == score.per_category.end()) {
        out += " | - | - | -";
      } else {
        out += " | " + pm(it->second.precision, it->second.std_precision);
        out += " | " + pm(it->second.recall, it->second.std_recall);
        out += " | " + pm(it->second.f1, it->second.std_f1);
      }
    }
    out += " |\n";
  }
  out += "\n± values are bootstrap standard deviations over " + std::to_string(resamples) +
         " note-level resamples.\n";
  return out;
}

std::string gold_report_to_csv(const GoldScores& scores) {
  const auto columns = gold_category_columns(scores);
  std::string out = "model_id,precision,recall,f1,std_precision,std_recall,std_f1";
  for (const auto& c : columns) {
    const std::string tag = c.tag_string();
    out += ",precision_" + tag + ",recall_" + tag + ",f1_" + tag;
  }
  out += "\n";
  for (const auto& [model_id, score] : scores) {
    out += model_id;
    out += "," + fmt(score.overall.precision, "%.10g");
    out += "," + fmt(score.overall.recall, "%.10g");
    out += "," + fmt(score.overall.f1, "%.10g");
    out += "," + fmt(score.overall.std_precision, "%.10g");
    out += "," + fmt(score.overall.std_recall, "%.10g");
    out += "," + fmt(score.overall.std_f1, "%.10g");
    for (const auto& c : columns) {
      const auto it = score.per_category.find(c);
      if (it == score.per_category.end()) {
        out += ",,,";
      } else {
        out += "," + fmt(it->second.precision, "%.10g");
        out += "," + fmt(it->second.recall, "%.10g");
        out += "," + fmt(it->second.f1, "%.10g");
      }
    }
    out += "\n";
  }
  return out;
}

std::string consolidated_report(const std::vector<SummaryTable>& tables,
                                const std::vector<json>& vote_records,
                                const std::optional<json>& gold_report, int gold_resamples) {
  std::string out = "# De-identification evaluation report\n\n";

  out += "## Proxy metrics per evaluation agent\n\n";
  out +=
      "Bold marks the best value per column, italics the second best. Coverage is "
      "predictions per corpus token; the recall proxy divides each model's correct count by "
      "the run-wide mean prediction count (N_avg).\n\n";
  std::optional<double> implied_min;
  std::optional<double> implied_max;
  std::string implied_min_agent;
  std::string implied_max_agent;
  for (const auto& table : tables) {
    out += "### Agent: " + table.agent_id + "\n\n";
    out += table_to_markdown(table);
    out += "\nRun N_avg: " + fmt(table.n_avg, "%.1f");
    if (const auto implied = implied_n_avg(table)) {
      out += "; table-implied N_avg: mean " + fmt(implied->mean, "%.1f") + " (min " +
             fmt(implied->min, "%.1f") + ", max " + fmt(implied->max, "%.1f") + ")";
      if (!implied_min || implied->mean < *implied_min) {
        implied_min = implied->mean;
        implied_min_agent = table.agent_id;
      }
      if (!implied_max || implied->mean > *implied_max) {
        implied_max = implied->mean;
        implied_max_agent = table.agent_id;
      }
    }
    out += "\n\n";
  }
  if (implied_min && implied_max) {
    out += "Observed ambiguity: the N_avg implied by each table's own correct counts and "
           "recall proxies ranges from " +
           fmt(*implied_min, "%.1f") + " (" + implied_min_agent + ") to " +
           fmt(*implied_max, "%.1f") + " (" + implied_max_agent +
           "). This run computes one shared N_avg as the mean per-model prediction count.\n\n";
  }

  if (!vote_records.empty()) {
    out += "## Best-model vote\n\n";
    for (const auto& record : vote_records) {
      out += "### Mode: " + record.at("mode").get<std::string>() + "\n\n";
      out += "Winner: **" + record.at("winner").get<std::string>() + "**";
      if (record.at("tie_broken").get<bool>()) out += " (tie broken lexicographically)";
      out += "\n\nBallots (" + record.at("voter_kind").get<std::string>() + " voter";
      if (record.contains("voting_model")) {
        out += ", model " + record.at("voting_model").get<std::string>();
      }
      out += "):\n\n";
      for (const auto& ballot : record.at("ballots")) {
        out += "- " + ballot.at("source_table").get<std::string>() + " → " +
               ballot.at("choice").get<std::string>() + "\n";
      }
      out += "\nTally:";
      for (const auto& [model_id, count] : record.at("tally").items()) {
        out += " " + model_id + "=" + count.dump();
      }
      out += "\n\n";
    }
  }

  if (gold_report) {
    out += "## Gold-standard evaluation\n\n";
    out += "Micro-averaged precision/recall/F1 against the corpus gold annotations, with "
           "per-note macro averages recorded in the JSON report.\n\n";
    out += gold_report_to_markdown(gold_report_from_json(*gold_report), gold_resamples);
    out += "\n";
  }
  return out;
}

}  // namespace deideval
