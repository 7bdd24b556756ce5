#include "deideval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
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

// Column order used by every rendering: the numeric summary columns first,
// then per-category precision columns in tag order.
std::vector<PhiCategory> category_columns(const SummaryTable& table) {
  std::set<PhiCategory> seen;
  for (const auto& row : table.rows) {
    for (const auto& [category, unused] : row.per_category_precision) seen.insert(category);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

const SummaryRow* SummaryTable::find_row(const std::string& model_id) const {
  for (const auto& row : rows) {
    if (row.model_id == model_id) return &row;
  }
  return nullptr;
}

double precision(std::int64_t num_correct, std::int64_t num_predictions) {
  if (num_correct < 0 || num_predictions < 0 || num_correct > num_predictions) {
    throw CountExceedsPredictionsError(num_correct, num_predictions);
  }
  if (num_predictions == 0) return 0.0;
  return static_cast<double>(num_correct) / static_cast<double>(num_predictions);
}

double coverage(const std::map<std::string, std::int64_t>& pred_counts,
                const std::map<std::string, std::int64_t>& token_counts) {
  if (pred_counts.size() != token_counts.size()) {
    throw Error("coverage: prediction and token maps cover different notes");
  }
  std::int64_t preds = 0;
  std::int64_t tokens = 0;
  auto t = token_counts.begin();
  for (auto p = pred_counts.begin(); p != pred_counts.end(); ++p, ++t) {
    if (p->first != t->first) {
      throw Error("coverage: prediction and token maps cover different notes");
    }
    preds += p->second;
    tokens += t->second;
  }
  if (tokens <= 0) throw ZeroTokenCorpusError();
  return static_cast<double>(preds) / static_cast<double>(tokens);
}

double n_avg(const std::map<std::string, std::int64_t>& prediction_counts) {
  std::int64_t total = 0;
  for (const auto& [model, count] : prediction_counts) total += count;
  if (prediction_counts.empty() || total <= 0) throw EmptyRunError();
  return static_cast<double>(total) / static_cast<double>(prediction_counts.size());
}

double recall_proxy(std::int64_t num_correct, double n_avg_value) {
  if (n_avg_value <= 0.0) throw Error("recall_proxy requires positive n_avg");
  return static_cast<double>(num_correct) / n_avg_value;
}

SummaryTable build_summary_table(const std::string& agent_id,
                                 const std::vector<Verdict>& verdicts,
                                 const std::map<std::string, DeidRun>& deid_runs,
                                 const Corpus& corpus, const Normalizer& normalizer) {
  std::map<std::string, std::int64_t> token_counts;
  for (const auto& note : corpus.notes()) {
    token_counts[note.id()] = static_cast<std::int64_t>(note.token_count());
  }

  // Index this agent's verdicts by (model, note).
  std::map<std::pair<std::string, std::string>, const Verdict*> by_key;
  for (const auto& v : verdicts) {
    if (v.agent_id != agent_id) continue;
    const auto key = std::make_pair(v.model_id, v.note_id);
    if (deid_runs.find(v.model_id) == deid_runs.end() ||
        deid_runs.at(v.model_id).by_note.find(v.note_id) ==
            deid_runs.at(v.model_id).by_note.end()) {
      throw Error("verdict for unknown (model, note): " + v.model_id + ", " + v.note_id);
    }
    by_key[key] = &v;
  }

  std::map<std::string, std::int64_t> totals;
  for (const auto& [model_id, run] : deid_runs) totals[model_id] = run.total_predictions;
  const double n_avg_value = n_avg(totals);

  SummaryTable table;
  table.agent_id = agent_id;
  table.n_avg = n_avg_value;

  for (const auto& [model_id, run] : deid_runs) {
    std::size_t missing = 0;
    std::int64_t num_correct = 0;
    std::int64_t judged_predictions = 0;
    std::map<std::string, std::int64_t> pred_counts;
    std::map<PhiCategory, std::int64_t> cat_correct;
    std::map<PhiCategory, std::int64_t> cat_predictions;

    for (const auto& [note_id, pset] : run.by_note) {
      pred_counts[note_id] = static_cast<std::int64_t>(pset.predictions.size());
      const auto it = by_key.find(std::make_pair(model_id, note_id));
      if (it == by_key.end()) {
        ++missing;
        continue;
      }
      const Verdict& v = *it->second;
      if (v.failed) continue;  // the agent never judged these predictions
      num_correct += v.n_correct;
      judged_predictions += static_cast<std::int64_t>(pset.predictions.size());
      if (v.per_category) {
        for (const auto& [category, n] : *v.per_category) cat_correct[category] += n;
        for (const auto& p : pset.predictions) {
          ++cat_predictions[normalizer.fold_category(p.category)];
        }
      }
    }
    if (missing > 0) throw MissingVerdictsError(model_id, missing);

    SummaryRow row;
    row.model_id = model_id;
    row.num_correct = num_correct;
    row.num_predictions = judged_predictions;
    row.zero_prediction_flag = judged_predictions == 0;
    row.precision = precision(num_correct, judged_predictions);
    row.coverage = coverage(pred_counts, token_counts);
    row.recall_proxy = recall_proxy(num_correct, n_avg_value);
    for (const auto& [category, denom] : cat_predictions) {
      if (denom <= 0) continue;
      const auto num = cat_correct.find(category);
      row.per_category_precision[category] =
          precision(num == cat_correct.end() ? 0 : std::min(num->second, denom), denom);
    }
    table.rows.push_back(std::move(row));
  }

  std::sort(table.rows.begin(), table.rows.end(),
            [](const SummaryRow& a, const SummaryRow& b) { return a.model_id < b.model_id; });
  return table;
}

std::optional<ImpliedNAvg> implied_n_avg(const SummaryTable& table) {
  ImpliedNAvg result;
  double sum = 0.0;
  for (const auto& row : table.rows) {
    if (row.recall_proxy <= 0.0 || row.num_correct <= 0) continue;
    const double implied = static_cast<double>(row.num_correct) / row.recall_proxy;
    if (result.rows_used == 0) {
      result.min = result.max = implied;
    } else {
      result.min = std::min(result.min, implied);
      result.max = std::max(result.max, implied);
    }
    sum += implied;
    ++result.rows_used;
  }
  if (result.rows_used == 0) return std::nullopt;
  result.mean = sum / static_cast<double>(result.rows_used);
  return result;
}

json table_to_json(const SummaryTable& table) {
  json rows = json::array();
  for (const auto& row : table.rows) {
    json per_category = json::object();
    for (const auto& [category, value] : row.per_category_precision) {
      per_category[category.tag_string()] = value;
    }
    json r = {
        {"model_id", row.model_id},
        {"precision", row.precision},
        {"coverage", row.coverage},
        {"num_correct", row.num_correct},
        {"recall_proxy", row.recall_proxy},
        {"per_category_precision", std::move(per_category)},
    };
    if (row.num_predictions > 0) r["num_predictions"] = row.num_predictions;
    if (row.zero_prediction_flag) r["zero_prediction_flag"] = true;
    rows.push_back(std::move(r));
  }
  return json{{"agent_id", table.agent_id}, {"n_avg", table.n_avg}, {"rows", std::move(rows)}};
}

SummaryTable table_from_json(const json& doc) {
  SummaryTable table;
  table.agent_id = doc.at("agent_id").get<std::string>();
  table.n_avg = doc.at("n_avg").get<double>();
  for (const auto& r : doc.at("rows")) {
    SummaryRow row;
    row.model_id = r.at("model_id").get<std::string>();
    row.precision = r.at("precision").get<double>();
    row.coverage = r.at("coverage").get<double>();
    row.num_correct = r.at("num_correct").get<std::int64_t>();
    row.recall_proxy = r.at("recall_proxy").get<double>();
    row.num_predictions = r.value("num_predictions", static_cast<std::int64_t>(0));
    row.zero_prediction_flag = r.value("zero_prediction_flag", false);
    if (const auto it = r.find("per_category_precision"); it != r.end()) {
      for (const auto& [tag, value] : it->items()) {
        const auto category = PhiCategory::parse(tag);
        if (!category) throw Error("summary table has unknown category tag: " + tag);
        row.per_category_precision[*category] = value.get<double>();
      }
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const SummaryRow& a, const SummaryRow& b) { return a.model_id < b.model_id; });
  return table;
}

std::string table_to_csv(const SummaryTable& table) {
  const auto categories = category_columns(table);
  std::string out = "model_id,precision,coverage,num_correct,recall_proxy";
  for (const auto& c : categories) out += ",precision_" + c.tag_string();
  out += "\n";
  for (const auto& row : table.rows) {
    out += row.model_id;
    out += "," + fmt(row.precision, "%.10g");
    out += "," + fmt(row.coverage, "%.10g");
    out += "," + std::to_string(row.num_correct);
    out += "," + fmt(row.recall_proxy, "%.10g");
    for (const auto& c : categories) {
      const auto it = row.per_category_precision.find(c);
      out += ",";
      if (it != row.per_category_precision.end()) out += fmt(it->second, "%.10g");
    }
    out += "\n";
  }
  return out;
}

namespace {

// Ranks for bold (best) / italic (second best) annotation. Ties share a rank.
enum class Rank { kNone, kBest, kSecond };

std::vector<Rank> column_ranks(const std::vector<double>& values,
                               const std::vector<bool>& present) {
  std::set<double, std::greater<double>> distinct;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (present[i]) distinct.insert(values[i]);
  }
  std::vector<Rank> ranks(values.size(), Rank::kNone);
  auto it = distinct.begin();
  const double best = it != distinct.end() ? *it++ : 0.0;
  const bool has_second = it != distinct.end();
  const double second = has_second ? *it : 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!present[i]) continue;
    if (!distinct.empty() && values[i] == best) {
      ranks[i] = Rank::kBest;
    } else if (has_second && values[i] == second) {
      ranks[i] = Rank::kSecond;
    }
  }
  return ranks;
}

std::string annotate(const std::string& cell, Rank rank) {
  switch (rank) {
    case Rank::kBest:
      return "**" + cell + "**";
    case Rank::kSecond:
      return "*" + cell + "*";
    default:
      return cell;
  }
}

}  // namespace

std::string table_to_markdown(const SummaryTable& table) {
  const auto categories = category_columns(table);
  const std::size_t n = table.rows.size();

  std::vector<std::string> headers = {"Model", "Precision", "Coverage", "Correct",
                                      "Recall Proxy"};
  for (const auto& c : categories) headers.push_back(c.tag_string() + " Prec.");

  // Collect raw cell text and per-column ranks.
  std::vector<std::vector<std::string>> cells(n);
  std::vector<std::vector<Rank>> ranks;
  {
    const auto rank_of = [&](auto getter) {
      std::vector<double> values(n, 0.0);
      std::vector<bool> present(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        if (const auto v = getter(table.rows[i])) {
          values[i] = *v;
          present[i] = true;
        }
      }
      return column_ranks(values, present);
    };
    ranks.push_back(rank_of([](const SummaryRow& r) { return std::optional<double>(r.precision); }));
    ranks.push_back(rank_of([](const SummaryRow& r) { return std::optional<double>(r.coverage); }));
    ranks.push_back(rank_of(
        [](const SummaryRow& r) { return std::optional<double>(double(r.num_correct)); }));
    ranks.push_back(
        rank_of([](const SummaryRow& r) { return std::optional<double>(r.recall_proxy); }));
    for (const auto& c : categories) {
      ranks.push_back(rank_of([&c](const SummaryRow& r) -> std::optional<double> {
        const auto it = r.per_category_precision.find(c);
        if (it == r.per_category_precision.end()) return std::nullopt;
        return it->second;
      }));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    cells[i].push_back(row.model_id);
    cells[i].push_back(annotate(fmt(row.precision), ranks[0][i]));
    cells[i].push_back(annotate(fmt(row.coverage * 100.0, "%.2f") + "%", ranks[1][i]));
    cells[i].push_back(annotate(std::to_string(row.num_correct), ranks[2][i]));
    cells[i].push_back(annotate(fmt(row.recall_proxy), ranks[3][i]));
    for (std::size_t c = 0; c < categories.size(); ++c) {
      const auto it = row.per_category_precision.find(categories[c]);
      cells[i].push_back(it == row.per_category_precision.end()
                             ? std::string("-")
                             : annotate(fmt(it->second), ranks[4 + c][i]));
    }
  }

  std::string out = "| " ;
  for (std::size_t c = 0; c < headers.size(); ++c) {
    out += headers[c] + (c + 1 < headers.size() ? " | " : " |\n");
  }
  out += "|";
  for (std::size_t c = 0; c < headers.size(); ++c) out += "---|";
  out += "\n";
  for (const auto& row_cells : cells) {
    out += "| ";
    for (std::size_t c = 0; c < row_cells.size(); ++c) {
      out += row_cells[c] + (c + 1 < row_cells.size() ? " | " : " |\n");
    }
  }
  return out;
}

std::string table_to_text(const SummaryTable& table) {
  const auto categories = category_columns(table);
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"model", "precision", "coverage", "num_correct",
                                     "recall_proxy"};
  for (const auto& c : categories) header.push_back("prec[" + c.tag_string() + "]");
  grid.push_back(std::move(header));
  for (const auto& row : table.rows) {
    std::vector<std::string> r = {row.model_id, fmt(row.precision),
                                  fmt(row.coverage * 100.0, "%.2f") + "%",
                                  std::to_string(row.num_correct), fmt(row.recall_proxy)};
    for (const auto& c : categories) {
      const auto it = row.per_category_precision.find(c);
      r.push_back(it == row.per_category_precision.end() ? "-" : fmt(it->second));
    }
    grid.push_back(std::move(r));
  }

  std::vector<std::size_t> widths(grid[0].size(), 0);
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out = "Evaluation agent: " + table.agent_id + "\n";
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out.append(widths[c] - row[c].size() + 2, ' ');
    }
    out += "\n";
  }
  return out;
}

}  // namespace deideval
