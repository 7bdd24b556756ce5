#include <doctest.h>

#include <json.hpp>

#include "deideval/errors.hpp"
#include "deideval/metrics.hpp"
#include "test_support.hpp"

using namespace deideval;
using nlohmann::json;

namespace {

PhiCategory cat(const char* tag) { return *PhiCategory::parse(tag); }

Prediction pred(const char* tag, const char* surface) { return {cat(tag), surface}; }

// Two notes with known whitespace token counts: 10 and 5.
Corpus tiny_corpus() {
  std::vector<Note> notes;
  notes.emplace_back("n1", "a b c d e f g h i j");
  notes.emplace_back("n2", "k l m n o");
  return Corpus(std::move(notes), std::nullopt, PhiCategory::closed_set());
}

DeidRun make_run(const std::string& model_id,
                 std::map<std::string, std::vector<Prediction>> by_note) {
  DeidRun run;
  run.model_id = model_id;
  for (auto& [note_id, preds] : by_note) {
    PredictionSet pset;
    pset.model_id = model_id;
    pset.note_id = note_id;
    pset.predictions = std::move(preds);
    run.total_predictions += static_cast<std::int64_t>(pset.predictions.size());
    run.by_note.emplace(note_id, std::move(pset));
  }
  return run;
}

Verdict verdict(const char* agent, const char* model, const char* note, int n_correct,
                std::optional<std::map<PhiCategory, int>> per_category = std::nullopt,
                bool failed = false) {
  Verdict v;
  v.agent_id = agent;
  v.model_id = model;
  v.note_id = note;
  v.n_correct = n_correct;
  v.per_category = std::move(per_category);
  v.failed = failed;
  return v;
}

}  // namespace

TEST_CASE("precision ratio and guards") {
  CHECK(precision(3, 4) == doctest::Approx(0.75));
  CHECK(precision(0, 4) == 0.0);
  CHECK(precision(0, 0) == 0.0);
  CHECK_THROWS_AS(precision(5, 4), CountExceedsPredictionsError);
  CHECK_THROWS_AS(precision(-1, 4), CountExceedsPredictionsError);
  CHECK_THROWS_AS(precision(1, -1), CountExceedsPredictionsError);
}

TEST_CASE("coverage pools counts over the same note set") {
  std::map<std::string, std::int64_t> preds = {{"n1", 3}, {"n2", 1}};
  std::map<std::string, std::int64_t> tokens = {{"n1", 10}, {"n2", 5}};
  CHECK(coverage(preds, tokens) == doctest::Approx(4.0 / 15.0));

  std::map<std::string, std::int64_t> other = {{"n1", 10}, {"n3", 5}};
  CHECK_THROWS_AS(coverage(preds, other), Error);
  std::map<std::string, std::int64_t> fewer = {{"n1", 10}};
  CHECK_THROWS_AS(coverage(preds, fewer), Error);
  std::map<std::string, std::int64_t> empty_tokens = {{"n1", 0}, {"n2", 0}};
  CHECK_THROWS_AS(coverage(preds, empty_tokens), ZeroTokenCorpusError);
}

TEST_CASE("n_avg is the mean corpus-wide prediction count") {
  CHECK(n_avg({{"a", 4}, {"b", 2}}) == doctest::Approx(3.0));
  CHECK(n_avg({{"a", 7}}) == doctest::Approx(7.0));
  CHECK(n_avg({{"a", 1}, {"b", 2}, {"c", 4}}) == doctest::Approx(7.0 / 3.0));
  CHECK_THROWS_AS(n_avg({}), EmptyRunError);
  CHECK_THROWS_AS(n_avg({{"a", 0}, {"b", 0}}), EmptyRunError);
}

TEST_CASE("recall_proxy divides by the shared n_avg") {
  CHECK(recall_proxy(3, 3.0) == doctest::Approx(1.0));
  CHECK(recall_proxy(9, 6.0) == doctest::Approx(1.5));  // can exceed 1
  CHECK(recall_proxy(0, 3.0) == 0.0);
  CHECK_THROWS_AS(recall_proxy(1, 0.0), Error);
}

TEST_CASE("build_summary_table aggregates one agent's verdicts") {
  const auto corpus = tiny_corpus();
  std::map<std::string, DeidRun> runs;
  runs.emplace("alpha", make_run("alpha", {{"n1",
                                            {pred("PERSON", "John Smith"),
                                             pred("PERSON", "Dr. Wong"),
                                             pred("DATE_TIME", "03/15/2024")}},
                                           {"n2", {pred("ID", "12345")}}}));
  runs.emplace("beta", make_run("beta", {{"n1",
                                          {pred("LOCATION", "Springfield"),
                                           pred("AGE", "72")}},
                                         {"n2", {}}}));

  std::vector<Verdict> verdicts = {
      verdict("agent-a", "alpha", "n1", 2,
              std::map<PhiCategory, int>{{cat("PERSON"), 1}, {cat("DATE_TIME"), 1}}),
      verdict("agent-a", "alpha", "n2", 1),
      verdict("agent-a", "beta", "n1", 0, std::nullopt, /*failed=*/true),
      verdict("agent-a", "beta", "n2", 0, std::map<PhiCategory, int>{}),
      // Another agent's verdicts must be ignored entirely.
      verdict("agent-b", "alpha", "n1", 0),
  };

  const auto table = build_summary_table("agent-a", verdicts, runs, corpus);
  CHECK(table.agent_id == "agent-a");
  CHECK(table.n_avg == doctest::Approx(3.0));  // (4 + 2) / 2 models
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].model_id == "alpha");
  CHECK(table.rows[1].model_id == "beta");

  const auto& alpha = table.rows[0];
  CHECK(alpha.num_correct == 3);
  CHECK(alpha.num_predictions == 4);
  CHECK(alpha.precision == doctest::Approx(0.75));
  CHECK(alpha.coverage == doctest::Approx(4.0 / 15.0));
  CHECK(alpha.recall_proxy == doctest::Approx(1.0));
  CHECK_FALSE(alpha.zero_prediction_flag);
  // Per-category denominators only count notes whose verdict carried a
  // breakdown; the n2 verdict had none, so its ID prediction stays out.
  REQUIRE(alpha.per_category_precision.size() == 2);
  CHECK(alpha.per_category_precision.at(cat("PERSON")) == doctest::Approx(0.5));
  CHECK(alpha.per_category_precision.at(cat("DATE_TIME")) == doctest::Approx(1.0));

  const auto& beta = table.rows[1];
  // The failed n1 verdict removes those predictions from the precision
  // denominator, but coverage still counts every prediction the model made.
  CHECK(beta.num_correct == 0);
  CHECK(beta.num_predictions == 0);
  CHECK(beta.zero_prediction_flag);
  CHECK(beta.precision == 0.0);
  CHECK(beta.coverage == doctest::Approx(2.0 / 15.0));
  CHECK(beta.recall_proxy == 0.0);
  CHECK(beta.per_category_precision.empty());

  CHECK(table.find_row("alpha") == &table.rows[0]);
  CHECK(table.find_row("gamma") == nullptr);

  SUBCASE("a missing verdict is an error, not a silent zero") {
    std::vector<Verdict> incomplete(verdicts.begin(), verdicts.end());
    incomplete.erase(incomplete.begin() + 1);  // drop (alpha, n2)
    CHECK_THROWS_AS(build_summary_table("agent-a", incomplete, runs, corpus),
                    MissingVerdictsError);
  }

  SUBCASE("a verdict for an unknown pair is rejected") {
    auto extra = verdicts;
    extra.push_back(verdict("agent-a", "alpha", "ghost", 1));
    CHECK_THROWS_AS(build_summary_table("agent-a", extra, runs, corpus), Error);
  }
}

TEST_CASE("per-category numerators never exceed their denominators") {
  // The agent tags a correct pair differently from the model: note n1 has one
  // PERSON prediction, n2 two DATE_TIME ones, but the n2 agent breakdown says
  // PERSON. Pooled PERSON correct = 3 against only 1 PERSON prediction.
  std::vector<Note> notes;
  notes.emplace_back("n1", "a b c");
  notes.emplace_back("n2", "d e f");
  const Corpus corpus(std::move(notes), std::nullopt, PhiCategory::closed_set());

  std::map<std::string, DeidRun> runs;
  runs.emplace("m", make_run("m", {{"n1", {pred("PERSON", "Bob")}},
                                   {"n2",
                                    {pred("DATE_TIME", "June 2020"),
                                     pred("DATE_TIME", "July 2021")}}}));
  std::vector<Verdict> verdicts = {
      verdict("a", "m", "n1", 1, std::map<PhiCategory, int>{{cat("PERSON"), 1}}),
      verdict("a", "m", "n2", 2, std::map<PhiCategory, int>{{cat("PERSON"), 2}}),
  };
  const auto table = build_summary_table("a", verdicts, runs, corpus);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].per_category_precision.at(cat("PERSON")) == doctest::Approx(1.0));
  CHECK(table.rows[0].per_category_precision.at(cat("DATE_TIME")) == doctest::Approx(0.0));
}

TEST_CASE("implied_n_avg reports the spread across rows") {
  SummaryTable table;
  table.agent_id = "a";
  SummaryRow r1;
  r1.model_id = "m1";
  r1.num_correct = 984;
  r1.recall_proxy = 0.5989;
  SummaryRow r2;
  r2.model_id = "m2";
  r2.num_correct = 1447;
  r2.recall_proxy = 0.8731;
  SummaryRow r3;  // no signal; must be skipped
  r3.model_id = "m3";
  r3.num_correct = 0;
  r3.recall_proxy = 0.0;
  table.rows = {r1, r2, r3};

  const auto implied = implied_n_avg(table);
  REQUIRE(implied.has_value());
  CHECK(implied->rows_used == 2);
  const double a = 984.0 / 0.5989;
  const double b = 1447.0 / 0.8731;
  CHECK(implied->min == doctest::Approx(std::min(a, b)));
  CHECK(implied->max == doctest::Approx(std::max(a, b)));
  CHECK(implied->mean == doctest::Approx((a + b) / 2.0));

  SummaryTable only_zero;
  only_zero.rows = {r3};
  CHECK_FALSE(implied_n_avg(only_zero).has_value());
}

TEST_CASE("summary tables survive a JSON round trip") {
  SummaryTable table;
  table.agent_id = "agent-x";
  table.n_avg = 3.5;
  SummaryRow row;
  row.model_id = "zeta";
  row.precision = 0.75;
  row.coverage = 0.0137;
  row.num_correct = 42;
  row.recall_proxy = 0.9;
  row.num_predictions = 56;
  row.per_category_precision[cat("PERSON")] = 0.9;
  row.per_category_precision[PhiCategory::extension("mrn")] = 0.5;
  SummaryRow flagged;
  flagged.model_id = "alpha";
  flagged.zero_prediction_flag = true;
  table.rows = {row, flagged};

  const auto doc = table_to_json(table);
  const auto back = table_from_json(doc);
  CHECK(back.agent_id == "agent-x");
  CHECK(back.n_avg == doctest::Approx(3.5));
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].model_id == "alpha");  // re-sorted on load
  CHECK(back.rows[0].zero_prediction_flag);
  CHECK(back.rows[0].num_predictions == 0);
  const auto& z = back.rows[1];
  CHECK(z.model_id == "zeta");
  CHECK(z.precision == doctest::Approx(0.75));
  CHECK(z.coverage == doctest::Approx(0.0137));
  CHECK(z.num_correct == 42);
  CHECK(z.recall_proxy == doctest::Approx(0.9));
  CHECK(z.num_predictions == 56);
  CHECK(z.per_category_precision.at(cat("PERSON")) == doctest::Approx(0.9));
  CHECK(z.per_category_precision.at(PhiCategory::extension("MRN")) == doctest::Approx(0.5));

  // num_predictions is omitted for rows rebuilt from published tables. The
  // serialized rows keep their input order: zeta first, then alpha.
  CHECK(doc.at("rows").at(0).at("num_predictions") == 56);
  CHECK_FALSE(doc.at("rows").at(1).contains("num_predictions"));

  auto bad = doc;
  bad["rows"][1]["per_category_precision"] = {{"NOT_A_TAG", 0.5}};
  CHECK_THROWS_AS(table_from_json(bad), Error);
}

TEST_CASE("csv rendering emits one column per category seen") {
  SummaryTable table;
  table.agent_id = "a";
  table.n_avg = 2.0;
  SummaryRow r1;
  r1.model_id = "m1";
  r1.precision = 0.5;
  r1.coverage = 0.25;
  r1.num_correct = 2;
  r1.recall_proxy = 1.0;
  r1.per_category_precision[cat("PERSON")] = 0.5;
  SummaryRow r2;
  r2.model_id = "m2";
  r2.precision = 1.0;
  r2.coverage = 0.1;
  r2.num_correct = 1;
  r2.recall_proxy = 0.5;
  r2.per_category_precision[cat("DATE_TIME")] = 1.0;
  table.rows = {r1, r2};

  const auto csv = table_to_csv(table);
  CHECK(csv ==
        "model_id,precision,coverage,num_correct,recall_proxy,"
        "precision_PERSON,precision_DATE_TIME\n"
        "m1,0.5,0.25,2,1,0.5,\n"
        "m2,1,0.1,1,0.5,,1\n");
}

TEST_CASE("markdown rendering bolds the best and italicizes the runner-up") {
  SummaryTable table;
  table.agent_id = "a";
  table.n_avg = 2.0;
  const auto make = [](const char* id, double p, double c, std::int64_t n, double r) {
    SummaryRow row;
    row.model_id = id;
    row.precision = p;
    row.coverage = c;
    row.num_correct = n;
    row.recall_proxy = r;
    return row;
  };
  table.rows = {make("m1", 0.9, 0.010, 5, 0.7), make("m2", 0.8, 0.020, 9, 0.9),
                make("m3", 0.7, 0.015, 1, 0.1)};

  const auto md = table_to_markdown(table);
  CHECK(md.find("| Model | Precision | Coverage | Correct | Recall Proxy |") != std::string::npos);
  CHECK(md.find("| m1 | **0.9000** | 1.00% | *5* | *0.7000* |") != std::string::npos);
  CHECK(md.find("| m2 | *0.8000* | **2.00%** | **9** | **0.9000** |") != std::string::npos);
  CHECK(md.find("| m3 | 0.7000 | *1.50%* | 1 | 0.1000 |") != std::string::npos);
}

TEST_CASE("plain-text rendering is stable for voter prompts") {
  SummaryTable table;
  table.agent_id = "agent-z";
  table.n_avg = 2.0;
  SummaryRow row;
  row.model_id = "long-model-name";
  row.precision = 0.5;
  row.coverage = 0.015;
  row.num_correct = 3;
  row.recall_proxy = 1.5;
  row.per_category_precision[cat("PERSON")] = 1.0;
  table.rows = {row};

  const auto text = table_to_text(table);
  CHECK(text.find("Evaluation agent: agent-z\n") == 0);
  CHECK(text.find("model") != std::string::npos);
  CHECK(text.find("prec[PERSON]") != std::string::npos);
  CHECK(text.find("long-model-name") != std::string::npos);
  CHECK(text.find("1.50%") != std::string::npos);
}

TEST_CASE("bundled reference tables load with the published numbers") {
  const auto root = testsup::fixtures_root() / "reference_tables";
  const auto gemma = table_from_json(json::parse(testsup::read_file(root / "gemma-2.json")));
  CHECK(gemma.agent_id == "gemma-2");
  CHECK(gemma.rows.size() == 8);
  const auto* row = gemma.find_row("Gemma-2");
  REQUIRE(row != nullptr);
  CHECK(row->precision == doctest::Approx(0.6169));
  CHECK(row->coverage == doctest::Approx(0.0137));
  CHECK(row->num_correct == 984);
  CHECK(row->recall_proxy == doctest::Approx(0.5989));
  CHECK(row->per_category_precision.at(cat("PERSON")) == doctest::Approx(0.9120));
  CHECK(row->per_category_precision.at(cat("DATE_TIME")) == doctest::Approx(0.6903));

  const auto* cross = gemma.find_row("Llama-70b");
  REQUIRE(cross != nullptr);
  CHECK(cross->num_correct == 1010);
  CHECK(cross->recall_proxy == doctest::Approx(0.6147));

  const auto llama = table_from_json(json::parse(testsup::read_file(root / "llama-70b.json")));
  CHECK(llama.agent_id == "llama-70b");
  const auto* best = llama.find_row("Llama-70b");
  REQUIRE(best != nullptr);
  CHECK(best->precision == doctest::Approx(0.8278));
  CHECK(best->coverage == doctest::Approx(0.0101));
  CHECK(best->num_correct == 1447);
  CHECK(best->recall_proxy == doctest::Approx(0.8731));
  CHECK(best->per_category_precision.at(cat("PERSON")) == doctest::Approx(1.0000));
  CHECK(best->per_category_precision.at(cat("DATE_TIME")) == doctest::Approx(0.9241));
}
