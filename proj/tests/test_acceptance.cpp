// Acceptance suite: one test case per acceptance criterion, each printing a
// single "criterion N <label>: PASS|FAIL" line. Tolerances live in the
// constants below; every expected value was computed independently of the
// implementation before being frozen here.

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "deideval/artifacts.hpp"
#include "deideval/errors.hpp"
#include "deideval/gateway.hpp"
#include "deideval/goldeval.hpp"
#include "deideval/metrics.hpp"
#include "deideval/normalizer.hpp"
#include "deideval/report.hpp"
#include "deideval/voting.hpp"
#include "parse_case_replay.hpp"
#include "test_support.hpp"

using namespace deideval;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// --- frozen tolerances and expected values ---

// Published tables round their recall proxies to 4 decimals, so a perfect
// reconstruction from (num_correct, implied n_avg) cannot be exact. The
// observed worst case is 2.3e-4; the gate sits at 2e-3.
constexpr double kRoundTripRelTol = 2e-3;
constexpr std::int64_t kRoundTripCountTol = 1;
// The published tables imply two different corpus-wide prediction means:
// about 1643 for two agents and about 1657 for the rest.
constexpr double kImpliedLowMin = 1642.0, kImpliedLowMax = 1645.0;
constexpr double kImpliedHighMin = 1655.0, kImpliedHighMax = 1660.0;

constexpr int kMatchTrials = 200;
constexpr double kGreedyMatchMinRate = 0.98;

constexpr int kIdentityTrials = 1000;
constexpr double kIdentityTol = 1e-12;

constexpr int kBootstrapResamples = 10000;
// Two-note corpus with per-note F1 of 1.0 and 0.0: resampled pooled F1 takes
// values {1.0, 0.5, 0.0} with probabilities {1/4, 1/2, 1/4}, so the bootstrap
// std converges on sqrt(1/8), not on the 0.5 mean.
constexpr double kBootstrapStdExpected = 0.35355339059327373;
constexpr double kBootstrapStdTol = 0.02;

constexpr int kExpectedParseCases = 39;

#define ACCEPT(cond)                                  \
  do {                                                \
    const bool accept_ok_ = static_cast<bool>(cond);  \
    CHECK_MESSAGE(accept_ok_, #cond);                 \
    ok = ok && accept_ok_;                            \
  } while (0)

void print_criterion(int n, const char* label, bool ok) {
  std::printf("criterion %d %s: %s\n", n, label, ok ? "PASS" : "FAIL");
  std::fflush(stdout);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<SummaryTable> reference_tables() {
  const char* names[] = {"gemma-2", "gpt-3.5", "gpt-4o", "llama-8b", "llama-70b", "mistral-7b"};
  std::vector<SummaryTable> tables;
  for (const char* name : names) {
    const auto path = testsup::fixtures_root() / "reference_tables" / (std::string(name) + ".json");
    tables.push_back(table_from_json(json::parse(testsup::read_file(path))));
  }
  std::sort(tables.begin(), tables.end(),
            [](const SummaryTable& a, const SummaryTable& b) { return a.agent_id < b.agent_id; });
  return tables;
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const fs::path& scratch) {
  static int counter = 0;
  const fs::path log = scratch / ("cli-" + std::to_string(counter++) + ".log");
  const std::string cmd =
      "\"" + testsup::cli_binary() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.output = testsup::read_file(log);
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

// Relative path -> bytes for every regular file under root.
std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), root).generic_string()] =
          testsup::read_file(entry.path());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("criterion 1: voting replication") {
  bool ok = true;
  const auto tables = reference_tables();
  ACCEPT(tables.size() == 6);

  // Deterministic voter: one pseudo-F1 argmax ballot per table.
  {
    DeterministicVoter voter;
    const auto result = vote_independent(tables, voter);
    const std::vector<std::string> expected = {"GPT-3.5",   "Llama-70b", "Llama-70b",
                                               "Llama-70b", "GPT-3.5",   "GPT-4o"};
    ACCEPT(result.ballots.size() == expected.size());
    for (std::size_t i = 0; i < expected.size() && i < result.ballots.size(); ++i) {
      ACCEPT(result.ballots[i].choice == expected[i]);
    }
    ACCEPT(result.winner == "Llama-70b");
    ACCEPT(!result.tie_broken);
    ACCEPT(result.tally.at("Llama-70b") == 3);
    ACCEPT(result.tally.at("GPT-3.5") == 2);
    ACCEPT(result.tally.at("GPT-4o") == 1);

    const auto cross = vote_cross_informed(tables, voter);
    ACCEPT(cross.winner == "Llama-70b");
    ACCEPT(cross.ballots.size() == 1);
    ACCEPT(cross.ballots.at(0).source_table == "all");
  }

  // LLM voter with the published per-agent ballots scripted behind a
  // synthetic backend: 4 of 6 agents pick Llama-70b independently, all 6
  // together pick it cross-informed.
  {
    const std::map<std::string, std::string> published_votes = {
        {"gemma-2", "Llama-70b"}, {"mistral-7b", "Llama-70b"}, {"gpt-3.5", "Llama-70b"},
        {"gpt-4o", "Llama-70b"},  {"llama-8b", "Llama-8b"},    {"llama-70b", "Llama-8b"},
    };
    testsup::TempDir dir("accept-vote");
    Gateway gateway(dir.path());
    gateway.register_synthetic("published-voter", [&](const ChatRequest& request) {
      const std::string& user = request.messages.back().content;
      const std::string marker = "Evaluation agent: ";
      std::size_t count = 0;
      for (std::size_t pos = user.find(marker); pos != std::string::npos;
           pos = user.find(marker, pos + 1)) {
        ++count;
      }
      if (count != 1) return std::string("Llama-70b");  // combined tables
      const auto start = user.find(marker) + marker.size();
      const auto agent = user.substr(start, user.find('\n', start) - start);
      return published_votes.at(agent);
    });
    LlmVoter voter(gateway, "published-voter", "ranker");

    const auto result = vote_independent(tables, voter);
    ACCEPT(result.winner == "Llama-70b");
    ACCEPT(!result.tie_broken);
    ACCEPT(result.tally.at("Llama-70b") == 4);
    ACCEPT(result.tally.at("Llama-8b") == 2);
    ACCEPT(result.ballots.size() == 6);
    for (const auto& ballot : result.ballots) {
      ACCEPT(ballot.choice == published_votes.at(ballot.source_table));
      ACCEPT(ballot.voter_kind == VoterKind::kLlm);
    }

    const auto cross = vote_cross_informed(tables, voter);
    ACCEPT(cross.winner == "Llama-70b");
    ACCEPT(cross.tally.size() == 1);
  }

  print_criterion(1, "independent and cross-informed voting replication", ok);
}

TEST_CASE("criterion 2: published-table metric round-trip") {
  bool ok = true;
  const auto tables = reference_tables();

  double max_rel_err = 0.0;
  std::int64_t max_count_err = 0;
  double min_mean = 1e18;
  double max_mean = 0.0;
  for (const auto& table : tables) {
    const auto implied = implied_n_avg(table);
    ACCEPT(implied.has_value());
    if (!implied) continue;
    min_mean = std::min(min_mean, implied->mean);
    max_mean = std::max(max_mean, implied->mean);
    for (const auto& row : table.rows) {
      if (row.num_correct <= 0 || row.recall_proxy <= 0.0) continue;
      const double reconstructed = static_cast<double>(row.num_correct) / implied->mean;
      max_rel_err = std::max(max_rel_err,
                             std::fabs(reconstructed - row.recall_proxy) / row.recall_proxy);
      const auto count = static_cast<std::int64_t>(std::llround(row.recall_proxy * implied->mean));
      max_count_err = std::max<std::int64_t>(max_count_err, std::llabs(count - row.num_correct));
    }
  }
  ACCEPT(max_rel_err <= kRoundTripRelTol);
  ACCEPT(max_count_err <= kRoundTripCountTol);
  // The per-table means split into two clusters; the tables genuinely
  // disagree about the shared prediction mean.
  ACCEPT(min_mean >= kImpliedLowMin);
  ACCEPT(min_mean <= kImpliedLowMax);
  ACCEPT(max_mean >= kImpliedHighMin);
  ACCEPT(max_mean <= kImpliedHighMax);

  const auto report = consolidated_report(tables, {}, std::nullopt, 0);
  ACCEPT(report.find("Observed ambiguity") != std::string::npos);
  ACCEPT(report.find("1643.") != std::string::npos);
  ACCEPT(report.find("1657.") != std::string::npos);

  print_criterion(2, "published-table metric round-trip", ok);
}

namespace {

// Maximum bipartite matching (augmenting paths) as an independent oracle for
// the greedy matcher.
int max_matching(const std::vector<Prediction>& preds, const std::vector<GoldEntity>& golds,
                 const Normalizer& normalizer) {
  std::vector<std::vector<int>> adj(preds.size());
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < golds.size(); ++g) {
      if (normalizer.equivalent({preds[p].category, preds[p].surface},
                                {golds[g].category, golds[g].surface})) {
        adj[p].push_back(static_cast<int>(g));
      }
    }
  }
  std::vector<int> owner(golds.size(), -1);
  std::function<bool(int, std::vector<bool>&)> augment = [&](int p, std::vector<bool>& seen) {
    for (const int g : adj[p]) {
      if (seen[g]) continue;
      seen[g] = true;
      if (owner[g] < 0 || augment(owner[g], seen)) {
        owner[g] = p;
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (std::size_t p = 0; p < preds.size(); ++p) {
    std::vector<bool> seen(golds.size(), false);
    if (augment(static_cast<int>(p), seen)) ++matched;
  }
  return matched;
}

struct VariantClass {
  const char* tag;
  std::vector<const char*> variants;
};

const std::vector<VariantClass>& variant_classes() {
  static const std::vector<VariantClass> classes = {
      {"PERSON", {"Dr. John Smith", "John Smith", "JOHN SMITH", "Mr. John Smith"}},
      {"PERSON", {"Maria Garcia", "Ms. Maria Garcia", "maria  garcia"}},
      {"PERSON", {"Emily Brown"}},
      {"DATE_TIME", {"03/15/2024", "2024-03-15", "March 15, 2024"}},
      {"DATE_TIME", {"07/04/2021", "July 4, 2021"}},
      {"DATE_TIME", {"January 7, 2023 at 14:30", "2023-01-07 14:30"}},
      {"AGE", {"72", "72 years old"}},
      {"AGE", {"9", "9 year old"}},
      {"ID", {"884-22-19x"}},
      {"LOCATION", {"Springfield", "springfield,"}},
      {"ORGANIZATION", {"Mercy General Hospital", "mercy general hospital."}},
      {"CONTACT", {"(555) 012-3344"}},
  };
  return classes;
}

}  // namespace

TEST_CASE("criterion 3: greedy matching optimality") {
  bool ok = true;
  const Normalizer normalizer;
  const auto& classes = variant_classes();

  int agreements = 0;
  std::uint64_t state = 0xC0FFEE;
  for (int trial = 0; trial < kMatchTrials; ++trial) {
    const auto pick = [&](std::vector<Prediction>& preds, std::vector<GoldEntity>& golds) {
      const std::size_t n_pred = splitmix64(state) % 9;
      const std::size_t n_gold = splitmix64(state) % 9;
      for (std::size_t i = 0; i < n_pred; ++i) {
        const auto& cls = classes[splitmix64(state) % classes.size()];
        preds.push_back({*PhiCategory::parse(cls.tag),
                         cls.variants[splitmix64(state) % cls.variants.size()]});
      }
      for (std::size_t i = 0; i < n_gold; ++i) {
        const auto& cls = classes[splitmix64(state) % classes.size()];
        golds.push_back({"n", *PhiCategory::parse(cls.tag),
                         cls.variants[splitmix64(state) % cls.variants.size()]});
      }
    };
    std::vector<Prediction> preds;
    std::vector<GoldEntity> golds;
    pick(preds, golds);

    const auto greedy = match(preds, golds, normalizer);
    const int optimal = max_matching(preds, golds, normalizer);
    ACCEPT(greedy.true_positives <= optimal);  // greedy can never beat the optimum
    ACCEPT(greedy.true_positives + greedy.false_positives ==
           static_cast<std::int64_t>(preds.size()));
    ACCEPT(greedy.true_positives + greedy.false_negatives ==
           static_cast<std::int64_t>(golds.size()));
    if (greedy.true_positives == optimal) ++agreements;
  }
  const double rate = static_cast<double>(agreements) / kMatchTrials;
  ACCEPT(rate >= kGreedyMatchMinRate);

  print_criterion(3, "greedy matching optimality", ok);
}

TEST_CASE("criterion 4: surface normalization equivalence") {
  bool ok = true;
  const Normalizer normalizer;
  const auto eq = [&](const char* tag_a, const char* sa, const char* tag_b, const char* sb) {
    return normalizer.equivalent({*PhiCategory::parse(tag_a), sa},
                                 {*PhiCategory::parse(tag_b), sb});
  };

  ACCEPT(eq("PERSON", "Dr. John Smith", "PERSON", "John Smith"));
  ACCEPT(eq("PERSON", "MS. MARIA GARCIA", "PERSON", "maria   garcia"));
  ACCEPT(eq("DATE_TIME", "03/15/2024", "DATE_TIME", "March 15, 2024"));
  ACCEPT(eq("DATE_TIME", "03/15/2024", "DATE_TIME", "2024-03-15"));
  ACCEPT(eq("DATE_TIME", "January 7, 2023 at 14:30", "DATE_TIME", "2023-01-07 14:30"));
  ACCEPT(eq("AGE", "72 years old", "AGE", "72"));
  ACCEPT(eq("ORGANIZATION", "Mercy General Hospital.", "ORGANIZATION",
            "mercy general hospital"));
  ACCEPT(eq("CONTACT", "  (555) 012-3344 ", "CONTACT", "(555) 012-3344"));
  ACCEPT(!eq("PERSON", "John Smith", "PERSON", "Jane Smith"));
  ACCEPT(!eq("DATE_TIME", "03/15/2024", "DATE_TIME", "03/16/2024"));
  ACCEPT(!eq("PERSON", "Springfield", "LOCATION", "Springfield"));

  // Idempotence and the equivalence-relation laws over generated surfaces.
  const std::vector<std::string> fragments = {
      "john",  "Dr.", "Smith",   "03/15/2024", "clinic", "(555)", "72",     "years",
      "old",   "St.", "Mercy",   "general",    "-",      "..",    "MRN:",   "884-22",
      "March", "15,", "2024",    "at",         "14:30",  "Ms.",   "GARCIA", "x",
  };
  const auto& categories = PhiCategory::closed_set();
  std::uint64_t state = 20240315;
  std::vector<CanonicalForm> forms;
  int produced = 0;
  for (int i = 0; i < kIdentityTrials; ++i) {
    std::string surface;
    const std::size_t parts = 1 + splitmix64(state) % 5;
    for (std::size_t p = 0; p < parts; ++p) {
      if (p) surface += (splitmix64(state) % 4 == 0) ? "  " : " ";
      surface += fragments[splitmix64(state) % fragments.size()];
    }
    const auto& category = categories[splitmix64(state) % categories.size()];
    CanonicalForm once;
    try {
      once = normalizer.canonicalize(category, surface);
    } catch (const EmptySurfaceError&) {
      continue;  // surface trimmed to nothing; fine
    }
    ++produced;
    const auto twice = normalizer.canonicalize(once.category, once.canonical_text);
    if (!(twice == once)) {
      ACCEPT(false);
      MESSAGE("not idempotent: " << surface << " -> " << once.canonical_text << " -> "
                                 << twice.canonical_text);
      break;
    }
    ACCEPT(normalizer.equivalent({category, surface}, {category, surface}));
    forms.push_back(once);
  }
  ACCEPT(produced > kIdentityTrials / 2);

  // Symmetry and transitivity on sampled pairs/triples of survivors.
  for (int i = 0; i < 2000 && forms.size() >= 3; ++i) {
    const auto& a = forms[splitmix64(state) % forms.size()];
    const auto& b = forms[splitmix64(state) % forms.size()];
    const auto& c = forms[splitmix64(state) % forms.size()];
    const auto equiv = [&](const CanonicalForm& x, const CanonicalForm& y) {
      return normalizer.equivalent({x.category, x.canonical_text},
                                   {y.category, y.canonical_text});
    };
    if (equiv(a, b) != equiv(b, a)) {
      ACCEPT(false);
      break;
    }
    if (equiv(a, b) && equiv(b, c) && !equiv(a, c)) {
      ACCEPT(false);
      break;
    }
  }

  print_criterion(4, "surface normalization equivalence", ok);
}

TEST_CASE("criterion 5: metric formula identities") {
  bool ok = true;
  std::uint64_t state = 99;

  // pseudo-F1 against its closed form, plus symmetry and range.
  for (int i = 0; i < kIdentityTrials; ++i) {
    const double p = static_cast<double>(splitmix64(state) % 10001) / 10000.0;
    const double r = static_cast<double>(splitmix64(state) % 12501) / 10000.0;
    const double value = pseudo_f1(p, r);
    const double expected = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    if (std::fabs(value - expected) > kIdentityTol || value < 0.0 ||
        std::fabs(value - pseudo_f1(r, p)) > kIdentityTol) {
      ACCEPT(false);
      break;
    }
  }

  // precision / n_avg / recall_proxy / coverage on random integer counts.
  for (int i = 0; i < kIdentityTrials; ++i) {
    const std::int64_t predictions = 1 + static_cast<std::int64_t>(splitmix64(state) % 2000);
    const std::int64_t correct = static_cast<std::int64_t>(splitmix64(state) % (predictions + 1));
    const double p = precision(correct, predictions);
    if (std::fabs(p - static_cast<double>(correct) / predictions) > kIdentityTol || p < 0.0 ||
        p > 1.0) {
      ACCEPT(false);
      break;
    }
    std::map<std::string, std::int64_t> totals;
    std::int64_t sum = 0;
    const std::size_t models = 1 + splitmix64(state) % 6;
    for (std::size_t m = 0; m < models; ++m) {
      const auto count = static_cast<std::int64_t>(splitmix64(state) % 3000 + 1);
      totals["m" + std::to_string(m)] = count;
      sum += count;
    }
    const double mean = n_avg(totals);
    if (std::fabs(mean - static_cast<double>(sum) / models) > 1e-9) {
      ACCEPT(false);
      break;
    }
    const double rp = recall_proxy(correct, mean);
    if (std::fabs(rp - static_cast<double>(correct) / mean) > kIdentityTol) {
      ACCEPT(false);
      break;
    }
  }

  // Supervised PRF identities via real scoring runs built from target counts.
  const Normalizer normalizer;
  for (int i = 0; i < 120; ++i) {
    const auto tp = static_cast<int>(splitmix64(state) % 6);
    const auto fp = static_cast<int>(splitmix64(state) % 6);
    const auto fn = static_cast<int>(splitmix64(state) % 6);

    std::vector<Note> notes;
    notes.emplace_back("n", "x");
    std::vector<GoldEntity> golds;
    for (int g = 0; g < tp + fn; ++g) {
      golds.push_back({"n", *PhiCategory::parse("PERSON"), "gold" + std::to_string(g)});
    }
    std::map<std::string, PredictionSet> run;
    PredictionSet pset;
    pset.model_id = "m";
    pset.note_id = "n";
    for (int t = 0; t < tp; ++t) {
      pset.predictions.push_back({*PhiCategory::parse("PERSON"), "gold" + std::to_string(t)});
    }
    for (int f = 0; f < fp; ++f) {
      pset.predictions.push_back({*PhiCategory::parse("PERSON"), "fake" + std::to_string(f)});
    }
    run.emplace("n", std::move(pset));
    const Corpus corpus(std::move(notes), std::move(golds), PhiCategory::closed_set());

    const auto result = score(corpus, run, normalizer);
    if (result.counts.tp != tp || result.counts.fp != fp || result.counts.fn != fn) {
      ACCEPT(false);
      break;
    }
    const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    if (std::fabs(result.overall.precision - p) > kIdentityTol ||
        std::fabs(result.overall.recall - r) > kIdentityTol ||
        std::fabs(result.overall.f1 - f1) > kIdentityTol || result.overall.f1 < 0.0 ||
        result.overall.f1 > 1.0) {
      ACCEPT(false);
      break;
    }
  }

  print_criterion(5, "metric formula identities", ok);
}

TEST_CASE("criterion 6: deterministic pipeline and cache reuse") {
  bool ok = true;
  ACCEPT(!testsup::cli_binary().empty());

  testsup::TempDir scratch("accept-cli");
  const auto demo = testsup::fixtures_root() / "demo";
  const fs::path copies[2] = {scratch / "a", scratch / "b"};
  if (!testsup::cli_binary().empty()) {
    for (const auto& copy : copies) {
      fs::create_directories(copy);
      fs::copy(demo, copy, fs::copy_options::recursive);
      fs::remove_all(copy / "generated");
      const auto config = (copy / "config.json").string();

      const auto gen = run_cli("gen-fixtures --config \"" + config + "\"", scratch.path());
      ACCEPT(gen.exit_code == 0);
      const auto all = run_cli("run-all --config \"" + config + "\"", scratch.path());
      ACCEPT(all.exit_code == 0);
      ACCEPT(all.output.find("[report]") != std::string::npos);
    }

    // Identical bytes everywhere: fixtures, cache, and every output artifact.
    const auto tree_a = tree_bytes(copies[0] / "generated");
    const auto tree_b = tree_bytes(copies[1] / "generated");
    ACCEPT(!tree_a.empty());
    ACCEPT(tree_a.size() == tree_b.size());
    ACCEPT(tree_a == tree_b);
    ACCEPT(tree_a.count("out/report.md") == 1);
    ACCEPT(tree_a.count("out/votes/independent.json") == 1);
    ACCEPT(tree_a.count("out/votes/cross_informed.json") == 1);
    ACCEPT(tree_a.count("out/goldeval/report.json") == 1);

    // A warm rerun answers everything from the response cache.
    const auto config_a = (copies[0] / "config.json").string();
    const auto warm = run_cli("run-all --config \"" + config_a + "\"", scratch.path());
    ACCEPT(warm.exit_code == 0);
    ACCEPT(warm.output.find("[deid] backend_calls=0") != std::string::npos);
    ACCEPT(warm.output.find("[judge] backend_calls=0") != std::string::npos);
    ACCEPT(warm.output.find("[vote] backend_calls=0") != std::string::npos);
    ACCEPT(tree_bytes(copies[0] / "generated") == tree_b);
  }

  print_criterion(6, "deterministic pipeline and cache reuse", ok);
}

TEST_CASE("criterion 7: completion parsing robustness") {
  bool ok = true;
  const auto doc =
      json::parse(testsup::read_file(testsup::fixtures_root() / "parse_cases.json"));
  const auto report = testsup::replay_parse_cases(doc);
  ACCEPT(report.total == kExpectedParseCases);
  for (const auto& mismatch : report.mismatches) {
    FAIL_CHECK(mismatch);
    ok = false;
  }
  ACCEPT(report.mismatches.empty());

  print_criterion(7, "completion parsing robustness", ok);
}

TEST_CASE("criterion 8: bootstrap uncertainty estimates") {
  bool ok = true;
  std::vector<Note> notes;
  notes.emplace_back("na", "x");
  notes.emplace_back("nb", "x");
  std::vector<GoldEntity> golds = {
      {"na", *PhiCategory::parse("PERSON"), "Alice Moore"},
      {"nb", *PhiCategory::parse("PERSON"), "Bob Lin"},
  };
  const Corpus corpus(std::move(notes), std::move(golds), PhiCategory::closed_set());
  std::map<std::string, PredictionSet> run;
  PredictionSet hit;
  hit.model_id = "m";
  hit.note_id = "na";
  hit.predictions = {{*PhiCategory::parse("PERSON"), "Alice Moore"}};
  PredictionSet miss;
  miss.model_id = "m";
  miss.note_id = "nb";
  miss.predictions = {{*PhiCategory::parse("PERSON"), "Nobody Real"}};
  run.emplace("na", std::move(hit));
  run.emplace("nb", std::move(miss));

  const Normalizer normalizer;
  const auto first = bootstrap_std(corpus, run, normalizer, kBootstrapResamples, 20240315);
  const auto second = bootstrap_std(corpus, run, normalizer, kBootstrapResamples, 20240315);
  const auto other = bootstrap_std(corpus, run, normalizer, kBootstrapResamples, 7);

  // Point estimates: both notes pooled give P = R = F1 = 1/2.
  ACCEPT(first.overall.precision == 0.5);
  ACCEPT(first.overall.recall == 0.5);
  ACCEPT(first.overall.f1 == 0.5);

  // Bitwise determinism for a fixed seed; a different seed moves the value.
  ACCEPT(first.overall.std_f1 == second.overall.std_f1);
  ACCEPT(first.overall.std_precision == second.overall.std_precision);
  ACCEPT(first.overall.std_recall == second.overall.std_recall);
  ACCEPT(first.overall.std_f1 != other.overall.std_f1);

  ACCEPT(std::fabs(first.overall.std_f1 - kBootstrapStdExpected) <= kBootstrapStdTol);
  ACCEPT(std::fabs(first.overall.std_precision - kBootstrapStdExpected) <= kBootstrapStdTol);
  ACCEPT(std::fabs(first.overall.std_recall - kBootstrapStdExpected) <= kBootstrapStdTol);

  print_criterion(8, "bootstrap uncertainty estimates", ok);
}
