#include "deideval/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include <json.hpp>

#include "deideval/artifacts.hpp"
#include "deideval/errors.hpp"
#include "deideval/extraction.hpp"
#include "deideval/fixture_synth.hpp"
#include "deideval/goldeval.hpp"
#include "deideval/judge.hpp"
#include "deideval/report.hpp"
#include "deideval/voting.hpp"

namespace deideval {

namespace {

using nlohmann::json;

const char* mode_name(VoteMode mode) {
  return mode == VoteMode::kIndependent ? "independent" : "cross_informed";
}

double ratio(std::size_t num, std::size_t denom) {
  return denom == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(denom);
}

}  // namespace

Pipeline::Pipeline(RunConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options)),
      normalizer_(config_.normalizer) {
  if (options_.seed) config_.seed = *options_.seed;
}

Pipeline::~Pipeline() = default;

const Corpus& Pipeline::corpus() {
  if (!corpus_) corpus_ = load_corpus(config_.corpus_path);
  return *corpus_;
}

Gateway& Pipeline::gateway() {
  if (!gateway_) gateway_ = std::make_unique<Gateway>(config_.cache_dir, options_.offline);
  return *gateway_;
}

void Pipeline::ensure_backend(const std::string& backend_id) {
  if (gateway().has_backend(backend_id)) return;
  const BackendConfig* backend = config_.find_backend(backend_id);
  if (!backend) throw UnknownBackendError(backend_id);
  if (options_.offline && backend->kind == BackendConfig::Kind::kHttp) {
    throw ConfigError("offline mode forbids http backend " + backend_id);
  }
  gateway().register_backend(*backend);
}

int Pipeline::worker_count(const std::string& backend_id) const {
  const BackendConfig* backend = config_.find_backend(backend_id);
  return backend ? backend->max_in_flight : 1;
}

std::filesystem::path Pipeline::prediction_path(const std::string& model_id) const {
  return config_.output_dir / "predictions" / (sanitize_id(model_id) + ".jsonl");
}

std::filesystem::path Pipeline::verdict_path(const std::string& agent_id,
                                             const std::string& model_id) const {
  return config_.output_dir / "verdicts" /
         (sanitize_id(agent_id) + "__" + sanitize_id(model_id) + ".jsonl");
}

std::filesystem::path Pipeline::table_path(const std::string& agent_id,
                                           const char* extension) const {
  return config_.output_dir / "tables" / (sanitize_id(agent_id) + extension);
}

std::filesystem::path Pipeline::vote_path(VoteMode mode) const {
  return config_.output_dir / "votes" / (std::string(mode_name(mode)) + ".json");
}

std::filesystem::path Pipeline::gold_report_path(const char* extension) const {
  return config_.output_dir / "goldeval" / (std::string("report") + extension);
}

std::map<std::string, DeidRun> Pipeline::load_runs() const {
  std::map<std::string, DeidRun> runs;
  for (const auto& binding : config_.deid_models) {
    runs[binding.id] = load_prediction_run(prediction_path(binding.id));
  }
  return runs;
}

std::vector<SummaryTable> Pipeline::load_tables() const {
  const std::filesystem::path dir =
      options_.tables_dir ? *options_.tables_dir : config_.output_dir / "tables";
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) {
    throw MissingFileError(dir.string());
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no summary tables found under " + dir.string());

  std::vector<SummaryTable> tables;
  for (const auto& file : files) {
    try {
      tables.push_back(table_from_json(json::parse(read_text_file(file))));
    } catch (const json::exception& e) {
      throw Error(file.string() + ": " + e.what());
    }
  }
  // Agent order must not depend on how ids map to file names.
  std::sort(tables.begin(), tables.end(),
            [](const SummaryTable& a, const SummaryTable& b) { return a.agent_id < b.agent_id; });
  return tables;
}

void Pipeline::print_gateway_delta(const char* stage) {
  const GatewayStats now = gateway().stats();
  std::printf("[%s] backend_calls=%lld cache_hits=%lld attempts=%lld max_in_flight=%d\n", stage,
              static_cast<long long>(now.backend_calls - last_stats_.backend_calls),
              static_cast<long long>(now.cache_hits - last_stats_.cache_hits),
              static_cast<long long>(now.http_attempts - last_stats_.http_attempts),
              now.max_in_flight_observed);
  last_stats_ = now;
}

int Pipeline::run_deid_stage() {
  if (options_.resume) {
    const bool complete = std::all_of(
        config_.deid_models.begin(), config_.deid_models.end(),
        [this](const ModelBinding& b) { return std::filesystem::exists(prediction_path(b.id)); });
    if (complete) {
      std::printf("[deid] resume: all prediction runs present, skipping\n");
      return 0;
    }
  }

  const Corpus& notes = corpus();
  bool over_threshold = false;
  for (const auto& binding : config_.deid_models) {
    ensure_backend(binding.backend_id);
    const DeidRun run =
        run_deid(binding.id, binding.backend_id, notes, gateway(), normalizer_,
                 config_.active_categories, worker_count(binding.backend_id));
    save_prediction_run(prediction_path(binding.id), run);

    const double failure_ratio = ratio(run.failed_notes.size(), notes.notes().size());
    std::printf("[deid] model=%s notes=%zu predictions=%lld failed=%zu\n", binding.id.c_str(),
                notes.notes().size(), static_cast<long long>(run.total_predictions),
                run.failed_notes.size());
    if (failure_ratio > config_.failure_threshold) {
      std::fprintf(stderr, "[deid] model %s failed on %.0f%% of notes (threshold %.0f%%)\n",
                   binding.id.c_str(), failure_ratio * 100.0,
                   config_.failure_threshold * 100.0);
      over_threshold = true;
    } else if (!run.failed_notes.empty()) {
      std::fprintf(stderr, "[deid] warning: model %s failed on %zu note(s)\n",
                   binding.id.c_str(), run.failed_notes.size());
    }
  }
  print_gateway_delta("deid");
  return over_threshold ? 1 : 0;
}

int Pipeline::run_judge_stage() {
  if (options_.resume) {
    bool complete = true;
    for (const auto& agent : config_.judge_agents) {
      for (const auto& model : config_.deid_models) {
        complete = complete && std::filesystem::exists(verdict_path(agent.id, model.id));
      }
    }
    if (complete) {
      std::printf("[judge] resume: all verdict files present, skipping\n");
      return 0;
    }
  }

  const Corpus& notes = corpus();
  const auto runs = load_runs();
  bool over_threshold = false;
  for (const auto& agent : config_.judge_agents) {
    ensure_backend(agent.backend_id);
    const std::vector<Verdict> verdicts =
        run_judge(agent.id, agent.backend_id, runs, notes, gateway(), normalizer_,
                  worker_count(agent.backend_id));

    std::size_t clamped = 0;
    std::size_t failed = 0;
    std::map<std::string, std::vector<Verdict>> by_model;
    for (const auto& v : verdicts) {
      clamped += v.clamped ? 1 : 0;
      failed += v.failed ? 1 : 0;
      by_model[v.model_id].push_back(v);
    }
    for (const auto& [model_id, model_verdicts] : by_model) {
      save_verdicts(verdict_path(agent.id, model_id), model_verdicts);
    }

    const double failure_ratio = ratio(failed, verdicts.size());
    std::printf("[judge] agent=%s verdicts=%zu clamped=%zu failed=%zu\n", agent.id.c_str(),
                verdicts.size(), clamped, failed);
    if (failure_ratio > config_.failure_threshold) {
      std::fprintf(stderr, "[judge] agent %s failed on %.0f%% of items (threshold %.0f%%)\n",
                   agent.id.c_str(), failure_ratio * 100.0, config_.failure_threshold * 100.0);
      over_threshold = true;
    } else if (failed > 0) {
      std::fprintf(stderr, "[judge] warning: agent %s failed on %zu item(s)\n",
                   agent.id.c_str(), failed);
    }
  }
  print_gateway_delta("judge");
  return over_threshold ? 1 : 0;
}

int Pipeline::run_summarize_stage() {
  if (options_.resume) {
    const bool complete = std::all_of(
        config_.judge_agents.begin(), config_.judge_agents.end(), [this](const ModelBinding& a) {
          return std::filesystem::exists(table_path(a.id, ".json"));
        });
    if (complete) {
      std::printf("[summarize] resume: all tables present, skipping\n");
      return 0;
    }
  }

  const Corpus& notes = corpus();
  const auto runs = load_runs();
  for (const auto& agent : config_.judge_agents) {
    std::vector<Verdict> verdicts;
    for (const auto& model : config_.deid_models) {
      auto model_verdicts = load_verdicts(verdict_path(agent.id, model.id));
      verdicts.insert(verdicts.end(), std::make_move_iterator(model_verdicts.begin()),
                      std::make_move_iterator(model_verdicts.end()));
    }
    const SummaryTable table =
        build_summary_table(agent.id, verdicts, runs, notes, normalizer_);
    write_text_file(table_path(agent.id, ".json"), table_to_json(table).dump(2) + "\n");
    write_text_file(table_path(agent.id, ".csv"), table_to_csv(table));
    write_text_file(table_path(agent.id, ".md"), table_to_markdown(table));

    std::printf("[summarize] agent=%s models=%zu n_avg=%.1f\n", agent.id.c_str(),
                table.rows.size(), table.n_avg);
  }
  return 0;
}

int Pipeline::run_vote_stage() {
  if (options_.resume) {
    const bool complete =
        std::all_of(config_.voting.modes.begin(), config_.voting.modes.end(),
                    [this](VoteMode mode) { return std::filesystem::exists(vote_path(mode)); });
    if (complete) {
      std::printf("[vote] resume: all vote records present, skipping\n");
      return 0;
    }
  }

  const std::vector<SummaryTable> tables = load_tables();
  std::unique_ptr<Voter> voter;
  if (config_.voting.voter_kind == VoterKind::kLlm) {
    ensure_backend(config_.voting.voting_backend);
    voter = std::make_unique<LlmVoter>(gateway(), config_.voting.voting_backend,
                                       config_.voting.voting_model);
  } else {
    voter = std::make_unique<DeterministicVoter>();
  }

  for (const VoteMode mode : config_.voting.modes) {
    const VoteResult result = mode == VoteMode::kIndependent
                                  ? vote_independent(tables, *voter)
                                  : vote_cross_informed(tables, *voter);
    write_text_file(vote_path(mode),
                    vote_result_to_json(result, config_.voting.voting_model).dump(2) + "\n");

    std::string tally;
    for (const auto& [model_id, count] : result.tally) {
      tally += " " + model_id + "=" + std::to_string(count);
    }
    std::printf("[vote] mode=%s winner=%s%s tie_broken=%s\n", mode_name(mode),
                result.winner.c_str(), tally.c_str(), result.tie_broken ? "true" : "false");
  }
  if (config_.voting.voter_kind == VoterKind::kLlm) print_gateway_delta("vote");
  return 0;
}

int Pipeline::run_score_gt_stage() {
  if (options_.resume && std::filesystem::exists(gold_report_path(".json"))) {
    std::printf("[score-gt] resume: gold report present, skipping\n");
    return 0;
  }

  const Corpus& notes = corpus();
  if (!notes.has_gold()) throw NoGoldAnnotationsError();

  GoldScores scores;
  for (const auto& [model_id, run] : load_runs()) {
    scores.emplace_back(model_id,
                        bootstrap_std(notes, run.by_note, normalizer_,
                                      config_.bootstrap_resamples, config_.seed));
    const GoldScore& s = scores.back().second;
    std::printf("[score-gt] model=%s precision=%.4f recall=%.4f f1=%.4f\n", model_id.c_str(),
                s.overall.precision, s.overall.recall, s.overall.f1);
  }

  const json doc = gold_report_to_json(scores, config_.bootstrap_resamples, config_.seed);
  write_text_file(gold_report_path(".json"), doc.dump(2) + "\n");
  write_text_file(gold_report_path(".md"),
                  gold_report_to_markdown(scores, config_.bootstrap_resamples));
  write_text_file(gold_report_path(".csv"), gold_report_to_csv(scores));
  return 0;
}

int Pipeline::run_report_stage() {
  const std::vector<SummaryTable> tables = load_tables();

  std::vector<json> vote_records;
  for (const VoteMode mode : config_.voting.modes) {
    const auto path = vote_path(mode);
    if (std::filesystem::exists(path)) {
      vote_records.push_back(json::parse(read_text_file(path)));
    }
  }

  std::optional<json> gold_report;
  if (std::filesystem::exists(gold_report_path(".json"))) {
    gold_report = json::parse(read_text_file(gold_report_path(".json")));
  }

  const std::string report = consolidated_report(tables, vote_records, gold_report,
                                                 config_.bootstrap_resamples);
  const auto path = config_.output_dir / "report.md";
  write_text_file(path, report);
  std::printf("[report] wrote %s\n", path.string().c_str());
  return 0;
}

int Pipeline::run_all() {
  struct Stage {
    const char* name;
    int (Pipeline::*fn)();
    bool enabled;
  };
  const Stage stages[] = {
      {"deid", &Pipeline::run_deid_stage, true},
      {"judge", &Pipeline::run_judge_stage, true},
      {"summarize", &Pipeline::run_summarize_stage, true},
      {"vote", &Pipeline::run_vote_stage, true},
      {"score-gt", &Pipeline::run_score_gt_stage, corpus().has_gold()},
      {"report", &Pipeline::run_report_stage, true},
  };
  for (const Stage& stage : stages) {
    if (!stage.enabled) continue;
    int code = 0;
    try {
      code = (this->*stage.fn)();
    } catch (const Error& e) {
      std::fprintf(stderr, "[%s] failed: %s\n", stage.name, e.what());
      return 1;
    }
    if (code != 0) {
      std::fprintf(stderr, "[%s] stage failed\n", stage.name);
      return code;
    }
  }
  return 0;
}

int Pipeline::generate_fixtures() {
  const Corpus& notes = corpus();

  std::vector<std::string> model_ids;
  for (const auto& binding : config_.deid_models) model_ids.push_back(binding.id);
  std::vector<std::string> agent_ids;
  for (const auto& binding : config_.judge_agents) agent_ids.push_back(binding.id);
  const FixtureSynthesizer synth(notes, model_ids, agent_ids, normalizer_);

  // A throwaway cache keeps recording runs from warming the real one.
  std::random_device rd;
  const auto scratch = std::filesystem::temp_directory_path() /
                       ("deideval-record-" + std::to_string(rd()));
  Gateway recorder(scratch);

  std::map<std::string, std::map<std::string, std::string>> recordings;
  std::mutex recordings_mutex;
  recorder.set_response_observer([&](const std::string& backend_id, const std::string& digest,
                                     const std::string& text) {
    std::lock_guard<std::mutex> lock(recordings_mutex);
    recordings[backend_id][digest] = text;
  });
  for (const auto& backend : config_.backends) {
    recorder.register_synthetic(
        backend.backend_id, [&synth](const ChatRequest& r) { return synth.complete(r); },
        backend.max_in_flight);
  }

  // Replay the full pipeline in memory against the synthesizer.
  std::map<std::string, DeidRun> runs;
  for (const auto& binding : config_.deid_models) {
    runs[binding.id] = run_deid(binding.id, binding.backend_id, notes, recorder, normalizer_,
                                config_.active_categories, worker_count(binding.backend_id));
  }
  std::vector<SummaryTable> tables;
  for (const auto& agent : config_.judge_agents) {
    const auto verdicts = run_judge(agent.id, agent.backend_id, runs, notes, recorder,
                                    normalizer_, worker_count(agent.backend_id));
    tables.push_back(build_summary_table(agent.id, verdicts, runs, notes, normalizer_));
  }
  std::sort(tables.begin(), tables.end(),
            [](const SummaryTable& a, const SummaryTable& b) { return a.agent_id < b.agent_id; });
  if (config_.voting.voter_kind == VoterKind::kLlm) {
    LlmVoter voter(recorder, config_.voting.voting_backend, config_.voting.voting_model);
    for (const VoteMode mode : config_.voting.modes) {
      (void)(mode == VoteMode::kIndependent ? vote_independent(tables, voter)
                                            : vote_cross_informed(tables, voter));
    }
  }

  for (const auto& backend : config_.backends) {
    if (backend.kind != BackendConfig::Kind::kScripted) continue;
    json responses = json::object();
    const auto it = recordings.find(backend.backend_id);
    std::size_t count = 0;
    if (it != recordings.end()) {
      for (const auto& [digest, text] : it->second) {
        responses[digest] = text;
        ++count;
      }
    }
    write_text_file(backend.fixture_path,
                    json{{"responses", std::move(responses)}}.dump(2) + "\n");
    std::printf("[gen-fixtures] backend=%s responses=%zu -> %s\n", backend.backend_id.c_str(),
                count, backend.fixture_path.string().c_str());
  }

  std::error_code ec;
  std::filesystem::remove_all(scratch, ec);
  return 0;
}

}  // namespace deideval
