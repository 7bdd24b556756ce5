#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "deideval/config.hpp"
#include "deideval/corpus.hpp"
#include "deideval/gateway.hpp"
#include "deideval/metrics.hpp"

namespace deideval {

struct PipelineOptions {
  bool resume = false;   // skip stages whose outputs already exist
  bool offline = false;  // forbid http backends
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> tables_dir;  // vote on foreign tables
};

// Stage orchestration. Every stage reads its inputs from disk and persists
// its outputs, so runs can resume after interruption and intermediate
// judgments stay auditable. Hard failures throw; soft policy failures
// (per-item failure ratio above the threshold) return a nonzero exit code.
class Pipeline {
 public:
  Pipeline(RunConfig config, PipelineOptions options);
  ~Pipeline();

  int run_deid_stage();
  int run_judge_stage();
  int run_summarize_stage();
  int run_vote_stage();
  int run_score_gt_stage();
  int run_report_stage();
  int run_all();

  // Replaces every backend with a deterministic synthesizer, replays the
  // whole pipeline in memory, and writes the recorded (digest → completion)
  // maps to each scripted backend's fixture path.
  int generate_fixtures();

  const RunConfig& config() const { return config_; }

 private:
  const Corpus& corpus();
  Gateway& gateway();
  void ensure_backend(const std::string& backend_id);
  int worker_count(const std::string& backend_id) const;

  std::filesystem::path prediction_path(const std::string& model_id) const;
  std::filesystem::path verdict_path(const std::string& agent_id,
                                     const std::string& model_id) const;
  std::filesystem::path table_path(const std::string& agent_id, const char* extension) const;
  std::filesystem::path vote_path(VoteMode mode) const;
  std::filesystem::path gold_report_path(const char* extension) const;

  std::map<std::string, DeidRun> load_runs() const;
  std::vector<SummaryTable> load_tables() const;
  void print_gateway_delta(const char* stage);

  RunConfig config_;
  PipelineOptions options_;
  Normalizer normalizer_;
  std::optional<Corpus> corpus_;
  std::unique_ptr<Gateway> gateway_;
  GatewayStats last_stats_;
};

}  // namespace deideval
