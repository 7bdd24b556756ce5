#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "deideval/config.hpp"
#include "deideval/errors.hpp"
#include "deideval/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Rank clinical de-identification models with LLM evaluation agents"};
  app.require_subcommand(1);

  std::string config_path;
  deideval::PipelineOptions options;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_flag("--resume", options.resume, "Skip stages whose outputs already exist");
    cmd->add_flag("--offline", options.offline,
                  "Refuse to register http backends; cached or scripted responses only");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&options](std::uint64_t v) { options.seed = v; },
        "Override the configured bootstrap seed");
    return cmd;
  };

  CLI::App* deid =
      add_common(app.add_subcommand("deid", "Run every de-identification model over the corpus"));
  CLI::App* judge =
      add_common(app.add_subcommand("judge", "Collect verdicts from every evaluation agent"));
  CLI::App* summarize = add_common(
      app.add_subcommand("summarize", "Build per-agent summary tables from saved verdicts"));
  CLI::App* vote =
      add_common(app.add_subcommand("vote", "Pick the best model by majority vote over tables"));
  vote->add_option_function<std::string>(
      "--tables", [&options](const std::string& dir) { options.tables_dir = dir; },
      "Vote on table JSON files from this directory instead of the run's own");
  CLI::App* score_gt = add_common(
      app.add_subcommand("score-gt", "Score prediction runs against gold annotations"));
  CLI::App* run_all = add_common(app.add_subcommand("run-all", "Run every stage in order"));
  CLI::App* report =
      add_common(app.add_subcommand("report", "Write the consolidated markdown report"));
  CLI::App* gen_fixtures = add_common(app.add_subcommand(
      "gen-fixtures", "Record deterministic response fixtures for scripted backends"));

  CLI11_PARSE(app, argc, argv);

  try {
    deideval::Pipeline pipeline(deideval::load_run_config(config_path), options);
    if (deid->parsed()) return pipeline.run_deid_stage();
    if (judge->parsed()) return pipeline.run_judge_stage();
    if (summarize->parsed()) return pipeline.run_summarize_stage();
    if (vote->parsed()) return pipeline.run_vote_stage();
    if (score_gt->parsed()) return pipeline.run_score_gt_stage();
    if (run_all->parsed()) return pipeline.run_all();
    if (report->parsed()) return pipeline.run_report_stage();
    if (gen_fixtures->parsed()) return pipeline.generate_fixtures();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
