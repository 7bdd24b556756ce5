#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "deideval/category.hpp"
#include "deideval/gateway.hpp"
#include "deideval/normalizer.hpp"
#include "deideval/voting.hpp"

namespace deideval {

struct ModelBinding {
  std::string id;          // model_id or agent_id
  std::string backend_id;
};

struct VotingConfig {
  std::vector<VoteMode> modes = {VoteMode::kIndependent, VoteMode::kCrossInformed};
  VoterKind voter_kind = VoterKind::kDeterministic;
  std::string voting_model;    // llm voter only
  std::string voting_backend;  // llm voter only
};

struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path cache_dir;
  std::filesystem::path output_dir;
  std::vector<BackendConfig> backends;
  std::vector<ModelBinding> deid_models;
  std::vector<ModelBinding> judge_agents;
  VotingConfig voting;
  std::uint64_t seed = 20240315;
  std::vector<PhiCategory> active_categories;  // defaults to the closed set
  NormalizerConfig normalizer;
  double failure_threshold = 0.2;  // per-item failure ratio that fails a stage
  int bootstrap_resamples = 1000;

  const BackendConfig* find_backend(const std::string& backend_id) const;
};

// Parses and validates a single-document JSON config. Relative paths resolve
// against the config file's directory. Throws ConfigError with a field path
// on any violation.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace deideval
