#include "deideval/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "deideval/errors.hpp"

namespace deideval {

namespace {

using nlohmann::json;

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw ConfigError(where + "." + key + " must be a non-empty string");
  }
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base / p;
}

BackendConfig parse_backend(const json& obj, const std::filesystem::path& base) {
  BackendConfig backend;
  backend.backend_id = get_string(obj, "backend_id", "backends[]");
  const std::string where = "backends[" + backend.backend_id + "]";
  const std::string kind = get_string(obj, "kind", where);
  if (kind == "http") {
    backend.kind = BackendConfig::Kind::kHttp;
    backend.base_url = get_string(obj, "base_url", where);
  } else if (kind == "scripted") {
    backend.kind = BackendConfig::Kind::kScripted;
    backend.fixture_path = resolve(base, get_string(obj, "fixture_path", where));
  } else {
    throw ConfigError(where + ".kind must be \"http\" or \"scripted\"");
  }
  if (obj.contains("api_key_env")) backend.api_key_env = obj.at("api_key_env").get<std::string>();
  backend.max_in_flight = obj.value("max_in_flight", 4);
  if (backend.max_in_flight < 1) throw ConfigError(where + ".max_in_flight must be positive");
  if (const auto it = obj.find("retry"); it != obj.end()) {
    backend.retry.max_attempts = it->value("max_attempts", backend.retry.max_attempts);
    backend.retry.base_backoff_ms = it->value("base_backoff_ms", backend.retry.base_backoff_ms);
    if (backend.retry.max_attempts < 1 || backend.retry.base_backoff_ms < 0) {
      throw ConfigError(where + ".retry values out of range");
    }
  }
  return backend;
}

std::vector<ModelBinding> parse_bindings(const json& arr, const char* id_key,
                                         const std::string& where) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError(where + " must be a non-empty array");
  }
  std::vector<ModelBinding> out;
  std::set<std::string> seen;
  for (const auto& item : arr) {
    ModelBinding binding;
    binding.id = get_string(item, id_key, where);
    binding.backend_id = get_string(item, "backend_id", where);
    if (!seen.insert(binding.id).second) {
      throw ConfigError(where + " repeats id " + binding.id);
    }
    out.push_back(std::move(binding));
  }
  return out;
}

}  // namespace

const BackendConfig* RunConfig::find_backend(const std::string& backend_id) const {
  for (const auto& b : backends) {
    if (b.backend_id == backend_id) return &b;
  }
  return nullptr;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError(path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

  const auto base = std::filesystem::absolute(path).parent_path();
  RunConfig config;
  config.corpus_path = resolve(base, get_string(doc, "corpus_path", "config"));
  config.cache_dir = resolve(base, get_string(doc, "cache_dir", "config"));
  config.output_dir = resolve(base, get_string(doc, "output_dir", "config"));
  config.seed = doc.value("seed", config.seed);
  config.failure_threshold = doc.value("failure_threshold", config.failure_threshold);
  if (config.failure_threshold < 0.0 || config.failure_threshold > 1.0) {
    throw ConfigError("failure_threshold must lie in [0, 1]");
  }
  config.bootstrap_resamples = doc.value("bootstrap_resamples", config.bootstrap_resamples);
  if (config.bootstrap_resamples < 2) throw ConfigError("bootstrap_resamples must be >= 2");

  const auto backends_it = doc.find("backends");
  if (backends_it == doc.end() || !backends_it->is_array() || backends_it->empty()) {
    throw ConfigError("backends must be a non-empty array");
  }
  std::set<std::string> backend_ids;
  for (const auto& b : *backends_it) {
    auto backend = parse_backend(b, base);
    if (!backend_ids.insert(backend.backend_id).second) {
      throw ConfigError("duplicate backend_id " + backend.backend_id);
    }
    config.backends.push_back(std::move(backend));
  }

  config.deid_models = parse_bindings(doc.at("deid_models"), "model_id", "deid_models");
  config.judge_agents = parse_bindings(doc.at("judge_agents"), "agent_id", "judge_agents");
  for (const auto& binding : config.deid_models) {
    if (!backend_ids.count(binding.backend_id)) {
      throw ConfigError("deid model " + binding.id + " references unknown backend " +
                        binding.backend_id);
    }
  }
  for (const auto& binding : config.judge_agents) {
    if (!backend_ids.count(binding.backend_id)) {
      throw ConfigError("judge agent " + binding.id + " references unknown backend " +
                        binding.backend_id);
    }
  }

  if (const auto it = doc.find("voting"); it != doc.end()) {
    const json& v = *it;
    if (const auto modes = v.find("modes"); modes != v.end()) {
      config.voting.modes.clear();
      for (const auto& m : *modes) {
        const std::string mode = m.get<std::string>();
        if (mode == "independent") {
          config.voting.modes.push_back(VoteMode::kIndependent);
        } else if (mode == "cross_informed") {
          config.voting.modes.push_back(VoteMode::kCrossInformed);
        } else {
          throw ConfigError("voting.modes entry must be \"independent\" or \"cross_informed\"");
        }
      }
      if (config.voting.modes.empty()) throw ConfigError("voting.modes is empty");
    }
    const std::string kind = v.value("voter_kind", "deterministic");
    if (kind == "deterministic") {
      config.voting.voter_kind = VoterKind::kDeterministic;
    } else if (kind == "llm") {
      config.voting.voter_kind = VoterKind::kLlm;
      config.voting.voting_model = get_string(v, "voting_model", "voting");
      config.voting.voting_backend = get_string(v, "voting_backend", "voting");
      if (!backend_ids.count(config.voting.voting_backend)) {
        throw ConfigError("voting.voting_backend references unknown backend " +
                          config.voting.voting_backend);
      }
    } else {
      throw ConfigError("voting.voter_kind must be \"deterministic\" or \"llm\"");
    }
  }

  if (const auto it = doc.find("active_categories"); it != doc.end()) {
    for (const auto& tag : *it) {
      const auto category = PhiCategory::parse(tag.get<std::string>());
      if (!category) {
        throw ConfigError("active_categories holds unknown tag " + tag.dump());
      }
      config.active_categories.push_back(*category);
    }
    if (config.active_categories.empty()) throw ConfigError("active_categories is empty");
  } else {
    config.active_categories = PhiCategory::closed_set();
  }

  if (const auto it = doc.find("normalizer"); it != doc.end()) {
    const json& n = *it;
    if (const auto h = n.find("honorifics"); h != n.end()) {
      config.normalizer.honorifics = h->get<std::vector<std::string>>();
    }
    config.normalizer.month_first = n.value("month_first", config.normalizer.month_first);
    config.normalizer.two_digit_year_pivot =
        n.value("two_digit_year_pivot", config.normalizer.two_digit_year_pivot);
    if (const auto s = n.find("synonyms"); s != n.end()) {
      config.normalizer.synonyms.clear();
      for (const auto& [key, value] : s->items()) {
        config.normalizer.synonyms[key] = value.get<std::string>();
      }
    }
  }
  // Validates synonym targets eagerly so a bad config fails at load time.
  (void)Normalizer(config.normalizer);

  return config;
}

}  // namespace deideval
