#include "agentcodec/serialization.hpp"

#include <fstream>
#include <sstream>

#include "agentcodec/errors.hpp"

namespace agentcodec {

using nlohmann::json;

void to_json(json& j, const AgentOutput& v) {
  j = json{{"text", v.text},
           {"model_id", v.model_id},
           {"temperature", v.temperature},
           {"prompt_tokens", v.prompt_tokens},
           {"completion_tokens", v.completion_tokens},
           {"cost_usd", v.cost_usd},
           {"latency_s", v.latency_s}};
  if (v.token_logprobs) j["token_logprobs"] = *v.token_logprobs;
  if (v.mean_logprob) j["mean_logprob"] = *v.mean_logprob;
}

void from_json(const json& j, AgentOutput& v) {
  v.text = j.value("text", "");
  v.model_id = j.value("model_id", "");
  v.temperature = j.value("temperature", 0.0);
  v.prompt_tokens = j.value("prompt_tokens", 0L);
  v.completion_tokens = j.value("completion_tokens", 0L);
  v.cost_usd = j.value("cost_usd", 0.0);
  v.latency_s = j.value("latency_s", 0.0);
  if (j.contains("token_logprobs"))
    v.token_logprobs = j["token_logprobs"].get<std::vector<double>>();
  if (j.contains("mean_logprob")) v.mean_logprob = j["mean_logprob"].get<double>();
}

void to_json(json& j, const ObjectiveCheck& v) {
  j = json{{"pattern", v.pattern}, {"weight", v.weight}};
}

void from_json(const json& j, ObjectiveCheck& v) {
  v.pattern = j.at("pattern").get<std::string>();
  v.weight = j.value("weight", 1.0);
}

void to_json(json& j, const Task& v) {
  j = json{{"id", v.id}, {"prompt", v.prompt}, {"category", v.category}};
  if (v.difficulty_tier) j["difficulty_tier"] = *v.difficulty_tier;
  if (v.reference) j["reference"] = *v.reference;
  if (!v.objective_checks.empty()) j["objective_checks"] = v.objective_checks;
}

void from_json(const json& j, Task& v) {
  v.id = j.at("id").get<std::string>();
  v.prompt = j.at("prompt").get<std::string>();
  v.category = j.value("category", "other");
  if (j.contains("difficulty_tier")) v.difficulty_tier = j["difficulty_tier"].get<std::string>();
  if (j.contains("reference")) v.reference = j["reference"].get<std::string>();
  if (j.contains("objective_checks"))
    v.objective_checks = j["objective_checks"].get<std::vector<ObjectiveCheck>>();
}

void to_json(json& j, const RunRecord& v) {
  j = json{{"task_id", v.task_id},
           {"technique", v.technique},
           {"repeat_index", v.repeat_index},
           {"individual_outputs", v.individual_outputs},
           {"overhead_outputs", v.overhead_outputs},
           {"individual_scores", v.individual_scores},
           {"combined_text", v.combined_text},
           {"final_quality", v.final_quality},
           {"rounds", v.rounds},
           {"total_cost", v.total_cost},
           {"flags", v.flags}};
  if (v.difficulty) j["difficulty"] = *v.difficulty;
  if (v.selected_profile) j["selected_profile"] = *v.selected_profile;
}

void from_json(const json& j, RunRecord& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.technique = j.at("technique").get<std::string>();
  v.repeat_index = j.value("repeat_index", 0);
  v.individual_outputs = j.value("individual_outputs", std::vector<AgentOutput>{});
  v.overhead_outputs = j.value("overhead_outputs", std::vector<AgentOutput>{});
  v.individual_scores = j.value("individual_scores", std::vector<double>{});
  v.combined_text = j.value("combined_text", "");
  v.final_quality = j.value("final_quality", 0.0);
  v.rounds = j.value("rounds", 1);
  v.total_cost = j.value("total_cost", 0.0);
  v.flags = j.value("flags", std::set<std::string>{});
  if (j.contains("difficulty")) v.difficulty = j["difficulty"].get<double>();
  if (j.contains("selected_profile"))
    v.selected_profile = j["selected_profile"].get<std::string>();
}

void to_json(json& j, const TechniqueConfig& v) {
  j = json{{"technique", v.technique},
           {"branches", v.branches},
           {"n_samples", v.n_samples},
           {"max_rounds", v.max_rounds},
           {"tau", v.tau},
           {"early_exit", v.early_exit},
           {"alpha0", v.alpha0},
           {"severity_floor", v.severity_floor},
           {"max_corrections", v.max_corrections},
           {"n_max", v.n_max},
           {"n_min", v.n_min},
           {"gamma", v.gamma},
           {"code_rate", v.code_rate}};
}

void from_json(const json& j, TechniqueConfig& v) {
  TechniqueConfig defaults;
  v.technique = j.value("technique", defaults.technique);
  v.branches = j.value("branches", defaults.branches);
  v.n_samples = j.value("n_samples", defaults.n_samples);
  v.max_rounds = j.value("max_rounds", defaults.max_rounds);
  // turbo's standalone threshold default is 0.9
  v.tau = j.value("tau", v.technique == "turbo" ? 0.9 : defaults.tau);
  v.early_exit = j.value("early_exit", defaults.early_exit);
  v.alpha0 = j.value("alpha0", defaults.alpha0);
  v.severity_floor = j.value("severity_floor", defaults.severity_floor);
  v.max_corrections = j.value("max_corrections", defaults.max_corrections);
  v.n_max = j.value("n_max", defaults.n_max);
  v.n_min = j.value("n_min", defaults.n_min);
  v.gamma = j.value("gamma", defaults.gamma);
  v.code_rate = j.value("code_rate", defaults.code_rate);
}

void to_json(json& j, const QualityMap& v) {
  j = json{{"kind", v.kind}, {"parameters", v.parameters}};
}

void from_json(const json& j, QualityMap& v) {
  if (j.is_string()) {
    v = parse_quality_map(j.get<std::string>());
    return;
  }
  v.kind = j.value("kind", "identity");
  v.parameters = j.value("parameters", std::vector<double>{});
}

void to_json(json& j, const SyntheticChannelSpec& v) {
  j = json{{"base_quality", v.base_quality},
           {"quality_noise_sd", v.quality_noise_sd},
           {"branch_correlation", v.branch_correlation},
           {"refinement_map", v.refinement_map},
           {"cost_per_call", v.cost_per_call},
           {"seed", v.seed}};
}

void from_json(const json& j, SyntheticChannelSpec& v) {
  SyntheticChannelSpec d;
  v.base_quality = j.value("base_quality", d.base_quality);
  v.quality_noise_sd = j.value("quality_noise_sd", d.quality_noise_sd);
  v.branch_correlation = j.value("branch_correlation", d.branch_correlation);
  if (j.contains("refinement_map")) v.refinement_map = j["refinement_map"].get<QualityMap>();
  v.cost_per_call = j.value("cost_per_call", d.cost_per_call);
  v.seed = j.value("seed", d.seed);
}

void to_json(json& j, const ChannelConfig& v) {
  j = json{{"backend", v.backend == Backend::Http ? "http" : "synthetic"},
           {"model_id", v.model_id},
           {"default_temperature", v.default_temperature},
           {"price_per_input_token", v.price_per_input_token},
           {"price_per_output_token", v.price_per_output_token},
           {"supports_logprobs", v.supports_logprobs},
           {"api_key_env", v.api_key_env},
           {"thinking_tags", v.thinking_tags}};
  if (v.endpoint_url) j["endpoint_url"] = *v.endpoint_url;
  if (v.max_tokens) j["max_tokens"] = *v.max_tokens;
  if (v.synthetic) j["synthetic"] = *v.synthetic;
}

void from_json(const json& j, ChannelConfig& v) {
  ChannelConfig d;
  auto backend = j.value("backend", "synthetic");
  if (backend == "http")
    v.backend = Backend::Http;
  else if (backend == "synthetic")
    v.backend = Backend::Synthetic;
  else
    throw ValidationError("unknown backend: " + backend);
  if (j.contains("endpoint_url")) v.endpoint_url = j["endpoint_url"].get<std::string>();
  v.model_id = j.value("model_id", d.model_id);
  v.default_temperature = j.value("default_temperature", d.default_temperature);
  v.price_per_input_token = j.value("price_per_input_token", d.price_per_input_token);
  v.price_per_output_token = j.value("price_per_output_token", d.price_per_output_token);
  v.supports_logprobs = j.value("supports_logprobs", d.supports_logprobs);
  v.api_key_env = j.value("api_key_env", d.api_key_env);
  if (j.contains("max_tokens")) v.max_tokens = j["max_tokens"].get<long>();
  v.thinking_tags = j.value("thinking_tags", d.thinking_tags);
  if (j.contains("synthetic")) v.synthetic = j["synthetic"].get<SyntheticChannelSpec>();
}

void to_json(json& j, const CacheEntry& v) {
  json per = json::object();
  for (const auto& [id, qc] : v.per_technique)
    per[id] = json{{"quality", qc.first}, {"cost", qc.second}};
  j = json{{"task_id", v.task_id},     {"embedding", v.embedding},
           {"category", v.category},   {"difficulty", v.difficulty},
           {"text_features", v.text_features}, {"per_technique", per},
           {"baseline_cost", v.baseline_cost}};
}

void from_json(const json& j, CacheEntry& v) {
  v.task_id = j.at("task_id").get<std::string>();
  v.embedding = j.at("embedding").get<std::vector<double>>();
  v.category = j.value("category", "other");
  v.difficulty = j.value("difficulty", 0.0);
  v.text_features = j.value("text_features", std::vector<double>{});
  v.per_technique.clear();
  for (const auto& [id, qc] : j.at("per_technique").items())
    v.per_technique[id] = {qc.at("quality").get<double>(), qc.at("cost").get<double>()};
  v.baseline_cost = j.at("baseline_cost").get<double>();
}

void to_json(json& j, const RouterWeights& v) {
  j = json{{"kind", v.kind},
           {"feature_spec", v.feature_spec},
           {"techniques", v.techniques},
           {"coefficients", v.coefficients},
           {"l2_penalty", v.l2_penalty},
           {"fold_metrics", v.fold_metrics},
           {"constant_router", v.constant_router}};
}

void from_json(const json& j, RouterWeights& v) {
  v.kind = j.at("kind").get<std::string>();
  v.feature_spec = j.value("feature_spec", std::vector<std::string>{});
  v.techniques = j.value("techniques", std::vector<std::string>{});
  v.coefficients = j.value("coefficients", std::vector<std::vector<double>>{});
  v.l2_penalty = j.value("l2_penalty", 0.0);
  v.fold_metrics = j.value("fold_metrics", std::vector<double>{});
  v.constant_router = j.value("constant_router", false);
}

void to_json(json& j, const McsProfile& v) {
  j = json{{"name", v.name},
           {"difficulty_range", json::array({v.lo, v.hi})},
           {"params", v.params},
           {"model_id", v.model_id}};
}

void from_json(const json& j, McsProfile& v) {
  v.name = j.at("name").get<std::string>();
  auto range = j.at("difficulty_range");
  v.lo = range.at(0).get<double>();
  v.hi = range.at(1).get<double>();
  if (j.contains("params")) v.params = j["params"].get<TechniqueConfig>();
  v.model_id = j.value("model_id", "");
}

std::vector<Task> load_tasks(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open task file: " + path);
  json doc = json::parse(in);
  const json& arr = doc.is_array() ? doc : doc.at("tasks");
  auto tasks = arr.get<std::vector<Task>>();
  std::set<std::string> ids;
  for (const auto& t : tasks)
    if (!ids.insert(t.id).second) throw ValidationError("duplicate task id: " + t.id);
  return tasks;
}

std::vector<CacheEntry> load_cache_entries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open cache file: " + path);
  std::vector<CacheEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    entries.push_back(json::parse(line).get<CacheEntry>());
  }
  return entries;
}

void save_cache_entries(const std::string& path, const std::vector<CacheEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write cache file: " + path);
  for (const auto& e : entries) out << json(e).dump() << '\n';
}

}  // namespace agentcodec
