#include "agentcodec/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "agentcodec/dispatch.hpp"
#include "agentcodec/errors.hpp"
#include "agentcodec/metrics.hpp"
#include "agentcodec/scoring.hpp"
#include "agentcodec/serialization.hpp"
#include "rng.hpp"

namespace agentcodec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t string_hash(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Derives a per-cell seed so every (task, technique, repeat) cell is
/// reproducible independent of execution order.
std::uint64_t cell_seed(std::uint64_t base, const std::string& task_id,
                        const std::string& technique, int repeat) {
  return detail::mix(base,
                     string_hash(task_id + "|" + technique + "|" + std::to_string(repeat)));
}

ChannelConfig with_seed(ChannelConfig cfg, std::uint64_t seed) {
  if (cfg.backend == Backend::Synthetic) {
    if (!cfg.synthetic) cfg.synthetic = SyntheticChannelSpec{};
    cfg.synthetic->seed = static_cast<std::int64_t>(seed);
  }
  return cfg;
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json doc = json::parse(in);

  ExperimentConfig cfg;
  cfg.channels = doc.at("channels").get<std::vector<ChannelConfig>>();
  if (cfg.channels.empty()) throw ValidationError("config needs at least one channel");
  cfg.judge = doc.contains("judge") ? doc["judge"].get<ChannelConfig>() : cfg.channels.front();

  for (const auto& t : doc.at("techniques")) {
    TechniqueConfig tc;
    if (t.is_string()) {
      tc.technique = t.get<std::string>();
      if (tc.technique == "turbo") tc.tau = 0.9;
    } else {
      tc = t.get<TechniqueConfig>();
    }
    cfg.techniques.push_back(tc);
  }

  if (doc.contains("task_file")) {
    fs::path tf = doc["task_file"].get<std::string>();
    if (tf.is_relative()) tf = fs::path(path).parent_path() / tf;
    cfg.tasks = load_tasks(tf.string());
  } else {
    cfg.tasks = doc.at("tasks").get<std::vector<Task>>();
  }
  if (cfg.tasks.empty()) throw ValidationError("config needs at least one task");

  cfg.repeats = doc.value("repeats", 1);
  cfg.seed = doc.value("seed", std::uint64_t{0});
  cfg.cache_dir = doc.value("cache_dir", std::string{"cache"});
  cfg.embedding_dim = doc.value("embedding_dim", std::size_t{64});
  cfg.knn_k = doc.value("knn_k", std::size_t{20});
  if (doc.contains("lambdas")) cfg.lambdas = doc["lambdas"].get<std::vector<double>>();
  cfg.n_folds = doc.value("n_folds", 5);
  cfg.checklist_file = doc.value("checklist_file", std::string{});
  cfg.prompt_dir = doc.value("prompt_dir", std::string{});
  return cfg;
}

std::map<std::string, std::vector<RunRecord>> load_run_cache(const std::string& cache_dir) {
  std::map<std::string, std::vector<RunRecord>> cache;
  if (!fs::exists(cache_dir)) return cache;
  for (const auto& entry : fs::directory_iterator(cache_dir)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) continue;
    cache[entry.path().stem().string()] = doc.get<std::vector<RunRecord>>();
  }
  return cache;
}

int run_experiment(const ExperimentConfig& config) {
  auto techniques = config.techniques;
  bool has_baseline = std::any_of(techniques.begin(), techniques.end(),
                                  [](const TechniqueConfig& t) { return t.technique == "baseline"; });
  if (!has_baseline) techniques.insert(techniques.begin(), TechniqueConfig{});

  fs::create_directories(config.cache_dir);
  auto cache = load_run_cache(config.cache_dir);

  ChecklistSet checklists = config.checklist_file.empty()
                                ? ChecklistSet::defaults()
                                : ChecklistSet::load(config.checklist_file);
  PromptLibrary prompts;
  if (!config.prompt_dir.empty()) prompts.load_overrides(config.prompt_dir);

  int executed = 0;
  for (const auto& tc : techniques) {
    auto& records = cache[tc.technique];
    std::set<std::pair<std::string, int>> done;
    for (const auto& r : records) done.emplace(r.task_id, r.repeat_index);

    bool dirty = false;
    for (const auto& task : config.tasks) {
      for (int rep = 0; rep < config.repeats; ++rep) {
        if (done.count({task.id, rep})) continue;
        auto seed = cell_seed(config.seed, task.id, tc.technique, rep);

        std::vector<ChannelPtr> channels;
        std::size_t n_channels = config.channels.size();
        bool slice = tc.technique == "sc" || tc.technique == "mrc" || tc.technique == "egc" ||
                     tc.technique == "soft_mrc";
        if (slice)
          n_channels = std::min<std::size_t>(static_cast<std::size_t>(std::max(tc.branches, 1)),
                                             n_channels);
        for (std::size_t i = 0; i < n_channels; ++i)
          channels.push_back(
              make_channel(with_seed(config.channels[i], seed), static_cast<int>(i)));
        auto judge = make_channel(with_seed(config.judge, detail::mix(seed, 0x1DEAULL)), 0);
        Scorer scorer(judge, checklists);

        TechniqueContext ctx;
        ctx.channels = channels;
        ctx.scorer = &scorer;
        ctx.prompts = &prompts;

        RunRecord record;
        try {
          record = execute_technique(ctx, task, tc);
        } catch (const std::exception& e) {
          record = RunRecord{};
          record.task_id = task.id;
          record.technique = tc.technique;
          record.flags.insert("failed");
          std::cerr << "cell failed (" << task.id << ", " << tc.technique << ", " << rep
                    << "): " << e.what() << '\n';
        }
        record.repeat_index = rep;
        records.push_back(std::move(record));
        dirty = true;
        ++executed;
      }
    }
    if (dirty) {
      std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        return std::tie(a.task_id, a.repeat_index) < std::tie(b.task_id, b.repeat_index);
      });
      std::ofstream out(fs::path(config.cache_dir) / (tc.technique + ".json"));
      out << json(records).dump(2) << '\n';
    }
  }
  return executed;
}

FoldPlan make_fold_plan(const std::vector<Task>& tasks, int n_folds, std::uint64_t seed) {
  if (n_folds < 2) throw ValidationError("make_fold_plan needs n_folds >= 2");
  FoldPlan plan;
  plan.n_folds = n_folds;

  std::map<std::string, std::vector<std::string>> by_category;
  for (const auto& t : tasks) by_category[t.category].push_back(t.id);

  int next_fold = 0;  // continues across categories so fold sizes balance
  for (auto& [cat, ids] : by_category) {
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 eng(detail::mix(seed, string_hash(cat)));
    for (std::size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[eng() % i]);
    for (const auto& id : ids) {
      plan.assignment[id] = next_fold;
      next_fold = (next_fold + 1) % n_folds;
    }
  }
  return plan;
}

std::vector<CacheEntry> build_router_cache(
    const std::map<std::string, std::vector<RunRecord>>& cache, const std::vector<Task>& tasks,
    const Embedder& embedder) {
  std::vector<CacheEntry> entries;
  for (const auto& task : tasks) {
    CacheEntry e;
    e.task_id = task.id;
    e.category = task.category;
    try {
      e.embedding = embedder.embed(task.prompt);
    } catch (const std::exception& ex) {
      std::cerr << "embedding failed for task " << task.id << ": " << ex.what() << '\n';
      continue;
    }
    e.text_features = text_statistics(task.prompt);

    for (const auto& [technique, records] : cache) {
      double q = 0.0, c = 0.0;
      int n = 0;
      for (const auto& r : records) {
        if (r.task_id != task.id || r.flags.count("failed")) continue;
        q += r.final_quality;
        c += r.total_cost;
        ++n;
      }
      if (n > 0) e.per_technique[technique] = {q / n, c / n};
    }
    auto baseline = e.per_technique.find("baseline");
    if (baseline == e.per_technique.end() || baseline->second.second <= 0.0) {
      std::cerr << "task " << task.id << " lacks usable baseline records; excluded\n";
      continue;
    }
    e.baseline_cost = baseline->second.second;
    // offline difficulty proxy: hard tasks are those the baseline scores low on
    e.difficulty = std::clamp(1.0 - baseline->second.first, 0.0, 1.0);
    entries.push_back(std::move(e));
  }
  return entries;
}

namespace {

/// (quality, cost) of running `technique` on the task behind `entry`;
/// baseline fallback when the technique was never cached for it.
std::pair<double, double> outcome(const CacheEntry& entry, const std::string& technique) {
  auto it = entry.per_technique.find(technique);
  if (it != entry.per_technique.end()) return it->second;
  return entry.per_technique.at("baseline");
}

std::string best_mean_technique(const std::vector<const CacheEntry*>& entries) {
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto* e : entries)
    for (const auto& [id, qc] : e->per_technique) {
      sums[id].first += qc.first;
      sums[id].second += 1;
    }
  std::string best = "baseline";
  double best_q = -std::numeric_limits<double>::infinity();
  for (const auto& [id, s] : sums) {
    double q = s.first / s.second;
    if (q > best_q) {
      best_q = q;
      best = id;
    }
  }
  return best;
}

struct PolicyOutcome {
  std::string policy;
  std::vector<std::string> choices;  // aligned with the cache entries
};

PolicyRow summarize(const PolicyOutcome& po, const std::vector<CacheEntry>& cache,
                    const std::vector<double>& fixed_best_q, std::uint64_t seed) {
  PolicyRow row;
  row.policy = po.policy;
  const auto n = cache.size();
  std::vector<std::vector<double>> q_groups(n);
  std::vector<PairedSample> vs_fixed;
  double cost_sum = 0.0, rho_sum = 0.0, gain_sum = 0.0, q_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto [q, c] = outcome(cache[i], po.choices[i]);
    auto [bq, bc] = outcome(cache[i], "baseline");
    q_groups[i] = {q};
    q_sum += q;
    cost_sum += c;
    rho_sum += c / cache[i].baseline_cost;
    gain_sum += q - bq;
    vs_fixed.push_back({cache[i].task_id, q, fixed_best_q[i], 0});
    (void)bc;
  }
  row.mean_quality = q_sum / static_cast<double>(n);
  row.mean_cost = cost_sum / static_cast<double>(n);
  row.rho = rho_sum / static_cast<double>(n);
  row.gain = gain_sum / static_cast<double>(n);
  row.quality_per_dollar = row.mean_cost > 0.0 ? row.mean_quality / row.mean_cost : 0.0;

  auto boot = bootstrap_ci(q_groups, 2000, 0.95, seed);
  row.ci_low = boot.lo;
  row.ci_high = boot.hi;

  double fixed_mean = 0.0;
  for (double q : fixed_best_q) fixed_mean += q;
  fixed_mean /= static_cast<double>(n);
  row.delta_q = row.mean_quality - fixed_mean;
  row.wilcoxon_p = wilcoxon_signed_rank(vs_fixed).p_value;
  return row;
}

}  // namespace

std::vector<PolicyRow> evaluate_policies(const std::vector<CacheEntry>& cache,
                                         const FoldPlan& folds,
                                         const std::vector<double>& lambdas, std::size_t k,
                                         std::uint64_t seed) {
  if (cache.empty()) throw ValidationError("evaluate_policies needs a non-empty cache");
  const auto n = cache.size();
  auto fold_of = [&](const CacheEntry& e) {
    auto it = folds.assignment.find(e.task_id);
    return it == folds.assignment.end() ? 0 : it->second;
  };

  std::vector<PolicyOutcome> outcomes;

  // oracle: per-task quality argmax
  {
    PolicyOutcome po{"oracle", {}};
    for (const auto& e : cache) {
      std::string best = "baseline";
      double best_q = -std::numeric_limits<double>::infinity();
      for (const auto& [id, qc] : e.per_technique)
        if (qc.first > best_q) {
          best_q = qc.first;
          best = id;
        }
      po.choices.push_back(best);
    }
    outcomes.push_back(std::move(po));
  }

  // feasible: leave-one-out semKNN at lambda = 0
  {
    PolicyOutcome po{"feasible", {}};
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<CacheEntry> loo;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) loo.push_back(cache[j]);
      if (loo.empty()) loo.push_back(cache[i]);
      po.choices.push_back(semknn_dispatch(loo, cache[i].embedding, 0.0, k));
    }
    outcomes.push_back(std::move(po));
  }

  // per-fold training views
  std::vector<std::vector<CacheEntry>> train(static_cast<std::size_t>(folds.n_folds));
  std::vector<std::vector<const CacheEntry*>> train_ptrs(
      static_cast<std::size_t>(folds.n_folds));
  for (int f = 0; f < folds.n_folds; ++f)
    for (const auto& e : cache)
      if (fold_of(e) != f) {
        train[static_cast<std::size_t>(f)].push_back(e);
        train_ptrs[static_cast<std::size_t>(f)].push_back(&e);
      }

  // semKNN per lambda, out-of-fold
  for (double lambda : lambdas) {
    std::ostringstream name;
    name << "semknn_lambda_" << lambda;
    PolicyOutcome po{name.str(), {}};
    for (const auto& e : cache) {
      const auto& tr = train[static_cast<std::size_t>(fold_of(e))];
      po.choices.push_back(tr.empty() ? "baseline" : semknn_dispatch(tr, e.embedding, lambda, k));
    }
    outcomes.push_back(std::move(po));
  }

  // learned routers, cross-validated
  for (const std::string& kind : {"ridge", "logit"}) {
    PolicyOutcome po{kind + std::string("_cv"), {}};
    bool ok = true;
    std::vector<RouterWeights> fold_weights(static_cast<std::size_t>(folds.n_folds));
    for (int f = 0; f < folds.n_folds && ok; ++f) {
      const auto& tr = train[static_cast<std::size_t>(f)];
      try {
        fold_weights[static_cast<std::size_t>(f)] =
            kind == "ridge" ? fit_ridge_router(tr, 1e-3) : fit_logit_router(tr, 1e-3);
      } catch (const std::exception& ex) {
        std::cerr << "skipping " << po.policy << ": " << ex.what() << '\n';
        ok = false;
      }
    }
    if (!ok) continue;
    for (const auto& e : cache)
      po.choices.push_back(
          route_with_weights(fold_weights[static_cast<std::size_t>(fold_of(e))], e));
    outcomes.push_back(std::move(po));
  }

  // per-category fixed best, cross-validated
  {
    PolicyOutcome po{"category_best_cv", {}};
    for (const auto& e : cache) {
      const auto& tr = train_ptrs[static_cast<std::size_t>(fold_of(e))];
      std::vector<const CacheEntry*> same_cat;
      for (const auto* t : tr)
        if (t->category == e.category) same_cat.push_back(t);
      po.choices.push_back(best_mean_technique(same_cat.empty() ? tr : same_cat));
    }
    outcomes.push_back(std::move(po));
  }

  // scalar-difficulty quartile bins, cross-validated
  {
    PolicyOutcome po{"difficulty_bins_cv", {}};
    for (const auto& e : cache) {
      const auto& tr = train_ptrs[static_cast<std::size_t>(fold_of(e))];
      std::vector<double> diffs;
      for (const auto* t : tr) diffs.push_back(t->difficulty);
      std::sort(diffs.begin(), diffs.end());
      auto edge = [&](double q) {
        if (diffs.empty()) return 0.0;
        return diffs[std::min(diffs.size() - 1,
                              static_cast<std::size_t>(q * static_cast<double>(diffs.size())))];
      };
      double e1 = edge(0.25), e2 = edge(0.5), e3 = edge(0.75);
      auto bin = [&](double d) { return d < e1 ? 0 : d < e2 ? 1 : d < e3 ? 2 : 3; };
      std::vector<const CacheEntry*> same_bin;
      for (const auto* t : tr)
        if (bin(t->difficulty) == bin(e.difficulty)) same_bin.push_back(t);
      po.choices.push_back(best_mean_technique(same_bin.empty() ? tr : same_bin));
    }
    outcomes.push_back(std::move(po));
  }

  // cross-validated fixed best
  PolicyOutcome fixed_best{"fixed_best_cv", {}};
  for (const auto& e : cache)
    fixed_best.choices.push_back(
        best_mean_technique(train_ptrs[static_cast<std::size_t>(fold_of(e))]));
  outcomes.push_back(fixed_best);

  // always-baseline
  {
    PolicyOutcome po{"always_baseline", std::vector<std::string>(n, "baseline")};
    outcomes.push_back(std::move(po));
  }

  std::vector<double> fixed_best_q;
  for (std::size_t i = 0; i < n; ++i)
    fixed_best_q.push_back(outcome(cache[i], fixed_best.choices[i]).first);

  std::vector<PolicyRow> rows;
  for (const auto& po : outcomes) rows.push_back(summarize(po, cache, fixed_best_q, seed));
  return rows;
}

std::string policy_table_csv(const std::vector<PolicyRow>& rows) {
  std::ostringstream csv;
  csv << "policy,quality,ci_low,ci_high,cost_per_task,quality_per_dollar,rho,gain,"
         "delta_q_vs_fixed_best,wilcoxon_p\n";
  for (const auto& r : rows) {
    csv << r.policy << ',' << r.mean_quality << ',' << r.ci_low << ',' << r.ci_high << ','
        << r.mean_cost << ',' << r.quality_per_dollar << ',' << r.rho << ',' << r.gain << ','
        << r.delta_q << ',' << r.wilcoxon_p << '\n';
  }
  return csv.str();
}

std::string policy_table_json(const std::vector<PolicyRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back(json{{"policy", r.policy},
                       {"quality", r.mean_quality},
                       {"ci_low", r.ci_low},
                       {"ci_high", r.ci_high},
                       {"cost_per_task", r.mean_cost},
                       {"quality_per_dollar", r.quality_per_dollar},
                       {"rho", r.rho},
                       {"gain", r.gain},
                       {"delta_q_vs_fixed_best", r.delta_q},
                       {"wilcoxon_p", r.wilcoxon_p}});
  }
  return arr.dump(2);
}

}  // namespace agentcodec
