#include "agentcodec/routing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "agentcodec/dispatch.hpp"
#include "agentcodec/embedding.hpp"
#include "agentcodec/errors.hpp"

namespace agentcodec {

PilotResult pilot_difficulty(const ChannelPtr& channel, const Task& task,
                             const PromptLibrary& lib) {
  PilotResult result;
  std::string probe_prompt = lib.get("pilot_probe") + "\nTask:\n" + task.prompt + "\n";
  if (channel->supports_logprobs()) {
    try {
      auto out = channel->generate(probe_prompt, std::nullopt, true);
      result.probe_outputs.push_back(out);
      double mean_lp = out.mean_logprob ? *out.mean_logprob
                                        : std::log(intrinsic_confidence(out));
      result.difficulty = std::clamp(1.0 - std::exp(mean_lp), 0.0, 1.0);
      return result;
    } catch (const TransportError&) {
    } catch (const CapabilityError&) {
    }
  }
  try {
    auto out = channel->generate(lib.get("difficulty_self_rating") + "\nTask:\n" + task.prompt +
                                     "\n",
                                 0.1, false);
    result.probe_outputs.push_back(out);
    try {
      std::size_t pos = 0;
      double rating = std::stod(out.text, &pos);
      result.difficulty = std::clamp(rating, 0.0, 1.0);
      return result;
    } catch (const std::exception&) {
    }
  } catch (const TransportError&) {
  }
  result.difficulty = 1.0;
  result.degraded = true;
  return result;
}

const McsProfile& select_profile(const std::vector<McsProfile>& profiles, double difficulty) {
  if (profiles.empty()) throw ValidationError("empty MCS profile table");
  for (const auto& p : profiles)
    if (p.contains(difficulty)) return p;
  return profiles.back();  // maximum-protection fallthrough
}

RunRecord run_acm(const TechniqueContext& ctx, const Task& task,
                  const std::vector<McsProfile>& profiles) {
  ctx.validate(1);
  auto pilot = pilot_difficulty(ctx.generator(), task, ctx.lib());
  const auto& profile = select_profile(profiles, pilot.difficulty);

  RunRecord record = execute_technique(ctx, task, profile.params);
  record.technique = "acm";
  record.difficulty = pilot.difficulty;
  record.selected_profile = profile.name;
  if (pilot.degraded) record.flags.insert("pilot_degraded");
  record.overhead_outputs.insert(record.overhead_outputs.end(), pilot.probe_outputs.begin(),
                                 pilot.probe_outputs.end());
  record.finalize_cost();
  return record;
}

namespace {

void check_cache(const std::vector<CacheEntry>& cache, std::size_t dim) {
  if (cache.empty()) throw ValidationError("router cache is empty");
  for (const auto& e : cache)
    if (e.embedding.size() != dim)
      throw ValidationError("cache embedding dimension mismatch for task " + e.task_id);
}

}  // namespace

std::string semknn_dispatch(const std::vector<CacheEntry>& cache,
                            const std::vector<double>& task_embedding, double lambda,
                            std::size_t k) {
  if (k < 1) throw ValidationError("semknn_dispatch needs k >= 1");
  check_cache(cache, task_embedding.size());

  std::vector<std::pair<double, std::size_t>> by_similarity;
  for (std::size_t i = 0; i < cache.size(); ++i)
    by_similarity.emplace_back(cosine_similarity(cache[i].embedding, task_embedding), i);
  std::stable_sort(by_similarity.begin(), by_similarity.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  auto n = std::min(k, by_similarity.size());

  // mean quality and baseline-normalized cost per technique over the neighborhood
  std::map<std::string, std::pair<double, double>> sums;  // id -> (sum q, sum c_norm)
  std::map<std::string, int> counts;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& e = cache[by_similarity[j].second];
    if (e.baseline_cost <= 0.0)
      throw ValidationError("non-positive baseline cost for task " + e.task_id);
    for (const auto& [id, qc] : e.per_technique) {
      sums[id].first += qc.first;
      sums[id].second += qc.second / e.baseline_cost;
      counts[id] += 1;
    }
  }

  std::string best_id;
  double best_obj = -std::numeric_limits<double>::infinity();
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& [id, sc] : sums) {
    double q = sc.first / counts[id];
    double c = sc.second / counts[id];
    double obj = q - lambda * c;
    if (obj > best_obj || (obj == best_obj && c < best_cost)) {
      best_obj = obj;
      best_cost = c;
      best_id = id;
    }
  }
  return best_id;
}

std::vector<double> text_statistics(const std::string& prompt) {
  long words = 0, sentences = 0, word_chars = 0;
  bool in_word = false;
  bool has_numbers = false, has_question = false;
  for (char c : prompt) {
    auto uc = static_cast<unsigned char>(c);
    bool wordc = std::isalnum(uc) != 0;
    if (wordc && !in_word) ++words;
    if (wordc) ++word_chars;
    in_word = wordc;
    if (c == '.' || c == '!' || c == '?') ++sentences;
    if (std::isdigit(uc)) has_numbers = true;
    if (c == '?') has_question = true;
  }
  bool has_code = prompt.find("```") != std::string::npos ||
                  prompt.find("def ") != std::string::npos ||
                  prompt.find("function") != std::string::npos ||
                  prompt.find("code") != std::string::npos;
  bool has_math = prompt.find('=') != std::string::npos ||
                  prompt.find('+') != std::string::npos ||
                  prompt.find("equation") != std::string::npos ||
                  prompt.find("solve") != std::string::npos;
  double mean_word_len =
      words > 0 ? static_cast<double>(word_chars) / static_cast<double>(words) : 0.0;
  return {std::log(static_cast<double>(std::max(words, 1L))),
          has_code ? 1.0 : 0.0,
          has_math ? 1.0 : 0.0,
          has_numbers ? 1.0 : 0.0,
          has_question ? 1.0 : 0.0,
          std::log(static_cast<double>(std::max(sentences, 1L))),
          mean_word_len};
}

namespace {

std::vector<std::string> cache_categories(const std::vector<CacheEntry>& cache) {
  std::set<std::string> cats;
  for (const auto& e : cache) cats.insert(e.category);
  return {cats.begin(), cats.end()};
}

std::vector<std::string> categories_from_spec(const std::vector<std::string>& spec) {
  std::vector<std::string> cats;
  for (const auto& name : spec)
    if (name.rfind("cat:", 0) == 0) cats.push_back(name.substr(4));
  return cats;
}

std::string argmax_technique(const CacheEntry& e) {
  std::string best;
  double best_q = -std::numeric_limits<double>::infinity();
  for (const auto& [id, qc] : e.per_technique)
    if (qc.first > best_q) {
      best_q = qc.first;
      best = id;
    }
  return best;
}

const std::vector<std::string> kTextFeatureNames = {
    "log_words", "has_code", "has_math", "has_numbers", "has_question", "log_sentences",
    "mean_word_len"};

}  // namespace

std::vector<double> logit_features(const CacheEntry& entry,
                                   const std::vector<std::string>& categories) {
  std::vector<double> f{1.0, entry.difficulty};
  for (const auto& c : categories) f.push_back(entry.category == c ? 1.0 : 0.0);
  return f;
}

std::vector<double> ridge_features(const CacheEntry& entry,
                                   const std::vector<std::string>& categories) {
  auto f = logit_features(entry, categories);
  auto stats = entry.text_features.size() == kTextFeatureNames.size()
                   ? entry.text_features
                   : std::vector<double>(kTextFeatureNames.size(), 0.0);
  f.insert(f.end(), stats.begin(), stats.end());
  return f;
}

RouterWeights fit_logit_router(const std::vector<CacheEntry>& cache, double l2) {
  if (cache.empty()) throw ValidationError("fit_logit_router needs a non-empty cache");
  if (l2 <= 0.0) throw ValidationError("fit_logit_router needs l2 > 0");
  auto categories = cache_categories(cache);

  std::set<std::string> label_set;
  for (const auto& e : cache) label_set.insert(argmax_technique(e));
  std::vector<std::string> techniques(label_set.begin(), label_set.end());

  RouterWeights w;
  w.kind = "multinomial-logit";
  w.techniques = techniques;
  w.l2_penalty = l2;
  w.feature_spec = {"intercept", "difficulty"};
  for (const auto& c : categories) w.feature_spec.push_back("cat:" + c);

  const auto n = cache.size();
  const auto p = w.feature_spec.size();
  const auto kk = techniques.size();

  if (kk == 1) {
    w.constant_router = true;
    w.coefficients = {std::vector<double>(p, 0.0)};
    return w;
  }

  Eigen::MatrixXd X(n, p);
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto f = logit_features(cache[i], categories);
    for (std::size_t j = 0; j < p; ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
    auto label = argmax_technique(cache[i]);
    y[i] = static_cast<std::size_t>(
        std::find(techniques.begin(), techniques.end(), label) - techniques.begin());
  }

  // Newton iterations on the flattened coefficient vector; the intercept
  // column is excluded from the penalty.
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kk * p));
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::MatrixXd scores(n, kk);
    for (std::size_t c = 0; c < kk; ++c)
      scores.col(static_cast<Eigen::Index>(c)) =
          X * beta.segment(static_cast<Eigen::Index>(c * p), static_cast<Eigen::Index>(p));
    Eigen::MatrixXd prob(n, kk);
    for (std::size_t i = 0; i < n; ++i) {
      double mx = scores.row(static_cast<Eigen::Index>(i)).maxCoeff();
      Eigen::ArrayXd ex = (scores.row(static_cast<Eigen::Index>(i)).array() - mx).exp();
      prob.row(static_cast<Eigen::Index>(i)) = ex / ex.sum();
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kk * p));
    for (std::size_t c = 0; c < kk; ++c) {
      Eigen::VectorXd resid = prob.col(static_cast<Eigen::Index>(c));
      for (std::size_t i = 0; i < n; ++i)
        if (y[i] == c) resid(static_cast<Eigen::Index>(i)) -= 1.0;
      grad.segment(static_cast<Eigen::Index>(c * p), static_cast<Eigen::Index>(p)) =
          X.transpose() * resid;
      for (std::size_t j = 1; j < p; ++j)  // skip intercept
        grad(static_cast<Eigen::Index>(c * p + j)) += l2 * beta(static_cast<Eigen::Index>(c * p + j));
    }
    if (grad.norm() < 1e-6) break;

    // Block-diagonal Hessian approximation per class: X' W X + l2 I.
    Eigen::VectorXd step = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kk * p));
    for (std::size_t c = 0; c < kk; ++c) {
      Eigen::VectorXd wdiag =
          (prob.col(static_cast<Eigen::Index>(c)).array() *
           (1.0 - prob.col(static_cast<Eigen::Index>(c)).array()))
              .matrix();
      Eigen::MatrixXd H = X.transpose() * wdiag.asDiagonal() * X;
      for (std::size_t j = 1; j < p; ++j)
        H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += l2;
      H.diagonal().array() += 1e-10;  // numerical floor
      step.segment(static_cast<Eigen::Index>(c * p), static_cast<Eigen::Index>(p)) =
          H.ldlt().solve(
              grad.segment(static_cast<Eigen::Index>(c * p), static_cast<Eigen::Index>(p)));
    }
    beta -= step;
  }

  w.coefficients.assign(kk, std::vector<double>(p, 0.0));
  for (std::size_t c = 0; c < kk; ++c)
    for (std::size_t j = 0; j < p; ++j)
      w.coefficients[c][j] = beta(static_cast<Eigen::Index>(c * p + j));
  return w;
}

RouterWeights fit_ridge_router(const std::vector<CacheEntry>& cache, double l2) {
  if (cache.empty()) throw ValidationError("fit_ridge_router needs a non-empty cache");
  if (l2 <= 0.0) throw ValidationError("fit_ridge_router needs l2 > 0");
  auto categories = cache_categories(cache);

  std::set<std::string> technique_set;
  for (const auto& e : cache)
    for (const auto& [id, qc] : e.per_technique) technique_set.insert(id);
  std::vector<std::string> techniques(technique_set.begin(), technique_set.end());

  RouterWeights w;
  w.kind = "ridge";
  w.techniques = techniques;
  w.l2_penalty = l2;
  w.feature_spec = {"intercept", "difficulty"};
  for (const auto& c : categories) w.feature_spec.push_back("cat:" + c);
  w.feature_spec.insert(w.feature_spec.end(), kTextFeatureNames.begin(), kTextFeatureNames.end());
  const auto p = w.feature_spec.size();

  for (const auto& id : techniques) {
    std::vector<const CacheEntry*> rows;
    for (const auto& e : cache)
      if (e.per_technique.count(id)) rows.push_back(&e);
    if (rows.size() < 2)
      throw ValidationError("fit_ridge_router needs >= 2 cache entries per technique (" + id +
                            ")");
    Eigen::MatrixXd X(rows.size(), p);
    Eigen::VectorXd yv(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto f = ridge_features(*rows[i], categories);
      for (std::size_t j = 0; j < p; ++j)
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
      yv(static_cast<Eigen::Index>(i)) = rows[i]->per_technique.at(id).first;
    }
    Eigen::MatrixXd A = X.transpose() * X;
    for (std::size_t j = 1; j < p; ++j)  // intercept unpenalized
      A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += l2;
    A(0, 0) += 1e-12;
    Eigen::VectorXd coef = A.ldlt().solve(X.transpose() * yv);
    std::vector<double> row(p);
    for (std::size_t j = 0; j < p; ++j) row[j] = coef(static_cast<Eigen::Index>(j));
    w.coefficients.push_back(std::move(row));
  }
  return w;
}

std::string route_with_weights(const RouterWeights& weights, const CacheEntry& entry) {
  if (weights.techniques.empty()) throw ValidationError("router has no techniques");
  if (weights.constant_router || weights.techniques.size() == 1) return weights.techniques[0];
  auto categories = categories_from_spec(weights.feature_spec);
  auto f = weights.kind == "ridge" ? ridge_features(entry, categories)
                                   : logit_features(entry, categories);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < weights.techniques.size(); ++c) {
    const auto& coef = weights.coefficients.at(c);
    if (coef.size() != f.size())
      throw ValidationError("router feature/coefficient length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += coef[j] * f[j];
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  return weights.techniques[best];
}

std::vector<LambdaSweepRow> lambda_sweep(const std::vector<CacheEntry>& cache,
                                         const std::vector<double>& lambdas, std::size_t k) {
  if (lambdas.empty()) throw ValidationError("lambda_sweep needs at least one lambda");
  std::vector<LambdaSweepRow> rows;
  for (double lambda : lambdas) {
    LambdaSweepRow row;
    row.lambda = lambda;
    for (const auto& e : cache) {
      auto id = semknn_dispatch(cache, e.embedding, lambda, k);
      auto it = e.per_technique.find(id);
      if (it == e.per_technique.end()) continue;  // technique absent on this task
      row.mean_quality += it->second.first;
      row.mean_cost += it->second.second;
    }
    row.mean_quality /= static_cast<double>(cache.size());
    row.mean_cost /= static_cast<double>(cache.size());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace agentcodec
