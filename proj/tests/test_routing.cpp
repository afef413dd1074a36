#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "agentcodec/embedding.hpp"
#include "agentcodec/errors.hpp"
#include "agentcodec/routing.hpp"
#include "test_support.hpp"

using namespace agentcodec;
using namespace agentcodec::testing;

namespace {

CacheEntry entry(const std::string& id, std::vector<double> emb,
                 std::map<std::string, std::pair<double, double>> per_technique,
                 double difficulty = 0.5, const std::string& category = "other") {
  CacheEntry e;
  e.task_id = id;
  e.embedding = std::move(emb);
  e.per_technique = std::move(per_technique);
  e.difficulty = difficulty;
  e.category = category;
  e.baseline_cost = 0.001;
  return e;
}

}  // namespace

TEST_CASE("hash embedder is deterministic and normalized") {
  HashEmbedder emb(32);
  auto a = emb.embed("What is the capital of France?");
  auto b = emb.embed("What is the capital of France?");
  auto c = emb.embed("Compute the integral of x squared.");
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 32);
  double norm = 0.0;
  for (double v : a) norm += v * v;
  CHECK(norm == doctest::Approx(1.0));
  // near-duplicate prompts land closer than unrelated ones
  auto a2 = emb.embed("What is the capital city of France?");
  CHECK(cosine_similarity(a, a2) > cosine_similarity(a, c));
}

TEST_CASE("cosine similarity") {
  CHECK(cosine_similarity({1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(cosine_similarity({1, 0}, {-1, 0}) == doctest::Approx(-1.0));
  CHECK(cosine_similarity({0, 0}, {1, 0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(cosine_similarity({1, 0}, {1, 0, 0}), ValidationError);
}

TEST_CASE("pilot difficulty from logprobs") {
  // confidence 0.5 -> difficulty 1 - 0.5 = 0.5
  auto rated = pilot_difficulty(scripted({"Q=0.5"}, 0.001, true), simple_task());
  CHECK(rated.difficulty == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_FALSE(rated.degraded);
  CHECK(rated.probe_outputs.size() == 1);

  auto easy = pilot_difficulty(scripted({"Q=1"}, 0.001, true), simple_task());
  CHECK(easy.difficulty == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("pilot difficulty self-rating fallback") {
  auto self = std::make_shared<ScriptedChannel>(std::vector<std::string>{"0.7"});
  auto r = pilot_difficulty(self, simple_task());
  CHECK(r.difficulty == doctest::Approx(0.7));
  CHECK_FALSE(r.degraded);
  CHECK(self->temperatures[0] == doctest::Approx(0.1));

  auto clamped = pilot_difficulty(scripted({"1.8"}), simple_task());
  CHECK(clamped.difficulty == doctest::Approx(1.0));

  auto garbled = pilot_difficulty(scripted({"no clue"}), simple_task());
  CHECK(garbled.degraded);
  CHECK(garbled.difficulty == doctest::Approx(1.0));

  auto dead = pilot_difficulty(std::make_shared<FailingChannel>(), simple_task());
  CHECK(dead.degraded);
  CHECK(dead.difficulty == doctest::Approx(1.0));
}

TEST_CASE("profile selection is first-match with catch-all fallthrough") {
  std::vector<McsProfile> profiles{{"easy", 0.0, 0.3, {}, "m"},
                                   {"medium", 0.3, 0.7, {}, "m"},
                                   {"hard", 0.7, 1.0, {}, "m"}};
  CHECK(select_profile(profiles, 0.0).name == "easy");
  CHECK(select_profile(profiles, 0.3).name == "medium");  // half-open ranges
  CHECK(select_profile(profiles, 0.9).name == "hard");
  CHECK(select_profile(profiles, 1.0).name == "hard");  // out of range -> last
  std::vector<McsProfile> overlapping{{"a", 0.0, 1.0, {}, "m"}, {"b", 0.0, 1.0, {}, "m"}};
  CHECK(select_profile(overlapping, 0.5).name == "a");
  CHECK_THROWS_AS(select_profile({}, 0.5), ValidationError);
}

TEST_CASE("acm probes, selects, and runs the profile technique") {
  // probe sees confidence 0.5 -> difficulty 0.5 -> "medium" baseline profile
  Fixture fx({scripted({"Q=0.5", "Q=0.8"}, 0.001, true)});
  TechniqueConfig baseline;
  std::vector<McsProfile> profiles{{"easy", 0.0, 0.3, baseline, "m"},
                                   {"medium", 0.3, 0.7, baseline, "m"},
                                   {"hard", 0.7, 1.0, baseline, "m"}};
  auto rec = run_acm(fx.ctx, simple_task(), profiles);
  CHECK(rec.technique == "acm");
  CHECK(*rec.selected_profile == "medium");
  CHECK(*rec.difficulty == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(rec.final_quality == doctest::Approx(0.8));
  CHECK(rec.overhead_outputs.size() == 1);  // the pilot probe
  CHECK(rec.total_cost == doctest::Approx(0.002));
}

TEST_CASE("acm degrades to maximum protection when the pilot fails") {
  Fixture fx({scripted({"cannot rate this", "Q=0.6"})});
  TechniqueConfig baseline;
  std::vector<McsProfile> profiles{{"easy", 0.0, 0.5, baseline, "m"},
                                   {"hard", 0.5, 1.0, baseline, "m"}};
  auto rec = run_acm(fx.ctx, simple_task(), profiles);
  CHECK(rec.flags.count("pilot_degraded"));
  CHECK(*rec.selected_profile == "hard");
}

TEST_CASE("semknn dispatch optimizes quality at lambda zero and cost at huge lambda") {
  std::vector<CacheEntry> cache;
  for (int i = 0; i < 5; ++i)
    cache.push_back(entry("t" + std::to_string(i), {1.0, 0.0},
                          {{"rich", {0.9, 0.01}}, {"cheap", {0.6, 0.001}}}));
  CHECK(semknn_dispatch(cache, {1.0, 0.0}, 0.0, 5) == "rich");
  CHECK(semknn_dispatch(cache, {1.0, 0.0}, 1e9, 5) == "cheap");
}

TEST_CASE("semknn breaks exact ties toward the cheaper technique") {
  std::vector<CacheEntry> cache{
      entry("t0", {1.0, 0.0}, {{"a", {0.8, 0.01}}, {"b", {0.8, 0.002}}})};
  CHECK(semknn_dispatch(cache, {1.0, 0.0}, 0.0, 1) == "b");
}

TEST_CASE("semknn respects the neighborhood") {
  std::vector<CacheEntry> cache{
      entry("near", {1.0, 0.0}, {{"a", {0.9, 0.001}}, {"b", {0.1, 0.001}}}),
      entry("far", {0.0, 1.0}, {{"a", {0.1, 0.001}}, {"b", {0.9, 0.001}}})};
  CHECK(semknn_dispatch(cache, {1.0, 0.1}, 0.0, 1) == "a");
  CHECK(semknn_dispatch(cache, {0.1, 1.0}, 0.0, 1) == "b");
  // k beyond the cache size just uses everything
  CHECK_NOTHROW(semknn_dispatch(cache, {1.0, 0.0}, 0.0, 50));
}

TEST_CASE("semknn input validation") {
  std::vector<CacheEntry> cache{entry("t0", {1.0, 0.0}, {{"a", {0.8, 0.001}}})};
  CHECK_THROWS_AS(semknn_dispatch({}, {1.0, 0.0}, 0.0, 5), ValidationError);
  CHECK_THROWS_AS(semknn_dispatch(cache, {1.0, 0.0, 0.0}, 0.0, 5), ValidationError);
  CHECK_THROWS_AS(semknn_dispatch(cache, {1.0, 0.0}, 0.0, 0), ValidationError);
  auto bad = cache;
  bad[0].baseline_cost = 0.0;
  CHECK_THROWS_AS(semknn_dispatch(bad, {1.0, 0.0}, 0.0, 5), ValidationError);
}

TEST_CASE("text statistics") {
  auto f = text_statistics("Solve 2 + 2 = ? Please.");
  REQUIRE(f.size() == 7);
  CHECK(f[0] == doctest::Approx(std::log(4.0)));  // Solve, 2, 2, Please
  CHECK(f[1] == 0.0);                             // no code markers
  CHECK(f[2] == 1.0);                             // math symbols
  CHECK(f[3] == 1.0);                             // digits
  CHECK(f[4] == 1.0);                             // question mark
  CHECK(f[5] == doctest::Approx(std::log(2.0)));  // '?' and '.'
  CHECK(f[6] == doctest::Approx(13.0 / 4.0));     // mean word length

  auto code = text_statistics("```python\nprint(1)\n```");
  CHECK(code[1] == 1.0);
  CHECK(text_statistics("").size() == 7);
}

TEST_CASE("feature vectors") {
  CacheEntry e;
  e.difficulty = 0.4;
  e.category = "qa";
  auto lf = logit_features(e, {"code", "qa"});
  CHECK(lf == std::vector<double>{1.0, 0.4, 0.0, 1.0});
  e.text_features = {1, 0, 1, 0, 1, 0, 4.2};
  auto rf = ridge_features(e, {"code", "qa"});
  REQUIRE(rf.size() == 11);
  CHECK(rf[4] == 1.0);
  CHECK(rf[10] == doctest::Approx(4.2));
  // malformed stats fall back to zeros rather than corrupting the vector
  e.text_features = {1.0};
  CHECK(ridge_features(e, {"code", "qa"}).size() == 11);
}

TEST_CASE("logit router separates easy from hard tasks") {
  std::vector<CacheEntry> cache;
  for (int i = 0; i < 20; ++i) {
    double d = (i + 0.5) / 20.0;
    std::map<std::string, std::pair<double, double>> pt =
        d < 0.5 ? std::map<std::string, std::pair<double, double>>{{"light", {0.9, 0.001}},
                                                                   {"heavy", {0.5, 0.01}}}
                : std::map<std::string, std::pair<double, double>>{{"light", {0.5, 0.001}},
                                                                   {"heavy", {0.9, 0.01}}};
    cache.push_back(entry("t" + std::to_string(i), {1.0, 0.0}, pt, d));
  }
  auto w = fit_logit_router(cache, 1e-3);
  CHECK(w.kind == "multinomial-logit");
  CHECK_FALSE(w.constant_router);
  CacheEntry probe;
  probe.category = "other";
  probe.difficulty = 0.05;
  CHECK(route_with_weights(w, probe) == "light");
  probe.difficulty = 0.95;
  CHECK(route_with_weights(w, probe) == "heavy");
  CHECK_THROWS_AS(fit_logit_router(cache, 0.0), ValidationError);
  CHECK_THROWS_AS(fit_logit_router({}, 1e-3), ValidationError);
}

TEST_CASE("logit router degenerates gracefully on a single label") {
  std::vector<CacheEntry> cache;
  for (int i = 0; i < 4; ++i)
    cache.push_back(entry("t" + std::to_string(i), {1.0, 0.0},
                          {{"only", {0.8, 0.001}}, {"worse", {0.2, 0.001}}}, 0.25 * i));
  auto w = fit_logit_router(cache, 1e-3);
  CHECK(w.constant_router);
  CacheEntry probe;
  CHECK(route_with_weights(w, probe) == "only");
}

TEST_CASE("ridge router recovers linear quality surfaces") {
  std::vector<CacheEntry> cache;
  for (int i = 0; i < 30; ++i) {
    double d = i / 29.0;
    CacheEntry e = entry("t" + std::to_string(i), {1.0, 0.0},
                         {{"rising", {0.2 + 0.5 * d, 0.001}},
                          {"falling", {0.9 - 0.5 * d, 0.001}}},
                         d);
    e.text_features = std::vector<double>(7, 0.0);
    cache.push_back(e);
  }
  auto w = fit_ridge_router(cache, 1e-6);
  CHECK(w.kind == "ridge");
  CacheEntry probe;
  probe.category = "other";
  probe.text_features = std::vector<double>(7, 0.0);
  probe.difficulty = 0.0;
  CHECK(route_with_weights(w, probe) == "falling");
  probe.difficulty = 1.0;
  CHECK(route_with_weights(w, probe) == "rising");

  CHECK_THROWS_AS(fit_ridge_router(cache, 0.0), ValidationError);
  std::vector<CacheEntry> tiny{cache[0]};
  CHECK_THROWS_AS(fit_ridge_router(tiny, 1e-3), ValidationError);
}

TEST_CASE("lambda sweep trades quality against cost monotonically") {
  std::vector<CacheEntry> cache;
  for (int i = 0; i < 10; ++i)
    cache.push_back(entry("t" + std::to_string(i), {std::cos(0.1 * i), std::sin(0.1 * i)},
                          {{"rich", {0.9, 0.01}}, {"cheap", {0.6, 0.001}}}));
  auto rows = lambda_sweep(cache, {0.0, 0.05, 10.0}, 5);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].mean_quality == doctest::Approx(0.9));
  CHECK(rows[2].mean_quality == doctest::Approx(0.6));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].mean_quality <= rows[i - 1].mean_quality + 1e-12);
    CHECK(rows[i].mean_cost <= rows[i - 1].mean_cost + 1e-12);
  }
  // duplicate lambdas give identical rows
  auto dup = lambda_sweep(cache, {0.05, 0.05}, 5);
  CHECK(dup[0].mean_quality == doctest::Approx(dup[1].mean_quality));
  CHECK_THROWS_AS(lambda_sweep(cache, {}, 5), ValidationError);
}
