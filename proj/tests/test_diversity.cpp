#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agentcodec/diversity.hpp"
#include "agentcodec/errors.hpp"
#include "test_support.hpp"

using namespace agentcodec;
using namespace agentcodec::testing;

TEST_CASE("selection combining picks the argmax branch") {
  Fixture fx({scripted({"Q=0.4"}), scripted({"Q=0.8"}), scripted({"Q=0.6"})});
  auto rec = run_sc(fx.ctx, simple_task());
  CHECK(rec.combined_text == "Q=0.8");
  CHECK(rec.final_quality == doctest::Approx(0.8));
  CHECK(rec.individual_outputs.size() == 3);
  CHECK(rec.individual_scores == std::vector<double>{0.4, 0.8, 0.6});
  CHECK(rec.overhead_outputs.empty());
  CHECK(rec.total_cost == doctest::Approx(0.003));
}

TEST_CASE("selection combining breaks ties toward the lowest index") {
  Fixture fx({scripted({"Q=0.7"}), scripted({"Q=0.7"})});
  auto rec = run_sc(fx.ctx, simple_task());
  CHECK(rec.combined_text == rec.individual_outputs[0].text);
}

TEST_CASE("selection combining tolerates a failed branch") {
  Fixture fx({std::make_shared<FailingChannel>(), scripted({"Q=0.6"})});
  auto rec = run_sc(fx.ctx, simple_task());
  CHECK(rec.flags.count("branch_failed"));
  CHECK(rec.final_quality == doctest::Approx(0.6));

  Fixture dead({std::make_shared<FailingChannel>(), std::make_shared<FailingChannel>()});
  CHECK_THROWS_AS(run_sc(dead.ctx, simple_task()), TransportError);
}

TEST_CASE("mrc dominance fast path skips synthesis") {
  Fixture fx({scripted({"Q=0.9"}), scripted({"Q=0.3"}), scripted({"Q=0.2"})});
  auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.95"});
  fx.ctx.synthesizer = synth;
  auto rec = run_mrc(fx.ctx, simple_task());
  CHECK(rec.flags.count("mrc_fast_path"));
  CHECK(synth->calls() == 0);
  CHECK(rec.final_quality == doctest::Approx(0.9));
}

TEST_CASE("mrc synthesis is accepted only when it beats the best branch") {
  auto task = simple_task();
  SUBCASE("improvement accepted") {
    Fixture fx({scripted({"Q=0.7"}), scripted({"Q=0.6"})});
    auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.85"});
    fx.ctx.synthesizer = synth;
    auto rec = run_mrc(fx.ctx, task);
    CHECK(rec.combined_text == "Q=0.85");
    CHECK(rec.final_quality == doctest::Approx(0.85));
    CHECK_FALSE(rec.flags.count("synthesis_reverted"));
    // synthesis runs cold and presents weighted branches, best first
    CHECK(synth->temperatures[0] == doctest::Approx(0.1));
    auto prompt = synth->prompts[0];
    CHECK(prompt.find("[BEST]") != std::string::npos);
    CHECK(prompt.find("[ALT-1]") != std::string::npos);
    CHECK(prompt.find("weight=0.538") != std::string::npos);  // 0.7 / 1.3
  }
  SUBCASE("regression reverted") {
    Fixture fx({scripted({"Q=0.7"}), scripted({"Q=0.6"})});
    fx.ctx.synthesizer = scripted({"Q=0.65"});
    auto rec = run_mrc(fx.ctx, task);
    CHECK(rec.flags.count("synthesis_reverted"));
    CHECK(rec.combined_text == "Q=0.7");
    CHECK(rec.final_quality == doctest::Approx(0.7));
  }
  SUBCASE("identity output detected without rescoring") {
    Fixture fx({scripted({"Q=0.7"}), scripted({"Q=0.6"})});
    fx.ctx.synthesizer = scripted({"Q=0.7"});
    auto rec = run_mrc(fx.ctx, task);
    CHECK(rec.flags.count("identity_synthesis"));
    CHECK(rec.final_quality == doctest::Approx(0.7));
  }
  SUBCASE("synthesizer failure falls back to selection") {
    Fixture fx({scripted({"Q=0.7"}), scripted({"Q=0.6"})});
    fx.ctx.synthesizer = std::make_shared<FailingChannel>();
    auto rec = run_mrc(fx.ctx, task);
    CHECK(rec.flags.count("synth_failed"));
    CHECK(rec.final_quality == doctest::Approx(0.7));
  }
}

TEST_CASE("mrc requires at least two channels") {
  Fixture fx({scripted({"Q=0.7"})});
  CHECK_THROWS_AS(run_mrc(fx.ctx, simple_task()), ValidationError);
}

TEST_CASE("egc uses uniform weights and no fast path") {
  Fixture fx({scripted({"Q=0.9"}), scripted({"Q=0.1"})});
  auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.92"});
  fx.ctx.synthesizer = synth;
  auto rec = run_egc(fx.ctx, simple_task());
  // even with a dominant branch, EGC still synthesizes
  CHECK(synth->calls() == 1);
  CHECK(synth->temperatures[0] == doctest::Approx(0.2));
  CHECK(synth->prompts[0].find("weight=0.5") != std::string::npos);
  CHECK(rec.final_quality == doctest::Approx(0.92));
}

TEST_CASE("egc with one channel degenerates to selection") {
  Fixture fx({scripted({"Q=0.55"})});
  auto rec = run_egc(fx.ctx, simple_task());
  CHECK(rec.final_quality == doctest::Approx(0.55));
  CHECK(rec.overhead_outputs.empty());
}

TEST_CASE("wide-pool selection cycles channels at temperature 0.7") {
  auto a = std::make_shared<ScriptedChannel>(
      std::vector<std::string>{"Q=0.3", "Q=0.8", "Q=0.4"});
  auto b = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.5", "Q=0.6"});
  Fixture fx({a, b});
  auto rec = run_sc_n(fx.ctx, simple_task(), 5);
  CHECK(a->calls() == 3);
  CHECK(b->calls() == 2);
  for (double t : a->temperatures) CHECK(t == doctest::Approx(0.7));
  CHECK(rec.rounds == 5);
  CHECK(rec.individual_outputs.size() == 5);
  CHECK(rec.final_quality == doctest::Approx(0.8));
  CHECK_THROWS_AS(run_sc_n(fx.ctx, simple_task(), 0), ValidationError);
}

TEST_CASE("cluster label parsing") {
  auto raw = parse_cluster_labels("[1, 1, 2]", 3);
  CHECK_FALSE(raw.singleton_fallback);
  CHECK(raw.labels == std::vector<std::string>{"1", "1", "2"});

  auto fenced = parse_cluster_labels("```json\n[\"a\", \"b\", \"a\"]\n```", 3);
  CHECK_FALSE(fenced.singleton_fallback);
  CHECK(fenced.labels == std::vector<std::string>{"a", "b", "a"});

  auto inlined = parse_cluster_labels("The groups are [2, 2, 1] as requested.", 3);
  CHECK_FALSE(inlined.singleton_fallback);
  CHECK(inlined.labels == std::vector<std::string>{"2", "2", "1"});

  CHECK(parse_cluster_labels("[1, 2]", 3).singleton_fallback);  // wrong length
  CHECK(parse_cluster_labels("no labels here", 3).singleton_fallback);
  auto fb = parse_cluster_labels("", 2);
  CHECK(fb.labels.size() == 2);
  CHECK(fb.labels[0] != fb.labels[1]);
}

TEST_CASE("discrete mrc picks the cluster with the largest score sum") {
  auto gen = std::make_shared<ScriptedChannel>(
      std::vector<std::string>{"Q=0.6", "Q=0.7", "Q=0.5", "Q=0.65"});
  Fixture fx({gen});
  auto voter = std::make_shared<ScriptedChannel>(std::vector<std::string>{"[1, 2, 1, 2]"});
  fx.ctx.voter = voter;
  auto rec = run_mrc_discrete_n(fx.ctx, simple_task(), 4);
  // cluster 2 = {0.7, 0.65} sums to 1.35 and beats cluster 1 at 1.1
  CHECK(rec.combined_text == "Q=0.7");
  CHECK(rec.final_quality == doctest::Approx(0.7));
  CHECK_FALSE(rec.flags.count("singleton_fallback"));
  CHECK(voter->temperatures[0] == doctest::Approx(0.0));
  CHECK(voter->prompts[0].find("1. Q=0.6") != std::string::npos);
}

TEST_CASE("discrete mrc majority beats a lone high scorer") {
  auto gen = std::make_shared<ScriptedChannel>(
      std::vector<std::string>{"Q=0.5", "Q=0.55", "Q=0.9", "Q=0.5"});
  Fixture fx({gen});
  fx.ctx.voter = scripted({"[1, 1, 2, 1]"});
  auto rec = run_mrc_discrete_n(fx.ctx, simple_task(), 4);
  // the agreeing cluster sums to 1.55 > 0.9; its best member is returned
  CHECK(rec.final_quality == doctest::Approx(0.55));
}

TEST_CASE("discrete mrc falls back to singletons on voter trouble") {
  SUBCASE("garbage labels") {
    auto gen = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.4", "Q=0.8"});
    Fixture fx({gen});
    fx.ctx.voter = scripted({"I cannot cluster these."});
    auto rec = run_mrc_discrete_n(fx.ctx, simple_task(), 2);
    CHECK(rec.flags.count("singleton_fallback"));
    CHECK(rec.final_quality == doctest::Approx(0.8));
  }
  SUBCASE("voter transport failure") {
    auto gen = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.4", "Q=0.8"});
    Fixture fx({gen});
    fx.ctx.voter = std::make_shared<FailingChannel>();
    auto rec = run_mrc_discrete_n(fx.ctx, simple_task(), 2);
    CHECK(rec.flags.count("voter_failed"));
    CHECK(rec.flags.count("singleton_fallback"));
    CHECK(rec.final_quality == doctest::Approx(0.8));
  }
}

TEST_CASE("soft mrc weights by intrinsic confidence and judges once") {
  Fixture fx({scripted({"Q=0.8"}, 0.001, true), scripted({"Q=0.5"}, 0.001, true)});
  auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.9"});
  fx.ctx.synthesizer = synth;
  auto rec = run_soft_mrc(fx.ctx, simple_task());
  REQUIRE(rec.individual_scores.size() == 2);
  // only the top-confidence branch gets a judge score; the other is sentinel
  CHECK(rec.individual_scores[0] == doctest::Approx(0.8));
  CHECK(rec.individual_scores[1] == doctest::Approx(-1.0));
  CHECK(synth->temperatures[0] == doctest::Approx(0.1));
  // prompt weights are normalized confidences: 0.8 / 1.3
  CHECK(synth->prompts[0].find("weight=0.615") != std::string::npos);
  CHECK(rec.combined_text == "Q=0.9");
  CHECK(rec.final_quality == doctest::Approx(0.9));
}

TEST_CASE("soft mrc guard reverts a losing synthesis") {
  Fixture fx({scripted({"Q=0.8"}, 0.001, true), scripted({"Q=0.5"}, 0.001, true)});
  fx.ctx.synthesizer = scripted({"Q=0.6"});
  auto rec = run_soft_mrc(fx.ctx, simple_task());
  CHECK(rec.flags.count("synthesis_reverted"));
  CHECK(rec.final_quality == doctest::Approx(0.8));
}

TEST_CASE("soft mrc requires logprob support everywhere") {
  Fixture fx({scripted({"Q=0.8"}, 0.001, true), scripted({"Q=0.5"}, 0.001, false)});
  CHECK_THROWS_AS(run_soft_mrc(fx.ctx, simple_task()), CapabilityError);
}
