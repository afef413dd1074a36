#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "agentcodec/errors.hpp"
#include "agentcodec/rateless.hpp"
#include "test_support.hpp"

using namespace agentcodec;
using namespace agentcodec::testing;

TEST_CASE("fountain stops at n_min when confidence clears gamma immediately") {
  Fixture fx({scripted({"Q=0.9"})});
  auto rec = run_fountain(fx.ctx, simple_task(), 10, 2, 0.94);
  // 0.6 * 0.9 + 0.4 * 1.0 = 0.94 at two identical samples
  CHECK(rec.flags.count("stopped_threshold"));
  CHECK(rec.rounds == 2);
  CHECK(rec.individual_outputs.size() == 2);
  CHECK(rec.final_quality == doctest::Approx(0.9));
}

TEST_CASE("fountain runs to n_max on weak samples") {
  Fixture fx({scripted({"Q=0.3"})});
  auto rec = run_fountain(fx.ctx, simple_task(), 10, 2, 0.85);
  CHECK(rec.flags.count("stopped_max_samples"));
  CHECK(rec.rounds == 10);
  CHECK(rec.final_quality == doctest::Approx(0.3));
}

TEST_CASE("fountain stopping rule blends mean and agreement") {
  // constant 0.85: confidence = 0.6*0.85 + 0.4*1.0 = 0.91
  Fixture fx({scripted({"Q=0.85"})});
  CHECK(run_fountain(fx.ctx, simple_task(), 10, 3, 0.91).rounds == 3);
  Fixture fx2({scripted({"Q=0.85"})});
  CHECK(run_fountain(fx2.ctx, simple_task(), 6, 3, 0.92).rounds == 6);
}

TEST_CASE("fountain cycles channels and temperatures") {
  auto a = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.4"});
  auto b = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.4"});
  Fixture fx({a, b});
  fx.ctx.synthesizer = scripted({"Q=0.4"});
  run_fountain(fx.ctx, simple_task(), 5, 2, 0.99);
  REQUIRE(a->calls() == 3);  // samples 1, 3, 5
  REQUIRE(b->calls() == 2);  // samples 2, 4
  CHECK(a->temperatures[0] == doctest::Approx(0.6));
  CHECK(b->temperatures[0] == doctest::Approx(0.7));
  CHECK(a->temperatures[1] == doctest::Approx(0.8));
  CHECK(b->temperatures[1] == doctest::Approx(0.9));
  CHECK(a->temperatures[2] == doctest::Approx(0.5));  // n=5 wraps
}

TEST_CASE("fountain fast path skips synthesis on a dominant sample") {
  Fixture fx({scripted({"Q=0.8", "Q=0.55"})});
  auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.99"});
  fx.ctx.synthesizer = synth;
  auto rec = run_fountain(fx.ctx, simple_task(), 2, 2, 0.99);
  CHECK(rec.flags.count("fountain_fast_path"));
  CHECK(synth->calls() == 0);
  CHECK(rec.combined_text == "Q=0.8");
  CHECK(rec.final_quality == doctest::Approx(0.8));
}

TEST_CASE("fountain erases laggards and synthesizes the survivors") {
  Fixture fx({scripted({"Q=0.80", "Q=0.75", "Q=0.69"})});
  auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.9"});
  fx.ctx.synthesizer = synth;
  auto rec = run_fountain(fx.ctx, simple_task(), 3, 2, 0.99);
  CHECK(rec.flags.count("erasure"));
  REQUIRE(synth->calls() == 1);
  CHECK(synth->temperatures[0] == doctest::Approx(0.2));
  // the erased 0.69 sample stays out of the synthesis prompt
  CHECK(synth->prompts[0].find("[SAMPLE-2]") != std::string::npos);
  CHECK(synth->prompts[0].find("[SAMPLE-3]") == std::string::npos);
  CHECK(synth->prompts[0].find("Q=0.69") == std::string::npos);
  // score-proportional weight 0.80 / 1.55
  CHECK(synth->prompts[0].find("weight=0.516") != std::string::npos);
  CHECK(rec.combined_text == "Q=0.9");
  CHECK(rec.final_quality == doctest::Approx(0.9));
}

TEST_CASE("fountain guard reverts a losing synthesis") {
  Fixture fx({scripted({"Q=0.80", "Q=0.75"})});
  fx.ctx.synthesizer = scripted({"Q=0.5"});
  auto rec = run_fountain(fx.ctx, simple_task(), 2, 2, 0.99);
  CHECK(rec.flags.count("synthesis_reverted"));
  CHECK(rec.combined_text == "Q=0.80");
  CHECK(rec.final_quality == doctest::Approx(0.80));
}

TEST_CASE("fountain identity synthesis is detected without rescoring") {
  Fixture fx({scripted({"Q=0.80", "Q=0.75"})});
  fx.ctx.synthesizer = scripted({"Q=0.80"});
  auto rec = run_fountain(fx.ctx, simple_task(), 2, 2, 0.99);
  CHECK(rec.flags.count("identity_synthesis"));
  CHECK(rec.final_quality == doctest::Approx(0.80));
}

TEST_CASE("fountain degenerate single-sample configuration") {
  Fixture fx({scripted({"Q=0.6"})});
  auto rec = run_fountain(fx.ctx, simple_task(), 1, 1, 0.0);
  CHECK(rec.rounds == 1);
  CHECK(rec.final_quality == doctest::Approx(0.6));
  CHECK(rec.overhead_outputs.empty());
}

TEST_CASE("fountain parameter validation") {
  Fixture fx({scripted({"Q=0.6"})});
  CHECK_THROWS_AS(run_fountain(fx.ctx, simple_task(), 5, 0, 0.85), ValidationError);
  CHECK_THROWS_AS(run_fountain(fx.ctx, simple_task(), 2, 3, 0.85), ValidationError);
}

TEST_CASE("fountain tolerates partial sample failures") {
  Fixture fx({std::make_shared<FailingChannel>(), scripted({"Q=0.7"})});
  auto rec = run_fountain(fx.ctx, simple_task(), 4, 2, 0.99);
  CHECK(rec.flags.count("sample_failed"));
  CHECK(rec.individual_outputs.size() == 2);
  CHECK(rec.final_quality == doctest::Approx(0.7));

  Fixture dead({std::make_shared<FailingChannel>()});
  CHECK_THROWS_AS(run_fountain(dead.ctx, simple_task(), 3, 2, 0.85), TransportError);
}

TEST_CASE("soft fountain needs logprobs everywhere") {
  Fixture fx({scripted({"Q=0.8"}, 0.001, true), scripted({"Q=0.5"}, 0.001, false)});
  CHECK_THROWS_AS(run_soft_fountain(fx.ctx, simple_task(), 4, 2, 0.85), CapabilityError);
}

TEST_CASE("soft fountain half-max erasure leaves the confident sample") {
  Fixture fx({scripted({"Q=0.8", "Q=0.3"}, 0.001, true)});
  auto rec = run_soft_fountain(fx.ctx, simple_task(), 2, 2, 0.85);
  CHECK(rec.flags.count("erasure"));
  CHECK(rec.overhead_outputs.empty());  // lone survivor, nothing to synthesize
  CHECK(rec.combined_text == "Q=0.8");
  CHECK(rec.final_quality == doctest::Approx(0.8));
  // only the judged top-confidence sample has a measured score
  REQUIRE(rec.individual_scores.size() == 2);
  CHECK(rec.individual_scores[0] == doctest::Approx(0.8));
  CHECK(rec.individual_scores[1] == doctest::Approx(-1.0));
}

TEST_CASE("soft fountain synthesizes close survivors under the guard") {
  Fixture fx({scripted({"Q=0.8", "Q=0.7"}, 0.001, true)});
  auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.9"});
  fx.ctx.synthesizer = synth;
  auto rec = run_soft_fountain(fx.ctx, simple_task(), 2, 2, 0.95);
  CHECK(synth->calls() == 1);
  CHECK(rec.combined_text == "Q=0.9");
  CHECK(rec.final_quality == doctest::Approx(0.9));

  Fixture fx2({scripted({"Q=0.8", "Q=0.7"}, 0.001, true)});
  fx2.ctx.synthesizer = scripted({"Q=0.5"});
  auto reverted = run_soft_fountain(fx2.ctx, simple_task(), 2, 2, 0.95);
  CHECK(reverted.flags.count("synthesis_reverted"));
  CHECK(reverted.final_quality == doctest::Approx(0.8));
}

TEST_CASE("soft fountain fast path on a dominant confidence") {
  Fixture fx({scripted({"Q=0.9", "Q=0.5"}, 0.001, true)});
  auto synth = std::make_shared<ScriptedChannel>(std::vector<std::string>{"Q=0.99"});
  fx.ctx.synthesizer = synth;
  auto rec = run_soft_fountain(fx.ctx, simple_task(), 2, 2, 0.95);
  CHECK(rec.flags.count("fountain_fast_path"));
  CHECK(synth->calls() == 0);
  CHECK(rec.final_quality == doctest::Approx(0.9));
}
