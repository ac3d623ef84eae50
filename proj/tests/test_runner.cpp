#include <catch2/catch.hpp>

#include <memory>

#include "support/helpers.hpp"
#include "tritier/mock.hpp"
#include "tritier/runner.hpp"

using namespace tritier;

namespace {

std::vector<ModelEndpoint> two_models() {
    ModelEndpoint a;
    a.provider = "mock";
    a.model_name = "model-a";
    a.requests_per_minute = 100000;
    ModelEndpoint b = a;
    b.model_name = "model-b";
    return {a, b};
}

GenerationOptions fixture_options() {
    GenerationOptions o;
    o.image_root = testutil::fixtures_dir();
    return o;
}

}  // namespace

TEST_CASE("generation prompt is unified and deterministic") {
    const auto pairs = testutil::fixture_pairs();
    auto [sys1, user1] = prompts::render_generation_prompt(pairs[0]);
    auto [sys2, user2] = prompts::render_generation_prompt(pairs[0]);
    CHECK(sys1 == sys2);
    CHECK(user1 == user2);
    CHECK(user1.find(pairs[0].title) != std::string::npos);
    CHECK(user1.find(pairs[0].artist) != std::string::npos);
    for (const char* lvl : {"L1", "L2", "L3", "L4", "L5"})
        CHECK(sys1.find(lvl) != std::string::npos);

    SECTION("pairs differing only in the title differ only in the title slot") {
        CritiquePair other = pairs[0];
        other.title = "A Different Name";
        auto [sys3, user3] = prompts::render_generation_prompt(other);
        CHECK(sys3 == sys1);
        CHECK(user3 != user1);
        std::string patched = user1;
        const auto at = patched.find(pairs[0].title);
        REQUIRE(at != std::string::npos);
        patched.replace(at, pairs[0].title.size(), other.title);
        CHECK(patched == user3);
    }
}

TEST_CASE("run_generation covers the whole grid and resumes") {
    const auto pairs_all = testutil::fixture_pairs();
    const std::vector<CritiquePair> pairs(pairs_all.begin(), pairs_all.begin() + 3);
    const auto models = two_models();

    SECTION("2 models x 3 pairs yields 6 records") {
        testutil::TempDir tmp("gen");
        RunStore store(tmp.path());
        auto mock = std::make_shared<MockTransport>(make_deterministic_mock(5));
        Gateway gw(mock, RetryPolicy{}, [](double) {});
        const auto records = run_generation(gw, models, pairs, store, fixture_options());
        CHECK(records.size() == 6);
        CHECK(mock->calls() == 6);
        for (const auto& r : records) CHECK(r.ok);
    }
    SECTION("resume after partial completion only runs the gap") {
        testutil::TempDir tmp("resume");
        RunStore store(tmp.path());
        auto mock = std::make_shared<MockTransport>(make_deterministic_mock(5));
        Gateway gw(mock, RetryPolicy{}, [](double) {});
        // First run 2 of 3 pairs for both models.
        const std::vector<CritiquePair> first(pairs.begin(), pairs.begin() + 2);
        run_generation(gw, models, first, store, fixture_options());
        CHECK(mock->calls() == 4);
        // Resuming over all 3 pairs adds exactly 2 transport calls.
        const auto records = run_generation(gw, models, pairs, store, fixture_options());
        CHECK(records.size() == 6);
        CHECK(mock->calls() == 6);
        // Second resume adds none.
        run_generation(gw, models, pairs, store, fixture_options());
        CHECK(mock->calls() == 6);
    }
    SECTION("failures are recorded, not dropped") {
        testutil::TempDir tmp("fail");
        RunStore store(tmp.path());
        std::vector<CritiquePair> with_bad = pairs;
        with_bad[1].image_ref = "images/does_not_exist.ppm";
        auto mock = std::make_shared<MockTransport>(make_deterministic_mock(5));
        Gateway gw(mock, RetryPolicy{}, [](double) {});
        const auto records = run_generation(gw, models, with_bad, store, fixture_options());
        CHECK(records.size() == 6);
        std::size_t ok = 0, failed = 0;
        for (const auto& r : records) (r.ok ? ok : failed)++;
        CHECK(ok == 4);
        CHECK(failed == 2);  // one per model
        for (const auto& r : records)
            if (!r.ok) CHECK_FALSE(r.error.empty());
    }
}

TEST_CASE("generated critique rows round-trip through JSONL") {
    GeneratedCritique g;
    g.pair_id = "p";
    g.model_name = "m";
    g.text = "body";
    g.latency_s = 0.5;
    g.created_at = "2026-01-01T00:00:00Z";
    const auto j = generated_critique_to_json(g);
    const auto back = generated_critique_from_json(j);
    CHECK(back.pair_id == "p");
    CHECK(back.text == "body");
    CHECK(back.ok);

    GeneratedCritique bad = g;
    bad.ok = false;
    bad.error = "boom";
    bad.text.clear();
    const auto jb = generated_critique_to_json(bad);
    const auto back_bad = generated_critique_from_json(jb);
    CHECK_FALSE(back_bad.ok);
    CHECK(back_bad.error == "boom");

    // a success row with empty text violates the record invariant
    json broken = j;
    broken["text"] = "";
    CHECK_THROWS_AS(generated_critique_from_json(broken), Error);
}
