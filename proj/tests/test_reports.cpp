#include <catch2/catch.hpp>

#include "support/helpers.hpp"
#include "tritier/calibration.hpp"
#include "tritier/reports.hpp"
#include "tritier/rng.hpp"

using namespace tritier;

namespace {

Tier2Record record(const std::string& pair, const std::string& model, double all,
                   const std::string& judge = "j") {
    Tier2Record r;
    r.pair_id = pair;
    r.model_name = model;
    r.judge_name = judge;
    r.scores = {all, all, all, all, all};
    r.s2 = s2_aggregate(r.scores);
    r.latency_s = 1.0;
    return r;
}

CalibrationBundle identity_bundle() {
    std::vector<CalibrationPoint> train;
    for (double v : {1.0, 2.0, 3.0, 4.0, 5.0}) {
        CalibrationPoint p;
        for (std::size_t d = 0; d < 5; ++d) {
            p.judge.set_dim(d, v);
            p.human.set_dim(d, v);
        }
        train.push_back(std::move(p));
    }
    return fit_bundle(train);
}

}  // namespace

TEST_CASE("tier_gap_report joins on (pair, model) and pairs the dimensions") {
    std::vector<std::pair<std::string, Tier1Report>> tier1_rows;
    std::vector<Tier2Record> tier2;
    for (int i = 0; i < 6; ++i) {
        const std::string pair = "p" + std::to_string(i);
        const double x = 0.2 + 0.1 * i;
        Tier1Report t1 = tier1_from_raw(pair, x, x / 2, x / 3, x / 4);
        tier1_rows.emplace_back("m", t1);
        tier2.push_back(record(pair, "m", std::clamp(1.0 + x * 3.5, 1.0, 5.0)));
    }
    const auto rep = tier_gap_report(tier1_rows, tier2);
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.joined == 6);
    CHECK(rep.rows[0].tier1_metric == "dcr");
    CHECK(rep.rows[0].tier2_dimension == "coverage");
    CHECK(rep.rows[3].tier1_metric == "lqs");
    CHECK(rep.rows[3].tier2_dimension == "quality");

    SECTION("equal tiers give zero gaps") {
        std::vector<std::pair<std::string, Tier1Report>> t1;
        std::vector<Tier2Record> t2;
        for (int i = 0; i < 5; ++i) {
            const std::string pair = "q" + std::to_string(i);
            const double raw = 0.1 + 0.2 * i;
            t1.emplace_back("m", tier1_from_raw(pair, raw, raw, raw, raw));
            t2.push_back(record(pair, "m", rescale(raw)));
        }
        const auto zero = tier_gap_report(t1, t2);
        for (const auto& row : zero.rows) CHECK(row.mean_gap == Approx(0.0).margin(1e-9));
    }
    SECTION("a +1 offset on one pairing shows up as +1") {
        std::vector<std::pair<std::string, Tier1Report>> t1;
        std::vector<Tier2Record> t2;
        for (int i = 0; i < 5; ++i) {
            const std::string pair = "q" + std::to_string(i);
            const double raw = 0.1 + 0.15 * i;
            t1.emplace_back("m", tier1_from_raw(pair, raw + 0.25, raw, raw, raw));
            t2.push_back(record(pair, "m", rescale(raw)));
        }
        const auto rep2 = tier_gap_report(t1, t2);
        CHECK(rep2.rows[0].mean_gap == Approx(1.0).margin(1e-9));  // 0.25 raw = 1.0 rescaled
        CHECK(rep2.rows[1].mean_gap == Approx(0.0).margin(1e-9));
    }
    SECTION("empty join errors") {
        CHECK_THROWS_AS(tier_gap_report(tier1_rows, {record("zz", "other-model", 3)}), Error);
    }
}

TEST_CASE("culture_gap_report orders cultures and computes pairwise effects") {
    const auto pairs = testutil::fixture_pairs();
    std::vector<ScoredRecord> records;
    Rng rng(17);
    // CN shifted +0.5 over WE with matched spread; JP/KR/IS/IN in between.
    for (int rep = 0; rep < 10; ++rep) {
        const double base = 3.0 + 0.05 * (rep % 5);
        records.push_back({"c" + std::to_string(rep), "m", Culture::CN, base + 0.5});
        records.push_back({"w" + std::to_string(rep), "m", Culture::WE, base});
        records.push_back({"j" + std::to_string(rep), "m", Culture::JP, base + 0.25});
        records.push_back({"k" + std::to_string(rep), "m", Culture::KR, base + 0.1});
        records.push_back({"i" + std::to_string(rep), "m", Culture::IS, base + 0.2});
        records.push_back({"n" + std::to_string(rep), "m", Culture::IN, base + 0.3});
    }
    const auto rep = culture_gap_report(records);
    REQUIRE(rep.means.size() == 6);
    CHECK(rep.means[0].culture == Culture::CN);  // highest mean first
    CHECK(rep.pair_effects.size() == 15);
    // per-model CN-WE delta
    REQUIRE(rep.model_deltas.size() == 1);
    CHECK(rep.model_deltas[0].chinese_minus_western == Approx(0.5).margin(1e-9));

    SECTION("identical distributions give zero d everywhere") {
        std::vector<ScoredRecord> flat;
        for (int i = 0; i < 8; ++i) {
            flat.push_back({"a" + std::to_string(i), "m", Culture::CN, 3.0 + 0.1 * (i % 4)});
            flat.push_back({"b" + std::to_string(i), "m", Culture::WE, 3.0 + 0.1 * (i % 4)});
        }
        const auto r = culture_gap_report(flat);
        for (const auto& eff : r.pair_effects) CHECK(eff.cohens_d == Approx(0.0).margin(1e-9));
        CHECK(r.model_deltas[0].chinese_minus_western == Approx(0.0).margin(1e-12));
    }
    SECTION("a +0.5 shift at sd 0.5 gives d = 1 by definition") {
        // {x-0.5, x, x+0.5} has sample variance exactly 0.25 (sd 0.5).
        std::vector<ScoredRecord> two = {
            {"a0", "m", Culture::CN, 3.0}, {"a1", "m", Culture::CN, 3.5},
            {"a2", "m", Culture::CN, 4.0}, {"b0", "m", Culture::WE, 2.5},
            {"b1", "m", Culture::WE, 3.0}, {"b2", "m", Culture::WE, 3.5}};
        const auto r = culture_gap_report(two);
        REQUIRE(r.pair_effects.size() == 1);
        CHECK(r.pair_effects[0].cohens_d == Approx(1.0).margin(1e-9));
    }
    SECTION("cultures with fewer than 2 samples are excluded and reported") {
        std::vector<ScoredRecord> sparse;
        for (int i = 0; i < 4; ++i)
            sparse.push_back({"a" + std::to_string(i), "m", Culture::CN, 3.0 + 0.2 * i});
        for (int i = 0; i < 4; ++i)
            sparse.push_back({"b" + std::to_string(i), "m", Culture::WE, 3.1 + 0.2 * i});
        sparse.push_back({"solo", "m", Culture::JP, 4.0});
        const auto r = culture_gap_report(sparse);
        CHECK(r.means.size() == 2);
        REQUIRE(r.excluded_cultures == std::vector<std::string>{"JP"});
    }
}

TEST_CASE("leaderboard sorts, breaks ties and appends the sigma footer") {
    const auto bundle = identity_bundle();
    SECTION("two constant models order by s2*") {
        std::vector<Tier2Record> records;
        for (int i = 0; i < 3; ++i) {
            records.push_back(record("p" + std::to_string(i), "strong", 4.0));
            records.push_back(record("p" + std::to_string(i), "weak", 3.0));
        }
        const auto board = leaderboard(records, bundle);
        REQUIRE(board.rows.size() == 2);
        CHECK(board.rows[0].model_name == "strong");
        CHECK(board.rows[0].s2_star == Approx(4.0).margin(1e-9));
        CHECK(board.rows[1].model_name == "weak");
    }
    SECTION("exact ties break by alignment then name") {
        std::vector<Tier2Record> records;
        Tier2Record a = record("p", "bbb", 4.0);
        Tier2Record b = record("p", "aaa", 4.0);
        records.push_back(a);
        records.push_back(b);
        const auto board = leaderboard(records, bundle);
        CHECK(board.rows[0].model_name == "aaa");  // same alignment, name ascending
        Tier2Record c = record("p", "ccc", 4.0);
        c.scores.alignment = 4.5;
        c.scores.coverage = 3.5;  // same mean
        c.s2 = s2_aggregate(c.scores);
        records.push_back(c);
        const auto board2 = leaderboard(records, bundle);
        CHECK(board2.rows[0].model_name == "ccc");  // higher alignment wins the tie
    }
    SECTION("single model: sigma footer all zeros") {
        const auto board = leaderboard({record("p", "only", 3.5)}, bundle);
        REQUIRE(board.rows.size() == 1);
        for (std::size_t d = 0; d < 5; ++d)
            CHECK(board.dimension_sigma.dim(d) == Approx(0.0).margin(1e-12));
    }
    SECTION("tier1 aggregates are averaged into the rows") {
        std::map<std::pair<std::string, std::string>, double> t1 = {
            {{"only", "p1"}, 3.0}, {{"only", "p2"}, 4.0}};
        const auto board =
            leaderboard({record("p1", "only", 3.5), record("p2", "only", 3.5)}, bundle, t1);
        REQUIRE(board.rows[0].tier1.has_value());
        CHECK(*board.rows[0].tier1 == Approx(3.5).margin(1e-12));
        // rows without tier1 data carry no value instead of a fake score
        const auto bare = leaderboard({record("p1", "only", 3.5)}, bundle);
        CHECK_FALSE(bare.rows[0].tier1.has_value());
    }
    SECTION("ordering is stable under input permutation") {
        std::vector<Tier2Record> records;
        Rng rng(23);
        for (int m = 0; m < 5; ++m)
            for (int p = 0; p < 4; ++p) {
                const double v = 1.0 + 0.5 * ((m * 7 + p * 3) % 8);
                records.push_back(
                    record("p" + std::to_string(p), "model" + std::to_string(m), v));
            }
        const auto board1 = leaderboard(records, bundle);
        std::vector<Tier2Record> shuffled = records;
        rng.shuffle(shuffled);
        const auto board2 = leaderboard(shuffled, bundle);
        REQUIRE(board1.rows.size() == board2.rows.size());
        for (std::size_t i = 0; i < board1.rows.size(); ++i)
            CHECK(board1.rows[i].model_name == board2.rows[i].model_name);
    }
}

TEST_CASE("report renderers emit deterministic text") {
    const auto bundle = identity_bundle();
    std::vector<Tier2Record> records = {record("p1", "m1", 4.0), record("p2", "m1", 3.0),
                                        record("p1", "m2", 2.0)};
    const auto board = leaderboard(records, bundle);
    CHECK(leaderboard_to_text(board) == leaderboard_to_text(board));
    CHECK(leaderboard_to_json(board).dump(2) == leaderboard_to_json(board).dump(2));
    const std::string text = leaderboard_to_text(board);
    CHECK(text.find("m1") != std::string::npos);
    CHECK(text.find("std (sigma)") != std::string::npos);
}
