#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tritier/corpus.hpp"
#include "tritier/error.hpp"
#include "tritier/isotonic.hpp"
#include "tritier/judge_types.hpp"
#include "tritier/rng.hpp"

namespace tritier {

// ─── Bundle ─────────────────────────────────────────────────────────────────

// One monotone map per judge dimension; the aggregate is the mean of the five
// calibrated values, clamped back to [1,5].
struct CalibrationBundle {
    std::array<IsotonicModel, 5> per_dimension;  // kDimensionNames order
    std::string aggregate_rule = "mean-of-calibrated-dimensions";

    bool fitted() const {
        for (const auto& m : per_dimension)
            if (!m.fitted()) return false;
        return true;
    }
};

// One calibration training/evaluation observation: the judge's five scores
// for a critique plus the rater-mean human scores for the same critique.
struct CalibrationPoint {
    std::string pair_id;
    Culture culture = Culture::CN;
    DimensionScores judge;
    DimensionScores human;
};

inline CalibrationBundle fit_bundle(const std::vector<CalibrationPoint>& train) {
    CalibrationBundle bundle;
    for (std::size_t d = 0; d < 5; ++d) {
        std::vector<std::pair<double, double>> points;
        points.reserve(train.size());
        for (const auto& p : train) points.emplace_back(p.judge.dim(d), p.human.dim(d));
        if (points.size() < 2)
            fail(Errc::insufficient_data,
                 std::string("dimension '") + kDimensionNames[d] +
                     "': need at least 2 training pairs");
        try {
            bundle.per_dimension[d] = fit_isotonic(std::move(points));
        } catch (const Error& e) {
            if (e.code() == Errc::insufficient_data)
                fail(Errc::insufficient_data,
                     std::string("dimension '") + kDimensionNames[d] + "': " + e.what());
            throw;
        }
    }
    return bundle;
}

// S_II* for one record: calibrate each dimension, average, clamp to scale.
inline double calibrated_score(const CalibrationBundle& bundle, const DimensionScores& scores) {
    if (!bundle.fitted()) fail(Errc::validation, "calibration bundle not fitted");
    double sum = 0;
    for (std::size_t d = 0; d < 5; ++d) sum += apply(bundle.per_dimension[d], scores.dim(d));
    return std::clamp(sum / 5.0, 1.0, 5.0);
}

// Single-fit variant: one monotone map fitted directly on the aggregate s2.
inline IsotonicModel fit_aggregate_model(const std::vector<CalibrationPoint>& train) {
    std::vector<std::pair<double, double>> points;
    points.reserve(train.size());
    for (const auto& p : train)
        points.emplace_back(s2_aggregate(p.judge), s2_aggregate(p.human));
    return fit_isotonic(std::move(points));
}

// ─── Held-out evaluation ────────────────────────────────────────────────────

struct CalibrationReport {
    std::array<double, 5> mae_raw{};
    std::array<double, 5> mae_calibrated{};
    double avg_raw = 0;
    double avg_calibrated = 0;
    double delta_pct = 0;  // (cal - raw) / raw * 100
    double aggregate_mae_raw = 0;
    double aggregate_mae_calibrated = 0;
    std::size_t n_test = 0;
};

inline CalibrationReport evaluate_mae(const CalibrationBundle& bundle,
                                      const std::vector<CalibrationPoint>& test) {
    if (test.empty()) fail(Errc::insufficient_data, "calibration evaluation: empty test set");
    CalibrationReport rep;
    rep.n_test = test.size();
    const double n = static_cast<double>(test.size());
    for (const auto& p : test) {
        double cal_sum = 0, raw_sum = 0, human_sum = 0;
        for (std::size_t d = 0; d < 5; ++d) {
            const double raw = p.judge.dim(d);
            const double cal = apply(bundle.per_dimension[d], raw);
            const double human = p.human.dim(d);
            rep.mae_raw[d] += std::abs(raw - human) / n;
            rep.mae_calibrated[d] += std::abs(cal - human) / n;
            raw_sum += raw;
            cal_sum += cal;
            human_sum += human;
        }
        rep.aggregate_mae_raw += std::abs(raw_sum / 5.0 - human_sum / 5.0) / n;
        rep.aggregate_mae_calibrated +=
            std::abs(std::clamp(cal_sum / 5.0, 1.0, 5.0) - human_sum / 5.0) / n;
    }
    for (std::size_t d = 0; d < 5; ++d) {
        rep.avg_raw += rep.mae_raw[d] / 5.0;
        rep.avg_calibrated += rep.mae_calibrated[d] / 5.0;
    }
    rep.delta_pct = rep.avg_raw > 0 ? (rep.avg_calibrated - rep.avg_raw) / rep.avg_raw * 100.0
                                    : 0.0;
    return rep;
}

// ─── Train/test split ───────────────────────────────────────────────────────

// Deterministic seeded split, stratified by culture: per-culture quotas by
// largest remainder, then a seeded shuffle inside each culture. Returns
// (train indices, test indices), both in ascending order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    const std::vector<Culture>& cultures, std::size_t train_count, std::uint64_t seed) {
    const std::size_t total = cultures.size();
    if (train_count >= total)
        fail(Errc::validation, "train_count " + std::to_string(train_count) +
                                   " must be smaller than the record count " +
                                   std::to_string(total));
    std::array<std::vector<std::size_t>, 6> by_culture;
    for (std::size_t i = 0; i < cultures.size(); ++i)
        by_culture[static_cast<std::size_t>(cultures[i])].push_back(i);

    // Largest-remainder allocation of the train quota across cultures.
    std::array<std::size_t, 6> quota{};
    std::array<double, 6> frac{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 6; ++c) {
        const double exact = static_cast<double>(train_count) *
                             static_cast<double>(by_culture[c].size()) /
                             static_cast<double>(total);
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        frac[c] = exact - std::floor(exact);
        assigned += quota[c];
    }
    std::vector<std::size_t> order = {0, 1, 2, 3, 4, 5};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t c : order)
        if (assigned < train_count && frac[c] > 0 && quota[c] < by_culture[c].size()) {
            ++quota[c];
            ++assigned;
        }
    // Fractions exhausted but quota still short (rounding edge): fill where room remains.
    while (assigned < train_count)
        for (std::size_t c : order)
            if (assigned < train_count && quota[c] < by_culture[c].size()) {
                ++quota[c];
                ++assigned;
            }

    Rng rng(seed);
    std::vector<std::size_t> train, test;
    for (std::size_t c = 0; c < 6; ++c) {
        auto idx = by_culture[c];
        rng.shuffle(idx);
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < quota[c] ? train : test).push_back(idx[k]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

inline std::pair<std::vector<CalibrationPoint>, std::vector<CalibrationPoint>> split_train_test(
    const std::vector<CalibrationPoint>& records, std::size_t train_count, std::uint64_t seed) {
    std::vector<Culture> cultures;
    cultures.reserve(records.size());
    for (const auto& r : records) cultures.push_back(r.culture);
    auto [train_idx, test_idx] = stratified_split_indices(cultures, train_count, seed);
    std::vector<CalibrationPoint> train, test;
    train.reserve(train_idx.size());
    test.reserve(test_idx.size());
    for (std::size_t i : train_idx) train.push_back(records[i]);
    for (std::size_t i : test_idx) test.push_back(records[i]);
    return {std::move(train), std::move(test)};
}

// ─── Persistence ────────────────────────────────────────────────────────────

inline json bundle_to_json(const CalibrationBundle& bundle, std::string_view config_digest = {}) {
    json j;
    j["aggregate_rule"] = bundle.aggregate_rule;
    if (!config_digest.empty()) j["config_digest"] = std::string(config_digest);
    json dims = json::object();
    for (std::size_t d = 0; d < 5; ++d) {
        json knots = json::array();
        for (const auto& [x, y] : bundle.per_dimension[d].knots) knots.push_back({x, y});
        dims[kDimensionNames[d]] = std::move(knots);
    }
    j["dimensions"] = std::move(dims);
    return j;
}

inline CalibrationBundle bundle_from_json(const json& j) {
    CalibrationBundle bundle;
    bundle.aggregate_rule = j.value("aggregate_rule", "mean-of-calibrated-dimensions");
    const auto& dims = j.at("dimensions");
    for (std::size_t d = 0; d < 5; ++d) {
        const auto it = dims.find(kDimensionNames[d]);
        if (it == dims.end())
            fail(Errc::schema, std::string("calibration bundle: missing dimension '") +
                                   kDimensionNames[d] + "'");
        IsotonicModel m;
        for (const auto& knot : *it)
            m.knots.emplace_back(knot.at(0).get<double>(), knot.at(1).get<double>());
        m.validate();
        bundle.per_dimension[d] = std::move(m);
    }
    return bundle;
}

inline json calibration_report_to_json(const CalibrationReport& r) {
    json j;
    json dims = json::object();
    for (std::size_t d = 0; d < 5; ++d)
        dims[kDimensionNames[d]] = {{"mae_raw", r.mae_raw[d]},
                                    {"mae_calibrated", r.mae_calibrated[d]}};
    j["dimensions"] = std::move(dims);
    j["avg_mae_raw"] = r.avg_raw;
    j["avg_mae_calibrated"] = r.avg_calibrated;
    j["delta_pct"] = r.delta_pct;
    j["aggregate_mae_raw"] = r.aggregate_mae_raw;
    j["aggregate_mae_calibrated"] = r.aggregate_mae_calibrated;
    j["n_test"] = r.n_test;
    return j;
}

}  // namespace tritier
