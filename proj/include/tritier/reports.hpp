#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tritier/calibration.hpp"
#include "tritier/corpus.hpp"
#include "tritier/error.hpp"
#include "tritier/judge.hpp"
#include "tritier/stats.hpp"
#include "tritier/tier1.hpp"

namespace tritier {

namespace detail {

inline std::string fmt(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace detail

// ─── Tier I vs Tier II gap ──────────────────────────────────────────────────

// Fixed pairing between the automated metrics and the judge dimensions;
// accuracy has no automated counterpart.
struct TierGapPairing {
    const char* tier1_metric;
    const char* tier2_dimension;
};

inline constexpr std::array<TierGapPairing, 4> kTierGapPairings = {{
    {"dcr", "coverage"},
    {"csa", "alignment"},
    {"cds", "depth"},
    {"lqs", "quality"},
}};

struct TierGapRow {
    std::string tier1_metric;
    std::string tier2_dimension;
    double mean_gap = 0;              // mean(rescaled Tier I - Tier II dimension)
    std::optional<double> icc;        // empty when degenerate
    std::size_t n = 0;
};

struct TierGapReport {
    std::vector<TierGapRow> rows;
    std::size_t joined = 0;
};

// tier1 rows are (model_name, report); joined with tier2 on (pair, model).
inline TierGapReport tier_gap_report(
    const std::vector<std::pair<std::string, Tier1Report>>& tier1_rows,
    const std::vector<Tier2Record>& tier2_records) {
    std::map<std::pair<std::string, std::string>, const Tier1Report*> index;
    for (const auto& [model, rep] : tier1_rows) index[{model, rep.pair_id}] = &rep;
    std::array<std::vector<double>, 4> t1_vals, t2_vals;
    std::size_t joined = 0;
    for (const auto& rec : tier2_records) {
        auto it = index.find({rec.model_name, rec.pair_id});
        if (it == index.end()) continue;
        ++joined;
        const Tier1Report& t1 = *it->second;
        const double t1_rescaled[4] = {t1.dcr, t1.csa, t1.cds, t1.lqs};
        const double t2_dims[4] = {rec.scores.coverage, rec.scores.alignment, rec.scores.depth,
                                   rec.scores.quality};
        for (std::size_t k = 0; k < 4; ++k) {
            t1_vals[k].push_back(t1_rescaled[k]);
            t2_vals[k].push_back(t2_dims[k]);
        }
    }
    if (joined == 0) fail(Errc::insufficient_data, "tier gap: empty join");
    TierGapReport out;
    out.joined = joined;
    for (std::size_t k = 0; k < 4; ++k) {
        TierGapRow row;
        row.tier1_metric = kTierGapPairings[k].tier1_metric;
        row.tier2_dimension = kTierGapPairings[k].tier2_dimension;
        row.n = t1_vals[k].size();
        double gap = 0;
        for (std::size_t i = 0; i < t1_vals[k].size(); ++i)
            gap += (t1_vals[k][i] - t2_vals[k][i]) / static_cast<double>(t1_vals[k].size());
        row.mean_gap = gap;
        if (t1_vals[k].size() >= 3) {
            try {
                row.icc = cross_judge_icc(t1_vals[k], t2_vals[k]);
            } catch (const Error&) {
                // degenerate column; leave empty
            }
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

inline json tier_gap_to_json(const TierGapReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json j;
        j["tier1_metric"] = row.tier1_metric;
        j["tier2_dimension"] = row.tier2_dimension;
        j["mean_gap"] = row.mean_gap;
        j["icc"] = row.icc ? json(*row.icc) : json(nullptr);
        j["n"] = row.n;
        rows.push_back(std::move(j));
    }
    return {{"pairings", rows}, {"joined_records", r.joined}};
}

inline std::string tier_gap_to_text(const TierGapReport& r) {
    std::string out = "Tier I vs Tier II gap (positive = Tier I overestimates)\n";
    out += "metric  dimension   mean_gap       icc     n\n";
    for (const auto& row : r.rows) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-7s %-10s %+9.3f %9s %5zu\n", row.tier1_metric.c_str(),
                      row.tier2_dimension.c_str(), row.mean_gap,
                      row.icc ? detail::fmt(*row.icc).c_str() : "n/a", row.n);
        out += line;
    }
    return out;
}

// ─── Culture gap ────────────────────────────────────────────────────────────

struct ScoredRecord {
    std::string pair_id;
    std::string model_name;
    Culture culture = Culture::CN;
    double score = 0;  // calibrated aggregate
};

struct CultureMeanRow {
    Culture culture = Culture::CN;
    double mean = 0;
    std::size_t n = 0;
};

struct CulturePairEffect {
    Culture a = Culture::CN, b = Culture::CN;
    double cohens_d = 0;
    double p_value = 1;
};

struct ModelCultureDelta {
    std::string model_name;
    double chinese_minus_western = 0;
};

struct CultureGapReport {
    std::vector<CultureMeanRow> means;            // sorted descending by mean
    std::vector<CulturePairEffect> pair_effects;  // cultures with >= 2 samples
    std::vector<ModelCultureDelta> model_deltas;
    std::vector<std::string> excluded_cultures;   // < 2 samples
};

inline CultureGapReport culture_gap_report(const std::vector<ScoredRecord>& records) {
    std::map<Culture, std::vector<double>> by_culture;
    for (const auto& r : records) by_culture[r.culture].push_back(r.score);
    if (by_culture.size() < 2)
        fail(Errc::insufficient_data, "culture gap needs at least 2 cultures");
    CultureGapReport out;
    std::vector<Culture> usable;
    for (Culture c : kCultures) {
        auto it = by_culture.find(c);
        if (it == by_culture.end()) continue;
        if (it->second.size() < 2) {
            out.excluded_cultures.push_back(culture_code(c));
            continue;
        }
        usable.push_back(c);
        out.means.push_back({c, stats::mean(it->second), it->second.size()});
    }
    std::stable_sort(out.means.begin(), out.means.end(),
                     [](const auto& a, const auto& b) { return a.mean > b.mean; });
    for (std::size_t i = 0; i < usable.size(); ++i)
        for (std::size_t k = i + 1; k < usable.size(); ++k) {
            const auto& a = by_culture[usable[i]];
            const auto& b = by_culture[usable[k]];
            CulturePairEffect eff;
            eff.a = usable[i];
            eff.b = usable[k];
            try {
                eff.cohens_d = stats::cohens_d(a, b);
                eff.p_value = stats::welch_t_test(a, b).p_two_sided;
            } catch (const Error&) {
                eff.cohens_d = 0;
                eff.p_value = 1;
            }
            out.pair_effects.push_back(eff);
        }
    // Per-model Chinese-minus-Western delta.
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> per_model;
    for (const auto& r : records) {
        if (r.culture == Culture::CN) per_model[r.model_name].first.push_back(r.score);
        if (r.culture == Culture::WE) per_model[r.model_name].second.push_back(r.score);
    }
    for (const auto& [model, cw] : per_model) {
        if (cw.first.empty() || cw.second.empty()) continue;
        out.model_deltas.push_back({model, stats::mean(cw.first) - stats::mean(cw.second)});
    }
    return out;
}

inline json culture_gap_to_json(const CultureGapReport& r) {
    json means = json::array();
    for (const auto& m : r.means)
        means.push_back({{"culture", culture_code(m.culture)}, {"mean", m.mean}, {"n", m.n}});
    json pairs = json::array();
    for (const auto& p : r.pair_effects)
        pairs.push_back({{"a", culture_code(p.a)},
                         {"b", culture_code(p.b)},
                         {"cohens_d", p.cohens_d},
                         {"p_value", p.p_value}});
    json deltas = json::array();
    for (const auto& d : r.model_deltas)
        deltas.push_back({{"model", d.model_name}, {"cn_minus_we", d.chinese_minus_western}});
    return {{"culture_means", means},
            {"pairwise_effects", pairs},
            {"model_cn_we_deltas", deltas},
            {"excluded_cultures", r.excluded_cultures}};
}

inline std::string culture_gap_to_text(const CultureGapReport& r) {
    std::string out = "Mean calibrated score by culture\n";
    for (const auto& m : r.means) {
        char line[96];
        std::snprintf(line, sizeof(line), "%-3s %7.3f  (n=%zu)\n", culture_code(m.culture), m.mean,
                      m.n);
        out += line;
    }
    out += "\nPairwise effects (Cohen's d, Welch p)\n";
    for (const auto& p : r.pair_effects) {
        char line[96];
        std::snprintf(line, sizeof(line), "%s vs %s   d=%+6.3f  p=%.4f\n", culture_code(p.a),
                      culture_code(p.b), p.cohens_d, p.p_value);
        out += line;
    }
    out += "\nPer-model Chinese-minus-Western delta\n";
    for (const auto& d : r.model_deltas) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-24s %+6.3f\n", d.model_name.c_str(),
                      d.chinese_minus_western);
        out += line;
    }
    if (!r.excluded_cultures.empty()) {
        out += "\nExcluded (fewer than 2 samples):";
        for (const auto& c : r.excluded_cultures) out += " " + c;
        out += "\n";
    }
    return out;
}

// ─── Leaderboard ────────────────────────────────────────────────────────────

struct LeaderboardRow {
    std::string model_name;
    double s2_star = 0;                 // mean calibrated aggregate
    DimensionScores dimension_means;    // uncalibrated Tier II means
    std::optional<double> tier1;        // mean Tier I aggregate, when computed
    std::size_t n = 0;
};

struct Leaderboard {
    std::vector<LeaderboardRow> rows;   // sorted by s2_star desc
    DimensionScores dimension_sigma;    // population std of the column means
};

// tier1_aggregates: (model, pair) -> Tier I aggregate, optional per cell.
inline Leaderboard leaderboard(const std::vector<Tier2Record>& records,
                               const CalibrationBundle& bundle,
                               const std::map<std::pair<std::string, std::string>, double>&
                                   tier1_aggregates = {}) {
    if (records.empty()) fail(Errc::insufficient_data, "leaderboard: no records");
    std::map<std::string, std::vector<const Tier2Record*>> by_model;
    for (const auto& r : records) by_model[r.model_name].push_back(&r);
    Leaderboard board;
    for (const auto& [model, recs] : by_model) {
        LeaderboardRow row;
        row.model_name = model;
        row.n = recs.size();
        const double n = static_cast<double>(recs.size());
        double t1_sum = 0;
        std::size_t t1_n = 0;
        for (const auto* r : recs) {
            row.s2_star += calibrated_score(bundle, r->scores) / n;
            for (std::size_t d = 0; d < 5; ++d)
                row.dimension_means.set_dim(d, row.dimension_means.dim(d) + r->scores.dim(d) / n);
            auto it = tier1_aggregates.find({model, r->pair_id});
            if (it != tier1_aggregates.end()) {
                t1_sum += it->second;
                ++t1_n;
            }
        }
        if (t1_n > 0) row.tier1 = t1_sum / static_cast<double>(t1_n);
        board.rows.push_back(std::move(row));
    }
    std::stable_sort(board.rows.begin(), board.rows.end(), [](const auto& a, const auto& b) {
        if (a.s2_star != b.s2_star) return a.s2_star > b.s2_star;
        if (a.dimension_means.alignment != b.dimension_means.alignment)
            return a.dimension_means.alignment > b.dimension_means.alignment;
        return a.model_name < b.model_name;
    });
    for (std::size_t d = 0; d < 5; ++d) {
        std::vector<double> col;
        for (const auto& row : board.rows) col.push_back(row.dimension_means.dim(d));
        board.dimension_sigma.set_dim(d, col.size() >= 1 ? stats::population_stddev(col) : 0.0);
    }
    return board;
}

inline json leaderboard_to_json(const Leaderboard& b) {
    json rows = json::array();
    for (const auto& r : b.rows) {
        json j;
        j["model"] = r.model_name;
        j["s2_star"] = r.s2_star;
        for (std::size_t d = 0; d < 5; ++d) j[kDimensionNames[d]] = r.dimension_means.dim(d);
        j["tier1"] = r.tier1 ? json(*r.tier1) : json(nullptr);
        j["n"] = r.n;
        rows.push_back(std::move(j));
    }
    json sigma;
    for (std::size_t d = 0; d < 5; ++d) sigma[kDimensionNames[d]] = b.dimension_sigma.dim(d);
    return {{"rows", rows}, {"dimension_sigma", sigma}};
}

inline std::string leaderboard_to_text(const Leaderboard& b) {
    std::string out =
        "model                     s2*     cov   align  depth    acc   qual   tier1    n\n";
    for (const auto& r : b.rows) {
        char t1[16];
        if (r.tier1) std::snprintf(t1, sizeof(t1), "%5.2f", *r.tier1);
        else std::snprintf(t1, sizeof(t1), "%5s", "--");
        char line[160];
        std::snprintf(line, sizeof(line),
                      "%-24s %5.2f   %5.2f  %5.2f  %5.2f  %5.2f  %5.2f   %s  %3zu\n",
                      r.model_name.c_str(), r.s2_star, r.dimension_means.coverage,
                      r.dimension_means.alignment, r.dimension_means.depth,
                      r.dimension_means.accuracy, r.dimension_means.quality, t1, r.n);
        out += line;
    }
    char sig[160];
    std::snprintf(sig, sizeof(sig),
                  "%-24s %5s   %5.2f  %5.2f  %5.2f  %5.2f  %5.2f\n", "std (sigma)", "",
                  b.dimension_sigma.coverage, b.dimension_sigma.alignment,
                  b.dimension_sigma.depth, b.dimension_sigma.accuracy,
                  b.dimension_sigma.quality);
    out += sig;
    return out;
}

// ─── Judge comparison rendering ─────────────────────────────────────────────

inline json judge_comparison_to_json(const JudgeComparison& c) {
    json rows = json::array();
    for (const auto& r : c.rows)
        rows.push_back({{"judge", r.judge_name},
                        {"mean", r.mean},
                        {"std", r.stddev},
                        {"mean_latency_s", r.mean_latency_s},
                        {"tendency", r.tendency},
                        {"n", r.n}});
    json icc_rows = json::array();
    for (const auto& p : c.pairwise_icc)
        icc_rows.push_back({{"judge_a", p.judge_a},
                            {"judge_b", p.judge_b},
                            {"icc", p.icc ? json(*p.icc) : json(nullptr)},
                            {"n", p.n}});
    return {{"judges", rows}, {"pairwise_icc", icc_rows}, {"excluded", c.excluded}};
}

inline std::string judge_comparison_to_text(const JudgeComparison& c) {
    std::string out = "judge                     mean    std   lat(s)  tendency\n";
    for (const auto& r : c.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-24s %5.2f  %5.2f  %6.1f   %s\n", r.judge_name.c_str(),
                      r.mean, r.stddev, r.mean_latency_s, r.tendency.c_str());
        out += line;
    }
    if (!c.pairwise_icc.empty()) {
        out += "\nCross-judge ICC\n";
        for (const auto& p : c.pairwise_icc) {
            char line[160];
            std::snprintf(line, sizeof(line), "%s vs %s: %s (n=%zu)\n", p.judge_a.c_str(),
                          p.judge_b.c_str(), p.icc ? detail::fmt(*p.icc).c_str() : "n/a", p.n);
            out += line;
        }
    }
    if (!c.excluded.empty()) {
        out += "\nExcluded (no parseable scores):";
        for (const auto& j : c.excluded) out += " " + j;
        out += "\n";
    }
    return out;
}

inline std::string calibration_report_to_text(const CalibrationReport& r) {
    std::string out = "Calibration held-out MAE (n=" + std::to_string(r.n_test) + ")\n";
    out += "dimension   mae_raw  mae_cal\n";
    for (std::size_t d = 0; d < 5; ++d) {
        char line[96];
        std::snprintf(line, sizeof(line), "%-10s %8.3f %8.3f\n", kDimensionNames[d], r.mae_raw[d],
                      r.mae_calibrated[d]);
        out += line;
    }
    char tail[256];
    std::snprintf(tail, sizeof(tail),
                  "average    %8.3f %8.3f\ndelta      %+7.1f%%\naggregate  %8.3f %8.3f\n",
                  r.avg_raw, r.avg_calibrated, r.delta_pct, r.aggregate_mae_raw,
                  r.aggregate_mae_calibrated);
    out += tail;
    return out;
}

}  // namespace tritier
