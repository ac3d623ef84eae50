#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tritier/corpus.hpp"
#include "tritier/error.hpp"
#include "tritier/gateway.hpp"
#include "tritier/judge_types.hpp"
#include "tritier/prompts.hpp"
#include "tritier/stats.hpp"

namespace tritier {

// ─── Response parsing ───────────────────────────────────────────────────────

namespace detail {

// Span of the first balanced {...} starting at `from`, or npos.
inline std::size_t balanced_object_end(std::string_view text, std::size_t from) {
    int depth = 0;
    bool in_string = false, escaped = false;
    for (std::size_t i = from; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

}  // namespace detail

// Extracts the first well-formed JSON object from the response (judges often
// wrap it in prose), then validates the five required score keys. Scores may
// be integers or reals; anything outside [1,5] is rejected. Extra keys
// (including "rationale") are ignored.
inline DimensionScores parse_judge_response(std::string_view text) {
    std::size_t pos = 0;
    while ((pos = text.find('{', pos)) != std::string_view::npos) {
        const std::size_t end = detail::balanced_object_end(text, pos);
        if (end == std::string_view::npos) {
            ++pos;
            continue;
        }
        const std::string_view candidate = text.substr(pos, end - pos + 1);
        const json j = json::parse(candidate, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) {
            ++pos;
            continue;
        }
        // First well-formed document decides the outcome.
        DimensionScores scores;
        for (std::size_t d = 0; d < 5; ++d) {
            const auto it = j.find(kDimensionNames[d]);
            if (it == j.end())
                fail(Errc::parse_missing_key,
                     std::string("judge response missing key '") + kDimensionNames[d] + "'");
            if (!it->is_number())
                fail(Errc::parse_bad_value,
                     std::string("judge response key '") + kDimensionNames[d] + "' is not numeric");
            const double v = it->get<double>();
            if (!std::isfinite(v) || v < 1.0 || v > 5.0)
                fail(Errc::parse_bad_value, std::string("judge response key '") +
                                                kDimensionNames[d] + "' outside [1,5]");
            scores.set_dim(d, v);
        }
        return scores;
    }
    fail(Errc::parse_no_json, "no JSON object found in judge response");
}

// ─── Records ────────────────────────────────────────────────────────────────

struct Tier2Record {
    std::string pair_id;
    std::string model_name;
    std::string judge_name;
    DimensionScores scores;
    double s2 = 0;
    double latency_s = 0;
    int attempts = 1;
    std::string raw_response;
};

struct Tier2Failure {
    std::string pair_id;
    std::string model_name;
    std::string judge_name;
    std::string error;
    int attempts = 0;
};

inline json tier2_record_to_json(const Tier2Record& r) {
    json j;
    j["status"] = "ok";
    j["pair_id"] = r.pair_id;
    j["model_name"] = r.model_name;
    j["judge_name"] = r.judge_name;
    j["scores"] = scores_to_json(r.scores);
    j["s2"] = r.s2;
    j["latency_s"] = r.latency_s;
    j["attempts"] = r.attempts;
    j["raw_response"] = r.raw_response;
    return j;
}

inline Tier2Record tier2_record_from_json(const json& j) {
    Tier2Record r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.model_name = j.at("model_name").get<std::string>();
    r.judge_name = j.at("judge_name").get<std::string>();
    r.scores = scores_from_json(j.at("scores"));
    r.s2 = j.at("s2").get<double>();
    r.latency_s = j.value("latency_s", 0.0);
    r.attempts = j.value("attempts", 1);
    r.raw_response = j.value("raw_response", "");
    r.scores.validate();
    if (std::abs(r.s2 - s2_aggregate(r.scores)) > 1e-12)
        fail(Errc::validation, "tier2 record s2 disagrees with the mean of its scores");
    return r;
}

// ─── Scoring ────────────────────────────────────────────────────────────────

struct JudgeOptions {
    bool include_reference = true;
    int max_parse_retries = 2;     // extra attempts after the first
    int max_output_tokens = 512;
    double temperature = 0.0;      // judge calls are deterministic by default
};

// One judge call with format-reminder retries on unparseable output. Throws
// Errc::retries_exhausted after the retry budget; transport errors propagate.
inline Tier2Record score_critique(Gateway& gateway, const ModelEndpoint& judge,
                                  const CritiquePair& pair, std::string_view model_name,
                                  std::string_view critique, const JudgeOptions& options = {}) {
    auto [system_text, user_text] = prompts::render_judge_prompt(pair, critique,
                                                                 options.include_reference);
    ModelRequest request;
    request.system_text = system_text;
    request.user_text = user_text;
    request.max_output_tokens = options.max_output_tokens;
    request.temperature = options.temperature;

    double total_latency = 0;
    std::string last_error;
    std::string last_raw;
    const int total_attempts = 1 + std::max(0, options.max_parse_retries);
    for (int attempt = 1; attempt <= total_attempts; ++attempt) {
        const ModelResponse resp = gateway.send(judge, request);
        total_latency += resp.latency_s;
        last_raw = resp.text;
        try {
            Tier2Record record;
            record.scores = parse_judge_response(resp.text);
            record.pair_id = pair.id;
            record.model_name = std::string(model_name);
            record.judge_name = judge.model_name;
            record.s2 = s2_aggregate(record.scores);
            record.latency_s = total_latency;
            record.attempts = attempt;
            record.raw_response = resp.text;
            return record;
        } catch (const Error& e) {
            switch (e.code()) {
                case Errc::parse_no_json:
                case Errc::parse_missing_key:
                case Errc::parse_bad_value:
                    last_error = e.what();
                    break;
                default:
                    throw;
            }
        }
        request.user_text = user_text + "\n\n" + std::string(prompts::kJudgeFormatReminder);
    }
    throw Error(Errc::retries_exhausted,
                "judge output unparseable after " + std::to_string(total_attempts) +
                    " attempts; last error: " + last_error);
}

// ─── Judge comparison harness ───────────────────────────────────────────────

struct TendencyThresholds {
    double lenient_above = 4.2;
    double strict_below = 3.8;
    double high_var_above = 0.3;
};

inline std::string tendency_label(double mean, double stddev,
                                  const TendencyThresholds& t = {}) {
    if (stddev > t.high_var_above) return "High Var.";
    if (mean > t.lenient_above) return "Lenient";
    if (mean < t.strict_below) return "Strict";
    return "Moderate";
}

struct JudgeComparisonRow {
    std::string judge_name;
    double mean = 0;
    double stddev = 0;
    double mean_latency_s = 0;
    std::string tendency;
    std::size_t n = 0;
};

struct JudgePairIcc {
    std::string judge_a;
    std::string judge_b;
    std::optional<double> icc;  // empty when degenerate
    std::size_t n = 0;
};

struct JudgeComparison {
    std::vector<JudgeComparisonRow> rows;        // sorted by mean, descending
    std::vector<std::string> excluded;           // judges with zero successes
    std::vector<JudgePairIcc> pairwise_icc;
};

// ICC(2,1) between two aligned score lists.
inline double cross_judge_icc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(Errc::length_mismatch, "cross_judge_icc: length mismatch");
    if (a.size() < 3) fail(Errc::insufficient_data, "cross_judge_icc needs >= 3 items");
    auto variance_of = [](std::span<const double> v) { return stats::sample_variance(v); };
    if (variance_of(a) == 0.0 || variance_of(b) == 0.0)
        fail(Errc::degenerate, "cross_judge_icc: a judge produced constant scores");
    stats::RatingMatrix m;
    m.raters = {"a", "b"};
    for (std::size_t i = 0; i < a.size(); ++i) {
        m.subjects.push_back(std::to_string(i));
        m.values.push_back({a[i], b[i]});
    }
    return stats::icc(m, stats::IccForm::two_way_random_absolute_single);
}

// Scores the same sample with every judge and tabulates mean/std/latency and
// a tendency label. Judges that never produce a parseable score are excluded
// and reported.
inline JudgeComparison compare_judges(Gateway& gateway, const std::vector<ModelEndpoint>& judges,
                                      const std::vector<std::pair<CritiquePair, std::string>>& sample,
                                      const JudgeOptions& options = {},
                                      const TendencyThresholds& thresholds = {}) {
    if (sample.empty()) fail(Errc::insufficient_data, "compare_judges: empty sample");
    JudgeComparison out;
    std::vector<std::vector<std::optional<double>>> per_judge_scores;  // [judge][item]
    std::vector<std::string> judge_names;
    for (const auto& judge : judges) {
        std::vector<std::optional<double>> item_scores(sample.size());
        std::vector<double> s2s;
        std::vector<double> latencies;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            try {
                const Tier2Record rec = score_critique(gateway, judge, sample[i].first,
                                                       "comparison", sample[i].second, options);
                item_scores[i] = rec.s2;
                s2s.push_back(rec.s2);
                latencies.push_back(rec.latency_s);
            } catch (const Error&) {
                // Failed item: excluded from this judge's sample.
            }
        }
        if (s2s.empty()) {
            out.excluded.push_back(judge.model_name);
            continue;
        }
        JudgeComparisonRow row;
        row.judge_name = judge.model_name;
        row.n = s2s.size();
        row.mean = stats::mean(s2s);
        row.stddev = s2s.size() >= 2 ? stats::sample_stddev(s2s) : 0.0;
        row.mean_latency_s = stats::mean(latencies);
        row.tendency = tendency_label(row.mean, row.stddev, thresholds);
        out.rows.push_back(std::move(row));
        per_judge_scores.push_back(std::move(item_scores));
        judge_names.push_back(judge.model_name);
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const auto& a, const auto& b) { return a.mean > b.mean; });
    for (std::size_t i = 0; i < per_judge_scores.size(); ++i) {
        for (std::size_t k = i + 1; k < per_judge_scores.size(); ++k) {
            std::vector<double> a, b;
            for (std::size_t item = 0; item < sample.size(); ++item)
                if (per_judge_scores[i][item] && per_judge_scores[k][item]) {
                    a.push_back(*per_judge_scores[i][item]);
                    b.push_back(*per_judge_scores[k][item]);
                }
            JudgePairIcc cell{judge_names[i], judge_names[k], std::nullopt, a.size()};
            if (a.size() >= 3) {
                try {
                    cell.icc = cross_judge_icc(a, b);
                } catch (const Error&) {
                    // degenerate pairing stays empty
                }
            }
            out.pairwise_icc.push_back(std::move(cell));
        }
    }
    return out;
}

}  // namespace tritier
