#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tritier/corpus.hpp"
#include "tritier/error.hpp"
#include "tritier/text.hpp"

namespace tritier {

// ─── Configuration ──────────────────────────────────────────────────────────

struct Tier1Config {
    double l_max = 2000;    // expected critique length, Unicode scalar values
    double epsilon = 3;     // sentence-count smoothing constant
    std::array<double, 5> level_weights = {1.0 / 15, 2.0 / 15, 3.0 / 15, 4.0 / 15, 5.0 / 15};
    // Aggregate over {dcr, csa, cds, lqs}; unweighted mean by default.
    std::array<double, 4> aggregate_weights = {0.25, 0.25, 0.25, 0.25};
    // Risk-flag thresholds on the raw [0,1] values.
    double flag_low_coverage = 0.30;
    double flag_weak_alignment = 0.10;
    double flag_template_risk = 0.25;

    void validate() const {
        if (l_max <= 0) fail(Errc::config, "tier1.l_max must be positive");
        if (epsilon <= 0) fail(Errc::config, "tier1.epsilon must be positive");
        double sum = 0;
        for (double w : level_weights) sum += w;
        if (std::abs(sum - 1.0) > 1e-9)
            fail(Errc::config, "tier1 level weights must sum to 1");
    }
};

// ─── TF-IDF ─────────────────────────────────────────────────────────────────

struct TfIdfVector {
    std::map<std::string, double> weights;  // sparse, deterministic iteration

    double norm() const {
        double s = 0;
        for (const auto& [_, w] : weights) s += w * w;
        return std::sqrt(s);
    }
};

// tf = count / doc length, idf = ln((1+N)/(1+df)) + 1, weight = tf * idf.
// Empty documents yield zero vectors.
inline std::vector<TfIdfVector> build_tfidf(const std::vector<std::vector<std::string>>& docs) {
    if (docs.empty()) fail(Errc::insufficient_data, "tf-idf collection is empty");
    std::map<std::string, int> df;
    for (const auto& doc : docs) {
        std::set<std::string_view> seen;
        for (const auto& tok : doc)
            if (seen.insert(tok).second) ++df[tok];
    }
    const double n_docs = static_cast<double>(docs.size());
    std::vector<TfIdfVector> out(docs.size());
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (docs[i].empty()) continue;
        std::map<std::string, int> counts;
        for (const auto& tok : docs[i]) ++counts[tok];
        const double len = static_cast<double>(docs[i].size());
        for (const auto& [tok, cnt] : counts) {
            const double tf = cnt / len;
            const double idf = std::log((1.0 + n_docs) / (1.0 + df[tok])) + 1.0;
            out[i].weights[tok] = tf * idf;
        }
    }
    return out;
}

inline double cosine(const TfIdfVector& a, const TfIdfVector& b) {
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    double dot = 0;
    auto ia = a.weights.begin();
    auto ib = b.weights.begin();
    while (ia != a.weights.end() && ib != b.weights.end()) {
        if (ia->first < ib->first) ++ia;
        else if (ib->first < ia->first) ++ib;
        else { dot += ia->second * ib->second; ++ia; ++ib; }
    }
    return dot / (na * nb);
}

// ─── Detection ──────────────────────────────────────────────────────────────

// A dimension is detected iff any of its keywords occurs as a case-folded
// substring of the (normalized) critique text. Returns sorted ids.
inline std::vector<std::string> detect_dimensions(std::string_view critique, Culture culture,
                                                  const DimensionRegistry& registry) {
    const std::string folded = text::fold(critique);
    std::vector<std::string> hits;
    for (const auto& dim : registry.dimensions(culture)) {
        for (const auto& kw : dim.keywords) {
            if (text::contains_folded(folded, kw)) {
                hits.push_back(dim.id);
                break;
            }
        }
    }
    std::sort(hits.begin(), hits.end());
    return hits;
}

inline std::set<int> detect_levels(std::string_view critique, Culture culture,
                                   const DimensionRegistry& registry) {
    const auto ids = detect_dimensions(critique, culture, registry);
    std::set<int> levels;
    for (const auto& id : ids) {
        const DimensionSpec* d = registry.find(id);
        if (d) levels.insert(d->level);
    }
    return levels;
}

// ─── The four metrics (raw, in [0,1]) ───────────────────────────────────────

inline double dcr(std::string_view critique, Culture culture, const DimensionRegistry& registry) {
    const auto& dims = registry.dimensions(culture);
    if (dims.empty())
        fail(Errc::unknown_culture,
             std::string("no dimensions registered for culture ") + culture_code(culture));
    const auto detected = detect_dimensions(critique, culture, registry);
    return static_cast<double>(detected.size()) / static_cast<double>(dims.size());
}

namespace detail {

// Vocabulary document of a culture: concatenation of all its keywords.
inline std::vector<std::string> vocabulary_tokens(const DimensionRegistry& registry, Culture c) {
    std::vector<std::string> toks;
    for (const auto& dim : registry.dimensions(c))
        for (const auto& kw : dim.keywords)
            for (auto& t : text::tokenize(kw)) toks.push_back(std::move(t));
    return toks;
}

}  // namespace detail

// Cosine similarity between the critique's TF-IDF vector and the culture
// vocabulary's. The IDF collection is self-contained: the critique plus the
// six per-culture vocabulary documents.
inline double csa(std::string_view critique, Culture culture, const DimensionRegistry& registry) {
    if (registry.dimensions(culture).empty())
        fail(Errc::unknown_culture,
             std::string("no dimensions registered for culture ") + culture_code(culture));
    std::vector<std::vector<std::string>> docs;
    docs.reserve(1 + kCultures.size());
    docs.push_back(text::tokenize(critique));
    std::size_t culture_doc = 0;
    for (std::size_t i = 0; i < kCultures.size(); ++i) {
        if (kCultures[i] == culture) culture_doc = docs.size();
        docs.push_back(detail::vocabulary_tokens(registry, kCultures[i]));
    }
    const auto vectors = build_tfidf(docs);
    return cosine(vectors[0], vectors[culture_doc]);
}

inline double cds(const std::set<int>& detected_levels, const Tier1Config& config = {}) {
    double sum = 0;
    for (int lvl : detected_levels)
        if (lvl >= 1 && lvl <= 5) sum += config.level_weights[static_cast<std::size_t>(lvl - 1)];
    return sum;
}

inline double lqs(std::string_view critique, const Tier1Config& config = {}) {
    const double length = static_cast<double>(text::codepoint_count(critique));
    const double n_sent = static_cast<double>(text::sentence_count(critique));
    const double adequacy = std::min(1.0, length / config.l_max);
    return adequacy * (n_sent / (n_sent + config.epsilon));
}

// [0,1] -> [1,5]; out-of-range inputs are clamped.
inline double rescale(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return 1.0 + 4.0 * x;
}

// ─── Report ─────────────────────────────────────────────────────────────────

enum class RiskFlag { LowCoverage, WeakAlignment, TemplateRisk };

inline const char* risk_flag_name(RiskFlag f) {
    switch (f) {
        case RiskFlag::LowCoverage: return "LowCoverage";
        case RiskFlag::WeakAlignment: return "WeakAlignment";
        case RiskFlag::TemplateRisk: return "TemplateRisk";
    }
    return "?";
}

struct Tier1Report {
    std::string pair_id;
    std::vector<std::string> detected_dimensions;  // sorted
    std::set<int> detected_levels;
    double dcr_raw = 0, csa_raw = 0, cds_raw = 0, lqs_raw = 0;
    double dcr = 1, csa = 1, cds = 1, lqs = 1;  // rescaled to [1,5]
    double tier1_aggregate = 1;
    std::set<RiskFlag> risk_flags;
};

// Rescaling, aggregation and risk flags from the four raw metric values.
inline Tier1Report tier1_from_raw(std::string_view pair_id, double dcr_raw, double csa_raw,
                                  double cds_raw, double lqs_raw,
                                  const Tier1Config& config = {}) {
    Tier1Report r;
    r.pair_id = std::string(pair_id);
    r.dcr_raw = dcr_raw;
    r.csa_raw = csa_raw;
    r.cds_raw = cds_raw;
    r.lqs_raw = lqs_raw;
    r.dcr = rescale(r.dcr_raw);
    r.csa = rescale(r.csa_raw);
    r.cds = rescale(r.cds_raw);
    r.lqs = rescale(r.lqs_raw);
    const std::array<double, 4> rescaled = {r.dcr, r.csa, r.cds, r.lqs};
    double wsum = 0, acc = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        acc += config.aggregate_weights[i] * rescaled[i];
        wsum += config.aggregate_weights[i];
    }
    r.tier1_aggregate = wsum > 0 ? acc / wsum : 1.0;
    if (r.dcr_raw < config.flag_low_coverage) r.risk_flags.insert(RiskFlag::LowCoverage);
    if (r.csa_raw < config.flag_weak_alignment) r.risk_flags.insert(RiskFlag::WeakAlignment);
    if (r.lqs_raw < config.flag_template_risk) r.risk_flags.insert(RiskFlag::TemplateRisk);
    return r;
}

// Scores an arbitrary critique text against a culture's registry.
inline Tier1Report tier1_report_text(std::string_view pair_id, std::string_view critique,
                                     Culture culture, const DimensionRegistry& registry,
                                     const Tier1Config& config = {}) {
    const auto levels = detect_levels(critique, culture, registry);
    Tier1Report r = tier1_from_raw(pair_id, dcr(critique, culture, registry),
                                   csa(critique, culture, registry), cds(levels, config),
                                   lqs(critique, config), config);
    r.detected_dimensions = detect_dimensions(critique, culture, registry);
    r.detected_levels = levels;
    return r;
}

// Scores the pair's own bilingual critique.
inline Tier1Report tier1_report(const CritiquePair& pair, const DimensionRegistry& registry,
                                const Tier1Config& config = {}) {
    return tier1_report_text(pair.id, pair.bilingual_text(), pair.culture, registry, config);
}

// ─── Serialization ──────────────────────────────────────────────────────────

inline json tier1_report_to_json(const Tier1Report& r, std::string_view model_name = {}) {
    json j;
    j["pair_id"] = r.pair_id;
    if (!model_name.empty()) j["model_name"] = std::string(model_name);
    j["detected_dimensions"] = r.detected_dimensions;
    j["detected_levels"] = std::vector<int>(r.detected_levels.begin(), r.detected_levels.end());
    j["dcr_raw"] = r.dcr_raw;
    j["csa_raw"] = r.csa_raw;
    j["cds_raw"] = r.cds_raw;
    j["lqs_raw"] = r.lqs_raw;
    j["dcr"] = r.dcr;
    j["csa"] = r.csa;
    j["cds"] = r.cds;
    j["lqs"] = r.lqs;
    j["tier1_aggregate"] = r.tier1_aggregate;
    std::vector<std::string> flags;
    for (RiskFlag f : r.risk_flags) flags.push_back(risk_flag_name(f));
    j["risk_flags"] = flags;
    return j;
}

inline Tier1Report tier1_report_from_json(const json& j, std::string* model_name = nullptr) {
    Tier1Report r;
    r.pair_id = j.at("pair_id").get<std::string>();
    if (model_name) *model_name = j.value("model_name", "");
    for (const auto& d : j.at("detected_dimensions")) r.detected_dimensions.push_back(d);
    for (const auto& l : j.at("detected_levels")) r.detected_levels.insert(l.get<int>());
    r.dcr_raw = j.at("dcr_raw").get<double>();
    r.csa_raw = j.at("csa_raw").get<double>();
    r.cds_raw = j.at("cds_raw").get<double>();
    r.lqs_raw = j.at("lqs_raw").get<double>();
    r.dcr = j.at("dcr").get<double>();
    r.csa = j.at("csa").get<double>();
    r.cds = j.at("cds").get<double>();
    r.lqs = j.at("lqs").get<double>();
    r.tier1_aggregate = j.at("tier1_aggregate").get<double>();
    for (const auto& f : j.at("risk_flags")) {
        const std::string name = f.get<std::string>();
        if (name == "LowCoverage") r.risk_flags.insert(RiskFlag::LowCoverage);
        else if (name == "WeakAlignment") r.risk_flags.insert(RiskFlag::WeakAlignment);
        else if (name == "TemplateRisk") r.risk_flags.insert(RiskFlag::TemplateRisk);
    }
    return r;
}

}  // namespace tritier
