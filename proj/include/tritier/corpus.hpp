#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tritier/error.hpp"
#include "tritier/rng.hpp"

namespace tritier {

using json = nlohmann::json;

// ─── Cultures ───────────────────────────────────────────────────────────────

enum class Culture { CN, WE, JP, KR, IS, IN };

// Canonical processing order for anything iterated per culture.
inline constexpr std::array<Culture, 6> kCultures = {
    Culture::CN, Culture::WE, Culture::JP, Culture::KR, Culture::IS, Culture::IN};

inline const char* culture_code(Culture c) {
    switch (c) {
        case Culture::CN: return "CN";
        case Culture::WE: return "WE";
        case Culture::JP: return "JP";
        case Culture::KR: return "KR";
        case Culture::IS: return "IS";
        case Culture::IN: return "IN";
    }
    return "??";
}

inline const char* culture_label(Culture c) {
    switch (c) {
        case Culture::CN: return "Chinese";
        case Culture::WE: return "Western";
        case Culture::JP: return "Japanese";
        case Culture::KR: return "Korean";
        case Culture::IS: return "Islamic";
        case Culture::IN: return "Indian";
    }
    return "?";
}

inline std::optional<Culture> culture_from_code(std::string_view code) {
    for (Culture c : kCultures)
        if (code == culture_code(c)) return c;
    return std::nullopt;
}

// ─── Domain types ───────────────────────────────────────────────────────────

struct CritiquePair {
    std::string id;
    Culture culture = Culture::CN;
    std::string image_ref;
    std::string artist;
    std::string title;
    std::string critique_zh;
    std::string critique_en;
    std::vector<std::string> dimension_tags;  // kept sorted + unique

    // The text Tier I evaluates when scoring the pair's own critique.
    std::string bilingual_text() const {
        if (critique_zh.empty()) return critique_en;
        if (critique_en.empty()) return critique_zh;
        return critique_zh + "\n" + critique_en;
    }
};

struct DimensionSpec {
    std::string id;        // e.g. "CN_L1_D1"
    Culture culture = Culture::CN;
    int level = 1;         // 1..5
    std::string name;
    std::vector<std::string> keywords;  // bilingual surface forms
    bool mandatory = false;
};

struct HumanScoreRecord {
    std::string pair_id;
    std::string rater_id;
    double coverage = 0, alignment = 0, depth = 0, accuracy = 0, quality = 0;

    double dim(std::size_t i) const {
        switch (i) {
            case 0: return coverage;
            case 1: return alignment;
            case 2: return depth;
            case 3: return accuracy;
            case 4: return quality;
        }
        return 0;
    }
};

inline constexpr std::array<const char*, 5> kDimensionNames = {
    "coverage", "alignment", "depth", "accuracy", "quality"};

class DimensionRegistry {
public:
    // Shipped per-culture totals the loader enforces: CN,WE,JP,KR,IS,IN.
    static constexpr std::array<int, 6> kExpectedTotals = {30, 25, 27, 25, 28, 30};
    // Per-level breakdown in the same culture order.
    static constexpr std::array<std::array<int, 5>, 6> kExpectedByLevel = {{
        {6, 6, 6, 6, 6},   // CN
        {6, 6, 5, 4, 4},   // WE
        {6, 6, 5, 5, 5},   // JP
        {5, 5, 5, 5, 5},   // KR
        {5, 5, 6, 6, 6},   // IS
        {6, 6, 6, 6, 6},   // IN
    }};

    void add(DimensionSpec spec) {
        entries_[static_cast<std::size_t>(spec.culture)].push_back(std::move(spec));
    }

    const std::vector<DimensionSpec>& dimensions(Culture c) const {
        return entries_[static_cast<std::size_t>(c)];
    }

    const DimensionSpec* find(std::string_view id) const {
        for (const auto& per_culture : entries_)
            for (const auto& d : per_culture)
                if (d.id == id) return &d;
        return nullptr;
    }

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& v : entries_) n += v.size();
        return n;
    }

    // Throws Errc::count_mismatch / duplicate_id / validation.
    void validate() const {
        for (std::size_t ci = 0; ci < kCultures.size(); ++ci) {
            const auto& dims = entries_[ci];
            const char* code = culture_code(kCultures[ci]);
            if (static_cast<int>(dims.size()) != kExpectedTotals[ci])
                fail(Errc::count_mismatch,
                     std::string("culture ") + code + " has " + std::to_string(dims.size()) +
                         " dimensions, expected " + std::to_string(kExpectedTotals[ci]));
            std::array<int, 5> by_level{};
            std::set<std::string> seen;
            for (const auto& d : dims) {
                if (d.level < 1 || d.level > 5)
                    fail(Errc::validation, "dimension " + d.id + " has level outside 1..5");
                if (d.keywords.empty())
                    fail(Errc::validation, "dimension " + d.id + " has an empty keyword list");
                if (!seen.insert(d.id).second)
                    fail(Errc::duplicate_id, "duplicate dimension id " + d.id);
                if (d.id.rfind(std::string(code) + "_", 0) != 0)
                    fail(Errc::validation,
                         "dimension " + d.id + " filed under culture " + code);
                ++by_level[static_cast<std::size_t>(d.level - 1)];
            }
            for (int lvl = 1; lvl <= 5; ++lvl) {
                const int want = kExpectedByLevel[ci][static_cast<std::size_t>(lvl - 1)];
                const int got = by_level[static_cast<std::size_t>(lvl - 1)];
                if (got != want)
                    fail(Errc::count_mismatch,
                         std::string("culture ") + code + " L" + std::to_string(lvl) + " has " +
                             std::to_string(got) + " dimensions, expected " + std::to_string(want));
            }
        }
    }

private:
    std::array<std::vector<DimensionSpec>, 6> entries_;
};

// ─── JSONL plumbing ─────────────────────────────────────────────────────────

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Calls fn(line_number, line) for every non-blank line.
template <typename Fn>
void for_each_jsonl_line(const std::filesystem::path& path, Fn&& fn) {
    const std::string content = read_file(path);
    std::size_t line_no = 0, pos = 0;
    while (pos <= content.size()) {
        std::size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) nl = content.size();
        ++line_no;
        std::string_view line(content.data() + pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line_no, line);
        if (nl == content.size()) break;
        pos = nl + 1;
    }
}

inline json parse_line(std::size_t line_no, std::string_view line) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object())
        fail(Errc::schema, "line " + std::to_string(line_no) + ": not a JSON object");
    return j;
}

inline std::string require_string(const json& j, std::size_t line_no, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_string())
        fail(Errc::schema,
             "line " + std::to_string(line_no) + ": missing or non-string field '" + field + "'");
    return it->get<std::string>();
}

inline double require_number(const json& j, std::size_t line_no, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_number())
        fail(Errc::schema,
             "line " + std::to_string(line_no) + ": missing or non-numeric field '" + field + "'");
    return it->get<double>();
}

}  // namespace detail

// ─── Loaders ────────────────────────────────────────────────────────────────

// JSONL, one pair per line, fields:
//   id, culture, image_ref, artist, title, critique_zh, critique_en, dimension_tags
inline std::vector<CritiquePair> load_pairs(const std::filesystem::path& path) {
    std::vector<CritiquePair> pairs;
    std::set<std::string> ids;
    detail::for_each_jsonl_line(path, [&](std::size_t line_no, std::string_view line) {
        const json j = detail::parse_line(line_no, line);
        CritiquePair p;
        p.id = detail::require_string(j, line_no, "id");
        const std::string culture = detail::require_string(j, line_no, "culture");
        if (culture == "MU" || culture == "Mural")
            fail(Errc::excluded_culture,
                 "line " + std::to_string(line_no) + ": field 'culture': Mural records are "
                 "excluded from evaluation and must be removed from the input");
        const auto parsed = culture_from_code(culture);
        if (!parsed)
            fail(Errc::validation, "line " + std::to_string(line_no) +
                                       ": field 'culture': unknown code '" + culture + "'");
        p.culture = *parsed;
        p.image_ref = detail::require_string(j, line_no, "image_ref");
        p.artist = detail::require_string(j, line_no, "artist");
        p.title = detail::require_string(j, line_no, "title");
        p.critique_zh = detail::require_string(j, line_no, "critique_zh");
        p.critique_en = detail::require_string(j, line_no, "critique_en");
        if (p.critique_zh.empty() && p.critique_en.empty())
            fail(Errc::validation, "line " + std::to_string(line_no) +
                                       ": fields 'critique_zh'/'critique_en': both empty");
        auto tags_it = j.find("dimension_tags");
        if (tags_it == j.end() || !tags_it->is_array())
            fail(Errc::schema, "line " + std::to_string(line_no) +
                                   ": missing or non-array field 'dimension_tags'");
        for (const auto& t : *tags_it) {
            if (!t.is_string())
                fail(Errc::schema, "line " + std::to_string(line_no) +
                                       ": field 'dimension_tags': non-string entry");
            const std::string tag = t.get<std::string>();
            if (tag.rfind(std::string(culture_code(p.culture)) + "_", 0) != 0)
                fail(Errc::validation, "line " + std::to_string(line_no) +
                                           ": field 'dimension_tags': tag '" + tag +
                                           "' does not match culture " + culture_code(p.culture));
            p.dimension_tags.push_back(tag);
        }
        std::sort(p.dimension_tags.begin(), p.dimension_tags.end());
        p.dimension_tags.erase(std::unique(p.dimension_tags.begin(), p.dimension_tags.end()),
                               p.dimension_tags.end());
        if (!ids.insert(p.id).second)
            fail(Errc::duplicate_id,
                 "line " + std::to_string(line_no) + ": duplicate pair id '" + p.id + "'");
        pairs.push_back(std::move(p));
    });
    return pairs;
}

// Canonical JSONL writer; load_pairs(write_pairs(x)) round-trips byte-stably.
inline std::string write_pairs(const std::vector<CritiquePair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        json j;
        j["id"] = p.id;
        j["culture"] = culture_code(p.culture);
        j["image_ref"] = p.image_ref;
        j["artist"] = p.artist;
        j["title"] = p.title;
        j["critique_zh"] = p.critique_zh;
        j["critique_en"] = p.critique_en;
        j["dimension_tags"] = p.dimension_tags;
        out += j.dump();
        out += '\n';
    }
    return out;
}

// Registry file: JSON object keyed by culture code, each value a list of
// {id, level, name, keywords, mandatory}.
inline DimensionRegistry load_registry(const std::filesystem::path& path) {
    const std::string content = detail::read_file(path);
    json root = json::parse(content, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        fail(Errc::schema, "registry " + path.string() + ": not a JSON object");
    DimensionRegistry reg;
    for (Culture c : kCultures) {
        auto it = root.find(culture_code(c));
        if (it == root.end() || !it->is_array())
            fail(Errc::schema, std::string("registry: missing culture array '") +
                                   culture_code(c) + "'");
        for (const auto& e : *it) {
            if (!e.is_object()) fail(Errc::schema, "registry: dimension entry is not an object");
            DimensionSpec d;
            d.culture = c;
            d.id = detail::require_string(e, 0, "id");
            auto lvl = e.find("level");
            if (lvl == e.end() || !lvl->is_number_integer())
                fail(Errc::schema, "registry: dimension " + d.id + ": missing integer 'level'");
            d.level = lvl->get<int>();
            d.name = detail::require_string(e, 0, "name");
            auto kw = e.find("keywords");
            if (kw == e.end() || !kw->is_array())
                fail(Errc::schema, "registry: dimension " + d.id + ": missing 'keywords' array");
            for (const auto& k : *kw) {
                if (!k.is_string() || k.get<std::string>().empty())
                    fail(Errc::validation,
                         "registry: dimension " + d.id + ": empty or non-string keyword");
                d.keywords.push_back(k.get<std::string>());
            }
            if (d.keywords.empty())
                fail(Errc::validation, "registry: dimension " + d.id + ": empty keyword list");
            d.mandatory = e.value("mandatory", false);
            reg.add(std::move(d));
        }
    }
    reg.validate();
    return reg;
}

// JSONL, fields: pair_id, rater_id, coverage, alignment, depth, accuracy, quality.
inline std::vector<HumanScoreRecord> load_human_scores(const std::filesystem::path& path) {
    std::vector<HumanScoreRecord> records;
    detail::for_each_jsonl_line(path, [&](std::size_t line_no, std::string_view line) {
        const json j = detail::parse_line(line_no, line);
        HumanScoreRecord r;
        r.pair_id = detail::require_string(j, line_no, "pair_id");
        r.rater_id = detail::require_string(j, line_no, "rater_id");
        double* slots[5] = {&r.coverage, &r.alignment, &r.depth, &r.accuracy, &r.quality};
        for (std::size_t i = 0; i < 5; ++i) {
            const double v = detail::require_number(j, line_no, kDimensionNames[i]);
            if (v < 1.0 || v > 5.0)
                fail(Errc::range, "line " + std::to_string(line_no) + ": field '" +
                                      kDimensionNames[i] + "': score " + std::to_string(v) +
                                      " outside [1,5]");
            *slots[i] = v;
        }
        records.push_back(std::move(r));
    });
    return records;
}

// ─── Stratified sampling ────────────────────────────────────────────────────

// Uniform without replacement within each culture, cultures processed in
// canonical code order; a pure function of (pairs, per_culture, seed).
inline std::vector<CritiquePair> stratified_sample(const std::vector<CritiquePair>& pairs,
                                                   const std::map<Culture, std::size_t>& per_culture,
                                                   std::uint64_t seed) {
    Rng rng(seed);
    std::vector<CritiquePair> out;
    for (Culture c : kCultures) {
        auto want_it = per_culture.find(c);
        const std::size_t want = want_it == per_culture.end() ? 0 : want_it->second;
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            if (pairs[i].culture == c) idx.push_back(i);
        if (want > idx.size())
            fail(Errc::sample_exceeds, std::string("culture ") + culture_code(c) + ": requested " +
                                           std::to_string(want) + " of " +
                                           std::to_string(idx.size()) + " available pairs");
        // Partial Fisher-Yates: the first `want` slots are the sample.
        for (std::size_t k = 0; k < want; ++k) {
            const std::size_t j = k + static_cast<std::size_t>(rng.below(idx.size() - k));
            std::swap(idx[k], idx[j]);
            out.push_back(pairs[idx[k]]);
        }
    }
    return out;
}

}  // namespace tritier
