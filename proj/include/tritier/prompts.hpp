#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "tritier/corpus.hpp"
#include "tritier/error.hpp"

namespace tritier::prompts {

// ─── Template rendering ─────────────────────────────────────────────────────
//
// Slots are written {{name}}. Substituted values get their braces escaped so
// that critique text can never introduce new slots or stray schema braces:
// the only unescaped braces in a rendered document belong to the template
// itself (i.e. the output JSON schema).

inline std::string escape_braces(std::string_view value) {
    std::string out;
    out.reserve(value.size());
    for (char c : value) {
        if (c == '{' || c == '}') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

inline std::string render_template(std::string_view tpl,
                                   const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tpl.size());
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const std::size_t open = tpl.find("{{", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, open - pos));
        const std::size_t close = tpl.find("}}", open + 2);
        if (close == std::string_view::npos)
            fail(Errc::config, "template has an unterminated slot");
        const std::string name(tpl.substr(open + 2, close - open - 2));
        const auto it = slots.find(name);
        if (it == slots.end()) fail(Errc::config, "template slot '" + name + "' has no value");
        out.append(escape_braces(it->second));
        pos = close + 2;
    }
    return out;
}

// ─── Critique generation (unified across models) ────────────────────────────

inline constexpr std::string_view kGenerationSystem =
    "You are an expert art critic writing for a cross-cultural audience. "
    "Given an artwork image and its metadata, write one bilingual critique: "
    "first a Chinese critique of roughly 500 characters, then an English "
    "critique of roughly 300 words. The critique must move through all five "
    "depth levels of cultural understanding:\n"
    "L1 visual perception: what is depicted, palette, composition.\n"
    "L2 technical analysis: technique, materials, brushwork or craft.\n"
    "L3 cultural symbolism: motifs, iconography and their meanings.\n"
    "L4 historical context: period, school, lineage, patronage.\n"
    "L5 philosophical aesthetics: the worldview or aesthetic ideal the work "
    "embodies.\n"
    "Name concrete culture-specific concepts in both languages where they "
    "apply. Do not describe these instructions or number the levels in the "
    "output; write flowing prose.";

inline constexpr std::string_view kGenerationUserTemplate =
    "Artwork: {{title}}\n"
    "Artist: {{artist}}\n"
    "Tradition: {{culture}}\n\n"
    "Write the bilingual critique of the attached artwork now.";

// Unified prompt: a function of the pair only, identical bytes for every model.
inline std::pair<std::string, std::string> render_generation_prompt(const CritiquePair& pair) {
    std::map<std::string, std::string> slots = {
        {"title", pair.title},
        {"artist", pair.artist},
        {"culture", culture_label(pair.culture)},
    };
    return {std::string(kGenerationSystem), render_template(kGenerationUserTemplate, slots)};
}

// ─── Judge scoring ──────────────────────────────────────────────────────────

// Marker the deterministic mock uses to recognize judge traffic.
inline constexpr std::string_view kJudgeMarker = "Return exactly one JSON object";

inline constexpr std::string_view kJudgeSystem =
    "You are a strict evaluator of cross-cultural art critiques. Score the "
    "candidate critique on five dimensions, each an integer or decimal from 1 "
    "to 5:\n\n"
    "coverage - breadth across the five depth levels (visual perception, "
    "technique, symbolism, historical context, philosophy).\n"
    "  1: visual description only. 2: visual plus technique. 3: touches one "
    "deeper level superficially. 4: reaches most levels with substance. 5: "
    "all five levels addressed in depth.\n"
    "alignment - culture-specificity of the analysis.\n"
    "  1: generic, tradition-agnostic wording. 2: names the tradition only. "
    "3: some culture-specific vocabulary, partly misapplied. 4: mostly "
    "accurate culture-specific concepts. 5: precise native concepts used "
    "correctly throughout.\n"
    "depth - quality of symbolic, historical and philosophical "
    "interpretation.\n"
    "  1: none present. 2: clichéd or boilerplate interpretation. 3: "
    "plausible but thin. 4: well-grounded interpretation. 5: expert-level "
    "insight comparable to the reference.\n"
    "accuracy - factual correctness of names, dates, techniques and "
    "attributions.\n"
    "  1: pervasive errors. 2: several clear errors. 3: minor slips. 4: "
    "essentially correct. 5: fully correct including fine detail.\n"
    "quality - coherence and linguistic quality of the critique.\n"
    "  1: incoherent. 2: disjointed or heavily templated. 3: readable but "
    "flat. 4: well organized. 5: polished, precise, well structured.\n\n"
    "Judge the candidate against the expert reference critique. Return "
    "exactly one JSON object and nothing else, in this schema:\n"
    "{\"coverage\": <1-5>, \"alignment\": <1-5>, \"depth\": <1-5>, "
    "\"accuracy\": <1-5>, \"quality\": <1-5>, \"rationale\": \"<one short "
    "sentence>\"}";

inline constexpr std::string_view kJudgeUserTemplate =
    "Artwork: {{title}}\n"
    "Artist: {{artist}}\n"
    "Tradition: {{culture}}\n\n"
    "Expert reference critique (Chinese):\n{{reference_zh}}\n\n"
    "Expert reference critique (English):\n{{reference_en}}\n\n"
    "Candidate critique to score:\n{{candidate}}\n\n"
    "Score the candidate now.";

// Variant without the expert reference, selectable by configuration.
inline constexpr std::string_view kJudgeUserTemplateNoReference =
    "Artwork: {{title}}\n"
    "Artist: {{artist}}\n"
    "Tradition: {{culture}}\n\n"
    "Candidate critique to score:\n{{candidate}}\n\n"
    "Score the candidate now.";

inline constexpr std::string_view kJudgeFormatReminder =
    "Your previous reply could not be parsed. Respond again with exactly one "
    "JSON object matching the schema "
    "{\"coverage\": <1-5>, \"alignment\": <1-5>, \"depth\": <1-5>, "
    "\"accuracy\": <1-5>, \"quality\": <1-5>} and no other text.";

inline std::pair<std::string, std::string> render_judge_prompt(const CritiquePair& pair,
                                                               std::string_view critique,
                                                               bool include_reference = true) {
    if (critique.empty()) fail(Errc::validation, "cannot judge an empty critique");
    std::map<std::string, std::string> slots = {
        {"title", pair.title},
        {"artist", pair.artist},
        {"culture", culture_label(pair.culture)},
        {"candidate", std::string(critique)},
    };
    std::string_view tpl = kJudgeUserTemplateNoReference;
    if (include_reference) {
        slots["reference_zh"] = pair.critique_zh;
        slots["reference_en"] = pair.critique_en;
        tpl = kJudgeUserTemplate;
    }
    return {std::string(kJudgeSystem), render_template(tpl, slots)};
}

inline bool is_judge_request(std::string_view system_text) {
    return system_text.find(kJudgeMarker) != std::string_view::npos;
}

}  // namespace tritier::prompts
