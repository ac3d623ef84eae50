#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iterator>
#include <string>
#include <string_view>

#include "tritier/gateway.hpp"
#include "tritier/prompts.hpp"
#include "tritier/rng.hpp"

namespace tritier {

namespace detail {

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace detail

// Deterministic stand-in for live providers: replies are a pure function of
// (seed, endpoint, request), including the reported latency, so identical
// runs produce identical bytes end to end. Judge traffic is recognized by
// the rubric marker and answered with schema-conformant scores; everything
// else gets a synthetic bilingual critique assembled from a fixed fragment
// pool.
inline MockTransport::Handler make_deterministic_mock(std::uint64_t seed) {
    return [seed](const ModelEndpoint& endpoint, const ModelRequest& request) -> TransportReply {
        const std::uint64_t mix =
            seed ^ detail::fnv1a64(endpoint.model_name) ^
            (detail::fnv1a64(request.user_text) * 0x9E3779B97F4A7C15ull) ^
            detail::fnv1a64(request.system_text);
        Rng rng(mix);

        if (prompts::is_judge_request(request.system_text)) {
            // Five half-point scores in [1,5], biased upward like real judges.
            auto draw = [&] {
                const double v = 2.0 + 3.0 * rng.uniform01() + rng.uniform01();
                const double snapped = std::round(std::min(5.0, std::max(1.0, v)) * 2.0) / 2.0;
                return snapped;
            };
            char body[256];
            std::snprintf(body, sizeof(body),
                          "Scores follow. {\"coverage\": %.1f, \"alignment\": %.1f, "
                          "\"depth\": %.1f, \"accuracy\": %.1f, \"quality\": %.1f, "
                          "\"rationale\": \"synthetic\"}",
                          draw(), draw(), draw(), draw(), draw());
            TransportReply reply;
            reply.text = body;
            reply.latency_s = 0.5 + 0.001 * static_cast<double>(rng.below(1000));
            reply.raw = "mock-judge";
            return reply;
        }

        static constexpr std::string_view zh_fragments[] = {
            "这幅作品构图严谨，色彩层次分明。",
            "画面中的留白营造出深远的意境。",
            "笔法灵动，皴法的运用颇见功力。",
            "整体气韵生动，体现了形神兼备的追求。",
            "题跋与印章为作品增添了文人气息。",
            "线条表现力强，虚实相生。",
        };
        static constexpr std::string_view en_fragments[] = {
            "The composition balances mass and negative space with clear intent. ",
            "Brushwork and ink gradation show disciplined technique. ",
            "Iconography ties the scene to a specific devotional tradition. ",
            "The palette recalls mineral pigments favored by court workshops. ",
            "A sense of wabi-sabi pervades the restrained surface. ",
            "The arabesque patterning frames the calligraphy with precision. ",
            "Its perspective and chiaroscuro reward close viewing. ",
            "The rasa the painting evokes is one of quiet devotion. ",
        };
        std::string text;
        const std::size_t zh_n = 2 + rng.below(3);
        for (std::size_t i = 0; i < zh_n; ++i)
            text += zh_fragments[rng.below(std::size(zh_fragments))];
        text += "\n";
        const std::size_t en_n = 3 + rng.below(4);
        for (std::size_t i = 0; i < en_n; ++i)
            text += en_fragments[rng.below(std::size(en_fragments))];
        TransportReply reply;
        reply.text = text;
        reply.latency_s = 1.0 + 0.001 * static_cast<double>(rng.below(4000));
        reply.raw = "mock-generation";
        return reply;
    };
}

}  // namespace tritier
