#pragma once

#include <array>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "tritier/corpus.hpp"
#include "tritier/error.hpp"

namespace tritier {

// The five judge dimensions, each on the 1..5 scale. Fractional values are
// accepted (judges do emit them).
struct DimensionScores {
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

    void set_dim(std::size_t i, double v) {
        switch (i) {
            case 0: coverage = v; break;
            case 1: alignment = v; break;
            case 2: depth = v; break;
            case 3: accuracy = v; break;
            case 4: quality = v; break;
        }
    }

    void validate() const {
        for (std::size_t i = 0; i < 5; ++i) {
            const double v = dim(i);
            if (!std::isfinite(v) || v < 1.0 || v > 5.0)
                fail(Errc::range, std::string("score '") + kDimensionNames[i] +
                                      "' = " + std::to_string(v) + " outside [1,5]");
        }
    }
};

// S_II: the plain mean of the five dimension scores.
inline double s2_aggregate(const DimensionScores& s) {
    return (s.coverage + s.alignment + s.depth + s.accuracy + s.quality) / 5.0;
}

inline nlohmann::json scores_to_json(const DimensionScores& s) {
    nlohmann::json j;
    for (std::size_t i = 0; i < 5; ++i) j[kDimensionNames[i]] = s.dim(i);
    return j;
}

inline std::string serialize_scores(const DimensionScores& s) { return scores_to_json(s).dump(); }

inline DimensionScores scores_from_json(const nlohmann::json& j) {
    DimensionScores s;
    for (std::size_t i = 0; i < 5; ++i) s.set_dim(i, j.at(kDimensionNames[i]).get<double>());
    return s;
}

}  // namespace tritier
