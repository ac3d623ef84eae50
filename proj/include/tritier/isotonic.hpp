#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "tritier/error.hpp"

namespace tritier {

// ─── Pool-adjacent-violators ────────────────────────────────────────────────

// Weighted least-squares monotone (non-decreasing) fit of y. Returns one
// fitted value per input; each pooled block carries the weighted mean of the
// observations it absorbed. Accepts n >= 1.
inline std::vector<double> pava(const std::vector<double>& y,
                                const std::vector<double>& w = {}) {
    const std::size_t n = y.size();
    if (!w.empty() && w.size() != n)
        fail(Errc::length_mismatch, "pava: weight vector length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(y[i])) fail(Errc::validation, "pava: non-finite value");
        if (!w.empty() && (!std::isfinite(w[i]) || w[i] <= 0))
            fail(Errc::validation, "pava: weights must be finite and positive");
    }
    struct Block {
        double weight;
        double mean;
        std::size_t count;  // input points absorbed
    };
    std::vector<Block> blocks;
    blocks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        blocks.push_back({w.empty() ? 1.0 : w[i], y[i], 1});
        while (blocks.size() >= 2 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            const Block top = blocks.back();
            blocks.pop_back();
            Block& prev = blocks.back();
            const double total = prev.weight + top.weight;
            prev.mean = (prev.weight * prev.mean + top.weight * top.mean) / total;
            prev.weight = total;
            prev.count += top.count;
        }
    }
    std::vector<double> fitted;
    fitted.reserve(n);
    for (const auto& b : blocks) fitted.insert(fitted.end(), b.count, b.mean);
    return fitted;
}

// ─── Fitted model ───────────────────────────────────────────────────────────

// A monotone step/interpolation function: knots with strictly increasing x
// and non-decreasing y.
struct IsotonicModel {
    std::vector<std::pair<double, double>> knots;

    bool fitted() const { return !knots.empty(); }

    void validate() const {
        if (knots.empty()) fail(Errc::validation, "isotonic model has no knots");
        for (std::size_t i = 1; i < knots.size(); ++i) {
            if (!(knots[i].first > knots[i - 1].first))
                fail(Errc::validation, "isotonic model knots x not strictly increasing");
            if (knots[i].second < knots[i - 1].second - 1e-12)
                fail(Errc::validation, "isotonic model knots y decreasing");
        }
    }
};

// Least-squares monotone regression of y on x. Points are sorted by x and
// ties in x are averaged (weighted by multiplicity) before pooling.
inline IsotonicModel fit_isotonic(std::vector<std::pair<double, double>> points) {
    if (points.size() < 2)
        fail(Errc::insufficient_data, "isotonic fit needs at least 2 points");
    for (const auto& [x, y] : points)
        if (!std::isfinite(x) || !std::isfinite(y))
            fail(Errc::validation, "isotonic fit: non-finite point");
    std::stable_sort(points.begin(), points.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<double> xs, ys, ws;
    for (const auto& [x, y] : points) {
        if (!xs.empty() && x == xs.back()) {
            const double w = ws.back();
            ys.back() = (ys.back() * w + y) / (w + 1.0);
            ws.back() = w + 1.0;
        } else {
            xs.push_back(x);
            ys.push_back(y);
            ws.push_back(1.0);
        }
    }
    if (xs.size() < 2)
        fail(Errc::insufficient_data, "isotonic fit needs at least 2 distinct x values");
    const auto fitted = pava(ys, ws);
    IsotonicModel model;
    model.knots.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) model.knots.emplace_back(xs[i], fitted[i]);
    return model;
}

// Linear interpolation between knots, constant extension outside the fitted
// range.
inline double apply(const IsotonicModel& model, double x) {
    if (!model.fitted()) fail(Errc::validation, "isotonic model not fitted");
    const auto& k = model.knots;
    if (x <= k.front().first) return k.front().second;
    if (x >= k.back().first) return k.back().second;
    auto it = std::lower_bound(k.begin(), k.end(), x,
                               [](const auto& knot, double v) { return knot.first < v; });
    if (it->first == x) return it->second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double t = (x - lo.first) / (hi.first - lo.first);
    return lo.second + t * (hi.second - lo.second);
}

}  // namespace tritier
