#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "tritier/error.hpp"

namespace tritier::stats {

// ─── Moments ────────────────────────────────────────────────────────────────

inline double mean(std::span<const double> xs) {
    if (xs.empty()) fail(Errc::insufficient_data, "mean of empty sample");
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Unbiased (n-1) sample variance.
inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) fail(Errc::insufficient_data, "variance needs >= 2 values");
    const double m = mean(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

inline double sample_stddev(std::span<const double> xs) { return std::sqrt(sample_variance(xs)); }

inline double population_stddev(std::span<const double> xs) {
    if (xs.empty()) fail(Errc::insufficient_data, "stddev of empty sample");
    const double m = mean(xs);
    double s = 0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

// ─── Pearson correlation ────────────────────────────────────────────────────

inline double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) fail(Errc::length_mismatch, "pearson_r: length mismatch");
    if (xs.size() < 3) fail(Errc::insufficient_data, "pearson_r needs >= 3 points");
    const double mx = mean(xs), my = mean(ys);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        fail(Errc::degenerate, "pearson_r: zero variance input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ─── Intraclass correlation ─────────────────────────────────────────────────

// Complete subjects x raters matrix.
struct RatingMatrix {
    std::vector<std::string> subjects;
    std::vector<std::string> raters;
    std::vector<std::vector<double>> values;  // [subject][rater]

    void validate() const {
        if (subjects.size() < 2 || raters.size() < 2)
            fail(Errc::insufficient_data, "rating matrix must be at least 2x2");
        if (values.size() != subjects.size())
            fail(Errc::length_mismatch, "rating matrix row count mismatch");
        for (const auto& row : values) {
            if (row.size() != raters.size())
                fail(Errc::length_mismatch, "rating matrix column count mismatch");
            for (double v : row)
                if (!std::isfinite(v)) fail(Errc::validation, "rating matrix has non-finite cell");
        }
    }
};

enum class IccForm {
    two_way_random_absolute_single,  // ICC(2,1), the default
    two_way_mixed_consistency_single,  // ICC(3,1)
    one_way_random_single              // ICC(1,1)
};

inline IccForm icc_form_from_name(std::string_view name) {
    if (name == "two-way-random-absolute-single") return IccForm::two_way_random_absolute_single;
    if (name == "two-way-mixed-consistency-single") return IccForm::two_way_mixed_consistency_single;
    if (name == "one-way-random-single") return IccForm::one_way_random_single;
    fail(Errc::config, "unknown ICC form '" + std::string(name) + "'");
}

// Two-way ANOVA mean squares based ICC; may be negative.
inline double icc(const RatingMatrix& m,
                  IccForm form = IccForm::two_way_random_absolute_single) {
    m.validate();
    const double n = static_cast<double>(m.subjects.size());
    const double k = static_cast<double>(m.raters.size());
    double grand = 0;
    for (const auto& row : m.values)
        for (double v : row) grand += v;
    grand /= n * k;

    std::vector<double> row_means(m.subjects.size(), 0.0);
    std::vector<double> col_means(m.raters.size(), 0.0);
    for (std::size_t i = 0; i < m.values.size(); ++i)
        for (std::size_t j = 0; j < m.values[i].size(); ++j) {
            row_means[i] += m.values[i][j] / k;
            col_means[j] += m.values[i][j] / n;
        }

    double ss_rows = 0, ss_cols = 0, ss_err = 0;
    for (double r : row_means) ss_rows += (r - grand) * (r - grand);
    ss_rows *= k;
    for (double c : col_means) ss_cols += (c - grand) * (c - grand);
    ss_cols *= n;
    for (std::size_t i = 0; i < m.values.size(); ++i)
        for (std::size_t j = 0; j < m.values[i].size(); ++j) {
            const double resid = m.values[i][j] - row_means[i] - col_means[j] + grand;
            ss_err += resid * resid;
        }

    const double msr = ss_rows / (n - 1);
    const double msc = ss_cols / (k - 1);
    const double mse = ss_err / ((n - 1) * (k - 1));

    double num = 0, den = 0;
    switch (form) {
        case IccForm::two_way_random_absolute_single:
            num = msr - mse;
            den = msr + (k - 1) * mse + (k / n) * (msc - mse);
            break;
        case IccForm::two_way_mixed_consistency_single:
            num = msr - mse;
            den = msr + (k - 1) * mse;
            break;
        case IccForm::one_way_random_single: {
            const double msw = (ss_cols + ss_err) / (n * (k - 1));
            num = msr - msw;
            den = msr + (k - 1) * msw;
            break;
        }
    }
    if (std::abs(den) < 1e-15)
        fail(Errc::degenerate, "icc: degenerate variance (all cells equal?)");
    return num / den;
}

// ─── Weighted kappa ─────────────────────────────────────────────────────────

enum class KappaWeights { quadratic, linear };

// Cohen's weighted kappa over the fixed 1..5 ordinal scale.
inline double weighted_kappa(std::span<const int> a, std::span<const int> b,
                             KappaWeights weights = KappaWeights::quadratic) {
    constexpr int kCategories = 5;
    if (a.size() != b.size()) fail(Errc::length_mismatch, "weighted_kappa: length mismatch");
    if (a.size() < 2) fail(Errc::insufficient_data, "weighted_kappa needs >= 2 items");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] < 1 || a[i] > kCategories || b[i] < 1 || b[i] > kCategories)
            fail(Errc::range, "weighted_kappa: rating outside 1..5");
    double observed[kCategories][kCategories] = {};
    double pa[kCategories] = {}, pb[kCategories] = {};
    const double n = static_cast<double>(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        observed[a[i] - 1][b[i] - 1] += 1.0 / n;
        pa[a[i] - 1] += 1.0 / n;
        pb[b[i] - 1] += 1.0 / n;
    }
    double wo = 0, we = 0;
    for (int i = 0; i < kCategories; ++i)
        for (int j = 0; j < kCategories; ++j) {
            const double d = std::abs(i - j) / static_cast<double>(kCategories - 1);
            const double w = weights == KappaWeights::quadratic ? d * d : d;
            wo += w * observed[i][j];
            we += w * pa[i] * pb[j];
        }
    if (we <= 1e-15)
        fail(Errc::degenerate, "weighted_kappa: single category used by both raters");
    return 1.0 - wo / we;
}

// ─── Effect size and significance ───────────────────────────────────────────

// Standardized mean difference with pooled (group-size-weighted) SD.
inline double cohens_d(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) fail(Errc::insufficient_data, "cohens_d needs >= 2 per group");
    const double va = sample_variance(a), vb = sample_variance(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2);
    if (pooled <= 0.0) fail(Errc::degenerate, "cohens_d: zero pooled variance");
    return (mean(a) - mean(b)) / std::sqrt(pooled);
}

namespace detail {

// Regularized incomplete beta via Lentz continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

struct WelchResult {
    double t = 0;
    double df = 0;
    double p_two_sided = 1;
};

// Welch's unequal-variance two-sample t-test.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        fail(Errc::insufficient_data, "welch_t_test needs >= 2 per group");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
    if (va + vb <= 0.0) fail(Errc::degenerate, "welch_t_test: zero variance in both groups");
    WelchResult r;
    r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) /
           (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    // Two-sided p from the t CDF: 2*(1-F(|t|)) = I_{df/(df+t^2)}(df/2, 1/2).
    const double x = r.df / (r.df + r.t * r.t);
    r.p_two_sided = std::clamp(detail::incomplete_beta(r.df / 2.0, 0.5, x), 0.0, 1.0);
    return r;
}

}  // namespace tritier::stats
