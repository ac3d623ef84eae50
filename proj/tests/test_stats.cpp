#include <catch2/catch.hpp>

#include <cmath>

#include "support/oracles.hpp"
#include "tritier/rng.hpp"
#include "tritier/stats.hpp"

using namespace tritier;
using namespace tritier::stats;

TEST_CASE("pearson_r fundamentals") {
    SECTION("exact linear relation -> 1") {
        std::vector<double> xs = {1, 2, 3, 4};
        std::vector<double> ys = {2, 4, 6, 8};
        CHECK(pearson_r(xs, ys) == Approx(1.0).margin(1e-12));
    }
    SECTION("negated input -> -1") {
        std::vector<double> xs = {1, 2, 3, 4};
        std::vector<double> ys = {-1, -2, -3, -4};
        CHECK(pearson_r(xs, ys) == Approx(-1.0).margin(1e-12));
    }
    SECTION("frozen 8-point fixture") {
        std::vector<double> xs = {1.2, 2.3, 3.1, 4.8, 5.5, 6.1, 7.9, 8.4};
        std::vector<double> ys = {2.0, 2.9, 4.2, 4.1, 6.3, 5.9, 8.1, 8.0};
        CHECK(pearson_r(xs, ys) == Approx(0.972705919450398).margin(1e-9));
        CHECK(pearson_r(xs, ys) == Approx(oracle::pearson(xs, ys)).margin(1e-12));
    }
    SECTION("degenerate variance raises") {
        std::vector<double> xs = {1, 1, 1};
        std::vector<double> ys = {1, 2, 3};
        CHECK_THROWS_MATCHES(pearson_r(xs, ys), Error, Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == Errc::degenerate; }));
    }
    SECTION("length mismatch raises") {
        std::vector<double> xs = {1, 2, 3};
        std::vector<double> ys = {1, 2};
        CHECK_THROWS_AS(pearson_r(xs, ys), Error);
    }
}

TEST_CASE("icc(2,1) fundamentals") {
    SECTION("two identical rater columns -> 1") {
        RatingMatrix m;
        m.subjects = {"s1", "s2", "s3", "s4"};
        m.raters = {"a", "b"};
        m.values = {{1, 1}, {2, 2}, {3, 3}, {4.5, 4.5}};
        CHECK(icc(m) == Approx(1.0).margin(1e-12));
    }
    SECTION("all cells equal is degenerate") {
        RatingMatrix m;
        m.subjects = {"s1", "s2"};
        m.raters = {"a", "b"};
        m.values = {{3, 3}, {3, 3}};
        CHECK_THROWS_MATCHES(icc(m), Error, Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == Errc::degenerate; }));
    }
    SECTION("frozen 6x2 fixture matches the ANOVA oracle") {
        RatingMatrix m;
        m.subjects = {"s1", "s2", "s3", "s4", "s5", "s6"};
        m.raters = {"a", "b"};
        m.values = {{3.5, 3.0}, {4.0, 4.5}, {2.5, 2.0}, {5.0, 4.5}, {3.0, 3.5}, {4.5, 5.0}};
        CHECK(icc(m) == Approx(0.880952380952381).margin(1e-9));
        CHECK(icc(m) == Approx(oracle::icc_2_1(m.values)).margin(1e-12));
    }
    SECTION("systematic rater offset can push ICC(2,1) negative") {
        RatingMatrix m;
        m.subjects = {"s1", "s2", "s3", "s4"};
        m.raters = {"a", "b"};
        m.values = {{1.0, 4.9}, {1.2, 5.0}, {1.1, 4.8}, {1.3, 4.7}};
        CHECK(icc(m) < 0.0);
    }
    SECTION("other forms are selectable") {
        RatingMatrix m;
        m.subjects = {"s1", "s2", "s3", "s4"};
        m.raters = {"a", "b"};
        m.values = {{1, 2}, {2, 3}, {3, 4}, {4, 5}};
        // Consistency form ignores the constant offset entirely.
        CHECK(icc(m, IccForm::two_way_mixed_consistency_single) == Approx(1.0).margin(1e-9));
        CHECK(icc(m, icc_form_from_name("two-way-random-absolute-single")) ==
              Approx(icc(m)).margin(1e-12));
        CHECK_THROWS_AS(icc_form_from_name("nonsense"), Error);
    }
}

TEST_CASE("weighted_kappa fundamentals") {
    SECTION("perfect agreement -> 1") {
        std::vector<int> a = {1, 3, 5, 2, 4, 1};
        CHECK(weighted_kappa(a, a) == Approx(1.0).margin(1e-12));
    }
    SECTION("single category used by both raters is degenerate") {
        std::vector<int> a = {3, 3, 3};
        CHECK_THROWS_MATCHES(weighted_kappa(a, a), Error, Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == Errc::degenerate; }));
    }
    SECTION("frozen 10-item fixture, quadratic and linear") {
        std::vector<int> a = {1, 2, 3, 4, 5, 3, 2, 4, 5, 1};
        std::vector<int> b = {1, 3, 3, 4, 4, 2, 2, 5, 5, 2};
        CHECK(weighted_kappa(a, b) == Approx(0.864864864864865).margin(1e-9));
        CHECK(weighted_kappa(a, b, KappaWeights::linear) ==
              Approx(0.675324675324675).margin(1e-9));
        CHECK(weighted_kappa(a, b) == Approx(oracle::weighted_kappa(a, b, true)).margin(1e-12));
    }
    SECTION("out-of-range category raises") {
        std::vector<int> a = {1, 6};
        std::vector<int> b = {1, 2};
        CHECK_THROWS_AS(weighted_kappa(a, b), Error);
    }
}

TEST_CASE("cohens_d fundamentals") {
    SECTION("equal means -> 0") {
        std::vector<double> a = {1, 2, 3};
        std::vector<double> b = {1.5, 2.0, 2.5};
        CHECK(cohens_d(a, b) == Approx(0.0).margin(1e-12));
    }
    SECTION("identical groups up to relabeling -> 0") {
        std::vector<double> a = {2, 3, 4};
        std::vector<double> b = {4, 2, 3};
        CHECK(cohens_d(a, b) == Approx(0.0).margin(1e-12));
    }
    SECTION("frozen two-group fixture") {
        std::vector<double> a = {3.1, 3.5, 2.9, 3.8, 3.3, 3.6};
        std::vector<double> b = {2.7, 3.0, 2.5, 3.2, 2.9};
        CHECK(cohens_d(a, b) == Approx(1.653215965441652).margin(1e-9));
        CHECK(cohens_d(a, b) == Approx(oracle::cohens_d(a, b)).margin(1e-12));
    }
    SECTION("shift by +0.5 at equal SD gives a definitional d") {
        std::vector<double> a = {3.0, 3.5, 4.0, 4.5, 3.5, 3.5};
        std::vector<double> b;
        for (double x : a) b.push_back(x - 0.5);
        const double sd = sample_stddev(a);
        CHECK(cohens_d(a, b) == Approx(0.5 / sd).margin(1e-9));
    }
    SECTION("zero pooled variance raises") {
        std::vector<double> a = {2, 2, 2};
        std::vector<double> b = {3, 3};
        CHECK_THROWS_AS(cohens_d(a, b), Error);
    }
}

TEST_CASE("welch_t_test produces sane p-values") {
    SECTION("identical distributions -> p near 1") {
        std::vector<double> a = {1, 2, 3, 4, 5};
        const auto r = welch_t_test(a, a);
        CHECK(r.t == Approx(0.0).margin(1e-12));
        CHECK(r.p_two_sided == Approx(1.0).margin(1e-9));
    }
    SECTION("clearly separated groups -> tiny p") {
        std::vector<double> a = {1.0, 1.1, 0.9, 1.05, 0.95, 1.02, 0.98, 1.01};
        std::vector<double> b = {3.0, 3.1, 2.9, 3.05, 2.95, 3.02, 2.98, 3.01};
        const auto r = welch_t_test(a, b);
        CHECK(r.p_two_sided < 1e-6);
        CHECK(r.t < 0);
    }
    SECTION("p-value is symmetric under group swap") {
        std::vector<double> a = {1, 2, 3, 4, 7};
        std::vector<double> b = {2, 4, 5, 6, 6};
        CHECK(welch_t_test(a, b).p_two_sided == Approx(welch_t_test(b, a).p_two_sided).margin(1e-12));
    }
}

// ─── Property tests over random fixtures ────────────────────────────────────

TEST_CASE("property: statistics match their oracles on random fixtures") {
    Rng rng(321);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = 3 + rng.below(40);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform(0.0, 5.0);
            ys[i] = 0.3 * xs[i] + rng.uniform(0.0, 3.0);
        }
        CHECK(pearson_r(xs, ys) == Approx(oracle::pearson(xs, ys)).margin(1e-9));

        RatingMatrix m;
        for (std::size_t i = 0; i < n; ++i) {
            m.subjects.push_back(std::to_string(i));
            m.values.push_back({xs[i], ys[i]});
        }
        m.raters = {"a", "b"};
        CHECK(icc(m) == Approx(oracle::icc_2_1(m.values)).margin(1e-9));
        CHECK(icc(m) <= 1.0 + 1e-12);

        std::vector<double> group_b(ys.begin(), ys.begin() + n / 2 + 2);
        CHECK(cohens_d(xs, group_b) == Approx(oracle::cohens_d(xs, group_b)).margin(1e-9));

        std::vector<int> ka(n), kb(n);
        bool multi = false;
        for (std::size_t i = 0; i < n; ++i) {
            ka[i] = 1 + static_cast<int>(rng.below(5));
            kb[i] = std::clamp(ka[i] + static_cast<int>(rng.below(3)) - 1, 1, 5);
            multi = multi || ka[i] != ka[0] || kb[i] != kb[0];
        }
        if (multi)
            CHECK(weighted_kappa(ka, kb) ==
                  Approx(oracle::weighted_kappa(ka, kb, true)).margin(1e-9));
    }
}

TEST_CASE("property: invariances of pearson and cohens_d") {
    Rng rng(322);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = 3 + rng.below(20);
        std::vector<double> xs(n), ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform(0.0, 5.0);
            ys[i] = rng.uniform(0.0, 5.0) + 0.2 * xs[i];
        }
        double r0, d0;
        try {
            r0 = pearson_r(xs, ys);
            d0 = cohens_d(xs, ys);
        } catch (const Error&) {
            continue;
        }
        const double shift = rng.uniform(-3.0, 3.0);
        std::vector<double> xs_s = xs, ys_s = ys;
        for (auto& v : xs_s) v += shift;
        for (auto& v : ys_s) v += shift;
        CHECK(pearson_r(xs_s, ys_s) == Approx(r0).margin(1e-9));
        CHECK(cohens_d(xs_s, ys_s) == Approx(d0).margin(1e-9));
        // positive affine rescale of one input leaves pearson unchanged
        const double a = rng.uniform(0.2, 4.0), b = rng.uniform(-2.0, 2.0);
        std::vector<double> xs_a = xs;
        for (auto& v : xs_a) v = a * v + b;
        CHECK(pearson_r(xs_a, ys) == Approx(r0).margin(1e-9));
        // swapping groups negates d
        CHECK(cohens_d(ys, xs) == Approx(-d0).margin(1e-9));
    }
}

TEST_CASE("property: kappa symmetry and icc duplicated-column identity") {
    Rng rng(323);
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t n = 4 + rng.below(20);
        std::vector<int> a(n), b(n);
        bool varied = false;
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = 1 + static_cast<int>(rng.below(5));
            b[i] = 1 + static_cast<int>(rng.below(5));
            varied = varied || a[i] != a[0] || b[i] != b[0];
        }
        if (varied) {
            double k1, k2;
            try {
                k1 = weighted_kappa(a, b);
                k2 = weighted_kappa(b, a);
            } catch (const Error&) {
                continue;
            }
            CHECK(k1 == Approx(k2).margin(1e-12));
            CHECK(weighted_kappa(a, a) == Approx(1.0).margin(1e-12));
        }
        std::vector<double> col(n);
        bool distinct = false;
        for (std::size_t i = 0; i < n; ++i) {
            col[i] = rng.uniform(1.0, 5.0);
            distinct = distinct || std::abs(col[i] - col[0]) > 1e-9;
        }
        if (distinct) {
            RatingMatrix m;
            m.raters = {"a", "b"};
            for (std::size_t i = 0; i < n; ++i) {
                m.subjects.push_back(std::to_string(i));
                m.values.push_back({col[i], col[i]});
            }
            const double v = icc(m);
            CHECK(v == Approx(1.0).margin(1e-9));
            CHECK(v <= 1.0 + 1e-12);
        }
    }
}
