#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lvbuddy/errors.hpp"
#include "lvbuddy/evaluation.hpp"
#include "lvbuddy/rng.hpp"

using namespace lvbuddy;
using namespace testutil;

TEST_CASE("rmae examples, oracle and scale invariance") {
    const Date start{2014, 1, 6};
    const auto actual = constant_series(start, 1, 1.0);
    SUBCASE("identity") { CHECK(rmae(actual, actual) == 0.0); }
    SUBCASE("constant offset") {
        const auto est = constant_series(start, 1, 1.1);
        CHECK(rmae(actual, est) == doctest::Approx(0.1).epsilon(1e-12));
    }
    SUBCASE("random pair equals a slot-by-slot oracle, and scaling cancels") {
        Rng rng(4);
        const auto a = make_series(start, 3, [&](std::size_t) { return rng.uniform(0.5, 2.0); });
        const auto e = make_series(start, 3, [&](std::size_t) { return rng.uniform(0.5, 2.0); });
        double num = 0.0, den = 0.0;
        for (std::size_t t = 0; t < a.values.size(); ++t) {
            num += std::abs(a.values[t] - e.values[t]);
            den += a.values[t];
        }
        CHECK(rmae(a, e) == doctest::Approx(num / den).epsilon(1e-12));
        auto ca = a, ce = e;
        for (auto& v : ca.values) v *= 7.5;
        for (auto& v : ce.values) v *= 7.5;
        CHECK(rmae(ca, ce) == doctest::Approx(rmae(a, e)).epsilon(1e-12));
    }
    SUBCASE("zero total demand is an error") {
        CHECK_THROWS_AS(rmae(constant_series(start, 1, 0.0), actual), NumericError);
    }
}

TEST_CASE("normalized_crps examples and invariance") {
    const Date start{2014, 1, 6};
    const auto actual = constant_series(start, 2, 1.0);
    SUBCASE("bands equal to actual score zero") {
        ConfidenceBands b;
        b.lower = actual;
        b.upper = actual;
        CHECK(normalized_crps(actual, b) == 0.0);
    }
    SUBCASE("closed form: lower 0.9, upper 1.1 -> 0.01") {
        ConfidenceBands b;
        b.lower = constant_series(start, 2, 0.9);
        b.upper = constant_series(start, 2, 1.1);
        CHECK(normalized_crps(actual, b) == doctest::Approx(0.01).epsilon(1e-12));
    }
    SUBCASE("random case equals a brute-force pinball loop and scales out") {
        Rng rng(6);
        const auto a = make_series(start, 2, [&](std::size_t) { return rng.uniform(0.5, 2.0); });
        ConfidenceBands b;
        b.lower = make_series(start, 2, [&](std::size_t) { return rng.uniform(0.3, 1.0); });
        b.upper = make_series(start, 2, [&](std::size_t) { return rng.uniform(1.0, 2.5); });
        double sum = 0.0, mean = 0.0;
        for (std::size_t t = 0; t < a.values.size(); ++t) {
            sum += 0.5 * (pinball(a.values[t] - b.lower.values[t], 0.1) +
                          pinball(a.values[t] - b.upper.values[t], 0.9));
            mean += a.values[t];
        }
        const double n = static_cast<double>(a.values.size());
        const double oracle = (sum / n) / (mean / n);
        CHECK(normalized_crps(a, b) == doctest::Approx(oracle).epsilon(1e-12));

        auto ca = a;
        ConfidenceBands cb = b;
        for (auto& v : ca.values) v *= 3.0;
        for (auto& v : cb.lower.values) v *= 3.0;
        for (auto& v : cb.upper.values) v *= 3.0;
        CHECK(normalized_crps(ca, cb) == doctest::Approx(normalized_crps(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("power_law_fit: exact, noisy recovery, equivariance, coverage") {
    SUBCASE("points exactly on y = 2 x^-0.5") {
        std::vector<std::pair<double, double>> pts;
        for (double x : {0.5, 1.0, 2.0, 5.0, 10.0, 40.0}) pts.emplace_back(x, 2.0 * std::pow(x, -0.5));
        const auto fit = power_law_fit(pts);
        CHECK(fit.a == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(fit.b == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(fit.residual_std == doctest::Approx(0.0).epsilon(1e-10));
        CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-10));
        for (bool inside : fit.inside) CHECK(inside);
    }
    SUBCASE("noisy recovery within 3 combined standard errors") {
        Rng rng(8);
        const double a_true = 1.7, b_true = 0.8, noise = 0.2;
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 200; ++i) {
            const double x = std::exp(rng.uniform(-1.0, 3.0));
            pts.emplace_back(x, a_true * std::pow(x, -b_true) * std::exp(noise * rng.normal()));
        }
        const auto fit = power_law_fit(pts);
        // standard errors of the log-log regression slope/intercept
        double mx = 0.0;
        for (auto& [x, y] : pts) mx += std::log(x);
        mx /= pts.size();
        double sxx = 0.0;
        for (auto& [x, y] : pts) sxx += (std::log(x) - mx) * (std::log(x) - mx);
        const double se_b = fit.residual_std / std::sqrt(sxx);
        const double se_a = fit.residual_std * std::sqrt(1.0 / pts.size() + mx * mx / sxx);
        CHECK(std::abs(fit.b - b_true) < 3 * se_b);
        CHECK(std::abs(std::log(fit.a) - std::log(a_true)) < 3 * se_a);
    }
    SUBCASE("scaling y by c multiplies a by c and leaves b alone") {
        Rng rng(9);
        std::vector<std::pair<double, double>> pts, scaled;
        for (int i = 0; i < 30; ++i) {
            const double x = std::exp(rng.uniform(0.0, 2.0));
            const double y = 3.0 * std::pow(x, -0.4) * std::exp(0.1 * rng.normal());
            pts.emplace_back(x, y);
            scaled.emplace_back(x, 5.0 * y);
        }
        const auto f1 = power_law_fit(pts);
        const auto f2 = power_law_fit(scaled);
        CHECK(f2.a == doctest::Approx(5.0 * f1.a).epsilon(1e-9));
        CHECK(f2.b == doctest::Approx(f1.b).epsilon(1e-9));
    }
    SUBCASE("99% band coverage is approximately 99% over many points") {
        Rng rng(10);
        int inside = 0, total = 0;
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<std::pair<double, double>> pts;
            for (int i = 0; i < 300; ++i) {
                const double x = std::exp(rng.uniform(-1.0, 2.0));
                pts.emplace_back(x, std::pow(x, -0.6) * std::exp(0.3 * rng.normal()));
            }
            const auto fit = power_law_fit(pts);
            for (bool in : fit.inside) {
                inside += in ? 1 : 0;
                ++total;
            }
        }
        const double rate = static_cast<double>(inside) / total;
        CHECK(rate > 0.975);
        CHECK(rate < 0.999);
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(power_law_fit({{1.0, 1.0}, {2.0, 0.5}}), DataError);
        CHECK_THROWS_AS(power_law_fit({{1.0, 1.0}, {2.0, 0.5}, {3.0, -0.1}}), DataError);
    }
}

TEST_CASE("alpha_histogram") {
    SUBCASE("point mass at 1.0 lands in one central bin") {
        std::map<double, std::vector<double>> per_w{{0.5, std::vector<double>(37, 1.0)}};
        const auto h = alpha_histogram(per_w);
        const auto& counts = h.counts_per_w.at(0.5);
        int nonzero = 0, total = 0;
        for (int c : counts) {
            nonzero += c > 0 ? 1 : 0;
            total += c;
        }
        CHECK(nonzero == 1);
        CHECK(total == 37);
        // 1.0 sits exactly at the centre of [0.8, 1.2]
        CHECK(counts[10] == 37);
    }
    SUBCASE("uniform draws spread over all bins") {
        Rng rng(11);
        std::vector<double> alphas;
        for (int i = 0; i < 20000; ++i) alphas.push_back(rng.uniform(0.8, 1.2));
        const auto h = alpha_histogram({{0.0, alphas}});
        const auto& counts = h.counts_per_w.at(0.0);
        REQUIRE(static_cast<int>(counts.size()) == h.n_bins);
        for (int c : counts) {
            CHECK(c > 700);  // expectation 1000 per bin
            CHECK(c < 1300);
        }
    }
    SUBCASE("boundary values are kept") {
        const auto h = alpha_histogram({{1.0, {0.8, 1.2}}});
        int total = 0;
        for (int c : h.counts_per_w.at(1.0)) total += c;
        CHECK(total == 2);
    }
}

TEST_CASE("proportion buckets") {
    CHECK(proportion_bucket(0.0) == ProportionBucket::None);
    CHECK(proportion_bucket(0.03) == ProportionBucket::Small);
    CHECK(proportion_bucket(0.05) == ProportionBucket::Medium);
    CHECK(proportion_bucket(0.095) == ProportionBucket::Medium);
    CHECK(proportion_bucket(0.2) == ProportionBucket::Large);
    CHECK(bucket_name(ProportionBucket::None) == "none");
    CHECK(bucket_name(ProportionBucket::Small) == "small");
    CHECK(bucket_name(ProportionBucket::Medium) == "medium");
    CHECK(bucket_name(ProportionBucket::Large) == "large");
    // 2 of 21 customers: ~9.5% -> medium
    CHECK(proportion_bucket(2.0 / 21.0) == ProportionBucket::Medium);
}

TEST_CASE("feeder_summary") {
    const Date start{2014, 1, 6};  // Monday
    SUBCASE("constant series: flat weekly profile, constant daily totals") {
        Feeder f;
        f.id = "f";
        f.customers = {domestic_customer("c1", 10.0)};
        f.substation_series = constant_series(start, 14, 0.5);
        const auto s = feeder_summary(f);
        REQUIRE(s.daily_totals.size() == 14);
        for (double v : s.daily_totals) CHECK(v == doctest::Approx(24.0).epsilon(1e-12));
        REQUIRE(s.mean_weekly_profile.size() == kSlotsPerWeek);
        for (double v : s.mean_weekly_profile) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.proportion_nondom == 0.0);
        CHECK(s.bucket == ProportionBucket::None);
    }
    SUBCASE("weekly profile averages aligned weeks") {
        Feeder f;
        f.id = "f";
        f.customers = {domestic_customer("c1", 10.0), nd_customer("c2", "school", 5.0)};
        // week 1 at level 1, week 2 at level 3 -> mean weekly 2
        f.substation_series = make_series(start, 14, [](std::size_t t) {
            return t < static_cast<std::size_t>(kSlotsPerWeek) ? 1.0 : 3.0;
        });
        const auto s = feeder_summary(f);
        for (double v : s.mean_weekly_profile) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(s.proportion_nondom == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.bucket == ProportionBucket::Large);
    }
    SUBCASE("missing substation series is an error") {
        Feeder f;
        f.id = "f";
        f.customers = {domestic_customer("c1", 10.0)};
        CHECK_THROWS_AS(feeder_summary(f), DataError);
    }
}

TEST_CASE("spearman rank correlation") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spearman({1, 2, 3, 4}, {40, 30, 20, 10}) == doctest::Approx(-1.0).epsilon(1e-12));
    // monotone but nonlinear is still rho = 1
    CHECK(spearman({1, 2, 3, 4, 5}, {1, 8, 27, 64, 125}) == doctest::Approx(1.0).epsilon(1e-12));
    // ties get average ranks
    const double rho = spearman({1, 2, 2, 3}, {1, 2, 3, 4});
    CHECK(rho > 0.8);
    CHECK(rho < 1.0);
}
