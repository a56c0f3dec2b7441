#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "lvbuddy/errors.hpp"
#include "lvbuddy/model.hpp"
#include "lvbuddy/synthgen.hpp"

using namespace lvbuddy;
using namespace testutil;

namespace {

ScenarioConfig small_cfg(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.seed = seed;
    cfg.n_profiles = 30;
    cfg.n_feeders = 3;
    cfg.window_days = 14;
    return cfg;
}

}  // namespace

TEST_CASE("scenario config validation") {
    ScenarioConfig cfg = small_cfg(1);
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("counts must be >= 1") {
        cfg.n_profiles = 0;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("probabilities in [0,1]") {
        cfg.nondom_fraction = 1.5;
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("infeasible class statistics rejected") {
        cfg.pc1 = {10.0, 50.0, 9.9, 10.1};  // std far beyond what the range allows
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    }
    SUBCASE("JSON round-trip preserves the config") {
        cfg.nondom_fraction = 0.25;
        cfg.qmr_gross_prob = 0.1;
        cfg.holidays.add_bank({2014, 4, 18});
        const ScenarioConfig back = scenario_from_json(scenario_to_json(cfg));
        CHECK(scenario_to_json(back) == scenario_to_json(cfg));
    }
}

TEST_CASE("generate_pool class counts match the 199:15 split") {
    ScenarioConfig cfg;
    cfg.seed = 3;
    cfg.n_profiles = 214;
    cfg.pc1_ratio = 199.0 / 214.0;
    cfg.window_days = 14;
    const auto pool = generate_pool(cfg);
    int pc1 = 0, pc2 = 0;
    for (const auto& p : pool.profiles) {
        if (!p.group.domestic) continue;
        (p.group.profile_class == 1 ? pc1 : pc2) += 1;
    }
    CHECK(pc1 == 199);
    CHECK(pc2 == 15);
    CHECK_NOTHROW(pool.audit());
}

TEST_CASE("generated PC1 mean daily lands within 10% of the class target") {
    ScenarioConfig cfg;
    cfg.seed = 12;
    cfg.n_profiles = 199;
    cfg.pc1_ratio = 1.0;
    cfg.window_days = 14;
    const auto pool = generate_pool(cfg);
    double sum = 0.0;
    int n = 0;
    for (const auto& p : pool.profiles) {
        if (!p.group.domestic || p.group.profile_class != 1) continue;
        sum += p.mean_daily;
        ++n;
        CHECK(p.mean_daily > 0.0);
    }
    REQUIRE(n == 199);
    CHECK(std::abs(sum / n - cfg.pc1.mean) < 0.10 * cfg.pc1.mean);
}

TEST_CASE("same seed twice gives bit-identical pools") {
    const auto a = generate_pool(small_cfg(77));
    const auto b = generate_pool(small_cfg(77));
    REQUIRE(a.profiles.size() == b.profiles.size());
    for (std::size_t i = 0; i < a.profiles.size(); ++i) {
        CHECK(a.profiles[i].id == b.profiles[i].id);
        CHECK(a.profiles[i].series.values == b.profiles[i].series.values);
    }
    const auto c = generate_pool(small_cfg(78));
    CHECK(a.profiles[0].series.values != c.profiles[0].series.values);
}

TEST_CASE("pool includes one annualized standard profile per catalogue type") {
    const auto pool = generate_pool(small_cfg(5));
    for (const auto& sp : builtin_catalogue()) {
        const auto* p = pool.find("nd-" + sp.type_tag);
        REQUIRE(p != nullptr);
        CHECK(p->mean_daily == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("noiseless feeder: substation equals the truth aggregate exactly") {
    ScenarioConfig cfg = small_cfg(9);
    cfg.noise_level = 0.1;  // pool noise is fine; feeder-level must be clean
    cfg.substation_noise = 0.0;
    cfg.qmr_sigma = 0.0;
    cfg.nondom_fraction = 0.3;
    const auto pool = generate_pool(cfg);
    const auto gf = generate_feeder(cfg, pool, 0);
    REQUIRE(gf.feeder.substation_series.has_value());
    CHECK_NOTHROW(validate_assignment(gf.feeder, gf.truth, pool));

    const auto mean_daily = resolve_mean_daily({gf.feeder});
    const auto agg = aggregate_assignment(gf.feeder, gf.truth, pool, mean_daily);
    REQUIRE(agg.values.size() == gf.feeder.substation_series->values.size());
    for (std::size_t t = 0; t < agg.values.size(); ++t)
        CHECK(gf.feeder.substation_series->values[t] == doctest::Approx(agg.values[t]).epsilon(1e-9));
}

TEST_CASE("QMR error models") {
    ScenarioConfig cfg = small_cfg(21);
    cfg.nondom_fraction = 0.0;

    SUBCASE("zero QMR error reproduces the true mean daily") {
        const auto pool = generate_pool(cfg);
        const auto gf = generate_feeder(cfg, pool, 0);
        for (std::size_t j = 0; j < gf.feeder.customers.size(); ++j) {
            REQUIRE(gf.feeder.customers[j].qmr_mean_daily.has_value());
            CHECK(*gf.feeder.customers[j].qmr_mean_daily ==
                  doctest::Approx(gf.true_mean_daily[j]).epsilon(1e-12));
        }
    }
    SUBCASE("gross-error probability 1 puts every QMR in the configured factor range") {
        cfg.qmr_gross_prob = 1.0;
        cfg.qmr_gross_min = 0.01;
        cfg.qmr_gross_max = 0.01;
        const auto pool = generate_pool(cfg);
        const auto gf = generate_feeder(cfg, pool, 0);
        for (std::size_t j = 0; j < gf.feeder.customers.size(); ++j) {
            REQUIRE(gf.feeder.customers[j].qmr_mean_daily.has_value());
            CHECK(*gf.feeder.customers[j].qmr_mean_daily ==
                  doctest::Approx(0.01 * gf.true_mean_daily[j]).epsilon(1e-9));
        }
    }
    SUBCASE("missing probability 1 drops every QMR") {
        cfg.qmr_missing_prob = 1.0;
        const auto pool = generate_pool(cfg);
        const auto gf = generate_feeder(cfg, pool, 0);
        for (const auto& c : gf.feeder.customers) CHECK_FALSE(c.qmr_mean_daily.has_value());
    }
}

TEST_CASE("a 146-customer domestic feeder is generable") {
    ScenarioConfig cfg = small_cfg(31);
    cfg.n_profiles = 60;
    cfg.customers_min = 146;
    cfg.customers_max = 146;
    cfg.nondom_fraction = 0.0;
    const auto pool = generate_pool(cfg);
    const auto gf = generate_feeder(cfg, pool, 0);
    CHECK(gf.feeder.customers.size() == 146);
    CHECK(gf.feeder.count_non_domestic() == 0);
    CHECK_NOTHROW(validate_assignment(gf.feeder, gf.truth, pool));
}

TEST_CASE("truth alpha respects the clamp and scenario determinism holds") {
    ScenarioConfig cfg = small_cfg(55);
    cfg.nondom_fraction = 0.5;
    cfg.alpha_spread = 0.39;
    const auto sc1 = generate_scenario(cfg);
    const auto sc2 = generate_scenario(cfg);
    REQUIRE(sc1.feeders.size() == sc2.feeders.size());
    bool saw_alpha = false;
    for (std::size_t i = 0; i < sc1.feeders.size(); ++i) {
        CHECK(sc1.feeders[i].feeder.substation_series->values ==
              sc2.feeders[i].feeder.substation_series->values);
        for (const auto& ch : sc1.feeders[i].truth.choices) {
            if (!ch.alpha) continue;
            saw_alpha = true;
            CHECK(*ch.alpha >= kAlphaMin);
            CHECK(*ch.alpha <= kAlphaMax);
        }
    }
    CHECK(saw_alpha);
}

TEST_CASE("solar profiles are flagged allows_negative and carry a midday dip") {
    ScenarioConfig cfg = small_cfg(8);
    cfg.solar_fraction = 0.5;
    cfg.solar_capacity = 8.0;
    const auto pool = generate_pool(cfg);
    int solar = 0;
    for (const auto& p : pool.profiles) {
        if (!p.group.domestic || !p.group.solar) continue;
        ++solar;
        CHECK(p.series.allows_negative);
    }
    CHECK(solar > 0);
}
