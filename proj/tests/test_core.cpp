#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "lvbuddy/date.hpp"
#include "lvbuddy/errors.hpp"
#include "lvbuddy/model.hpp"
#include "lvbuddy/rng.hpp"
#include "lvbuddy/series.hpp"

using namespace lvbuddy;
using namespace testutil;

TEST_CASE("date arithmetic and formatting") {
    const Date d{2014, 1, 6};
    CHECK(d.weekday() == 0);  // a Monday
    CHECK((d + 1).weekday() == 1);
    CHECK(Date::parse("2014-01-06") == d);
    CHECK(d.to_string() == "2014-01-06");
    CHECK((Date{2016, 2, 28} + 1) == Date{2016, 2, 29});  // leap year
    CHECK((Date{2015, 2, 28} + 1) == Date{2015, 3, 1});
    CHECK((Date{2014, 12, 31} + 1) == Date{2015, 1, 1});
    CHECK_THROWS_AS(Date::parse("2014-13-01"), DataError);
    CHECK_THROWS_AS(Date::parse("garbage"), DataError);
    // round-trip across several years of serials
    for (std::int64_t k = 0; k < 1500; k += 37) {
        const Date x = Date{2013, 1, 1} + k;
        CHECK(Date::parse(x.to_string()) == x);
    }
}

TEST_CASE("series invariants and slicing") {
    const Date start{2014, 1, 6};
    auto s = constant_series(start, 2, 0.5);
    CHECK_NOTHROW(s.validate());

    SUBCASE("length must be a whole number of days") {
        s.values.pop_back();
        CHECK_THROWS_AS(s.validate(), DataError);
    }
    SUBCASE("negatives rejected unless flagged") {
        s.values[10] = -0.1;
        CHECK_THROWS_AS(s.validate(), DataError);
        s.allows_negative = true;
        CHECK_NOTHROW(s.validate());
    }
    SUBCASE("NaN tolerated only with allow_missing") {
        s.values[3] = std::nan("");
        CHECK_THROWS_AS(s.validate(), DataError);
        CHECK_NOTHROW(s.validate(true));
    }
    SUBCASE("slice_days shifts the start date") {
        const auto sl = s.slice_days(1, 1);
        CHECK(sl.start_date == start + 1);
        CHECK(sl.values.size() == 48);
        CHECK(sl.values[0] == s.values[48]);
    }
    SUBCASE("slot mapping") {
        CHECK(s.date_of_slot(47) == start);
        CHECK(s.date_of_slot(48) == start + 1);
        CHECK(s.halfhour_of_slot(50) == 2);
        CHECK(slot_timestamp(s, 0) == "2014-01-06T00:00");
        CHECK(slot_timestamp(s, 49) == "2014-01-07T00:30");
    }
}

TEST_CASE("mean_daily_demand examples") {
    const Date start{2014, 1, 6};
    // [TRIVIAL] 2 days at 0.5 kWh per slot -> 24 kWh/day
    CHECK(mean_daily_demand(constant_series(start, 2, 0.5)) == doctest::Approx(24.0).epsilon(1e-12));
    // [TRIVIAL] all zeros
    CHECK(mean_daily_demand(constant_series(start, 1, 0.0)) == 0.0);
    // [DERIVED] pseudo-random 7-day series vs an independent straight sum
    Rng rng(99);
    auto s = make_series(start, 7, [&](std::size_t) { return rng.uniform(0.0, 2.0); });
    double oracle = 0.0;
    for (double v : s.values) oracle += v;
    oracle /= 7.0;
    CHECK(mean_daily_demand(s) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK_THROWS_AS(mean_daily_demand(HalfHourlySeries{}), DataError);
}

TEST_CASE("mean_daily_demand is linear") {
    const Date start{2014, 1, 6};
    Rng rng(7);
    auto x = make_series(start, 3, [&](std::size_t) { return rng.uniform(0.0, 1.0); });
    auto y = make_series(start, 3, [&](std::size_t) { return rng.uniform(0.0, 1.0); });
    auto ax = x;
    for (auto& v : ax.values) v *= 2.5;
    auto xy = x;
    for (std::size_t t = 0; t < xy.values.size(); ++t) xy.values[t] += y.values[t];
    CHECK(mean_daily_demand(ax) == doctest::Approx(2.5 * mean_daily_demand(x)).epsilon(1e-12));
    CHECK(mean_daily_demand(xy) ==
          doctest::Approx(mean_daily_demand(x) + mean_daily_demand(y)).epsilon(1e-12));
}

TEST_CASE("class labels and group keys") {
    const CustomerClass dom = DomesticClass{1, 'C', false};
    CHECK(class_label(dom) == "pc1-C");
    CHECK(parse_class_label("pc1-C") == dom);
    const CustomerClass sol = DomesticClass{2, 'A', true};
    CHECK(class_label(sol) == "pc2-A-solar");
    CHECK(parse_class_label("pc2-A-solar") == sol);
    const CustomerClass nd = NonDomesticClass{"school"};
    CHECK(class_label(nd) == "nd-school");
    CHECK(parse_class_label("nd-school") == nd);
    CHECK_THROWS_AS(parse_class_label("pc3-A"), DataError);

    // tax bands A..E are separate; F, G, H merge
    CHECK(tax_band_group('A') != tax_band_group('B'));
    CHECK(tax_band_group('E') == 4);
    CHECK(tax_band_group('F') == tax_band_group('G'));
    CHECK(tax_band_group('G') == tax_band_group('H'));
    CHECK(tax_band_group('F') == 5);

    // solar flag is part of the key
    CHECK(group_key(DomesticClass{1, 'A', true}) != group_key(DomesticClass{1, 'A', false}));
    // F and H customers share a key
    CHECK(group_key(DomesticClass{1, 'F', false}) == group_key(DomesticClass{1, 'H', false}));

    const GroupKey g = group_key(dom);
    CHECK(GroupKey::parse(g.label()) == g);
    const GroupKey gn = group_key(nd);
    CHECK(GroupKey::parse(gn.label()) == gn);
}

TEST_CASE("pool add/candidates/audit") {
    const Date start{2014, 1, 6};
    auto pool = flat_pool(start, 7, {8.0, 9.5, 14.0});
    CHECK(pool.profiles.size() == 3);
    CHECK(pool.candidates(dom_group()).size() == 3);
    CHECK_NOTHROW(pool.audit());

    SUBCASE("duplicate id rejected") {
        CHECK_THROWS_AS(pool.add(domestic_profile("m000", dom_group(), constant_series(start, 7, 1.0))),
                        DataError);
    }
    SUBCASE("window mismatch rejected") {
        CHECK_THROWS_AS(pool.add(domestic_profile("x", dom_group(), constant_series(start, 6, 1.0))),
                        DataError);
    }
    SUBCASE("empty group throws") { CHECK_THROWS_AS(pool.candidates(nd_group("school")), DataError); }
    SUBCASE("audit detects a corrupted cache") {
        pool.profiles[0].mean_daily *= 1.01;
        CHECK_THROWS_AS(pool.audit(), DataError);
    }
}

TEST_CASE("aggregate_assignment examples") {
    const Date start{2014, 1, 6};
    MonitoredPool pool = flat_pool(start, 7, {10.0});
    // a normalized standard profile: constant 1/48 kWh per slot, mean daily 1
    pool.add(domestic_profile("nd-school", nd_group("school"),
                              constant_series(start, 7, 1.0 / kSlotsPerDay)));

    SUBCASE("single domestic customer reproduces its buddy") {
        Feeder f;
        f.id = "f";
        f.customers = {domestic_customer("c1", 10.0)};
        BuddyAssignment a;
        a.choices = {{"m000", std::nullopt}};
        const auto mean_daily = resolve_mean_daily({f});
        const auto agg = aggregate_assignment(f, a, pool, mean_daily);
        for (std::size_t t = 0; t < agg.values.size(); ++t)
            CHECK(agg.values[t] == pool.profiles[0].series.values[t]);
    }
    SUBCASE("single non-domestic, alpha=1, U=10 -> constant 10/48") {
        Feeder f;
        f.id = "f";
        f.customers = {nd_customer("c1", "school", 10.0)};
        BuddyAssignment a;
        a.choices = {{"nd-school", 1.0}};
        const auto mean_daily = resolve_mean_daily({f});
        const auto agg = aggregate_assignment(f, a, pool, mean_daily);
        for (double v : agg.values) CHECK(v == doctest::Approx(10.0 / 48).epsilon(1e-12));
    }
    SUBCASE("mixed feeder matches a per-slot loop oracle and is permutation invariant") {
        MonitoredPool p2 = flat_pool(start, 7, {8.0, 12.0});
        p2.add(domestic_profile("nd-school", nd_group("school"),
                                constant_series(start, 7, 1.0 / kSlotsPerDay)));
        Feeder f;
        f.id = "f";
        f.customers = {domestic_customer("c1", 8.0), domestic_customer("c2", 12.0),
                       nd_customer("c3", "school", 20.0)};
        BuddyAssignment a;
        a.choices = {{"m000", std::nullopt}, {"m001", std::nullopt}, {"nd-school", 1.1}};
        const auto mean_daily = resolve_mean_daily({f});
        const auto agg2 = aggregate_assignment(f, a, p2, mean_daily);
        for (std::size_t t = 0; t < agg2.values.size(); ++t) {
            const double oracle = p2.find("m000")->series.values[t] +
                                  p2.find("m001")->series.values[t] +
                                  1.1 * 20.0 * p2.find("nd-school")->series.values[t];
            CHECK(agg2.values[t] == doctest::Approx(oracle).epsilon(1e-12));
        }
        // permutation invariance
        Feeder fp = f;
        std::swap(fp.customers[0], fp.customers[2]);
        BuddyAssignment ap;
        ap.choices = {a.choices[2], a.choices[1], a.choices[0]};
        const auto aggp = aggregate_assignment(fp, ap, p2, mean_daily);
        for (std::size_t t = 0; t < agg2.values.size(); ++t)
            CHECK(aggp.values[t] == doctest::Approx(agg2.values[t]).epsilon(1e-12));
    }
}

TEST_CASE("validate_assignment enforces group, alpha presence, alpha range") {
    const Date start{2014, 1, 6};
    MonitoredPool pool = flat_pool(start, 7, {10.0});
    pool.add(domestic_profile("nd-school", nd_group("school"),
                              constant_series(start, 7, 1.0 / kSlotsPerDay)));
    Feeder f;
    f.id = "f";
    f.customers = {domestic_customer("c1", 10.0), nd_customer("c2", "school", 5.0)};

    BuddyAssignment ok;
    ok.choices = {{"m000", std::nullopt}, {"nd-school", 1.0}};
    CHECK_NOTHROW(validate_assignment(f, ok, pool));

    BuddyAssignment wrong_group = ok;
    wrong_group.choices[0].profile_id = "nd-school";
    CHECK_THROWS_AS(validate_assignment(f, wrong_group, pool), DataError);

    BuddyAssignment alpha_on_domestic = ok;
    alpha_on_domestic.choices[0].alpha = 1.0;
    CHECK_THROWS_AS(validate_assignment(f, alpha_on_domestic, pool), DataError);

    BuddyAssignment missing_alpha = ok;
    missing_alpha.choices[1].alpha = std::nullopt;
    CHECK_THROWS_AS(validate_assignment(f, missing_alpha, pool), DataError);

    BuddyAssignment alpha_out = ok;
    alpha_out.choices[1].alpha = 1.3;
    CHECK_THROWS_AS(validate_assignment(f, alpha_out, pool), DataError);
}

TEST_CASE("resolve_mean_daily imputation") {
    Feeder f;
    f.id = "f";
    f.customers = {domestic_customer("c1", 10.0), domestic_customer("c2", 14.0)};
    Customer no_qmr = domestic_customer("c3", 0.0);
    no_qmr.qmr_mean_daily.reset();
    f.customers.push_back(no_qmr);

    const auto m = resolve_mean_daily({f});
    CHECK(m.at("c1") == 10.0);
    // same-GroupKey average of the known values
    CHECK(m.at("c3") == doctest::Approx(12.0).epsilon(1e-12));

    // no same-group donor: falls back to the same domestic/non-domestic kind
    Feeder g;
    g.id = "g";
    Customer other_band = domestic_customer("d1", 0.0, 'D');
    other_band.qmr_mean_daily.reset();
    g.customers = {domestic_customer("d2", 8.0, 'B'), other_band};
    const auto m2 = resolve_mean_daily({g});
    CHECK(m2.at("d1") == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("rng determinism and stream independence") {
    Rng a(123), b(123), c(124);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform01(), y = b.uniform01(), z = c.uniform01();
        all_equal = all_equal && (x == y);
        any_diff = any_diff || (x != z);
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    CHECK(all_equal);
    CHECK(any_diff);
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
}
