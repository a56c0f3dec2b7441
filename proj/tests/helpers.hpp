#pragma once

// Shared builders for the unit suites.

#include <functional>
#include <string>
#include <vector>

#include "lvbuddy/ingestion.hpp"
#include "lvbuddy/model.hpp"
#include "lvbuddy/rng.hpp"

namespace testutil {

using namespace lvbuddy;

inline HalfHourlySeries make_series(const Date& start, int days,
                                    const std::function<double(std::size_t)>& fn,
                                    bool allows_negative = false) {
    HalfHourlySeries s;
    s.start_date = start;
    s.allows_negative = allows_negative;
    s.values.resize(static_cast<std::size_t>(days) * kSlotsPerDay);
    for (std::size_t t = 0; t < s.values.size(); ++t) s.values[t] = fn(t);
    return s;
}

inline HalfHourlySeries constant_series(const Date& start, int days, double c) {
    return make_series(start, days, [c](std::size_t) { return c; });
}

inline MonitoredProfile domestic_profile(const std::string& id, const GroupKey& g,
                                         const HalfHourlySeries& series) {
    MonitoredProfile p;
    p.id = id;
    p.group = g;
    p.series = series;
    p.mean_daily = mean_daily_demand(series);
    return p;
}

inline GroupKey dom_group(int pc = 1, int band_group = 0, bool solar = false) {
    GroupKey g;
    g.domestic = true;
    g.profile_class = pc;
    g.band_group = band_group;
    g.solar = solar;
    return g;
}

inline GroupKey nd_group(const std::string& type_tag) {
    GroupKey g;
    g.domestic = false;
    g.type_tag = type_tag;
    return g;
}

inline Customer domestic_customer(const std::string& id, double qmr, char band = 'A',
                                  int pc = 1, bool solar = false) {
    Customer c;
    c.id = id;
    c.cls = DomesticClass{pc, band, solar};
    c.qmr_mean_daily = qmr;
    return c;
}

inline Customer nd_customer(const std::string& id, const std::string& type_tag, double qmr) {
    Customer c;
    c.id = id;
    c.cls = NonDomesticClass{type_tag};
    c.qmr_mean_daily = qmr;
    return c;
}

// A pool with n constant-ish domestic profiles (group pc1-bandA, mean-daily
// values supplied) on a common window.
inline MonitoredPool flat_pool(const Date& start, int days, const std::vector<double>& mean_dailies) {
    MonitoredPool pool;
    pool.start_date = start;
    pool.days = days;
    for (std::size_t i = 0; i < mean_dailies.size(); ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "m%03zu", i);
        pool.add(domestic_profile(id, dom_group(),
                                  constant_series(start, days, mean_dailies[i] / kSlotsPerDay)));
    }
    return pool;
}

}  // namespace testutil
