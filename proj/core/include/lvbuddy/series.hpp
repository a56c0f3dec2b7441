#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lvbuddy/date.hpp"

namespace lvbuddy {

inline constexpr int kSlotsPerDay = 48;
inline constexpr int kSlotsPerWeek = 7 * kSlotsPerDay;

// A half-hourly kWh series covering whole days. Slot t belongs to
// (start_date + t/48, half-hour t%48), slot 0 being 00:00-00:30.
struct HalfHourlySeries {
    Date start_date;
    std::vector<double> values;   // kWh per half-hour
    bool allows_negative = false; // solar-export profiles

    int days() const { return static_cast<int>(values.size()) / kSlotsPerDay; }
    Date date_of_slot(std::size_t t) const { return start_date + static_cast<std::int64_t>(t / kSlotsPerDay); }
    int halfhour_of_slot(std::size_t t) const { return static_cast<int>(t % kSlotsPerDay); }

    // Throws DataError on violation: non-48-multiple length, non-finite
    // values, or negatives where disallowed. NaNs are tolerated only when
    // allow_missing is set (raw data before cleaning).
    void validate(bool allow_missing = false) const;

    // Sub-series of whole days [day_offset, day_offset + n_days).
    HalfHourlySeries slice_days(int day_offset, int n_days) const;
};

// Mean daily demand: sum of all slots divided by the number of days.
double mean_daily_demand(const HalfHourlySeries& series);

// Timestamp "YYYY-MM-DDTHH:MM" for a slot of a series.
std::string slot_timestamp(const HalfHourlySeries& series, std::size_t t);

}  // namespace lvbuddy
