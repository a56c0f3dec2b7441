#include "lvbuddy/series.hpp"

#include <cmath>
#include <cstdio>

#include "lvbuddy/errors.hpp"

namespace lvbuddy {

void HalfHourlySeries::validate(bool allow_missing) const {
    if (values.empty() || values.size() % kSlotsPerDay != 0)
        throw DataError("series length must be a positive multiple of 48, got " +
                        std::to_string(values.size()));
    for (std::size_t t = 0; t < values.size(); ++t) {
        const double v = values[t];
        if (std::isnan(v)) {
            if (allow_missing) continue;
            throw DataError("series has missing value at slot " + std::to_string(t));
        }
        if (!std::isfinite(v))
            throw DataError("series has non-finite value at slot " + std::to_string(t));
        if (v < 0.0 && !allows_negative)
            throw DataError("series has negative value at slot " + std::to_string(t));
    }
}

HalfHourlySeries HalfHourlySeries::slice_days(int day_offset, int n_days) const {
    if (day_offset < 0 || n_days < 1 || (day_offset + n_days) > days())
        throw DataError("slice_days out of range");
    HalfHourlySeries out;
    out.start_date = start_date + day_offset;
    out.allows_negative = allows_negative;
    const std::size_t b = static_cast<std::size_t>(day_offset) * kSlotsPerDay;
    out.values.assign(values.begin() + b, values.begin() + b + static_cast<std::size_t>(n_days) * kSlotsPerDay);
    return out;
}

double mean_daily_demand(const HalfHourlySeries& series) {
    if (series.values.empty())
        throw DataError("mean_daily_demand of empty series");
    if (series.values.size() % kSlotsPerDay != 0)
        throw DataError("mean_daily_demand: length not a multiple of 48");
    double sum = 0.0;
    for (double v : series.values) sum += v;
    return sum / series.days();
}

std::string slot_timestamp(const HalfHourlySeries& series, std::size_t t) {
    const Date d = series.date_of_slot(t);
    const int hh = series.halfhour_of_slot(t);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%sT%02d:%02d", d.to_string().c_str(), hh / 2, (hh % 2) * 30);
    return buf;
}

}  // namespace lvbuddy
