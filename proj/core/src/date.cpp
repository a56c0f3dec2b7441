#include "lvbuddy/date.hpp"

#include <cstdio>
#include <tuple>

#include "lvbuddy/errors.hpp"

namespace lvbuddy {
namespace {

// Days-from-civil / civil-from-days (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::tuple<int, int, int> civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

}  // namespace

Date::Date(int year, int month, int day) : serial_(days_from_civil(year, month, day)) {
    auto [y, m, d] = civil_from_days(serial_);
    if (y != year || m != month || d != day)
        throw DataError("invalid calendar date");
}

Date Date::from_serial(std::int64_t serial) {
    Date dt;
    dt.serial_ = serial;
    return dt;
}

Date Date::parse(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3)
        throw DataError("bad date '" + iso + "', expected YYYY-MM-DD");
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw DataError("bad date '" + iso + "'");
    return Date(y, m, d);
}

int Date::year() const { return std::get<0>(civil_from_days(serial_)); }
int Date::month() const { return std::get<1>(civil_from_days(serial_)); }
int Date::day() const { return std::get<2>(civil_from_days(serial_)); }

int Date::weekday() const {
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    std::int64_t w = (serial_ + 3) % 7;
    if (w < 0) w += 7;
    return static_cast<int>(w);
}

std::string Date::to_string() const {
    auto [y, m, d] = civil_from_days(serial_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

}  // namespace lvbuddy
