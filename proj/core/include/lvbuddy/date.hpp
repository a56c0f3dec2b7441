#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace lvbuddy {

// Naive local calendar date. Backed by a serial day count so arithmetic
// and weekday lookups are cheap; no time zones, no DST.
class Date {
public:
    Date() = default;
    Date(int year, int month, int day);

    static Date from_serial(std::int64_t serial);
    static Date parse(const std::string& iso);  // "YYYY-MM-DD"

    std::int64_t serial() const { return serial_; }
    int year() const;
    int month() const;
    int day() const;

    // 0 = Monday ... 6 = Sunday.
    int weekday() const;

    Date operator+(std::int64_t days) const { return from_serial(serial_ + days); }
    std::int64_t operator-(const Date& o) const { return serial_ - o.serial_; }
    auto operator<=>(const Date&) const = default;

    std::string to_string() const;

private:
    std::int64_t serial_ = 0;  // days since 1970-01-01
};

}  // namespace lvbuddy
