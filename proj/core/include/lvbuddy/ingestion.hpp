#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lvbuddy/model.hpp"

namespace lvbuddy {

struct HolidayCalendar {
    std::set<std::int64_t> bank;    // date serials
    std::set<std::int64_t> school;  // date serials

    void add_bank(const Date& d) { bank.insert(d.serial()); }
    void add_school(const Date& d) { school.insert(d.serial()); }
    bool is_bank(const Date& d) const { return bank.count(d.serial()) > 0; }
    bool is_school(const Date& d) const { return school.count(d.serial()) > 0; }
    bool empty() const { return bank.empty() && school.empty(); }
};

struct CleaningPolicy {
    int donor_count = 4;            // nearest same-weekday same-half-hour slots
    double outlier_sigma = 5.0;     // slot-of-week mean + sigma * std threshold
    double max_missing_frac = 0.5;  // above this the series is unusable
};

struct Replacement {
    std::size_t slot = 0;
    double old_value = 0.0;  // NaN for missing slots
    double new_value = 0.0;
    enum class Kind { Missing, Negative, Outlier } kind = Kind::Missing;
};

struct CleaningReport {
    std::string series_id;
    int missing = 0;
    int negative = 0;
    int outlier = 0;
    std::vector<Replacement> replacements;  // slot indices strictly increasing

    int total() const { return missing + negative + outlier; }
};

// Replaces missing slots (NaN), disallowed negatives and spikes above the
// slot-of-week mean + outlier_sigma * std (leave-one-out statistics) with the
// mean of up to donor_count nearest valid slots at the same weekday and
// half-hour in adjacent weeks. Requires at least one week of data.
std::pair<HalfHourlySeries, CleaningReport> clean_series(const HalfHourlySeries& series,
                                                         const CleaningPolicy& policy = {});

// Tiles the 336-slot weekly shape across [start, start + days), aligned by
// weekday; substitutes non_operational_shape on holidays matching the
// profile's holiday_rule; rescales so the mean daily usage is exactly 1 kWh.
HalfHourlySeries annualize_standard_profile(const StandardProfile& sp, const Date& start,
                                            int days, const HolidayCalendar& cal);

// ---- file formats ----------------------------------------------------
// Profiles CSV: header "id,group,start_date,v0,v1,...", one row per profile,
// values kWh per half-hour, empty field = missing.
// QMR CSV: "customer_id,class,mean_daily_kwh" (mean_daily_kwh may be empty).
// Topology JSON: array of {feeder_id, customers:[ids], substation_csv?}.
// Catalogue JSON: array of {type_tag, weekly_shape[336],
//   non_operational_shape[48], holiday_rule}.

struct LoadedProfiles {
    MonitoredPool pool;
    std::vector<CleaningReport> reports;  // one per profile, in file order
};

LoadedProfiles load_profiles(const std::string& path, const CleaningPolicy& policy = {});
void save_profiles_csv(const std::string& path, const MonitoredPool& pool);

std::vector<Customer> load_qmr(const std::string& path);
void save_qmr_csv(const std::string& path, const std::vector<Customer>& customers);

std::vector<StandardProfile> load_catalogue(const std::string& path);
void save_catalogue_json(const std::string& path, const std::vector<StandardProfile>& catalogue);

HolidayCalendar load_calendar(const std::string& path);
void save_calendar_json(const std::string& path, const HolidayCalendar& cal);

// Substation CSV reuses the profiles CSV layout with group "substation".
HalfHourlySeries load_substation_csv(const std::string& path);
void save_substation_csv(const std::string& path, const std::string& feeder_id,
                         const HalfHourlySeries& series);

// Topology + QMR + substation files, resolved relative to the topology
// file's directory.
std::vector<Feeder> load_topology(const std::string& topology_path, const std::string& qmr_path);
void save_topology_json(const std::string& path, const std::vector<Feeder>& feeders,
                        const std::vector<std::string>& substation_csv_names);

// A complete on-disk dataset directory as written by the generator:
// profiles.csv, qmr.csv, feeders.json, substations/<feeder>.csv.
struct Dataset {
    MonitoredPool pool;
    std::vector<Feeder> feeders;
    std::vector<CleaningReport> cleaning_reports;
};

Dataset load_dataset(const std::string& dir, const CleaningPolicy& policy = {});

// Atomic write helper (temp file + rename in the target directory).
void write_file_atomic(const std::string& path, const std::string& content);

std::string format_double(double v);  // round-trip-exact decimal form

}  // namespace lvbuddy
