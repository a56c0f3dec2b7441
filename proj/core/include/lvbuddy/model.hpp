#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "lvbuddy/series.hpp"

namespace lvbuddy {

// Council tax bands A..E map to their own groups; F, G and H are merged
// because high bands are sparse.
inline constexpr int kNumBandGroups = 6;
int tax_band_group(char band);  // 'A'..'H' -> 0..5

struct DomesticClass {
    int profile_class = 1;  // 1 = standard tariff, 2 = Economy 7
    char tax_band = 'A';    // 'A'..'H'
    bool has_solar = false;
    auto operator<=>(const DomesticClass&) const = default;
};

struct NonDomesticClass {
    std::string type_tag;  // e.g. "school", from the standard-profile catalogue
    auto operator<=>(const NonDomesticClass&) const = default;
};

using CustomerClass = std::variant<DomesticClass, NonDomesticClass>;

// Canonical class label used in the QMR CSV, e.g. "pc1-C", "pc2-A-solar",
// "nd-school".
std::string class_label(const CustomerClass& cls);
CustomerClass parse_class_label(const std::string& label);

// Matching key for buddying: two customers share a GroupKey iff they may be
// buddied to the same candidate sub-pool. Solar-equipped customers get
// distinct groups (solar flag is part of the key).
struct GroupKey {
    bool domestic = true;
    int profile_class = 0;  // domestic only
    int band_group = 0;     // domestic only, 0..5
    bool solar = false;     // domestic only
    std::string type_tag;   // non-domestic only

    auto operator<=>(const GroupKey&) const = default;
    std::string label() const;  // e.g. "pc1-bandC", "pc1-bandF+-solar", "nd-school"
    static GroupKey parse(const std::string& label);
};

GroupKey group_key(const CustomerClass& cls);

struct Customer {
    std::string id;
    CustomerClass cls;
    std::optional<double> qmr_mean_daily;  // kWh/day from quarterly meter readings

    bool is_domestic() const { return std::holds_alternative<DomesticClass>(cls); }
};

struct MonitoredProfile {
    std::string id;
    GroupKey group;
    HalfHourlySeries series;
    double mean_daily = 0.0;  // cached mean_daily_demand(series)
};

struct StandardProfile {
    std::string type_tag;
    std::vector<double> weekly_shape;          // 336 slots, Mon 00:00 -> Sun 23:30
    std::vector<double> non_operational_shape; // 48 slots, holiday substitution
    std::string holiday_rule;                  // "none" | "bank" | "bank+school"
};

// The monitored set: domestic smart-meter profiles plus the annualized,
// normalized standard profiles of non-domestic types. All series share one
// time window.
struct MonitoredPool {
    std::vector<MonitoredProfile> profiles;
    std::map<GroupKey, std::vector<int>> by_group;

    Date start_date;
    int days = 0;

    void add(MonitoredProfile profile);  // rejects duplicate ids, window mismatch
    const MonitoredProfile* find(const std::string& id) const;
    const std::vector<int>& candidates(const GroupKey& key) const;  // throws if empty

    // Recomputes every cached mean_daily; throws if any is off by more than
    // 1e-9 relative.
    void audit() const;
};

struct Feeder {
    std::string id;
    std::vector<Customer> customers;
    std::optional<HalfHourlySeries> substation_series;

    int count_domestic() const;
    int count_non_domestic() const;
};

// Per-customer buddy choice, parallel to Feeder::customers. alpha is present
// iff the customer is non-domestic and lies in [0.8, 1.2].
struct BuddyChoice {
    std::string profile_id;
    std::optional<double> alpha;
};

struct BuddyAssignment {
    std::vector<BuddyChoice> choices;
};

inline constexpr double kAlphaMin = 0.8;
inline constexpr double kAlphaMax = 1.2;

// Throws DataError if the assignment violates the group constraint, the
// alpha presence rule or the alpha range.
void validate_assignment(const Feeder& feeder, const BuddyAssignment& assignment,
                         const MonitoredPool& pool);

// Resolved mean daily demand per customer id: QMR where known, otherwise the
// average over same-GroupKey customers with known QMR across all feeders,
// falling back to all customers of the same domestic/non-domestic kind.
std::unordered_map<std::string, double> resolve_mean_daily(const std::vector<Feeder>& feeders);

// Aggregate demand of an assignment: domestic buddies added raw, non-domestic
// buddies added as alpha_j * U_j * normalized standard profile.
HalfHourlySeries aggregate_assignment(const Feeder& feeder, const BuddyAssignment& assignment,
                                      const MonitoredPool& pool,
                                      const std::unordered_map<std::string, double>& mean_daily);

}  // namespace lvbuddy
