#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lvbuddy/ingestion.hpp"
#include "lvbuddy/model.hpp"

namespace lvbuddy {

// Parameters of the mean-daily-demand distribution of a domestic class:
// normal(mean, std) truncated to [min, max] by rejection.
struct ClassStats {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;

    int n_profiles = 214;       // monitored domestic profiles
    int n_feeders = 10;
    int customers_min = 3;      // customers per feeder, inclusive range
    int customers_max = 8;

    double nondom_fraction = 0.0;   // probability a customer is non-domestic
    double pc1_ratio = 199.0 / 214; // P(profile class 1 | domestic)
    double solar_fraction = 0.0;    // P(solar | domestic), both pool and feeders

    ClassStats pc1{11.245, 6.427, 0.761, 35.775};
    ClassStats pc2{16.015, 11.678, 4.800, 46.110};
    double solar_capacity = 4.0;   // midday export bell amplitude, kWh/day

    double nondom_mean_daily_mu = 4.0;     // lognormal parameters of U for
    double nondom_mean_daily_sigma = 0.5;  // non-domestic customers
    double alpha_spread = 0.0;  // true alpha ~ U[1 - spread/2, 1 + spread/2] clamped to [0.8, 1.2]

    double noise_level = 0.15;       // per-slot lognormal sigma on profile shapes
    double substation_noise = 0.0;   // additive Gaussian kWh std on substation slots

    double qmr_sigma = 0.0;          // multiplicative lognormal sigma on QMR readings
    double qmr_gross_prob = 0.0;     // probability of a gross QMR error
    double qmr_gross_min = 0.005;    // gross error factor range
    double qmr_gross_max = 0.05;
    double qmr_missing_prob = 0.0;   // probability a QMR reading is absent

    Date window_start{2014, 1, 6};   // a Monday
    int window_days = 98;            // 14 weeks

    HolidayCalendar holidays;        // used when annualizing standard profiles

    void validate() const;  // throws ConfigError
};

ScenarioConfig scenario_from_json(const std::string& json_text);
std::string scenario_to_json(const ScenarioConfig& cfg);

// The built-in standard-profile catalogue: school, community-centre,
// landlord-lighting, industrial-high-lf, industrial-low-lf.
std::vector<StandardProfile> builtin_catalogue();

// N domestic profiles matching the configured class statistics, plus one
// annualized normalized standard profile per catalogue type. Deterministic
// under cfg.seed.
MonitoredPool generate_pool(const ScenarioConfig& cfg);

struct GeneratedFeeder {
    Feeder feeder;                 // substation_series always present
    BuddyAssignment truth;         // ground-truth assignment
    std::vector<double> true_mean_daily;  // per customer, before QMR error
};

// Builds feeder `index` of the scenario. Customer demand is sampled from the
// pool (domestic) or a scaled standard profile (non-domestic); the substation
// series is the exact aggregate of the truths plus optional noise; QMR values
// carry the configured error model.
GeneratedFeeder generate_feeder(const ScenarioConfig& cfg, const MonitoredPool& pool, int index);

struct GeneratedScenario {
    MonitoredPool pool;
    std::vector<GeneratedFeeder> feeders;
};

GeneratedScenario generate_scenario(const ScenarioConfig& cfg);

}  // namespace lvbuddy
