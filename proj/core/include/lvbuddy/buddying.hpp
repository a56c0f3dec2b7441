#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "lvbuddy/model.hpp"

namespace lvbuddy {

// Whole-day slot window [begin_day, begin_day + n_days) into the shared pool
// window. Cost, RMAE and GA fitness are always evaluated over such a window.
struct DayWindow {
    int begin_day = 0;
    int n_days = 0;

    std::size_t slot_begin() const { return static_cast<std::size_t>(begin_day) * kSlotsPerDay; }
    std::size_t slot_end() const { return slot_begin() + static_cast<std::size_t>(n_days) * kSlotsPerDay; }
};

struct GAConfig {
    double w = 0.0;  // cost-function weight
    int population_size = 100;
    int max_generations = 500;
    int stall_generations = 50;
    int tournament_size = 3;
    double crossover_rate = 0.5;       // per-gene uniform crossover probability
    double mutation_rate = -1.0;       // per-gene; < 0 means 1/M
    double alpha_mutation_std = 0.05;  // Gaussian step, clamped to [0.8, 1.2]
    int elitism = 2;
    std::uint64_t seed = 0;
    bool fix_alpha = false;  // keep every alpha at 1 (used by oracle comparisons)

    void validate() const;  // throws ConfigError
};

GAConfig ga_config_from_json(const std::string& json_text);
std::string ga_config_to_json(const GAConfig& cfg);

struct CostBreakdown {
    double total = 0.0;
    double substation_term = 0.0;  // sum_h |a(h)-s(h)| / S, before (1-w)
    double domestic_term = 0.0;    // sum_dom |U_j - Uhat_kj| / D, before w
    double nondom_term = 0.0;      // sum_com U_j |1-alpha_j| / D, before w
    double normalizer_s = 0.0;     // S = sum_h s(h) over the window
    double normalizer_d = 0.0;     // D = sum_j U_j
};

// Exact evaluation of the buddying cost over the window. With w = 1 the
// substation term is skipped and no substation series is required.
CostBreakdown cost(const Feeder& feeder, const BuddyAssignment& assignment,
                   const MonitoredPool& pool,
                   const std::unordered_map<std::string, double>& mean_daily, double w,
                   const DayWindow& window);

// Nearest-mean-daily matching per customer within its group; non-domestic
// customers get their type's standard profile with alpha = 1. Ties broken by
// smallest profile id.
BuddyAssignment simple_buddy(const Feeder& feeder, const MonitoredPool& pool,
                             const std::unordered_map<std::string, double>& mean_daily);

struct GAResult {
    BuddyAssignment assignment;
    CostBreakdown cost;
    std::vector<double> trace;  // best-ever cost per generation, non-increasing
    int generations = 0;
};

// Genetic-algorithm buddying. The initial population contains the
// simple-buddy solution, so the result never costs more than it. Fully
// deterministic under cfg.seed.
GAResult ga_buddy(const Feeder& feeder, const MonitoredPool& pool,
                  const std::unordered_map<std::string, double>& mean_daily, const GAConfig& cfg,
                  const DayWindow& window);

// The three non-domestic scaling strategies, for a feeder with exactly one
// customer, which must be non-domestic.
struct ScaleStrategies {
    double estimated = 0.0;  // QMR mean daily, alpha = 1
    double actual = 0.0;     // substation-series mean daily, alpha = 1
    double optimal = 0.0;    // GA (w = 0) effective scaling alpha * U
    BuddyAssignment optimal_assignment;
};

ScaleStrategies scale_strategies(const Feeder& feeder, const MonitoredPool& pool,
                                 const std::unordered_map<std::string, double>& mean_daily,
                                 const GAConfig& ga_cfg, const DayWindow& window);

// Assignment JSON: {feeder_id, method, w, choices: [{customer_id, profile_id,
// alpha?}], cost?}.
struct AssignmentRecord {
    std::string feeder_id;
    std::string method;  // "sa" | "ga" | "truth" | ...
    double w = 1.0;
    BuddyAssignment assignment;
    std::optional<CostBreakdown> cost;
};

std::string assignment_to_json(const Feeder& feeder, const AssignmentRecord& record);
AssignmentRecord assignment_from_json(const std::string& json_text);

}  // namespace lvbuddy
