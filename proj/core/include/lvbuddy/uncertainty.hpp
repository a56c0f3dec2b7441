#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "lvbuddy/buddying.hpp"
#include "lvbuddy/model.hpp"

namespace lvbuddy {

// Pinball (check) loss; its minimizer over a sample is the tau-quantile.
double pinball(double z, double tau);

struct ConfidenceBands {
    HalfHourlySeries lower;  // 10% by default
    HalfHourlySeries upper;  // 90% by default
    std::string method;
    int crossings_repaired = 0;  // slots where lower/upper had to be swapped
};

void save_bands_csv(const std::string& path, const ConfidenceBands& bands);
ConfidenceBands load_bands_csv(const std::string& path);

struct BootstrapConfig {
    int n_resamples = 1500;
    enum class Scaling { Uniform, Gaussian } scaling = Scaling::Uniform;
    double lower_quantile = 0.1;
    double upper_quantile = 0.9;
    std::uint64_t seed = 0;
    bool include_solar = true;  // solar profiles take part in the class pools

    void validate() const;
};

// Customer bootstrap: each resample redraws every domestic customer's profile
// from its profile-class pool (class level, not tax-band level) and a scaling
// for every non-domestic customer, either Uniform[0.8,1.2]*U_j or
// Gaussian(U_j, 20*U_j/196). Bands are the empirical per-slot quantiles over
// the resample aggregates.
ConfidenceBands bootstrap_bands(const Feeder& feeder, const MonitoredPool& pool,
                                const std::unordered_map<std::string, double>& mean_daily,
                                const BootstrapConfig& cfg, const DayWindow& window);

// Per-half-hour seasonal quantile model: intercept, linear day trend,
// Saturday/Sunday dummies and a Fourier expansion of order P on the annual
// cycle. Day index d counts from 1 on dataset_start and runs across the
// train/test boundary.
struct QuantileModel {
    double tau = 0.5;
    int fourier_order = 3;
    Date dataset_start;
    std::array<std::vector<double>, kSlotsPerDay> coef;  // each of size 4 + 2P

    int n_coef() const { return 4 + 2 * fourier_order; }
    // Model value for a calendar date and half-hour.
    double predict(const Date& date, int halfhour) const;
};

std::string quantile_model_to_json(const QuantileModel& model);
QuantileModel quantile_model_from_json(const std::string& json_text);

// Fits the 48 per-half-hour coefficient sets by minimizing the pinball loss
// over the training days (iteratively reweighted least squares with
// epsilon continuation, relative objective tolerance 1e-8).
QuantileModel fit_quantile_model(const HalfHourlySeries& substation, const Date& dataset_start,
                                 double tau, int fourier_order);

// Evaluates both models over the window and repairs quantile crossings by
// swapping the offending pair.
ConfidenceBands predict_bands(const QuantileModel& model_low, const QuantileModel& model_high,
                              const Date& window_start, int window_days);

}  // namespace lvbuddy
