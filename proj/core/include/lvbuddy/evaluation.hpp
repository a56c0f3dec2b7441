#pragma once

#include <map>
#include <string>
#include <vector>

#include "lvbuddy/model.hpp"
#include "lvbuddy/uncertainty.hpp"

namespace lvbuddy {

// Relative mean absolute error: total absolute deviation divided by the
// total actual demand over the window.
double rmae(const HalfHourlySeries& actual, const HalfHourlySeries& estimate);

// Two-quantile CRPS proxy: mean over slots of the average pinball loss at the
// band quantiles, divided by the mean half-hourly actual demand.
double normalized_crps(const HalfHourlySeries& actual, const ConfidenceBands& bands);

struct PowerLawFit {
    double a = 0.0;  // y = a * x^(-b)
    double b = 0.0;
    double residual_std = 0.0;     // log-space
    double bound_factor = 1.0;     // 99% multiplicative bound: fit * / factor
    double r_squared = 0.0;        // in log-log space
    int n_points = 0;
    std::vector<bool> inside;      // per point, inside the 99% band
};

// Least squares in (log x, log y); 99% bounds use the 0.995 normal quantile
// on the log residuals.
PowerLawFit power_law_fit(const std::vector<std::pair<double, double>>& points);

struct AlphaHistogram {
    double lo = kAlphaMin;
    double hi = kAlphaMax;
    int n_bins = 20;
    std::map<double, std::vector<int>> counts_per_w;  // w -> per-bin counts
};

AlphaHistogram alpha_histogram(const std::map<double, std::vector<double>>& alphas_per_w,
                               int n_bins = 20);

enum class ProportionBucket { None, Small, Medium, Large };
std::string bucket_name(ProportionBucket b);
ProportionBucket proportion_bucket(double proportion_nondom);

struct FeederSummary {
    std::vector<double> daily_totals;       // kWh per day
    std::vector<double> mean_weekly_profile;  // 336 slots, Monday-aligned
    double proportion_nondom = 0.0;
    ProportionBucket bucket = ProportionBucket::None;
};

FeederSummary feeder_summary(const Feeder& feeder);

// Spearman rank correlation (average ranks on ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lvbuddy
