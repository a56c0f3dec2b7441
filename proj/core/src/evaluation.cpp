#include "lvbuddy/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lvbuddy/errors.hpp"

namespace lvbuddy {

namespace {

void check_aligned(const HalfHourlySeries& a, const HalfHourlySeries& b, const char* what) {
    if (a.start_date != b.start_date || a.values.size() != b.values.size())
        throw DataError(std::string(what) + ": series windows differ");
}

}  // namespace

double rmae(const HalfHourlySeries& actual, const HalfHourlySeries& estimate) {
    check_aligned(actual, estimate, "rmae");
    double s = 0.0, err = 0.0;
    for (std::size_t t = 0; t < actual.values.size(); ++t) {
        s += actual.values[t];
        err += std::abs(actual.values[t] - estimate.values[t]);
    }
    if (!(s > 0.0)) throw NumericError("rmae: total actual demand is not positive");
    return err / s;
}

double normalized_crps(const HalfHourlySeries& actual, const ConfidenceBands& bands) {
    check_aligned(actual, bands.lower, "normalized_crps");
    check_aligned(actual, bands.upper, "normalized_crps");
    const std::size_t n = actual.values.size();
    double score = 0.0, total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        score += 0.5 * (pinball(actual.values[t] - bands.lower.values[t], 0.1) +
                        pinball(actual.values[t] - bands.upper.values[t], 0.9));
        total += actual.values[t];
    }
    const double mean_demand = total / static_cast<double>(n);
    if (!(mean_demand > 0.0)) throw NumericError("normalized_crps: mean demand is not positive");
    return (score / static_cast<double>(n)) / mean_demand;
}

PowerLawFit power_law_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw DataError("power_law_fit needs at least 3 points");
    const std::size_t n = points.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(points[i].first > 0.0) || !(points[i].second > 0.0))
            throw DataError("power_law_fit requires positive coordinates");
        lx[i] = std::log(points[i].first);
        ly[i] = std::log(points[i].second);
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw NumericError("power_law_fit: degenerate x values");

    PowerLawFit fit;
    const double slope = sxy / sxx;
    fit.b = -slope;
    fit.a = std::exp(my - slope * mx);
    fit.n_points = static_cast<int>(n);

    double ss_res = 0.0;
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        resid[i] = ly[i] - (my + slope * (lx[i] - mx));
        ss_res += resid[i] * resid[i];
    }
    fit.residual_std = n > 2 ? std::sqrt(ss_res / static_cast<double>(n - 2)) : 0.0;
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;

    const double z995 = 2.5758293035489004;  // normal 0.995 quantile
    fit.bound_factor = std::exp(z995 * fit.residual_std);
    fit.inside.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        fit.inside[i] = std::abs(resid[i]) <= z995 * fit.residual_std + 1e-15;
    return fit;
}

AlphaHistogram alpha_histogram(const std::map<double, std::vector<double>>& alphas_per_w,
                               int n_bins) {
    if (n_bins < 1) throw ConfigError("alpha_histogram needs at least one bin");
    bool any = false;
    AlphaHistogram h;
    h.n_bins = n_bins;
    for (const auto& [w, alphas] : alphas_per_w) {
        auto& counts = h.counts_per_w[w];
        counts.assign(static_cast<std::size_t>(n_bins), 0);
        for (double a : alphas) {
            any = true;
            const double x = (a - h.lo) / (h.hi - h.lo);
            int bin = static_cast<int>(x * n_bins);
            bin = std::clamp(bin, 0, n_bins - 1);  // a == hi lands in the last bin
            counts[static_cast<std::size_t>(bin)] += 1;
        }
    }
    if (!any) throw DataError("alpha_histogram: no alpha values supplied");
    return h;
}

std::string bucket_name(ProportionBucket b) {
    switch (b) {
        case ProportionBucket::None: return "none";
        case ProportionBucket::Small: return "small";
        case ProportionBucket::Medium: return "medium";
        case ProportionBucket::Large: return "large";
    }
    return "?";
}

ProportionBucket proportion_bucket(double p) {
    if (p <= 0.0) return ProportionBucket::None;
    if (p < 0.05) return ProportionBucket::Small;
    if (p <= 0.10) return ProportionBucket::Medium;
    return ProportionBucket::Large;
}

FeederSummary feeder_summary(const Feeder& feeder) {
    if (!feeder.substation_series)
        throw DataError("feeder_summary requires a substation series for feeder '" + feeder.id + "'");
    const auto& s = *feeder.substation_series;

    FeederSummary out;
    const int days = s.days();
    out.daily_totals.resize(static_cast<std::size_t>(days), 0.0);
    for (std::size_t t = 0; t < s.values.size(); ++t)
        out.daily_totals[t / kSlotsPerDay] += s.values[t];

    // Mean weekly profile over complete Monday-aligned weeks.
    const int to_monday = (7 - s.start_date.weekday()) % 7;
    const int whole_weeks = (days - to_monday) / 7;
    if (whole_weeks < 1)
        throw DataError("feeder_summary: series too short for a Monday-aligned week");
    out.mean_weekly_profile.assign(kSlotsPerWeek, 0.0);
    for (int wk = 0; wk < whole_weeks; ++wk) {
        const std::size_t base =
            static_cast<std::size_t>(to_monday + wk * 7) * kSlotsPerDay;
        for (int t = 0; t < kSlotsPerWeek; ++t)
            out.mean_weekly_profile[static_cast<std::size_t>(t)] += s.values[base + t];
    }
    for (double& v : out.mean_weekly_profile) v /= whole_weeks;

    out.proportion_nondom =
        static_cast<double>(feeder.count_non_domestic()) / feeder.customers.size();
    out.bucket = proportion_bucket(out.proportion_nondom);
    return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DataError("spearman: bad input sizes");
    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x), ry = ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw NumericError("spearman: constant ranks");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace lvbuddy
