#include "lvbuddy/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "lvbuddy/errors.hpp"
#include "lvbuddy/ingestion.hpp"
#include "lvbuddy/rng.hpp"

using nlohmann::json;

namespace lvbuddy {

double pinball(double z, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("pinball tau must be in (0,1)");
    return std::abs(z * (tau - (z < 0.0 ? 1.0 : 0.0)));
}

void BootstrapConfig::validate() const {
    if (n_resamples < 1) throw ConfigError("n_resamples must be >= 1");
    if (!(lower_quantile > 0.0 && lower_quantile < 1.0) ||
        !(upper_quantile > 0.0 && upper_quantile < 1.0))
        throw ConfigError("quantiles must lie strictly within (0,1)");
    if (!(lower_quantile <= upper_quantile))
        throw ConfigError("lower_quantile must not exceed upper_quantile");
}

namespace {

// Empirical quantile with linear interpolation on the sorted sample.
double empirical_quantile(std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ConfidenceBands bootstrap_bands(const Feeder& feeder, const MonitoredPool& pool,
                                const std::unordered_map<std::string, double>& mean_daily,
                                const BootstrapConfig& cfg, const DayWindow& window) {
    cfg.validate();
    if (window.begin_day < 0 || window.n_days < 1 || window.begin_day + window.n_days > pool.days)
        throw DataError("bootstrap window outside the pool window");

    // Class-level sampling pools (coarser than the buddying groups).
    std::vector<int> class_pool[2];
    for (std::size_t i = 0; i < pool.profiles.size(); ++i) {
        const auto& g = pool.profiles[i].group;
        if (!g.domestic) continue;
        if (g.solar && !cfg.include_solar) continue;
        class_pool[g.profile_class - 1].push_back(static_cast<int>(i));
    }

    struct NonDom {
        const MonitoredProfile* profile;
        double u;
    };
    std::vector<int> domestic_class;  // 0 or 1, per domestic customer in order
    std::vector<NonDom> nondoms;
    for (const auto& c : feeder.customers) {
        if (const auto* d = std::get_if<DomesticClass>(&c.cls)) {
            if (class_pool[d->profile_class - 1].empty())
                throw DataError("no monitored profiles of class " +
                                std::to_string(d->profile_class) + " in pool");
            domestic_class.push_back(d->profile_class - 1);
        } else {
            const auto& cand = pool.candidates(group_key(c.cls));
            auto it = mean_daily.find(c.id);
            if (it == mean_daily.end())
                throw DataError("no mean daily demand for non-domestic customer '" + c.id + "'");
            nondoms.push_back({&pool.profiles[cand.front()], it->second});
        }
    }

    const std::size_t n = static_cast<std::size_t>(window.n_days) * kSlotsPerDay;
    const std::size_t b = window.slot_begin();
    std::vector<std::vector<double>> aggregates(static_cast<std::size_t>(cfg.n_resamples));

    for (int r = 0; r < cfg.n_resamples; ++r) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
        auto& agg = aggregates[static_cast<std::size_t>(r)];
        agg.assign(n, 0.0);
        for (int cls : domestic_class) {
            const auto& idxs = class_pool[cls];
            const double* src = pool.profiles[idxs[rng.uniform_int(idxs.size())]].series.values.data() + b;
            for (std::size_t t = 0; t < n; ++t) agg[t] += src[t];
        }
        for (const auto& nd : nondoms) {
            double scale;
            if (cfg.scaling == BootstrapConfig::Scaling::Uniform)
                scale = rng.uniform(kAlphaMin, kAlphaMax) * nd.u;
            else
                scale = rng.normal(nd.u, 20.0 * nd.u / 196.0);
            const double* src = nd.profile->series.values.data() + b;
            for (std::size_t t = 0; t < n; ++t) agg[t] += scale * src[t];
        }
    }

    ConfidenceBands bands;
    bands.method = cfg.scaling == BootstrapConfig::Scaling::Uniform ? "bootstrap-uniform"
                                                                    : "bootstrap-gaussian";
    bands.lower.start_date = bands.upper.start_date = pool.start_date + window.begin_day;
    bands.lower.allows_negative = bands.upper.allows_negative = true;
    bands.lower.values.resize(n);
    bands.upper.values.resize(n);

    std::vector<double> column(aggregates.size());
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t r = 0; r < aggregates.size(); ++r) column[r] = aggregates[r][t];
        std::sort(column.begin(), column.end());
        bands.lower.values[t] = empirical_quantile(column, cfg.lower_quantile);
        bands.upper.values[t] = empirical_quantile(column, cfg.upper_quantile);
    }
    return bands;
}

double QuantileModel::predict(const Date& date, int halfhour) const {
    const double d = static_cast<double>(date - dataset_start) + 1.0;
    const int wd = date.weekday();
    const auto& c = coef[static_cast<std::size_t>(halfhour)];
    double v = c[0] + c[1] * d + c[2] * (wd == 5 ? 1.0 : 0.0) + c[3] * (wd == 6 ? 1.0 : 0.0);
    for (int p = 1; p <= fourier_order; ++p) {
        const double ang = 2.0 * M_PI * p * d / 365.0;
        v += c[static_cast<std::size_t>(2 + 2 * p)] * std::sin(ang) +
             c[static_cast<std::size_t>(3 + 2 * p)] * std::cos(ang);
    }
    return v;
}

QuantileModel fit_quantile_model(const HalfHourlySeries& substation, const Date& dataset_start,
                                 double tau, int fourier_order) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must be in (0,1)");
    if (fourier_order < 0) throw ConfigError("fourier_order must be >= 0");
    const int n_days = substation.days();
    if (n_days < 14) throw DataError("quantile regression needs at least two weeks of data");

    QuantileModel model;
    model.tau = tau;
    model.fourier_order = fourier_order;
    model.dataset_start = dataset_start;
    const int k = model.n_coef();
    if (n_days < k)
        throw DataError("training window too short for Fourier order " +
                        std::to_string(fourier_order) + "; lower P");

    Eigen::MatrixXd X(n_days, k);
    for (int i = 0; i < n_days; ++i) {
        const Date date = substation.start_date + i;
        const double d = static_cast<double>(date - dataset_start) + 1.0;
        const int wd = date.weekday();
        X(i, 0) = 1.0;
        X(i, 1) = d;
        X(i, 2) = wd == 5 ? 1.0 : 0.0;
        X(i, 3) = wd == 6 ? 1.0 : 0.0;
        for (int p = 1; p <= fourier_order; ++p) {
            const double ang = 2.0 * M_PI * p * d / 365.0;
            X(i, 2 + 2 * p) = std::sin(ang);
            X(i, 3 + 2 * p) = std::cos(ang);
        }
    }
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        if (qr.rank() < k)
            throw DataError("rank-deficient design for Fourier order " +
                            std::to_string(fourier_order) + "; lower P");
    }

    // IRLS with epsilon continuation. A weighted least-squares fixed point
    // with weights tau/|r| (positive residuals) and (1-tau)/|r| (negative)
    // minimizes the pinball objective; epsilon guards the 1/|r| weights.
    const double rel_tol = 1e-8;
    for (int h = 0; h < kSlotsPerDay; ++h) {
        Eigen::VectorXd y(n_days);
        for (int i = 0; i < n_days; ++i)
            y(i) = substation.values[static_cast<std::size_t>(i) * kSlotsPerDay + h];

        auto objective = [&](const Eigen::VectorXd& beta) {
            const Eigen::VectorXd r = y - X * beta;
            double obj = 0.0;
            for (int i = 0; i < n_days; ++i) obj += pinball(r(i), tau);
            return obj;
        };

        Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
        Eigen::VectorXd best = beta;
        double best_obj = objective(beta);

        for (double eps = 1e-2; eps >= 1e-12; eps *= 1e-2) {
            for (int iter = 0; iter < 50; ++iter) {
                const Eigen::VectorXd r = y - X * beta;
                Eigen::VectorXd sqrt_w(n_days);
                for (int i = 0; i < n_days; ++i) {
                    const double a = r(i) >= 0.0 ? tau : 1.0 - tau;
                    sqrt_w(i) = std::sqrt(a / std::max(std::abs(r(i)), eps));
                }
                const Eigen::MatrixXd Xw = sqrt_w.asDiagonal() * X;
                const Eigen::VectorXd yw = sqrt_w.asDiagonal() * y;
                beta = Xw.colPivHouseholderQr().solve(yw);
                const double obj = objective(beta);
                const bool improved = obj < best_obj - rel_tol * std::max(best_obj, 1e-12);
                if (obj < best_obj) {
                    best_obj = obj;
                    best = beta;
                }
                if (!improved) break;
            }
            beta = best;
        }
        model.coef[static_cast<std::size_t>(h)].assign(best.data(), best.data() + k);
    }
    return model;
}

ConfidenceBands predict_bands(const QuantileModel& model_low, const QuantileModel& model_high,
                              const Date& window_start, int window_days) {
    if (model_low.fourier_order != model_high.fourier_order ||
        model_low.dataset_start != model_high.dataset_start)
        throw DataError("quantile models do not share training provenance");
    if (window_days < 1) throw DataError("prediction window must cover at least one day");

    ConfidenceBands bands;
    bands.method = "qr";
    bands.lower.start_date = bands.upper.start_date = window_start;
    bands.lower.allows_negative = bands.upper.allows_negative = true;

    for (int day = 0; day < window_days; ++day) {
        const Date date = window_start + day;
        for (int hh = 0; hh < kSlotsPerDay; ++hh) {
            double lo = model_low.predict(date, hh);
            double hi = model_high.predict(date, hh);
            if (lo > hi) {
                std::swap(lo, hi);
                ++bands.crossings_repaired;
            }
            bands.lower.values.push_back(lo);
            bands.upper.values.push_back(hi);
        }
    }
    return bands;
}

std::string quantile_model_to_json(const QuantileModel& model) {
    json j;
    j["tau"] = model.tau;
    j["fourier_order"] = model.fourier_order;
    j["dataset_start"] = model.dataset_start.to_string();
    j["coef"] = json::array();
    for (const auto& c : model.coef) j["coef"].push_back(c);
    return j.dump(2) + "\n";
}

QuantileModel quantile_model_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid quantile model JSON: ") + e.what());
    }
    QuantileModel model;
    model.tau = j.at("tau").get<double>();
    model.fourier_order = j.at("fourier_order").get<int>();
    model.dataset_start = Date::parse(j.at("dataset_start").get<std::string>());
    const auto& coef = j.at("coef");
    if (coef.size() != kSlotsPerDay) throw DataError("quantile model must have 48 coefficient sets");
    for (std::size_t h = 0; h < kSlotsPerDay; ++h) {
        model.coef[h] = coef[h].get<std::vector<double>>();
        if (model.coef[h].size() != static_cast<std::size_t>(model.n_coef()))
            throw DataError("quantile model coefficient set has wrong size");
        for (double v : model.coef[h])
            if (!std::isfinite(v)) throw DataError("quantile model has non-finite coefficient");
    }
    return model;
}

void save_bands_csv(const std::string& path, const ConfidenceBands& bands) {
    std::ostringstream os;
    os << "timestamp,lower_kwh,upper_kwh\n";
    for (std::size_t t = 0; t < bands.lower.values.size(); ++t)
        os << slot_timestamp(bands.lower, t) << ',' << format_double(bands.lower.values[t]) << ','
           << format_double(bands.upper.values[t]) << '\n';
    write_file_atomic(path, os.str());
}

ConfidenceBands load_bands_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "timestamp,lower_kwh,upper_kwh")
        throw DataError("'" + path + "' has unexpected header");
    ConfidenceBands bands;
    bands.lower.allows_negative = bands.upper.allows_negative = true;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t c1 = line.find(',');
        std::size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw DataError("malformed band row in '" + path + "'");
        if (first) {
            bands.lower.start_date = bands.upper.start_date = Date::parse(line.substr(0, 10));
            first = false;
        }
        bands.lower.values.push_back(std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr));
        bands.upper.values.push_back(std::strtod(line.substr(c2 + 1).c_str(), nullptr));
    }
    if (bands.lower.values.empty()) throw DataError("'" + path + "' has no band rows");
    return bands;
}

}  // namespace lvbuddy
