#include "lvbuddy/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>

#include <json.hpp>

#include "lvbuddy/errors.hpp"
#include "lvbuddy/rng.hpp"

using nlohmann::json;

namespace lvbuddy {

void ScenarioConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must be in [0,1]");
    };
    if (n_profiles < 1) throw ConfigError("n_profiles must be >= 1");
    if (n_feeders < 1) throw ConfigError("n_feeders must be >= 1");
    if (customers_min < 1 || customers_max < customers_min)
        throw ConfigError("customers_min/customers_max invalid");
    prob(nondom_fraction, "nondom_fraction");
    prob(pc1_ratio, "pc1_ratio");
    prob(solar_fraction, "solar_fraction");
    prob(qmr_gross_prob, "qmr_gross_prob");
    prob(qmr_missing_prob, "qmr_missing_prob");
    for (const ClassStats* s : {&pc1, &pc2}) {
        if (!(s->min > 0.0 && s->max > s->min))
            throw ConfigError("class stats range invalid");
        if (!(s->mean >= s->min && s->mean <= s->max))
            throw ConfigError("class stats mean outside range");
        if (!(s->stddev > 0.0) || s->stddev > (s->max - s->min))
            throw ConfigError("class stats std infeasible for range");
    }
    if (window_days < 7) throw ConfigError("window_days must be >= 7");
    if (!(noise_level >= 0.0) || !(substation_noise >= 0.0) || !(qmr_sigma >= 0.0))
        throw ConfigError("noise levels must be >= 0");
    if (!(qmr_gross_min > 0.0 && qmr_gross_max >= qmr_gross_min))
        throw ConfigError("qmr gross error range invalid");
    if (!(alpha_spread >= 0.0 && alpha_spread <= kAlphaMax - kAlphaMin))
        throw ConfigError("alpha_spread must be in [0, 0.4]");
}

namespace {

double bell(int hh, double center, double width) {
    const double x = (hh - center) / width;
    return std::exp(-0.5 * x * x);
}

// Normalized weekly demand template of a domestic profile class, mean
// 1 kWh/day over the week.
std::vector<double> domestic_weekly_template(int profile_class) {
    std::vector<double> shape(kSlotsPerWeek);
    for (int wd = 0; wd < 7; ++wd) {
        const bool weekend = wd >= 5;
        for (int hh = 0; hh < kSlotsPerDay; ++hh) {
            double v;
            if (profile_class == 1) {
                // Morning bump plus a dominant evening peak; weekends add
                // daytime occupancy.
                v = 0.25 + 0.6 * bell(hh, 15, 3.0) + 1.2 * bell(hh, 37, 4.0);
                if (weekend) v += 0.35 * bell(hh, 26, 6.0);
            } else {
                // Economy 7: overnight storage-heater peak, modest evening use.
                v = 0.2 + 1.8 * bell(hh, 5, 5.0) + 0.45 * bell(hh, 37, 3.5);
                if (weekend) v += 0.2 * bell(hh, 26, 6.0);
            }
            shape[wd * kSlotsPerDay + hh] = v;
        }
    }
    double total = 0.0;
    for (double v : shape) total += v;
    for (double& v : shape) v *= 7.0 / total;  // mean 1 kWh/day
    return shape;
}

std::vector<double> make_weekly(const std::vector<double>& weekday,
                                const std::vector<double>& weekend_day) {
    std::vector<double> shape;
    shape.reserve(kSlotsPerWeek);
    for (int wd = 0; wd < 7; ++wd) {
        const auto& day = wd >= 5 ? weekend_day : weekday;
        shape.insert(shape.end(), day.begin(), day.end());
    }
    return shape;
}

struct Bell {
    double amp, center, width;
};

std::vector<double> day_shape(double base, std::initializer_list<Bell> bells) {
    std::vector<double> day(kSlotsPerDay, base);
    for (int hh = 0; hh < kSlotsPerDay; ++hh)
        for (const auto& b : bells) day[hh] += b.amp * bell(hh, b.center, b.width);
    return day;
}

double truncated_normal(Rng& rng, const ClassStats& s) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double x = rng.normal(s.mean, s.stddev);
        if (x >= s.min && x <= s.max) return x;
    }
    throw NumericError("truncated normal rejection failed; stats infeasible");
}

// Multiplicative QMR error; returns a factor, or NaN for a missing reading.
double qmr_error_factor(Rng& rng, const ScenarioConfig& cfg) {
    if (cfg.qmr_missing_prob > 0.0 && rng.uniform01() < cfg.qmr_missing_prob)
        return std::nan("");
    if (cfg.qmr_gross_prob > 0.0 && rng.uniform01() < cfg.qmr_gross_prob)
        return rng.uniform(cfg.qmr_gross_min, cfg.qmr_gross_max);
    if (cfg.qmr_sigma > 0.0) return rng.lognormal(0.0, cfg.qmr_sigma);
    return 1.0;
}

char band_for_group(int band_group) { return band_group <= 4 ? static_cast<char>('A' + band_group) : 'F'; }

}  // namespace

std::vector<StandardProfile> builtin_catalogue() {
    std::vector<StandardProfile> out;

    const auto low = day_shape(0.15, {});
    {
        StandardProfile sp;
        sp.type_tag = "school";
        sp.weekly_shape = make_weekly(day_shape(0.2, {{1.6, 24, 7.0}}), low);
        sp.non_operational_shape = low;
        sp.holiday_rule = "bank+school";
        out.push_back(std::move(sp));
    }
    {
        StandardProfile sp;
        sp.type_tag = "community-centre";
        sp.weekly_shape = make_weekly(day_shape(0.2, {{0.9, 22, 6.0}, {0.7, 39, 3.0}}),
                                      day_shape(0.2, {{0.5, 24, 6.0}}));
        sp.non_operational_shape = day_shape(0.2, {});
        sp.holiday_rule = "bank";
        out.push_back(std::move(sp));
    }
    {
        // On overnight (dusk to morning), off during the day, every day.
        StandardProfile sp;
        sp.type_tag = "landlord-lighting";
        std::vector<double> day(kSlotsPerDay, 0.05);
        for (int hh = 0; hh < kSlotsPerDay; ++hh)
            if (hh >= 35 || hh < 18) day[hh] = 1.0;
        sp.weekly_shape = make_weekly(day, day);
        sp.non_operational_shape = day;
        sp.holiday_rule = "none";
        out.push_back(std::move(sp));
    }
    {
        StandardProfile sp;
        sp.type_tag = "industrial-high-lf";
        const auto wk = day_shape(0.9, {{0.4, 24, 8.0}});
        sp.weekly_shape = make_weekly(wk, wk);
        sp.non_operational_shape = day_shape(0.9, {});
        sp.holiday_rule = "bank";
        out.push_back(std::move(sp));
    }
    {
        StandardProfile sp;
        sp.type_tag = "industrial-low-lf";
        sp.weekly_shape = make_weekly(day_shape(0.1, {{1.8, 22, 5.0}}), day_shape(0.1, {}));
        sp.non_operational_shape = day_shape(0.1, {});
        sp.holiday_rule = "bank";
        out.push_back(std::move(sp));
    }
    return out;
}

MonitoredPool generate_pool(const ScenarioConfig& cfg) {
    cfg.validate();
    MonitoredPool pool;

    const int n = cfg.n_profiles;
    const int n_pc1 = static_cast<int>(std::lround(cfg.pc1_ratio * n));
    const int n_solar = std::min(static_cast<int>(std::lround(cfg.solar_fraction * n)), n_pc1);

    const auto tmpl1 = domestic_weekly_template(1);
    const auto tmpl2 = domestic_weekly_template(2);

    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(cfg.seed, 1000u + static_cast<std::uint64_t>(i)));
        const int pc = i < n_pc1 ? 1 : 2;
        const bool solar = i < n_solar;  // solar overlays the first PC1 profiles
        const char band = static_cast<char>('A' + rng.uniform_int(8));
        const double target_u = truncated_normal(rng, pc == 1 ? cfg.pc1 : cfg.pc2);
        const auto& tmpl = pc == 1 ? tmpl1 : tmpl2;

        MonitoredProfile p;
        char idbuf[16];
        std::snprintf(idbuf, sizeof(idbuf), "p%04d", i);
        p.id = idbuf;
        p.group = group_key(DomesticClass{pc, band, solar});
        p.series.start_date = cfg.window_start;
        p.series.allows_negative = solar;
        p.series.values.reserve(static_cast<std::size_t>(cfg.window_days) * kSlotsPerDay);

        const int start_wd = cfg.window_start.weekday();
        // Lognormal slot noise with unit mean keeps the realized mean daily
        // close to target_u.
        // Truncated at 2.5 sigma so synthetic data never trips the 5-sigma
        // cleaning rule on ingestion.
        const double mu = -0.5 * cfg.noise_level * cfg.noise_level;
        for (int d = 0; d < cfg.window_days; ++d) {
            const int wd = (start_wd + d) % 7;
            for (int hh = 0; hh < kSlotsPerDay; ++hh) {
                const double noise =
                    cfg.noise_level > 0.0
                        ? std::exp(mu + cfg.noise_level * std::clamp(rng.normal(), -2.5, 2.5))
                        : 1.0;
                double v = target_u * tmpl[wd * kSlotsPerDay + hh] * noise;
                if (solar) v -= cfg.solar_capacity / 12.0 * bell(hh, 26, 5.0);
                p.series.values.push_back(v);
            }
        }
        if (!solar)
            for (double& v : p.series.values) v = std::max(v, 0.0);
        p.mean_daily = mean_daily_demand(p.series);
        pool.add(std::move(p));
    }

    for (const auto& sp : builtin_catalogue()) {
        MonitoredProfile p;
        p.id = "nd-" + sp.type_tag;
        p.group = group_key(NonDomesticClass{sp.type_tag});
        p.series = annualize_standard_profile(sp, cfg.window_start, cfg.window_days, cfg.holidays);
        p.mean_daily = mean_daily_demand(p.series);
        pool.add(std::move(p));
    }
    return pool;
}

GeneratedFeeder generate_feeder(const ScenarioConfig& cfg, const MonitoredPool& pool, int index) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, 2000000u + static_cast<std::uint64_t>(index)));

    // Domestic pool indices by solar flag; truth profiles are sampled from
    // here and the customer class is derived from the chosen profile's group.
    std::vector<int> dom_plain, dom_solar;
    for (std::size_t i = 0; i < pool.profiles.size(); ++i) {
        const auto& g = pool.profiles[i].group;
        if (!g.domestic) continue;
        (g.solar ? dom_solar : dom_plain).push_back(static_cast<int>(i));
    }
    if (dom_plain.empty()) throw DataError("pool has no non-solar domestic profiles");

    const auto catalogue = builtin_catalogue();

    GeneratedFeeder out;
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "f%03d", index);
    out.feeder.id = idbuf;

    const int n_customers =
        cfg.customers_min + static_cast<int>(rng.uniform_int(
                                static_cast<std::uint64_t>(cfg.customers_max - cfg.customers_min + 1)));

    HalfHourlySeries sub;
    sub.start_date = pool.start_date;
    sub.allows_negative = true;
    sub.values.assign(static_cast<std::size_t>(pool.days) * kSlotsPerDay, 0.0);

    for (int j = 0; j < n_customers; ++j) {
        Customer c;
        char cid[32];
        std::snprintf(cid, sizeof(cid), "%s-c%03d", out.feeder.id.c_str(), j);
        c.id = cid;

        BuddyChoice truth_choice;
        double true_u;

        const bool nondom = rng.uniform01() < cfg.nondom_fraction;
        if (nondom) {
            const auto& sp = catalogue[rng.uniform_int(catalogue.size())];
            c.cls = NonDomesticClass{sp.type_tag};
            const double u_true = rng.lognormal(cfg.nondom_mean_daily_mu, cfg.nondom_mean_daily_sigma);
            const double alpha_true =
                std::clamp(1.0 + cfg.alpha_spread * (rng.uniform01() - 0.5), kAlphaMin, kAlphaMax);
            const MonitoredProfile* std_profile = pool.find("nd-" + sp.type_tag);
            if (!std_profile)
                throw DataError("pool is missing standard profile for type '" + sp.type_tag + "'");
            const double scale = alpha_true * u_true;
            for (std::size_t t = 0; t < sub.values.size(); ++t)
                sub.values[t] += scale * std_profile->series.values[t];
            true_u = scale;  // standard profiles have mean 1 kWh/day

            const double err = qmr_error_factor(rng, cfg);
            if (std::isnan(err)) {
                truth_choice.alpha = alpha_true;
            } else {
                c.qmr_mean_daily = u_true * err;
                truth_choice.alpha = std::clamp(scale / *c.qmr_mean_daily, kAlphaMin, kAlphaMax);
            }
            truth_choice.profile_id = std_profile->id;
        } else {
            const bool solar = !dom_solar.empty() && rng.uniform01() < cfg.solar_fraction;
            const auto& idxs = solar ? dom_solar : dom_plain;
            const MonitoredProfile& p = pool.profiles[idxs[rng.uniform_int(idxs.size())]];
            DomesticClass d;
            d.profile_class = p.group.profile_class;
            d.tax_band = band_for_group(p.group.band_group);
            d.has_solar = p.group.solar;
            c.cls = d;
            for (std::size_t t = 0; t < sub.values.size(); ++t) sub.values[t] += p.series.values[t];
            true_u = p.mean_daily;
            const double err = qmr_error_factor(rng, cfg);
            if (!std::isnan(err)) c.qmr_mean_daily = std::max(true_u * err, 1e-6);
            truth_choice.profile_id = p.id;
        }

        out.feeder.customers.push_back(std::move(c));
        out.truth.choices.push_back(std::move(truth_choice));
        out.true_mean_daily.push_back(true_u);
    }

    if (cfg.substation_noise > 0.0)
        for (double& v : sub.values) v += rng.normal(0.0, cfg.substation_noise);
    out.feeder.substation_series = std::move(sub);
    return out;
}

GeneratedScenario generate_scenario(const ScenarioConfig& cfg) {
    GeneratedScenario out;
    out.pool = generate_pool(cfg);
    for (int i = 0; i < cfg.n_feeders; ++i)
        out.feeders.push_back(generate_feeder(cfg, out.pool, i));
    return out;
}

ScenarioConfig scenario_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid scenario JSON: ") + e.what());
    }
    ScenarioConfig cfg;
    try {
        cfg.seed = j.value("seed", cfg.seed);
        cfg.n_profiles = j.value("n_profiles", cfg.n_profiles);
        cfg.n_feeders = j.value("n_feeders", cfg.n_feeders);
        cfg.customers_min = j.value("customers_min", cfg.customers_min);
        cfg.customers_max = j.value("customers_max", cfg.customers_max);
        cfg.nondom_fraction = j.value("nondom_fraction", cfg.nondom_fraction);
        cfg.pc1_ratio = j.value("pc1_ratio", cfg.pc1_ratio);
        cfg.solar_fraction = j.value("solar_fraction", cfg.solar_fraction);
        auto stats = [&](const char* key, ClassStats& s) {
            if (!j.contains(key)) return;
            const auto& e = j.at(key);
            s.mean = e.value("mean", s.mean);
            s.stddev = e.value("std", s.stddev);
            s.min = e.value("min", s.min);
            s.max = e.value("max", s.max);
        };
        stats("pc1", cfg.pc1);
        stats("pc2", cfg.pc2);
        cfg.solar_capacity = j.value("solar_capacity", cfg.solar_capacity);
        cfg.nondom_mean_daily_mu = j.value("nondom_mean_daily_mu", cfg.nondom_mean_daily_mu);
        cfg.nondom_mean_daily_sigma = j.value("nondom_mean_daily_sigma", cfg.nondom_mean_daily_sigma);
        cfg.alpha_spread = j.value("alpha_spread", cfg.alpha_spread);
        cfg.noise_level = j.value("noise_level", cfg.noise_level);
        cfg.substation_noise = j.value("substation_noise", cfg.substation_noise);
        cfg.qmr_sigma = j.value("qmr_sigma", cfg.qmr_sigma);
        cfg.qmr_gross_prob = j.value("qmr_gross_prob", cfg.qmr_gross_prob);
        cfg.qmr_gross_min = j.value("qmr_gross_min", cfg.qmr_gross_min);
        cfg.qmr_gross_max = j.value("qmr_gross_max", cfg.qmr_gross_max);
        cfg.qmr_missing_prob = j.value("qmr_missing_prob", cfg.qmr_missing_prob);
        if (j.contains("window_start")) cfg.window_start = Date::parse(j["window_start"]);
        cfg.window_days = j.value("window_days", cfg.window_days);
        for (const auto& s : j.value("bank_holidays", std::vector<std::string>{}))
            cfg.holidays.add_bank(Date::parse(s));
        for (const auto& s : j.value("school_holidays", std::vector<std::string>{}))
            cfg.holidays.add_school(Date::parse(s));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid scenario config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["n_profiles"] = cfg.n_profiles;
    j["n_feeders"] = cfg.n_feeders;
    j["customers_min"] = cfg.customers_min;
    j["customers_max"] = cfg.customers_max;
    j["nondom_fraction"] = cfg.nondom_fraction;
    j["pc1_ratio"] = cfg.pc1_ratio;
    j["solar_fraction"] = cfg.solar_fraction;
    j["pc1"] = {{"mean", cfg.pc1.mean}, {"std", cfg.pc1.stddev}, {"min", cfg.pc1.min}, {"max", cfg.pc1.max}};
    j["pc2"] = {{"mean", cfg.pc2.mean}, {"std", cfg.pc2.stddev}, {"min", cfg.pc2.min}, {"max", cfg.pc2.max}};
    j["solar_capacity"] = cfg.solar_capacity;
    j["nondom_mean_daily_mu"] = cfg.nondom_mean_daily_mu;
    j["nondom_mean_daily_sigma"] = cfg.nondom_mean_daily_sigma;
    j["alpha_spread"] = cfg.alpha_spread;
    j["noise_level"] = cfg.noise_level;
    j["substation_noise"] = cfg.substation_noise;
    j["qmr_sigma"] = cfg.qmr_sigma;
    j["qmr_gross_prob"] = cfg.qmr_gross_prob;
    j["qmr_gross_min"] = cfg.qmr_gross_min;
    j["qmr_gross_max"] = cfg.qmr_gross_max;
    j["qmr_missing_prob"] = cfg.qmr_missing_prob;
    j["window_start"] = cfg.window_start.to_string();
    j["window_days"] = cfg.window_days;
    j["bank_holidays"] = json::array();
    for (auto s : cfg.holidays.bank) j["bank_holidays"].push_back(Date::from_serial(s).to_string());
    j["school_holidays"] = json::array();
    for (auto s : cfg.holidays.school) j["school_holidays"].push_back(Date::from_serial(s).to_string());
    return j.dump(2) + "\n";
}

}  // namespace lvbuddy
