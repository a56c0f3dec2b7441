#include "lvbuddy/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lvbuddy/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace lvbuddy {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write '" + tmp + "'");
        out << content;
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

double parse_value(const std::string& field, const std::string& ctx) {
    if (field.empty()) return std::nan("");
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0')
        throw DataError("malformed number '" + field + "' " + ctx);
    return v;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DataError("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

}  // namespace

std::pair<HalfHourlySeries, CleaningReport> clean_series(const HalfHourlySeries& series,
                                                         const CleaningPolicy& policy) {
    const std::size_t n = series.values.size();
    if (n < static_cast<std::size_t>(kSlotsPerWeek) || n % kSlotsPerDay != 0)
        throw DataError("clean_series requires at least one whole week of data");

    const int start_wd = series.start_date.weekday();
    auto slot_of_week = [&](std::size_t t) {
        return (static_cast<std::size_t>(start_wd) * kSlotsPerDay + t) % kSlotsPerWeek;
    };

    std::vector<char> valid(n, 0);
    std::size_t missing_like = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double v = series.values[t];
        if (std::isfinite(v) && (series.allows_negative || v >= 0.0))
            valid[t] = 1;
        else if (!std::isfinite(v))
            ++missing_like;
    }
    if (static_cast<double>(missing_like) > policy.max_missing_frac * static_cast<double>(n))
        throw DataError("series unusable: more than " +
                        std::to_string(static_cast<int>(policy.max_missing_frac * 100)) +
                        "% of slots missing");

    // Slot-of-week statistics over valid slots, for outlier detection.
    std::vector<double> sum(kSlotsPerWeek, 0.0), sumsq(kSlotsPerWeek, 0.0);
    std::vector<int> cnt(kSlotsPerWeek, 0);
    for (std::size_t t = 0; t < n; ++t) {
        if (!valid[t]) continue;
        const std::size_t w = slot_of_week(t);
        sum[w] += series.values[t];
        sumsq[w] += series.values[t] * series.values[t];
        cnt[w] += 1;
    }

    // Pooled relative scale over all slot-of-week groups. The per-group std
    // is estimated from very few replicates and a 5-sigma rule on it fires
    // constantly on healthy noise, so each group's std is floored by this
    // much better-determined series-wide estimate scaled to the group level.
    double pooled_sq = 0.0;
    std::int64_t pooled_n = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (!valid[t]) continue;
        const std::size_t w = slot_of_week(t);
        if (cnt[w] < 2) continue;
        const double group_mean = sum[w] / cnt[w];
        if (std::abs(group_mean) < 1e-12) continue;
        const double dev = (series.values[t] - group_mean) / group_mean;
        // Bessel-style correction: deviations from an m-sample mean have
        // variance (m-1)/m of the underlying one.
        pooled_sq += dev * dev * static_cast<double>(cnt[w]) / (cnt[w] - 1);
        pooled_n += 1;
    }
    const double pooled_rel = pooled_n > 0 ? std::sqrt(pooled_sq / pooled_n) : 0.0;

    std::vector<char> anomalous(n, 0);
    std::vector<Replacement::Kind> kind(n, Replacement::Kind::Missing);
    for (std::size_t t = 0; t < n; ++t) {
        const double v = series.values[t];
        if (!std::isfinite(v)) {
            anomalous[t] = 1;
            kind[t] = Replacement::Kind::Missing;
            continue;
        }
        if (v < 0.0 && !series.allows_negative) {
            anomalous[t] = 1;
            kind[t] = Replacement::Kind::Negative;
            continue;
        }
        const std::size_t w = slot_of_week(t);
        if (cnt[w] >= 4) {
            // Leave-one-out mean/std so a single spike cannot mask itself.
            const int m = cnt[w] - 1;
            const double mean = (sum[w] - v) / m;
            const double var = std::max(0.0, (sumsq[w] - v * v) / m - mean * mean);
            // The epsilon guard keeps round-off on constant slots (std = 0)
            // from flagging every replicate at once.
            const double guard = 1e-9 * std::max(1.0, std::abs(v));
            // The floor is scaled by the full-group mean: the leave-one-out
            // mean is biased low precisely when v is a high draw.
            const double sd =
                std::max(std::sqrt(var), pooled_rel * std::abs(sum[w] / cnt[w]));
            if (v - mean > policy.outlier_sigma * sd + guard) {
                anomalous[t] = 1;
                kind[t] = Replacement::Kind::Outlier;
            }
        }
    }

    HalfHourlySeries out = series;
    CleaningReport report;
    const std::size_t max_k = n / kSlotsPerWeek + 1;
    for (std::size_t t = 0; t < n; ++t) {
        if (!anomalous[t]) continue;
        // Donors: same slot-of-week in adjacent weeks, nearest first, only
        // slots that were themselves unflagged in the original series.
        double dsum = 0.0;
        int dcnt = 0;
        for (std::size_t k = 1; k <= max_k && dcnt < policy.donor_count; ++k) {
            const std::int64_t offsets[2] = {static_cast<std::int64_t>(t) - static_cast<std::int64_t>(k) * kSlotsPerWeek,
                                             static_cast<std::int64_t>(t) + static_cast<std::int64_t>(k) * kSlotsPerWeek};
            for (std::int64_t o : offsets) {
                if (o < 0 || o >= static_cast<std::int64_t>(n)) continue;
                if (anomalous[static_cast<std::size_t>(o)]) continue;
                if (dcnt == policy.donor_count) break;
                dsum += series.values[static_cast<std::size_t>(o)];
                ++dcnt;
            }
        }
        if (dcnt == 0)
            throw DataError("clean_series: no valid donors for slot " + std::to_string(t));
        const double replacement = dsum / dcnt;
        out.values[t] = replacement;
        Replacement r;
        r.slot = t;
        r.old_value = series.values[t];
        r.new_value = replacement;
        r.kind = kind[t];
        report.replacements.push_back(r);
        switch (kind[t]) {
            case Replacement::Kind::Missing: ++report.missing; break;
            case Replacement::Kind::Negative: ++report.negative; break;
            case Replacement::Kind::Outlier: ++report.outlier; break;
        }
    }
    out.validate();
    return {std::move(out), std::move(report)};
}

HalfHourlySeries annualize_standard_profile(const StandardProfile& sp, const Date& start,
                                            int days, const HolidayCalendar& cal) {
    if (sp.weekly_shape.size() != kSlotsPerWeek)
        throw DataError("standard profile '" + sp.type_tag + "' weekly_shape must have 336 slots");
    if (sp.non_operational_shape.size() != kSlotsPerDay)
        throw DataError("standard profile '" + sp.type_tag + "' non_operational_shape must have 48 slots");
    if (days < 7) throw DataError("annualize window must cover at least 7 days");

    HalfHourlySeries out;
    out.start_date = start;
    out.values.reserve(static_cast<std::size_t>(days) * kSlotsPerDay);
    for (int d = 0; d < days; ++d) {
        const Date date = start + d;
        bool substitute = false;
        if (sp.holiday_rule == "bank")
            substitute = cal.is_bank(date);
        else if (sp.holiday_rule == "bank+school")
            substitute = cal.is_bank(date) || cal.is_school(date);
        else if (sp.holiday_rule != "none")
            throw DataError("unknown holiday_rule '" + sp.holiday_rule + "' for type '" +
                            sp.type_tag + "'");
        if (substitute) {
            out.values.insert(out.values.end(), sp.non_operational_shape.begin(),
                              sp.non_operational_shape.end());
        } else {
            const std::size_t base = static_cast<std::size_t>(date.weekday()) * kSlotsPerDay;
            out.values.insert(out.values.end(), sp.weekly_shape.begin() + base,
                              sp.weekly_shape.begin() + base + kSlotsPerDay);
        }
    }
    const double mean = mean_daily_demand(out);
    if (!(mean > 0.0))
        throw DataError("standard profile '" + sp.type_tag + "' has non-positive total demand");
    for (double& v : out.values) v /= mean;
    return out;
}

LoadedProfiles load_profiles(const std::string& path, const CleaningPolicy& policy) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    if (line.rfind("id,group,start_date", 0) != 0)
        throw DataError("'" + path + "' has unexpected header '" + line + "'");

    LoadedProfiles out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string ctx = "at " + path + ":" + std::to_string(lineno);
        auto fields = split_csv(line);
        if (fields.size() < 4) throw DataError("malformed row (too few fields) " + ctx);
        MonitoredProfile p;
        p.id = fields[0];
        p.group = GroupKey::parse(fields[1]);
        p.series.start_date = Date::parse(fields[2]);
        p.series.allows_negative = p.group.domestic && p.group.solar;
        p.series.values.reserve(fields.size() - 3);
        for (std::size_t i = 3; i < fields.size(); ++i)
            p.series.values.push_back(parse_value(fields[i], ctx));
        if (p.series.values.size() % kSlotsPerDay != 0)
            throw DataError("row has " + std::to_string(p.series.values.size()) +
                            " values (not a multiple of 48) " + ctx);
        auto [cleaned, report] = clean_series(p.series, policy);
        report.series_id = p.id;
        p.series = std::move(cleaned);
        p.mean_daily = mean_daily_demand(p.series);
        try {
            out.pool.add(std::move(p));
        } catch (const DataError& e) {
            throw DataError(std::string(e.what()) + " " + ctx);
        }
        out.reports.push_back(std::move(report));
    }
    if (out.pool.profiles.empty()) throw DataError("'" + path + "' contains no profiles");
    return out;
}

void save_profiles_csv(const std::string& path, const MonitoredPool& pool) {
    std::ostringstream os;
    os << "id,group,start_date,values\n";
    for (const auto& p : pool.profiles) {
        os << p.id << ',' << p.group.label() << ',' << p.series.start_date.to_string();
        for (double v : p.series.values) os << ',' << format_double(v);
        os << '\n';
    }
    write_file_atomic(path, os.str());
}

std::vector<Customer> load_qmr(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    if (line != "customer_id,class,mean_daily_kwh")
        throw DataError("'" + path + "' has unexpected header '" + line + "'");
    std::vector<Customer> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string ctx = "at " + path + ":" + std::to_string(lineno);
        auto fields = split_csv(line);
        if (fields.size() != 3) throw DataError("malformed row " + ctx);
        Customer c;
        c.id = fields[0];
        c.cls = parse_class_label(fields[1]);
        if (!fields[2].empty()) {
            const double u = parse_value(fields[2], ctx);
            if (!(u > 0.0) || !std::isfinite(u))
                throw DataError("mean_daily_kwh must be positive " + ctx);
            c.qmr_mean_daily = u;
        }
        for (const auto& prev : out)
            if (prev.id == c.id) throw DataError("duplicate customer id '" + c.id + "' " + ctx);
        out.push_back(std::move(c));
    }
    return out;
}

void save_qmr_csv(const std::string& path, const std::vector<Customer>& customers) {
    std::ostringstream os;
    os << "customer_id,class,mean_daily_kwh\n";
    for (const auto& c : customers) {
        os << c.id << ',' << class_label(c.cls) << ',';
        if (c.qmr_mean_daily) os << format_double(*c.qmr_mean_daily);
        os << '\n';
    }
    write_file_atomic(path, os.str());
}

std::vector<StandardProfile> load_catalogue(const std::string& path) {
    const json j = read_json_file(path);
    if (!j.is_array()) throw DataError("catalogue '" + path + "' must be a JSON array");
    std::vector<StandardProfile> out;
    for (const auto& e : j) {
        StandardProfile sp;
        sp.type_tag = e.at("type_tag").get<std::string>();
        sp.weekly_shape = e.at("weekly_shape").get<std::vector<double>>();
        sp.non_operational_shape = e.at("non_operational_shape").get<std::vector<double>>();
        sp.holiday_rule = e.at("holiday_rule").get<std::string>();
        if (sp.weekly_shape.size() != kSlotsPerWeek)
            throw DataError("catalogue type '" + sp.type_tag + "' weekly_shape size != 336");
        if (sp.non_operational_shape.size() != kSlotsPerDay)
            throw DataError("catalogue type '" + sp.type_tag + "' non_operational_shape size != 48");
        out.push_back(std::move(sp));
    }
    return out;
}

void save_catalogue_json(const std::string& path, const std::vector<StandardProfile>& catalogue) {
    json j = json::array();
    for (const auto& sp : catalogue) {
        j.push_back({{"type_tag", sp.type_tag},
                     {"weekly_shape", sp.weekly_shape},
                     {"non_operational_shape", sp.non_operational_shape},
                     {"holiday_rule", sp.holiday_rule}});
    }
    write_file_atomic(path, j.dump(2) + "\n");
}

HolidayCalendar load_calendar(const std::string& path) {
    const json j = read_json_file(path);
    HolidayCalendar cal;
    for (const auto& s : j.value("bank", std::vector<std::string>{})) cal.add_bank(Date::parse(s));
    for (const auto& s : j.value("school", std::vector<std::string>{})) cal.add_school(Date::parse(s));
    return cal;
}

void save_calendar_json(const std::string& path, const HolidayCalendar& cal) {
    json j;
    j["bank"] = json::array();
    j["school"] = json::array();
    for (auto s : cal.bank) j["bank"].push_back(Date::from_serial(s).to_string());
    for (auto s : cal.school) j["school"].push_back(Date::from_serial(s).to_string());
    write_file_atomic(path, j.dump(2) + "\n");
}

HalfHourlySeries load_substation_csv(const std::string& path) {
    // Same row layout as the profiles CSV; cleaning is not applied here.
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("id,group,start_date", 0) != 0)
        throw DataError("'" + path + "' has unexpected header");
    if (!std::getline(in, line)) throw DataError("'" + path + "' has no data row");
    auto fields = split_csv(line);
    if (fields.size() < 4 || fields[1] != "substation")
        throw DataError("'" + path + "' is not a substation series");
    HalfHourlySeries s;
    s.start_date = Date::parse(fields[2]);
    s.allows_negative = true;
    for (std::size_t i = 3; i < fields.size(); ++i)
        s.values.push_back(parse_value(fields[i], "at " + path));
    s.validate(true);
    return s;
}

void save_substation_csv(const std::string& path, const std::string& feeder_id,
                         const HalfHourlySeries& series) {
    std::ostringstream os;
    os << "id,group,start_date,values\n";
    os << feeder_id << ",substation," << series.start_date.to_string();
    for (double v : series.values) os << ',' << format_double(v);
    os << '\n';
    write_file_atomic(path, os.str());
}

std::vector<Feeder> load_topology(const std::string& topology_path, const std::string& qmr_path) {
    const auto customers = load_qmr(qmr_path);
    std::unordered_map<std::string, const Customer*> by_id;
    for (const auto& c : customers) by_id[c.id] = &c;

    const json j = read_json_file(topology_path);
    if (!j.is_array()) throw DataError("topology '" + topology_path + "' must be a JSON array");
    const fs::path base = fs::path(topology_path).parent_path();

    std::vector<Feeder> out;
    for (const auto& e : j) {
        Feeder f;
        f.id = e.at("feeder_id").get<std::string>();
        for (const auto& cid : e.at("customers")) {
            auto it = by_id.find(cid.get<std::string>());
            if (it == by_id.end())
                throw DataError("feeder '" + f.id + "' references unknown customer '" +
                                cid.get<std::string>() + "'");
            f.customers.push_back(*it->second);
        }
        if (f.customers.empty()) throw DataError("feeder '" + f.id + "' has no customers");
        if (e.contains("substation_csv"))
            f.substation_series = load_substation_csv((base / e["substation_csv"].get<std::string>()).string());
        out.push_back(std::move(f));
    }
    return out;
}

void save_topology_json(const std::string& path, const std::vector<Feeder>& feeders,
                        const std::vector<std::string>& substation_csv_names) {
    json j = json::array();
    for (std::size_t i = 0; i < feeders.size(); ++i) {
        json e;
        e["feeder_id"] = feeders[i].id;
        e["customers"] = json::array();
        for (const auto& c : feeders[i].customers) e["customers"].push_back(c.id);
        if (i < substation_csv_names.size() && !substation_csv_names[i].empty())
            e["substation_csv"] = substation_csv_names[i];
        j.push_back(std::move(e));
    }
    write_file_atomic(path, j.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir, const CleaningPolicy& policy) {
    Dataset ds;
    auto loaded = load_profiles((fs::path(dir) / "profiles.csv").string(), policy);
    ds.pool = std::move(loaded.pool);
    ds.cleaning_reports = std::move(loaded.reports);
    ds.feeders = load_topology((fs::path(dir) / "feeders.json").string(),
                               (fs::path(dir) / "qmr.csv").string());
    return ds;
}

}  // namespace lvbuddy
