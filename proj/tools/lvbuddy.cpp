// Command-line front end: generate | buddy | bounds | evaluate.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lvbuddy/buddying.hpp"
#include "lvbuddy/errors.hpp"
#include "lvbuddy/evaluation.hpp"
#include "lvbuddy/ingestion.hpp"
#include "lvbuddy/model.hpp"
#include "lvbuddy/rng.hpp"
#include "lvbuddy/synthgen.hpp"
#include "lvbuddy/uncertainty.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lvbuddy;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

// Run manifest: config hash, seeds, input digests, tool version, per-stage
// timings, output paths.
struct Manifest {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::map<std::string, std::string> inputs;
    std::map<std::string, double> timings_ms;
    std::vector<std::string> outputs;

    void add_input(const std::string& path) { inputs[path] = hex64(fnv1a64(read_file(path))); }
    void write(const std::string& out_dir) const {
        json j;
        j["command"] = command;
        j["tool_version"] = kToolVersion;
        j["seed"] = seed;
        j["config_hash"] = config_hash;
        j["inputs"] = inputs;
        j["timings_ms"] = timings_ms;
        j["outputs"] = outputs;
        write_file_atomic((fs::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
    }
};

class StageTimer {
public:
    explicit StageTimer(Manifest& m) : manifest_(m) {}
    template <typename F>
    auto run(const std::string& stage, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record(stage, t0);
        } else {
            auto result = f();
            record(stage, t0);
            return result;
        }
    }

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
        manifest_.timings_ms[stage] =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    }
    Manifest& manifest_;
};

std::string w_tag(double w) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", w);
    return buf;
}

struct Windows {
    DayWindow train;
    DayWindow test;
};

Windows split_windows(int pool_days, int train_offset, int train_days) {
    if (train_offset < 0 || train_days < 1 || train_offset + train_days > pool_days)
        throw ConfigError("training window does not fit the data window");
    Windows w;
    w.train = {train_offset, train_days};
    const int test_begin = train_offset + train_days;
    if (test_begin < pool_days)
        w.test = {test_begin, pool_days - test_begin};
    else
        w.test = w.train;  // no held-out days; score in-sample
    return w;
}

// ---- generate ---------------------------------------------------------

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
    Manifest manifest;
    manifest.command = "generate";
    StageTimer timer(manifest);

    const std::string config_text = read_file(config_path);
    manifest.add_input(config_path);
    ScenarioConfig cfg = scenario_from_json(config_text);
    if (seed_override) cfg.seed = *seed_override;
    manifest.seed = cfg.seed;
    manifest.config_hash = hex64(fnv1a64(scenario_to_json(cfg)));

    auto scenario = timer.run("generate", [&] { return generate_scenario(cfg); });

    timer.run("write", [&] {
        fs::create_directories(fs::path(out_dir) / "substations");
        fs::create_directories(fs::path(out_dir) / "truth");

        save_profiles_csv((fs::path(out_dir) / "profiles.csv").string(), scenario.pool);
        manifest.outputs.push_back("profiles.csv");

        std::vector<Customer> customers;
        std::vector<std::string> substation_names;
        std::vector<Feeder> feeders;
        for (const auto& gf : scenario.feeders) {
            customers.insert(customers.end(), gf.feeder.customers.begin(), gf.feeder.customers.end());
            feeders.push_back(gf.feeder);
            const std::string name = "substations/" + gf.feeder.id + ".csv";
            substation_names.push_back(name);
            save_substation_csv((fs::path(out_dir) / name).string(), gf.feeder.id,
                                *gf.feeder.substation_series);
            manifest.outputs.push_back(name);

            AssignmentRecord record;
            record.feeder_id = gf.feeder.id;
            record.method = "truth";
            record.w = 1.0;
            record.assignment = gf.truth;
            const std::string truth_name = "truth/" + gf.feeder.id + ".json";
            write_file_atomic((fs::path(out_dir) / truth_name).string(),
                              assignment_to_json(gf.feeder, record));
            manifest.outputs.push_back(truth_name);
        }
        save_qmr_csv((fs::path(out_dir) / "qmr.csv").string(), customers);
        manifest.outputs.push_back("qmr.csv");
        save_topology_json((fs::path(out_dir) / "feeders.json").string(), feeders, substation_names);
        manifest.outputs.push_back("feeders.json");
        save_catalogue_json((fs::path(out_dir) / "catalogue.json").string(), builtin_catalogue());
        manifest.outputs.push_back("catalogue.json");
        save_calendar_json((fs::path(out_dir) / "calendar.json").string(), cfg.holidays);
        manifest.outputs.push_back("calendar.json");
        write_file_atomic((fs::path(out_dir) / "scenario.json").string(), scenario_to_json(cfg));
        manifest.outputs.push_back("scenario.json");
    });

    manifest.write(out_dir);
    return 0;
}

// ---- buddy ------------------------------------------------------------

int cmd_buddy(const std::string& data_dir, const std::string& out_dir, const std::string& method,
              std::vector<double> w_list, const std::string& ga_config_path, int train_offset,
              int train_days, int jobs, std::optional<std::uint64_t> seed_override) {
    Manifest manifest;
    manifest.command = "buddy";
    StageTimer timer(manifest);

    GAConfig ga_cfg;
    if (!ga_config_path.empty()) {
        ga_cfg = ga_config_from_json(read_file(ga_config_path));
        manifest.add_input(ga_config_path);
    }
    if (seed_override) ga_cfg.seed = *seed_override;
    manifest.seed = ga_cfg.seed;
    manifest.config_hash = hex64(fnv1a64(ga_config_to_json(ga_cfg)));

    auto ds = timer.run("ingest", [&] { return load_dataset(data_dir); });
    for (const char* f : {"profiles.csv", "qmr.csv", "feeders.json"})
        manifest.add_input((fs::path(data_dir) / f).string());
    const auto mean_daily = resolve_mean_daily(ds.feeders);
    const Windows win = split_windows(ds.pool.days, train_offset, train_days);

    if (method == "sa")
        w_list = {1.0};
    else if (w_list.empty())
        w_list = {0.0};
    for (double w : w_list)
        if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("w values must be in [0,1]");

    fs::create_directories(fs::path(out_dir) / "assignments");

    struct Row {
        std::string feeder_id;
        double w = 0.0;
        double mean_demand = std::nan("");
        double train_rmae = std::nan("");
        double test_rmae = std::nan("");
        std::string bucket;
        double proportion = 0.0;
    };
    const std::size_t n_tasks = ds.feeders.size() * w_list.size();
    std::vector<Row> rows(n_tasks);

    timer.run("buddy", [&] {
        parallel_for(n_tasks, jobs, [&](std::size_t task) {
            const Feeder& feeder = ds.feeders[task / w_list.size()];
            const double w = w_list[task % w_list.size()];

            AssignmentRecord record;
            record.feeder_id = feeder.id;
            record.method = method;
            record.w = w;
            if (method == "sa") {
                record.assignment = simple_buddy(feeder, ds.pool, mean_daily);
                record.cost = cost(feeder, record.assignment, ds.pool, mean_daily, 1.0, win.train);
            } else {
                GAConfig cfg = ga_cfg;
                cfg.w = w;
                cfg.seed = derive_seed(ga_cfg.seed,
                                       fnv1a64(feeder.id) ^ (task % w_list.size()));
                GAResult ga = ga_buddy(feeder, ds.pool, mean_daily, cfg, win.train);
                record.assignment = std::move(ga.assignment);
                record.cost = ga.cost;
            }

            Row row;
            row.feeder_id = feeder.id;
            row.w = w;
            row.proportion =
                static_cast<double>(feeder.count_non_domestic()) / feeder.customers.size();
            row.bucket = bucket_name(proportion_bucket(row.proportion));
            if (feeder.substation_series) {
                const auto agg = aggregate_assignment(feeder, record.assignment, ds.pool, mean_daily);
                const auto& sub = *feeder.substation_series;
                row.train_rmae = rmae(sub.slice_days(win.train.begin_day, win.train.n_days),
                                      agg.slice_days(win.train.begin_day, win.train.n_days));
                const auto sub_test = sub.slice_days(win.test.begin_day, win.test.n_days);
                row.test_rmae =
                    rmae(sub_test, agg.slice_days(win.test.begin_day, win.test.n_days));
                double total = 0.0;
                for (double v : sub_test.values) total += v;
                row.mean_demand = total / static_cast<double>(sub_test.values.size());
            }
            rows[task] = std::move(row);

            const std::string name = "assignments/" + feeder.id + "-" + method + "-w" + w_tag(w) + ".json";
            write_file_atomic((fs::path(out_dir) / name).string(),
                              assignment_to_json(feeder, record));
        });
    });

    std::ostringstream os;
    os << "feeder,method,w,proportion_nondom,bucket,mean_demand_kwh_hh,train_rmae,test_rmae\n";
    for (const auto& row : rows) {
        os << row.feeder_id << ',' << method << ',' << w_tag(row.w) << ','
           << format_double(row.proportion) << ',' << row.bucket << ',';
        if (!std::isnan(row.mean_demand)) os << format_double(row.mean_demand);
        os << ',';
        if (!std::isnan(row.train_rmae)) os << format_double(row.train_rmae);
        os << ',';
        if (!std::isnan(row.test_rmae)) os << format_double(row.test_rmae);
        os << '\n';
    }
    write_file_atomic((fs::path(out_dir) / "results.csv").string(), os.str());
    manifest.outputs.push_back("results.csv");
    manifest.outputs.push_back("assignments/");
    manifest.write(out_dir);
    return 0;
}

// ---- bounds -----------------------------------------------------------

int cmd_bounds(const std::string& data_dir, const std::string& out_dir, const std::string& method,
               int train_offset, int train_days, int n_resamples, int fourier_order,
               double lower_q, double upper_q, bool exclude_solar, int jobs,
               std::optional<std::uint64_t> seed_override) {
    Manifest manifest;
    manifest.command = "bounds";
    StageTimer timer(manifest);
    manifest.seed = seed_override.value_or(0);

    auto ds = timer.run("ingest", [&] { return load_dataset(data_dir); });
    for (const char* f : {"profiles.csv", "qmr.csv", "feeders.json"})
        manifest.add_input((fs::path(data_dir) / f).string());
    const auto mean_daily = resolve_mean_daily(ds.feeders);
    const Windows win = split_windows(ds.pool.days, train_offset, train_days);

    json cfg_echo = {{"method", method},         {"n_resamples", n_resamples},
                     {"fourier_order", fourier_order}, {"lower_q", lower_q},
                     {"upper_q", upper_q},       {"exclude_solar", exclude_solar}};
    manifest.config_hash = hex64(fnv1a64(cfg_echo.dump()));

    fs::create_directories(fs::path(out_dir) / "bands");
    if (method == "qr") fs::create_directories(fs::path(out_dir) / "models");

    struct Row {
        std::string feeder_id;
        std::string bucket;
        double mean_demand = std::nan("");
        double ncrps = std::nan("");
    };
    std::vector<Row> rows(ds.feeders.size());

    timer.run("bounds", [&] {
        parallel_for(ds.feeders.size(), jobs, [&](std::size_t i) {
            const Feeder& feeder = ds.feeders[i];
            ConfidenceBands bands;
            if (method == "qr") {
                if (!feeder.substation_series)
                    throw DataError("feeder '" + feeder.id + "' has no substation series for qr");
                const auto train = feeder.substation_series->slice_days(win.train.begin_day,
                                                                        win.train.n_days);
                const auto lo = fit_quantile_model(train, ds.pool.start_date, lower_q, fourier_order);
                const auto hi = fit_quantile_model(train, ds.pool.start_date, upper_q, fourier_order);
                write_file_atomic(
                    (fs::path(out_dir) / "models" / (feeder.id + "-lo.json")).string(),
                    quantile_model_to_json(lo));
                write_file_atomic(
                    (fs::path(out_dir) / "models" / (feeder.id + "-hi.json")).string(),
                    quantile_model_to_json(hi));
                bands = predict_bands(lo, hi, ds.pool.start_date + win.test.begin_day,
                                      win.test.n_days);
            } else if (method == "bootstrap-uniform" || method == "bootstrap-gaussian") {
                BootstrapConfig cfg;
                cfg.n_resamples = n_resamples;
                cfg.scaling = method == "bootstrap-uniform" ? BootstrapConfig::Scaling::Uniform
                                                            : BootstrapConfig::Scaling::Gaussian;
                cfg.lower_quantile = lower_q;
                cfg.upper_quantile = upper_q;
                cfg.include_solar = !exclude_solar;
                cfg.seed = derive_seed(seed_override.value_or(0), fnv1a64(feeder.id));
                bands = bootstrap_bands(feeder, ds.pool, mean_daily, cfg, win.test);
            } else {
                throw ConfigError("unknown bounds method '" + method + "'");
            }
            save_bands_csv((fs::path(out_dir) / "bands" / (feeder.id + ".csv")).string(), bands);

            Row row;
            row.feeder_id = feeder.id;
            row.bucket = bucket_name(proportion_bucket(
                static_cast<double>(feeder.count_non_domestic()) / feeder.customers.size()));
            if (feeder.substation_series) {
                const auto actual =
                    feeder.substation_series->slice_days(win.test.begin_day, win.test.n_days);
                row.ncrps = normalized_crps(actual, bands);
                double total = 0.0;
                for (double v : actual.values) total += v;
                row.mean_demand = total / static_cast<double>(actual.values.size());
            }
            rows[i] = std::move(row);
        });
    });

    std::ostringstream os;
    os << "feeder,method,bucket,mean_demand_kwh_hh,ncrps\n";
    for (const auto& row : rows) {
        os << row.feeder_id << ',' << method << ',' << row.bucket << ',';
        if (!std::isnan(row.mean_demand)) os << format_double(row.mean_demand);
        os << ',';
        if (!std::isnan(row.ncrps)) os << format_double(row.ncrps);
        os << '\n';
    }
    write_file_atomic((fs::path(out_dir) / "ncrps.csv").string(), os.str());
    manifest.outputs.push_back("ncrps.csv");

    // Table 5 layout: mean normalized CRPS per proportion bucket.
    std::ostringstream bt;
    bt << "feeder_type,method,mean_ncrps,n_feeders\n";
    auto bucket_mean = [&](const std::string& key) {
        double sum = 0.0;
        int n = 0;
        for (const auto& row : rows) {
            if (std::isnan(row.ncrps)) continue;
            if (key == "all" || (key == "domestic-only" && row.bucket == "none") ||
                row.bucket == key) {
                sum += row.ncrps;
                ++n;
            }
        }
        bt << key << ',' << method << ',' << (n ? format_double(sum / n) : "") << ',' << n << '\n';
    };
    for (const char* key : {"all", "domestic-only", "small", "medium", "large"}) bucket_mean(key);
    write_file_atomic((fs::path(out_dir) / "crps_by_bucket.csv").string(), bt.str());
    manifest.outputs.push_back("crps_by_bucket.csv");
    manifest.outputs.push_back("bands/");
    manifest.write(out_dir);
    return 0;
}

// ---- evaluate ---------------------------------------------------------

struct ResultRow {
    std::string feeder;
    std::string method;
    double w = 0.0;
    std::string bucket;
    double mean_demand = std::nan("");
    double metric = std::nan("");  // test RMAE or nCRPS
};

std::vector<ResultRow> read_metric_csv(const std::string& path, bool is_rmae) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    std::getline(in, line);  // header
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        ResultRow row;
        if (is_rmae) {
            // feeder,method,w,proportion_nondom,bucket,mean_demand,train_rmae,test_rmae
            if (f.size() != 8) throw DataError("malformed row in '" + path + "'");
            row.feeder = f[0];
            row.method = f[1];
            row.w = std::strtod(f[2].c_str(), nullptr);
            row.bucket = f[4];
            row.mean_demand = f[5].empty() ? std::nan("") : std::strtod(f[5].c_str(), nullptr);
            row.metric = f[7].empty() ? std::nan("") : std::strtod(f[7].c_str(), nullptr);
        } else {
            // feeder,method,bucket,mean_demand,ncrps
            if (f.size() != 5) throw DataError("malformed row in '" + path + "'");
            row.feeder = f[0];
            row.method = f[1];
            row.bucket = f[2];
            row.mean_demand = f[3].empty() ? std::nan("") : std::strtod(f[3].c_str(), nullptr);
            row.metric = f[4].empty() ? std::nan("") : std::strtod(f[4].c_str(), nullptr);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void fit_and_emit(const std::vector<ResultRow>& rows, const std::string& out_dir,
                  const std::string& stem, bool keyed_by_w, bool* fitted_any) {
    // Group rows: by (method, w) for RMAE, by method for nCRPS.
    std::map<std::string, std::vector<const ResultRow*>> groups;
    for (const auto& row : rows) {
        if (std::isnan(row.mean_demand) || std::isnan(row.metric)) continue;
        if (!(row.mean_demand > 0.0) || !(row.metric > 0.0)) continue;
        const std::string key = keyed_by_w ? row.method + "-w" + w_tag(row.w) : row.method;
        groups[key].push_back(&row);
    }

    std::ostringstream fits, scatter, curve;
    fits << "group,a,b,residual_std,bound_factor,r_squared,n_points\n";
    scatter << "group,feeder,mean_demand_kwh_hh,metric,bucket,inside_99\n";
    curve << "group,mean_demand_kwh_hh,fit,lower_99,upper_99\n";
    for (const auto& [key, pts] : groups) {
        if (pts.size() < 3) {
            std::cerr << "evaluate: group " << key << " has " << pts.size()
                      << " usable points; a power-law fit needs at least 3, skipping\n";
            continue;
        }
        std::vector<std::pair<double, double>> xy;
        for (const auto* p : pts) xy.emplace_back(p->mean_demand, p->metric);
        const PowerLawFit fit = power_law_fit(xy);
        *fitted_any = true;
        fits << key << ',' << format_double(fit.a) << ',' << format_double(fit.b) << ','
             << format_double(fit.residual_std) << ',' << format_double(fit.bound_factor) << ','
             << format_double(fit.r_squared) << ',' << fit.n_points << '\n';
        for (std::size_t i = 0; i < pts.size(); ++i)
            scatter << key << ',' << pts[i]->feeder << ',' << format_double(pts[i]->mean_demand)
                    << ',' << format_double(pts[i]->metric) << ',' << pts[i]->bucket << ','
                    << (fit.inside[i] ? 1 : 0) << '\n';
        double xmin = xy[0].first, xmax = xy[0].first;
        for (const auto& [x, y] : xy) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
        for (int i = 0; i <= 50; ++i) {
            const double x = xmin * std::pow(xmax / xmin, i / 50.0);
            const double y = fit.a * std::pow(x, -fit.b);
            curve << key << ',' << format_double(x) << ',' << format_double(y) << ','
                  << format_double(y / fit.bound_factor) << ','
                  << format_double(y * fit.bound_factor) << '\n';
        }
    }
    write_file_atomic((fs::path(out_dir) / (stem + "_fits.csv")).string(), fits.str());
    write_file_atomic((fs::path(out_dir) / (stem + "_scatter.csv")).string(), scatter.str());
    write_file_atomic((fs::path(out_dir) / (stem + "_curve.csv")).string(), curve.str());
}

int cmd_evaluate(const std::string& results_dir, const std::string& out_dir) {
    Manifest manifest;
    manifest.command = "evaluate";
    StageTimer timer(manifest);
    manifest.config_hash = hex64(fnv1a64(results_dir));

    if (!fs::exists(results_dir) || fs::is_empty(results_dir))
        throw DataError("results directory '" + results_dir + "' is empty");
    fs::create_directories(out_dir);

    bool produced = false, fitted_any = false;
    const fs::path rmae_csv = fs::path(results_dir) / "results.csv";
    if (fs::exists(rmae_csv)) {
        manifest.add_input(rmae_csv.string());
        const auto rows = read_metric_csv(rmae_csv.string(), true);
        fit_and_emit(rows, out_dir, "powerlaw_rmae", true, &fitted_any);
        manifest.outputs.push_back("powerlaw_rmae_fits.csv");
        produced = true;
        if (!fitted_any)
            throw DataError("power-law fit refused: fewer than 3 usable feeders in every group");
    }

    const fs::path ncrps_csv = fs::path(results_dir) / "ncrps.csv";
    if (fs::exists(ncrps_csv)) {
        manifest.add_input(ncrps_csv.string());
        const auto rows = read_metric_csv(ncrps_csv.string(), false);
        bool fitted = false;
        fit_and_emit(rows, out_dir, "powerlaw_ncrps", false, &fitted);
        manifest.outputs.push_back("powerlaw_ncrps_fits.csv");
        produced = true;
        if (!fitted)
            throw DataError("power-law fit refused: fewer than 3 usable feeders in every group");
    }

    // Alpha histogram across all GA assignments, keyed by w.
    const fs::path assignments = fs::path(results_dir) / "assignments";
    if (fs::exists(assignments)) {
        std::map<double, std::vector<double>> alphas_per_w;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(assignments))
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& path : files) {
            const AssignmentRecord record = assignment_from_json(read_file(path.string()));
            for (const auto& ch : record.assignment.choices)
                if (ch.alpha) alphas_per_w[record.w].push_back(*ch.alpha);
        }
        if (!alphas_per_w.empty()) {
            const AlphaHistogram h = alpha_histogram(alphas_per_w);
            std::ostringstream os;
            os << "w,bin_lo,bin_hi,count\n";
            for (const auto& [w, counts] : h.counts_per_w) {
                for (int b = 0; b < h.n_bins; ++b) {
                    const double lo = h.lo + (h.hi - h.lo) * b / h.n_bins;
                    const double hi = h.lo + (h.hi - h.lo) * (b + 1) / h.n_bins;
                    os << w_tag(w) << ',' << format_double(lo) << ',' << format_double(hi) << ','
                       << counts[static_cast<std::size_t>(b)] << '\n';
                }
            }
            write_file_atomic((fs::path(out_dir) / "alpha_histogram.csv").string(), os.str());
            manifest.outputs.push_back("alpha_histogram.csv");
            produced = true;
        }
    }

    if (!produced)
        throw DataError("results directory '" + results_dir + "' has no results.csv, ncrps.csv or assignments/");
    manifest.write(out_dir);
    return 0;
}

std::vector<double> parse_w_list(const std::string& spec) {
    std::vector<double> out;
    if (spec.empty()) return out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        char* end = nullptr;
        const double w = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw ConfigError("bad w value '" + item + "'");
        out.push_back(w);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LV feeder demand buddying and uncertainty toolkit"};
    app.require_subcommand(1);

    std::string config_path, data_dir, results_dir, out_dir, method, ga_config_path, w_spec;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1, train_offset = 0, train_days = 56;
    int n_resamples = 1500, fourier_order = 3;
    double lower_q = 0.1, upper_q = 0.9;
    bool exclude_solar = false;

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "master seed (overrides config)")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* gen = app.add_subcommand("generate", "emit a synthetic dataset with ground truth");
    gen->add_option("--config", config_path, "scenario JSON")->required();
    gen->add_option("--out", out_dir, "output directory")->required();
    add_seed(gen);

    auto* buddy = app.add_subcommand("buddy", "assign buddy profiles (simple or GA)");
    buddy->add_option("--data", data_dir, "dataset directory")->required();
    buddy->add_option("--out", out_dir, "output directory")->required();
    buddy->add_option("--method", method, "sa | ga")->required()
        ->check(CLI::IsMember({"sa", "ga"}));
    buddy->add_option("--w", w_spec, "comma-separated weights, e.g. 0,0.1,0.2");
    buddy->add_option("--ga", ga_config_path, "GA config JSON");
    buddy->add_option("--train-offset-days", train_offset, "training window start day");
    buddy->add_option("--train-days", train_days, "training window length (default 56)");
    buddy->add_option("--jobs", jobs, "parallel feeder jobs");
    add_seed(buddy);

    auto* bounds = app.add_subcommand("bounds", "confidence bands (bootstrap or quantile regression)");
    bounds->add_option("--data", data_dir, "dataset directory")->required();
    bounds->add_option("--out", out_dir, "output directory")->required();
    bounds->add_option("--method", method, "bootstrap-uniform | bootstrap-gaussian | qr")
        ->required()
        ->check(CLI::IsMember({"bootstrap-uniform", "bootstrap-gaussian", "qr"}));
    bounds->add_option("--train-offset-days", train_offset, "training window start day");
    bounds->add_option("--train-days", train_days, "training window length (default 56)");
    bounds->add_option("--n-resamples", n_resamples, "bootstrap resamples (default 1500)");
    bounds->add_option("--fourier-order", fourier_order, "quantile model Fourier order (default 3)");
    bounds->add_option("--lower-q", lower_q, "lower quantile (default 0.1)");
    bounds->add_option("--upper-q", upper_q, "upper quantile (default 0.9)");
    bounds->add_flag("--exclude-solar", exclude_solar, "drop solar profiles from bootstrap pools");
    bounds->add_option("--jobs", jobs, "parallel feeder jobs");
    add_seed(bounds);

    auto* evaluate = app.add_subcommand("evaluate", "power-law fits, scatters and alpha histograms");
    evaluate->add_option("--results", results_dir, "directory with buddy/bounds outputs")->required();
    evaluate->add_option("--out", out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::optional<std::uint64_t> seed_opt =
        seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt;

    auto fail = [](int code, const char* kind, const std::exception& e) {
        json err = {{"error", kind}, {"message", e.what()}};
        std::cerr << err.dump() << '\n';
        return code;
    };

    try {
        if (!out_dir.empty()) fs::create_directories(out_dir);
        if (gen->parsed()) return cmd_generate(config_path, out_dir, seed_opt);
        if (buddy->parsed())
            return cmd_buddy(data_dir, out_dir, method, parse_w_list(w_spec), ga_config_path,
                             train_offset, train_days, jobs, seed_opt);
        if (bounds->parsed())
            return cmd_bounds(data_dir, out_dir, method, train_offset, train_days, n_resamples,
                              fourier_order, lower_q, upper_q, exclude_solar, jobs, seed_opt);
        if (evaluate->parsed()) return cmd_evaluate(results_dir, out_dir);
    } catch (const ConfigError& e) {
        return fail(2, "config", e);
    } catch (const DataError& e) {
        return fail(3, "data", e);
    } catch (const NumericError& e) {
        return fail(4, "numeric", e);
    } catch (const std::exception& e) {
        return fail(3, "data", e);
    }
    return 2;
}
