#include "lvbuddy/buddying.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "lvbuddy/errors.hpp"
#include "lvbuddy/rng.hpp"

using nlohmann::json;

namespace lvbuddy {

void GAConfig::validate() const {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("GA weight w must be in [0,1]");
    if (population_size < 2) throw ConfigError("population_size must be >= 2");
    if (max_generations < 1) throw ConfigError("max_generations must be >= 1");
    if (stall_generations < 1) throw ConfigError("stall_generations must be >= 1");
    if (tournament_size < 1) throw ConfigError("tournament_size must be >= 1");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
        throw ConfigError("crossover_rate must be in [0,1]");
    if (mutation_rate > 1.0) throw ConfigError("mutation_rate must be <= 1");
    if (!(alpha_mutation_std >= 0.0)) throw ConfigError("alpha_mutation_std must be >= 0");
    if (elitism < 0 || elitism >= population_size)
        throw ConfigError("elitism must be in [0, population_size)");
}

GAConfig ga_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid GA config JSON: ") + e.what());
    }
    GAConfig cfg;
    try {
        cfg.w = j.value("w", cfg.w);
        cfg.population_size = j.value("population_size", cfg.population_size);
        cfg.max_generations = j.value("max_generations", cfg.max_generations);
        cfg.stall_generations = j.value("stall_generations", cfg.stall_generations);
        cfg.tournament_size = j.value("tournament_size", cfg.tournament_size);
        cfg.crossover_rate = j.value("crossover_rate", cfg.crossover_rate);
        cfg.mutation_rate = j.value("mutation_rate", cfg.mutation_rate);
        cfg.alpha_mutation_std = j.value("alpha_mutation_std", cfg.alpha_mutation_std);
        cfg.elitism = j.value("elitism", cfg.elitism);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.fix_alpha = j.value("fix_alpha", cfg.fix_alpha);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid GA config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string ga_config_to_json(const GAConfig& cfg) {
    json j;
    j["w"] = cfg.w;
    j["population_size"] = cfg.population_size;
    j["max_generations"] = cfg.max_generations;
    j["stall_generations"] = cfg.stall_generations;
    j["tournament_size"] = cfg.tournament_size;
    j["crossover_rate"] = cfg.crossover_rate;
    j["mutation_rate"] = cfg.mutation_rate;
    j["alpha_mutation_std"] = cfg.alpha_mutation_std;
    j["elitism"] = cfg.elitism;
    j["seed"] = cfg.seed;
    j["fix_alpha"] = cfg.fix_alpha;
    return j.dump(2) + "\n";
}

namespace {

void check_window(const MonitoredPool& pool, const DayWindow& window) {
    if (window.begin_day < 0 || window.n_days < 1 ||
        window.begin_day + window.n_days > pool.days)
        throw DataError("evaluation window outside the pool window");
}

// Shared evaluation context for cost() and the GA, working on pool indices.
struct EvalContext {
    const MonitoredPool* pool = nullptr;
    const Feeder* feeder = nullptr;
    DayWindow window;
    double w = 1.0;

    std::vector<double> customer_u;       // resolved U_j per customer
    std::vector<char> is_nondom;          // per customer
    std::vector<std::vector<int>> candidates;  // pool indices per customer
    double normalizer_d = 0.0;            // D = sum U_j
    const double* substation = nullptr;   // window slice, null when w == 1
    double normalizer_s = 0.0;            // S over window

    std::vector<double> buffer;           // aggregate scratch, window length

    EvalContext(const Feeder& f, const MonitoredPool& p,
                const std::unordered_map<std::string, double>& mean_daily, double weight,
                const DayWindow& win)
        : pool(&p), feeder(&f), window(win), w(weight) {
        check_window(p, win);
        if (f.customers.empty()) throw DataError("feeder '" + f.id + "' has no customers");
        for (const auto& c : f.customers) {
            auto it = mean_daily.find(c.id);
            if (it == mean_daily.end())
                throw DataError("no resolved mean daily demand for customer '" + c.id + "'");
            customer_u.push_back(it->second);
            is_nondom.push_back(!c.is_domestic());
            candidates.push_back(p.candidates(group_key(c.cls)));
            normalizer_d += it->second;
        }
        if (w > 0.0 && !(normalizer_d > 0.0))
            throw NumericError("degenerate normalizer D = 0 in cost function");
        if (w < 1.0) {
            if (!f.substation_series)
                throw DataError("feeder '" + f.id + "' needs a substation series for w < 1");
            const auto& s = *f.substation_series;
            if (s.start_date != p.start_date || s.days() != p.days)
                throw DataError("substation window mismatch for feeder '" + f.id + "'");
            substation = s.values.data() + win.slot_begin();
            const std::size_t n = win.slot_end() - win.slot_begin();
            for (std::size_t t = 0; t < n; ++t) normalizer_s += substation[t];
            if (!(normalizer_s > 0.0))
                throw NumericError("degenerate normalizer S <= 0 in cost function");
            buffer.resize(n);
        }
    }

    std::size_t window_slots() const { return window.slot_end() - window.slot_begin(); }

    // genes[j] is a pool index; alphas[j] is used only for non-domestic j.
    CostBreakdown evaluate(const std::vector<int>& genes, const std::vector<double>& alphas) {
        CostBreakdown bd;
        bd.normalizer_d = normalizer_d;
        bd.normalizer_s = normalizer_s;

        const std::size_t n = window_slots();
        if (w < 1.0) {
            std::fill(buffer.begin(), buffer.end(), 0.0);
            for (std::size_t j = 0; j < genes.size(); ++j) {
                const double scale = is_nondom[j] ? alphas[j] * customer_u[j] : 1.0;
                const double* src =
                    pool->profiles[genes[j]].series.values.data() + window.slot_begin();
                for (std::size_t t = 0; t < n; ++t) buffer[t] += scale * src[t];
            }
            double sub = 0.0;
            for (std::size_t t = 0; t < n; ++t) sub += std::abs(buffer[t] - substation[t]);
            bd.substation_term = sub / normalizer_s;
        }
        for (std::size_t j = 0; j < genes.size(); ++j) {
            if (is_nondom[j])
                bd.nondom_term += customer_u[j] * std::abs(1.0 - alphas[j]) / normalizer_d;
            else
                bd.domestic_term +=
                    std::abs(customer_u[j] - pool->profiles[genes[j]].mean_daily) / normalizer_d;
        }
        bd.total = (1.0 - w) * bd.substation_term + w * (bd.domestic_term + bd.nondom_term);
        return bd;
    }

    // Per-customer simple-algorithm gene: nearest mean daily within the
    // group, ties to the smallest profile id.
    int simple_gene(std::size_t j) const {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int idx : candidates[j]) {
            const auto& p = pool->profiles[idx];
            const double dist = is_nondom[j] ? 0.0 : std::abs(customer_u[j] - p.mean_daily);
            if (dist < best_dist ||
                (dist == best_dist && (best < 0 || p.id < pool->profiles[best].id))) {
                best = idx;
                best_dist = dist;
            }
        }
        return best;
    }
};

std::vector<int> genes_from_assignment(const EvalContext& ctx, const BuddyAssignment& assignment) {
    std::vector<int> genes;
    for (std::size_t j = 0; j < assignment.choices.size(); ++j) {
        const auto& id = assignment.choices[j].profile_id;
        int found = -1;
        for (int idx : ctx.candidates[j])
            if (ctx.pool->profiles[idx].id == id) {
                found = idx;
                break;
            }
        if (found < 0) throw DataError("assigned profile '" + id + "' not a group candidate");
        genes.push_back(found);
    }
    return genes;
}

BuddyAssignment assignment_from_genes(const EvalContext& ctx, const std::vector<int>& genes,
                                      const std::vector<double>& alphas) {
    BuddyAssignment out;
    for (std::size_t j = 0; j < genes.size(); ++j) {
        BuddyChoice ch;
        ch.profile_id = ctx.pool->profiles[genes[j]].id;
        if (ctx.is_nondom[j]) ch.alpha = alphas[j];
        out.choices.push_back(std::move(ch));
    }
    return out;
}

}  // namespace

CostBreakdown cost(const Feeder& feeder, const BuddyAssignment& assignment,
                   const MonitoredPool& pool,
                   const std::unordered_map<std::string, double>& mean_daily, double w,
                   const DayWindow& window) {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("cost weight w must be in [0,1]");
    validate_assignment(feeder, assignment, pool);
    EvalContext ctx(feeder, pool, mean_daily, w, window);
    std::vector<double> alphas(feeder.customers.size(), 1.0);
    for (std::size_t j = 0; j < assignment.choices.size(); ++j)
        if (assignment.choices[j].alpha) alphas[j] = *assignment.choices[j].alpha;
    return ctx.evaluate(genes_from_assignment(ctx, assignment), alphas);
}

BuddyAssignment simple_buddy(const Feeder& feeder, const MonitoredPool& pool,
                             const std::unordered_map<std::string, double>& mean_daily) {
    // The window is irrelevant for the SA; any valid one works.
    EvalContext ctx(feeder, pool, mean_daily, 1.0, DayWindow{0, pool.days});
    std::vector<int> genes;
    std::vector<double> alphas(feeder.customers.size(), 1.0);
    for (std::size_t j = 0; j < feeder.customers.size(); ++j) genes.push_back(ctx.simple_gene(j));
    return assignment_from_genes(ctx, genes, alphas);
}

GAResult ga_buddy(const Feeder& feeder, const MonitoredPool& pool,
                  const std::unordered_map<std::string, double>& mean_daily, const GAConfig& cfg,
                  const DayWindow& window) {
    cfg.validate();
    EvalContext ctx(feeder, pool, mean_daily, cfg.w, window);
    const std::size_t m = feeder.customers.size();
    const double mut_rate = cfg.mutation_rate < 0.0 ? 1.0 / static_cast<double>(m) : cfg.mutation_rate;
    Rng rng(cfg.seed);

    struct Individual {
        std::vector<int> genes;
        std::vector<double> alphas;
        double fitness = 0.0;  // cost total, lower is better
    };

    auto evaluate = [&](Individual& ind) { ind.fitness = ctx.evaluate(ind.genes, ind.alphas).total; };

    std::vector<Individual> pop(static_cast<std::size_t>(cfg.population_size));
    // Individual 0 is the simple-algorithm solution; the GA can never end up
    // worse than it.
    pop[0].genes.resize(m);
    pop[0].alphas.assign(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) pop[0].genes[j] = ctx.simple_gene(j);
    for (std::size_t i = 1; i < pop.size(); ++i) {
        pop[i].genes.resize(m);
        pop[i].alphas.assign(m, 1.0);
        for (std::size_t j = 0; j < m; ++j) {
            const auto& cand = ctx.candidates[j];
            pop[i].genes[j] = cand[rng.uniform_int(cand.size())];
            if (ctx.is_nondom[j] && !cfg.fix_alpha)
                pop[i].alphas[j] = rng.uniform(kAlphaMin, kAlphaMax);
        }
    }
    for (auto& ind : pop) evaluate(ind);

    auto better = [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; };
    Individual best = *std::min_element(pop.begin(), pop.end(), better);

    GAResult result;
    result.trace.push_back(best.fitness);

    auto tournament = [&]() -> const Individual& {
        const Individual* winner = &pop[rng.uniform_int(pop.size())];
        for (int k = 1; k < cfg.tournament_size; ++k) {
            const Individual* contender = &pop[rng.uniform_int(pop.size())];
            if (contender->fitness < winner->fitness) winner = contender;
        }
        return *winner;
    };

    int stall = 0;
    for (int gen = 0; gen < cfg.max_generations && stall < cfg.stall_generations; ++gen) {
        std::vector<Individual> next;
        next.reserve(pop.size());

        // Elitism: carry over the best individuals unchanged.
        std::vector<std::size_t> order(pop.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return pop[a].fitness < pop[b].fitness; });
        for (int e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[static_cast<std::size_t>(e)]]);

        while (next.size() < pop.size()) {
            const Individual& pa = tournament();
            const Individual& pb = tournament();
            Individual child = pa;
            for (std::size_t j = 0; j < m; ++j) {
                if (rng.uniform01() < cfg.crossover_rate) {
                    child.genes[j] = pb.genes[j];
                    child.alphas[j] = pb.alphas[j];
                }
                if (rng.uniform01() < mut_rate) {
                    const auto& cand = ctx.candidates[j];
                    child.genes[j] = cand[rng.uniform_int(cand.size())];
                }
                if (ctx.is_nondom[j] && !cfg.fix_alpha && cfg.alpha_mutation_std > 0.0 &&
                    rng.uniform01() < mut_rate) {
                    child.alphas[j] = std::clamp(
                        child.alphas[j] + rng.normal(0.0, cfg.alpha_mutation_std), kAlphaMin,
                        kAlphaMax);
                }
            }
            evaluate(child);
            next.push_back(std::move(child));
        }
        pop = std::move(next);

        const Individual& gen_best = *std::min_element(pop.begin(), pop.end(), better);
        if (gen_best.fitness < best.fitness) {
            best = gen_best;
            stall = 0;
        } else {
            ++stall;
        }
        result.trace.push_back(best.fitness);
        result.generations = gen + 1;
    }

    result.assignment = assignment_from_genes(ctx, best.genes, best.alphas);
    result.cost = ctx.evaluate(best.genes, best.alphas);
    return result;
}

std::string assignment_to_json(const Feeder& feeder, const AssignmentRecord& record) {
    if (record.assignment.choices.size() != feeder.customers.size())
        throw DataError("assignment size does not match feeder '" + feeder.id + "'");
    json j;
    j["feeder_id"] = record.feeder_id;
    j["method"] = record.method;
    j["w"] = record.w;
    j["choices"] = json::array();
    for (std::size_t i = 0; i < feeder.customers.size(); ++i) {
        json e;
        e["customer_id"] = feeder.customers[i].id;
        e["profile_id"] = record.assignment.choices[i].profile_id;
        if (record.assignment.choices[i].alpha) e["alpha"] = *record.assignment.choices[i].alpha;
        j["choices"].push_back(std::move(e));
    }
    if (record.cost) {
        j["cost"] = {{"total", record.cost->total},
                     {"substation_term", record.cost->substation_term},
                     {"domestic_term", record.cost->domestic_term},
                     {"nondom_term", record.cost->nondom_term},
                     {"normalizer_s", record.cost->normalizer_s},
                     {"normalizer_d", record.cost->normalizer_d}};
    }
    return j.dump(2) + "\n";
}

AssignmentRecord assignment_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("invalid assignment JSON: ") + e.what());
    }
    AssignmentRecord record;
    record.feeder_id = j.at("feeder_id").get<std::string>();
    record.method = j.value("method", std::string());
    record.w = j.value("w", 1.0);
    for (const auto& e : j.at("choices")) {
        BuddyChoice ch;
        ch.profile_id = e.at("profile_id").get<std::string>();
        if (e.contains("alpha")) ch.alpha = e["alpha"].get<double>();
        record.assignment.choices.push_back(std::move(ch));
    }
    if (j.contains("cost")) {
        CostBreakdown bd;
        const auto& c = j["cost"];
        bd.total = c.at("total").get<double>();
        bd.substation_term = c.at("substation_term").get<double>();
        bd.domestic_term = c.at("domestic_term").get<double>();
        bd.nondom_term = c.at("nondom_term").get<double>();
        bd.normalizer_s = c.at("normalizer_s").get<double>();
        bd.normalizer_d = c.at("normalizer_d").get<double>();
        record.cost = bd;
    }
    return record;
}

ScaleStrategies scale_strategies(const Feeder& feeder, const MonitoredPool& pool,
                                 const std::unordered_map<std::string, double>& mean_daily,
                                 const GAConfig& ga_cfg, const DayWindow& window) {
    int nondom = feeder.count_non_domestic();
    if (nondom != 1)
        throw DataError("scale_strategies supports exactly one non-domestic customer, feeder '" +
                        feeder.id + "' has " + std::to_string(nondom));
    if (feeder.customers.size() != 1)
        throw DataError("scale_strategies supports single-customer feeders only");
    if (!feeder.substation_series)
        throw DataError("scale_strategies requires a substation series");

    const Customer& c = feeder.customers[0];
    ScaleStrategies out;
    out.estimated = mean_daily.at(c.id);

    const HalfHourlySeries train =
        feeder.substation_series->slice_days(window.begin_day, window.n_days);
    out.actual = mean_daily_demand(train);

    GAConfig cfg = ga_cfg;
    cfg.w = 0.0;
    GAResult ga = ga_buddy(feeder, pool, mean_daily, cfg, window);
    out.optimal = *ga.assignment.choices[0].alpha * mean_daily.at(c.id);
    out.optimal_assignment = std::move(ga.assignment);
    return out;
}

}  // namespace lvbuddy
