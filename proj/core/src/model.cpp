#include "lvbuddy/model.hpp"

#include <cmath>

#include "lvbuddy/errors.hpp"

namespace lvbuddy {

int tax_band_group(char band) {
    if (band < 'A' || band > 'H')
        throw DataError(std::string("invalid tax band '") + band + "', expected A..H");
    return band <= 'E' ? band - 'A' : 5;
}

std::string class_label(const CustomerClass& cls) {
    if (const auto* d = std::get_if<DomesticClass>(&cls)) {
        std::string s = "pc" + std::to_string(d->profile_class) + "-" + std::string(1, d->tax_band);
        if (d->has_solar) s += "-solar";
        return s;
    }
    return "nd-" + std::get<NonDomesticClass>(cls).type_tag;
}

CustomerClass parse_class_label(const std::string& label) {
    if (label.rfind("nd-", 0) == 0) {
        if (label.size() == 3) throw DataError("empty non-domestic type in class label");
        return NonDomesticClass{label.substr(3)};
    }
    if (label.rfind("pc", 0) == 0 && label.size() >= 5 && label[3] == '-') {
        DomesticClass d;
        d.profile_class = label[2] - '0';
        d.tax_band = label[4];
        if ((d.profile_class == 1 || d.profile_class == 2) && d.tax_band >= 'A' && d.tax_band <= 'H') {
            std::string rest = label.substr(5);
            if (rest.empty()) return d;
            if (rest == "-solar") {
                d.has_solar = true;
                return d;
            }
        }
    }
    throw DataError("invalid class label '" + label +
                    "', expected pc{1|2}-{A..H}[-solar] or nd-<type>");
}

std::string GroupKey::label() const {
    if (!domestic) return "nd-" + type_tag;
    static const char* kBandNames[kNumBandGroups] = {"A", "B", "C", "D", "E", "F+"};
    std::string s = "pc" + std::to_string(profile_class) + "-band" + kBandNames[band_group];
    if (solar) s += "-solar";
    return s;
}

GroupKey GroupKey::parse(const std::string& label) {
    if (label.rfind("nd-", 0) == 0) {
        GroupKey k;
        k.domestic = false;
        k.type_tag = label.substr(3);
        if (k.type_tag.empty()) throw DataError("empty non-domestic type in group label");
        return k;
    }
    if (label.rfind("pc", 0) == 0 && label.size() >= 9 && label.substr(3, 5) == "-band") {
        GroupKey k;
        k.profile_class = label[2] - '0';
        std::string rest = label.substr(8);
        bool solar = false;
        if (rest.size() > 6 && rest.substr(rest.size() - 6) == "-solar") {
            solar = true;
            rest = rest.substr(0, rest.size() - 6);
        }
        k.solar = solar;
        static const char* kBandNames[kNumBandGroups] = {"A", "B", "C", "D", "E", "F+"};
        for (int g = 0; g < kNumBandGroups; ++g) {
            if (rest == kBandNames[g]) {
                k.band_group = g;
                if (k.profile_class == 1 || k.profile_class == 2) return k;
            }
        }
    }
    throw DataError("invalid group label '" + label +
                    "', expected pc{1|2}-band{A|B|C|D|E|F+}[-solar] or nd-<type>");
}

GroupKey group_key(const CustomerClass& cls) {
    GroupKey k;
    if (const auto* d = std::get_if<DomesticClass>(&cls)) {
        k.domestic = true;
        k.profile_class = d->profile_class;
        k.band_group = tax_band_group(d->tax_band);
        k.solar = d->has_solar;
    } else {
        k.domestic = false;
        k.type_tag = std::get<NonDomesticClass>(cls).type_tag;
    }
    return k;
}

void MonitoredPool::add(MonitoredProfile profile) {
    if (find(profile.id))
        throw DataError("duplicate profile id '" + profile.id + "'");
    if (profiles.empty()) {
        start_date = profile.series.start_date;
        days = profile.series.days();
    } else if (profile.series.start_date != start_date || profile.series.days() != days) {
        throw DataError("profile '" + profile.id + "' window mismatch with pool");
    }
    by_group[profile.group].push_back(static_cast<int>(profiles.size()));
    profiles.push_back(std::move(profile));
}

const MonitoredProfile* MonitoredPool::find(const std::string& id) const {
    for (const auto& p : profiles)
        if (p.id == id) return &p;
    return nullptr;
}

const std::vector<int>& MonitoredPool::candidates(const GroupKey& key) const {
    auto it = by_group.find(key);
    if (it == by_group.end() || it->second.empty())
        throw DataError("no monitored profiles in group '" + key.label() + "'");
    return it->second;
}

void MonitoredPool::audit() const {
    for (const auto& p : profiles) {
        const double recomputed = mean_daily_demand(p.series);
        const double scale = std::max(std::abs(recomputed), 1e-300);
        if (std::abs(recomputed - p.mean_daily) > 1e-9 * std::max(scale, 1.0))
            throw DataError("profile '" + p.id + "' cached mean_daily is stale");
    }
}

int Feeder::count_domestic() const {
    int n = 0;
    for (const auto& c : customers) n += c.is_domestic();
    return n;
}

int Feeder::count_non_domestic() const {
    return static_cast<int>(customers.size()) - count_domestic();
}

void validate_assignment(const Feeder& feeder, const BuddyAssignment& assignment,
                         const MonitoredPool& pool) {
    if (assignment.choices.size() != feeder.customers.size())
        throw DataError("assignment size does not match feeder '" + feeder.id + "'");
    for (std::size_t j = 0; j < feeder.customers.size(); ++j) {
        const Customer& c = feeder.customers[j];
        const BuddyChoice& ch = assignment.choices[j];
        const MonitoredProfile* p = pool.find(ch.profile_id);
        if (!p) throw DataError("assignment references unknown profile '" + ch.profile_id + "'");
        if (p->group != group_key(c.cls))
            throw DataError("customer '" + c.id + "' assigned profile from wrong group");
        if (c.is_domestic()) {
            if (ch.alpha) throw DataError("domestic customer '" + c.id + "' has alpha");
        } else {
            if (!ch.alpha) throw DataError("non-domestic customer '" + c.id + "' missing alpha");
            if (*ch.alpha < kAlphaMin || *ch.alpha > kAlphaMax)
                throw DataError("alpha out of [0.8, 1.2] for customer '" + c.id + "'");
        }
    }
}

std::unordered_map<std::string, double> resolve_mean_daily(const std::vector<Feeder>& feeders) {
    struct Acc {
        double sum = 0.0;
        int n = 0;
    };
    std::map<GroupKey, Acc> by_group;
    Acc domestic_all, nondom_all;

    for (const auto& f : feeders) {
        for (const auto& c : f.customers) {
            if (!c.qmr_mean_daily) continue;
            const double u = *c.qmr_mean_daily;
            if (!(u > 0.0) || !std::isfinite(u))
                throw DataError("customer '" + c.id + "' has non-positive QMR mean daily");
            auto& g = by_group[group_key(c.cls)];
            g.sum += u;
            g.n += 1;
            auto& kind = c.is_domestic() ? domestic_all : nondom_all;
            kind.sum += u;
            kind.n += 1;
        }
    }

    std::unordered_map<std::string, double> out;
    for (const auto& f : feeders) {
        for (const auto& c : f.customers) {
            if (c.qmr_mean_daily) {
                out[c.id] = *c.qmr_mean_daily;
                continue;
            }
            auto it = by_group.find(group_key(c.cls));
            if (it != by_group.end() && it->second.n > 0) {
                out[c.id] = it->second.sum / it->second.n;
                continue;
            }
            const Acc& kind = c.is_domestic() ? domestic_all : nondom_all;
            if (kind.n == 0)
                throw DataError("cannot impute mean daily demand for customer '" + c.id +
                                "': no customers of the same kind have known QMR");
            out[c.id] = kind.sum / kind.n;
        }
    }
    return out;
}

HalfHourlySeries aggregate_assignment(const Feeder& feeder, const BuddyAssignment& assignment,
                                      const MonitoredPool& pool,
                                      const std::unordered_map<std::string, double>& mean_daily) {
    validate_assignment(feeder, assignment, pool);
    HalfHourlySeries out;
    out.start_date = pool.start_date;
    out.allows_negative = true;  // solar buddies may export
    out.values.assign(static_cast<std::size_t>(pool.days) * kSlotsPerDay, 0.0);

    for (std::size_t j = 0; j < feeder.customers.size(); ++j) {
        const Customer& c = feeder.customers[j];
        const MonitoredProfile& p = *pool.find(assignment.choices[j].profile_id);
        double scale = 1.0;
        if (!c.is_domestic()) {
            auto it = mean_daily.find(c.id);
            if (it == mean_daily.end())
                throw DataError("missing mean daily demand for non-domestic customer '" + c.id + "'");
            scale = *assignment.choices[j].alpha * it->second;
        }
        const auto& src = p.series.values;
        for (std::size_t t = 0; t < out.values.size(); ++t) out.values[t] += scale * src[t];
    }
    return out;
}

}  // namespace lvbuddy
