#pragma once

// Time-expanded contact plan for a scenario: orbital LEO contacts plus the
// permanent HAPS->OGS (weather-tagged) and OGS->MOC (ideal) links.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "hapsdtn/errors.hpp"
#include "hapsdtn/orbital.hpp"
#include "hapsdtn/scenario.hpp"
#include "hapsdtn/text.hpp"

namespace hapsdtn::contactplan {

using NodeId = std::size_t;

// Directed contact. Links carry data toward the MOC only.
struct Contact {
    NodeId from = 0;
    NodeId to = 0;
    double start_s = 0;
    double end_s = 0;
    double rate_bps = 0;
    std::optional<std::string> weather_site;

    double duration_s() const { return end_s - start_s; }
    double volume_bits() const { return duration_s() * rate_bps; }
};

struct ContactPlan {
    std::vector<NodeSpec> nodes;
    std::vector<Contact> contacts;
    double horizon_s = 0;

    std::optional<NodeId> find_node(std::string_view id) const {
        for (NodeId i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == id) return i;
        return std::nullopt;
    }

    NodeId node(std::string_view id) const {
        if (auto i = find_node(id)) return *i;
        throw ConfigError("unknown node '" + std::string(id) + "'");
    }

    const std::string& name(NodeId i) const { return nodes.at(i).id; }

    NodeId moc() const {
        for (NodeId i = 0; i < nodes.size(); ++i)
            if (nodes[i].kind == NodeKind::MOC) return i;
        throw ConfigError("plan has no MOC node");
    }

    std::vector<NodeId> nodes_of_kind(NodeKind k) const {
        std::vector<NodeId> out;
        for (NodeId i = 0; i < nodes.size(); ++i)
            if (nodes[i].kind == k) out.push_back(i);
        return out;
    }

    // Distinct weather sites referenced by contacts, sorted.
    std::vector<std::string> weather_sites() const {
        std::vector<std::string> sites;
        for (const auto& c : contacts)
            if (c.weather_site) sites.push_back(*c.weather_site);
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        return sites;
    }

    // Checks node declarations and contact invariants.
    void validate() const {
        std::size_t mocs = 0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& n = nodes[i];
            if (n.id.empty()) throw ConfigError("node with empty id");
            for (std::size_t j = 0; j < i; ++j)
                if (nodes[j].id == n.id) throw ConfigError("duplicate node id '" + n.id + "'");
            if (n.kind == NodeKind::MOC) ++mocs;
            if (n.kind == NodeKind::OGS && !n.weather_site)
                throw ConfigError("OGS '" + n.id + "' must reference a weather site");
            if ((n.kind == NodeKind::OGS || n.kind == NodeKind::HAPS) && n.station) n.station->validate();
        }
        if (mocs != 1) throw ConfigError("a scenario needs exactly one MOC node");

        std::vector<std::size_t> order(contacts.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (const auto& c : contacts) {
            if (c.from >= nodes.size() || c.to >= nodes.size()) throw ConfigError("contact endpoint is not a node");
            if (c.from == c.to) throw ConfigError("contact from a node to itself");
            if (!(c.start_s < c.end_s)) throw ConfigError("contact must have start < end");
            if (!(c.rate_bps > 0)) throw ConfigError("contact rate must be positive");
            if (c.weather_site && nodes[c.to].kind != NodeKind::OGS)
                throw ConfigError("weather-tagged contact must terminate at an OGS");
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& x = contacts[a];
            const auto& y = contacts[b];
            return std::tie(x.from, x.to, x.start_s) < std::tie(y.from, y.to, y.start_s);
        });
        for (std::size_t k = 1; k < order.size(); ++k) {
            const auto& x = contacts[order[k - 1]];
            const auto& y = contacts[order[k]];
            if (x.from == y.from && x.to == y.to && y.start_s < x.end_s)
                throw ConfigError("overlapping contacts for " + name(x.from) + "->" + name(x.to));
        }
    }
};

inline bool same_site(const orbital::StationSpec& a, const orbital::StationSpec& b) {
    return std::abs(a.latitude_deg - b.latitude_deg) < 1e-6 && std::abs(a.longitude_deg - b.longitude_deg) < 1e-6;
}

inline double link_rate(const ScenarioConfig& cfg, const std::string& from, const std::string& to) {
    if (auto it = cfg.link_rates.find({from, to}); it != cfg.link_rates.end()) return it->second;
    return cfg.rate_bps;
}

inline void sort_contacts(ContactPlan& plan) {
    std::stable_sort(plan.contacts.begin(), plan.contacts.end(), [](const Contact& a, const Contact& b) {
        return std::tie(a.start_s, a.from, a.to) < std::tie(b.start_s, b.from, b.to);
    });
}

// HAPS -> OGS pairing: explicit `paired_ogs`, else the OGS at the same lat/lon.
inline NodeId haps_downlink(const ContactPlan& plan, NodeId haps) {
    const auto& h = plan.nodes[haps];
    if (h.paired_ogs) {
        const NodeId o = plan.node(*h.paired_ogs);
        if (plan.nodes[o].kind != NodeKind::OGS)
            throw ConfigError("HAPS '" + h.id + "' is paired with non-OGS node '" + *h.paired_ogs + "'");
        return o;
    }
    if (!h.station) throw ConfigError("HAPS '" + h.id + "' has no position");
    for (NodeId o : plan.nodes_of_kind(NodeKind::OGS))
        if (plan.nodes[o].station && same_site(*plan.nodes[o].station, *h.station)) return o;
    throw ConfigError("HAPS '" + h.id + "' is not co-located with any OGS and has no explicit pairing");
}

inline std::vector<Contact> load_contacts_csv(std::istream& in, const ContactPlan& plan);

// Builds the plan for the configured topology over [0, horizon_s].
inline ContactPlan build_plan(const ScenarioConfig& cfg, double horizon_s) {
    if (!(horizon_s > 0)) throw ConfigError("plan horizon must be positive");
    ContactPlan plan;
    plan.nodes = resolve_nodes(cfg);
    plan.horizon_s = horizon_s;
    for (auto& n : plan.nodes)
        if (n.station) n.station->name = n.id;

    const auto leos = plan.nodes_of_kind(NodeKind::LEO);
    const auto haps = plan.nodes_of_kind(NodeKind::HAPS);
    const auto ogss = plan.nodes_of_kind(NodeKind::OGS);
    const NodeId moc = [&] {
        std::size_t n = 0;
        for (const auto& node : plan.nodes) n += node.kind == NodeKind::MOC;
        if (n != 1) throw ConfigError("a scenario needs exactly one MOC node");
        return plan.moc();
    }();

    std::vector<NodeId> ogs_under_haps;
    for (NodeId h : haps) {
        const NodeId o = haps_downlink(plan, h);
        ogs_under_haps.push_back(o);
        const auto& site = plan.nodes[o].weather_site;
        if (!site) throw ConfigError("OGS '" + plan.name(o) + "' must reference a weather site");
        plan.contacts.push_back({h, o, 0.0, horizon_s, link_rate(cfg, plan.name(h), plan.name(o)), site});
    }
    for (NodeId o : ogss) {
        if (!plan.nodes[o].weather_site) throw ConfigError("OGS '" + plan.name(o) + "' must reference a weather site");
        plan.contacts.push_back({o, moc, 0.0, horizon_s, link_rate(cfg, plan.name(o), plan.name(moc)), std::nullopt});
    }

    if (!cfg.plan_csv.empty()) {
        std::ifstream in(cfg.plan_csv);
        if (!in) throw ConfigError("cannot open contact plan '" + cfg.plan_csv + "'");
        auto extra = load_contacts_csv(in, plan);
        plan.contacts.insert(plan.contacts.end(), extra.begin(), extra.end());
    } else {
        for (NodeId leo : leos) {
            for (NodeId target : haps) {
                if (!plan.nodes[target].station) throw ConfigError("HAPS '" + plan.name(target) + "' has no position");
                for (const auto& w : orbital::compute_contacts(cfg.orbit, *plan.nodes[target].station, horizon_s,
                                                               cfg.coarse_step_s))
                    plan.contacts.push_back(
                        {leo, target, w.start, w.end, link_rate(cfg, plan.name(leo), plan.name(target)), std::nullopt});
            }
            for (NodeId target : ogss) {
                if (std::find(ogs_under_haps.begin(), ogs_under_haps.end(), target) != ogs_under_haps.end()) continue;
                if (!plan.nodes[target].station) throw ConfigError("OGS '" + plan.name(target) + "' has no position");
                for (const auto& w : orbital::compute_contacts(cfg.orbit, *plan.nodes[target].station, horizon_s,
                                                               cfg.coarse_step_s))
                    plan.contacts.push_back({leo, target, w.start, w.end,
                                             link_rate(cfg, plan.name(leo), plan.name(target)),
                                             plan.nodes[target].weather_site});
            }
        }
    }
    sort_contacts(plan);
    plan.validate();
    return plan;
}

// Sum of (end - start) * rate over contacts from -> to.
inline double plan_volume(const ContactPlan& plan, NodeId from, NodeId to) {
    double bits = 0;
    for (const auto& c : plan.contacts)
        if (c.from == from && c.to == to) bits += c.volume_bits();
    return bits;
}

inline double plan_volume(const ContactPlan& plan, std::string_view from, std::string_view to) {
    return plan_volume(plan, plan.node(from), plan.node(to));
}

inline void write_plan_csv(std::ostream& os, const ContactPlan& plan) {
    os << "from,to,start_s,end_s,rate_bps,weather_site\n";
    for (const auto& c : plan.contacts) {
        os << plan.name(c.from) << ',' << plan.name(c.to) << ',' << text::format_double(c.start_s) << ','
           << text::format_double(c.end_s) << ',' << text::format_double(c.rate_bps) << ','
           << c.weather_site.value_or("") << '\n';
    }
}

// Reads `from,to,start_s,end_s,rate_bps[,weather_site]`; endpoints must be
// declared in `plan.nodes`.
inline std::vector<Contact> load_contacts_csv(std::istream& in, const ContactPlan& plan) {
    std::vector<Contact> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    bool has_site = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = text::trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto cols = text::split(row, ',');
        if (!header) {
            const bool base = cols.size() >= 5 && text::trim(cols[0]) == "from" && text::trim(cols[1]) == "to" &&
                              text::trim(cols[2]) == "start_s" && text::trim(cols[3]) == "end_s" &&
                              text::trim(cols[4]) == "rate_bps";
            has_site = cols.size() == 6 && text::trim(cols[5]) == "weather_site";
            if (!base || (cols.size() == 6 && !has_site) || cols.size() > 6)
                throw InputError("expected header 'from,to,start_s,end_s,rate_bps[,weather_site]'", lineno);
            header = true;
            continue;
        }
        if (cols.size() != (has_site ? 6u : 5u)) throw InputError("wrong number of columns", lineno);
        const auto from = plan.find_node(text::trim(cols[0]));
        const auto to = plan.find_node(text::trim(cols[1]));
        if (!from || !to) throw InputError("contact references an undeclared node", lineno);
        const auto start = text::parse_double(cols[2]);
        const auto end = text::parse_double(cols[3]);
        const auto rate = text::parse_double(cols[4]);
        if (!start || !end || !rate) throw InputError("bad number", lineno);
        if (!(*start < *end) || !(*rate > 0)) throw InputError("contact needs start < end and rate > 0", lineno);
        std::optional<std::string> site;
        if (has_site && !text::trim(cols[5]).empty()) site = std::string(text::trim(cols[5]));
        out.push_back({*from, *to, *start, *end, *rate, site});
    }
    if (!header) throw InputError("empty contact plan file");
    return out;
}

}  // namespace hapsdtn::contactplan
