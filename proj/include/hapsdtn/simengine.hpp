#pragma once

// Discrete-event store-and-forward simulator. Bundles start at the source at
// t = 0 and are routed by CGR over the nominal plan; weather timelines gate
// weather-tagged contacts at execution time only.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <string>
#include <vector>

#include "hapsdtn/contactplan.hpp"
#include "hapsdtn/errors.hpp"
#include "hapsdtn/random.hpp"
#include "hapsdtn/routing.hpp"
#include "hapsdtn/scenario.hpp"
#include "hapsdtn/text.hpp"
#include "hapsdtn/weather.hpp"

namespace hapsdtn::sim {

using contactplan::ContactPlan;
using contactplan::NodeId;
using routing::Bundle;
using routing::ContactId;
using routing::Route;
using weather::FailureTimeline;
using weather::LinkState;

// Declaration order is the tie order for events at the same instant.
enum class EventKind : std::uint8_t { LinkDown, ContactStart, TxComplete, ContactEnd, LinkUp, RouteWake };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::LinkDown: return "LINK_DOWN";
        case EventKind::ContactStart: return "CONTACT_START";
        case EventKind::TxComplete: return "TX_COMPLETE";
        case EventKind::ContactEnd: return "CONTACT_END";
        case EventKind::LinkUp: return "LINK_UP";
        case EventKind::RouteWake: return "ROUTE_WAKE";
    }
    return "?";
}

struct Event {
    double time_s = 0;
    EventKind kind = EventKind::RouteWake;
    std::uint64_t seq = 0;
    std::size_t ref = 0;  // contact, site or node depending on kind
    std::int64_t bundle = -1;
    std::uint64_t token = 0;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time_s != b.time_s) return a.time_s > b.time_s;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

// One line of the optional execution trace. `what` is an event kind or one of
// TX_START, TX_ABORT, DELIVERED.
struct TraceRecord {
    double time_s = 0;
    std::string what;
    std::int64_t contact = -1;
    std::int64_t bundle = -1;
    std::int64_t node = -1;
    std::string site;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

inline void write_trace_jsonl(std::ostream& os, const std::vector<TraceRecord>& trace) {
    for (const auto& r : trace) {
        os << "{\"time\":" << text::format_double(r.time_s) << ",\"kind\":\"" << r.what << '"';
        if (r.contact >= 0) os << ",\"contact\":" << r.contact;
        if (r.bundle >= 0) os << ",\"bundle\":" << r.bundle;
        if (r.node >= 0) os << ",\"node\":" << r.node;
        if (!r.site.empty()) os << ",\"site\":\"" << r.site << '"';
        os << "}\n";
    }
}

struct OccupancySample {
    double time_s = 0;
    long count = 0;

    friend bool operator==(const OccupancySample&, const OccupancySample&) = default;
};

struct Counts {
    long generated = 0;
    long delivered = 0;
    long buffered = 0;
    long in_flight = 0;
};

struct SimParams {
    double duration_s = 604800;
    long n_bundles = 1000;
    std::int64_t bundle_size_bits = 160'000'000'000;
    NodeId source = 0;
    NodeId destination = 0;
    std::vector<int> terminals;  // per node; 0 or missing = unlimited
    bool unlimited_contact_volume = false;
    bool check_invariants = true;
    std::vector<TraceRecord>* trace = nullptr;
    std::ostream* route_trace = nullptr;
};

struct SimReport {
    double duration_s = 0;
    long generated_count = 0;
    long delivered_count = 0;
    double delivery_ratio = 0;
    std::vector<std::string> node_names;
    std::vector<std::vector<OccupancySample>> occupancy;  // per node, bundles held (not in flight)
    std::vector<double> mean_occupancy_pct;
    std::vector<double> max_occupancy_pct;
    std::vector<double> latencies_s;
    std::vector<std::int64_t> delivered_ids;  // ascending

    double occupancy_pct(long count) const {
        return generated_count ? 100.0 * static_cast<double>(count) / static_cast<double>(generated_count) : 0.0;
    }

    friend bool operator==(const SimReport&, const SimReport&) = default;
};

// Time-weighted mean and pointwise max of one node's occupancy over [0, duration].
inline std::pair<double, double> occupancy_stats(const SimReport& report, NodeId node) {
    if (node >= report.occupancy.size()) throw ConfigError("node not present in report");
    const auto& series = report.occupancy[node];
    double area = 0, peak = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double until = i + 1 < series.size() ? series[i + 1].time_s : report.duration_s;
        area += static_cast<double>(series[i].count) * (until - series[i].time_s);
        peak = std::max(peak, static_cast<double>(series[i].count));
    }
    const double mean = report.duration_s > 0 ? area / report.duration_s : 0.0;
    return {report.occupancy_pct(1) * mean, report.occupancy_pct(1) * peak};
}

inline std::pair<double, double> occupancy_stats(const SimReport& report, std::string_view node) {
    for (NodeId i = 0; i < report.node_names.size(); ++i)
        if (report.node_names[i] == node) return occupancy_stats(report, i);
    throw ConfigError("node '" + std::string(node) + "' not present in report");
}

class Simulator {
public:
    // `timelines` must cover every weather site referenced by the plan.
    Simulator(const ContactPlan& plan, const std::map<std::string, FailureTimeline>& timelines, SimParams params)
        : plan_(plan), index_(plan), params_(std::move(params)),
          residuals_(plan, params_.unlimited_contact_volume) {
        if (!(params_.duration_s > 0)) throw ConfigError("simulation duration must be positive");
        if (params_.n_bundles <= 0) throw ConfigError("bundle count must be positive");
        if (params_.bundle_size_bits <= 0) throw ConfigError("bundle size must be positive");
        if (params_.source >= plan.nodes.size() || params_.destination >= plan.nodes.size())
            throw ConfigError("source or destination is not a plan node");

        for (const auto& site : plan.weather_sites()) {
            auto it = timelines.find(site);
            if (it == timelines.end()) throw ConfigError("no weather timeline for site '" + site + "'");
            site_names_.push_back(site);
            timelines_.push_back(&it->second);
            site_up_.push_back(it->second.initial == LinkState::Up);
        }
        contact_site_.assign(plan.contacts.size(), -1);
        site_contacts_.resize(site_names_.size());
        for (ContactId c = 0; c < plan.contacts.size(); ++c) {
            const auto& site = plan.contacts[c].weather_site;
            if (!site) continue;
            const auto k = static_cast<std::size_t>(
                std::find(site_names_.begin(), site_names_.end(), *site) - site_names_.begin());
            contact_site_[c] = static_cast<long>(k);
            site_contacts_[k].push_back(c);
        }

        const std::size_t n_nodes = plan.nodes.size();
        terminals_ = params_.terminals;
        terminals_.resize(n_nodes, 0);
        busy_terminals_.assign(n_nodes, 0);
        buffered_.assign(n_nodes, 0);
        unrouted_.resize(n_nodes);
        wake_pending_.assign(n_nodes, false);
        active_.assign(plan.contacts.size(), false);
        queue_.resize(plan.contacts.size());
        tx_bundle_.assign(plan.contacts.size(), -1);
        tx_token_.assign(plan.contacts.size(), 0);

        report_.duration_s = params_.duration_s;
        report_.generated_count = params_.n_bundles;
        for (const auto& n : plan.nodes) report_.node_names.push_back(n.id);
        report_.occupancy.resize(n_nodes);
    }

    SimReport run() {
        for (ContactId c = 0; c < plan_.contacts.size(); ++c) {
            const auto& ct = plan_.contacts[c];
            if (ct.start_s <= params_.duration_s) push(ct.start_s, EventKind::ContactStart, c);
            if (ct.end_s <= params_.duration_s) push(ct.end_s, EventKind::ContactEnd, c);
        }
        for (std::size_t k = 0; k < timelines_.size(); ++k)
            for (const auto& tr : timelines_[k]->transitions)
                if (tr.time_s <= params_.duration_s)
                    push(tr.time_s, tr.state == LinkState::Down ? EventKind::LinkDown : EventKind::LinkUp, k);

        bundles_.reserve(static_cast<std::size_t>(params_.n_bundles));
        routes_.resize(static_cast<std::size_t>(params_.n_bundles));
        for (long i = 0; i < params_.n_bundles; ++i) {
            bundles_.push_back({i, params_.bundle_size_bits, params_.source, params_.destination, 0.0, params_.source});
            ++buffered_[params_.source];
        }
        if (params_.source == params_.destination) {
            throw ConfigError("source and destination must differ");
        }
        for (long i = 0; i < params_.n_bundles; ++i) route_bundle(i, 0.0);
        sample(0.0);
        check(0.0);

        while (!events_.empty()) {
            const Event ev = events_.top();
            if (ev.time_s > params_.duration_s) break;
            events_.pop();
            handle(ev);
            if (volume_released_) schedule_wakes(ev.time_s);
            volume_released_ = false;
            sample(ev.time_s);
            check(ev.time_s);
        }
        sample(params_.duration_s);
        return finish();
    }

    Counts counts() const {
        Counts c;
        c.generated = params_.n_bundles;
        c.delivered = report_.delivered_count;
        for (long b : buffered_) c.buffered += b;
        c.in_flight = in_flight_;
        return c;
    }

private:
    void push(double t, EventKind kind, std::size_t ref, std::int64_t bundle = -1, std::uint64_t token = 0) {
        events_.push({t, kind, seq_++, ref, bundle, token});
    }

    void trace(double t, std::string what, std::int64_t contact = -1, std::int64_t bundle = -1, std::int64_t node = -1,
               std::string site = {}) {
        if (params_.trace)
            params_.trace->push_back({t, std::move(what), contact, bundle, node, std::move(site)});
    }

    void route_bundle(std::int64_t b, double now) {
        auto& bundle = bundles_[static_cast<std::size_t>(b)];
        auto route = routing::compute_route(plan_, index_, residuals_, bundle, now);
        if (params_.route_trace) routing::write_route_trace(*params_.route_trace, plan_, now, bundle, route);
        if (!route) {
            unrouted_[bundle.custodian].push_back(b);
            return;
        }
        residuals_.commit(*route, bundle);
        queue_[route->hops.front()].push_back(b);
        routes_[static_cast<std::size_t>(b)] = std::move(*route);
    }

    void release(std::int64_t b) {
        auto& route = routes_[static_cast<std::size_t>(b)];
        if (!route) return;
        residuals_.release(*route, bundles_[static_cast<std::size_t>(b)]);
        route.reset();
        volume_released_ = true;
    }

    // Bundles are identical in size and destination, so once one bundle at a
    // node finds no route the rest cannot either.
    void route_unrouted(NodeId node, double now) {
        auto pending = std::move(unrouted_[node]);
        unrouted_[node].clear();
        while (!pending.empty()) {
            const std::int64_t b = pending.front();
            pending.pop_front();
            route_bundle(b, now);
            if (!unrouted_[node].empty()) {
                unrouted_[node].insert(unrouted_[node].end(), pending.begin(), pending.end());
                break;
            }
        }
    }

    void schedule_wakes(double now) {
        for (NodeId n = 0; n < unrouted_.size(); ++n) {
            if (unrouted_[n].empty() || wake_pending_[n]) continue;
            wake_pending_[n] = true;
            push(now, EventKind::RouteWake, n);
        }
    }

    bool link_up(ContactId c) const {
        const long k = contact_site_[c];
        return k < 0 || site_up_[static_cast<std::size_t>(k)];
    }

    void dispatch(NodeId node, double now) {
        for (ContactId c : index_.outgoing(node)) {
            if (terminals_[node] > 0 && busy_terminals_[node] >= terminals_[node]) return;
            if (!active_[c] || tx_bundle_[c] >= 0 || queue_[c].empty() || !link_up(c)) continue;
            const auto& ct = plan_.contacts[c];
            const double done = now + routing::transmission_time(ct, params_.bundle_size_bits);
            if (done > ct.end_s) continue;
            const std::int64_t b = queue_[c].front();
            queue_[c].pop_front();
            tx_bundle_[c] = b;
            ++tx_token_[c];
            ++busy_terminals_[node];
            --buffered_[node];
            ++in_flight_;
            trace(now, "TX_START", static_cast<std::int64_t>(c), b, static_cast<std::int64_t>(node),
                  contact_site_[c] >= 0 ? site_names_[static_cast<std::size_t>(contact_site_[c])] : "");
            push(done, EventKind::TxComplete, c, b, tx_token_[c]);
        }
    }

    void abort_transmission(ContactId c, double now) {
        const std::int64_t b = tx_bundle_[c];
        if (b < 0) return;
        const NodeId from = plan_.contacts[c].from;
        tx_bundle_[c] = -1;
        ++tx_token_[c];
        --busy_terminals_[from];
        --in_flight_;
        ++buffered_[from];
        trace(now, "TX_ABORT", static_cast<std::int64_t>(c), b, static_cast<std::int64_t>(from));
        release(b);
        route_bundle(b, now);
    }

    void handle(const Event& ev) {
        const double now = ev.time_s;
        switch (ev.kind) {
            case EventKind::ContactStart: {
                trace(now, to_string(ev.kind), static_cast<std::int64_t>(ev.ref));
                active_[ev.ref] = true;
                dispatch(plan_.contacts[ev.ref].from, now);
                break;
            }
            case EventKind::ContactEnd: {
                trace(now, to_string(ev.kind), static_cast<std::int64_t>(ev.ref));
                const ContactId c = ev.ref;
                active_[c] = false;
                abort_transmission(c, now);
                auto stranded = std::move(queue_[c]);
                queue_[c].clear();
                for (std::int64_t b : stranded) {
                    release(b);
                    route_bundle(b, now);
                }
                dispatch(plan_.contacts[c].from, now);
                break;
            }
            case EventKind::LinkDown: {
                trace(now, to_string(ev.kind), -1, -1, -1, site_names_[ev.ref]);
                site_up_[ev.ref] = false;
                for (ContactId c : site_contacts_[ev.ref]) {
                    const NodeId from = plan_.contacts[c].from;
                    if (tx_bundle_[c] < 0) continue;
                    abort_transmission(c, now);
                    dispatch(from, now);
                }
                break;
            }
            case EventKind::LinkUp: {
                trace(now, to_string(ev.kind), -1, -1, -1, site_names_[ev.ref]);
                site_up_[ev.ref] = true;
                for (ContactId c : site_contacts_[ev.ref]) dispatch(plan_.contacts[c].from, now);
                break;
            }
            case EventKind::TxComplete: {
                const ContactId c = ev.ref;
                if (tx_bundle_[c] != ev.bundle || tx_token_[c] != ev.token) break;  // aborted
                trace(now, to_string(ev.kind), static_cast<std::int64_t>(c), ev.bundle);
                complete_transmission(c, now);
                break;
            }
            case EventKind::RouteWake: {
                trace(now, to_string(ev.kind), -1, -1, static_cast<std::int64_t>(ev.ref));
                wake_pending_[ev.ref] = false;
                route_unrouted(ev.ref, now);
                dispatch(ev.ref, now);
                break;
            }
        }
    }

    void complete_transmission(ContactId c, double now) {
        const auto& ct = plan_.contacts[c];
        const std::int64_t b = tx_bundle_[c];
        auto& bundle = bundles_[static_cast<std::size_t>(b)];
        auto& route = routes_[static_cast<std::size_t>(b)];
        tx_bundle_[c] = -1;
        --busy_terminals_[ct.from];
        --in_flight_;

        residuals_.settle_first_hop(bundle, c);
        route->hops.erase(route->hops.begin());
        bundle.custodian = ct.to;

        if (ct.to == params_.destination) {
            if (!route->hops.empty()) throw InvariantError("route continues past the destination");
            route.reset();
            ++report_.delivered_count;
            report_.latencies_s.push_back(now - bundle.created_s);
            report_.delivered_ids.push_back(b);
            trace(now, "DELIVERED", static_cast<std::int64_t>(c), b, static_cast<std::int64_t>(ct.to));
        } else {
            ++buffered_[ct.to];
            // re-plan from the new custodian
            const std::vector<ContactId> old_tail = route->hops;
            residuals_.release(*route, bundle);
            route.reset();
            route_bundle(b, now);
            const auto& fresh = routes_[static_cast<std::size_t>(b)];
            if (!fresh || fresh->hops != old_tail) volume_released_ = true;
        }
        dispatch(ct.from, now);
        dispatch(ct.to, now);
    }

    void sample(double now) {
        for (NodeId n = 0; n < buffered_.size(); ++n) {
            auto& series = report_.occupancy[n];
            if (!series.empty() && series.back().count == buffered_[n]) continue;
            if (!series.empty() && series.back().time_s == now) {
                series.back().count = buffered_[n];
                if (series.size() >= 2 && series[series.size() - 2].count == buffered_[n]) series.pop_back();
            } else {
                series.push_back({now, buffered_[n]});
            }
        }
    }

    void check(double now) const {
        if (!params_.check_invariants) return;
        const Counts c = counts();
        if (c.generated != c.delivered + c.buffered + c.in_flight)
            throw InvariantError("bundle conservation violated at t=" + text::format_double(now));
        if (c.in_flight > static_cast<long>(plan_.contacts.size()))
            throw InvariantError("more bundles in flight than links");
        for (long b : buffered_)
            if (b < 0) throw InvariantError("negative buffer occupancy");
    }

    SimReport finish() {
        report_.delivery_ratio =
            static_cast<double>(report_.delivered_count) / static_cast<double>(report_.generated_count);
        std::sort(report_.delivered_ids.begin(), report_.delivered_ids.end());
        for (NodeId n = 0; n < plan_.nodes.size(); ++n) {
            const auto [mean, peak] = occupancy_stats(report_, n);
            report_.mean_occupancy_pct.push_back(mean);
            report_.max_occupancy_pct.push_back(peak);
        }
        return std::move(report_);
    }

    const ContactPlan& plan_;
    routing::ContactIndex index_;
    SimParams params_;
    routing::ResidualVolumes residuals_;

    std::vector<std::string> site_names_;
    std::vector<const FailureTimeline*> timelines_;
    std::vector<bool> site_up_;
    std::vector<long> contact_site_;
    std::vector<std::vector<ContactId>> site_contacts_;

    std::vector<int> terminals_;
    std::vector<int> busy_terminals_;
    std::vector<long> buffered_;
    std::vector<std::deque<std::int64_t>> unrouted_;
    std::vector<bool> wake_pending_;
    std::vector<bool> active_;
    std::vector<std::deque<std::int64_t>> queue_;
    std::vector<std::int64_t> tx_bundle_;
    std::vector<std::uint64_t> tx_token_;

    std::vector<Bundle> bundles_;
    std::vector<std::optional<Route>> routes_;
    long in_flight_ = 0;
    bool volume_released_ = false;

    std::priority_queue<Event, std::vector<Event>, EventLater> events_;
    std::uint64_t seq_ = 0;
    SimReport report_;
};

inline SimReport simulate(const ContactPlan& plan, const std::map<std::string, FailureTimeline>& timelines,
                          const SimParams& params) {
    return Simulator(plan, timelines, params).run();
}

// ---------------------------------------------------------------------------
// Scenario level

// Contact plan and per-site weather resolved once, reused across runs.
struct PreparedScenario {
    ScenarioConfig config;
    ContactPlan plan;
    std::map<std::string, std::vector<weather::WeatherRecord>> records;
    std::map<std::string, weather::FailureStats> stats;  // at config.cloud_threshold_pct
};

inline std::vector<weather::WeatherRecord> load_weather_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open weather file '" + path + "'");
    try {
        return weather::load_weather(in);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

// Recomputes per-site failure statistics at `threshold_pct`.
inline void set_threshold(PreparedScenario& ps, double threshold_pct) {
    if (!(threshold_pct >= 0 && threshold_pct <= 100)) throw ConfigError("cloud threshold must lie in [0,100]");
    ps.config.cloud_threshold_pct = threshold_pct;
    ps.stats.clear();
    const weather::StatsOptions opt{ps.config.fog_always_fails, weather::kHourS};
    for (const auto& site : ps.plan.weather_sites()) {
        const auto& src = ps.config.weather_sources.at(site);
        switch (src.kind) {
            case WeatherSource::Kind::AlwaysUp:
                ps.stats[site] = weather::make_stats(site, threshold_pct, ps.config.duration_s, 0.0);
                break;
            case WeatherSource::Kind::AlwaysDown:
                ps.stats[site] = weather::make_stats(site, threshold_pct, 0.0, ps.config.duration_s);
                break;
            default:
                ps.stats[site] = weather::compute_failure_stats(ps.records.at(site), threshold_pct, site, opt);
        }
    }
}

inline PreparedScenario prepare(const ScenarioConfig& cfg) {
    cfg.validate();
    PreparedScenario ps{cfg, contactplan::build_plan(cfg, cfg.duration_s), {}, {}};
    for (const auto& site : ps.plan.weather_sites()) {
        auto it = cfg.weather_sources.find(site);
        if (it == cfg.weather_sources.end()) throw ConfigError("no weather source for site '" + site + "'");
        const auto& src = it->second;
        if (src.kind == WeatherSource::Kind::Csv) ps.records[site] = load_weather_file(src.path);
        else if (src.kind == WeatherSource::Kind::Synthetic) ps.records[site] = weather::generate_synthetic(src.synthetic);
    }
    set_threshold(ps, cfg.cloud_threshold_pct);
    return ps;
}

inline std::uint64_t site_key(const std::string& site) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char ch : site) h = (h ^ ch) * 1099511628211ULL;
    return h;
}

// Independent per-site timelines for one run.
inline std::map<std::string, FailureTimeline> sample_timelines(const PreparedScenario& ps, std::uint64_t run_seed) {
    std::map<std::string, FailureTimeline> out;
    for (const auto& [site, stats] : ps.stats) {
        rng::Engine eng(rng::combine(run_seed, site_key(site)));
        out.emplace(site, weather::sample_timeline(stats, ps.config.duration_s, eng));
    }
    return out;
}

inline SimParams make_params(const PreparedScenario& ps) {
    const auto leos = ps.plan.nodes_of_kind(NodeKind::LEO);
    if (leos.empty()) throw ConfigError("scenario has no LEO node");
    SimParams p;
    p.duration_s = ps.config.duration_s;
    p.n_bundles = ps.config.n_bundles;
    p.bundle_size_bits = ps.config.bundle_size_bits;
    p.source = leos.front();
    p.destination = ps.plan.moc();
    p.terminals.assign(ps.plan.nodes.size(), 0);
    for (NodeId l : leos) p.terminals[l] = ps.config.leo_terminals;
    p.unlimited_contact_volume = ps.config.unlimited_contact_volume;
    return p;
}

inline SimReport run(const PreparedScenario& ps, std::uint64_t run_seed, std::vector<TraceRecord>* trace = nullptr,
                     std::ostream* route_trace = nullptr) {
    const auto timelines = sample_timelines(ps, run_seed);
    SimParams params = make_params(ps);
    params.trace = trace;
    params.route_trace = route_trace;
    return simulate(ps.plan, timelines, params);
}

inline SimReport run(const ScenarioConfig& cfg, std::uint64_t run_seed) { return run(prepare(cfg), run_seed); }

}  // namespace hapsdtn::sim
