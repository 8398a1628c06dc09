#pragma once

// Contact graph routing: earliest-arrival route search over the nominal
// contact plan with per-contact residual volume bookkeeping. The router never
// sees weather; failures surface only when the simulator executes a hop.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "hapsdtn/contactplan.hpp"
#include "hapsdtn/errors.hpp"
#include "hapsdtn/text.hpp"

namespace hapsdtn::routing {

using contactplan::ContactPlan;
using contactplan::NodeId;
using ContactId = std::size_t;

struct Bundle {
    std::int64_t id = 0;
    std::int64_t size_bits = 0;
    NodeId source = 0;
    NodeId destination = 0;
    double created_s = 0;
    NodeId custodian = 0;
};

struct Route {
    std::vector<ContactId> hops;
    double earliest_arrival_s = 0;
    std::int64_t bottleneck_residual_bits = 0;

    friend bool operator==(const Route&, const Route&) = default;
};

inline std::int64_t contact_capacity_bits(const contactplan::Contact& c) {
    return static_cast<std::int64_t>(std::floor(c.volume_bits()));
}

// Remaining volume per contact plus the hop list each bundle has booked.
class ResidualVolumes {
public:
    ResidualVolumes() = default;

    explicit ResidualVolumes(const ContactPlan& plan, bool unlimited = false) : unlimited_(unlimited) {
        capacity_.reserve(plan.contacts.size());
        for (const auto& c : plan.contacts) capacity_.push_back(contact_capacity_bits(c));
        remaining_ = capacity_;
    }

    std::size_t size() const { return remaining_.size(); }
    bool unlimited() const { return unlimited_; }
    std::int64_t capacity(ContactId c) const { return capacity_.at(c); }
    std::int64_t remaining(ContactId c) const { return remaining_.at(c); }
    bool fits(ContactId c, std::int64_t bits) const { return unlimited_ || remaining_.at(c) >= bits; }

    const std::vector<ContactId>* booked(std::int64_t bundle_id) const {
        auto it = booked_.find(bundle_id);
        return it == booked_.end() ? nullptr : &it->second;
    }

    void commit(const Route& route, const Bundle& bundle) {
        if (booked_.contains(bundle.id))
            throw InvariantError("bundle " + std::to_string(bundle.id) + " already holds a booked route");
        for (ContactId c : route.hops)
            if (!fits(c, bundle.size_bits))
                throw InvariantError("insufficient residual volume on contact " + std::to_string(c));
        if (!unlimited_)
            for (ContactId c : route.hops) remaining_[c] -= bundle.size_bits;
        booked_.emplace(bundle.id, route.hops);
    }

    // Restores the volume of every still-booked hop; `route` must match the booking.
    void release(const Route& route, const Bundle& bundle) {
        auto it = booked_.find(bundle.id);
        if (it == booked_.end())
            throw InvariantError("bundle " + std::to_string(bundle.id) + " has no booked route to release");
        if (it->second != route.hops)
            throw InvariantError("release of bundle " + std::to_string(bundle.id) + " does not match its booking");
        if (!unlimited_)
            for (ContactId c : route.hops) remaining_[c] += bundle.size_bits;
        booked_.erase(it);
    }

    // The first booked hop was executed: its volume stays consumed and it
    // leaves the booking, so later releases cover only the remaining hops.
    void settle_first_hop(const Bundle& bundle, ContactId hop) {
        auto it = booked_.find(bundle.id);
        if (it == booked_.end() || it->second.empty() || it->second.front() != hop)
            throw InvariantError("bundle " + std::to_string(bundle.id) + " did not book contact " +
                                 std::to_string(hop) + " as its next hop");
        it->second.erase(it->second.begin());
        if (it->second.empty()) booked_.erase(it);
    }

private:
    std::vector<std::int64_t> capacity_;
    std::vector<std::int64_t> remaining_;
    std::unordered_map<std::int64_t, std::vector<ContactId>> booked_;
    bool unlimited_ = false;
};

inline void commit_route(ResidualVolumes& residuals, const Route& route, const Bundle& bundle) {
    residuals.commit(route, bundle);
}

inline void release_route(ResidualVolumes& residuals, const Route& route, const Bundle& bundle) {
    residuals.release(route, bundle);
}

inline double transmission_time(const contactplan::Contact& c, std::int64_t bits) {
    return static_cast<double>(bits) / c.rate_bps;
}

// Earliest time `bits` can finish crossing `c` when offered at `t`, or nullopt.
inline std::optional<double> hop_arrival(const contactplan::Contact& c, double t, std::int64_t bits) {
    const double begin = std::max(t, c.start_s);
    if (!(c.end_s > begin)) return std::nullopt;
    const double arrival = begin + transmission_time(c, bits);
    if (arrival > c.end_s) return std::nullopt;
    return arrival;
}

// Outgoing contacts per node, in contact-index order.
class ContactIndex {
public:
    explicit ContactIndex(const ContactPlan& plan) : outgoing_(plan.nodes.size()) {
        for (ContactId c = 0; c < plan.contacts.size(); ++c) outgoing_[plan.contacts[c].from].push_back(c);
    }
    const std::vector<ContactId>& outgoing(NodeId n) const { return outgoing_.at(n); }

private:
    std::vector<std::vector<ContactId>> outgoing_;
};

namespace detail {

struct Label {
    double arrival = 0;
    double first_start = 0;
    ContactId first = 0;
    ContactId contact = 0;
    std::size_t parent = 0;  // label index in the previous layer
    std::uint64_t visited = 0;

    // Tie-break key on the first contact.
    bool key_le(const Label& o) const {
        return first_start < o.first_start || (first_start == o.first_start && first <= o.first);
    }
    bool key_lt(const Label& o) const {
        return first_start < o.first_start || (first_start == o.first_start && first < o.first);
    }
    bool dominates(const Label& o) const { return arrival <= o.arrival && key_le(o); }
};

// Labels of one hop count: an append-only pool plus, per contact, the indices
// of its non-dominated labels.
struct Layer {
    std::vector<Label> pool;
    std::unordered_map<ContactId, std::vector<std::size_t>> live;

    void offer(const Label& cand) {
        auto& set = live[cand.contact];
        for (std::size_t i : set)
            if (pool[i].dominates(cand)) return;
        std::erase_if(set, [&](std::size_t i) { return cand.dominates(pool[i]); });
        set.push_back(pool.size());
        pool.push_back(cand);
    }

    std::vector<ContactId> contacts() const {
        std::vector<ContactId> out;
        out.reserve(live.size());
        for (const auto& [c, set] : live)
            if (!set.empty()) out.push_back(c);
        std::sort(out.begin(), out.end());
        return out;
    }
};

}  // namespace detail

// Earliest-arrival route from bundle.custodian to bundle.destination.
//
// Contacts are relaxed layer by layer (layer h holds routes of h+1 hops), so
// arrival ties go to the fewest hops. Each contact keeps the labels that are
// Pareto-optimal in (arrival, first-contact start, first-contact index): a
// later arrival can still win a final tie when it waits for the same next
// contact, so a single best label per contact would not be exact. Remaining
// ties prefer the earlier first-contact start, then the lower first-contact
// index; among routes equal on all of these the first one found is kept.
inline std::optional<Route> compute_route(const ContactPlan& plan, const ContactIndex& index,
                                          const ResidualVolumes& residuals, const Bundle& bundle, double now_s) {
    const std::size_t n_nodes = plan.nodes.size();
    if (n_nodes > 64) throw ConfigError("routing supports at most 64 nodes");
    if (bundle.custodian >= n_nodes || bundle.destination >= n_nodes) throw ConfigError("bundle references unknown node");
    if (bundle.custodian == bundle.destination) return std::nullopt;

    std::vector<detail::Layer> layers(1);
    for (ContactId c : index.outgoing(bundle.custodian)) {
        const auto& ct = plan.contacts[c];
        if (!residuals.fits(c, bundle.size_bits)) continue;
        const auto arr = hop_arrival(ct, now_s, bundle.size_bits);
        if (!arr) continue;
        layers[0].offer({*arr, ct.start_s, c, c, 0, (1ULL << bundle.custodian) | (1ULL << ct.to)});
    }

    std::optional<std::pair<std::size_t, std::size_t>> best;  // (layer, label)
    const auto best_label = [&]() -> const detail::Label& { return layers[best->first].pool[best->second]; };
    const auto consider_destination = [&](std::size_t layer) {
        for (ContactId c : layers[layer].contacts()) {
            if (plan.contacts[c].to != bundle.destination) continue;
            for (std::size_t i : layers[layer].live.at(c)) {
                const auto& lab = layers[layer].pool[i];
                if (!best) {
                    best = {layer, i};
                    continue;
                }
                const auto& cur = best_label();
                // earlier layers win arrival ties (fewer hops)
                if (lab.arrival < cur.arrival || (lab.arrival == cur.arrival && layer == best->first && lab.key_lt(cur)))
                    best = {layer, i};
            }
        }
    };
    consider_destination(0);

    for (std::size_t layer = 1; layer < n_nodes; ++layer) {
        const auto& prev = layers[layer - 1];
        detail::Layer next;
        for (ContactId c : prev.contacts()) {
            const NodeId at = plan.contacts[c].to;
            if (at == bundle.destination) continue;
            for (std::size_t li : prev.live.at(c)) {
                const auto& lab = prev.pool[li];
                // a longer route cannot beat one already found at the same arrival
                if (best && lab.arrival >= best_label().arrival) continue;
                for (ContactId d : index.outgoing(at)) {
                    const auto& dt = plan.contacts[d];
                    if (lab.visited & (1ULL << dt.to)) continue;
                    if (!residuals.fits(d, bundle.size_bits)) continue;
                    const auto arr = hop_arrival(dt, lab.arrival, bundle.size_bits);
                    if (!arr) continue;
                    next.offer({*arr, lab.first_start, lab.first, d, li, lab.visited | (1ULL << dt.to)});
                }
            }
        }
        if (next.pool.empty()) break;
        layers.push_back(std::move(next));
        consider_destination(layer);
    }

    if (!best) return std::nullopt;

    Route route;
    route.earliest_arrival_s = best_label().arrival;
    route.hops.resize(best->first + 1);
    std::size_t li = best->second;
    for (std::size_t layer = best->first + 1; layer-- > 0;) {
        const auto& lab = layers[layer].pool[li];
        route.hops[layer] = lab.contact;
        li = lab.parent;
    }
    route.bottleneck_residual_bits = std::numeric_limits<std::int64_t>::max();
    for (ContactId h : route.hops)
        route.bottleneck_residual_bits = std::min(route.bottleneck_residual_bits, residuals.remaining(h));
    return route;
}

inline std::optional<Route> compute_route(const ContactPlan& plan, const ResidualVolumes& residuals,
                                          const Bundle& bundle, double now_s) {
    return compute_route(plan, ContactIndex(plan), residuals, bundle, now_s);
}

// Route-trace line: `time,bundle_id,custodian,route_hops,arrival`, hops as
// contact indices joined by ';' (empty route = no route found).
inline void write_route_trace(std::ostream& os, const ContactPlan& plan, double now, const Bundle& bundle,
                              const std::optional<Route>& route) {
    os << text::format_double(now) << ',' << bundle.id << ',' << plan.name(bundle.custodian) << ',';
    if (route) {
        for (std::size_t i = 0; i < route->hops.size(); ++i) os << (i ? ";" : "") << route->hops[i];
        os << ',' << text::format_double(route->earliest_arrival_s);
    } else {
        os << ",";
    }
    os << '\n';
}

}  // namespace hapsdtn::routing
