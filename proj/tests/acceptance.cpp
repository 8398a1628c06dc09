// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hapsdtn/montecarlo.hpp"
#include "hapsdtn/orbital.hpp"
#include "hapsdtn/weather.hpp"
#include "route_oracle.hpp"

using namespace hapsdtn;
using contactplan::NodeId;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[2048];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1. HAPS vs OGS contact geometry over 90 days.
Outcome contact_geometry() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto orbit = paper_orbit();
    const double horizon = 90 * 86400.0;
    const auto ogs = orbital::summarize(
        orbital::compute_contacts(orbit, {"ogs", kOttawaLat, kOttawaLon, 0}, horizon));
    const auto haps = orbital::summarize(
        orbital::compute_contacts(orbit, {"haps", kOttawaLat, kOttawaLon, kHapsAltitudeKm}, horizon));
    const double elapsed = seconds_since(t0);
    const double count_ratio = static_cast<double>(haps.count) / static_cast<double>(ogs.count);
    const double dur_ratio = haps.mean_duration_s / ogs.mean_duration_s;
    const auto in = [](double r) { return r >= 1.15 && r <= 1.35; };
    return {in(count_ratio) && in(dur_ratio) && elapsed <= 120,
            fmt("OGS %zu contacts mean %.1f s, HAPS %zu contacts mean %.1f s; count x%.3f, duration x%.3f "
                "(need 1.15..1.35), %.1f s (limit 120)",
                ogs.count, ogs.mean_duration_s, haps.count, haps.mean_duration_s, count_ratio, dur_ratio, elapsed)};
}

// 2. Period from ascending-node crossings of the propagated orbit; radius drift over 90 days.
Outcome orbital_correctness() {
    const auto orbit = paper_orbit();
    const double a = orbital::kEarthRadiusKm + orbit.altitude_km;
    const double kepler = 2 * std::numbers::pi * std::sqrt(a * a * a / orbital::kMuKm3PerS2);
    const auto z = [&](double t) { return orbital::propagate_inertial(orbit, t).z; };

    std::vector<double> crossings;
    for (double t = 1; t < 3 * kepler; t += 10) {
        if (!(z(t) < 0 && z(t + 10) >= 0)) continue;
        double lo = t, hi = t + 10;
        for (int k = 0; k < 80; ++k) {
            const double mid = 0.5 * (lo + hi);
            (z(mid) < 0 ? lo : hi) = mid;
        }
        crossings.push_back(0.5 * (lo + hi));
    }
    const double measured = crossings.size() >= 2 ? crossings[1] - crossings[0] : 0;

    double drift = 0;
    for (double t = 0; t <= 90 * 86400.0; t += 60)
        drift = std::max(drift, std::abs(orbital::norm(orbital::propagate(orbit, t).position) - a));
    const bool pass = std::abs(measured - 5677) <= 1 && std::abs(measured - kepler) <= 1e-3 && drift <= 1e-6;
    return {pass, fmt("propagated period %.4f s, 2*pi*sqrt(a^3/mu) = %.4f s (need 5677 +/- 1); "
                      "max |r| - a over 90 d = %.2e km (limit 1e-6)",
                      measured, kepler, drift)};
}

// 3. 9-up/3-down pattern statistics and sampled UP fraction.
Outcome weather_oracle() {
    weather::SyntheticWeatherSpec spec;  // periodic 9/3, clear 0, cloudy 100
    spec.hours = 52560;
    const auto records = weather::generate_synthetic(spec);
    const auto st = weather::compute_failure_stats(records, 50, "p");

    double sum = 0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
        rng::Engine eng(rng::combine(0xACCE, static_cast<std::uint64_t>(s)));
        sum += weather::sample_timeline(st, 604800, eng).up_fraction();
    }
    const double up = sum / seeds;
    const bool pass = st.mean_ttf_s == 32400 && st.mean_ttr_s == 10800 && std::abs(up - 0.75) <= 0.02;
    return {pass, fmt("TTF %.6f s, TTR %.6f s at 50%% (need 32400 / 10800 exactly); "
                      "UP fraction over %d one-week timelines %.4f (need 0.75 +/- 0.02)",
                      st.mean_ttf_s, st.mean_ttr_s, seeds, up)};
}

// 4. TTF non-decreasing and TTR non-increasing over ascending sweeps, on many datasets.
Outcome trend_property() {
    const auto grid = [] {
        std::vector<double> t;
        for (int k = 0; k <= 100; k += 5) t.push_back(k);
        return t;
    }();
    rng::Engine eng(404);
    int datasets = 0, ttf_bad = 0, ttr_bad = 0, presets_bad = 0;
    const auto check = [&](const std::vector<weather::WeatherRecord>& recs, bool preset) {
        const auto sweep = weather::threshold_sweep(recs, grid, "d");
        bool f = false, r = false;
        for (std::size_t i = 1; i < sweep.size(); ++i) {
            f |= sweep[i].mean_ttf_s < sweep[i - 1].mean_ttf_s;
            r |= sweep[i].mean_ttr_s > sweep[i - 1].mean_ttr_s;
        }
        ++datasets;
        ttf_bad += f;
        ttr_bad += r;
        presets_bad += preset && (f || r);
    };

    check(weather::generate_synthetic(paper_synthetic_weather("ottawa")), true);
    check(weather::generate_synthetic(paper_synthetic_weather("calgary")), true);
    for (int k = 0; k < 300; ++k) {
        weather::SyntheticWeatherSpec s;
        s.hours = 2000;
        s.seed = eng();
        switch (k % 3) {
            case 0:  // independent hours
                s.mode = weather::SyntheticWeatherSpec::Mode::Ar1;
                s.rho = 0;
                s.mean_cloud_pct = rng::uniform(eng, 20, 80);
                s.spread_pct = rng::uniform(eng, 10, 60);
                break;
            case 1:  // persistent weather
                s.mode = weather::SyntheticWeatherSpec::Mode::Ar1;
                s.rho = rng::uniform(eng, 0.5, 0.99);
                s.mean_cloud_pct = rng::uniform(eng, 20, 80);
                s.spread_pct = rng::uniform(eng, 10, 60);
                s.fog_prob = rng::uniform(eng, 0, 0.02);
                break;
            default:  // noisy periodic
                s.up_hours = 1 + static_cast<long>(eng() % 12);
                s.down_hours = 1 + static_cast<long>(eng() % 12);
                s.clear_pct = rng::uniform(eng, 0, 40);
                s.cloudy_pct = rng::uniform(eng, 60, 100);
                s.noise_pct = rng::uniform(eng, 0, 30);
        }
        check(weather::generate_synthetic(s), false);
    }
    // smallest witness: hourly cloud 0,0,90,40,90 repeated
    std::vector<weather::WeatherRecord> witness;
    for (int h = 0; h < 100; ++h) witness.push_back({3600LL * h, std::vector<double>{0, 0, 90, 40, 90}[h % 5], false});
    const auto at30 = weather::compute_failure_stats(witness, 30, "w");
    const auto at50 = weather::compute_failure_stats(witness, 50, "w");

    const bool pass = ttf_bad == 0 && ttr_bad == 0;
    return {pass, fmt("%d datasets on a 5%% grid: %d with a TTF decrease, %d with a TTR increase, %d of 2 site "
                      "presets violating; hourly cloud 0,0,90,40,90 repeated gives TTF %.0f s at 30%% and %.0f s at "
                      "50%% because the clearer middle hour splits each DOWN run into two and adds a 1 h UP run",
                      datasets, ttf_bad, ttr_bad, presets_bad, at30.mean_ttf_s, at50.mean_ttf_s)};
}

struct Sweep {
    std::vector<double> thresholds;
    std::vector<sim::MonteCarloReport> reports;  // OGS1, OGS2, HAPS1, HAPS2
    double seconds = 0;
};

// Desk-scale sweep shared by criteria 5 and 6: 200 bundles of 5x the size keep the
// offered volume of 1000 reference bundles.
const Sweep& desk_sweep() {
    static const Sweep sweep = [] {
        Sweep s;
        const auto t0 = std::chrono::steady_clock::now();
        for (int k = 0; k <= 100; k += 10) s.thresholds.push_back(k);
        for (auto t : {Topology::OGS1, Topology::OGS2, Topology::HAPS1, Topology::HAPS2}) {
            auto cfg = paper_preset(t);
            cfg.n_bundles = 200;
            cfg.bundle_size_bits = 5 * 160'000'000'000LL;
            cfg.n_runs = 50;
            cfg.seed = 2024;
            s.reports.push_back(sim::monte_carlo(cfg, s.thresholds));
        }
        s.seconds = seconds_since(t0);
        return s;
    }();
    return sweep;
}

bool overlap_or_ordered(const sim::Aggregate& earlier, const sim::Aggregate& later, bool increasing) {
    if (increasing ? later.mean >= earlier.mean : later.mean <= earlier.mean) return true;
    return later.lo() <= earlier.hi() && earlier.lo() <= later.hi();
}

// 5. Delivery ratio ordering and monotonicity.
Outcome delivery_trends() {
    const auto& s = desk_sweep();
    std::ostringstream detail;
    bool pass = s.seconds <= 900;
    for (const auto& [haps, ogs] : {std::pair{2, 0}, std::pair{3, 1}}) {
        const auto& h = s.reports[haps];
        const auto& o = s.reports[ogs];
        for (std::size_t i = 0; i < s.thresholds.size(); ++i) {
            if (s.thresholds[i] > 50) continue;
            const auto& hd = h.points[i].delivery;
            const auto& od = o.points[i].delivery;
            if (!(hd.mean > od.mean && hd.lo() > od.hi())) {
                pass = false;
                detail << to_string(h.topology) << " vs " << to_string(o.topology) << " not separated at "
                       << s.thresholds[i] << "%; ";
            }
        }
    }
    for (const auto& rep : s.reports)
        for (std::size_t i = 0; i < rep.points.size(); ++i)
            for (std::size_t j = i + 1; j < rep.points.size(); ++j)
                if (!overlap_or_ordered(rep.points[i].delivery, rep.points[j].delivery, true)) {
                    pass = false;
                    detail << to_string(rep.topology) << " drops from " << s.thresholds[i] << "% to " << s.thresholds[j]
                           << "%; ";
                }
    detail << "mean delivery at 0/50/100%:";
    for (const auto& rep : s.reports)
        detail << ' ' << to_string(rep.topology) << ' ' << fmt("%.3f/%.3f/%.3f", rep.points[0].delivery.mean,
                                                               rep.points[5].delivery.mean, rep.points[10].delivery.mean);
    detail << fmt("; HAPS1-OGS1 gap at 0%% %.3f, at 100%% %.3f; 4 x 11 x 50 runs in %.1f s (limit 900)",
                  s.reports[2].points[0].delivery.mean - s.reports[0].points[0].delivery.mean,
                  s.reports[2].points[10].delivery.mean - s.reports[0].points[10].delivery.mean, s.seconds);
    return {pass, detail.str()};
}

// 6. HAPS buffer occupancy: two sites hold less than one, and less as the threshold rises.
Outcome occupancy_trends() {
    const auto& s = desk_sweep();
    const auto& one = s.reports[2];
    const auto& two = s.reports[3];
    const auto h1 = one.nodes_of_kind(NodeKind::HAPS).front();
    std::ostringstream detail;
    bool pass = true;
    for (std::size_t i = 0; i < s.thresholds.size(); ++i)
        for (auto h : two.nodes_of_kind(NodeKind::HAPS)) {
            const bool ok = two.points[i].mean_occ[h].mean <= one.points[i].mean_occ[h1].mean &&
                            two.points[i].max_occ[h].mean <= one.points[i].max_occ[h1].mean;
            if (!ok) {
                pass = false;
                detail << two.node_names[h] << " above HAPS1 at " << s.thresholds[i] << "%; ";
            }
        }
    for (const auto* rep : {&one, &two})
        for (auto h : rep->nodes_of_kind(NodeKind::HAPS))
            for (std::size_t i = 0; i < s.thresholds.size(); ++i)
                for (std::size_t j = i + 1; j < s.thresholds.size(); ++j) {
                    const bool ok = overlap_or_ordered(rep->points[i].mean_occ[h], rep->points[j].mean_occ[h], false) &&
                                    overlap_or_ordered(rep->points[i].max_occ[h], rep->points[j].max_occ[h], false);
                    if (!ok) {
                        pass = false;
                        detail << to_string(rep->topology) << ' ' << rep->node_names[h] << " rises from "
                               << s.thresholds[i] << "% to " << s.thresholds[j] << "%; ";
                    }
                }
    detail << "HAPS mean/max occupancy % at 0/50/100:";
    const auto show = [&](const sim::MonteCarloReport& rep, std::size_t h) {
        detail << ' ' << to_string(rep.topology) << ':' << rep.node_names[h] << ' '
               << fmt("%.1f/%.1f/%.1f max %.1f/%.1f/%.1f", rep.points[0].mean_occ[h].mean, rep.points[5].mean_occ[h].mean,
                      rep.points[10].mean_occ[h].mean, rep.points[0].max_occ[h].mean, rep.points[5].max_occ[h].mean,
                      rep.points[10].max_occ[h].mean);
    };
    show(one, h1);
    for (auto h : two.nodes_of_kind(NodeKind::HAPS)) show(two, h);
    return {pass, detail.str()};
}

// 7. CGR against exhaustive enumeration.
Outcome cgr_oracle() {
    rng::Engine eng(777);
    const int trials = 5000;
    int mismatches = 0, found = 0, nondeterministic = 0, infeasible = 0;
    for (int trial = 0; trial < trials; ++trial) {
        const auto p = test::random_plan(eng);
        routing::ResidualVolumes res(p);
        test::exhaust_some(p, res, eng);
        const auto b = test::bundle_at(0, p.nodes.size() - 1);
        const double now = static_cast<double>(eng() % 80);
        const auto r = routing::compute_route(p, res, b, now);
        const auto again = routing::compute_route(p, routing::ContactIndex(p), res, b, now);
        if (r != again) ++nondeterministic;
        const auto oracle = test::brute_force(p, res, b, now);
        if (r.has_value() != oracle.found) {
            ++mismatches;
            continue;
        }
        if (!r) continue;
        ++found;
        const auto& first = p.contacts[r->hops.front()];
        if (r->earliest_arrival_s != oracle.arrival || r->hops.size() != oracle.hops ||
            first.start_s != oracle.first_start || r->hops.front() != oracle.first)
            ++mismatches;
        double t = now;
        NodeId at = b.custodian;
        for (auto c : r->hops) {
            const auto& ct = p.contacts[c];
            t = std::max(t, ct.start_s) + static_cast<double>(b.size_bits) / ct.rate_bps;
            if (ct.from != at || t > ct.end_s) ++infeasible;
            at = ct.to;
        }
        if (at != b.destination || t != r->earliest_arrival_s) ++infeasible;
    }
    return {mismatches == 0 && nondeterministic == 0 && infeasible == 0,
            fmt("%d random plans (<= 12 contacts, %d routable): %d disagreements with exhaustive search on "
                "(arrival, hops, first start, first index), %d nondeterministic, %d infeasible routes",
                trials, found, mismatches, nondeterministic, infeasible)};
}

// 8. Conservation at every event, bit-identical reruns, full-delivery sanity case.
Outcome conservation_determinism() {
    int runs = 0, violations = 0, differing = 0;
    for (auto t : {Topology::OGS1, Topology::OGS2, Topology::HAPS1, Topology::HAPS2}) {
        auto cfg = paper_preset(t);
        cfg.n_bundles = 300;
        auto ps = sim::prepare(cfg);
        for (double th : {0.0, 30.0, 60.0, 100.0}) {
            sim::set_threshold(ps, th);
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                ++runs;
                try {
                    const auto a = sim::run(ps, sim::run_seed(9, th, static_cast<int>(seed)));
                    const auto b = sim::run(ps, sim::run_seed(9, th, static_cast<int>(seed)));
                    if (!(a == b)) ++differing;
                } catch (const InvariantError&) {
                    ++violations;
                }
            }
        }
    }

    auto cfg = paper_preset(Topology::HAPS1);
    cfg.weather_sources["ottawa"].synthetic.fog_prob = 0;
    cfg.cloud_threshold_pct = 100;
    auto ps = sim::prepare(cfg);
    const NodeId leo = ps.plan.node("LEO"), haps = ps.plan.node("HAPS_Ottawa");
    long capacity = 0;
    for (const auto& c : ps.plan.contacts)
        if (c.from == leo && c.to == haps)
            capacity += static_cast<long>(std::floor(c.volume_bits() / static_cast<double>(cfg.bundle_size_bits)));
    ps.config.n_bundles = std::min(1000L, capacity / 2);
    const auto full = sim::run(ps, 1);

    return {violations == 0 && differing == 0 && full.delivery_ratio == 1.0,
            fmt("%d runs checked at every event: %d conservation violations, %d non-identical reruns; "
                "fog-free HAPS1 at 100%% with %ld bundles (half of %ld LEO->HAPS slots) delivers %.6f (need 1.0)",
                runs, violations, differing, ps.config.n_bundles, capacity, full.delivery_ratio)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"contact geometry", contact_geometry},
        {"orbital correctness", orbital_correctness},
        {"weather statistics oracle", weather_oracle},
        {"TTF/TTR trend property", trend_property},
        {"delivery ratio trends", delivery_trends},
        {"buffer occupancy trends", occupancy_trends},
        {"CGR oracle equivalence", cgr_oracle},
        {"conservation and determinism", conservation_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << o.detail << std::endl;
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
