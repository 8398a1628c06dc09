#pragma once

// Threshold sweeps of independent seeded runs with mean / 95% CI aggregation.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hapsdtn/simengine.hpp"

namespace hapsdtn::sim {

struct Aggregate {
    double mean = 0;
    double ci95 = 0;  // 1.96 * s / sqrt(n), s = sample standard deviation
    std::size_t n = 0;

    double lo() const { return mean - ci95; }
    double hi() const { return mean + ci95; }
};

inline Aggregate aggregate(std::span<const double> values) {
    Aggregate a;
    a.n = values.size();
    if (a.n == 0) return a;
    double sum = 0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(a.n);
    if (a.n < 2) return a;
    double ss = 0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    const double s = std::sqrt(ss / static_cast<double>(a.n - 1));
    a.ci95 = 1.96 * s / std::sqrt(static_cast<double>(a.n));
    return a;
}

struct RunSummary {
    int run = 0;
    std::uint64_t seed = 0;
    double delivery_ratio = 0;
    std::vector<double> mean_occ_pct;  // per node
    std::vector<double> max_occ_pct;
};

struct ThresholdResult {
    double threshold_pct = 0;
    std::vector<RunSummary> runs;
    Aggregate delivery;
    std::vector<Aggregate> mean_occ;  // per node
    std::vector<Aggregate> max_occ;
};

struct MonteCarloReport {
    Topology topology = Topology::HAPS1;
    std::vector<std::string> node_names;
    std::vector<NodeKind> node_kinds;
    std::vector<ThresholdResult> points;

    std::vector<std::size_t> nodes_of_kind(NodeKind k) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < node_kinds.size(); ++i)
            if (node_kinds[i] == k) out.push_back(i);
        return out;
    }
};

inline std::uint64_t threshold_key(double threshold_pct) {
    return static_cast<std::uint64_t>(std::llround(threshold_pct * 1e6));
}

inline std::uint64_t run_seed(std::uint64_t scenario_seed, double threshold_pct, int run) {
    return rng::combine(rng::combine(scenario_seed, threshold_key(threshold_pct)), static_cast<std::uint64_t>(run));
}

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

inline ThresholdResult run_threshold(PreparedScenario& ps, double threshold_pct, unsigned threads) {
    set_threshold(ps, threshold_pct);
    const int n_runs = ps.config.n_runs;
    ThresholdResult res;
    res.threshold_pct = threshold_pct;
    res.runs.resize(static_cast<std::size_t>(n_runs));
    parallel_for(static_cast<std::size_t>(n_runs), threads, [&](std::size_t i) {
        const int r = static_cast<int>(i);
        const std::uint64_t seed = run_seed(ps.config.seed, threshold_pct, r);
        const SimReport rep = run(ps, seed);
        res.runs[i] = {r, seed, rep.delivery_ratio, rep.mean_occupancy_pct, rep.max_occupancy_pct};
    });

    std::vector<double> values;
    for (const auto& r : res.runs) values.push_back(r.delivery_ratio);
    res.delivery = aggregate(values);
    const std::size_t n_nodes = ps.plan.nodes.size();
    for (std::size_t n = 0; n < n_nodes; ++n) {
        values.clear();
        for (const auto& r : res.runs) values.push_back(r.mean_occ_pct[n]);
        res.mean_occ.push_back(aggregate(values));
        values.clear();
        for (const auto& r : res.runs) values.push_back(r.max_occ_pct[n]);
        res.max_occ.push_back(aggregate(values));
    }
    return res;
}

// A single run yields a zero-width interval.
inline MonteCarloReport monte_carlo(PreparedScenario& ps, std::span<const double> thresholds,
                                    unsigned threads = default_threads()) {
    if (ps.config.n_runs < 1) throw ConfigError("Monte Carlo needs n_runs >= 1");
    MonteCarloReport rep;
    rep.topology = ps.config.topology;
    for (const auto& n : ps.plan.nodes) {
        rep.node_names.push_back(n.id);
        rep.node_kinds.push_back(n.kind);
    }
    for (double th : thresholds) rep.points.push_back(run_threshold(ps, th, threads));
    return rep;
}

inline MonteCarloReport monte_carlo(const ScenarioConfig& cfg, std::span<const double> thresholds,
                                    unsigned threads = default_threads()) {
    PreparedScenario ps = prepare(cfg);
    return monte_carlo(ps, thresholds, threads);
}

inline void write_results_header(std::ostream& os) {
    os << "topology,threshold_pct,run,delivery_ratio,node,mean_occ_pct,max_occ_pct\n";
}

// One row per (threshold, run, node).
inline void write_results_rows(std::ostream& os, const MonteCarloReport& rep) {
    using text::format_double;
    for (const auto& p : rep.points)
        for (const auto& r : p.runs)
            for (std::size_t n = 0; n < rep.node_names.size(); ++n)
                os << to_string(rep.topology) << ',' << format_double(p.threshold_pct) << ',' << r.run << ','
                   << format_double(r.delivery_ratio) << ',' << rep.node_names[n] << ','
                   << format_double(r.mean_occ_pct[n]) << ',' << format_double(r.max_occ_pct[n]) << '\n';
}

inline void write_aggregate_header(std::ostream& os) { os << "topology,threshold_pct,metric,node,mean,ci95,n\n"; }

inline void write_aggregate_rows(std::ostream& os, const MonteCarloReport& rep) {
    using text::format_double;
    const auto row = [&](double th, const char* metric, const std::string& node, const Aggregate& a) {
        os << to_string(rep.topology) << ',' << format_double(th) << ',' << metric << ',' << node << ','
           << format_double(a.mean) << ',' << format_double(a.ci95) << ',' << a.n << '\n';
    };
    for (const auto& p : rep.points) {
        row(p.threshold_pct, "delivery_ratio", "", p.delivery);
        for (std::size_t n = 0; n < rep.node_names.size(); ++n) {
            row(p.threshold_pct, "mean_occ_pct", rep.node_names[n], p.mean_occ[n]);
            row(p.threshold_pct, "max_occ_pct", rep.node_names[n], p.max_occ[n]);
        }
    }
}

}  // namespace hapsdtn::sim
