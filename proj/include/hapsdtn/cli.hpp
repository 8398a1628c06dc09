#pragma once

// Command-line front end: contacts, weather, simulate, report.
// Exit codes: 0 success, 2 usage/config error, 3 input-data error, 4 invariant violation.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hapsdtn/config.hpp"
#include "hapsdtn/errors.hpp"
#include "hapsdtn/montecarlo.hpp"
#include "hapsdtn/orbital.hpp"
#include "hapsdtn/scenario.hpp"
#include "hapsdtn/simengine.hpp"
#include "hapsdtn/text.hpp"
#include "hapsdtn/weather.hpp"

namespace hapsdtn::cli {

namespace fs = std::filesystem;
using text::format_double;

enum ExitCode : int { kOk = 0, kUsage = 2, kInput = 3, kInvariant = 4 };

struct Globals {
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    bool quiet = false;
};

inline void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
        if (ec) throw ConfigError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    body(os);
    if (!os) throw ConfigError("write to '" + path.string() + "' failed");
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    return weather::format_iso8601(static_cast<std::int64_t>(now));
}

// ---------------------------------------------------------------------------
// contacts

struct ContactsArgs {
    std::vector<std::string> presets;
    std::string station_name = "station";
    std::optional<double> lat, lon;
    double alt_km = 0;
    double days = 90;
    std::optional<double> horizon_s;
    orbital::OrbitSpec orbit = paper_orbit();
    double step_s = orbital::kDefaultCoarseStepS;
    double bin_s = 60;
    double rate_bps = 8e9;
};

inline orbital::StationSpec station_preset(const std::string& name) {
    if (name == "ottawa-ogs") return {name, kOttawaLat, kOttawaLon, 0.0};
    if (name == "ottawa-haps") return {name, kOttawaLat, kOttawaLon, kHapsAltitudeKm};
    if (name == "calgary-ogs") return {name, kCalgaryLat, kCalgaryLon, 0.0};
    if (name == "calgary-haps") return {name, kCalgaryLat, kCalgaryLon, kHapsAltitudeKm};
    throw ConfigError("unknown station preset '" + name +
                      "' (expected ottawa-ogs, ottawa-haps, calgary-ogs or calgary-haps)");
}

inline int cmd_contacts(const ContactsArgs& a, const Globals& g, std::ostream& out) {
    const double horizon = a.horizon_s ? *a.horizon_s : a.days * 86400.0;
    if (!(horizon > 0)) throw ConfigError("horizon must be positive (--days or --horizon-s)");
    if (!(a.bin_s > 0)) throw ConfigError("--bin-s must be positive");
    if (!(a.rate_bps > 0)) throw ConfigError("--rate-bps must be positive");
    a.orbit.validate();

    std::vector<orbital::StationSpec> stations;
    for (const auto& p : a.presets) stations.push_back(station_preset(p));
    if (a.lat.has_value() != a.lon.has_value()) throw ConfigError("--lat and --lon must be given together");
    if (a.lat) stations.push_back({a.station_name, *a.lat, *a.lon, a.alt_km});
    if (stations.empty()) throw ConfigError("give --preset or --lat/--lon");
    for (const auto& s : stations) s.validate();

    std::vector<orbital::ContactSummary> summaries;
    for (const auto& s : stations) {
        const auto contacts = orbital::compute_contacts(a.orbit, s, horizon, a.step_s, "LEO");
        const auto summary = orbital::summarize(contacts);
        summaries.push_back(summary);
        const fs::path dir(g.out);
        write_file(dir / ("contacts_" + s.name + ".csv"),
                   [&](std::ostream& os) { orbital::write_contacts_csv(os, contacts, a.rate_bps); });
        write_file(dir / ("histogram_" + s.name + ".csv"),
                   [&](std::ostream& os) { orbital::write_histogram_csv(os, orbital::contact_histogram(contacts, a.bin_s)); });
        if (!g.quiet)
            out << s.name << ": contacts=" << summary.count << " mean_duration_s=" << format_double(summary.mean_duration_s)
                << " total_duration_s=" << format_double(summary.total_duration_s) << '\n';
    }
    if (!g.quiet)
        for (std::size_t i = 1; i < stations.size(); ++i) {
            const auto& base = summaries.front();
            const auto& cur = summaries[i];
            const double count_ratio = base.count ? static_cast<double>(cur.count) / static_cast<double>(base.count) : 0.0;
            const double dur_ratio = base.mean_duration_s > 0 ? cur.mean_duration_s / base.mean_duration_s : 0.0;
            out << "ratio " << stations[i].name << '/' << stations.front().name << ": count=" << format_double(count_ratio)
                << " mean_duration=" << format_double(dur_ratio) << '\n';
        }
    return kOk;
}

// ---------------------------------------------------------------------------
// weather

struct WeatherArgs {
    std::string input;
    std::string synthetic;
    std::string synthetic_preset;
    std::string site;
    std::string thresholds = "0:100:10";
    bool check = false;
    bool ignore_fog = false;
    bool emit_records = false;
};

inline int cmd_weather(const WeatherArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
    const int sources = !a.input.empty() + !a.synthetic.empty() + !a.synthetic_preset.empty();
    if (sources != 1) throw ConfigError("give exactly one of --input, --synthetic or --synthetic-preset");
    const auto thresholds = config::parse_thresholds(a.thresholds);

    std::vector<weather::WeatherRecord> records;
    std::string site = a.site;
    if (!a.input.empty()) {
        records = sim::load_weather_file(a.input);
        if (site.empty()) site = fs::path(a.input).stem().string();
    } else {
        weather::SyntheticWeatherSpec spec;
        if (!a.synthetic_preset.empty()) {
            if (a.synthetic_preset != "ottawa" && a.synthetic_preset != "calgary")
                throw ConfigError("--synthetic-preset must be ottawa or calgary");
            spec = paper_synthetic_weather(a.synthetic_preset);
            if (site.empty()) site = a.synthetic_preset;
        } else {
            spec = weather::synthetic_from_kv(weather::parse_kv_list(a.synthetic));
            if (site.empty()) site = "synthetic";
        }
        records = weather::generate_synthetic(spec);
    }

    const weather::StatsOptions opt{!a.ignore_fog, weather::kHourS};
    const auto sweep = weather::threshold_sweep(records, thresholds, site, opt);
    const fs::path dir(g.out);
    write_file(dir / ("failure_stats_" + site + ".csv"), [&](std::ostream& os) { weather::write_stats_csv(os, sweep); });
    if (a.emit_records)
        write_file(dir / ("weather_" + site + ".csv"), [&](std::ostream& os) { weather::write_weather_csv(os, records); });
    if (!g.quiet) weather::write_stats_csv(out, sweep);

    if (a.check && !weather::sweep_is_monotone(sweep)) {
        for (std::size_t i = 1; i < sweep.size(); ++i) {
            const auto& p = sweep[i - 1];
            const auto& c = sweep[i];
            if (c.mean_ttf_s < p.mean_ttf_s)
                err << "check: TTF decreases between " << format_double(p.cloud_threshold_pct) << "% and "
                    << format_double(c.cloud_threshold_pct) << "%\n";
            if (c.mean_ttr_s > p.mean_ttr_s)
                err << "check: TTR increases between " << format_double(p.cloud_threshold_pct) << "% and "
                    << format_double(c.cloud_threshold_pct) << "%\n";
        }
        throw InputError("trend check failed for site '" + site + "'");
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string config_path;
    std::string preset;
    std::optional<int> runs;
    std::optional<std::string> thresholds;
    std::optional<long> bundles;
    std::optional<std::int64_t> bundle_size_bits;
    std::optional<double> duration_s;
    unsigned threads = sim::default_threads();
    bool trace = false;
    bool unlimited_volume = false;
    bool ignore_fog = false;
};

inline void write_comparison(std::ostream& os, const std::vector<sim::MonteCarloReport>& reports) {
    os << "threshold_pct";
    for (const auto& r : reports) os << ',' << to_string(r.topology) << "_mean," << to_string(r.topology) << "_ci95";
    os << '\n';
    std::set<double> ths;
    for (const auto& r : reports)
        for (const auto& p : r.points) ths.insert(p.threshold_pct);
    for (double th : ths) {
        os << format_double(th);
        for (const auto& r : reports) {
            const sim::ThresholdResult* hit = nullptr;
            for (const auto& p : r.points)
                if (p.threshold_pct == th) hit = &p;
            if (hit) os << ',' << format_double(hit->delivery.mean) << ',' << format_double(hit->delivery.ci95);
            else os << ",,";
        }
        os << '\n';
    }
}

inline int cmd_simulate(const SimulateArgs& a, const Globals& g, std::ostream& out) {
    if (a.config_path.empty() == a.preset.empty()) throw ConfigError("give exactly one of --config or --preset");

    std::vector<ScenarioConfig> configs;
    std::string source;
    if (!a.config_path.empty()) {
        configs.push_back(config::load_config(a.config_path));
        source = fs::absolute(a.config_path).lexically_normal().string();
    } else {
        configs = config::preset(a.preset);
        source = "preset:" + a.preset;
    }
    for (auto& cfg : configs) {
        if (g.seed) cfg.seed = *g.seed;
        if (a.runs) cfg.n_runs = *a.runs;
        if (a.thresholds) cfg.thresholds = config::parse_thresholds(*a.thresholds);
        if (a.bundles) cfg.n_bundles = *a.bundles;
        if (a.bundle_size_bits) cfg.bundle_size_bits = *a.bundle_size_bits;
        if (a.duration_s) cfg.duration_s = *a.duration_s;
        if (a.unlimited_volume) cfg.unlimited_contact_volume = true;
        if (a.ignore_fog) cfg.fog_always_fails = false;
        if (cfg.thresholds.empty()) throw ConfigError("no thresholds to sweep");
    }
    if (a.threads == 0) throw ConfigError("--threads must be positive");

    // every configuration is resolved before the first run starts
    std::vector<sim::PreparedScenario> prepared;
    for (const auto& cfg : configs) prepared.push_back(sim::prepare(cfg));

    std::vector<sim::MonteCarloReport> reports;
    const std::string stamp = utc_timestamp();
    for (auto& ps : prepared) {
        const ScenarioConfig cfg = ps.config;
        const auto rep = sim::monte_carlo(ps, cfg.thresholds, a.threads);
        const fs::path dir = fs::path(g.out) / to_string(cfg.topology);
        write_file(dir / "results.csv", [&](std::ostream& os) {
            sim::write_results_header(os);
            sim::write_results_rows(os, rep);
        });
        write_file(dir / "aggregate.csv", [&](std::ostream& os) {
            sim::write_aggregate_header(os);
            sim::write_aggregate_rows(os, rep);
        });
        config::RunManifest m{source, cfg, config::kToolVersion, cfg.seed, dir.string(), stamp};
        write_file(dir / "manifest.ini", [&](std::ostream& os) { config::write_manifest(os, m); });

        if (a.trace) {
            const double th = cfg.thresholds.front();
            sim::set_threshold(ps, th);
            std::vector<sim::TraceRecord> trace;
            std::ostringstream routes;
            routes << "time,bundle_id,custodian,route_hops,arrival\n";
            sim::run(ps, sim::run_seed(cfg.seed, th, 0), &trace, &routes);
            write_file(dir / "trace.jsonl", [&](std::ostream& os) { sim::write_trace_jsonl(os, trace); });
            write_file(dir / "routes.csv", [&](std::ostream& os) { os << routes.str(); });
            write_file(dir / "plan.csv", [&](std::ostream& os) { contactplan::write_plan_csv(os, ps.plan); });
        }
        reports.push_back(rep);
    }
    if (reports.size() > 1)
        write_file(fs::path(g.out) / "comparison.csv", [&](std::ostream& os) { write_comparison(os, reports); });
    if (!g.quiet) write_comparison(out, reports);
    return kOk;
}

// ---------------------------------------------------------------------------
// report

struct ResultRow {
    std::string topology;
    double threshold = 0;
    int run = 0;
    double delivery = 0;
    std::string node;
    double mean_occ = 0;
    double max_occ = 0;
};

inline std::vector<ResultRow> load_results(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t n = 0;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty results file");
    ++n;
    if (text::trim(line) != "topology,threshold_pct,run,delivery_ratio,node,mean_occ_pct,max_occ_pct")
        throw InputError(path.string() + ": unexpected results header", n);
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        ++n;
        if (text::trim(line).empty()) continue;
        const auto f = text::split(text::trim(line), ',');
        if (f.size() != 7) throw InputError(path.string() + ": expected 7 columns", n);
        const auto th = text::parse_double(f[1]);
        const auto run = text::parse_int<int>(f[2]);
        const auto dr = text::parse_double(f[3]);
        const auto mo = text::parse_double(f[5]);
        const auto xo = text::parse_double(f[6]);
        if (!th || !run || !dr || !mo || !xo) throw InputError(path.string() + ": malformed number", n);
        rows.push_back({std::string(f[0]), *th, *run, *dr, std::string(f[4]), *mo, *xo});
    }
    return rows;
}

// Joins every results set under `dirs` into one long-format table.
inline int cmd_report(const std::vector<std::string>& dirs, const Globals& g, std::ostream& out, std::ostream& err) {
    std::vector<std::string> offenders;
    std::vector<std::pair<fs::path, config::RunManifest>> sets;
    for (const auto& d : dirs) {
        if (!fs::is_directory(d)) {
            offenders.push_back(d + ": not a directory");
            continue;
        }
        std::vector<fs::path> found;
        for (const auto& e : fs::recursive_directory_iterator(d))
            if (e.is_regular_file() && (e.path().filename() == "manifest.ini" || e.path().filename() == "results.csv"))
                found.push_back(e.path());
        std::sort(found.begin(), found.end());
        std::set<fs::path> with_manifest, with_results;
        for (const auto& p : found)
            (p.filename() == "manifest.ini" ? with_manifest : with_results).insert(p.parent_path());
        for (const auto& r : with_results)
            if (!with_manifest.contains(r)) offenders.push_back(r.string() + ": results.csv without manifest.ini");
        for (const auto& m : with_manifest) {
            if (!with_results.contains(m)) {
                offenders.push_back(m.string() + ": manifest.ini without results.csv");
                continue;
            }
            try {
                sets.emplace_back(m, config::read_manifest(m / "manifest.ini"));
            } catch (const std::exception& e) {
                offenders.push_back(m.string() + ": " + e.what());
            }
        }
    }
    if (sets.empty() && offenders.empty()) throw InputError("no manifests found under the given directories");

    // (topology, threshold) -> per-run delivery; (topology, threshold, node) -> per-run occupancy
    using Key = std::pair<std::string, double>;
    std::map<Key, std::map<int, double>> delivery;
    std::map<Key, std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>> occupancy;
    std::map<Key, fs::path> owner;
    std::set<std::string> versions;

    for (const auto& [dir, m] : sets) {
        std::vector<ResultRow> rows;
        try {
            rows = load_results(dir / "results.csv");
        } catch (const InputError& e) {
            offenders.push_back(e.what());
            continue;
        }
        versions.insert(m.tool_version);
        const std::string topo = to_string(m.config.topology);
        const std::set<double> expected(m.config.thresholds.begin(), m.config.thresholds.end());
        std::set<double> seen_th;
        bool bad = false;
        for (const auto& r : rows) {
            if (r.topology != topo || !expected.contains(r.threshold) || r.run < 0 || r.run >= m.config.n_runs) {
                offenders.push_back(dir.string() + ": results row (" + r.topology + ", " + format_double(r.threshold) +
                                    ", run " + std::to_string(r.run) + ") does not match the manifest");
                bad = true;
                break;
            }
            seen_th.insert(r.threshold);
        }
        if (!bad && seen_th != expected) {
            offenders.push_back(dir.string() + ": results do not cover the manifest thresholds");
            bad = true;
        }
        if (bad) continue;
        for (const double th : expected) {
            const Key k{topo, th};
            if (auto it = owner.find(k); it != owner.end()) {
                offenders.push_back(dir.string() + ": duplicates " + topo + " at " + format_double(th) + "% from " +
                                    it->second.string());
                bad = true;
                break;
            }
        }
        if (bad) continue;
        for (const double th : expected) owner[{topo, th}] = dir;
        for (const auto& r : rows) {
            const Key k{topo, r.threshold};
            delivery[k][r.run] = r.delivery;
            auto& occ = occupancy[k][r.node];
            occ.first.push_back(r.mean_occ);
            occ.second.push_back(r.max_occ);
        }
        for (const auto& [k, runs] : delivery)
            if (k.first == topo && static_cast<int>(runs.size()) != m.config.n_runs) {
                offenders.push_back(dir.string() + ": expected " + std::to_string(m.config.n_runs) + " runs at " +
                                    format_double(k.second) + "%, found " + std::to_string(runs.size()));
                break;
            }
    }
    if (!offenders.empty()) {
        for (const auto& o : offenders) err << "offender: " << o << '\n';
        throw InputError(std::to_string(offenders.size()) + " missing or mismatched result set(s)");
    }

    const auto emit = [&](std::ostream& os) {
        if (versions.size() > 1) {
            os << "# warning: mixed tool versions:";
            for (const auto& v : versions) os << ' ' << v;
            os << '\n';
        }
        os << "topology,threshold_pct,metric,node,mean,ci95,n\n";
        const auto row = [&](const Key& k, const char* metric, const std::string& node, std::span<const double> v) {
            const auto agg = sim::aggregate(v);
            os << k.first << ',' << format_double(k.second) << ',' << metric << ',' << node << ','
               << format_double(agg.mean) << ',' << format_double(agg.ci95) << ',' << agg.n << '\n';
        };
        for (const auto& [k, runs] : delivery) {
            std::vector<double> v;
            for (const auto& [run, d] : runs) v.push_back(d);
            row(k, "delivery_ratio", "", v);
        }
        for (const auto& [k, nodes] : occupancy)
            for (const auto& [node, series] : nodes) row(k, "mean_occ_pct", node, series.first);
        for (const auto& [k, nodes] : occupancy)
            for (const auto& [node, series] : nodes) row(k, "max_occ_pct", node, series.second);
    };
    write_file(fs::path(g.out) / "tidy.csv", emit);
    if (versions.size() > 1) err << "warning: mixed tool versions in inputs\n";
    if (!g.quiet) out << "wrote " << (fs::path(g.out) / "tidy.csv").string() << " (" << sets.size() << " result sets)\n";
    return kOk;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"LEO -> HAPS -> OGS delay-tolerant backhaul simulator", "hapsdtn"};
    app.require_subcommand(1);
    Globals g;
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Scenario seed override");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress summaries on stdout");

    ContactsArgs ca;
    auto* contacts = app.add_subcommand("contacts", "LEO contact windows and duration histogram for one or more stations");
    contacts->fallthrough();
    contacts->add_option("--preset", ca.presets, "ottawa-ogs | ottawa-haps | calgary-ogs | calgary-haps (repeatable)");
    contacts->add_option("--name", ca.station_name, "Custom station name");
    contacts->add_option("--lat", ca.lat, "Custom station latitude [deg]");
    contacts->add_option("--lon", ca.lon, "Custom station longitude [deg]");
    contacts->add_option("--alt-km", ca.alt_km, "Custom station altitude [km]");
    contacts->add_option("--days", ca.days, "Horizon in days")->capture_default_str();
    contacts->add_option("--horizon-s", ca.horizon_s, "Horizon in seconds (overrides --days)");
    contacts->add_option("--altitude-km", ca.orbit.altitude_km, "Orbit altitude")->capture_default_str();
    contacts->add_option("--inclination-deg", ca.orbit.inclination_deg, "Orbit inclination")->capture_default_str();
    contacts->add_option("--raan-deg", ca.orbit.raan_deg, "Right ascension of the ascending node")->capture_default_str();
    contacts->add_option("--arg-latitude-deg", ca.orbit.arg_latitude_deg, "Argument of latitude at epoch");
    contacts->add_option("--step-s", ca.step_s, "Coarse visibility sampling step")->capture_default_str();
    contacts->add_option("--bin-s", ca.bin_s, "Histogram bin width")->capture_default_str();
    contacts->add_option("--rate-bps", ca.rate_bps, "Link rate written to the plan")->capture_default_str();

    WeatherArgs wa;
    auto* wx = app.add_subcommand("weather", "Failure statistics (TTF/TTR) over a cloud-threshold sweep");
    wx->fallthrough();
    wx->add_option("--input", wa.input, "Hourly weather CSV (timestamp,cloud_cover_pct,fog)");
    wx->add_option("--synthetic", wa.synthetic, "Synthetic generator spec, e.g. mode=periodic,up_hours=9,down_hours=3");
    wx->add_option("--synthetic-preset", wa.synthetic_preset, "ottawa | calgary");
    wx->add_option("--site", wa.site, "Site label for the output");
    wx->add_option("--thresholds", wa.thresholds, "Thresholds: start:stop:step or a,b,c")->capture_default_str();
    wx->add_flag("--check", wa.check, "Fail unless TTF is non-decreasing and TTR non-increasing");
    wx->add_flag("--ignore-fog", wa.ignore_fog, "Fog hours fail only through cloud cover");
    wx->add_flag("--emit-records", wa.emit_records, "Also write the hourly records used");

    SimulateArgs sa;
    int runs = 0;
    std::string thresholds;
    long bundles = 0;
    std::int64_t bundle_bits = 0;
    double duration = 0;
    auto* simc = app.add_subcommand("simulate", "Monte Carlo threshold sweep for a configured topology");
    simc->fallthrough();
    simc->add_option("--config", sa.config_path, "Scenario config file");
    simc->add_option("--preset", sa.preset, "paper-ogs1 | paper-ogs2 | paper-haps1 | paper-haps2 | paper-all");
    auto* runs_opt = simc->add_option("--runs", runs, "Runs per threshold");
    auto* th_opt = simc->add_option("--thresholds", thresholds, "Thresholds: start:stop:step or a,b,c");
    auto* b_opt = simc->add_option("--bundles", bundles, "Bundles generated at t=0");
    auto* bb_opt = simc->add_option("--bundle-size-bits", bundle_bits, "Bundle size");
    auto* d_opt = simc->add_option("--duration-s", duration, "Simulated horizon");
    simc->add_option("--threads", sa.threads, "Worker threads")->capture_default_str();
    simc->add_flag("--trace", sa.trace, "Write event trace, route trace and plan for run 0 of the first threshold");
    simc->add_flag("--unlimited-volume", sa.unlimited_volume, "Ignore contact volume when routing");
    simc->add_flag("--ignore-fog", sa.ignore_fog, "Fog hours fail only through cloud cover");

    std::vector<std::string> report_dirs;
    auto* rep = app.add_subcommand("report", "Join result sets into a tidy long-format table");
    rep->fallthrough();
    rep->add_option("dirs", report_dirs, "Result directories (searched recursively for manifest.ini)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kOk;
        }
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    if (*seed_opt) g.seed = seed;
    if (*runs_opt) sa.runs = runs;
    if (*th_opt) sa.thresholds = thresholds;
    if (*b_opt) sa.bundles = bundles;
    if (*bb_opt) sa.bundle_size_bits = bundle_bits;
    if (*d_opt) sa.duration_s = duration;

    try {
        if (contacts->parsed()) return cmd_contacts(ca, g, out);
        if (wx->parsed()) return cmd_weather(wa, g, out, err);
        if (simc->parsed()) return cmd_simulate(sa, g, out);
        if (rep->parsed()) return cmd_report(report_dirs, g, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    } catch (const InvariantError& e) {
        err << "invariant violation: " << e.what() << '\n';
        return kInvariant;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    }
    return kUsage;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"hapsdtn"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hapsdtn::cli
