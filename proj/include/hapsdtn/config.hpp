#pragma once

// Scenario configuration files: INI-style `key = value` with sections.
//
//   [scenario]      topology, durations, bundle load, thresholds, seed, runs, switches
//   [orbit]         circular orbit elements
//   [weather.SITE]  source = synthetic | csv | always-up | always-down (+ generator keys or path)
//   [node.ID]       custom topology nodes, in file order
//   [link_rate]     FROM->TO = bits per second
//
// configs/SCHEMA.md documents every key.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hapsdtn/errors.hpp"
#include "hapsdtn/scenario.hpp"
#include "hapsdtn/text.hpp"
#include "hapsdtn/weather.hpp"

namespace hapsdtn::config {

using boost::property_tree::ptree;

inline constexpr const char* kToolVersion = "1.0.0";

// "0:100:10" (inclusive range) or "0,25,50".
inline std::vector<double> parse_thresholds(std::string_view s) {
    std::vector<double> out;
    const auto parts = text::split(s, ':');
    if (parts.size() == 3) {
        const auto a = text::parse_double(parts[0]);
        const auto b = text::parse_double(parts[1]);
        const auto step = text::parse_double(parts[2]);
        if (!a || !b || !step || !(*step > 0) || *b < *a)
            throw ConfigError("bad threshold range '" + std::string(s) + "' (expected start:stop:step)");
        const long n = std::lround(std::floor((*b - *a) / *step + 1e-9));
        for (long k = 0; k <= n; ++k) out.push_back(*a + static_cast<double>(k) * *step);
    } else if (parts.size() == 1) {
        for (auto item : text::split(s, ',')) {
            const auto v = text::parse_double(item);
            if (!v) throw ConfigError("bad threshold '" + std::string(text::trim(item)) + "'");
            out.push_back(*v);
        }
    } else {
        throw ConfigError("bad threshold list '" + std::string(s) + "'");
    }
    for (double t : out)
        if (!(t >= 0 && t <= 100)) throw ConfigError("thresholds must lie in [0,100]");
    for (std::size_t i = 1; i < out.size(); ++i)
        if (!(out[i] > out[i - 1])) throw ConfigError("thresholds must be strictly ascending");
    return out;
}

inline std::string format_thresholds(const std::vector<double>& t) {
    std::string out;
    for (std::size_t i = 0; i < t.size(); ++i) out += (i ? "," : "") + text::format_double(t[i]);
    return out;
}

namespace detail {

struct Section {
    std::string name;
    const ptree& tree;

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError("[" + name + "] " + key + ": " + msg);
    }
    double number(const std::string& key, const std::string& v) const {
        const auto d = text::parse_double(v);
        if (!d) fail(key, "expected a number, got '" + v + "'");
        return *d;
    }
    template <typename Int>
    Int integer(const std::string& key, const std::string& v) const {
        const auto i = text::parse_int<Int>(v);
        if (!i) fail(key, "expected an integer, got '" + v + "'");
        return *i;
    }
    bool boolean(const std::string& key, const std::string& v) const {
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail(key, "expected true or false, got '" + v + "'");
    }
};

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal().string();
}

inline void read_scenario(const Section& s, ScenarioConfig& cfg, const std::filesystem::path& base) {
    for (const auto& [key, node] : s.tree) {
        const std::string v(text::trim(node.data()));
        if (key == "topology") cfg.topology = parse_topology(v);
        else if (key == "duration_s") cfg.duration_s = s.number(key, v);
        else if (key == "n_bundles") cfg.n_bundles = s.integer<long>(key, v);
        else if (key == "bundle_size_bits") cfg.bundle_size_bits = s.integer<std::int64_t>(key, v);
        else if (key == "rate_bps") cfg.rate_bps = s.number(key, v);
        else if (key == "cloud_threshold_pct") cfg.cloud_threshold_pct = s.number(key, v);
        else if (key == "thresholds") cfg.thresholds = parse_thresholds(v);
        else if (key == "seed") cfg.seed = s.integer<std::uint64_t>(key, v);
        else if (key == "n_runs") cfg.n_runs = s.integer<int>(key, v);
        else if (key == "haps_altitude_km") cfg.haps_altitude_km = s.number(key, v);
        else if (key == "coarse_step_s") cfg.coarse_step_s = s.number(key, v);
        else if (key == "plan_csv") cfg.plan_csv = resolve_path(v, base);
        else if (key == "fog_always_fails") cfg.fog_always_fails = s.boolean(key, v);
        else if (key == "unlimited_contact_volume") cfg.unlimited_contact_volume = s.boolean(key, v);
        else if (key == "leo_terminals") cfg.leo_terminals = s.integer<int>(key, v);
        else s.fail(key, "unknown key");
    }
}

inline void read_orbit(const Section& s, orbital::OrbitSpec& o) {
    for (const auto& [key, node] : s.tree) {
        const std::string v(text::trim(node.data()));
        if (key == "altitude_km") o.altitude_km = s.number(key, v);
        else if (key == "inclination_deg") o.inclination_deg = s.number(key, v);
        else if (key == "raan_deg") o.raan_deg = s.number(key, v);
        else if (key == "arg_latitude_deg") o.arg_latitude_deg = s.number(key, v);
        else if (key == "eccentricity") o.eccentricity = s.number(key, v);
        else s.fail(key, "unknown key");
    }
}

inline WeatherSource read_weather(const Section& s, const std::filesystem::path& base) {
    WeatherSource src;
    std::string kind = "synthetic";
    std::map<std::string, std::string> kv;
    std::optional<std::string> preset;
    for (const auto& [key, node] : s.tree) {
        const std::string v(text::trim(node.data()));
        if (key == "source") kind = v;
        else if (key == "path") src.path = resolve_path(v, base);
        else if (key == "preset") preset = v;
        else kv[key] = v;
    }
    if (kind == "csv") {
        src.kind = WeatherSource::Kind::Csv;
        if (src.path.empty()) s.fail("path", "csv weather source needs a path");
        if (!kv.empty() || preset) s.fail(kv.empty() ? "preset" : kv.begin()->first, "not valid for a csv source");
        return src;
    }
    if (kind == "always-up" || kind == "always-down") {
        src.kind = kind == "always-up" ? WeatherSource::Kind::AlwaysUp : WeatherSource::Kind::AlwaysDown;
        if (!kv.empty()) s.fail(kv.begin()->first, "not valid for a constant source");
        return src;
    }
    if (kind != "synthetic") s.fail("source", "expected synthetic, csv, always-up or always-down");
    src.kind = WeatherSource::Kind::Synthetic;
    if (preset) {
        if (*preset != "ottawa" && *preset != "calgary") s.fail("preset", "expected ottawa or calgary");
        auto merged = weather::to_kv(paper_synthetic_weather(*preset));
        for (const auto& [k, v] : kv) merged[k] = v;
        kv = std::move(merged);
    }
    try {
        src.synthetic = weather::synthetic_from_kv(kv);
    } catch (const ConfigError& e) {
        throw ConfigError("[" + s.name + "] " + e.what());
    }
    return src;
}

inline NodeSpec read_node(const Section& s, const std::string& id) {
    NodeSpec n;
    n.id = id;
    std::optional<double> lat, lon;
    double alt = 0;
    bool kind_set = false;
    for (const auto& [key, node] : s.tree) {
        const std::string v(text::trim(node.data()));
        if (key == "kind") {
            n.kind = parse_node_kind(v);
            kind_set = true;
        } else if (key == "lat_deg") lat = s.number(key, v);
        else if (key == "lon_deg") lon = s.number(key, v);
        else if (key == "alt_km") alt = s.number(key, v);
        else if (key == "weather_site") n.weather_site = v;
        else if (key == "paired_ogs") n.paired_ogs = v;
        else s.fail(key, "unknown key");
    }
    if (!kind_set) s.fail("kind", "missing");
    if (lat.has_value() != lon.has_value()) s.fail("lat_deg", "lat_deg and lon_deg must be given together");
    if (lat) {
        n.station = orbital::StationSpec{id, *lat, *lon, alt};
        n.station->validate();
    }
    if ((n.kind == NodeKind::HAPS || n.kind == NodeKind::OGS) && !n.station)
        s.fail("lat_deg", "HAPS and OGS nodes need a position");
    return n;
}

inline void read_link_rates(const Section& s, ScenarioConfig& cfg) {
    for (const auto& [key, node] : s.tree) {
        const auto arrow = key.find("->");
        if (arrow == std::string::npos) s.fail(key, "expected FROM->TO");
        const std::string from(text::trim(std::string_view(key).substr(0, arrow)));
        const std::string to(text::trim(std::string_view(key).substr(arrow + 2)));
        cfg.link_rates[{from, to}] = s.number(key, std::string(text::trim(node.data())));
    }
}

}  // namespace detail

// Relative paths inside the tree are resolved against `base_dir`.
inline ScenarioConfig from_ptree(const ptree& tree, const std::filesystem::path& base_dir = {}) {
    ScenarioConfig cfg;
    bool scenario_seen = false;
    for (const auto& [name, sec] : tree) {
        const detail::Section s{name, sec};
        if (!sec.data().empty() && sec.empty()) throw ConfigError("key '" + name + "' outside any section");
        if (name == "scenario") {
            detail::read_scenario(s, cfg, base_dir);
            scenario_seen = true;
        } else if (name == "orbit") {
            detail::read_orbit(s, cfg.orbit);
        } else if (name.rfind("weather.", 0) == 0) {
            cfg.weather_sources[name.substr(8)] = detail::read_weather(s, base_dir);
        } else if (name.rfind("node.", 0) == 0) {
            cfg.custom_nodes.push_back(detail::read_node(s, name.substr(5)));
        } else if (name == "link_rate") {
            detail::read_link_rates(s, cfg);
        } else if (name == "manifest") {
            // provenance only
        } else {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    if (!scenario_seen) throw ConfigError("config has no [scenario] section with keys");
    if (cfg.topology == Topology::Custom && cfg.custom_nodes.empty())
        throw ConfigError("custom topology needs [node.ID] sections");
    if (cfg.topology != Topology::Custom && !cfg.custom_nodes.empty())
        throw ConfigError("[node.ID] sections are only valid with topology = custom");
    cfg.validate();
    return cfg;
}

inline ScenarioConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
    }
    return from_ptree(tree, base_dir);
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    try {
        return parse_config(in, std::filesystem::absolute(path).parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline ptree to_ptree(const ScenarioConfig& cfg) {
    using text::format_double;
    ptree tree;
    const auto bool_str = [](bool b) { return b ? "true" : "false"; };

    ptree sc;
    sc.push_back({"topology", ptree(to_string(cfg.topology))});
    sc.push_back({"duration_s", ptree(format_double(cfg.duration_s))});
    sc.push_back({"n_bundles", ptree(std::to_string(cfg.n_bundles))});
    sc.push_back({"bundle_size_bits", ptree(std::to_string(cfg.bundle_size_bits))});
    sc.push_back({"rate_bps", ptree(format_double(cfg.rate_bps))});
    sc.push_back({"cloud_threshold_pct", ptree(format_double(cfg.cloud_threshold_pct))});
    sc.push_back({"thresholds", ptree(format_thresholds(cfg.thresholds))});
    sc.push_back({"seed", ptree(std::to_string(cfg.seed))});
    sc.push_back({"n_runs", ptree(std::to_string(cfg.n_runs))});
    sc.push_back({"haps_altitude_km", ptree(format_double(cfg.haps_altitude_km))});
    sc.push_back({"coarse_step_s", ptree(format_double(cfg.coarse_step_s))});
    if (!cfg.plan_csv.empty()) sc.push_back({"plan_csv", ptree(cfg.plan_csv)});
    sc.push_back({"fog_always_fails", ptree(bool_str(cfg.fog_always_fails))});
    sc.push_back({"unlimited_contact_volume", ptree(bool_str(cfg.unlimited_contact_volume))});
    sc.push_back({"leo_terminals", ptree(std::to_string(cfg.leo_terminals))});
    tree.push_back({"scenario", sc});

    ptree orb;
    orb.push_back({"altitude_km", ptree(format_double(cfg.orbit.altitude_km))});
    orb.push_back({"inclination_deg", ptree(format_double(cfg.orbit.inclination_deg))});
    orb.push_back({"raan_deg", ptree(format_double(cfg.orbit.raan_deg))});
    orb.push_back({"arg_latitude_deg", ptree(format_double(cfg.orbit.arg_latitude_deg))});
    orb.push_back({"eccentricity", ptree(format_double(cfg.orbit.eccentricity))});
    tree.push_back({"orbit", orb});

    for (const auto& [site, src] : cfg.weather_sources) {
        ptree w;
        switch (src.kind) {
            case WeatherSource::Kind::Csv:
                w.push_back({"source", ptree("csv")});
                w.push_back({"path", ptree(src.path)});
                break;
            case WeatherSource::Kind::AlwaysUp: w.push_back({"source", ptree("always-up")}); break;
            case WeatherSource::Kind::AlwaysDown: w.push_back({"source", ptree("always-down")}); break;
            case WeatherSource::Kind::Synthetic:
                w.push_back({"source", ptree("synthetic")});
                for (const auto& [k, v] : weather::to_kv(src.synthetic)) w.push_back({k, ptree(v)});
                break;
        }
        tree.push_back({"weather." + site, w});
    }

    for (const auto& n : cfg.custom_nodes) {
        ptree nd;
        nd.push_back({"kind", ptree(to_string(n.kind))});
        if (n.station) {
            nd.push_back({"lat_deg", ptree(format_double(n.station->latitude_deg))});
            nd.push_back({"lon_deg", ptree(format_double(n.station->longitude_deg))});
            nd.push_back({"alt_km", ptree(format_double(n.station->altitude_km))});
        }
        if (n.weather_site) nd.push_back({"weather_site", ptree(*n.weather_site)});
        if (n.paired_ogs) nd.push_back({"paired_ogs", ptree(*n.paired_ogs)});
        tree.push_back({"node." + n.id, nd});
    }

    if (!cfg.link_rates.empty()) {
        ptree lr;
        for (const auto& [pair, rate] : cfg.link_rates)
            lr.push_back({pair.first + "->" + pair.second, ptree(format_double(rate))});
        tree.push_back({"link_rate", lr});
    }
    return tree;
}

inline void write_config(std::ostream& os, const ScenarioConfig& cfg) {
    boost::property_tree::ini_parser::write_ini(os, to_ptree(cfg));
}

// Named presets: paper-ogs1 | paper-ogs2 | paper-haps1 | paper-haps2 | paper-all.
inline std::vector<ScenarioConfig> preset(std::string_view name) {
    if (name == "paper-all")
        return {paper_preset(Topology::OGS1), paper_preset(Topology::OGS2), paper_preset(Topology::HAPS1),
                paper_preset(Topology::HAPS2)};
    if (name == "paper-ogs1") return {paper_preset(Topology::OGS1)};
    if (name == "paper-ogs2") return {paper_preset(Topology::OGS2)};
    if (name == "paper-haps1") return {paper_preset(Topology::HAPS1)};
    if (name == "paper-haps2") return {paper_preset(Topology::HAPS2)};
    throw ConfigError("unknown preset '" + std::string(name) +
                      "' (expected paper-ogs1, paper-ogs2, paper-haps1, paper-haps2 or paper-all)");
}

// Provenance written next to every output set; its [scenario]/[orbit]/...
// sections form a loadable config that reproduces the outputs.
struct RunManifest {
    std::string config_path;  // empty for presets
    ScenarioConfig config;
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::string output_dir;
    std::string timestamp;  // ISO 8601 UTC
};

inline void write_manifest(std::ostream& os, const RunManifest& m) {
    ptree tree;
    ptree meta;
    meta.push_back({"tool_version", ptree(m.tool_version)});
    meta.push_back({"config_path", ptree(m.config_path)});
    meta.push_back({"seed", ptree(std::to_string(m.seed))});
    meta.push_back({"output_dir", ptree(m.output_dir)});
    meta.push_back({"timestamp", ptree(m.timestamp)});
    tree.push_back({"manifest", meta});
    for (auto& entry : to_ptree(m.config)) tree.push_back(entry);
    boost::property_tree::ini_parser::write_ini(os, tree);
}

inline RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest '" + path.string() + "'");
    ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InputError(path.string() + ": " + e.message(), e.line());
    }
    const auto meta = tree.get_child_optional("manifest");
    if (!meta) throw InputError(path.string() + ": no [manifest] section");
    RunManifest m;
    m.tool_version = meta->get<std::string>("tool_version", "");
    m.config_path = meta->get<std::string>("config_path", "");
    m.output_dir = meta->get<std::string>("output_dir", "");
    m.timestamp = meta->get<std::string>("timestamp", "");
    const auto seed = text::parse_int<std::uint64_t>(meta->get<std::string>("seed", ""));
    if (!seed) throw InputError(path.string() + ": manifest seed missing or malformed");
    m.seed = *seed;
    try {
        m.config = from_ptree(tree);
    } catch (const ConfigError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    return m;
}

}  // namespace hapsdtn::config
