#pragma once

// Scenario description shared by plan construction, the simulator and the CLI.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hapsdtn/errors.hpp"
#include "hapsdtn/orbital.hpp"
#include "hapsdtn/weather.hpp"

namespace hapsdtn {

enum class Topology { OGS1, OGS2, HAPS1, HAPS2, Custom };

inline std::string to_string(Topology t) {
    switch (t) {
        case Topology::OGS1: return "OGS1";
        case Topology::OGS2: return "OGS2";
        case Topology::HAPS1: return "HAPS1";
        case Topology::HAPS2: return "HAPS2";
        case Topology::Custom: return "custom";
    }
    return "?";
}

inline Topology parse_topology(std::string_view s) {
    if (s == "OGS1" || s == "ogs1") return Topology::OGS1;
    if (s == "OGS2" || s == "ogs2") return Topology::OGS2;
    if (s == "HAPS1" || s == "haps1") return Topology::HAPS1;
    if (s == "HAPS2" || s == "haps2") return Topology::HAPS2;
    if (s == "custom") return Topology::Custom;
    throw ConfigError("unknown topology '" + std::string(s) + "' (expected OGS1, OGS2, HAPS1, HAPS2 or custom)");
}

enum class NodeKind { LEO, HAPS, OGS, MOC };

inline std::string to_string(NodeKind k) {
    switch (k) {
        case NodeKind::LEO: return "LEO";
        case NodeKind::HAPS: return "HAPS";
        case NodeKind::OGS: return "OGS";
        case NodeKind::MOC: return "MOC";
    }
    return "?";
}

inline NodeKind parse_node_kind(std::string_view s) {
    if (s == "LEO") return NodeKind::LEO;
    if (s == "HAPS") return NodeKind::HAPS;
    if (s == "OGS") return NodeKind::OGS;
    if (s == "MOC") return NodeKind::MOC;
    throw ConfigError("unknown node kind '" + std::string(s) + "'");
}

struct NodeSpec {
    std::string id;
    NodeKind kind = NodeKind::OGS;
    std::optional<orbital::StationSpec> station;  // absent for LEO and MOC
    std::optional<std::string> weather_site;      // OGS only
    std::optional<std::string> paired_ogs;        // HAPS only; default is the co-located OGS

    friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct WeatherSource {
    enum class Kind { Csv, Synthetic, AlwaysUp, AlwaysDown };
    Kind kind = Kind::Synthetic;
    std::string path;
    weather::SyntheticWeatherSpec synthetic;

    friend bool operator==(const WeatherSource&, const WeatherSource&) = default;
};

// Reference station geometry.
inline constexpr double kOttawaLat = 45.4247;
inline constexpr double kOttawaLon = -75.6950;
inline constexpr double kCalgaryLat = 51.0500;
inline constexpr double kCalgaryLon = -114.0667;
inline constexpr double kHapsAltitudeKm = 20.0;

// RAAN places the ascending node over Ottawa's longitude at epoch.
inline constexpr double kPaperRaanDeg = kOttawaLon;

inline orbital::OrbitSpec paper_orbit() { return {500.0, 99.5, kPaperRaanDeg, 0.0, 0.0}; }

// Synthetic stand-ins for the two sites' six years of hourly records: persistent
// cloud with frequent overcast, Ottawa cloudier and foggier than Calgary.
inline weather::SyntheticWeatherSpec paper_synthetic_weather(const std::string& site) {
    weather::SyntheticWeatherSpec s;
    s.mode = weather::SyntheticWeatherSpec::Mode::Ar1;
    s.hours = 52560;
    s.rho = 0.97;
    if (site == "calgary") {
        s.mean_cloud_pct = 52;
        s.spread_pct = 45;
        s.fog_prob = 0.005;
        s.seed = 2022;
    } else {
        s.mean_cloud_pct = 60;
        s.spread_pct = 45;
        s.fog_prob = 0.01;
        s.seed = 2017;
    }
    return s;
}

inline std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int k = 0; k <= 100; k += 10) t.push_back(k);
    return t;
}

struct ScenarioConfig {
    Topology topology = Topology::HAPS1;
    double duration_s = 604800;
    long n_bundles = 1000;
    std::int64_t bundle_size_bits = 160'000'000'000;
    double rate_bps = 8e9;
    double cloud_threshold_pct = 50;
    std::vector<double> thresholds = default_thresholds();
    std::map<std::string, WeatherSource> weather_sources;
    std::uint64_t seed = 1;
    int n_runs = 50;

    orbital::OrbitSpec orbit = paper_orbit();
    double haps_altitude_km = kHapsAltitudeKm;
    double coarse_step_s = orbital::kDefaultCoarseStepS;
    std::vector<NodeSpec> custom_nodes;  // topology == Custom
    std::string plan_csv;                // custom: contacts from file instead of geometry
    std::map<std::pair<std::string, std::string>, double> link_rates;  // per-link override

    bool fog_always_fails = true;
    bool unlimited_contact_volume = false;
    int leo_terminals = 1;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

    void validate() const {
        if (!(duration_s > 0)) throw ConfigError("duration_s must be positive");
        if (n_bundles <= 0) throw ConfigError("n_bundles must be positive");
        if (bundle_size_bits <= 0) throw ConfigError("bundle_size_bits must be positive");
        if (!(rate_bps > 0)) throw ConfigError("rate_bps must be positive");
        if (!(cloud_threshold_pct >= 0 && cloud_threshold_pct <= 100))
            throw ConfigError("cloud_threshold_pct must lie in [0,100]");
        for (double t : thresholds)
            if (!(t >= 0 && t <= 100)) throw ConfigError("thresholds must lie in [0,100]");
        if (n_runs <= 0) throw ConfigError("n_runs must be positive");
        if (leo_terminals <= 0) throw ConfigError("leo_terminals must be positive");
        for (const auto& [pair, rate] : link_rates)
            if (!(rate > 0)) throw ConfigError("link rate " + pair.first + "->" + pair.second + " must be positive");
        orbit.validate();
    }
};

inline orbital::StationSpec make_station(std::string name, double lat, double lon, double alt) {
    return {std::move(name), lat, lon, alt};
}

// Node list for a topology. Presets use the reference sites and "ottawa"/"calgary"
// weather sites.
inline std::vector<NodeSpec> resolve_nodes(const ScenarioConfig& cfg) {
    if (cfg.topology == Topology::Custom) return cfg.custom_nodes;

    const auto ogs = [](const std::string& id, double lat, double lon, const std::string& site) {
        return NodeSpec{id, NodeKind::OGS, make_station(id, lat, lon, 0.0), site, std::nullopt};
    };
    const auto haps = [&](const std::string& id, double lat, double lon) {
        return NodeSpec{id, NodeKind::HAPS, make_station(id, lat, lon, cfg.haps_altitude_km), std::nullopt,
                        std::nullopt};
    };
    std::vector<NodeSpec> nodes{{"LEO", NodeKind::LEO, std::nullopt, std::nullopt, std::nullopt}};
    const bool two_sites = cfg.topology == Topology::OGS2 || cfg.topology == Topology::HAPS2;
    const bool with_haps = cfg.topology == Topology::HAPS1 || cfg.topology == Topology::HAPS2;
    if (with_haps) {
        nodes.push_back(haps("HAPS_Ottawa", kOttawaLat, kOttawaLon));
        if (two_sites) nodes.push_back(haps("HAPS_Calgary", kCalgaryLat, kCalgaryLon));
    }
    nodes.push_back(ogs("OGS_Ottawa", kOttawaLat, kOttawaLon, "ottawa"));
    if (two_sites) nodes.push_back(ogs("OGS_Calgary", kCalgaryLat, kCalgaryLon, "calgary"));
    nodes.push_back({"MOC", NodeKind::MOC, std::nullopt, std::nullopt, std::nullopt});
    return nodes;
}

// A paper preset: topology plus synthetic weather for its sites.
inline ScenarioConfig paper_preset(Topology t) {
    ScenarioConfig cfg;
    cfg.topology = t;
    cfg.weather_sources["ottawa"] = {WeatherSource::Kind::Synthetic, {}, paper_synthetic_weather("ottawa")};
    if (t == Topology::OGS2 || t == Topology::HAPS2)
        cfg.weather_sources["calgary"] = {WeatherSource::Kind::Synthetic, {}, paper_synthetic_weather("calgary")};
    return cfg;
}

}  // namespace hapsdtn
