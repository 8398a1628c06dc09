#pragma once

// Circular two-body LEO propagation over a rotating spherical Earth, and
// line-of-sight contact windows against fixed ground or stratospheric stations.
//
// Frames: at t = 0 the Earth-fixed and inertial frames coincide (Greenwich on
// the +x axis). The satellite starts at arg_latitude_deg on its orbit.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hapsdtn/errors.hpp"
#include "hapsdtn/text.hpp"

namespace hapsdtn::orbital {

inline constexpr double kEarthRadiusKm = 6378.137;
inline constexpr double kMuKm3PerS2 = 398600.4418;
inline constexpr double kEarthRotationRadPerS = 7.2921159e-5;

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct Vec3 {
    double x = 0, y = 0, z = 0;

    friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

struct OrbitSpec {
    double altitude_km = 500.0;
    double inclination_deg = 99.5;
    double raan_deg = 0.0;
    double arg_latitude_deg = 0.0;
    double eccentricity = 0.0;

    friend bool operator==(const OrbitSpec&, const OrbitSpec&) = default;

    double semi_major_axis_km() const { return kEarthRadiusKm + altitude_km; }

    // rad/s
    double mean_motion() const {
        const double a = semi_major_axis_km();
        return std::sqrt(kMuKm3PerS2 / (a * a * a));
    }

    double period_s() const { return 2.0 * std::numbers::pi / mean_motion(); }

    void validate() const {
        if (!(altitude_km > 0)) throw ConfigError("orbit altitude must be positive");
        if (!(inclination_deg >= 0 && inclination_deg <= 180))
            throw ConfigError("orbit inclination must lie in [0, 180] degrees");
        if (eccentricity != 0) throw ConfigError("only circular orbits (eccentricity 0) are supported");
    }
};

struct StationSpec {
    std::string name;
    double latitude_deg = 0;
    double longitude_deg = 0;
    double altitude_km = 0;

    friend bool operator==(const StationSpec&, const StationSpec&) = default;

    void validate() const {
        if (!(latitude_deg >= -90 && latitude_deg <= 90))
            throw ConfigError("station '" + name + "': latitude must lie in [-90, 90]");
        if (!(longitude_deg > -180 && longitude_deg <= 180))
            throw ConfigError("station '" + name + "': longitude must lie in (-180, 180]");
        if (!(altitude_km >= 0)) throw ConfigError("station '" + name + "': altitude must be >= 0");
    }
};

struct CartesianState {
    Vec3 position;  // km, Earth-fixed
    double time = 0;  // s since scenario epoch
};

struct ContactWindow {
    std::string from_node;
    std::string to_node;
    double start = 0;
    double end = 0;

    double duration() const { return end - start; }
};

// Position in the inertial frame that coincides with Earth-fixed at t = 0.
inline Vec3 propagate_inertial(const OrbitSpec& orbit, double t) {
    const double a = orbit.semi_major_axis_km();
    const double u = deg2rad(orbit.arg_latitude_deg) + orbit.mean_motion() * t;
    const double raan = deg2rad(orbit.raan_deg);
    const double inc = deg2rad(orbit.inclination_deg);
    const double cu = std::cos(u), su = std::sin(u);
    const double co = std::cos(raan), so = std::sin(raan);
    const double ci = std::cos(inc), si = std::sin(inc);
    return {a * (cu * co - su * ci * so), a * (cu * so + su * ci * co), a * (su * si)};
}

inline Vec3 inertial_to_fixed(Vec3 r, double t) {
    const double theta = kEarthRotationRadPerS * t;
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * r.x + s * r.y, -s * r.x + c * r.y, r.z};
}

inline CartesianState propagate(const OrbitSpec& orbit, double t) {
    return {inertial_to_fixed(propagate_inertial(orbit, t), t), t};
}

inline CartesianState station_position(const StationSpec& station) {
    const double r = kEarthRadiusKm + station.altitude_km;
    const double lat = deg2rad(station.latitude_deg);
    const double lon = deg2rad(station.longitude_deg);
    return {{r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)}, 0.0};
}

// Sub-satellite longitude in degrees, (-180, 180].
inline double ground_track_longitude_deg(const OrbitSpec& orbit, double t) {
    const Vec3 p = propagate(orbit, t).position;
    return rad2deg(std::atan2(p.y, p.x));
}

// Tolerance for endpoints lying exactly on the sphere (ground stations).
inline constexpr double kSurfaceToleranceKm = 1e-6;

// True iff the closed segment a-b stays outside the Earth sphere. A ground
// station sees down to 0 deg elevation; elevated stations see below their
// local horizon down to the grazing ray.
inline bool has_line_of_sight(Vec3 a, Vec3 b) {
    const Vec3 d = b - a;
    const double dd = dot(d, d);
    double s = 0.0;
    if (dd > 0) s = std::clamp(-dot(a, d) / dd, 0.0, 1.0);
    const Vec3 closest = a + s * d;
    return norm(closest) >= kEarthRadiusKm - kSurfaceToleranceKm;
}

inline bool has_line_of_sight(const CartesianState& a, const CartesianState& b) {
    return has_line_of_sight(a.position, b.position);
}

inline constexpr double kDefaultCoarseStepS = 10.0;
inline constexpr double kBoundaryToleranceS = 0.01;

// All maximal LOS intervals in [0, horizon]. Each rise/set is found by
// sampling at coarse_step and bisecting the bracket down to kBoundaryToleranceS.
inline std::vector<ContactWindow> compute_contacts(const OrbitSpec& orbit, const StationSpec& station,
                                                   double horizon, double coarse_step = kDefaultCoarseStepS,
                                                   const std::string& satellite_name = "LEO") {
    orbit.validate();
    station.validate();
    if (!(horizon > 0)) throw ConfigError("contact horizon must be positive");
    if (!(coarse_step > 0)) throw ConfigError("coarse step must be positive");
    if (coarse_step > orbit.period_s() / 4)
        throw ConfigError("coarse step exceeds a quarter of the orbital period; passes could be missed");

    const Vec3 ground = station_position(station).position;
    const auto visible = [&](double t) { return has_line_of_sight(propagate(orbit, t).position, ground); };
    const auto refine = [&](double lo, double hi, bool lo_state) {
        while (hi - lo > kBoundaryToleranceS) {
            const double mid = 0.5 * (lo + hi);
            (visible(mid) == lo_state ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };

    std::vector<ContactWindow> out;
    double prev_t = 0;
    bool prev = visible(0);
    double open_at = 0;
    for (long k = 1; prev_t < horizon; ++k) {
        const double t = std::min(static_cast<double>(k) * coarse_step, horizon);
        const bool cur = visible(t);
        if (cur != prev) {
            const double edge = refine(prev_t, t, prev);
            if (cur) {
                open_at = edge;
            } else if (edge > open_at) {
                out.push_back({satellite_name, station.name, open_at, edge});
            }
        }
        prev = cur;
        prev_t = t;
    }
    if (prev && horizon > open_at) out.push_back({satellite_name, station.name, open_at, horizon});
    return out;
}

struct ContactSummary {
    std::size_t count = 0;
    double mean_duration_s = 0;
    double total_duration_s = 0;
};

inline ContactSummary summarize(std::span<const ContactWindow> contacts) {
    ContactSummary s;
    s.count = contacts.size();
    for (const auto& c : contacts) s.total_duration_s += c.duration();
    if (s.count) s.mean_duration_s = s.total_duration_s / static_cast<double>(s.count);
    return s;
}

// Bin k counts durations in [k*bin_width, (k+1)*bin_width).
struct Histogram {
    double bin_width = 60;
    std::vector<std::size_t> counts;

    std::size_t total() const {
        std::size_t n = 0;
        for (auto c : counts) n += c;
        return n;
    }
};

inline Histogram contact_histogram(std::span<const ContactWindow> contacts, double bin_width) {
    if (!(bin_width > 0)) throw ConfigError("histogram bin width must be positive");
    Histogram h{bin_width, {}};
    for (const auto& c : contacts) {
        const auto bin = static_cast<std::size_t>(std::floor(c.duration() / bin_width));
        if (bin >= h.counts.size()) h.counts.resize(bin + 1, 0);
        ++h.counts[bin];
    }
    return h;
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "bin_start_s,bin_end_s,count\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        os << text::format_double(static_cast<double>(k) * h.bin_width) << ','
           << text::format_double(static_cast<double>(k + 1) * h.bin_width) << ',' << h.counts[k] << '\n';
    }
}

inline void write_contacts_csv(std::ostream& os, std::span<const ContactWindow> contacts, double rate_bps) {
    os << "from,to,start_s,end_s,rate_bps\n";
    for (const auto& c : contacts) {
        os << c.from_node << ',' << c.to_node << ',' << text::format_double(c.start) << ','
           << text::format_double(c.end) << ',' << text::format_double(rate_bps) << '\n';
    }
}

}  // namespace hapsdtn::orbital
