#pragma once

// Hourly cloud/fog records -> per-site failure statistics (mean time to
// failure / time to recover at a cloud threshold) -> sampled alternating
// exponential up/down timelines.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hapsdtn/errors.hpp"
#include "hapsdtn/random.hpp"
#include "hapsdtn/text.hpp"

namespace hapsdtn::weather {

inline constexpr std::int64_t kHourS = 3600;

// ---------------------------------------------------------------------------
// Timestamps (UTC seconds since 1970-01-01)

inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2);
}

// Accepts YYYY-MM-DDTHH:MM[:SS][Z|+00:00]; a space may replace the 'T'.
inline std::optional<std::int64_t> parse_iso8601(std::string_view s) {
    s = text::trim(s);
    if (s.ends_with('Z') || s.ends_with('z')) s.remove_suffix(1);
    else if (s.ends_with("+00:00")) s.remove_suffix(6);
    if (s.size() != 16 && s.size() != 19) return std::nullopt;
    if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') return std::nullopt;
    if (s.size() == 19 && s[16] != ':') return std::nullopt;
    const auto field = [&](std::size_t pos, std::size_t len) { return text::parse_int<int>(s.substr(pos, len)); };
    const auto y = field(0, 4), mo = field(5, 2), d = field(8, 2), h = field(11, 2), mi = field(14, 2);
    const auto sec = s.size() == 19 ? field(17, 2) : std::optional<int>(0);
    if (!y || !mo || !d || !h || !mi || !sec) return std::nullopt;
    if (*mo < 1 || *mo > 12 || *d < 1 || *d > 31 || *h > 23 || *mi > 59 || *sec > 60 || *h < 0 || *mi < 0 ||
        *sec < 0)
        return std::nullopt;
    return days_from_civil(*y, static_cast<unsigned>(*mo), static_cast<unsigned>(*d)) * 86400 +
           std::int64_t{*h} * 3600 + std::int64_t{*mi} * 60 + *sec;
}

inline std::string format_iso8601(std::int64_t t) {
    std::int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
    std::int64_t rem = t - days * 86400;
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    const int hh = static_cast<int>(rem / 3600), mm = static_cast<int>(rem % 3600 / 60), ss = static_cast<int>(rem % 60);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02d:%02d:%02dZ", static_cast<long long>(y), m, d, hh, mm, ss);
    return buf;
}

// ---------------------------------------------------------------------------
// Records

struct WeatherRecord {
    std::int64_t timestamp = 0;
    double cloud_cover_pct = 0;
    bool fog = false;
};

// Canonical CSV: header `timestamp,cloud_cover_pct,fog`.
inline std::vector<WeatherRecord> load_weather(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    std::vector<WeatherRecord> out;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = text::trim(line);
        if (row.empty() || row.front() == '#') continue;
        if (!have_header) {
            const auto cols = text::split(row, ',');
            if (cols.size() != 3 || text::trim(cols[0]) != "timestamp" || text::trim(cols[1]) != "cloud_cover_pct" ||
                text::trim(cols[2]) != "fog")
                throw InputError("expected header 'timestamp,cloud_cover_pct,fog'", lineno);
            have_header = true;
            continue;
        }
        const auto cols = text::split(row, ',');
        if (cols.size() != 3) throw InputError("expected 3 columns, got " + std::to_string(cols.size()), lineno);
        const auto ts = parse_iso8601(cols[0]);
        if (!ts) throw InputError("bad timestamp '" + std::string(text::trim(cols[0])) + "'", lineno);
        const auto cloud = text::parse_double(cols[1]);
        if (!cloud) throw InputError("bad cloud cover '" + std::string(text::trim(cols[1])) + "'", lineno);
        if (!(*cloud >= 0 && *cloud <= 100))
            throw InputError("cloud cover " + std::string(text::trim(cols[1])) + " outside [0,100]", lineno);
        const auto fog = text::trim(cols[2]);
        if (fog != "0" && fog != "1") throw InputError("fog must be 0 or 1", lineno);
        if (!out.empty() && *ts <= out.back().timestamp)
            throw InputError(*ts == out.back().timestamp ? "duplicate timestamp" : "timestamps not increasing", lineno);
        out.push_back({*ts, *cloud, fog == "1"});
    }
    if (!have_header) throw InputError("empty weather file");
    return out;
}

inline void write_weather_csv(std::ostream& os, std::span<const WeatherRecord> records) {
    os << "timestamp,cloud_cover_pct,fog\n";
    for (const auto& r : records)
        os << format_iso8601(r.timestamp) << ',' << text::format_double(r.cloud_cover_pct) << ',' << (r.fog ? 1 : 0)
           << '\n';
}

// Number of places where consecutive records are more than one cadence apart.
inline std::size_t count_gaps(std::span<const WeatherRecord> records, std::int64_t cadence_s = kHourS) {
    std::size_t gaps = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].timestamp - records[i - 1].timestamp > cadence_s) ++gaps;
    return gaps;
}

// ---------------------------------------------------------------------------
// Failure statistics

struct FailureStats {
    std::string site;
    double cloud_threshold_pct = 0;
    double mean_ttf_s = 0;
    double mean_ttr_s = 0;
    double lambda_ttf = 0;  // 1/s, 0 when mean_ttf_s is 0
    double lambda_ttr = 0;  // 1/s, 0 when mean_ttr_s is 0

    bool never_fails() const { return mean_ttr_s == 0 && mean_ttf_s > 0; }
    bool always_fails() const { return mean_ttf_s == 0; }
    double availability() const {
        if (always_fails()) return 0.0;
        return mean_ttf_s / (mean_ttf_s + mean_ttr_s);
    }
};

inline FailureStats make_stats(std::string site, double threshold, double mean_ttf_s, double mean_ttr_s) {
    return {std::move(site), threshold, mean_ttf_s, mean_ttr_s, mean_ttf_s > 0 ? 1.0 / mean_ttf_s : 0.0,
            mean_ttr_s > 0 ? 1.0 / mean_ttr_s : 0.0};
}

struct StatsOptions {
    // false: fog is ignored at a 100% threshold (alternate reading).
    bool fog_always_fails = true;
    std::int64_t cadence_s = kHourS;
};

inline bool hour_is_down(const WeatherRecord& r, double threshold_pct, const StatsOptions& opt = {}) {
    if (r.cloud_cover_pct > threshold_pct) return true;
    return r.fog && (opt.fog_always_fails || threshold_pct < 100);
}

// Mean lengths of maximal UP and DOWN runs. A cadence gap ends the current run;
// edge runs count as full runs.
inline FailureStats compute_failure_stats(std::span<const WeatherRecord> records, double threshold_pct,
                                          const std::string& site = {}, const StatsOptions& opt = {}) {
    if (records.size() < 2) throw InputError("failure statistics need at least 2 weather records");
    if (!(threshold_pct >= 0 && threshold_pct <= 100)) throw ConfigError("cloud threshold must lie in [0,100]");

    double up_total = 0, down_total = 0;
    std::size_t up_runs = 0, down_runs = 0;
    const auto close_run = [&](bool down, std::int64_t len) {
        if (len == 0) return;
        if (down) {
            down_total += static_cast<double>(len);
            ++down_runs;
        } else {
            up_total += static_cast<double>(len);
            ++up_runs;
        }
    };

    bool state = hour_is_down(records[0], threshold_pct, opt);
    std::int64_t run_len = opt.cadence_s;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const bool down = hour_is_down(records[i], threshold_pct, opt);
        const bool gap = records[i].timestamp - records[i - 1].timestamp > opt.cadence_s;
        if (gap || down != state) {
            close_run(state, run_len);
            state = down;
            run_len = 0;
        }
        run_len += opt.cadence_s;
    }
    close_run(state, run_len);

    const double ttf = up_runs ? up_total / static_cast<double>(up_runs) : 0.0;
    const double ttr = down_runs ? down_total / static_cast<double>(down_runs) : 0.0;
    return make_stats(site, threshold_pct, ttf, ttr);
}

inline std::vector<FailureStats> threshold_sweep(std::span<const WeatherRecord> records,
                                                 std::span<const double> thresholds, const std::string& site = {},
                                                 const StatsOptions& opt = {}) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw ConfigError("threshold sweep must be sorted ascending");
    std::vector<FailureStats> out;
    out.reserve(thresholds.size());
    for (double th : thresholds) out.push_back(compute_failure_stats(records, th, site, opt));
    return out;
}

// True if TTF is non-decreasing and TTR non-increasing along the sweep.
inline bool sweep_is_monotone(std::span<const FailureStats> sweep) {
    for (std::size_t i = 1; i < sweep.size(); ++i) {
        // never-failing endpoints report TTR 0, which still satisfies the ordering
        const bool ttf_ok = sweep[i].mean_ttf_s >= sweep[i - 1].mean_ttf_s || sweep[i].never_fails();
        if (!ttf_ok || sweep[i].mean_ttr_s > sweep[i - 1].mean_ttr_s) return false;
    }
    return true;
}

inline void write_stats_csv(std::ostream& os, std::span<const FailureStats> stats) {
    os << "site,threshold_pct,mean_ttf_s,mean_ttr_s,availability\n";
    for (const auto& s : stats)
        os << s.site << ',' << text::format_double(s.cloud_threshold_pct) << ',' << text::format_double(s.mean_ttf_s)
           << ',' << text::format_double(s.mean_ttr_s) << ',' << text::format_double(s.availability()) << '\n';
}

// ---------------------------------------------------------------------------
// Timelines

enum class LinkState : std::uint8_t { Up, Down };

inline LinkState flip(LinkState s) { return s == LinkState::Up ? LinkState::Down : LinkState::Up; }

struct Transition {
    double time_s = 0;
    LinkState state = LinkState::Up;
};

// Alternating renewal realization. `transitions` holds the changes after t = 0;
// the state at t = 0 is `initial`.
struct FailureTimeline {
    std::string site;
    LinkState initial = LinkState::Up;
    std::vector<Transition> transitions;
    double horizon_s = 0;

    LinkState state_at(double t) const {
        auto it = std::upper_bound(transitions.begin(), transitions.end(), t,
                                   [](double v, const Transition& tr) { return v < tr.time_s; });
        return it == transitions.begin() ? initial : std::prev(it)->state;
    }

    double up_time_s() const {
        double up = 0, t = 0;
        LinkState s = initial;
        for (const auto& tr : transitions) {
            if (s == LinkState::Up) up += tr.time_s - t;
            t = tr.time_s;
            s = tr.state;
        }
        if (s == LinkState::Up) up += horizon_s - t;
        return up;
    }

    double up_fraction() const { return horizon_s > 0 ? up_time_s() / horizon_s : 0.0; }

    static FailureTimeline constant(std::string site, LinkState s, double horizon) {
        return {std::move(site), s, {}, horizon};
    }
};

// UP durations ~ Exp(lambda_ttf), DOWN ~ Exp(lambda_ttr), starting from a
// Bernoulli(availability) state, truncated at horizon_s.
inline FailureTimeline sample_timeline(const FailureStats& stats, double horizon_s, rng::Engine& eng) {
    if (!(horizon_s > 0)) throw ConfigError("timeline horizon must be positive");
    if (stats.never_fails()) return FailureTimeline::constant(stats.site, LinkState::Up, horizon_s);
    if (stats.always_fails()) return FailureTimeline::constant(stats.site, LinkState::Down, horizon_s);

    FailureTimeline tl{stats.site, rng::bernoulli(eng, stats.availability()) ? LinkState::Up : LinkState::Down,
                       {}, horizon_s};
    LinkState s = tl.initial;
    double t = 0;
    while (true) {
        double d = 0;
        while (d <= 0) d = rng::exponential(eng, s == LinkState::Up ? stats.mean_ttf_s : stats.mean_ttr_s);
        t += d;
        if (t >= horizon_s) break;
        s = flip(s);
        tl.transitions.push_back({t, s});
    }
    return tl;
}

// ---------------------------------------------------------------------------
// Synthetic weather

// Periodic: `up_hours` at clear_pct then `down_hours` at cloudy_pct, repeated.
// Ar1: cloud = clamp(mean_cloud_pct + spread_pct * x_t, 0, 100) where x_t is a
// unit-variance Gaussian AR(1) process with lag-1 correlation `rho`, which
// gives hour-to-hour persistence and point masses at clear and overcast.
// Fog: either every fog_every_h hours for fog_duration_h, or i.i.d. with fog_prob.
// noise_pct adds uniform jitter in [-noise_pct, noise_pct] before clamping.
struct SyntheticWeatherSpec {
    enum class Mode { Periodic, Ar1 };

    Mode mode = Mode::Periodic;
    std::int64_t start_epoch_s = 1483228800;  // 2017-01-01T00:00:00Z
    long hours = 52560;
    long up_hours = 9;
    long down_hours = 3;
    double clear_pct = 0;
    double cloudy_pct = 100;
    double mean_cloud_pct = 60;
    double spread_pct = 45;
    double rho = 0.97;
    long fog_every_h = 0;
    long fog_duration_h = 0;
    double fog_prob = 0;
    double noise_pct = 0;
    std::uint64_t seed = 1;

    friend bool operator==(const SyntheticWeatherSpec&, const SyntheticWeatherSpec&) = default;

    void validate() const {
        if (hours < 2) throw ConfigError("synthetic weather needs at least 2 hours");
        if (mode == Mode::Periodic && (up_hours < 0 || down_hours < 0 || up_hours + down_hours == 0))
            throw ConfigError("synthetic periodic pattern needs up_hours + down_hours > 0");
        if (mode == Mode::Ar1 && !(rho >= 0 && rho < 1)) throw ConfigError("synthetic rho must lie in [0,1)");
        if (!(spread_pct >= 0)) throw ConfigError("synthetic spread must be non-negative");
        for (double v : {clear_pct, cloudy_pct, mean_cloud_pct})
            if (!(v >= 0 && v <= 100)) throw ConfigError("synthetic cloud levels must lie in [0,100]");
        if (!(fog_prob >= 0 && fog_prob <= 1)) throw ConfigError("synthetic fog_prob must lie in [0,1]");
        if (fog_every_h < 0 || fog_duration_h < 0 || noise_pct < 0)
            throw ConfigError("synthetic fog schedule and noise must be non-negative");
    }
};

inline std::vector<WeatherRecord> generate_synthetic(const SyntheticWeatherSpec& spec) {
    spec.validate();
    rng::Engine eng(spec.seed);
    std::vector<WeatherRecord> out;
    out.reserve(static_cast<std::size_t>(spec.hours));

    const double innovation = std::sqrt(1.0 - spec.rho * spec.rho);
    double latent = rng::normal(eng);
    for (long h = 0; h < spec.hours; ++h) {
        double cloud = 0;
        if (spec.mode == SyntheticWeatherSpec::Mode::Periodic) {
            const long phase = h % (spec.up_hours + spec.down_hours);
            cloud = phase < spec.up_hours ? spec.clear_pct : spec.cloudy_pct;
        } else {
            if (h > 0) latent = spec.rho * latent + innovation * rng::normal(eng);
            cloud = spec.mean_cloud_pct + spec.spread_pct * latent;
        }
        if (spec.noise_pct > 0) cloud += rng::uniform(eng, -spec.noise_pct, spec.noise_pct);
        cloud = std::clamp(cloud, 0.0, 100.0);

        bool fog = false;
        if (spec.fog_every_h > 0) fog = h % spec.fog_every_h < spec.fog_duration_h;
        if (spec.fog_prob > 0 && rng::bernoulli(eng, spec.fog_prob)) fog = true;

        out.push_back({spec.start_epoch_s + h * kHourS, cloud, fog});
    }
    return out;
}

// Builds a spec from key/value pairs (config section or `k=v,k=v` CLI text).
inline SyntheticWeatherSpec synthetic_from_kv(const std::map<std::string, std::string>& kv) {
    SyntheticWeatherSpec s;
    for (const auto& [key, value] : kv) {
        const auto num = [&] {
            const auto v = text::parse_double(value);
            if (!v) throw ConfigError("synthetic weather: bad number for '" + key + "': " + value);
            return *v;
        };
        const auto whole = [&] {
            const auto v = text::parse_int<long>(value);
            if (!v) throw ConfigError("synthetic weather: bad integer for '" + key + "': " + value);
            return *v;
        };
        if (key == "mode") {
            if (value == "periodic") s.mode = SyntheticWeatherSpec::Mode::Periodic;
            else if (value == "ar1") s.mode = SyntheticWeatherSpec::Mode::Ar1;
            else throw ConfigError("synthetic weather: mode must be periodic or ar1");
        } else if (key == "start") {
            const auto t = parse_iso8601(value);
            if (!t) throw ConfigError("synthetic weather: bad start timestamp " + value);
            s.start_epoch_s = *t;
        } else if (key == "hours") s.hours = whole();
        else if (key == "up_hours") s.up_hours = whole();
        else if (key == "down_hours") s.down_hours = whole();
        else if (key == "clear_pct") s.clear_pct = num();
        else if (key == "cloudy_pct") s.cloudy_pct = num();
        else if (key == "mean_cloud_pct") s.mean_cloud_pct = num();
        else if (key == "spread_pct") s.spread_pct = num();
        else if (key == "rho") s.rho = num();
        else if (key == "fog_every_h") s.fog_every_h = whole();
        else if (key == "fog_duration_h") s.fog_duration_h = whole();
        else if (key == "fog_prob") s.fog_prob = num();
        else if (key == "noise_pct") s.noise_pct = num();
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(whole());
        else throw ConfigError("synthetic weather: unknown key '" + key + "'");
    }
    s.validate();
    return s;
}

inline std::map<std::string, std::string> parse_kv_list(std::string_view textual) {
    std::map<std::string, std::string> kv;
    for (auto item : text::split(textual, ',')) {
        item = text::trim(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key=value, got '" + std::string(item) + "'");
        kv[std::string(text::trim(item.substr(0, eq)))] = std::string(text::trim(item.substr(eq + 1)));
    }
    return kv;
}

inline std::map<std::string, std::string> to_kv(const SyntheticWeatherSpec& s) {
    using text::format_double;
    return {{"mode", s.mode == SyntheticWeatherSpec::Mode::Ar1 ? "ar1" : "periodic"},
            {"start", format_iso8601(s.start_epoch_s)},
            {"hours", std::to_string(s.hours)},
            {"up_hours", std::to_string(s.up_hours)},
            {"down_hours", std::to_string(s.down_hours)},
            {"clear_pct", format_double(s.clear_pct)},
            {"cloudy_pct", format_double(s.cloudy_pct)},
            {"mean_cloud_pct", format_double(s.mean_cloud_pct)},
            {"spread_pct", format_double(s.spread_pct)},
            {"rho", format_double(s.rho)},
            {"fog_every_h", std::to_string(s.fog_every_h)},
            {"fog_duration_h", std::to_string(s.fog_duration_h)},
            {"fog_prob", format_double(s.fog_prob)},
            {"noise_pct", format_double(s.noise_pct)},
            {"seed", std::to_string(s.seed)}};
}

}  // namespace hapsdtn::weather
