#include <cmath>
#include <sstream>
#include <tuple>

#include <gtest/gtest.h>

#include "hapsdtn/simengine.hpp"

using namespace hapsdtn;
using namespace hapsdtn::sim;

namespace {

using contactplan::Contact;

// LEO --c0 [0,100], site "s"--> OGS --c1 [0,1000]--> MOC, 20 s per bundle.
ContactPlan hand_plan() {
    ContactPlan p;
    p.nodes = {{"LEO", NodeKind::LEO, std::nullopt, std::nullopt, std::nullopt},
               {"OGS", NodeKind::OGS, orbital::StationSpec{"OGS", 0, 0, 0}, "s", std::nullopt},
               {"MOC", NodeKind::MOC, std::nullopt, std::nullopt, std::nullopt}};
    p.contacts = {Contact{0, 1, 0, 100, 8e9, "s"}, Contact{1, 2, 0, 1000, 8e9, std::nullopt}};
    p.horizon_s = 1000;
    return p;
}

SimParams hand_params(long n) {
    SimParams sp;
    sp.duration_s = 1000;
    sp.n_bundles = n;
    sp.source = 0;
    sp.destination = 2;
    sp.terminals = {1, 0, 0};
    return sp;
}

ScenarioConfig small(Topology t, double days, long bundles) {
    auto cfg = paper_preset(t);
    cfg.duration_s = days * 86400;
    cfg.n_bundles = bundles;
    return cfg;
}

using Step = std::tuple<double, std::string, std::int64_t, std::int64_t>;  // time, what, bundle, contact

std::vector<Step> transfer_steps(const std::vector<TraceRecord>& trace) {
    std::vector<Step> out;
    for (const auto& r : trace)
        if (r.what == "TX_START" || r.what == "TX_ABORT" || r.what == "DELIVERED")
            out.emplace_back(r.time_s, r.what, r.bundle, r.contact);
    return out;
}

}  // namespace

// Hand walkthrough. The site fails at 30 s while b1 is on c0 and returns at 50 s.
//   t=0   b0 starts on c0 (the LEO has one terminal)
//   t=20  b0 reaches the OGS and starts on c1; b1 starts on c0
//   t=30  link down: b1 aborted and requeued behind b2
//   t=40  b0 delivered
//   t=50  link up: b2 starts on c0
//   t=70  b2 reaches the OGS and starts on c1; b1 starts on c0
//   t=90  b1 reaches the OGS (c1 busy), then b2 is delivered and b1 starts on c1
//   t=110 b1 delivered
TEST(Sim, HandTraceWithMidTransmissionFailure) {
    const auto plan = hand_plan();
    std::map<std::string, FailureTimeline> tl{
        {"s", FailureTimeline{"s", LinkState::Up, {{30, LinkState::Down}, {50, LinkState::Up}}, 1000}}};
    std::vector<TraceRecord> trace;
    auto sp = hand_params(3);
    sp.trace = &trace;
    const auto rep = simulate(plan, tl, sp);

    const std::vector<Step> expected{
        {0, "TX_START", 0, 0},   {20, "TX_START", 1, 0},  {20, "TX_START", 0, 1}, {30, "TX_ABORT", 1, 0},
        {40, "DELIVERED", 0, 1}, {50, "TX_START", 2, 0},  {70, "TX_START", 1, 0}, {70, "TX_START", 2, 1},
        {90, "DELIVERED", 2, 1}, {90, "TX_START", 1, 1}, {110, "DELIVERED", 1, 1}};
    EXPECT_EQ(transfer_steps(trace), expected);

    EXPECT_EQ(rep.delivered_count, 3);
    EXPECT_DOUBLE_EQ(rep.delivery_ratio, 1.0);
    EXPECT_EQ(rep.latencies_s, (std::vector<double>{40, 90, 110}));
    EXPECT_EQ(rep.delivered_ids, (std::vector<std::int64_t>{0, 1, 2}));

    const std::vector<OccupancySample> leo{{0, 2}, {20, 1}, {30, 2}, {50, 1}, {70, 0}};
    EXPECT_EQ(rep.occupancy[0], leo);
    EXPECT_EQ(rep.occupancy[1], (std::vector<OccupancySample>{{0, 0}}));
    EXPECT_EQ(rep.occupancy[2], (std::vector<OccupancySample>{{0, 0}}));

    // 2*20 + 1*10 + 2*20 + 1*20 bundle-seconds over 1000 s, out of 3 bundles
    EXPECT_NEAR(rep.mean_occupancy_pct[0], 100.0 * 110 / 1000 / 3, 1e-12);
    EXPECT_NEAR(rep.max_occupancy_pct[0], 200.0 / 3, 1e-12);
}

TEST(Sim, WithoutFailureTheLinkStaysBusy) {
    const auto plan = hand_plan();
    std::map<std::string, FailureTimeline> tl{{"s", FailureTimeline::constant("s", LinkState::Up, 1000)}};
    const auto rep = simulate(plan, tl, hand_params(3));
    EXPECT_EQ(rep.latencies_s, (std::vector<double>{40, 60, 80}));
}

TEST(Sim, TransmissionThatCannotFinishIsNotStarted) {
    // c0 holds exactly five bundles; the sixth finds no route and stays put.
    const auto plan = hand_plan();
    std::map<std::string, FailureTimeline> tl{{"s", FailureTimeline::constant("s", LinkState::Up, 1000)}};
    std::vector<TraceRecord> trace;
    auto sp = hand_params(6);
    sp.trace = &trace;
    const auto rep = simulate(plan, tl, sp);
    EXPECT_EQ(rep.delivered_count, 5);
    for (const auto& r : trace)
        if (r.what == "TX_START" && r.contact == 0) {
            EXPECT_LE(r.time_s + 20, 100);
        }
    EXPECT_EQ(rep.occupancy[0].back().count, 1);
}

TEST(Sim, AlwaysDownDeliversNothing) {
    for (auto t : {Topology::OGS1, Topology::OGS2, Topology::HAPS1, Topology::HAPS2}) {
        auto cfg = small(t, 1, 40);
        for (auto& [site, src] : cfg.weather_sources) src = {WeatherSource::Kind::AlwaysDown, {}, {}};
        const auto ps = prepare(cfg);
        const auto rep = run(ps, 11);
        EXPECT_EQ(rep.delivery_ratio, 0.0) << to_string(t);
        EXPECT_EQ(rep.delivered_count, 0);

        if (t == Topology::HAPS1 || t == Topology::HAPS2) {
            // what left the LEO is parked at the HAPS layer
            long parked = 0;
            for (NodeId n : ps.plan.nodes_of_kind(NodeKind::HAPS)) parked += rep.occupancy[n].back().count;
            const long left_leo = cfg.n_bundles - rep.occupancy[ps.plan.node("LEO")].back().count;
            EXPECT_GT(left_leo, 0);
            EXPECT_EQ(parked, left_leo);
        }
    }
}

TEST(Sim, FogFreeHapsAtFullThresholdDeliversEverything) {
    auto cfg = small(Topology::HAPS1, 7, 1);
    cfg.weather_sources["ottawa"].synthetic.fog_prob = 0;
    cfg.cloud_threshold_pct = 100;
    auto ps = prepare(cfg);
    ASSERT_TRUE(ps.stats.at("ottawa").never_fails());

    // volume pre-check: load at most half of the LEO->HAPS capacity
    const NodeId leo = ps.plan.node("LEO"), haps = ps.plan.node("HAPS_Ottawa");
    long capacity = 0;
    for (const auto& c : ps.plan.contacts)
        if (c.from == leo && c.to == haps)
            capacity += static_cast<long>(std::floor(c.volume_bits() / static_cast<double>(cfg.bundle_size_bits)));
    ASSERT_GT(capacity, 10);
    ps.config.n_bundles = std::min(1000L, capacity / 2);

    const auto rep = run(ps, 5);
    EXPECT_EQ(rep.delivery_ratio, 1.0);
    for (NodeId n = 0; n < ps.plan.nodes.size(); ++n) EXPECT_EQ(rep.occupancy[n].back().count, 0);
}

TEST(Sim, ConservationHoldsThroughout) {
    // check_invariants makes every event assert generated = delivered + buffered + in flight
    for (auto t : {Topology::OGS1, Topology::OGS2, Topology::HAPS1, Topology::HAPS2}) {
        auto cfg = small(t, 2, 300);
        auto ps = prepare(cfg);
        for (double th : {20.0, 60.0}) {
            set_threshold(ps, th);
            for (std::uint64_t seed = 1; seed <= 4; ++seed) {
                SimReport rep;
                ASSERT_NO_THROW(rep = run(ps, seed));
                long held = 0;
                for (const auto& s : rep.occupancy) held += s.back().count;
                EXPECT_LE(rep.delivered_count + held, rep.generated_count);
                EXPECT_GE(rep.delivery_ratio, 0.0);
                EXPECT_LE(rep.delivery_ratio, 1.0);
                for (std::size_t n = 0; n < rep.node_names.size(); ++n) {
                    EXPECT_GE(rep.mean_occupancy_pct[n], 0.0);
                    EXPECT_LE(rep.max_occupancy_pct[n], 100.0);
                    EXPECT_LE(rep.mean_occupancy_pct[n], rep.max_occupancy_pct[n] + 1e-12);
                }
                for (double l : rep.latencies_s) EXPECT_LE(l, cfg.duration_s);
            }
        }
    }
}

TEST(Sim, DeterministicPerSeed) {
    auto ps = prepare(small(Topology::HAPS2, 2, 200));
    set_threshold(ps, 40);
    const auto a = run(ps, 99), b = run(ps, 99), c = run(ps, 100);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(Sim, NothingSentOverADownLink) {
    for (auto t : {Topology::OGS2, Topology::HAPS2}) {
        auto ps = prepare(small(t, 2, 200));
        set_threshold(ps, 30);
        std::size_t checked = 0;
        for (std::uint64_t seed = 1; seed <= 8; ++seed) {
            const auto tl = sample_timelines(ps, seed);
            std::vector<TraceRecord> trace;
            run(ps, seed, &trace);
            std::map<std::pair<std::int64_t, std::int64_t>, double> started;  // (contact, bundle) -> t
            for (const auto& r : trace) {
                if (r.what == "TX_START" && !r.site.empty()) {
                    EXPECT_EQ(tl.at(r.site).state_at(r.time_s), LinkState::Up);
                    started[{r.contact, r.bundle}] = r.time_s;
                }
                if (r.what == "TX_COMPLETE") {
                    const auto& site = ps.plan.contacts[static_cast<std::size_t>(r.contact)].weather_site;
                    if (!site) continue;
                    const double t0 = started.at({r.contact, r.bundle});
                    for (const auto& tr : tl.at(*site).transitions)
                        if (tr.state == LinkState::Down) {
                            EXPECT_FALSE(tr.time_s > t0 && tr.time_s <= r.time_s);
                        }
                    ++checked;
                }
            }
        }
        EXPECT_GT(checked, 0u) << to_string(t);
    }
}

TEST(Sim, FailureFreeRunDominates) {
    for (auto t : {Topology::OGS1, Topology::HAPS1, Topology::HAPS2}) {
        auto cfg = small(t, 1, 150);
        auto ps = prepare(cfg);
        const auto params = make_params(ps);
        std::map<std::string, FailureTimeline> up;
        for (const auto& site : ps.plan.weather_sites())
            up.emplace(site, FailureTimeline::constant(site, LinkState::Up, cfg.duration_s));
        const auto best = simulate(ps.plan, up, params);

        for (double th : {10.0, 50.0, 90.0}) {
            set_threshold(ps, th);
            for (std::uint64_t seed = 1; seed <= 6; ++seed) {
                const auto rep = run(ps, seed);
                EXPECT_LE(rep.delivered_count, best.delivered_count);
                EXPECT_TRUE(std::includes(best.delivered_ids.begin(), best.delivered_ids.end(),
                                          rep.delivered_ids.begin(), rep.delivered_ids.end()))
                    << to_string(t) << " th=" << th << " seed=" << seed;
            }
        }
    }
}

TEST(Sim, DeliveryRatioGrowsOverTime) {
    auto ps = prepare(small(Topology::HAPS1, 2, 200));
    set_threshold(ps, 50);
    std::vector<TraceRecord> trace;
    const auto rep = run(ps, 3, &trace);
    double last = -1;
    long seen = 0;
    for (const auto& r : trace) {
        EXPECT_GE(r.time_s, last);
        last = r.time_s;
        if (r.what == "DELIVERED") ++seen;
    }
    EXPECT_EQ(seen, rep.delivered_count);
}

TEST(Sim, BadInputs) {
    const auto plan = hand_plan();
    std::map<std::string, FailureTimeline> none;
    EXPECT_THROW(simulate(plan, none, hand_params(1)), ConfigError);

    std::map<std::string, FailureTimeline> tl{{"s", FailureTimeline::constant("s", LinkState::Up, 1000)}};
    auto same = hand_params(1);
    same.destination = 0;
    EXPECT_THROW(simulate(plan, tl, same), ConfigError);
    auto zero = hand_params(0);
    EXPECT_THROW(simulate(plan, tl, zero), ConfigError);
    auto far = hand_params(1);
    far.destination = 7;
    EXPECT_THROW(simulate(plan, tl, far), ConfigError);

    auto cfg = small(Topology::OGS2, 1, 10);
    cfg.weather_sources.erase("calgary");
    EXPECT_THROW(prepare(cfg), ConfigError);
}

TEST(Occupancy, TimeWeightedMeanAndPeak) {
    SimReport r;
    r.duration_s = 604800;
    r.generated_count = 1000;
    r.node_names = {"A", "B", "C"};
    r.occupancy = {{{0, 1000}, {302400, 0}}, {{0, 0}}, {{0, 0}, {100, 250}, {200, 0}}};
    const auto [mean_a, max_a] = occupancy_stats(r, "A");
    EXPECT_DOUBLE_EQ(mean_a, 50.0);
    EXPECT_DOUBLE_EQ(max_a, 100.0);
    const auto [mean_b, max_b] = occupancy_stats(r, NodeId{1});
    EXPECT_EQ(mean_b, 0.0);
    EXPECT_EQ(max_b, 0.0);
    const auto [mean_c, max_c] = occupancy_stats(r, "C");
    EXPECT_NEAR(mean_c, 25.0 * 100 / 604800, 1e-12);
    EXPECT_DOUBLE_EQ(max_c, 25.0);
    EXPECT_THROW(occupancy_stats(r, "Z"), ConfigError);
    EXPECT_THROW(occupancy_stats(r, NodeId{3}), ConfigError);
}

TEST(Trace, JsonLines) {
    std::ostringstream os;
    write_trace_jsonl(os, {{30, "TX_ABORT", 0, 1, 0, ""}, {12.5, "LINK_DOWN", -1, -1, -1, "ottawa"}});
    EXPECT_EQ(os.str(),
              "{\"time\":30,\"kind\":\"TX_ABORT\",\"contact\":0,\"bundle\":1,\"node\":0}\n"
              "{\"time\":12.5,\"kind\":\"LINK_DOWN\",\"site\":\"ottawa\"}\n");
}

TEST(Events, TieOrder) {
    EventLater later;
    const Event down{5, EventKind::LinkDown, 9}, start{5, EventKind::ContactStart, 1},
        tx{5, EventKind::TxComplete, 0}, up{5, EventKind::LinkUp, 0}, wake{5, EventKind::RouteWake, 0};
    EXPECT_TRUE(later(start, down));
    EXPECT_TRUE(later(tx, start));
    EXPECT_TRUE(later(up, tx));
    EXPECT_TRUE(later(wake, up));
    const Event early{4, EventKind::RouteWake, 100};
    EXPECT_TRUE(later(down, early));
    const Event a{5, EventKind::TxComplete, 1}, b{5, EventKind::TxComplete, 2};
    EXPECT_TRUE(later(b, a));
}
