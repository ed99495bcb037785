#pragma once

// In-memory scenario builders for the test suites: hand-sized systems with
// known answers, the remote-generation system used for the planning-mode
// comparison, and a seeded random generator of feasible scenarios.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gridplan/scenario.hpp"

namespace gridplan::testing {

inline Scenario base_scenario(int epochs, int zones, int hours, int epoch_years = 5)
{
    Scenario sc;
    for (int e = 0; e < epochs; ++e) {
        sc.epochs.push_back({e, e * epoch_years, epoch_years});
    }
    for (int z = 0; z < zones; ++z) {
        ZoneSpec zone;
        zone.id = std::string(1, static_cast<char>('A' + z));
        zone.lat = 40.0 + z;
        zone.lon = -80.0 + z;
        sc.zones.push_back(std::move(zone));
    }
    sc.loads.hours.assign(static_cast<std::size_t>(epochs), hours);
    sc.loads.mw.assign(static_cast<std::size_t>(epochs) * static_cast<std::size_t>(zones),
                       std::vector<double>(static_cast<std::size_t>(hours), 0.0));
    sc.options.reliability_mode = ReliabilityMode::reserve_margin;
    sc.options.rsv = 0.15;
    sc.options.voll = 5000.0;
    sc.options.discount_rate = 0.072;
    sc.options.queue_limits_enabled = false;
    return sc;
}

inline void set_flat_load(Scenario& sc, int e, int z, double mw)
{
    auto& series = sc.loads.mw[sc.ez(e, z)];
    std::fill(series.begin(), series.end(), mw);
}

struct GenParams {
    std::string id = "gen";
    double var_cost = 30.0;          // $/MWh
    double annualized_cost = 9e4;    // $/MW-year
    double cf = 1.0;                 // constant capacity factor
    double elcc = 1.0;
    double emission_rate = 0.0;
    bool all_re = false;
    bool re = false;
    bool pv = false;
    bool wind = false;
    bool offshore = false;
};

inline int add_gen(Scenario& sc, const GenParams& p)
{
    GenTechSpec g;
    g.id = p.id;
    g.all_re = p.all_re;
    g.re = p.re;
    g.pv = p.pv;
    g.wind = p.wind;
    g.offshore = p.offshore;
    g.emission_rate = p.emission_rate;
    std::size_t n = static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones());
    g.var_cost.assign(n, p.var_cost);
    g.annualized_cost.assign(n, p.annualized_cost);
    g.elcc.assign(n, p.elcc);
    g.initial_cap.assign(n, 0.0);
    g.build_limit.assign(static_cast<std::size_t>(sc.num_zones()), std::nullopt);
    g.cap_factor.assign(n, HourSeries{p.cf, {}});
    sc.gen_techs.push_back(std::move(g));
    return static_cast<int>(sc.gen_techs.size()) - 1;
}

struct StorParams {
    std::string id = "battery";
    double duration_hours = 4.0;
    double rte = 0.85;
    double annualized_cost = 6e4;
    double elcc = 0.8;
};

inline int add_stor(Scenario& sc, const StorParams& p)
{
    StorTechSpec s;
    s.id = p.id;
    s.duration_hours = p.duration_hours;
    s.round_trip_efficiency = p.rte;
    std::size_t n = static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones());
    s.annualized_cost.assign(n, p.annualized_cost);
    s.elcc.assign(n, p.elcc);
    s.initial_power.assign(n, 0.0);
    s.initial_energy.assign(n, 0.0);
    s.build_limit.assign(static_cast<std::size_t>(sc.num_zones()), std::nullopt);
    sc.stor_techs.push_back(std::move(s));
    return static_cast<int>(sc.stor_techs.size()) - 1;
}

inline int add_corridor(Scenario& sc, const std::string& from, const std::string& to, double cap_mw,
                        double length_miles = 100.0, double overnight_per_mw_mile = 2076.0, double crf = 0.1)
{
    CorridorSpec c;
    c.id = from + "-" + to;
    c.from_zone = from;
    c.to_zone = to;
    c.from_index = sc.zone_index(from);
    c.to_index = sc.zone_index(to);
    c.cap_forward.assign(static_cast<std::size_t>(sc.num_epochs()), cap_mw);
    c.cap_reverse.assign(static_cast<std::size_t>(sc.num_epochs()), cap_mw);
    c.length_miles = length_miles;
    c.overnight_cost_per_mw_mile = overnight_per_mw_mile;
    c.capital_recovery_factor = crf;
    sc.corridors.push_back(std::move(c));
    return static_cast<int>(sc.corridors.size()) - 1;
}

// Single zone, one firm tech with plenty of existing capacity; nothing to
// build, dispatch follows load.
inline Scenario single_zone_static(int hours = 24)
{
    Scenario sc = base_scenario(1, 1, hours);
    set_flat_load(sc, 0, 0, 100.0);
    int g = add_gen(sc, {.id = "gas", .var_cost = 25.0, .annualized_cost = 9e4, .emission_rate = 0.4});
    sc.gen_techs[static_cast<std::size_t>(g)].initial_cap[0] = 200.0;
    return sc;
}

// Two zones: cheap generation in A, load in B, a long thin corridor. With
// `line_attractive` the corridor is cheap enough that remote generation
// plus reinforcement beats local build; otherwise local build wins and the
// co-optimized plan should avoid most of the reinforcement the sequential
// plan is forced into.
inline Scenario remote_generation(bool line_attractive, int hours = 24)
{
    Scenario sc = base_scenario(1, 2, hours);
    set_flat_load(sc, 0, 0, 10.0);  // A
    set_flat_load(sc, 0, 1, 100.0); // B
    int g = add_gen(sc, {.id = "firm", .var_cost = 20.0, .annualized_cost = 5e4});
    // zone-dependent capital cost: B is pricier than A
    auto& tech = sc.gen_techs[static_cast<std::size_t>(g)];
    tech.annualized_cost[sc.ez(0, 1)] = line_attractive ? 2.0e5 : 8.0e4;
    add_corridor(sc, "A", "B", 5.0, 200.0, 2076.0, 0.1); // 41,520 $/MW-year when built out
    return sc;
}

// No resources at all; with rsv = 0 every hour is served by paying the
// penalty, with rsv > 0 the balance is unsatisfiable.
inline Scenario unserved_only(int hours = 24, double rsv = 0.0)
{
    Scenario sc = base_scenario(1, 1, hours);
    sc.options.rsv = rsv;
    set_flat_load(sc, 0, 0, 50.0);
    return sc;
}

// Seeded generator of feasible scenarios. Every draw keeps one unlimited
// firm technology in all zones and a connected corridor tree so that both
// planning workflows stay solvable under either reliability mode.
inline Scenario random_scenario(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
    };
    auto pick_int = [&rng](int lo, int hi) {
        return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };

    const int zones = pick_int(2, 5);
    const int epochs = pick_int(1, 2);
    const int hour_choices[] = {24, 24, 48, 48, 72, 168};
    const int hours = hour_choices[rng() % 6];
    Scenario sc = base_scenario(epochs, zones, hours);

    // loads: daily shape with zone-specific level
    for (int e = 0; e < epochs; ++e) {
        for (int z = 0; z < zones; ++z) {
            double base = uniform(40.0, 150.0);
            double swing = uniform(0.1, 0.5);
            auto& series = sc.loads.mw[sc.ez(e, z)];
            for (int h = 0; h < hours; ++h) {
                series[static_cast<std::size_t>(h)] =
                    base * (1.0 + swing * std::sin(2.0 * 3.14159265358979 * (h % 24) / 24.0 + z)) *
                    (1.0 + 0.15 * e);
            }
        }
    }

    // firm tech: unlimited, cf 1, keeps everything feasible
    int firm = add_gen(sc, {.id = "firm",
                            .var_cost = uniform(25.0, 60.0),
                            .annualized_cost = uniform(8e4, 1.5e5),
                            .emission_rate = uniform(0.3, 0.5)});
    for (int e = 0; e < epochs; ++e) {
        for (int z = 0; z < zones; ++z) {
            sc.gen_techs[static_cast<std::size_t>(firm)].initial_cap[sc.ez(e, z)] =
                rng() % 2 == 0 ? uniform(0.0, 60.0) : 0.0;
        }
    }

    // variable renewable with an hourly profile
    int wind = add_gen(sc, {.id = "wind",
                            .var_cost = uniform(0.0, 5.0),
                            .annualized_cost = uniform(6e4, 1.2e5),
                            .elcc = uniform(0.2, 0.5),
                            .all_re = true,
                            .re = true,
                            .wind = true});
    for (int e = 0; e < epochs; ++e) {
        for (int z = 0; z < zones; ++z) {
            HourSeries hs;
            hs.values.resize(static_cast<std::size_t>(hours));
            for (int h = 0; h < hours; ++h) {
                hs.values[static_cast<std::size_t>(h)] =
                    std::min(1.0, std::max(0.05, 0.5 + 0.45 * std::sin(h * 0.7 + z + seed % 7)));
            }
            sc.gen_techs[static_cast<std::size_t>(wind)].cap_factor[sc.ez(e, z)] = hs;
        }
    }
    if (rng() % 2 == 0) {
        int solar = add_gen(sc, {.id = "solar",
                                 .var_cost = 0.0,
                                 .annualized_cost = uniform(5e4, 1.0e5),
                                 .elcc = uniform(0.2, 0.6),
                                 .all_re = true,
                                 .re = true,
                                 .pv = true});
        for (int e = 0; e < epochs; ++e) {
            for (int z = 0; z < zones; ++z) {
                HourSeries hs;
                hs.values.resize(static_cast<std::size_t>(hours));
                for (int h = 0; h < hours; ++h) {
                    double day = std::sin(3.14159265358979 * ((h % 24) / 24.0));
                    hs.values[static_cast<std::size_t>(h)] = std::max(0.0, day * uniform(0.6, 1.0));
                }
                sc.gen_techs[static_cast<std::size_t>(solar)].cap_factor[sc.ez(e, z)] = hs;
            }
        }
    }

    if (rng() % 2 == 0) {
        add_stor(sc, {.id = "battery",
                      .duration_hours = 4.0,
                      .rte = 0.85,
                      .annualized_cost = uniform(4e4, 9e4),
                      .elcc = uniform(0.5, 1.0)});
    }

    // connected corridor tree plus occasional extra edge
    for (int z = 1; z < zones; ++z) {
        int parent = static_cast<int>(rng() % static_cast<std::uint64_t>(z));
        add_corridor(sc, sc.zones[static_cast<std::size_t>(parent)].id, sc.zones[static_cast<std::size_t>(z)].id,
                     uniform(0.0, 120.0), uniform(50.0, 300.0), 2076.0 * uniform(0.5, 2.0), 0.1);
    }
    if (zones > 2 && rng() % 2 == 0) {
        add_corridor(sc, sc.zones[0].id, sc.zones[static_cast<std::size_t>(zones - 1)].id, uniform(0.0, 80.0),
                     uniform(50.0, 300.0), 2076.0 * uniform(0.5, 2.0), 0.1);
    }

    // zone/state structure: one state per zone, occasionally shared
    for (int z = 0; z < zones; ++z) {
        std::string st = "S" + std::to_string(z);
        sc.zones[static_cast<std::size_t>(z)].state_shares[st] = 1.0;
        sc.zones[static_cast<std::size_t>(z)].state_overlap[st] = 1;
        if (z > 0 && rng() % 3 == 0) {
            std::string prev = "S" + std::to_string(z - 1);
            sc.zones[static_cast<std::size_t>(z)].state_shares[prev] = 0.0;
            sc.zones[static_cast<std::size_t>(z)].state_overlap[prev] = 1;
        }
    }

    // occasional policies, kept feasible by the unlimited renewable builds
    if (rng() % 2 == 0) {
        double annual = 0.0;
        for (int z = 0; z < zones; ++z) {
            annual += sc.annual_load(0, z);
        }
        for (int e = 0; e < epochs; ++e) {
            sc.policies.regional_rps[{e, "all-re"}] = uniform(0.02, 0.15) * annual;
        }
    }
    if (rng() % 3 == 0) {
        for (int e = 0; e < epochs; ++e) {
            sc.policies.instate_rps[{e, "S0"}] = {uniform(0.05, 0.3), uniform(0.3, 0.9)};
        }
    }
    if (rng() % 3 == 0) {
        for (int e = 0; e < epochs; ++e) {
            sc.policies.capacity_targets[{e, "S0", "storage"}] = uniform(5.0, 30.0);
        }
        if (sc.stor_techs.empty()) {
            add_stor(sc, {.id = "battery", .annualized_cost = uniform(4e4, 9e4)});
        }
    }

    if (rng() % 2 == 0) {
        sc.options.reliability_mode = ReliabilityMode::elcc_market;
        sc.options.rsv = 0.15; // ignored in this mode
        sc.options.cap_target_mw.clear();
        for (int e = 0; e < epochs; ++e) {
            double peak = 0.0;
            for (int z = 0; z < zones; ++z) {
                for (int h = 0; h < hours; ++h) {
                    peak = std::max(peak, sc.load(e, z, h));
                }
            }
            sc.options.cap_target_mw.push_back(peak * zones * uniform(0.8, 1.2));
        }
    }
    if (rng() % 2 == 0) {
        sc.options.queue_limits_enabled = true;
        // limit only the renewables, generously; the firm tech stays open
        for (int z = 0; z < zones; ++z) {
            if (rng() % 2 == 0) {
                sc.gen_techs[static_cast<std::size_t>(wind)].build_limit[static_cast<std::size_t>(z)] =
                    uniform(200.0, 2000.0);
            }
        }
    }
    return sc;
}

} // namespace gridplan::testing
