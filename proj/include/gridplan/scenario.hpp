#pragma once

// Domain data model for multi-stage, multi-zonal generation / storage /
// transmission capacity expansion studies. A Scenario is loaded from a
// directory of CSV files (scenario_io.hpp), validated once, and treated as
// immutable afterwards.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridplan {

struct EpochSpec {
    int index = 0;
    int start_year_offset = 0; // first year of the epoch, investment year
    int duration = 1;          // years the epoch stands in for

    // final year of the epoch, the modeled operating year
    int operating_year_offset() const { return start_year_offset + duration - 1; }

    bool operator==(const EpochSpec&) const = default;
};

struct ZoneSpec {
    std::string id;
    std::optional<double> lat;
    std::optional<double> lon;
    std::map<std::string, double> state_shares; // state -> fraction of this zone's load in the state
    std::map<std::string, int> state_overlap;   // state -> 0/1 geographic overlap

    double share_of(const std::string& state) const
    {
        auto it = state_shares.find(state);
        return it == state_shares.end() ? 0.0 : it->second;
    }
    int overlaps(const std::string& state) const
    {
        auto it = state_overlap.find(state);
        return it == state_overlap.end() ? 0 : it->second;
    }

    bool operator==(const ZoneSpec&) const = default;
};

struct CorridorSpec {
    std::string id;
    std::string from_zone;
    std::string to_zone;
    int from_index = -1; // resolved zone indices
    int to_index = -1;
    std::vector<double> cap_forward; // MW per epoch, flow limit in the from->to direction
    std::vector<double> cap_reverse; // MW per epoch, flow limit in the to->from direction
    double length_miles = 0.0;
    double overnight_cost_per_mw_mile = 0.0;
    double capital_recovery_factor = 0.0;
    std::optional<double> max_reinforcement_factor; // optional cap on cumulative reinforcement

    // annualized reinforcement cost in $/MW-year for the whole corridor
    double annualized_cost_per_mw() const
    {
        return overnight_cost_per_mw_mile * length_miles * capital_recovery_factor;
    }

    bool operator==(const CorridorSpec&) const = default;
};

// Hourly series that is either a constant or one value per hour.
struct HourSeries {
    double constant = 1.0;
    std::vector<double> values; // empty -> constant applies to every hour

    bool is_constant() const { return values.empty(); }
    double at(std::size_t h) const { return values.empty() ? constant : values[h]; }

    bool operator==(const HourSeries&) const = default;
};

struct GenTechSpec {
    std::string id;
    bool all_re = false;   // counts toward technology-neutral renewable credits
    bool re = false;       // solar + wind subset
    bool pv = false;       // solar subset
    bool wind = false;     // wind subset (on- and offshore)
    bool offshore = false; // offshore wind, used for state capacity targets
    double emission_rate = 0.0; // tons CO2 per MWh generated

    // resolved per (epoch, zone); index e * Z + z
    std::vector<double> var_cost;       // $/MWh
    std::vector<double> annualized_cost; // $/MW-year, overnight cost x capital recovery factor
    std::vector<double> elcc;           // accredited fraction of nameplate
    std::vector<double> initial_cap;    // MW existing at the start of the epoch
    std::vector<std::optional<double>> build_limit; // per zone, cumulative MW cap; nullopt = unlimited
    std::vector<HourSeries> cap_factor; // per (epoch, zone)

    bool operator==(const GenTechSpec&) const = default;
};

struct StorTechSpec {
    std::string id;
    double duration_hours = 0.0;      // converts power capacity to energy capacity for new builds
    double round_trip_efficiency = 1; // applied on charging

    std::vector<double> annualized_cost; // $/MW-year per (epoch, zone)
    std::vector<double> elcc;            // per (epoch, zone)
    std::vector<double> initial_power;   // MW per (epoch, zone)
    std::vector<double> initial_energy;  // MWh per (epoch, zone)
    std::vector<std::optional<double>> build_limit; // per zone

    bool operator==(const StorTechSpec&) const = default;
};

struct LoadSeries {
    std::vector<int> hours;                       // hour count per epoch
    std::vector<std::vector<double>> mw;          // index e * Z + z -> hourly MW
    bool operator==(const LoadSeries&) const = default;
};

struct InstateRpsSpec {
    double rps_fraction = 0.0;     // share of annual load that must be renewable
    double instate_fraction = 0.0; // share of that requirement that must be met in-state
    bool operator==(const InstateRpsSpec&) const = default;
};

struct PolicySpec {
    // (epoch, policy class) -> MWh requirement; classes: all-re, re, pv, wind
    std::map<std::pair<int, std::string>, double> regional_rps;
    // (epoch, state) -> in-state requirement
    std::map<std::pair<int, std::string>, InstateRpsSpec> instate_rps;
    // (epoch, state, tech class) -> MW; classes: offshore-wind, solar, storage
    std::map<std::tuple<int, std::string, std::string>, double> capacity_targets;

    bool operator==(const PolicySpec&) const = default;
};

enum class ReliabilityMode { elcc_market, reserve_margin };

struct OptionsSpec {
    ReliabilityMode reliability_mode = ReliabilityMode::reserve_margin;
    double rsv = 0.15;                 // hourly reserve uplift, ignored in elcc_market mode
    std::vector<double> cap_target_mw; // per epoch, required in elcc_market mode
    bool queue_limits_enabled = false;
    double voll = 5000.0;              // $/MWh penalty on unserved energy
    double discount_rate = 0.072;

    // the capacity market replaces the hourly reserve uplift
    double effective_rsv() const
    {
        return reliability_mode == ReliabilityMode::elcc_market ? 0.0 : rsv;
    }

    bool operator==(const OptionsSpec&) const = default;
};

inline const char* to_string(ReliabilityMode m)
{
    return m == ReliabilityMode::elcc_market ? "elcc_market" : "reserve_margin";
}

struct ValidationViolation {
    std::string where;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationViolation> violations;
    bool ok() const { return violations.empty(); }
    std::string to_string() const
    {
        std::string out;
        for (const auto& v : violations) {
            out += v.where + ": " + v.message + "\n";
        }
        return out;
    }
};

struct Scenario {
    std::vector<EpochSpec> epochs;
    std::vector<ZoneSpec> zones;
    std::vector<CorridorSpec> corridors;
    std::vector<GenTechSpec> gen_techs;
    std::vector<StorTechSpec> stor_techs;
    LoadSeries loads;
    PolicySpec policies;
    OptionsSpec options;

    bool operator==(const Scenario&) const = default;

    int num_epochs() const { return static_cast<int>(epochs.size()); }
    int num_zones() const { return static_cast<int>(zones.size()); }

    std::size_t ez(int e, int z) const { return static_cast<std::size_t>(e) * zones.size() + static_cast<std::size_t>(z); }

    int hours(int e) const { return loads.hours[static_cast<std::size_t>(e)]; }

    // last modeled year, end of the investment recovery window
    int horizon_end_year() const { return epochs.back().operating_year_offset(); }

    int zone_index(const std::string& id) const
    {
        for (std::size_t z = 0; z < zones.size(); ++z) {
            if (zones[z].id == id) {
                return static_cast<int>(z);
            }
        }
        return -1;
    }

    double load(int e, int z, int h) const { return loads.mw[ez(e, z)][static_cast<std::size_t>(h)]; }

    double annual_load(int e, int z) const
    {
        const auto& series = loads.mw[ez(e, z)];
        double sum = 0.0;
        for (double v : series) {
            sum += v;
        }
        return sum;
    }

    // all states mentioned anywhere, sorted
    std::vector<std::string> states() const
    {
        std::set<std::string> s;
        for (const auto& zone : zones) {
            for (const auto& [st, _] : zone.state_overlap) {
                s.insert(st);
            }
            for (const auto& [st, _] : zone.state_shares) {
                s.insert(st);
            }
        }
        return {s.begin(), s.end()};
    }

    // states that carry a capacity target for the given technology class,
    // in sorted order
    std::vector<std::string> target_states(const std::string& tech_class) const
    {
        std::set<std::string> s;
        for (const auto& [key, mw] : policies.capacity_targets) {
            if (std::get<2>(key) == tech_class && mw > 0.0) {
                s.insert(std::get<1>(key));
            }
        }
        return {s.begin(), s.end()};
    }
};

namespace detail {

inline void check_range(ValidationReport& r, const std::string& where, double v, double lo, double hi,
                        const std::string& what)
{
    if (!(v >= lo && v <= hi)) {
        r.violations.push_back({where, what + " = " + std::to_string(v) + " outside [" + std::to_string(lo) +
                                           ", " + std::to_string(hi) + "]"});
    }
}

inline void check_nonneg(ValidationReport& r, const std::string& where, double v, const std::string& what)
{
    if (!(v >= 0.0)) {
        r.violations.push_back({where, what + " = " + std::to_string(v) + " must be >= 0"});
    }
}

} // namespace detail

// Checks every data invariant and reports all violations with their
// location. Violations are data, not errors; an empty report means the
// scenario is internally consistent.
inline ValidationReport validate(const Scenario& sc)
{
    using detail::check_nonneg;
    using detail::check_range;
    ValidationReport r;

    // epochs: ordered, contiguous, nonempty durations
    for (std::size_t i = 0; i < sc.epochs.size(); ++i) {
        const auto& ep = sc.epochs[i];
        std::string where = "epochs[" + std::to_string(i) + "]";
        if (ep.index != static_cast<int>(i)) {
            r.violations.push_back({where, "epoch index " + std::to_string(ep.index) + " out of order"});
        }
        if (ep.duration < 1) {
            r.violations.push_back({where, "duration must be >= 1 year"});
        }
        if (i > 0) {
            const auto& prev = sc.epochs[i - 1];
            if (ep.start_year_offset != prev.start_year_offset + prev.duration) {
                r.violations.push_back({where, "epochs are not contiguous"});
            }
        }
    }

    // zones
    for (const auto& zone : sc.zones) {
        std::string where = "zones[" + zone.id + "]";
        for (const auto& [st, share] : zone.state_shares) {
            check_range(r, where, share, 0.0, 1.0, "state share for " + st);
            if (share > 0.0 && zone.overlaps(st) != 1) {
                r.violations.push_back({where, "state " + st + " has load share but overlap flag is 0"});
            }
        }
    }

    // corridors
    for (const auto& c : sc.corridors) {
        std::string where = "corridors[" + c.id + "]";
        if (c.from_zone == c.to_zone) {
            r.violations.push_back({where, "from_zone equals to_zone"});
        }
        if (!(c.length_miles > 0.0)) {
            r.violations.push_back({where, "length must be > 0"});
        }
        check_nonneg(r, where, c.overnight_cost_per_mw_mile, "overnight cost");
        check_nonneg(r, where, c.capital_recovery_factor, "capital recovery factor");
        for (int e = 0; e < sc.num_epochs(); ++e) {
            check_nonneg(r, where, c.cap_forward[static_cast<std::size_t>(e)], "forward cap");
            check_nonneg(r, where, c.cap_reverse[static_cast<std::size_t>(e)], "reverse cap");
        }
    }

    // generation technologies
    for (const auto& g : sc.gen_techs) {
        std::string base = "gen_techs[" + g.id + "]";
        check_nonneg(r, base, g.emission_rate, "emission rate");
        if ((g.re || g.pv || g.wind) && !g.all_re) {
            r.violations.push_back({base, "renewable subclass flag set without all-re membership"});
        }
        for (int e = 0; e < sc.num_epochs(); ++e) {
            for (int z = 0; z < sc.num_zones(); ++z) {
                std::string where = base + " epoch " + std::to_string(e) + " zone " + sc.zones[static_cast<std::size_t>(z)].id;
                std::size_t i = sc.ez(e, z);
                check_nonneg(r, where, g.var_cost[i], "variable cost");
                check_nonneg(r, where, g.annualized_cost[i], "annualized capital cost");
                check_range(r, where, g.elcc[i], 0.0, 1.0, "elcc");
                check_nonneg(r, where, g.initial_cap[i], "initial capacity");
                const auto& cf = g.cap_factor[i];
                if (cf.is_constant()) {
                    check_range(r, where, cf.constant, 0.0, 1.0, "capacity factor");
                } else {
                    for (std::size_t h = 0; h < cf.values.size(); ++h) {
                        if (!(cf.values[h] >= 0.0 && cf.values[h] <= 1.0)) {
                            r.violations.push_back({where + " hour " + std::to_string(h),
                                                    "capacity factor " + std::to_string(cf.values[h]) +
                                                        " outside [0, 1]"});
                        }
                    }
                }
            }
        }
        for (int z = 0; z < sc.num_zones(); ++z) {
            if (g.build_limit[static_cast<std::size_t>(z)] && *g.build_limit[static_cast<std::size_t>(z)] < 0.0) {
                r.violations.push_back({base + " zone " + sc.zones[static_cast<std::size_t>(z)].id,
                                        "build limit must be >= 0"});
            }
        }
    }

    // storage technologies
    for (const auto& s : sc.stor_techs) {
        std::string base = "stor_techs[" + s.id + "]";
        if (!(s.round_trip_efficiency > 0.0 && s.round_trip_efficiency <= 1.0)) {
            r.violations.push_back({base, "round-trip efficiency must be in (0, 1]"});
        }
        if (!(s.duration_hours > 0.0)) {
            r.violations.push_back({base, "duration must be > 0"});
        }
        for (int e = 0; e < sc.num_epochs(); ++e) {
            for (int z = 0; z < sc.num_zones(); ++z) {
                std::string where = base + " epoch " + std::to_string(e) + " zone " + sc.zones[static_cast<std::size_t>(z)].id;
                std::size_t i = sc.ez(e, z);
                check_nonneg(r, where, s.annualized_cost[i], "annualized capital cost");
                check_range(r, where, s.elcc[i], 0.0, 1.0, "elcc");
                check_nonneg(r, where, s.initial_power[i], "initial power capacity");
                check_nonneg(r, where, s.initial_energy[i], "initial energy capacity");
            }
        }
        for (int z = 0; z < sc.num_zones(); ++z) {
            if (s.build_limit[static_cast<std::size_t>(z)] && *s.build_limit[static_cast<std::size_t>(z)] < 0.0) {
                r.violations.push_back({base + " zone " + sc.zones[static_cast<std::size_t>(z)].id,
                                        "build limit must be >= 0"});
            }
        }
    }

    // loads
    for (int e = 0; e < sc.num_epochs(); ++e) {
        for (int z = 0; z < sc.num_zones(); ++z) {
            const auto& series = sc.loads.mw[sc.ez(e, z)];
            std::string where = "load epoch " + std::to_string(e) + " zone " + sc.zones[static_cast<std::size_t>(z)].id;
            if (static_cast<int>(series.size()) != sc.hours(e)) {
                r.violations.push_back({where, "series length " + std::to_string(series.size()) +
                                                   " != epoch hour count " + std::to_string(sc.hours(e))});
            }
            for (std::size_t h = 0; h < series.size(); ++h) {
                if (!(series[h] >= 0.0)) {
                    r.violations.push_back({where + " hour " + std::to_string(h), "load must be >= 0"});
                }
            }
        }
    }

    // policies
    for (const auto& [key, req] : sc.policies.regional_rps) {
        std::string where = "policies_rps epoch " + std::to_string(key.first) + " class " + key.second;
        check_nonneg(r, where, req, "requirement");
        if (key.second != "all-re" && key.second != "re" && key.second != "pv" && key.second != "wind") {
            r.violations.push_back({where, "unknown policy class '" + key.second + "'"});
        }
    }
    for (const auto& [key, spec] : sc.policies.instate_rps) {
        std::string where = "policies_instate epoch " + std::to_string(key.first) + " state " + key.second;
        check_range(r, where, spec.rps_fraction, 0.0, 1.0, "rps fraction");
        check_range(r, where, spec.instate_fraction, 0.0, 1.0, "instate fraction");
    }
    for (const auto& [key, mw] : sc.policies.capacity_targets) {
        const auto& [e, st, cls] = key;
        std::string where = "policies_targets epoch " + std::to_string(e) + " state " + st + " class " + cls;
        check_nonneg(r, where, mw, "target");
        if (cls != "offshore-wind" && cls != "solar" && cls != "storage") {
            r.violations.push_back({where, "unknown technology class '" + cls + "'"});
        }
        bool overlapped = false;
        for (const auto& zone : sc.zones) {
            if (zone.overlaps(st)) {
                overlapped = true;
                break;
            }
        }
        if (!overlapped && mw > 0.0) {
            r.violations.push_back({where, "target state " + st + " overlaps no zone"});
        }
    }
    for (const char* cls : {"offshore-wind", "solar", "storage"}) {
        if (sc.target_states(cls).size() > 16) {
            r.violations.push_back({std::string("policies_targets class ") + cls,
                                    "more than 16 target states; the subset constraint count would be 2^n - 1"});
        }
    }

    // options
    const auto& op = sc.options;
    check_nonneg(r, "options", op.rsv, "rsv");
    if (!(op.voll > 0.0)) {
        r.violations.push_back({"options", "voll must be > 0"});
    }
    check_nonneg(r, "options", op.discount_rate, "discount_rate");
    if (op.reliability_mode == ReliabilityMode::elcc_market &&
        op.cap_target_mw.size() != sc.epochs.size()) {
        r.violations.push_back({"options", "elcc_market mode requires one cap_target_mw entry per epoch"});
    }
    for (double t : op.cap_target_mw) {
        check_nonneg(r, "options", t, "cap_target_mw");
    }

    return r;
}

} // namespace gridplan
