#pragma once

// Scenario directory I/O.
//
// A scenario directory contains, all UTF-8 CSV with a header row unless
// noted (hour indices are 0-based, numbers are locale independent):
//
//   epochs.csv            index,start_year_offset,duration_years
//   zones.csv             id,lat,lon                       (lat/lon may be blank)
//   zone_states.csv       zone,state,share,overlap
//   corridors.csv         id,from_zone,to_zone,cap_forward_mw,cap_reverse_mw,
//                         length_miles,overnight_cost_per_mw_mile,
//                         capital_recovery_factor,max_reinforcement_factor
//   gen_techs.csv         tech,epoch,zone,var_cost_per_mwh,overnight_cost_per_mw,
//                         capital_recovery_factor,elcc,emission_t_per_mwh,
//                         build_limit_mw,all_re,re,pv,wind,offshore
//   gen_capacity.csv      epoch,zone,tech,mw               (missing cells are 0)
//   gen_capfactors.csv    epoch,zone,tech,hour,value       (hour '*' = constant;
//                                                           absent series = 1.0)
//   stor_techs.csv        tech,epoch,zone,duration_hours,round_trip_efficiency,
//                         overnight_cost_per_mw,capital_recovery_factor,elcc,
//                         build_limit_mw
//   stor_capacity.csv     epoch,zone,tech,power_mw,energy_mwh
//   load.csv              epoch,zone,hour,mw
//   policies_rps.csv      epoch,policy_class,requirement_mwh
//   policies_instate.csv  epoch,state,rps_fraction,instate_fraction
//   policies_targets.csv  epoch,state,tech_class,target_mw
//   options.json
//
// In gen_techs.csv and stor_techs.csv the zone column may be '*', which
// applies the row to every zone; zone-specific rows override the wildcard.
// A blank build_limit_mw means unlimited. Annualized capital cost is
// overnight cost times the capital recovery factor.

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridplan/csv.hpp"
#include "gridplan/scenario.hpp"

namespace gridplan {

class ScenarioError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string join_path(const std::string& dir, const char* file)
{
    return (std::filesystem::path(dir) / file).string();
}

inline CsvTable read_table(const std::string& dir, const char* file)
{
    std::string path = join_path(dir, file);
    if (!std::filesystem::exists(path)) {
        throw ScenarioError("missing file: " + path);
    }
    try {
        return read_csv(path);
    } catch (const CsvError& e) {
        throw ScenarioError(e.what());
    }
}

inline double num(const CsvTable& t, std::size_t row, int col)
{
    try {
        return parse_double(t.cell(row, col), t.where(row));
    } catch (const CsvError& e) {
        throw ScenarioError(e.what());
    }
}

inline long integer(const CsvTable& t, std::size_t row, int col)
{
    try {
        return parse_int(t.cell(row, col), t.where(row));
    } catch (const CsvError& e) {
        throw ScenarioError(e.what());
    }
}

inline bool flag(const CsvTable& t, std::size_t row, int col)
{
    try {
        return parse_bool01(t.cell(row, col), t.where(row));
    } catch (const CsvError& e) {
        throw ScenarioError(e.what());
    }
}

inline int epoch_of(const Scenario& sc, const CsvTable& t, std::size_t row, int col)
{
    long e = integer(t, row, col);
    if (e < 0 || e >= sc.num_epochs()) {
        throw ScenarioError(t.where(row) + ": unknown epoch " + std::to_string(e));
    }
    return static_cast<int>(e);
}

inline int zone_of(const Scenario& sc, const CsvTable& t, std::size_t row, int col)
{
    const std::string& id = t.cell(row, col);
    int z = sc.zone_index(id);
    if (z < 0) {
        throw ScenarioError(t.where(row) + ": unknown zone '" + id + "'");
    }
    return z;
}

// Per-technology staging for the wildcard / override resolution in
// gen_techs.csv and stor_techs.csv.
struct TechRows {
    std::size_t first_row = 0;
    // (epoch, zone or -1 for '*') -> row index in the table
    std::map<std::pair<int, int>, std::size_t> rows;
};

inline std::map<std::string, TechRows> group_tech_rows(const Scenario& sc, const CsvTable& t,
                                                       std::vector<std::string>& order)
{
    int c_tech = t.require_col("tech");
    int c_epoch = t.require_col("epoch");
    int c_zone = t.require_col("zone");
    std::map<std::string, TechRows> grouped;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& id = t.cell(i, c_tech);
        int e = epoch_of(sc, t, i, c_epoch);
        int z = -1;
        if (t.cell(i, c_zone) != "*") {
            z = zone_of(sc, t, i, c_zone);
        }
        auto [it, inserted] = grouped.try_emplace(id);
        if (inserted) {
            it->second.first_row = i;
            order.push_back(id);
        }
        if (!it->second.rows.emplace(std::make_pair(e, z), i).second) {
            throw ScenarioError(t.where(i) + ": duplicate row for tech '" + id + "'");
        }
    }
    return grouped;
}

// Resolves one numeric field over (epoch, zone) using wildcard rows plus
// zone overrides. Every epoch needs a wildcard row or full zone coverage.
template <typename Fn>
inline std::vector<double> resolve_field(const Scenario& sc, const CsvTable& t, const TechRows& tr,
                                         const std::string& tech, Fn cell_value)
{
    std::vector<double> out(static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones()));
    for (int e = 0; e < sc.num_epochs(); ++e) {
        auto wild = tr.rows.find({e, -1});
        for (int z = 0; z < sc.num_zones(); ++z) {
            auto specific = tr.rows.find({e, z});
            if (specific != tr.rows.end()) {
                out[sc.ez(e, z)] = cell_value(specific->second);
            } else if (wild != tr.rows.end()) {
                out[sc.ez(e, z)] = cell_value(wild->second);
            } else {
                throw ScenarioError(t.file + ": tech '" + tech + "' has no row for epoch " +
                                    std::to_string(e) + ", zone " + sc.zones[static_cast<std::size_t>(z)].id);
            }
        }
    }
    return out;
}

template <typename Fn>
inline std::vector<std::optional<double>> resolve_limit(const Scenario& sc, const CsvTable& t,
                                                        const TechRows& tr, const std::string& tech,
                                                        Fn cell_limit)
{
    // build limits are cumulative over the whole horizon, so they must not
    // vary by epoch
    std::vector<std::optional<double>> out(static_cast<std::size_t>(sc.num_zones()));
    for (int z = 0; z < sc.num_zones(); ++z) {
        bool first = true;
        for (int e = 0; e < sc.num_epochs(); ++e) {
            auto it = tr.rows.find({e, z});
            if (it == tr.rows.end()) {
                it = tr.rows.find({e, -1});
            }
            if (it == tr.rows.end()) {
                continue;
            }
            std::optional<double> v = cell_limit(it->second);
            if (first) {
                out[static_cast<std::size_t>(z)] = v;
                first = false;
            } else if (out[static_cast<std::size_t>(z)] != v) {
                throw ScenarioError(t.file + ": tech '" + tech + "' build limit differs across epochs for zone " +
                                    sc.zones[static_cast<std::size_t>(z)].id);
            }
        }
    }
    return out;
}

} // namespace detail

// Loads and cross-links a scenario directory. hour_limit > 0 truncates
// every epoch to at most that many hours (handy for desk-scale runs of a
// full-year dataset).
inline Scenario load_scenario(const std::string& dir, int hour_limit = 0)
{
    using namespace detail;
    Scenario sc;

    // epochs
    {
        CsvTable t = read_table(dir, "epochs.csv");
        int c_index = t.require_col("index");
        int c_start = t.require_col("start_year_offset");
        int c_dur = t.require_col("duration_years");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            EpochSpec e;
            e.index = static_cast<int>(integer(t, i, c_index));
            e.start_year_offset = static_cast<int>(integer(t, i, c_start));
            e.duration = static_cast<int>(integer(t, i, c_dur));
            sc.epochs.push_back(e);
        }
        if (sc.epochs.empty()) {
            throw ScenarioError(t.file + ": at least one epoch is required");
        }
    }

    // zones
    {
        CsvTable t = read_table(dir, "zones.csv");
        int c_id = t.require_col("id");
        int c_lat = t.require_col("lat");
        int c_lon = t.require_col("lon");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            ZoneSpec z;
            z.id = t.cell(i, c_id);
            if (sc.zone_index(z.id) >= 0) {
                throw ScenarioError(t.where(i) + ": duplicate zone id '" + z.id + "'");
            }
            if (!t.cell(i, c_lat).empty()) {
                z.lat = num(t, i, c_lat);
            }
            if (!t.cell(i, c_lon).empty()) {
                z.lon = num(t, i, c_lon);
            }
            sc.zones.push_back(std::move(z));
        }
        if (sc.zones.empty()) {
            throw ScenarioError(t.file + ": at least one zone is required");
        }
    }

    // zone-state shares and overlap flags
    {
        CsvTable t = read_table(dir, "zone_states.csv");
        int c_zone = t.require_col("zone");
        int c_state = t.require_col("state");
        int c_share = t.require_col("share");
        int c_overlap = t.require_col("overlap");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int z = zone_of(sc, t, i, c_zone);
            const std::string& st = t.cell(i, c_state);
            auto& zone = sc.zones[static_cast<std::size_t>(z)];
            if (zone.state_shares.count(st)) {
                throw ScenarioError(t.where(i) + ": duplicate zone/state pair");
            }
            zone.state_shares[st] = num(t, i, c_share);
            zone.state_overlap[st] = flag(t, i, c_overlap) ? 1 : 0;
        }
    }

    // corridors
    {
        CsvTable t = read_table(dir, "corridors.csv");
        int c_id = t.require_col("id");
        int c_from = t.require_col("from_zone");
        int c_to = t.require_col("to_zone");
        int c_fwd = t.require_col("cap_forward_mw");
        int c_rev = t.require_col("cap_reverse_mw");
        int c_len = t.require_col("length_miles");
        int c_cost = t.require_col("overnight_cost_per_mw_mile");
        int c_crf = t.require_col("capital_recovery_factor");
        int c_reinf = t.require_col("max_reinforcement_factor");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            CorridorSpec c;
            c.id = t.cell(i, c_id);
            if (!seen.insert(c.id).second) {
                throw ScenarioError(t.where(i) + ": duplicate corridor id '" + c.id + "'");
            }
            c.from_zone = t.cell(i, c_from);
            c.to_zone = t.cell(i, c_to);
            c.from_index = sc.zone_index(c.from_zone);
            c.to_index = sc.zone_index(c.to_zone);
            if (c.from_index < 0) {
                throw ScenarioError(t.where(i) + ": unknown zone '" + c.from_zone + "'");
            }
            if (c.to_index < 0) {
                throw ScenarioError(t.where(i) + ": unknown zone '" + c.to_zone + "'");
            }
            c.cap_forward.assign(static_cast<std::size_t>(sc.num_epochs()), num(t, i, c_fwd));
            c.cap_reverse.assign(static_cast<std::size_t>(sc.num_epochs()), num(t, i, c_rev));
            c.length_miles = num(t, i, c_len);
            c.overnight_cost_per_mw_mile = num(t, i, c_cost);
            c.capital_recovery_factor = num(t, i, c_crf);
            if (!t.cell(i, c_reinf).empty()) {
                c.max_reinforcement_factor = num(t, i, c_reinf);
            }
            sc.corridors.push_back(std::move(c));
        }
    }

    // loads; establishes the hour count of each epoch
    {
        CsvTable t = read_table(dir, "load.csv");
        int c_epoch = t.require_col("epoch");
        int c_zone = t.require_col("zone");
        int c_hour = t.require_col("hour");
        int c_mw = t.require_col("mw");
        std::map<std::pair<int, int>, std::map<long, double>> cells;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int e = epoch_of(sc, t, i, c_epoch);
            int z = zone_of(sc, t, i, c_zone);
            long h = integer(t, i, c_hour);
            if (h < 0) {
                throw ScenarioError(t.where(i) + ": negative hour index");
            }
            if (!cells[{e, z}].emplace(h, num(t, i, c_mw)).second) {
                throw ScenarioError(t.where(i) + ": duplicate load cell");
            }
        }
        sc.loads.hours.assign(static_cast<std::size_t>(sc.num_epochs()), 0);
        sc.loads.mw.assign(static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones()), {});
        for (int e = 0; e < sc.num_epochs(); ++e) {
            int expected = -1;
            for (int z = 0; z < sc.num_zones(); ++z) {
                auto it = cells.find({e, z});
                if (it == cells.end()) {
                    throw ScenarioError(t.file + ": missing load series for epoch " + std::to_string(e) +
                                        ", zone " + sc.zones[static_cast<std::size_t>(z)].id);
                }
                const auto& series = it->second;
                int n = static_cast<int>(series.size());
                if (series.begin()->first != 0 || series.rbegin()->first != n - 1) {
                    throw ScenarioError(t.file + ": load hours for epoch " + std::to_string(e) + ", zone " +
                                        sc.zones[static_cast<std::size_t>(z)].id + " are not contiguous from 0");
                }
                if (expected < 0) {
                    expected = n;
                } else if (n != expected) {
                    throw ScenarioError(t.file + ": load series length mismatch in epoch " + std::to_string(e) +
                                        " (zone " + sc.zones[static_cast<std::size_t>(z)].id + " has " +
                                        std::to_string(n) + " hours, expected " + std::to_string(expected) + ")");
                }
                auto& out = sc.loads.mw[sc.ez(e, z)];
                out.reserve(static_cast<std::size_t>(n));
                for (const auto& [h, v] : series) {
                    out.push_back(v);
                }
            }
            sc.loads.hours[static_cast<std::size_t>(e)] = expected;
        }
        if (hour_limit > 0) {
            for (int e = 0; e < sc.num_epochs(); ++e) {
                int h = std::min(sc.loads.hours[static_cast<std::size_t>(e)], hour_limit);
                sc.loads.hours[static_cast<std::size_t>(e)] = h;
                for (int z = 0; z < sc.num_zones(); ++z) {
                    sc.loads.mw[sc.ez(e, z)].resize(static_cast<std::size_t>(h));
                }
            }
        }
    }

    // generation technologies
    {
        CsvTable t = read_table(dir, "gen_techs.csv");
        int c_var = t.require_col("var_cost_per_mwh");
        int c_capex = t.require_col("overnight_cost_per_mw");
        int c_crf = t.require_col("capital_recovery_factor");
        int c_elcc = t.require_col("elcc");
        int c_emis = t.require_col("emission_t_per_mwh");
        int c_limit = t.require_col("build_limit_mw");
        int c_allre = t.require_col("all_re");
        int c_re = t.require_col("re");
        int c_pv = t.require_col("pv");
        int c_wind = t.require_col("wind");
        int c_ofs = t.require_col("offshore");
        std::vector<std::string> order;
        auto grouped = group_tech_rows(sc, t, order);
        for (const auto& id : order) {
            const TechRows& tr = grouped.at(id);
            GenTechSpec g;
            g.id = id;
            g.all_re = flag(t, tr.first_row, c_allre);
            g.re = flag(t, tr.first_row, c_re);
            g.pv = flag(t, tr.first_row, c_pv);
            g.wind = flag(t, tr.first_row, c_wind);
            g.offshore = flag(t, tr.first_row, c_ofs);
            g.emission_rate = num(t, tr.first_row, c_emis);
            for (const auto& [key, row] : tr.rows) {
                if (flag(t, row, c_allre) != g.all_re || flag(t, row, c_re) != g.re ||
                    flag(t, row, c_pv) != g.pv || flag(t, row, c_wind) != g.wind ||
                    flag(t, row, c_ofs) != g.offshore || num(t, row, c_emis) != g.emission_rate) {
                    throw ScenarioError(t.where(row) + ": static fields differ across rows of tech '" + id + "'");
                }
            }
            g.var_cost = resolve_field(sc, t, tr, id, [&](std::size_t r) { return num(t, r, c_var); });
            g.annualized_cost = resolve_field(sc, t, tr, id, [&](std::size_t r) {
                return num(t, r, c_capex) * num(t, r, c_crf);
            });
            g.elcc = resolve_field(sc, t, tr, id, [&](std::size_t r) { return num(t, r, c_elcc); });
            g.build_limit = resolve_limit(sc, t, tr, id, [&](std::size_t r) -> std::optional<double> {
                if (t.cell(r, c_limit).empty()) {
                    return std::nullopt;
                }
                return num(t, r, c_limit);
            });
            g.initial_cap.assign(static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones()), 0.0);
            g.cap_factor.assign(static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones()), HourSeries{});
            sc.gen_techs.push_back(std::move(g));
        }
    }

    auto gen_index = [&sc](const CsvTable& t, std::size_t row, int col) {
        const std::string& id = t.cell(row, col);
        for (std::size_t i = 0; i < sc.gen_techs.size(); ++i) {
            if (sc.gen_techs[i].id == id) {
                return static_cast<int>(i);
            }
        }
        throw ScenarioError(t.where(row) + ": unknown generation tech '" + id + "'");
    };

    // initial generation capacity
    {
        CsvTable t = read_table(dir, "gen_capacity.csv");
        int c_epoch = t.require_col("epoch");
        int c_zone = t.require_col("zone");
        int c_tech = t.require_col("tech");
        int c_mw = t.require_col("mw");
        std::set<std::tuple<int, int, int>> seen;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int e = epoch_of(sc, t, i, c_epoch);
            int z = zone_of(sc, t, i, c_zone);
            int g = gen_index(t, i, c_tech);
            if (!seen.insert({e, z, g}).second) {
                throw ScenarioError(t.where(i) + ": duplicate capacity cell");
            }
            sc.gen_techs[static_cast<std::size_t>(g)].initial_cap[sc.ez(e, z)] = num(t, i, c_mw);
        }
    }

    // hourly capacity factors
    {
        CsvTable t = read_table(dir, "gen_capfactors.csv");
        int c_epoch = t.require_col("epoch");
        int c_zone = t.require_col("zone");
        int c_tech = t.require_col("tech");
        int c_hour = t.require_col("hour");
        int c_value = t.require_col("value");
        std::map<std::tuple<int, int, int>, std::map<long, double>> series;
        std::map<std::tuple<int, int, int>, double> constants;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int e = epoch_of(sc, t, i, c_epoch);
            int z = zone_of(sc, t, i, c_zone);
            int g = gen_index(t, i, c_tech);
            if (t.cell(i, c_hour) == "*") {
                if (!constants.emplace(std::make_tuple(e, z, g), num(t, i, c_value)).second) {
                    throw ScenarioError(t.where(i) + ": duplicate constant capacity factor");
                }
                continue;
            }
            long h = integer(t, i, c_hour);
            if (!series[{e, z, g}].emplace(h, num(t, i, c_value)).second) {
                throw ScenarioError(t.where(i) + ": duplicate capacity factor cell");
            }
        }
        for (const auto& [key, v] : constants) {
            if (series.count(key)) {
                throw ScenarioError(t.file + ": capacity factor series mixes '*' and per-hour rows");
            }
            auto [e, z, g] = key;
            sc.gen_techs[static_cast<std::size_t>(g)].cap_factor[sc.ez(e, z)] = HourSeries{v, {}};
        }
        for (const auto& [key, values] : series) {
            auto [e, z, g] = key;
            int full = static_cast<int>(values.size());
            if (values.begin()->first != 0 || values.rbegin()->first != full - 1) {
                throw ScenarioError(t.file + ": capacity factor hours are not contiguous from 0 for tech '" +
                                    sc.gen_techs[static_cast<std::size_t>(g)].id + "'");
            }
            int h_used = sc.hours(e);
            if (full < h_used) {
                throw ScenarioError(t.file + ": capacity factor series for tech '" +
                                    sc.gen_techs[static_cast<std::size_t>(g)].id + "' has " + std::to_string(full) +
                                    " hours, epoch " + std::to_string(e) + " needs " + std::to_string(h_used));
            }
            HourSeries hs;
            hs.values.reserve(static_cast<std::size_t>(h_used));
            for (const auto& [h, v] : values) {
                if (static_cast<int>(h) >= h_used) {
                    break;
                }
                hs.values.push_back(v);
            }
            sc.gen_techs[static_cast<std::size_t>(g)].cap_factor[sc.ez(e, z)] = std::move(hs);
        }
    }

    // storage technologies
    {
        CsvTable t = read_table(dir, "stor_techs.csv");
        int c_dur = t.require_col("duration_hours");
        int c_rte = t.require_col("round_trip_efficiency");
        int c_capex = t.require_col("overnight_cost_per_mw");
        int c_crf = t.require_col("capital_recovery_factor");
        int c_elcc = t.require_col("elcc");
        int c_limit = t.require_col("build_limit_mw");
        std::vector<std::string> order;
        auto grouped = group_tech_rows(sc, t, order);
        for (const auto& id : order) {
            const TechRows& tr = grouped.at(id);
            StorTechSpec s;
            s.id = id;
            s.duration_hours = num(t, tr.first_row, c_dur);
            s.round_trip_efficiency = num(t, tr.first_row, c_rte);
            for (const auto& [key, row] : tr.rows) {
                if (num(t, row, c_dur) != s.duration_hours || num(t, row, c_rte) != s.round_trip_efficiency) {
                    throw ScenarioError(t.where(row) + ": static fields differ across rows of tech '" + id + "'");
                }
            }
            s.annualized_cost = resolve_field(sc, t, tr, id, [&](std::size_t r) {
                return num(t, r, c_capex) * num(t, r, c_crf);
            });
            s.elcc = resolve_field(sc, t, tr, id, [&](std::size_t r) { return num(t, r, c_elcc); });
            s.build_limit = resolve_limit(sc, t, tr, id, [&](std::size_t r) -> std::optional<double> {
                if (t.cell(r, c_limit).empty()) {
                    return std::nullopt;
                }
                return num(t, r, c_limit);
            });
            s.initial_power.assign(static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones()), 0.0);
            s.initial_energy.assign(static_cast<std::size_t>(sc.num_epochs()) * static_cast<std::size_t>(sc.num_zones()), 0.0);
            sc.stor_techs.push_back(std::move(s));
        }
    }

    auto stor_index = [&sc](const CsvTable& t, std::size_t row, int col) {
        const std::string& id = t.cell(row, col);
        for (std::size_t i = 0; i < sc.stor_techs.size(); ++i) {
            if (sc.stor_techs[i].id == id) {
                return static_cast<int>(i);
            }
        }
        throw ScenarioError(t.where(row) + ": unknown storage tech '" + id + "'");
    };

    // initial storage capacity
    {
        CsvTable t = read_table(dir, "stor_capacity.csv");
        int c_epoch = t.require_col("epoch");
        int c_zone = t.require_col("zone");
        int c_tech = t.require_col("tech");
        int c_power = t.require_col("power_mw");
        int c_energy = t.require_col("energy_mwh");
        std::set<std::tuple<int, int, int>> seen;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int e = epoch_of(sc, t, i, c_epoch);
            int z = zone_of(sc, t, i, c_zone);
            int s = stor_index(t, i, c_tech);
            if (!seen.insert({e, z, s}).second) {
                throw ScenarioError(t.where(i) + ": duplicate capacity cell");
            }
            sc.stor_techs[static_cast<std::size_t>(s)].initial_power[sc.ez(e, z)] = num(t, i, c_power);
            sc.stor_techs[static_cast<std::size_t>(s)].initial_energy[sc.ez(e, z)] = num(t, i, c_energy);
        }
    }

    // policies
    {
        CsvTable t = read_table(dir, "policies_rps.csv");
        int c_epoch = t.require_col("epoch");
        int c_class = t.require_col("policy_class");
        int c_req = t.require_col("requirement_mwh");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int e = epoch_of(sc, t, i, c_epoch);
            if (!sc.policies.regional_rps.emplace(std::make_pair(e, t.cell(i, c_class)), num(t, i, c_req)).second) {
                throw ScenarioError(t.where(i) + ": duplicate regional requirement");
            }
        }
    }
    {
        CsvTable t = read_table(dir, "policies_instate.csv");
        int c_epoch = t.require_col("epoch");
        int c_state = t.require_col("state");
        int c_rps = t.require_col("rps_fraction");
        int c_inst = t.require_col("instate_fraction");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int e = epoch_of(sc, t, i, c_epoch);
            InstateRpsSpec spec{num(t, i, c_rps), num(t, i, c_inst)};
            if (!sc.policies.instate_rps.emplace(std::make_pair(e, t.cell(i, c_state)), spec).second) {
                throw ScenarioError(t.where(i) + ": duplicate in-state requirement");
            }
        }
    }
    {
        CsvTable t = read_table(dir, "policies_targets.csv");
        int c_epoch = t.require_col("epoch");
        int c_state = t.require_col("state");
        int c_class = t.require_col("tech_class");
        int c_mw = t.require_col("target_mw");
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            int e = epoch_of(sc, t, i, c_epoch);
            auto key = std::make_tuple(e, t.cell(i, c_state), t.cell(i, c_class));
            if (!sc.policies.capacity_targets.emplace(key, num(t, i, c_mw)).second) {
                throw ScenarioError(t.where(i) + ": duplicate capacity target");
            }
        }
    }

    // options
    {
        std::string path = join_path(dir, "options.json");
        std::ifstream in(path);
        if (!in) {
            throw ScenarioError("missing file: " + path);
        }
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ScenarioError(path + ": " + e.what());
        }
        static const std::set<std::string> known = {
            "reliability_mode", "rsv", "cap_target_mw", "queue_limits_enabled",
            "voll_usd_per_mwh", "discount_rate"};
        for (const auto& [key, _] : j.items()) {
            if (!known.count(key)) {
                throw ScenarioError(path + ": unknown option '" + key + "'");
            }
        }
        auto& op = sc.options;
        if (j.contains("reliability_mode")) {
            std::string m = j["reliability_mode"].get<std::string>();
            if (m == "elcc_market") {
                op.reliability_mode = ReliabilityMode::elcc_market;
            } else if (m == "reserve_margin") {
                op.reliability_mode = ReliabilityMode::reserve_margin;
            } else {
                throw ScenarioError(path + ": unknown reliability_mode '" + m + "'");
            }
        }
        if (j.contains("rsv")) {
            op.rsv = j["rsv"].get<double>();
        }
        if (j.contains("cap_target_mw")) {
            op.cap_target_mw = j["cap_target_mw"].get<std::vector<double>>();
        }
        if (j.contains("queue_limits_enabled")) {
            op.queue_limits_enabled = j["queue_limits_enabled"].get<bool>();
        }
        if (j.contains("voll_usd_per_mwh")) {
            op.voll = j["voll_usd_per_mwh"].get<double>();
        }
        if (j.contains("discount_rate")) {
            op.discount_rate = j["discount_rate"].get<double>();
        }
    }

    return sc;
}

// ---------------------------------------------------------------------------
// Canonical serialization. save_scenario(load_scenario(dir)) round-trips to
// an identical Scenario; the canonical byte stream also backs the scenario
// fingerprint used to pair solutions with their inputs.

namespace detail {

inline std::string opt_str(const std::optional<double>& v)
{
    return v ? fmt_double(*v) : std::string();
}

} // namespace detail

struct ScenarioFiles {
    // file name -> contents
    std::map<std::string, std::string> files;
};

inline ScenarioFiles serialize_scenario(const Scenario& sc)
{
    using detail::opt_str;
    ScenarioFiles out;

    {
        std::string s = "index,start_year_offset,duration_years\n";
        for (const auto& e : sc.epochs) {
            s += std::to_string(e.index) + "," + std::to_string(e.start_year_offset) + "," +
                 std::to_string(e.duration) + "\n";
        }
        out.files["epochs.csv"] = std::move(s);
    }
    {
        std::string s = "id,lat,lon\n";
        for (const auto& z : sc.zones) {
            s += z.id + "," + (z.lat ? fmt_double(*z.lat) : "") + "," + (z.lon ? fmt_double(*z.lon) : "") + "\n";
        }
        out.files["zones.csv"] = std::move(s);
    }
    {
        std::string s = "zone,state,share,overlap\n";
        for (const auto& z : sc.zones) {
            for (const auto& [st, overlap] : z.state_overlap) {
                s += z.id + "," + st + "," + fmt_double(z.share_of(st)) + "," + std::to_string(overlap) + "\n";
            }
        }
        out.files["zone_states.csv"] = std::move(s);
    }
    {
        std::string s = "id,from_zone,to_zone,cap_forward_mw,cap_reverse_mw,length_miles,"
                        "overnight_cost_per_mw_mile,capital_recovery_factor,max_reinforcement_factor\n";
        for (const auto& c : sc.corridors) {
            s += c.id + "," + c.from_zone + "," + c.to_zone + "," + fmt_double(c.cap_forward[0]) + "," +
                 fmt_double(c.cap_reverse[0]) + "," + fmt_double(c.length_miles) + "," +
                 fmt_double(c.overnight_cost_per_mw_mile) + "," + fmt_double(c.capital_recovery_factor) + "," +
                 opt_str(c.max_reinforcement_factor) + "\n";
        }
        out.files["corridors.csv"] = std::move(s);
    }
    {
        // annualized cost round-trips through overnight cost with crf = 1
        std::string s = "tech,epoch,zone,var_cost_per_mwh,overnight_cost_per_mw,capital_recovery_factor,"
                        "elcc,emission_t_per_mwh,build_limit_mw,all_re,re,pv,wind,offshore\n";
        for (const auto& g : sc.gen_techs) {
            for (int e = 0; e < sc.num_epochs(); ++e) {
                for (int z = 0; z < sc.num_zones(); ++z) {
                    std::size_t i = sc.ez(e, z);
                    s += g.id + "," + std::to_string(e) + "," + sc.zones[static_cast<std::size_t>(z)].id + "," +
                         fmt_double(g.var_cost[i]) + "," + fmt_double(g.annualized_cost[i]) + ",1," +
                         fmt_double(g.elcc[i]) + "," + fmt_double(g.emission_rate) + "," +
                         opt_str(g.build_limit[static_cast<std::size_t>(z)]) + "," + (g.all_re ? "1" : "0") + "," +
                         (g.re ? "1" : "0") + "," + (g.pv ? "1" : "0") + "," + (g.wind ? "1" : "0") + "," +
                         (g.offshore ? "1" : "0") + "\n";
                }
            }
        }
        out.files["gen_techs.csv"] = std::move(s);
    }
    {
        std::string s = "epoch,zone,tech,mw\n";
        for (const auto& g : sc.gen_techs) {
            for (int e = 0; e < sc.num_epochs(); ++e) {
                for (int z = 0; z < sc.num_zones(); ++z) {
                    double v = g.initial_cap[sc.ez(e, z)];
                    if (v != 0.0) {
                        s += std::to_string(e) + "," + sc.zones[static_cast<std::size_t>(z)].id + "," + g.id + "," +
                             fmt_double(v) + "\n";
                    }
                }
            }
        }
        out.files["gen_capacity.csv"] = std::move(s);
    }
    {
        std::string s = "epoch,zone,tech,hour,value\n";
        for (const auto& g : sc.gen_techs) {
            for (int e = 0; e < sc.num_epochs(); ++e) {
                for (int z = 0; z < sc.num_zones(); ++z) {
                    const auto& cf = g.cap_factor[sc.ez(e, z)];
                    std::string prefix = std::to_string(e) + "," + sc.zones[static_cast<std::size_t>(z)].id + "," + g.id + ",";
                    if (cf.is_constant()) {
                        if (cf.constant != 1.0) {
                            s += prefix + "*," + fmt_double(cf.constant) + "\n";
                        }
                    } else {
                        for (std::size_t h = 0; h < cf.values.size(); ++h) {
                            s += prefix + std::to_string(h) + "," + fmt_double(cf.values[h]) + "\n";
                        }
                    }
                }
            }
        }
        out.files["gen_capfactors.csv"] = std::move(s);
    }
    {
        std::string s = "tech,epoch,zone,duration_hours,round_trip_efficiency,overnight_cost_per_mw,"
                        "capital_recovery_factor,elcc,build_limit_mw\n";
        for (const auto& st : sc.stor_techs) {
            for (int e = 0; e < sc.num_epochs(); ++e) {
                for (int z = 0; z < sc.num_zones(); ++z) {
                    std::size_t i = sc.ez(e, z);
                    s += st.id + "," + std::to_string(e) + "," + sc.zones[static_cast<std::size_t>(z)].id + "," +
                         fmt_double(st.duration_hours) + "," + fmt_double(st.round_trip_efficiency) + "," +
                         fmt_double(st.annualized_cost[i]) + ",1," + fmt_double(st.elcc[i]) + "," +
                         opt_str(st.build_limit[static_cast<std::size_t>(z)]) + "\n";
                }
            }
        }
        out.files["stor_techs.csv"] = std::move(s);
    }
    {
        std::string s = "epoch,zone,tech,power_mw,energy_mwh\n";
        for (const auto& st : sc.stor_techs) {
            for (int e = 0; e < sc.num_epochs(); ++e) {
                for (int z = 0; z < sc.num_zones(); ++z) {
                    std::size_t i = sc.ez(e, z);
                    if (st.initial_power[i] != 0.0 || st.initial_energy[i] != 0.0) {
                        s += std::to_string(e) + "," + sc.zones[static_cast<std::size_t>(z)].id + "," + st.id + "," +
                             fmt_double(st.initial_power[i]) + "," + fmt_double(st.initial_energy[i]) + "\n";
                    }
                }
            }
        }
        out.files["stor_capacity.csv"] = std::move(s);
    }
    {
        std::string s = "epoch,zone,hour,mw\n";
        for (int e = 0; e < sc.num_epochs(); ++e) {
            for (int z = 0; z < sc.num_zones(); ++z) {
                const auto& series = sc.loads.mw[sc.ez(e, z)];
                for (std::size_t h = 0; h < series.size(); ++h) {
                    s += std::to_string(e) + "," + sc.zones[static_cast<std::size_t>(z)].id + "," + std::to_string(h) +
                         "," + fmt_double(series[h]) + "\n";
                }
            }
        }
        out.files["load.csv"] = std::move(s);
    }
    {
        std::string s = "epoch,policy_class,requirement_mwh\n";
        for (const auto& [key, req] : sc.policies.regional_rps) {
            s += std::to_string(key.first) + "," + key.second + "," + fmt_double(req) + "\n";
        }
        out.files["policies_rps.csv"] = std::move(s);
    }
    {
        std::string s = "epoch,state,rps_fraction,instate_fraction\n";
        for (const auto& [key, spec] : sc.policies.instate_rps) {
            s += std::to_string(key.first) + "," + key.second + "," + fmt_double(spec.rps_fraction) + "," +
                 fmt_double(spec.instate_fraction) + "\n";
        }
        out.files["policies_instate.csv"] = std::move(s);
    }
    {
        std::string s = "epoch,state,tech_class,target_mw\n";
        for (const auto& [key, mw] : sc.policies.capacity_targets) {
            s += std::to_string(std::get<0>(key)) + "," + std::get<1>(key) + "," + std::get<2>(key) + "," +
                 fmt_double(mw) + "\n";
        }
        out.files["policies_targets.csv"] = std::move(s);
    }
    {
        nlohmann::json j;
        j["reliability_mode"] = to_string(sc.options.reliability_mode);
        j["rsv"] = sc.options.rsv;
        if (!sc.options.cap_target_mw.empty()) {
            j["cap_target_mw"] = sc.options.cap_target_mw;
        }
        j["queue_limits_enabled"] = sc.options.queue_limits_enabled;
        j["voll_usd_per_mwh"] = sc.options.voll;
        j["discount_rate"] = sc.options.discount_rate;
        out.files["options.json"] = j.dump(2) + "\n";
    }
    return out;
}

inline void save_scenario(const Scenario& sc, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    ScenarioFiles files = serialize_scenario(sc);
    for (const auto& [name, contents] : files.files) {
        std::ofstream out(detail::join_path(dir, name.c_str()), std::ios::binary);
        if (!out) {
            throw ScenarioError("cannot write file: " + detail::join_path(dir, name.c_str()));
        }
        out << contents;
    }
}

// FNV-1a over the canonical serialization; pairs solutions with inputs.
inline std::uint64_t scenario_fingerprint(const Scenario& sc)
{
    ScenarioFiles files = serialize_scenario(sc);
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [name, contents] : files.files) {
        mix(name);
        mix(contents);
    }
    return h;
}

} // namespace gridplan
