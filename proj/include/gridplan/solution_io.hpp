#pragma once

// Solution and report serialization: solution.json (builds, objective
// breakdown, statuses), dispatch.csv (long form hourly series), metrics /
// comparison / netload CSVs, and the map-ready plotdata JSON files.
// Doubles are written in shortest round-trip form so identical runs
// produce byte-identical files.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gridplan/csv.hpp"
#include "gridplan/metrics.hpp"
#include "gridplan/planner.hpp"

namespace gridplan {

class SolutionIoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace solution_io_detail {

inline void write_file(const std::string& path, const std::string& contents)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw SolutionIoError("cannot write file: " + path);
    }
    out << contents;
    if (!out) {
        throw SolutionIoError("write failed for: " + path);
    }
}

// nlohmann prints shortest round-trip doubles already; wrap values so the
// layout stays stable
inline nlohmann::json build_array(const std::vector<double>& v)
{
    nlohmann::json j = nlohmann::json::array();
    for (double a : v) {
        j.push_back(a);
    }
    return j;
}

} // namespace solution_io_detail

inline void write_solution_json(const PlanSolution& sol, const Scenario& sc, const std::string& path)
{
    using nlohmann::json;
    const Dims& d = sol.dims;
    json j;
    j["mode"] = to_string(sol.mode);
    j["status"] = to_string(sol.status);
    j["scenario_fingerprint"] = sol.scenario_fingerprint;
    j["objective_usd"] = sol.objective;
    j["breakdown"] = {{"operating", sol.breakdown.operating},
                      {"unserved", sol.breakdown.unserved},
                      {"gen_invest", sol.breakdown.gen_invest},
                      {"stor_invest", sol.breakdown.stor_invest},
                      {"line_invest", sol.breakdown.line_invest}};
    if (sol.stage1_objective) {
        j["stage1_objective_usd"] = *sol.stage1_objective;
    }

    json gen = json::array();
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                double v = sol.gen_builds[d.ezg(e, z, g)];
                if (v != 0.0) {
                    gen.push_back({{"epoch", e},
                                   {"zone", sc.zones[static_cast<std::size_t>(z)].id},
                                   {"tech", sc.gen_techs[static_cast<std::size_t>(g)].id},
                                   {"mw", v}});
                }
            }
        }
    }
    j["gen_builds"] = std::move(gen);
    json stor = json::array();
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int s = 0; s < d.S; ++s) {
                double v = sol.stor_builds[d.ezs(e, z, s)];
                if (v != 0.0) {
                    stor.push_back({{"epoch", e},
                                    {"zone", sc.zones[static_cast<std::size_t>(z)].id},
                                    {"tech", sc.stor_techs[static_cast<std::size_t>(s)].id},
                                    {"mw", v}});
                }
            }
        }
    }
    j["stor_builds"] = std::move(stor);
    json line = json::array();
    for (int e = 0; e < d.E; ++e) {
        for (int l = 0; l < d.L; ++l) {
            double v = sol.line_builds[d.el(e, l)];
            if (v != 0.0) {
                line.push_back(
                    {{"epoch", e}, {"corridor", sc.corridors[static_cast<std::size_t>(l)].id}, {"mw", v}});
            }
        }
    }
    j["line_builds"] = std::move(line);
    solution_io_detail::write_file(path, j.dump(2) + "\n");
}

// builds only; used to feed a transmission-stage export
inline ResourceBuilds read_builds_json(const std::string& path, const Scenario& sc)
{
    std::ifstream in(path);
    if (!in) {
        throw SolutionIoError("cannot open solution file: " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SolutionIoError(path + ": " + std::string(e.what()));
    }
    Dims d(sc);
    ResourceBuilds rb;
    rb.gen.assign(d.n_ezg(), 0.0);
    rb.stor.assign(d.n_ezs(), 0.0);
    for (const auto& entry : j.value("gen_builds", nlohmann::json::array())) {
        int e = entry.at("epoch").get<int>();
        int z = sc.zone_index(entry.at("zone").get<std::string>());
        int g = -1;
        std::string tech = entry.at("tech").get<std::string>();
        for (std::size_t i = 0; i < sc.gen_techs.size(); ++i) {
            if (sc.gen_techs[i].id == tech) {
                g = static_cast<int>(i);
            }
        }
        if (e < 0 || e >= d.E || z < 0 || g < 0) {
            throw SolutionIoError(path + ": build entry does not match the scenario");
        }
        rb.gen[d.ezg(e, z, g)] = entry.at("mw").get<double>();
    }
    for (const auto& entry : j.value("stor_builds", nlohmann::json::array())) {
        int e = entry.at("epoch").get<int>();
        int z = sc.zone_index(entry.at("zone").get<std::string>());
        int s = -1;
        std::string tech = entry.at("tech").get<std::string>();
        for (std::size_t i = 0; i < sc.stor_techs.size(); ++i) {
            if (sc.stor_techs[i].id == tech) {
                s = static_cast<int>(i);
            }
        }
        if (e < 0 || e >= d.E || z < 0 || s < 0) {
            throw SolutionIoError(path + ": build entry does not match the scenario");
        }
        rb.stor[d.ezs(e, z, s)] = entry.at("mw").get<double>();
    }
    return rb;
}

// long form: epoch,entity,series,hour,value
inline void write_dispatch_csv(const PlanSolution& sol, const Scenario& sc, const std::string& path)
{
    const Dims& d = sol.dims;
    std::string s = "epoch,entity,series,hour,value\n";
    auto emit = [&s](int e, const std::string& entity, const std::string& series, int h, double v) {
        s += std::to_string(e) + "," + entity + "," + series + "," + std::to_string(h) + "," + fmt_double(v) +
             "\n";
    };
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            const std::string& zid = sc.zones[static_cast<std::size_t>(z)].id;
            for (int h = 0; h < sc.hours(e); ++h) {
                for (int g = 0; g < d.G; ++g) {
                    emit(e, zid, "gen:" + sc.gen_techs[static_cast<std::size_t>(g)].id, h,
                         sol.gen_dispatch[d.ezgh(e, z, g, h)]);
                }
                for (int st = 0; st < d.S; ++st) {
                    const std::string& sid = sc.stor_techs[static_cast<std::size_t>(st)].id;
                    emit(e, zid, "stor_discharge:" + sid, h, sol.stor_discharge[d.ezsh(e, z, st, h)]);
                    emit(e, zid, "stor_charge:" + sid, h, sol.stor_charge[d.ezsh(e, z, st, h)]);
                    emit(e, zid, "soc:" + sid, h, sol.soc[d.ezsh(e, z, st, h)]);
                }
                emit(e, zid, "unserved", h, sol.unserved[d.ezh(e, z, h)]);
            }
        }
        for (int l = 0; l < d.L; ++l) {
            for (int h = 0; h < sc.hours(e); ++h) {
                emit(e, sc.corridors[static_cast<std::size_t>(l)].id, "flow", h, sol.flow[d.elh(e, l, h)]);
            }
        }
    }
    solution_io_detail::write_file(path, s);
}

inline void write_metrics_csv(const MetricsReport& r, const std::string& path)
{
    std::string s = "metric,value\n";
    s += "npv_system_cost_usd," + fmt_double(r.npv_system_cost) + "\n";
    s += "npv_transmission_cost_usd," + fmt_double(r.npv_transmission_cost) + "\n";
    s += "transmission_gw_miles," + fmt_double(r.transmission_gw_miles) + "\n";
    s += "ue_gwh," + fmt_double(r.ue_gwh) + "\n";
    s += "npv_ue_cost_usd," + fmt_double(r.npv_ue_cost) + "\n";
    s += "ue_share_of_load," + fmt_double(r.ue_share_of_load) + "\n";
    s += "emissions_mt," + fmt_double(r.emissions_mt) + "\n";
    for (const auto& w : r.warnings) {
        s += "# warning: " + w + "\n";
    }
    solution_io_detail::write_file(path, s);
}

inline void write_comparison_csv(const ComparisonTable& t, const std::string& path)
{
    std::string s = "metric,sequential,cooptimized,delta,pct\n";
    for (const auto& row : t.rows) {
        s += row.metric + "," + fmt_double(row.sequential) + "," + fmt_double(row.cooptimized) + "," +
             fmt_double(row.delta()) + "," + fmt_double(row.pct()) + "\n";
    }
    solution_io_detail::write_file(path, s);
}

inline void write_netload_csv(const PlanSolution& sol, const Scenario& sc, const std::string& path)
{
    std::string s = "epoch,zone,avg_net_load_mw\n";
    for (int e = 0; e < sc.num_epochs(); ++e) {
        auto by_zone = net_load_by_zone(sol, sc, e);
        for (const auto& [zone, v] : by_zone) {
            s += std::to_string(e) + "," + zone + "," + fmt_double(v) + "\n";
        }
    }
    solution_io_detail::write_file(path, s);
}

// map-ready JSON: zone coordinates with values, corridor endpoints with
// reinforcement totals; plotting happens elsewhere
inline void write_plotdata(const PlanSolution& sol, const Scenario& sc, const std::string& dir)
{
    using nlohmann::json;
    std::filesystem::create_directories(dir);
    const Dims& d = sol.dims;

    json zones = json::array();
    auto netload = net_load_by_zone(sol, sc, d.E - 1);
    for (int z = 0; z < d.Z; ++z) {
        const auto& zone = sc.zones[static_cast<std::size_t>(z)];
        json jz;
        jz["id"] = zone.id;
        if (zone.lat && zone.lon) {
            jz["lat"] = *zone.lat;
            jz["lon"] = *zone.lon;
        }
        jz["avg_net_load_mw"] = netload.at(zone.id);
        double gen_mw = 0.0, stor_mw = 0.0;
        for (int e = 0; e < d.E; ++e) {
            for (int g = 0; g < d.G; ++g) {
                gen_mw += sol.gen_builds[d.ezg(e, z, g)];
            }
            for (int s = 0; s < d.S; ++s) {
                stor_mw += sol.stor_builds[d.ezs(e, z, s)];
            }
        }
        jz["gen_build_mw"] = gen_mw;
        jz["stor_build_mw"] = stor_mw;
        zones.push_back(std::move(jz));
    }
    json jzones;
    jzones["zones"] = std::move(zones);
    solution_io_detail::write_file((std::filesystem::path(dir) / "zones.json").string(), jzones.dump(2) + "\n");

    json corridors = json::array();
    for (int l = 0; l < d.L; ++l) {
        const auto& c = sc.corridors[static_cast<std::size_t>(l)];
        double built = 0.0;
        for (int e = 0; e < d.E; ++e) {
            built += sol.line_builds[d.el(e, l)];
        }
        json jc;
        jc["id"] = c.id;
        jc["from_zone"] = c.from_zone;
        jc["to_zone"] = c.to_zone;
        jc["length_miles"] = c.length_miles;
        jc["reinforcement_mw"] = built;
        jc["gw_miles"] = built / 1000.0 * c.length_miles;
        corridors.push_back(std::move(jc));
    }
    json jcorr;
    jcorr["corridors"] = std::move(corridors);
    solution_io_detail::write_file((std::filesystem::path(dir) / "corridors.json").string(),
                                   jcorr.dump(2) + "\n");
}

} // namespace gridplan
