#pragma once

// Comparison metrics over plan solutions: NPV cost and its transmission
// share, cumulative reinforcement in GW-miles, unserved-energy reliability
// metrics, emissions, and average net load by zone. The modeled operating
// year of an epoch stands in for every year of the epoch, so physical
// quantities (energy, emissions) scale by the epoch duration while NPV
// quantities use the discounted epoch weight.

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridplan/discount.hpp"
#include "gridplan/planner.hpp"
#include "gridplan/scenario.hpp"

namespace gridplan {

class MetricsError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline double transmission_gw_miles(const PlanSolution& sol, const Scenario& sc)
{
    const Dims& d = sol.dims;
    double total = 0.0;
    for (int l = 0; l < d.L; ++l) {
        double built_mw = 0.0;
        for (int e = 0; e < d.E; ++e) {
            built_mw += sol.line_builds[d.el(e, l)];
        }
        total += (built_mw / 1000.0) * sc.corridors[static_cast<std::size_t>(l)].length_miles;
    }
    return total;
}

struct ReliabilityMetrics {
    double ue_gwh = 0.0;      // operating-year unserved energy scaled by epoch duration
    double npv_ue_cost = 0.0; // discounted penalty cost
    double ue_share = 0.0;    // unserved energy over load, duration weighted
};

inline ReliabilityMetrics reliability_metrics(const PlanSolution& sol, const Scenario& sc,
                                              const OptionsSpec& options)
{
    const Dims& d = sol.dims;
    ReliabilityMetrics out;
    double ue_mwh = 0.0;
    double load_mwh = 0.0;
    for (int e = 0; e < d.E; ++e) {
        double w = epoch_weight(options.discount_rate, sc.epochs[e]);
        double dur = sc.epochs[e].duration;
        double epoch_ue = 0.0;
        double epoch_load = 0.0;
        for (int z = 0; z < d.Z; ++z) {
            for (int h = 0; h < sc.hours(e); ++h) {
                epoch_ue += sol.unserved[d.ezh(e, z, h)];
                epoch_load += sc.load(e, z, h);
            }
        }
        ue_mwh += dur * epoch_ue;
        load_mwh += dur * epoch_load;
        out.npv_ue_cost += epoch_ue * options.voll * w;
    }
    out.ue_gwh = ue_mwh / 1000.0;
    out.ue_share = load_mwh > 0.0 ? ue_mwh / load_mwh : 0.0;
    return out;
}

// physical tons (no discounting): dispatch x emission rate, with the
// operating year standing in for the epoch's years
inline double emissions_mt(const PlanSolution& sol, const Scenario& sc)
{
    const Dims& d = sol.dims;
    double tons = 0.0;
    for (int e = 0; e < d.E; ++e) {
        double dur = sc.epochs[e].duration;
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                double rate = sc.gen_techs[static_cast<std::size_t>(g)].emission_rate;
                if (rate == 0.0) {
                    continue;
                }
                double annual = 0.0;
                for (int h = 0; h < sc.hours(e); ++h) {
                    annual += sol.gen_dispatch[d.ezgh(e, z, g, h)];
                }
                tons += dur * annual * rate;
            }
        }
    }
    return tons / 1e6;
}

// average over the epoch's hours of load + storage charge - generation -
// storage discharge - unserved energy; positive means the zone imports
inline std::map<std::string, double> net_load_by_zone(const PlanSolution& sol, const Scenario& sc, int epoch)
{
    const Dims& d = sol.dims;
    std::map<std::string, double> out;
    for (int z = 0; z < d.Z; ++z) {
        double acc = 0.0;
        for (int h = 0; h < sc.hours(epoch); ++h) {
            double v = sc.load(epoch, z, h) - sol.unserved[d.ezh(epoch, z, h)];
            for (int s = 0; s < d.S; ++s) {
                acc += sol.stor_charge[d.ezsh(epoch, z, s, h)] - sol.stor_discharge[d.ezsh(epoch, z, s, h)];
            }
            for (int g = 0; g < d.G; ++g) {
                v -= sol.gen_dispatch[d.ezgh(epoch, z, g, h)];
            }
            acc += v;
        }
        out[sc.zones[static_cast<std::size_t>(z)].id] = acc / sc.hours(epoch);
    }
    return out;
}

struct MetricsReport {
    double npv_system_cost = 0.0;
    double npv_transmission_cost = 0.0;
    double transmission_gw_miles = 0.0;
    double ue_gwh = 0.0;
    double npv_ue_cost = 0.0;
    double ue_share_of_load = 0.0;
    double emissions_mt = 0.0;
    std::map<std::string, double> net_load_final_epoch; // average MW per zone
    std::vector<std::string> warnings;
};

inline MetricsReport compute_metrics(const PlanSolution& sol, const Scenario& sc, const OptionsSpec& options)
{
    if (sol.scenario_fingerprint != scenario_fingerprint(sc)) {
        throw MetricsError("solution does not belong to this scenario (fingerprint mismatch)");
    }
    MetricsReport r;
    r.npv_system_cost = sol.objective;
    r.npv_transmission_cost = sol.breakdown.line_invest;
    r.transmission_gw_miles = transmission_gw_miles(sol, sc);
    ReliabilityMetrics rel = reliability_metrics(sol, sc, options);
    r.ue_gwh = rel.ue_gwh;
    r.npv_ue_cost = rel.npv_ue_cost;
    r.ue_share_of_load = rel.ue_share;
    r.emissions_mt = emissions_mt(sol, sc);
    r.net_load_final_epoch = net_load_by_zone(sol, sc, sc.num_epochs() - 1);
    bool any_rate = false;
    for (const auto& g : sc.gen_techs) {
        any_rate = any_rate || g.emission_rate > 0.0;
    }
    if (!any_rate && !sc.gen_techs.empty()) {
        r.warnings.push_back("no emission rates in scenario; emissions reported as 0");
    }
    return r;
}

struct ComparisonRow {
    std::string metric;
    double sequential = 0.0;
    double cooptimized = 0.0;

    double delta() const { return cooptimized - sequential; }
    double pct() const { return sequential != 0.0 ? 100.0 * delta() / std::abs(sequential) : 0.0; }
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

inline ComparisonTable compare(const PlanSolution& seq, const PlanSolution& coopt, const Scenario& sc,
                               const OptionsSpec& options)
{
    std::uint64_t fp = scenario_fingerprint(sc);
    if (seq.scenario_fingerprint != fp || coopt.scenario_fingerprint != fp) {
        throw MetricsError("cannot compare solutions from different scenarios (fingerprint mismatch)");
    }
    MetricsReport a = compute_metrics(seq, sc, options);
    MetricsReport b = compute_metrics(coopt, sc, options);
    ComparisonTable t;
    t.rows.push_back({"npv_system_cost_usd", a.npv_system_cost, b.npv_system_cost});
    t.rows.push_back({"npv_transmission_cost_usd", a.npv_transmission_cost, b.npv_transmission_cost});
    t.rows.push_back({"transmission_gw_miles", a.transmission_gw_miles, b.transmission_gw_miles});
    t.rows.push_back({"ue_gwh", a.ue_gwh, b.ue_gwh});
    t.rows.push_back({"npv_ue_cost_usd", a.npv_ue_cost, b.npv_ue_cost});
    t.rows.push_back({"ue_share_of_load", a.ue_share_of_load, b.ue_share_of_load});
    t.rows.push_back({"emissions_mt", a.emissions_mt, b.emissions_mt});
    return t;
}

inline std::string comparison_to_text(const ComparisonTable& t)
{
    std::ostringstream os;
    os << "metric                          sequential      co-optimized    delta           pct\n";
    for (const auto& r : t.rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-30s %15.6g %15.6g %15.6g %9.3f%%\n", r.metric.c_str(), r.sequential,
                      r.cooptimized, r.delta(), r.pct());
        os << buf;
    }
    return os.str();
}

} // namespace gridplan
