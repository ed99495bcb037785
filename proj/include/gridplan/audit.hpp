#pragma once

// Solver-independent audit of a plan against the scenario. Every
// constraint family is re-derived here directly from the data and the
// semantic solution arrays, without touching the LP triplets, so an
// emitter bug and an audit bug would have to agree to hide a violation.

#include <cmath>
#include <string>
#include <vector>

#include "gridplan/formulation.hpp"
#include "gridplan/planner.hpp"
#include "gridplan/scenario.hpp"

namespace gridplan {

struct AuditViolation {
    std::string family;
    std::string where;
    double amount = 0.0; // positive violation magnitude after scaling
};

class SolutionAuditor {
  public:
    SolutionAuditor(const Scenario& sc, const OptionsSpec& options, VariantKind kind, const PlanSolution& sol,
                    double tol = 1e-6)
        : sc_(sc), options_(options), kind_(kind), sol_(sol), d_(sol.dims), tol_(tol)
    {
    }

    std::vector<AuditViolation> run()
    {
        violations_.clear();
        check_nonnegative();
        check_generation_limits();
        check_storage();
        if (kind_ != VariantKind::copper_plate) {
            check_transmission();
            check_zonal_balance();
        } else {
            check_regional_balance();
        }
        check_unserved_cap();
        check_credits();
        check_capacity_targets();
        check_reliability();
        check_build_limits();
        return violations_;
    }

  private:
    void fail(const std::string& family, const std::string& where, double amount)
    {
        violations_.push_back({family, where, amount});
    }

    // violation of lhs <= rhs, scaled by 1 + |rhs|
    void le(const std::string& family, const std::string& where, double lhs, double rhs)
    {
        double v = (lhs - rhs) / (1.0 + std::abs(rhs));
        if (v > tol_) {
            fail(family, where, v);
        }
    }
    void eq(const std::string& family, const std::string& where, double lhs, double rhs)
    {
        double v = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
        if (v > tol_) {
            fail(family, where, v);
        }
    }

    double cum_gen_build(int e, int z, int g) const
    {
        double v = 0.0;
        for (int e2 = 0; e2 <= e; ++e2) {
            v += sol_.gen_builds[d_.ezg(e2, z, g)];
        }
        return v;
    }
    double cum_stor_build(int e, int z, int s) const
    {
        double v = 0.0;
        for (int e2 = 0; e2 <= e; ++e2) {
            v += sol_.stor_builds[d_.ezs(e2, z, s)];
        }
        return v;
    }
    double cum_line_build(int e, int l) const
    {
        double v = 0.0;
        for (int e2 = 0; e2 <= e; ++e2) {
            v += sol_.line_builds[d_.el(e2, l)];
        }
        return v;
    }

    std::string loc(int e, int z, int g, int h) const
    {
        std::string s = "e" + std::to_string(e);
        if (z >= 0) {
            s += ",z=" + sc_.zones[static_cast<std::size_t>(z)].id;
        }
        if (g >= 0) {
            s += ",t=" + std::to_string(g);
        }
        if (h >= 0) {
            s += ",h=" + std::to_string(h);
        }
        return s;
    }

    void check_nonnegative()
    {
        auto scan = [this](const std::vector<double>& v, const char* family) {
            for (double a : v) {
                if (a < -tol_) {
                    fail(family, "negative value", -a);
                    break;
                }
            }
        };
        scan(sol_.gen_builds, "nonneg/gen_build");
        scan(sol_.stor_builds, "nonneg/stor_build");
        scan(sol_.line_builds, "nonneg/line_build");
        scan(sol_.gen_dispatch, "nonneg/gen_dispatch");
        scan(sol_.stor_discharge, "nonneg/stor_discharge");
        scan(sol_.stor_charge, "nonneg/stor_charge");
        scan(sol_.soc, "nonneg/soc");
        scan(sol_.unserved, "nonneg/unserved");
    }

    void check_generation_limits()
    {
        for (int e = 0; e < d_.E; ++e) {
            for (int z = 0; z < d_.Z; ++z) {
                for (int g = 0; g < d_.G; ++g) {
                    const auto& tech = sc_.gen_techs[static_cast<std::size_t>(g)];
                    double avail = tech.initial_cap[sc_.ez(e, z)] + cum_gen_build(e, z, g);
                    const auto& cf = tech.cap_factor[sc_.ez(e, z)];
                    for (int h = 0; h < sc_.hours(e); ++h) {
                        le("gen_limit", loc(e, z, g, h), sol_.gen_dispatch[d_.ezgh(e, z, g, h)],
                           avail * cf.at(static_cast<std::size_t>(h)));
                    }
                }
            }
        }
    }

    void check_storage()
    {
        for (int e = 0; e < d_.E; ++e) {
            for (int z = 0; z < d_.Z; ++z) {
                for (int s = 0; s < d_.S; ++s) {
                    const auto& st = sc_.stor_techs[static_cast<std::size_t>(s)];
                    double power = st.initial_power[sc_.ez(e, z)] + cum_stor_build(e, z, s);
                    double energy = st.initial_energy[sc_.ez(e, z)] + st.duration_hours * cum_stor_build(e, z, s);
                    double eta = st.round_trip_efficiency;
                    const int H = sc_.hours(e);
                    for (int h = 0; h < H; ++h) {
                        le("stor_discharge_cap", loc(e, z, s, h), sol_.stor_discharge[d_.ezsh(e, z, s, h)], power);
                        le("stor_charge_cap", loc(e, z, s, h), sol_.stor_charge[d_.ezsh(e, z, s, h)], power);
                        le("soc_cap", loc(e, z, s, h), sol_.soc[d_.ezsh(e, z, s, h)], energy);
                        if (h > 0) {
                            eq("soc_step", loc(e, z, s, h), sol_.soc[d_.ezsh(e, z, s, h)],
                               sol_.soc[d_.ezsh(e, z, s, h - 1)] + eta * sol_.stor_charge[d_.ezsh(e, z, s, h)] -
                                   sol_.stor_discharge[d_.ezsh(e, z, s, h)]);
                        }
                    }
                    eq("soc_initial", loc(e, z, s, 0), sol_.soc[d_.ezsh(e, z, s, 0)],
                       0.5 * energy + eta * sol_.stor_charge[d_.ezsh(e, z, s, 0)] -
                           sol_.stor_discharge[d_.ezsh(e, z, s, 0)]);
                    eq("soc_final", loc(e, z, s, H - 1), sol_.soc[d_.ezsh(e, z, s, H - 1)], 0.5 * energy);
                }
            }
        }
    }

    void check_transmission()
    {
        for (int e = 0; e < d_.E; ++e) {
            for (int l = 0; l < d_.L; ++l) {
                const auto& c = sc_.corridors[static_cast<std::size_t>(l)];
                double widen = cum_line_build(e, l);
                for (int h = 0; h < sc_.hours(e); ++h) {
                    double f = sol_.flow[d_.elh(e, l, h)];
                    le("flow_upper", "e" + std::to_string(e) + "," + c.id + ",h=" + std::to_string(h), f,
                       c.cap_forward[static_cast<std::size_t>(e)] + widen);
                    le("flow_lower", "e" + std::to_string(e) + "," + c.id + ",h=" + std::to_string(h),
                       -(c.cap_reverse[static_cast<std::size_t>(e)] + widen), f);
                }
            }
        }
        for (int l = 0; l < d_.L; ++l) {
            const auto& c = sc_.corridors[static_cast<std::size_t>(l)];
            if (c.max_reinforcement_factor) {
                le("reinforcement_cap", c.id, cum_line_build(d_.E - 1, l),
                   *c.max_reinforcement_factor * std::max(c.cap_forward[0], c.cap_reverse[0]));
            }
        }
    }

    void check_zonal_balance()
    {
        const double uplift = 1.0 + options_.effective_rsv();
        for (int e = 0; e < d_.E; ++e) {
            for (int h = 0; h < sc_.hours(e); ++h) {
                for (int z = 0; z < d_.Z; ++z) {
                    double supply = 0.0;
                    for (int g = 0; g < d_.G; ++g) {
                        supply += sol_.gen_dispatch[d_.ezgh(e, z, g, h)];
                    }
                    for (int s = 0; s < d_.S; ++s) {
                        supply += sol_.stor_discharge[d_.ezsh(e, z, s, h)] - sol_.stor_charge[d_.ezsh(e, z, s, h)];
                    }
                    supply += sol_.unserved[d_.ezh(e, z, h)];
                    for (int l = 0; l < d_.L; ++l) {
                        const auto& c = sc_.corridors[static_cast<std::size_t>(l)];
                        if (c.to_index == z) {
                            supply += sol_.flow[d_.elh(e, l, h)];
                        } else if (c.from_index == z) {
                            supply -= sol_.flow[d_.elh(e, l, h)];
                        }
                    }
                    eq("balance", loc(e, z, -1, h), supply, sc_.load(e, z, h) * uplift);
                }
            }
        }
    }

    void check_regional_balance()
    {
        const double uplift = 1.0 + options_.effective_rsv();
        for (int e = 0; e < d_.E; ++e) {
            for (int h = 0; h < sc_.hours(e); ++h) {
                double supply = 0.0;
                double load = 0.0;
                for (int z = 0; z < d_.Z; ++z) {
                    for (int g = 0; g < d_.G; ++g) {
                        supply += sol_.gen_dispatch[d_.ezgh(e, z, g, h)];
                    }
                    for (int s = 0; s < d_.S; ++s) {
                        supply += sol_.stor_discharge[d_.ezsh(e, z, s, h)] - sol_.stor_charge[d_.ezsh(e, z, s, h)];
                    }
                    supply += sol_.unserved[d_.ezh(e, z, h)];
                    load += sc_.load(e, z, h);
                }
                eq("balance_regional", "e" + std::to_string(e) + ",h=" + std::to_string(h), supply, load * uplift);
            }
        }
    }

    void check_unserved_cap()
    {
        for (int e = 0; e < d_.E; ++e) {
            for (int z = 0; z < d_.Z; ++z) {
                for (int h = 0; h < sc_.hours(e); ++h) {
                    le("unserved_cap", loc(e, z, -1, h), sol_.unserved[d_.ezh(e, z, h)], sc_.load(e, z, h));
                }
            }
        }
    }

    void check_credits()
    {
        for (int e = 0; e < d_.E; ++e) {
            for (int z = 0; z < d_.Z; ++z) {
                for (int g = 0; g < d_.G; ++g) {
                    if (!sc_.gen_techs[static_cast<std::size_t>(g)].all_re) {
                        continue;
                    }
                    double annual = 0.0;
                    for (int h = 0; h < sc_.hours(e); ++h) {
                        annual += sol_.gen_dispatch[d_.ezgh(e, z, g, h)];
                    }
                    eq("rec_definition", loc(e, z, g, -1), sol_.rec[d_.ezg(e, z, g)], annual);
                }
            }
        }
        using formulation_detail::rps_classes;
        for (const auto& [key, req] : sc_.policies.regional_rps) {
            const auto& [e, class_name] = key;
            double total = 0.0;
            for (const auto& [name, member] : rps_classes()) {
                if (name != class_name) {
                    continue;
                }
                for (int z = 0; z < d_.Z; ++z) {
                    for (int g = 0; g < d_.G; ++g) {
                        const auto& tech = sc_.gen_techs[static_cast<std::size_t>(g)];
                        if (tech.all_re && tech.*member) {
                            total += sol_.rec[d_.ezg(e, z, g)];
                        }
                    }
                }
            }
            le("rps_regional", "e" + std::to_string(e) + "," + class_name, req, total);
        }
        for (int e = 0; e < d_.E; ++e) {
            for (int z = 0; z < d_.Z; ++z) {
                double factor = 0.0;
                for (const auto& [key, spec] : sc_.policies.instate_rps) {
                    if (key.first == e) {
                        factor += spec.instate_fraction * spec.rps_fraction *
                                  sc_.zones[static_cast<std::size_t>(z)].share_of(key.second);
                    }
                }
                if (factor <= 0.0) {
                    continue;
                }
                double credits = 0.0;
                for (int g = 0; g < d_.G; ++g) {
                    if (sc_.gen_techs[static_cast<std::size_t>(g)].all_re) {
                        credits += sol_.rec[d_.ezg(e, z, g)];
                    }
                }
                le("rps_instate", loc(e, z, -1, -1), sc_.annual_load(e, z) * factor, credits);
            }
        }
    }

    void check_capacity_targets()
    {
        for (const std::string cls : {"offshore-wind", "solar", "storage"}) {
            std::vector<std::string> states = sc_.target_states(cls);
            if (states.empty()) {
                continue;
            }
            std::vector<int> members = target_class_members(sc_, cls);
            const bool storage = cls == "storage";
            const int n = static_cast<int>(states.size());
            for (int e = 0; e < d_.E; ++e) {
                for (int mask = 1; mask < (1 << n); ++mask) {
                    double required = 0.0;
                    for (int b = 0; b < n; ++b) {
                        if (mask & (1 << b)) {
                            auto it = sc_.policies.capacity_targets.find(
                                {e, states[static_cast<std::size_t>(b)], cls});
                            if (it != sc_.policies.capacity_targets.end()) {
                                required += it->second;
                            }
                        }
                    }
                    double capacity = 0.0;
                    for (int z = 0; z < d_.Z; ++z) {
                        bool counted = false;
                        for (int b = 0; b < n && !counted; ++b) {
                            counted = (mask & (1 << b)) &&
                                      sc_.zones[static_cast<std::size_t>(z)].overlaps(states[static_cast<std::size_t>(b)]);
                        }
                        if (!counted) {
                            continue;
                        }
                        for (int m : members) {
                            capacity += storage ? sc_.stor_techs[static_cast<std::size_t>(m)].initial_power[sc_.ez(e, z)] +
                                                      cum_stor_build(e, z, m)
                                                : sc_.gen_techs[static_cast<std::size_t>(m)].initial_cap[sc_.ez(e, z)] +
                                                      cum_gen_build(e, z, m);
                        }
                    }
                    le("capacity_target/" + cls, "e" + std::to_string(e) + ",mask=" + std::to_string(mask),
                       required, capacity);
                }
            }
        }
    }

    void check_reliability()
    {
        if (options_.reliability_mode != ReliabilityMode::elcc_market) {
            return;
        }
        for (int e = 0; e < d_.E; ++e) {
            double accredited = 0.0;
            for (int z = 0; z < d_.Z; ++z) {
                for (int g = 0; g < d_.G; ++g) {
                    const auto& tech = sc_.gen_techs[static_cast<std::size_t>(g)];
                    accredited += tech.elcc[sc_.ez(e, z)] * (tech.initial_cap[sc_.ez(e, z)] + cum_gen_build(e, z, g));
                }
                for (int s = 0; s < d_.S; ++s) {
                    const auto& st = sc_.stor_techs[static_cast<std::size_t>(s)];
                    accredited +=
                        st.elcc[sc_.ez(e, z)] * (st.initial_power[sc_.ez(e, z)] + cum_stor_build(e, z, s));
                }
            }
            le("elcc_target", "e" + std::to_string(e), options_.cap_target_mw[static_cast<std::size_t>(e)],
               accredited);
        }
    }

    void check_build_limits()
    {
        if (!options_.queue_limits_enabled) {
            return;
        }
        for (int z = 0; z < d_.Z; ++z) {
            for (int g = 0; g < d_.G; ++g) {
                const auto& limit = sc_.gen_techs[static_cast<std::size_t>(g)].build_limit[static_cast<std::size_t>(z)];
                if (limit) {
                    le("build_limit_gen", loc(-1, z, g, -1), cum_gen_build(d_.E - 1, z, g), *limit);
                }
            }
            for (int s = 0; s < d_.S; ++s) {
                const auto& limit = sc_.stor_techs[static_cast<std::size_t>(s)].build_limit[static_cast<std::size_t>(z)];
                if (limit) {
                    le("build_limit_stor", loc(-1, z, s, -1), cum_stor_build(d_.E - 1, z, s), *limit);
                }
            }
        }
    }

    const Scenario& sc_;
    const OptionsSpec& options_;
    VariantKind kind_;
    const PlanSolution& sol_;
    Dims d_;
    double tol_;
    std::vector<AuditViolation> violations_;
};

inline std::vector<AuditViolation> audit_solution(const Scenario& sc, const OptionsSpec& options,
                                                  VariantKind kind, const PlanSolution& sol, double tol = 1e-6)
{
    return SolutionAuditor(sc, options, kind, sol, tol).run();
}

} // namespace gridplan
