#pragma once

// Translates a validated Scenario into a LinearProgram for one of the
// three program variants:
//
//   cooptimized   generation, storage, and transmission expansion with
//                 zonal power balances and corridor flows
//   copper_plate  resource expansion only: no flow or reinforcement
//                 variables, no corridor rows, one regional balance per
//                 epoch-hour
//   tep_fixed     the cooptimized program with the resource build columns
//                 pinned (lb = ub) to a previously solved plan, leaving
//                 transmission as the only expansion lever
//
// Row and column counts per family are closed-form in the scenario
// dimensions (E epochs, Z zones, G generation techs of which R are
// renewable-credit eligible, S storage techs, L corridors, H_e hours):
//
//   columns: builds E*Z*G + E*Z*S [+ E*L], dispatch sum_e H_e*(Z*G + 3*Z*S
//            [+ L] + Z), credits E*Z*R
//   rows:    generation sum_e H_e*Z*G; storage 3*sum_e H_e*Z*S +
//            sum_e (H_e-1)*Z*S + 2*E*Z*S; transmission 2*sum_e H_e*L
//            [+ corridors with a reinforcement cap]; balance sum_e H_e*Z
//            (zonal) or sum_e H_e (copper plate); credits E*Z*R; regional
//            RPS = #requirement entries; in-state RPS = #(e,z) with a
//            positive requirement factor; capacity targets
//            E*(2^n_class - 1) per class with n_class target states;
//            reliability E in elcc_market mode; build limits = #finite
//            limits when queue limits are on
//
// Unserved energy is bounded by load through column bounds rather than
// explicit rows.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridplan/discount.hpp"
#include "gridplan/lp.hpp"
#include "gridplan/scenario.hpp"
#include "gridplan/variable_index.hpp"

namespace gridplan {

class FormulationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class VariantKind { cooptimized, copper_plate, tep_fixed };

inline const char* to_string(VariantKind k)
{
    switch (k) {
    case VariantKind::cooptimized: return "cooptimized";
    case VariantKind::copper_plate: return "copper_plate";
    default: return "tep_fixed";
    }
}

// Resource builds keyed by the Dims flat layout; used to pin tep_fixed.
struct ResourceBuilds {
    std::vector<double> gen;  // Dims::ezg
    std::vector<double> stor; // Dims::ezs
};

struct BuildVariant {
    VariantKind kind = VariantKind::cooptimized;
    std::optional<ResourceBuilds> fixed_builds; // tep_fixed only

    static BuildVariant cooptimized() { return {VariantKind::cooptimized, std::nullopt}; }
    static BuildVariant copper_plate() { return {VariantKind::copper_plate, std::nullopt}; }
    static BuildVariant tep_fixed(ResourceBuilds builds)
    {
        return {VariantKind::tep_fixed, std::move(builds)};
    }
};

struct BuiltProgram {
    LinearProgram lp;
    VariableIndex vars;
    RowIndex rows;
    Dims dims;
};

// names kept short; the LP writer sanitizes them for export

namespace formulation_detail {

inline std::string nm(const char* tag, std::initializer_list<std::string> parts)
{
    std::string s = tag;
    s += '[';
    bool first = true;
    for (const auto& p : parts) {
        if (!first) {
            s += ',';
        }
        s += p;
        first = false;
    }
    s += ']';
    return s;
}

inline const std::vector<std::pair<std::string, bool GenTechSpec::*>>& rps_classes()
{
    static const std::vector<std::pair<std::string, bool GenTechSpec::*>> classes = {
        {"all-re", &GenTechSpec::all_re},
        {"re", &GenTechSpec::re},
        {"pv", &GenTechSpec::pv},
        {"wind", &GenTechSpec::wind},
    };
    return classes;
}

inline int rps_class_id(const std::string& name)
{
    const auto& classes = rps_classes();
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i].first == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

} // namespace formulation_detail

inline bool has_flow_network(VariantKind kind)
{
    return kind != VariantKind::copper_plate;
}

inline void create_variables(LinearProgram& lp, VariableIndex& vars, const Scenario& sc,
                             const BuildVariant& variant)
{
    using formulation_detail::nm;
    const Dims d(sc);
    auto es = [](int v) { return std::to_string(v); };

    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                int col = lp.add_column(nm("Xg", {es(e), sc.zones[z].id, sc.gen_techs[g].id}), 0.0, kInf, 0.0);
                vars.add_at({VarKind::gen_build, e, z, g, -1}, col);
            }
        }
    }
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int s = 0; s < d.S; ++s) {
                int col = lp.add_column(nm("Xs", {es(e), sc.zones[z].id, sc.stor_techs[s].id}), 0.0, kInf, 0.0);
                vars.add_at({VarKind::stor_build, e, z, s, -1}, col);
            }
        }
    }
    if (has_flow_network(variant.kind)) {
        for (int e = 0; e < d.E; ++e) {
            for (int l = 0; l < d.L; ++l) {
                int col = lp.add_column(nm("Xl", {es(e), sc.corridors[l].id}), 0.0, kInf, 0.0);
                vars.add_at({VarKind::line_build, e, l, -1, -1}, col);
            }
        }
    }
    for (int e = 0; e < d.E; ++e) {
        for (int h = 0; h < sc.hours(e); ++h) {
            for (int z = 0; z < d.Z; ++z) {
                for (int g = 0; g < d.G; ++g) {
                    int col = lp.add_column(nm("Qg", {es(e), sc.zones[z].id, sc.gen_techs[g].id, es(h)}), 0.0,
                                            kInf, 0.0);
                    vars.add_at({VarKind::gen_dispatch, e, z, g, h}, col);
                }
                for (int s = 0; s < d.S; ++s) {
                    int col = lp.add_column(nm("Qs", {es(e), sc.zones[z].id, sc.stor_techs[s].id, es(h)}), 0.0,
                                            kInf, 0.0);
                    vars.add_at({VarKind::stor_discharge, e, z, s, h}, col);
                    col = lp.add_column(nm("Cs", {es(e), sc.zones[z].id, sc.stor_techs[s].id, es(h)}), 0.0, kInf,
                                        0.0);
                    vars.add_at({VarKind::stor_charge, e, z, s, h}, col);
                    col = lp.add_column(nm("SOC", {es(e), sc.zones[z].id, sc.stor_techs[s].id, es(h)}), 0.0, kInf,
                                        0.0);
                    vars.add_at({VarKind::soc, e, z, s, h}, col);
                }
                // unserved energy can never exceed the hour's load
                int col = lp.add_column(nm("UE", {es(e), sc.zones[z].id, es(h)}), 0.0, sc.load(e, z, h), 0.0);
                vars.add_at({VarKind::unserved, e, z, h, -1}, col);
            }
            if (has_flow_network(variant.kind)) {
                for (int l = 0; l < d.L; ++l) {
                    int col = lp.add_column(nm("FL", {es(e), sc.corridors[l].id, es(h)}), -kInf, kInf, 0.0);
                    vars.add_at({VarKind::flow, e, l, -1, h}, col);
                }
            }
        }
    }
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                if (sc.gen_techs[g].all_re) {
                    int col =
                        lp.add_column(nm("REC", {es(e), sc.zones[z].id, sc.gen_techs[g].id}), 0.0, kInf, 0.0);
                    vars.add_at({VarKind::rec, e, z, g, -1}, col);
                }
            }
        }
    }
}

// operating costs carry the epoch weight; capital carries the
// remaining-horizon discounted annualized cost
inline void emit_objective(LinearProgram& lp, const VariableIndex& vars, const Scenario& sc,
                           const BuildVariant& variant, const OptionsSpec& options)
{
    const Dims d(sc);
    const double r = options.discount_rate;
    const int horizon = sc.horizon_end_year();
    std::vector<double> weight(static_cast<std::size_t>(d.E));
    for (int e = 0; e < d.E; ++e) {
        weight[static_cast<std::size_t>(e)] = epoch_weight(r, sc.epochs[e]);
    }

    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                lp.set_objective(vars.at({VarKind::gen_build, e, z, g, -1}),
                                 discounted_investment_cost(sc.gen_techs[g].annualized_cost[sc.ez(e, z)],
                                                            sc.epochs[e], horizon, r));
            }
            for (int s = 0; s < d.S; ++s) {
                lp.set_objective(vars.at({VarKind::stor_build, e, z, s, -1}),
                                 discounted_investment_cost(sc.stor_techs[s].annualized_cost[sc.ez(e, z)],
                                                            sc.epochs[e], horizon, r));
            }
        }
        if (has_flow_network(variant.kind)) {
            for (int l = 0; l < d.L; ++l) {
                lp.set_objective(vars.at({VarKind::line_build, e, l, -1, -1}),
                                 discounted_investment_cost(sc.corridors[l].annualized_cost_per_mw(),
                                                            sc.epochs[e], horizon, r));
            }
        }
        for (int h = 0; h < sc.hours(e); ++h) {
            for (int z = 0; z < d.Z; ++z) {
                for (int g = 0; g < d.G; ++g) {
                    lp.set_objective(vars.at({VarKind::gen_dispatch, e, z, g, h}),
                                     sc.gen_techs[g].var_cost[sc.ez(e, z)] * weight[static_cast<std::size_t>(e)]);
                }
                lp.set_objective(vars.at({VarKind::unserved, e, z, h, -1}),
                                 options.voll * weight[static_cast<std::size_t>(e)]);
            }
        }
    }
}

// dispatch below available capacity, with builds from this and every
// earlier epoch derated by the hour's capacity factor
inline void emit_generation_limits(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows,
                                   const Scenario& sc)
{
    using formulation_detail::nm;
    const Dims d(sc);
    auto es = [](int v) { return std::to_string(v); };
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                const auto& cf = sc.gen_techs[g].cap_factor[sc.ez(e, z)];
                double cap = sc.gen_techs[g].initial_cap[sc.ez(e, z)];
                for (int h = 0; h < sc.hours(e); ++h) {
                    double f = cf.at(static_cast<std::size_t>(h));
                    int row = lp.add_row(nm("cap_g", {es(e), sc.zones[z].id, sc.gen_techs[g].id, es(h)}),
                                         RowSense::le, cap * f);
                    rows.add_at({RowKind::gen_limit, e, z, g, h}, row);
                    lp.set_coeff(row, vars.at({VarKind::gen_dispatch, e, z, g, h}), 1.0);
                    for (int e2 = 0; e2 <= e; ++e2) {
                        lp.set_coeff(row, vars.at({VarKind::gen_build, e2, z, g, -1}), -f);
                    }
                }
            }
        }
    }
}

// power bounds on charge and discharge, the energy cap on the state of
// charge, the hourly state-of-charge recursion with the charging
// efficiency, and the half-full boundary anchors at both ends of the year
inline void emit_storage(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows, const Scenario& sc)
{
    using formulation_detail::nm;
    const Dims d(sc);
    auto es = [](int v) { return std::to_string(v); };
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int s = 0; s < d.S; ++s) {
                const auto& st = sc.stor_techs[s];
                const double cap = st.initial_power[sc.ez(e, z)];
                const double ecap = st.initial_energy[sc.ez(e, z)];
                const double eta = st.round_trip_efficiency;
                const int H = sc.hours(e);
                for (int h = 0; h < H; ++h) {
                    int row = lp.add_row(nm("cap_sd", {es(e), sc.zones[z].id, st.id, es(h)}), RowSense::le, cap);
                    rows.add_at({RowKind::stor_discharge_cap, e, z, s, h}, row);
                    lp.set_coeff(row, vars.at({VarKind::stor_discharge, e, z, s, h}), 1.0);
                    for (int e2 = 0; e2 <= e; ++e2) {
                        lp.set_coeff(row, vars.at({VarKind::stor_build, e2, z, s, -1}), -1.0);
                    }

                    row = lp.add_row(nm("cap_sc", {es(e), sc.zones[z].id, st.id, es(h)}), RowSense::le, cap);
                    rows.add_at({RowKind::stor_charge_cap, e, z, s, h}, row);
                    lp.set_coeff(row, vars.at({VarKind::stor_charge, e, z, s, h}), 1.0);
                    for (int e2 = 0; e2 <= e; ++e2) {
                        lp.set_coeff(row, vars.at({VarKind::stor_build, e2, z, s, -1}), -1.0);
                    }

                    row = lp.add_row(nm("cap_soc", {es(e), sc.zones[z].id, st.id, es(h)}), RowSense::le, ecap);
                    rows.add_at({RowKind::soc_cap, e, z, s, h}, row);
                    lp.set_coeff(row, vars.at({VarKind::soc, e, z, s, h}), 1.0);
                    for (int e2 = 0; e2 <= e; ++e2) {
                        lp.set_coeff(row, vars.at({VarKind::stor_build, e2, z, s, -1}), -st.duration_hours);
                    }

                    if (h > 0) {
                        row = lp.add_row(nm("soc_step", {es(e), sc.zones[z].id, st.id, es(h)}), RowSense::eq, 0.0);
                        rows.add_at({RowKind::soc_step, e, z, s, h}, row);
                        lp.set_coeff(row, vars.at({VarKind::soc, e, z, s, h}), 1.0);
                        lp.set_coeff(row, vars.at({VarKind::soc, e, z, s, h - 1}), -1.0);
                        lp.set_coeff(row, vars.at({VarKind::stor_charge, e, z, s, h}), -eta);
                        lp.set_coeff(row, vars.at({VarKind::stor_discharge, e, z, s, h}), 1.0);
                    }
                }
                // the year starts and ends half full; the hour-0 row folds
                // the recursion into the start anchor
                int row = lp.add_row(nm("soc_0", {es(e), sc.zones[z].id, st.id}), RowSense::eq, 0.5 * ecap);
                rows.add_at({RowKind::soc_initial, e, z, s, -1}, row);
                lp.set_coeff(row, vars.at({VarKind::soc, e, z, s, 0}), 1.0);
                lp.set_coeff(row, vars.at({VarKind::stor_charge, e, z, s, 0}), -eta);
                lp.set_coeff(row, vars.at({VarKind::stor_discharge, e, z, s, 0}), 1.0);
                for (int e2 = 0; e2 <= e; ++e2) {
                    lp.set_coeff(row, vars.at({VarKind::stor_build, e2, z, s, -1}), -0.5 * st.duration_hours);
                }

                row = lp.add_row(nm("soc_H", {es(e), sc.zones[z].id, st.id}), RowSense::eq, 0.5 * ecap);
                rows.add_at({RowKind::soc_final, e, z, s, -1}, row);
                lp.set_coeff(row, vars.at({VarKind::soc, e, z, s, H - 1}), 1.0);
                for (int e2 = 0; e2 <= e; ++e2) {
                    lp.set_coeff(row, vars.at({VarKind::stor_build, e2, z, s, -1}), -0.5 * st.duration_hours);
                }
            }
        }
    }
}

// corridor flow stays inside the reinforced limits in both directions; a
// single reinforcement variable widens both
inline void emit_transmission(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows, const Scenario& sc)
{
    using formulation_detail::nm;
    const Dims d(sc);
    auto es = [](int v) { return std::to_string(v); };
    for (int e = 0; e < d.E; ++e) {
        for (int l = 0; l < d.L; ++l) {
            const auto& c = sc.corridors[l];
            for (int h = 0; h < sc.hours(e); ++h) {
                int row = lp.add_row(nm("f_ub", {es(e), c.id, es(h)}), RowSense::le,
                                     c.cap_forward[static_cast<std::size_t>(e)]);
                rows.add_at({RowKind::flow_upper, e, l, -1, h}, row);
                lp.set_coeff(row, vars.at({VarKind::flow, e, l, -1, h}), 1.0);
                for (int e2 = 0; e2 <= e; ++e2) {
                    lp.set_coeff(row, vars.at({VarKind::line_build, e2, l, -1, -1}), -1.0);
                }

                row = lp.add_row(nm("f_lb", {es(e), c.id, es(h)}), RowSense::ge,
                                 -c.cap_reverse[static_cast<std::size_t>(e)]);
                rows.add_at({RowKind::flow_lower, e, l, -1, h}, row);
                lp.set_coeff(row, vars.at({VarKind::flow, e, l, -1, h}), 1.0);
                for (int e2 = 0; e2 <= e; ++e2) {
                    lp.set_coeff(row, vars.at({VarKind::line_build, e2, l, -1, -1}), 1.0);
                }
            }
        }
    }
    // optional cumulative reinforcement cap, relative to the larger of the
    // two initial directional limits
    for (int l = 0; l < d.L; ++l) {
        const auto& c = sc.corridors[l];
        if (!c.max_reinforcement_factor) {
            continue;
        }
        double base = std::max(c.cap_forward[0], c.cap_reverse[0]);
        int row = lp.add_row(nm("reinf", {c.id}), RowSense::le, *c.max_reinforcement_factor * base);
        rows.add_at({RowKind::reinforcement_cap, l, -1, -1, -1}, row);
        for (int e = 0; e < d.E; ++e) {
            lp.set_coeff(row, vars.at({VarKind::line_build, e, l, -1, -1}), 1.0);
        }
    }
}

// supply, storage, unserved energy, and net imports meet load (plus the
// reserve uplift outside elcc_market mode) in every zone and hour; the
// copper-plate variant keeps one region-wide balance per hour
inline void emit_power_balance(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows, const Scenario& sc,
                               const BuildVariant& variant, const OptionsSpec& options)
{
    using formulation_detail::nm;
    const Dims d(sc);
    auto es = [](int v) { return std::to_string(v); };
    const double uplift = 1.0 + options.effective_rsv();

    if (variant.kind == VariantKind::copper_plate) {
        for (int e = 0; e < d.E; ++e) {
            for (int h = 0; h < sc.hours(e); ++h) {
                double total_load = 0.0;
                for (int z = 0; z < d.Z; ++z) {
                    total_load += sc.load(e, z, h);
                }
                int row = lp.add_row(nm("rbal", {es(e), es(h)}), RowSense::eq, total_load * uplift);
                rows.add_at({RowKind::balance_regional, e, h, -1, -1}, row);
                for (int z = 0; z < d.Z; ++z) {
                    for (int g = 0; g < d.G; ++g) {
                        lp.set_coeff(row, vars.at({VarKind::gen_dispatch, e, z, g, h}), 1.0);
                    }
                    for (int s = 0; s < d.S; ++s) {
                        lp.set_coeff(row, vars.at({VarKind::stor_discharge, e, z, s, h}), 1.0);
                        lp.set_coeff(row, vars.at({VarKind::stor_charge, e, z, s, h}), -1.0);
                    }
                    lp.set_coeff(row, vars.at({VarKind::unserved, e, z, h, -1}), 1.0);
                }
            }
        }
        return;
    }

    for (int e = 0; e < d.E; ++e) {
        for (int h = 0; h < sc.hours(e); ++h) {
            for (int z = 0; z < d.Z; ++z) {
                int row = lp.add_row(nm("bal", {es(e), sc.zones[z].id, es(h)}), RowSense::eq,
                                     sc.load(e, z, h) * uplift);
                rows.add_at({RowKind::balance, e, z, h, -1}, row);
                for (int g = 0; g < d.G; ++g) {
                    lp.set_coeff(row, vars.at({VarKind::gen_dispatch, e, z, g, h}), 1.0);
                }
                for (int s = 0; s < d.S; ++s) {
                    lp.set_coeff(row, vars.at({VarKind::stor_discharge, e, z, s, h}), 1.0);
                    lp.set_coeff(row, vars.at({VarKind::stor_charge, e, z, s, h}), -1.0);
                }
                lp.set_coeff(row, vars.at({VarKind::unserved, e, z, h, -1}), 1.0);
            }
            // positive flow leaves the from zone and arrives at the to zone
            for (int l = 0; l < d.L; ++l) {
                const auto& c = sc.corridors[l];
                int fcol = vars.at({VarKind::flow, e, l, -1, h});
                lp.set_coeff(rows.at({RowKind::balance, e, c.to_index, h, -1}), fcol, 1.0);
                lp.set_coeff(rows.at({RowKind::balance, e, c.from_index, h, -1}), fcol, -1.0);
            }
        }
    }
}

// renewable credits equal annual qualifying generation; regional class
// requirements and zonal in-state floors consume them
inline void emit_policy(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows, const Scenario& sc)
{
    using formulation_detail::nm;
    using formulation_detail::rps_class_id;
    using formulation_detail::rps_classes;
    const Dims d(sc);
    auto es = [](int v) { return std::to_string(v); };

    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                if (!sc.gen_techs[g].all_re) {
                    continue;
                }
                int row = lp.add_row(nm("rec_def", {es(e), sc.zones[z].id, sc.gen_techs[g].id}), RowSense::eq,
                                     0.0);
                rows.add_at({RowKind::rec_definition, e, z, g, -1}, row);
                lp.set_coeff(row, vars.at({VarKind::rec, e, z, g, -1}), 1.0);
                for (int h = 0; h < sc.hours(e); ++h) {
                    lp.set_coeff(row, vars.at({VarKind::gen_dispatch, e, z, g, h}), -1.0);
                }
            }
        }
    }

    for (const auto& [key, req] : sc.policies.regional_rps) {
        const auto& [e, class_name] = key;
        int cid = rps_class_id(class_name);
        if (cid < 0) {
            throw FormulationError("unknown RPS policy class '" + class_name + "'");
        }
        auto member = rps_classes()[static_cast<std::size_t>(cid)].second;
        int row = lp.add_row(nm("rps", {es(e), class_name}), RowSense::ge, req);
        rows.add_at({RowKind::rps_regional, e, cid, -1, -1}, row);
        int members = 0;
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                if (sc.gen_techs[g].*member && sc.gen_techs[g].all_re) {
                    lp.set_coeff(row, vars.at({VarKind::rec, e, z, g, -1}), 1.0);
                    ++members;
                }
            }
        }
        if (members == 0 && req > 0.0) {
            throw FormulationError("RPS class '" + class_name + "' has a requirement but no member technology");
        }
    }

    // zonal floor: the zone's share of each state's in-state requirement,
    // applied to its annual load
    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            double factor = 0.0;
            for (const auto& [key, spec] : sc.policies.instate_rps) {
                if (key.first != e) {
                    continue;
                }
                factor += spec.instate_fraction * spec.rps_fraction * sc.zones[z].share_of(key.second);
            }
            if (factor <= 0.0) {
                continue;
            }
            int row = lp.add_row(nm("rps_z", {es(e), sc.zones[z].id}), RowSense::ge,
                                 sc.annual_load(e, z) * factor);
            rows.add_at({RowKind::rps_instate, e, z, -1, -1}, row);
            for (int g = 0; g < d.G; ++g) {
                if (sc.gen_techs[g].all_re) {
                    lp.set_coeff(row, vars.at({VarKind::rec, e, z, g, -1}), 1.0);
                }
            }
        }
    }
}

// capacity-target classes: which technologies count toward each
inline std::vector<int> target_class_members(const Scenario& sc, const std::string& tech_class)
{
    std::vector<int> members;
    if (tech_class == "storage") {
        for (int s = 0; s < static_cast<int>(sc.stor_techs.size()); ++s) {
            members.push_back(s);
        }
        return members;
    }
    for (int g = 0; g < static_cast<int>(sc.gen_techs.size()); ++g) {
        if (tech_class == "offshore-wind" ? sc.gen_techs[g].offshore : sc.gen_techs[g].pv) {
            members.push_back(g);
        }
    }
    return members;
}

// one row per epoch and non-empty subset of the class's target states: the
// cumulative class capacity in zones overlapping the subset covers the sum
// of the subset's targets, each zone counted once
inline void emit_capacity_targets(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows,
                                  const Scenario& sc)
{
    using formulation_detail::nm;
    const Dims d(sc);
    auto es = [](int v) { return std::to_string(v); };
    const std::vector<std::string> classes = {"offshore-wind", "solar", "storage"};
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const std::string& cls = classes[ci];
        std::vector<std::string> states = sc.target_states(cls);
        if (states.empty()) {
            continue;
        }
        if (states.size() > 16) {
            throw FormulationError("more than 16 states with '" + cls +
                                   "' capacity targets; refusing to enumerate 2^n - 1 subsets");
        }
        std::vector<int> members = target_class_members(sc, cls);
        const bool storage = cls == "storage";
        const int n = static_cast<int>(states.size());
        for (int e = 0; e < d.E; ++e) {
            for (int mask = 1; mask < (1 << n); ++mask) {
                double required = 0.0;
                for (int b = 0; b < n; ++b) {
                    if (mask & (1 << b)) {
                        auto it = sc.policies.capacity_targets.find({e, states[static_cast<std::size_t>(b)], cls});
                        if (it != sc.policies.capacity_targets.end()) {
                            required += it->second;
                        }
                    }
                }
                // each zone counts once no matter how many subset states
                // it overlaps
                std::vector<double> zone_coeff(static_cast<std::size_t>(d.Z), 0.0);
                for (int z = 0; z < d.Z; ++z) {
                    int overlaps = 0;
                    for (int b = 0; b < n; ++b) {
                        if (mask & (1 << b)) {
                            overlaps += sc.zones[z].overlaps(states[static_cast<std::size_t>(b)]);
                        }
                    }
                    zone_coeff[static_cast<std::size_t>(z)] = std::min(1, overlaps);
                }
                double existing = 0.0;
                for (int z = 0; z < d.Z; ++z) {
                    if (zone_coeff[static_cast<std::size_t>(z)] == 0.0) {
                        continue;
                    }
                    for (int m : members) {
                        existing += storage ? sc.stor_techs[m].initial_power[sc.ez(e, z)]
                                            : sc.gen_techs[m].initial_cap[sc.ez(e, z)];
                    }
                }
                int row = lp.add_row(nm(storage ? "tgt_s" : (cls == "solar" ? "tgt_pv" : "tgt_ofs"),
                                        {es(e), es(mask)}),
                                     RowSense::ge, required - existing);
                rows.add_at({storage ? RowKind::target_stor : RowKind::target_gen, e,
                             storage ? -1 : static_cast<int>(ci), mask, -1},
                            row);
                for (int z = 0; z < d.Z; ++z) {
                    if (zone_coeff[static_cast<std::size_t>(z)] == 0.0) {
                        continue;
                    }
                    for (int m : members) {
                        for (int e2 = 0; e2 <= e; ++e2) {
                            lp.set_coeff(row,
                                         vars.at({storage ? VarKind::stor_build : VarKind::gen_build, e2, z, m, -1}),
                                         1.0);
                        }
                    }
                }
            }
        }
    }
}

// elcc_market mode: accredited cumulative capacity meets the epoch's
// capacity target
inline void emit_reliability(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows, const Scenario& sc,
                             const OptionsSpec& options)
{
    using formulation_detail::nm;
    if (options.reliability_mode != ReliabilityMode::elcc_market) {
        return;
    }
    const Dims d(sc);
    if (static_cast<int>(options.cap_target_mw.size()) != d.E) {
        throw FormulationError("elcc_market mode requires one cap_target_mw entry per epoch");
    }
    auto es = [](int v) { return std::to_string(v); };
    for (int e = 0; e < d.E; ++e) {
        double accredited_existing = 0.0;
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                accredited_existing += sc.gen_techs[g].elcc[sc.ez(e, z)] * sc.gen_techs[g].initial_cap[sc.ez(e, z)];
            }
            for (int s = 0; s < d.S; ++s) {
                accredited_existing +=
                    sc.stor_techs[s].elcc[sc.ez(e, z)] * sc.stor_techs[s].initial_power[sc.ez(e, z)];
            }
        }
        int row = lp.add_row(nm("elcc", {es(e)}), RowSense::ge,
                             options.cap_target_mw[static_cast<std::size_t>(e)] - accredited_existing);
        rows.add_at({RowKind::elcc_target, e, -1, -1, -1}, row);
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                for (int e2 = 0; e2 <= e; ++e2) {
                    lp.set_coeff(row, vars.at({VarKind::gen_build, e2, z, g, -1}), sc.gen_techs[g].elcc[sc.ez(e, z)]);
                }
            }
            for (int s = 0; s < d.S; ++s) {
                for (int e2 = 0; e2 <= e; ++e2) {
                    lp.set_coeff(row, vars.at({VarKind::stor_build, e2, z, s, -1}),
                                 sc.stor_techs[s].elcc[sc.ez(e, z)]);
                }
            }
        }
    }
}

// queue limits: whole-horizon cumulative builds per zone and technology
inline void emit_build_limits(LinearProgram& lp, const VariableIndex& vars, RowIndex& rows, const Scenario& sc,
                              const OptionsSpec& options)
{
    using formulation_detail::nm;
    if (!options.queue_limits_enabled) {
        return;
    }
    const Dims d(sc);
    for (int z = 0; z < d.Z; ++z) {
        for (int g = 0; g < d.G; ++g) {
            const auto& limit = sc.gen_techs[g].build_limit[static_cast<std::size_t>(z)];
            if (!limit) {
                continue;
            }
            if (*limit < 0.0) {
                throw FormulationError("negative build limit for tech '" + sc.gen_techs[g].id + "' in zone " +
                                       sc.zones[z].id);
            }
            int row = lp.add_row(nm("qlim_g", {sc.zones[z].id, sc.gen_techs[g].id}), RowSense::le, *limit);
            rows.add_at({RowKind::build_limit_gen, z, g, -1, -1}, row);
            for (int e = 0; e < d.E; ++e) {
                lp.set_coeff(row, vars.at({VarKind::gen_build, e, z, g, -1}), 1.0);
            }
        }
        for (int s = 0; s < d.S; ++s) {
            const auto& limit = sc.stor_techs[s].build_limit[static_cast<std::size_t>(z)];
            if (!limit) {
                continue;
            }
            if (*limit < 0.0) {
                throw FormulationError("negative build limit for tech '" + sc.stor_techs[s].id + "' in zone " +
                                       sc.zones[z].id);
            }
            int row = lp.add_row(nm("qlim_s", {sc.zones[z].id, sc.stor_techs[s].id}), RowSense::le, *limit);
            rows.add_at({RowKind::build_limit_stor, z, s, -1, -1}, row);
            for (int e = 0; e < d.E; ++e) {
                lp.set_coeff(row, vars.at({VarKind::stor_build, e, z, s, -1}), 1.0);
            }
        }
    }
}

inline BuiltProgram build_program(const Scenario& sc, const BuildVariant& variant, const OptionsSpec& options)
{
    if (variant.kind == VariantKind::tep_fixed && !variant.fixed_builds) {
        throw FormulationError("tep_fixed requires the resource builds to pin");
    }
    BuiltProgram bp;
    bp.dims = Dims(sc);
    create_variables(bp.lp, bp.vars, sc, variant);
    emit_objective(bp.lp, bp.vars, sc, variant, options);
    emit_generation_limits(bp.lp, bp.vars, bp.rows, sc);
    emit_storage(bp.lp, bp.vars, bp.rows, sc);
    if (has_flow_network(variant.kind)) {
        emit_transmission(bp.lp, bp.vars, bp.rows, sc);
    }
    emit_power_balance(bp.lp, bp.vars, bp.rows, sc, variant, options);
    emit_policy(bp.lp, bp.vars, bp.rows, sc);
    emit_capacity_targets(bp.lp, bp.vars, bp.rows, sc);
    emit_reliability(bp.lp, bp.vars, bp.rows, sc, options);
    emit_build_limits(bp.lp, bp.vars, bp.rows, sc, options);

    if (variant.kind == VariantKind::tep_fixed) {
        const auto& fixed = *variant.fixed_builds;
        for (int e = 0; e < bp.dims.E; ++e) {
            for (int z = 0; z < bp.dims.Z; ++z) {
                for (int g = 0; g < bp.dims.G; ++g) {
                    double v = std::max(0.0, fixed.gen[bp.dims.ezg(e, z, g)]);
                    bp.lp.set_bounds(bp.vars.at({VarKind::gen_build, e, z, g, -1}), v, v);
                }
                for (int s = 0; s < bp.dims.S; ++s) {
                    double v = std::max(0.0, fixed.stor[bp.dims.ezs(e, z, s)]);
                    bp.lp.set_bounds(bp.vars.at({VarKind::stor_build, e, z, s, -1}), v, v);
                }
            }
        }
    }

    bp.lp.finalize();
    return bp;
}

} // namespace gridplan
