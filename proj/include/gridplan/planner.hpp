#pragma once

// Planning workflows: the one-shot co-optimized solve and the two-stage
// sequential workflow (copper-plate resource plan, then transmission
// expansion against those fixed builds), plus the extraction of semantic
// solutions from raw LP output.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridplan/formulation.hpp"
#include "gridplan/ipm.hpp"
#include "gridplan/lp.hpp"
#include "gridplan/scenario.hpp"
#include "gridplan/scenario_io.hpp"
#include "gridplan/variable_index.hpp"

namespace gridplan {

enum class PlanMode { cooptimized, sequential };

inline const char* to_string(PlanMode m)
{
    return m == PlanMode::cooptimized ? "cooptimized" : "sequential";
}

// Raised when a stage does not solve to optimality; carries the stage
// label and the solver status.
class PlanningError : public std::runtime_error {
  public:
    PlanningError(std::string stage, SolveStatus status, const std::string& detail)
        : std::runtime_error("stage '" + stage + "': " + to_string(status) +
                             (detail.empty() ? "" : " (" + detail + ")")),
          stage_(std::move(stage)), status_(status)
    {
    }
    const std::string& stage() const { return stage_; }
    SolveStatus status() const { return status_; }

  private:
    std::string stage_;
    SolveStatus status_;
};

struct ObjectiveBreakdown {
    double operating = 0.0;
    double unserved = 0.0;
    double gen_invest = 0.0;
    double stor_invest = 0.0;
    double line_invest = 0.0;

    double total() const { return operating + unserved + gen_invest + stor_invest + line_invest; }
};

struct PlanSolution {
    PlanMode mode = PlanMode::cooptimized;
    SolveStatus status = SolveStatus::failure;
    Dims dims;
    std::uint64_t scenario_fingerprint = 0;

    // builds in MW (Dims::ezg / ezs / el layouts)
    std::vector<double> gen_builds;
    std::vector<double> stor_builds;
    std::vector<double> line_builds; // zero for pure copper-plate solutions

    // hourly operations (Dims::ezgh / ezsh / elh / ezh layouts)
    std::vector<double> gen_dispatch;
    std::vector<double> stor_discharge;
    std::vector<double> stor_charge;
    std::vector<double> soc;
    std::vector<double> flow;
    std::vector<double> unserved;
    std::vector<double> rec; // annual credits (Dims::ezg), zero for non-qualifying techs

    double objective = 0.0;
    ObjectiveBreakdown breakdown;

    // sequential runs carry the resource-stage objective for diagnostics
    std::optional<double> stage1_objective;
};

// Recovers every semantic variable from the LP primal vector and
// recomputes the cost breakdown from first principles; a mismatch against
// the solver objective signals an indexing bug and aborts.
inline PlanSolution extract_solution(const LpSolution& lp_solution, const VariableIndex& vars,
                                     const Scenario& sc, const BuildVariant& variant,
                                     const OptionsSpec& options)
{
    if (lp_solution.status != SolveStatus::optimal) {
        throw PlanningError("extract", lp_solution.status, lp_solution.message);
    }
    PlanSolution out;
    out.dims = Dims(sc);
    out.status = SolveStatus::optimal;
    out.scenario_fingerprint = scenario_fingerprint(sc);
    const Dims& d = out.dims;

    out.gen_builds.assign(d.n_ezg(), 0.0);
    out.stor_builds.assign(d.n_ezs(), 0.0);
    out.line_builds.assign(d.n_el(), 0.0);
    out.gen_dispatch.assign(d.n_ezgh(), 0.0);
    out.stor_discharge.assign(d.n_ezsh(), 0.0);
    out.stor_charge.assign(d.n_ezsh(), 0.0);
    out.soc.assign(d.n_ezsh(), 0.0);
    out.flow.assign(d.n_elh(), 0.0);
    out.unserved.assign(d.n_ezh(), 0.0);
    out.rec.assign(d.n_ezg(), 0.0);

    const auto& x = lp_solution.x;
    auto value = [&x](int col) { return x[static_cast<std::size_t>(col)]; };

    for (int e = 0; e < d.E; ++e) {
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                out.gen_builds[d.ezg(e, z, g)] = value(vars.at({VarKind::gen_build, e, z, g, -1}));
                if (auto col = vars.find({VarKind::rec, e, z, g, -1})) {
                    out.rec[d.ezg(e, z, g)] = value(*col);
                }
            }
            for (int s = 0; s < d.S; ++s) {
                out.stor_builds[d.ezs(e, z, s)] = value(vars.at({VarKind::stor_build, e, z, s, -1}));
            }
        }
        const bool network = has_flow_network(variant.kind);
        if (network) {
            for (int l = 0; l < d.L; ++l) {
                out.line_builds[d.el(e, l)] = value(vars.at({VarKind::line_build, e, l, -1, -1}));
            }
        }
        for (int h = 0; h < sc.hours(e); ++h) {
            for (int z = 0; z < d.Z; ++z) {
                for (int g = 0; g < d.G; ++g) {
                    out.gen_dispatch[d.ezgh(e, z, g, h)] = value(vars.at({VarKind::gen_dispatch, e, z, g, h}));
                }
                for (int s = 0; s < d.S; ++s) {
                    out.stor_discharge[d.ezsh(e, z, s, h)] = value(vars.at({VarKind::stor_discharge, e, z, s, h}));
                    out.stor_charge[d.ezsh(e, z, s, h)] = value(vars.at({VarKind::stor_charge, e, z, s, h}));
                    out.soc[d.ezsh(e, z, s, h)] = value(vars.at({VarKind::soc, e, z, s, h}));
                }
                out.unserved[d.ezh(e, z, h)] = value(vars.at({VarKind::unserved, e, z, h, -1}));
            }
            if (network) {
                for (int l = 0; l < d.L; ++l) {
                    out.flow[d.elh(e, l, h)] = value(vars.at({VarKind::flow, e, l, -1, h}));
                }
            }
        }
    }

    // breakdown recomputed from primal values and the scenario
    const double r = options.discount_rate;
    const int horizon = sc.horizon_end_year();
    for (int e = 0; e < d.E; ++e) {
        double w = epoch_weight(r, sc.epochs[e]);
        for (int z = 0; z < d.Z; ++z) {
            for (int g = 0; g < d.G; ++g) {
                out.breakdown.gen_invest +=
                    out.gen_builds[d.ezg(e, z, g)] *
                    discounted_investment_cost(sc.gen_techs[g].annualized_cost[sc.ez(e, z)], sc.epochs[e], horizon, r);
                for (int h = 0; h < sc.hours(e); ++h) {
                    out.breakdown.operating +=
                        out.gen_dispatch[d.ezgh(e, z, g, h)] * sc.gen_techs[g].var_cost[sc.ez(e, z)] * w;
                }
            }
            for (int s = 0; s < d.S; ++s) {
                out.breakdown.stor_invest +=
                    out.stor_builds[d.ezs(e, z, s)] *
                    discounted_investment_cost(sc.stor_techs[s].annualized_cost[sc.ez(e, z)], sc.epochs[e], horizon, r);
            }
            for (int h = 0; h < sc.hours(e); ++h) {
                out.breakdown.unserved += out.unserved[d.ezh(e, z, h)] * options.voll * w;
            }
        }
        if (has_flow_network(variant.kind)) {
            for (int l = 0; l < d.L; ++l) {
                out.breakdown.line_invest +=
                    out.line_builds[d.el(e, l)] *
                    discounted_investment_cost(sc.corridors[l].annualized_cost_per_mw(), sc.epochs[e], horizon, r);
            }
        }
    }

    out.objective = lp_solution.objective;
    double recomputed = out.breakdown.total();
    double denom = 1.0 + std::abs(out.objective);
    if (std::abs(recomputed - out.objective) > 1e-6 * denom) {
        throw std::logic_error("objective breakdown mismatch: solver " + std::to_string(out.objective) +
                               " vs recomputed " + std::to_string(recomputed));
    }
    return out;
}

inline ResourceBuilds resource_builds_of(const PlanSolution& sol)
{
    return ResourceBuilds{sol.gen_builds, sol.stor_builds};
}

// Interior point solutions carry noise in the open-but-unused build
// variables; pinning a transmission stage to a hundredth of a watt of
// capacity is meaningless and poisons the barrier, so builds below this
// floor are treated as zero.
inline constexpr double kBuildSnapMw = 1e-5;

inline ResourceBuilds snapped_builds(const PlanSolution& sol)
{
    ResourceBuilds rb = resource_builds_of(sol);
    for (double& v : rb.gen) {
        if (v < kBuildSnapMw) {
            v = 0.0;
        }
    }
    for (double& v : rb.stor) {
        if (v < kBuildSnapMw) {
            v = 0.0;
        }
    }
    return rb;
}

inline PlanSolution run_cooptimized(const Scenario& sc, const OptionsSpec& options, LpSolver& solver)
{
    BuiltProgram bp = build_program(sc, BuildVariant::cooptimized(), options);
    LpSolution sol = solver.solve(bp.lp);
    if (sol.status != SolveStatus::optimal) {
        throw PlanningError("cooptimized", sol.status, sol.message);
    }
    PlanSolution plan = extract_solution(sol, bp.vars, sc, BuildVariant::cooptimized(), options);
    plan.mode = PlanMode::cooptimized;
    return plan;
}

// copper-plate resource expansion, then transmission expansion with the
// resource builds pinned; operations are re-optimized in stage two
inline PlanSolution run_sequential(const Scenario& sc, const OptionsSpec& options, LpSolver& solver)
{
    BuiltProgram stage1 = build_program(sc, BuildVariant::copper_plate(), options);
    LpSolution sol1 = solver.solve(stage1.lp);
    if (sol1.status != SolveStatus::optimal) {
        throw PlanningError("sequential stage 1 (copper plate)", sol1.status, sol1.message);
    }
    PlanSolution plan1 =
        extract_solution(sol1, stage1.vars, sc, BuildVariant::copper_plate(), options);

    BuildVariant tep = BuildVariant::tep_fixed(snapped_builds(plan1));
    BuiltProgram stage2 = build_program(sc, tep, options);
    LpSolution sol2 = solver.solve(stage2.lp);
    if (sol2.status != SolveStatus::optimal) {
        // unserved energy absorbs any resource shortfall, so a pinned
        // transmission stage must stay solvable
        throw PlanningError("sequential stage 2 (transmission)", sol2.status,
                            "unreachable by construction: " + sol2.message);
    }
    PlanSolution plan = extract_solution(sol2, stage2.vars, sc, tep, options);
    plan.mode = PlanMode::sequential;
    plan.stage1_objective = sol1.objective;
    return plan;
}

inline PlanSolution run_plan(const Scenario& sc, const OptionsSpec& options, PlanMode mode, LpSolver& solver)
{
    return mode == PlanMode::cooptimized ? run_cooptimized(sc, options, solver)
                                         : run_sequential(sc, options, solver);
}

} // namespace gridplan
