#pragma once

// Bundled LP solver: primal-dual interior point method (Mehrotra
// predictor-corrector) on the regularized augmented KKT system, with Ruiz
// equilibration, a sparse LDL^T backend (ldl.hpp), and iterative
// refinement of every KKT solve.
//
// The solve entry point classifies non-convergence instead of guessing:
//   1. an elastic relaxation (rows get violation variables, objective is
//      total violation) certifies infeasibility when its optimum is
//      positive;
//   2. a recession-direction program (min c.d over the feasible cone,
//      normalized by c.d >= -1) certifies unboundedness when its optimum
//      reaches -1.
// Both auxiliary programs are feasible and bounded by construction, so the
// interior point core is reliable on them.
//
// Adequate for desk-scale instances (up to roughly 1e5 columns); larger
// programs should be exported in LP text format and solved externally.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "gridplan/ldl.hpp"
#include "gridplan/lp.hpp"

namespace gridplan {

class LpSolver {
  public:
    virtual ~LpSolver() = default;
    virtual LpSolution solve(const LinearProgram& lp) = 0;
    virtual std::string name() const = 0;
};

struct IpmOptions {
    double tol = 1e-9;         // relative primal / dual / gap targets
    double accept_feas = 1e-7; // degraded acceptance when progress stalls:
    double accept_gap = 3e-5;  // feasibility is held much tighter than the
                               // gap, and the returned point must still
                               // pass the strict original-space row audit
    int max_iterations = 200;
    double regularization = 1e-9;
    bool classify = true; // run the elastic / recession programs on failure
};

namespace ipm_detail {

// Internal equality form min c.x s.t. Ax = b, lb <= x <= ub, after
// substituting fixed columns, resolving empty columns, dropping constant
// rows, and appending slack columns.
struct InternalLp {
    int n = 0;
    int m = 0;
    std::vector<std::size_t> col_ptr; // CSC, n+1
    std::vector<int> row_ind;
    std::vector<double> values;
    std::vector<double> b, c, lb, ub;

    std::vector<int> col_map;          // original column -> internal column or -1
    std::vector<double> resolved;      // value for columns with col_map == -1
    std::vector<int> row_map;          // original row -> internal row or -1
};

struct PresolveOutcome {
    bool decided = false;
    SolveStatus status = SolveStatus::failure;
    std::string message;
    InternalLp ilp;
};

// Fixed-column substitution with a singleton-row cascade: a row left with
// one live column becomes a bound, tightened bounds can fix the column,
// and fixing a column can create new singleton or constant rows. Planning
// programs shed large numbers of degenerate rows this way (zero-capacity
// dispatch limits, pinned builds), which both shrinks the KKT system and
// removes the ill-centered pairs that slow the interior point endgame.
inline PresolveOutcome presolve(const LinearProgram& lp)
{
    PresolveOutcome out;
    const int n0 = lp.num_cols();
    const int m0 = lp.num_rows();
    InternalLp ilp;
    ilp.col_map.assign(static_cast<std::size_t>(n0), -1);
    ilp.resolved.assign(static_cast<std::size_t>(n0), 0.0);
    ilp.row_map.assign(static_cast<std::size_t>(m0), -1);

    std::vector<double> lb(static_cast<std::size_t>(n0)), ub(static_cast<std::size_t>(n0));
    std::vector<char> fixed(static_cast<std::size_t>(n0), 0);
    std::vector<double> rhs(static_cast<std::size_t>(m0));
    std::vector<int> live(static_cast<std::size_t>(m0), 0);
    std::vector<char> row_dead(static_cast<std::size_t>(m0), 0);
    for (int j = 0; j < n0; ++j) {
        lb[static_cast<std::size_t>(j)] = lp.column(j).lb;
        ub[static_cast<std::size_t>(j)] = lp.column(j).ub;
    }
    for (int i = 0; i < m0; ++i) {
        rhs[static_cast<std::size_t>(i)] = lp.row(i).rhs;
    }
    for (const auto& e : lp.entries()) {
        ++live[static_cast<std::size_t>(e.row)];
    }

    std::vector<int> work;
    // infeasibility is only declared beyond the artifact-wide 1e-6 relative
    // feasibility tolerance; bounds pinned from a previous solve carry that
    // solver's noise, and noise-level conflicts are absorbed, not fatal
    auto feastol = [](double reference) { return 1e-6 * (1.0 + std::abs(reference)); };
    // boxes narrower than the noise floor count as fixed; the barrier on a
    // sliver box otherwise dominates the Newton systems
    auto near_fixed = [](double l, double u) { return u - l <= 1e-7 * (1.0 + std::abs(l) + std::abs(u)); };

    // fixing a column updates every row it appears in
    auto fix_column = [&](int j, double v) {
        fixed[static_cast<std::size_t>(j)] = 1;
        ilp.resolved[static_cast<std::size_t>(j)] = v;
        for (std::size_t k = lp.col_begin(j); k < lp.col_end(j); ++k) {
            int i = lp.col_row(k);
            if (row_dead[static_cast<std::size_t>(i)]) {
                continue;
            }
            rhs[static_cast<std::size_t>(i)] -= lp.col_value(k) * v;
            if (--live[static_cast<std::size_t>(i)] <= 1) {
                work.push_back(i);
            }
        }
    };

    for (int j = 0; j < n0; ++j) {
        double l = lb[static_cast<std::size_t>(j)];
        double u = ub[static_cast<std::size_t>(j)];
        if (l == u) {
            fix_column(j, l);
        } else if (u != kInf && l != -kInf && near_fixed(l, u)) {
            fix_column(j, 0.5 * (l + u));
        }
    }
    for (int i = 0; i < m0; ++i) {
        if (live[static_cast<std::size_t>(i)] <= 1) {
            work.push_back(i);
        }
    }

    const bool no_singleton = std::getenv("GRIDPLAN_NO_SINGLETON") != nullptr;
    while (!work.empty()) {
        int i = work.back();
        work.pop_back();
        if (row_dead[static_cast<std::size_t>(i)] || live[static_cast<std::size_t>(i)] > 1) {
            continue;
        }
        if (no_singleton && live[static_cast<std::size_t>(i)] == 1) {
            continue;
        }
        if (live[static_cast<std::size_t>(i)] == 0) {
            double r = rhs[static_cast<std::size_t>(i)];
            double tol = feastol(lp.row(i).rhs);
            bool ok = true;
            switch (lp.row(i).sense) {
            case RowSense::le: ok = (0.0 <= r + tol); break;
            case RowSense::ge: ok = (0.0 >= r - tol); break;
            case RowSense::eq: ok = (std::abs(r) <= tol); break;
            }
            if (!ok) {
                out.decided = true;
                out.status = SolveStatus::infeasible;
                out.message = "row '" + lp.row(i).name + "' is constant and violated";
                return out;
            }
            row_dead[static_cast<std::size_t>(i)] = 1;
            continue;
        }
        // singleton row: locate the live column and turn the row into a bound
        int col = -1;
        double a = 0.0;
        for (std::size_t k = lp.row_begin(i); k < lp.row_end(i); ++k) {
            const auto& e = lp.entries()[k];
            if (!fixed[static_cast<std::size_t>(e.col)]) {
                col = e.col;
                a = e.value;
                break;
            }
        }
        if (col < 0) {
            continue; // raced with a fix; revisit as constant row later
        }
        double v = rhs[static_cast<std::size_t>(i)] / a;
        RowSense sense = lp.row(i).sense;
        bool upper = (sense == RowSense::le && a > 0.0) || (sense == RowSense::ge && a < 0.0);
        double& l = lb[static_cast<std::size_t>(col)];
        double& u = ub[static_cast<std::size_t>(col)];
        double tol = feastol(v);
        if (sense == RowSense::eq) {
            if (v < l - tol || v > u + tol) {
                out.decided = true;
                out.status = SolveStatus::infeasible;
                out.message = "row '" + lp.row(i).name + "' pins column '" + lp.column(col).name +
                              "' outside its bounds";
                return out;
            }
            row_dead[static_cast<std::size_t>(i)] = 1;
            fix_column(col, std::min(std::max(v, l), u));
            continue;
        }
        if (upper) {
            u = std::min(u, v);
        } else {
            l = std::max(l, v);
        }
        if (l > u + feastol(std::max(std::abs(l), std::abs(u)))) {
            out.decided = true;
            out.status = SolveStatus::infeasible;
            out.message = "bounds cross for column '" + lp.column(col).name + "' after row '" +
                          lp.row(i).name + "'";
            return out;
        }
        row_dead[static_cast<std::size_t>(i)] = 1;
        if (l != -kInf && u != kInf && near_fixed(l, u)) {
            fix_column(col, 0.5 * (std::min(l, u) + std::max(l, u)));
        }
    }

    // columns in no live row are settled by their cost sign
    int kept_cols = 0;
    for (int j = 0; j < n0; ++j) {
        if (fixed[static_cast<std::size_t>(j)]) {
            continue;
        }
        bool in_live_row = false;
        for (std::size_t k = lp.col_begin(j); k < lp.col_end(j); ++k) {
            if (!row_dead[static_cast<std::size_t>(lp.col_row(k))]) {
                in_live_row = true;
                break;
            }
        }
        if (!in_live_row) {
            const auto& col = lp.column(j);
            double l = lb[static_cast<std::size_t>(j)];
            double u = ub[static_cast<std::size_t>(j)];
            if (col.obj > 0.0) {
                if (l == -kInf) {
                    out.decided = true;
                    out.status = SolveStatus::unbounded;
                    out.message = "column '" + col.name + "' is unbounded below with positive cost";
                    return out;
                }
                ilp.resolved[static_cast<std::size_t>(j)] = l;
            } else if (col.obj < 0.0) {
                if (u == kInf) {
                    out.decided = true;
                    out.status = SolveStatus::unbounded;
                    out.message = "column '" + col.name + "' is unbounded above with negative cost";
                    return out;
                }
                ilp.resolved[static_cast<std::size_t>(j)] = u;
            } else {
                ilp.resolved[static_cast<std::size_t>(j)] = std::min(std::max(0.0, l), u);
            }
            fixed[static_cast<std::size_t>(j)] = 1;
            continue;
        }
        ilp.col_map[static_cast<std::size_t>(j)] = kept_cols++;
    }

    int kept_rows = 0;
    for (int i = 0; i < m0; ++i) {
        if (row_dead[static_cast<std::size_t>(i)]) {
            continue;
        }
        if (live[static_cast<std::size_t>(i)] == 0) {
            double r = rhs[static_cast<std::size_t>(i)];
            double tol = feastol(lp.row(i).rhs);
            bool ok = true;
            switch (lp.row(i).sense) {
            case RowSense::le: ok = (0.0 <= r + tol); break;
            case RowSense::ge: ok = (0.0 >= r - tol); break;
            case RowSense::eq: ok = (std::abs(r) <= tol); break;
            }
            if (!ok) {
                out.decided = true;
                out.status = SolveStatus::infeasible;
                out.message = "row '" + lp.row(i).name + "' is constant and violated";
                return out;
            }
            continue;
        }
        ilp.row_map[static_cast<std::size_t>(i)] = kept_rows++;
    }

    if (kept_cols == 0) {
        // fully resolved by presolve
        out.decided = true;
        out.status = SolveStatus::optimal;
        out.ilp = std::move(ilp);
        return out;
    }

    // carry tightened bounds into the internal program
    std::vector<double> lb_int = std::move(lb);
    std::vector<double> ub_int = std::move(ub);

    // slack per kept inequality row
    int n_slack = 0;
    for (int i = 0; i < m0; ++i) {
        if (ilp.row_map[static_cast<std::size_t>(i)] >= 0 && lp.row(i).sense != RowSense::eq) {
            ++n_slack;
        }
    }
    ilp.n = kept_cols + n_slack;
    ilp.m = kept_rows;
    ilp.b.assign(static_cast<std::size_t>(kept_rows), 0.0);
    for (int i = 0; i < m0; ++i) {
        if (ilp.row_map[static_cast<std::size_t>(i)] >= 0) {
            ilp.b[static_cast<std::size_t>(ilp.row_map[static_cast<std::size_t>(i)])] = rhs[static_cast<std::size_t>(i)];
        }
    }
    ilp.c.assign(static_cast<std::size_t>(ilp.n), 0.0);
    ilp.lb.assign(static_cast<std::size_t>(ilp.n), 0.0);
    ilp.ub.assign(static_cast<std::size_t>(ilp.n), kInf);
    for (int j = 0; j < n0; ++j) {
        int jj = ilp.col_map[static_cast<std::size_t>(j)];
        if (jj >= 0) {
            ilp.c[static_cast<std::size_t>(jj)] = lp.column(j).obj;
            ilp.lb[static_cast<std::size_t>(jj)] = lb_int[static_cast<std::size_t>(j)];
            ilp.ub[static_cast<std::size_t>(jj)] = ub_int[static_cast<std::size_t>(j)];
        }
    }

    // assemble CSC: kept original columns, then slacks
    std::vector<std::size_t> count(static_cast<std::size_t>(ilp.n) + 1, 0);
    for (const auto& e : lp.entries()) {
        int jj = ilp.col_map[static_cast<std::size_t>(e.col)];
        if (jj >= 0 && ilp.row_map[static_cast<std::size_t>(e.row)] >= 0) {
            ++count[static_cast<std::size_t>(jj) + 1];
        }
    }
    int slack_col = kept_cols;
    for (int i = 0; i < m0; ++i) {
        if (ilp.row_map[static_cast<std::size_t>(i)] >= 0 && lp.row(i).sense != RowSense::eq) {
            count[static_cast<std::size_t>(slack_col) + 1] = 1;
            ++slack_col;
        }
    }
    for (int j = 0; j < ilp.n; ++j) {
        count[static_cast<std::size_t>(j) + 1] += count[static_cast<std::size_t>(j)];
    }
    ilp.col_ptr = count;
    ilp.row_ind.assign(ilp.col_ptr.back(), 0);
    ilp.values.assign(ilp.col_ptr.back(), 0.0);
    std::vector<std::size_t> next(ilp.col_ptr.begin(), ilp.col_ptr.end() - 1);
    for (const auto& e : lp.entries()) {
        int jj = ilp.col_map[static_cast<std::size_t>(e.col)];
        int ii = ilp.row_map[static_cast<std::size_t>(e.row)];
        if (jj >= 0 && ii >= 0) {
            std::size_t slot = next[static_cast<std::size_t>(jj)]++;
            ilp.row_ind[slot] = ii;
            ilp.values[slot] = e.value;
        }
    }
    slack_col = kept_cols;
    for (int i = 0; i < m0; ++i) {
        if (ilp.row_map[static_cast<std::size_t>(i)] < 0 || lp.row(i).sense == RowSense::eq) {
            continue;
        }
        std::size_t slot = next[static_cast<std::size_t>(slack_col)]++;
        ilp.row_ind[slot] = ilp.row_map[static_cast<std::size_t>(i)];
        ilp.values[slot] = lp.row(i).sense == RowSense::le ? 1.0 : -1.0;
        ++slack_col;
    }

    out.ilp = std::move(ilp);
    return out;
}

struct CoreResult {
    bool converged = false;
    int iterations = 0;
    double rel_primal = kInf;
    double rel_dual = kInf;
    double rel_gap = kInf;
    std::vector<double> x;
    std::vector<double> y;
};

// Interior point core over the internal equality form. Scaling, ordering,
// factorization, and the Mehrotra iteration live here.
class IpmCore {
  public:
    IpmCore(const InternalLp& ilp, const IpmOptions& opts) : ilp_(ilp), opts_(opts)
    {
        n_ = ilp.n;
        m_ = ilp.m;
        scale();
        build_kkt_pattern();
    }

    CoreResult run()
    {
        CoreResult res;
        const int n = n_, m = m_;
        const double tol = opts_.tol;

        std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(m), 0.0);
        std::vector<double> g(static_cast<std::size_t>(n), 0.0), t(static_cast<std::size_t>(n), 0.0);
        std::vector<double> z(static_cast<std::size_t>(n), 0.0), w(static_cast<std::size_t>(n), 0.0);

        // Mehrotra starting point: least-norm primal, least-squares dual,
        // then shifts that balance the initial complementarity products
        {
            std::vector<double> theta_inv(static_cast<std::size_t>(n), 1.0);
            factorize(theta_inv);
            std::vector<double> zero_x(static_cast<std::size_t>(n), 0.0);
            std::vector<double> zero_y(static_cast<std::size_t>(m), 0.0);
            std::vector<double> xt(static_cast<std::size_t>(n)), yt(static_cast<std::size_t>(m));
            solve_kkt(zero_x, b_, xt, yt);
            std::vector<double> u(static_cast<std::size_t>(n)), yd(static_cast<std::size_t>(m));
            solve_kkt(c_, zero_y, u, yd);
            // block elimination gives the least-squares dual slack directly
            std::vector<double> zfull(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                zfull[static_cast<std::size_t>(j)] = -u[static_cast<std::size_t>(j)];
            }
            y = yd;

            double min_p = 0.0, min_d = 0.0;
            for (int j = 0; j < n; ++j) {
                double lo = lb_[static_cast<std::size_t>(j)];
                double hi = ub_[static_cast<std::size_t>(j)];
                double v = xt[static_cast<std::size_t>(j)];
                double zf = zfull[static_cast<std::size_t>(j)];
                if (lo != -kInf) {
                    g[static_cast<std::size_t>(j)] = v - lo;
                    min_p = std::min(min_p, g[static_cast<std::size_t>(j)]);
                    z[static_cast<std::size_t>(j)] = (hi != kInf) ? std::max(zf, 0.0) : zf;
                    min_d = std::min(min_d, z[static_cast<std::size_t>(j)]);
                }
                if (hi != kInf) {
                    t[static_cast<std::size_t>(j)] = hi - v;
                    min_p = std::min(min_p, t[static_cast<std::size_t>(j)]);
                    w[static_cast<std::size_t>(j)] = (lo != -kInf) ? std::max(-zf, 0.0) : -zf;
                    min_d = std::min(min_d, w[static_cast<std::size_t>(j)]);
                }
            }
            double dp = std::max(0.0, -1.5 * min_p);
            double dd = std::max(0.0, -1.5 * min_d);
            double cross = 0.0, sum_p = 0.0, sum_d = 0.0;
            int nb0 = 0;
            for (int j = 0; j < n; ++j) {
                if (has_l(j)) {
                    cross += (g[static_cast<std::size_t>(j)] + dp) * (z[static_cast<std::size_t>(j)] + dd);
                    sum_p += g[static_cast<std::size_t>(j)] + dp;
                    sum_d += z[static_cast<std::size_t>(j)] + dd;
                    ++nb0;
                }
                if (has_u(j)) {
                    cross += (t[static_cast<std::size_t>(j)] + dp) * (w[static_cast<std::size_t>(j)] + dd);
                    sum_p += t[static_cast<std::size_t>(j)] + dp;
                    sum_d += w[static_cast<std::size_t>(j)] + dd;
                    ++nb0;
                }
            }
            double dph = nb0 > 0 && sum_d > 0.0 ? dp + 0.5 * cross / sum_d : dp + 1.0;
            double ddh = nb0 > 0 && sum_p > 0.0 ? dd + 0.5 * cross / sum_p : dd + 1.0;
            dph = std::max(dph, 1.0);
            ddh = std::max(ddh, 1.0);
            if (std::getenv("GRIDPLAN_IPM_TRACE")) {
                double xmax = 0.0, zmax = 0.0;
                for (double v : xt) {
                    xmax = std::max(xmax, std::abs(v));
                }
                for (double v : zfull) {
                    zmax = std::max(zmax, std::abs(v));
                }
                std::fprintf(stderr, "  init: |x|=%.2e |z|=%.2e dp=%.2e dd=%.2e dph=%.2e ddh=%.2e\n", xmax,
                             zmax, dp, dd, dph, ddh);
            }
            for (int j = 0; j < n; ++j) {
                double lo = lb_[static_cast<std::size_t>(j)];
                double hi = ub_[static_cast<std::size_t>(j)];
                double v = xt[static_cast<std::size_t>(j)];
                if (lo != -kInf && hi != kInf) {
                    // keep both identities inside a finite box
                    double eps = std::min(dph, 0.4 * (hi - lo));
                    v = std::min(std::max(v, lo + eps), hi - eps);
                    g[static_cast<std::size_t>(j)] = v - lo;
                    t[static_cast<std::size_t>(j)] = hi - v;
                    z[static_cast<std::size_t>(j)] += ddh;
                    w[static_cast<std::size_t>(j)] += ddh;
                } else if (lo != -kInf) {
                    v += dph - std::min(0.0, v - lo); // ensure v - lo >= dph
                    g[static_cast<std::size_t>(j)] = v - lo;
                    z[static_cast<std::size_t>(j)] += ddh;
                } else if (hi != kInf) {
                    v -= dph - std::min(0.0, hi - v);
                    t[static_cast<std::size_t>(j)] = hi - v;
                    w[static_cast<std::size_t>(j)] += ddh;
                }
                x[static_cast<std::size_t>(j)] = v;
            }
        }

        const double bnorm = inf_norm(b_);
        const double cnorm = inf_norm(c_);
        std::vector<double> rp(static_cast<std::size_t>(m)), rd(static_cast<std::size_t>(n));
        std::vector<double> theta_inv(static_cast<std::size_t>(n));
        std::vector<double> rhs_x(static_cast<std::size_t>(n));
        std::vector<double> dx_a(static_cast<std::size_t>(n)), dy_a(static_cast<std::size_t>(m));
        std::vector<double> dz_a(static_cast<std::size_t>(n)), dw_a(static_cast<std::size_t>(n));
        std::vector<double> dx(static_cast<std::size_t>(n)), dy(static_cast<std::size_t>(m));
        std::vector<double> dz(static_cast<std::size_t>(n)), dw(static_cast<std::size_t>(n));
        corr_g_.assign(static_cast<std::size_t>(n), 0.0);
        corr_t_.assign(static_cast<std::size_t>(n), 0.0);
        ddx_.assign(static_cast<std::size_t>(n), 0.0);
        ddy_.assign(static_cast<std::size_t>(m), 0.0);
        trial_dx_.assign(static_cast<std::size_t>(n), 0.0);
        trial_dz_.assign(static_cast<std::size_t>(n), 0.0);
        trial_dw_.assign(static_cast<std::size_t>(n), 0.0);
        zero_m_.assign(static_cast<std::size_t>(m), 0.0);

        double best = kInf;
        int since_best = 0;
        double mu0 = -1.0;
        double prev_rd = kInf;
        int dual_rollbacks = 0;
        std::vector<double> snap_y, snap_z, snap_w;
        const bool trace = std::getenv("GRIDPLAN_IPM_TRACE") != nullptr;
        // best iterate so far, by worst relative residual
        double best_score = kInf;
        std::vector<double> best_x, best_y;
        double best_rp = kInf, best_rd = kInf, best_gap = kInf;

        for (int iter = 0; iter < opts_.max_iterations; ++iter) {
            res.iterations = iter;
            // residuals
            compute_residuals(x, y, z, w, rp, rd);
            double mu = 0.0;
            int nb = 0;
            for (int j = 0; j < n; ++j) {
                if (has_l(j)) {
                    mu += g[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)];
                    ++nb;
                }
                if (has_u(j)) {
                    mu += t[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)];
                    ++nb;
                }
            }
            mu = nb > 0 ? mu / nb : 0.0;
            if (mu0 < 0.0) {
                mu0 = std::max(mu, 1e-300);
            }

            double pobj = dot(c_, x);
            auto dual_objective = [&]() {
                double dobj = dot(b_, y);
                for (int j = 0; j < n; ++j) {
                    if (has_l(j)) {
                        dobj += lb_[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)];
                    }
                    if (has_u(j)) {
                        dobj -= ub_[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)];
                    }
                }
                return dobj;
            };
            double dobj = dual_objective();
            res.rel_primal = inf_norm(rp) / (1.0 + bnorm);
            res.rel_dual = inf_norm(rd) / (1.0 + cnorm);
            res.rel_gap = std::abs(pobj - dobj) / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));

            // near an optimal face the dual recovery divides by tiny primal
            // slacks; a step whose error injection blows up the dual
            // residual is undone rather than propagated
            if (std::isfinite(res.rel_dual) && res.rel_dual > 10.0 * prev_rd + tol && !snap_y.empty()) {
                if (++dual_rollbacks > 8) {
                    break;
                }
                y = snap_y;
                z = snap_z;
                w = snap_w;
                compute_residuals(x, y, z, w, rp, rd);
                mu = 0.0;
                for (int j = 0; j < n; ++j) {
                    if (has_l(j)) {
                        mu += g[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)];
                    }
                    if (has_u(j)) {
                        mu += t[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)];
                    }
                }
                mu = nb > 0 ? mu / nb : 0.0;
                dobj = dual_objective();
                res.rel_dual = inf_norm(rd) / (1.0 + cnorm);
                res.rel_gap = std::abs(pobj - dobj) / (1.0 + std::max(std::abs(pobj), std::abs(dobj)));
            }
            prev_rd = res.rel_dual;
            snap_y = y;
            snap_z = z;
            snap_w = w;

            if (trace) {
                std::fprintf(stderr, "ipm %3d: mu=%9.3e rp=%9.3e rd=%9.3e gap=%9.3e pobj=%.8e\n", iter, mu,
                             res.rel_primal, res.rel_dual, res.rel_gap, pobj);
            }
            if (!std::isfinite(mu) || !std::isfinite(res.rel_primal) || !std::isfinite(res.rel_dual) ||
                !std::isfinite(res.rel_gap)) {
                break; // numerical breakdown; fall back to the best iterate
            }
            double score = std::max({res.rel_primal, res.rel_dual, res.rel_gap});
            if (score < best_score) {
                best_score = score;
                best_x = x;
                best_y = y;
                best_rp = res.rel_primal;
                best_rd = res.rel_dual;
                best_gap = res.rel_gap;
            }
            if (res.rel_primal <= tol && res.rel_dual <= tol && res.rel_gap <= tol) {
                res.converged = true;
                break;
            }
            if (score < 0.995 * best) {
                best = std::min(best, score);
                since_best = 0;
            } else if (++since_best > 30) {
                break; // stalled
            }
            if (inf_norm(x) > 1e14 || inf_norm(y) > 1e14) {
                break; // diverging
            }

            // KKT diagonal for this iteration
            for (int j = 0; j < n; ++j) {
                double ti = 0.0;
                if (has_l(j)) {
                    ti += z[static_cast<std::size_t>(j)] / std::max(g[static_cast<std::size_t>(j)], 1e-300);
                }
                if (has_u(j)) {
                    ti += w[static_cast<std::size_t>(j)] / std::max(t[static_cast<std::size_t>(j)], 1e-300);
                }
                // only bounded to keep the arithmetic finite; a real clamp
                // would desynchronize the recovered dual step from the
                // KKT solution and blow up dual feasibility
                theta_inv[static_cast<std::size_t>(j)] = std::min(ti, 1e30);
            }
            factorize(theta_inv);

            // affine direction
            for (int j = 0; j < n; ++j) {
                double v = rd[static_cast<std::size_t>(j)];
                if (has_l(j)) {
                    v += z[static_cast<std::size_t>(j)];
                }
                if (has_u(j)) {
                    v -= w[static_cast<std::size_t>(j)];
                }
                rhs_x[static_cast<std::size_t>(j)] = v;
            }
            solve_kkt(rhs_x, rp, dx_a, dy_a);
            for (int j = 0; j < n; ++j) {
                dz_a[static_cast<std::size_t>(j)] =
                    has_l(j) ? (-g[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)] -
                                z[static_cast<std::size_t>(j)] * dx_a[static_cast<std::size_t>(j)]) /
                                   g[static_cast<std::size_t>(j)]
                             : 0.0;
                dw_a[static_cast<std::size_t>(j)] =
                    has_u(j) ? (-t[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)] +
                                w[static_cast<std::size_t>(j)] * dx_a[static_cast<std::size_t>(j)]) /
                                   t[static_cast<std::size_t>(j)]
                             : 0.0;
            }
            double ap_aff = max_step(g, t, dx_a);
            double ad_aff = max_step_dual(z, dz_a, w, dw_a);
            double mu_aff = 0.0;
            for (int j = 0; j < n; ++j) {
                if (has_l(j)) {
                    mu_aff += (g[static_cast<std::size_t>(j)] + ap_aff * dx_a[static_cast<std::size_t>(j)]) *
                              (z[static_cast<std::size_t>(j)] + ad_aff * dz_a[static_cast<std::size_t>(j)]);
                }
                if (has_u(j)) {
                    mu_aff += (t[static_cast<std::size_t>(j)] - ap_aff * dx_a[static_cast<std::size_t>(j)]) *
                              (w[static_cast<std::size_t>(j)] + ad_aff * dw_a[static_cast<std::size_t>(j)]);
                }
            }
            mu_aff = nb > 0 ? mu_aff / nb : 0.0;
            double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3.0) : 0.0;
            sigma = std::min(std::max(sigma, 1e-8), 0.99999);

            // combined corrector direction
            for (int j = 0; j < n; ++j) {
                double v = rd[static_cast<std::size_t>(j)];
                if (has_l(j)) {
                    double rcg = sigma * mu - g[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)] -
                                 dx_a[static_cast<std::size_t>(j)] * dz_a[static_cast<std::size_t>(j)];
                    v -= rcg / g[static_cast<std::size_t>(j)];
                }
                if (has_u(j)) {
                    double rct = sigma * mu - t[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)] +
                                 dx_a[static_cast<std::size_t>(j)] * dw_a[static_cast<std::size_t>(j)];
                    v += rct / t[static_cast<std::size_t>(j)];
                }
                rhs_x[static_cast<std::size_t>(j)] = v;
            }
            solve_kkt(rhs_x, rp, dx, dy);
            for (int j = 0; j < n; ++j) {
                if (has_l(j)) {
                    double rcg = sigma * mu - g[static_cast<std::size_t>(j)] * z[static_cast<std::size_t>(j)] -
                                 dx_a[static_cast<std::size_t>(j)] * dz_a[static_cast<std::size_t>(j)];
                    dz[static_cast<std::size_t>(j)] = (rcg - z[static_cast<std::size_t>(j)] * dx[static_cast<std::size_t>(j)]) /
                                                      g[static_cast<std::size_t>(j)];
                } else {
                    dz[static_cast<std::size_t>(j)] = 0.0;
                }
                if (has_u(j)) {
                    double rct = sigma * mu - t[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)] +
                                 dx_a[static_cast<std::size_t>(j)] * dw_a[static_cast<std::size_t>(j)];
                    dw[static_cast<std::size_t>(j)] = (rct + w[static_cast<std::size_t>(j)] * dx[static_cast<std::size_t>(j)]) /
                                                      t[static_cast<std::size_t>(j)];
                } else {
                    dw[static_cast<std::size_t>(j)] = 0.0;
                }
            }

            double frac = mu < 1e-6 ? 0.99995 : 0.9995;
            double ap = frac * max_step(g, t, dx);
            double ad = frac * max_step_dual(z, dz, w, dw);
            // the corrector can backfire near a degenerate optimal face;
            // fall back to the affine direction when it collapses the step
            if (std::min(ap, ad) < 0.01 * frac * std::min(ap_aff, ad_aff)) {
                dx = dx_a;
                dy = dy_a;
                dz = dz_a;
                dw = dw_a;
                ap = frac * max_step(g, t, dx);
                ad = frac * max_step_dual(z, dz, w, dw);
            }

            // multiple centrality correctors: push outlier complementarity
            // products toward the central target to enlarge the steps
            for (int round = 0; round < 3; ++round) {
                double ap_want = std::min(ap / frac + 0.1, 1.0);
                double ad_want = std::min(ad / frac + 0.1, 1.0);
                const double target = sigma * mu;
                const double bmin = 0.1, bmax = 10.0;
                bool any = false;
                for (int j = 0; j < n; ++j) {
                    double cg = 0.0, ct = 0.0;
                    if (has_l(j)) {
                        double v = (g[static_cast<std::size_t>(j)] + ap_want * dx[static_cast<std::size_t>(j)]) *
                                   (z[static_cast<std::size_t>(j)] + ad_want * dz[static_cast<std::size_t>(j)]);
                        if (v < bmin * target) {
                            cg = bmin * target - v;
                        } else if (v > bmax * target) {
                            cg = -std::min(v - bmax * target, bmax * target);
                        }
                    }
                    if (has_u(j)) {
                        double v = (t[static_cast<std::size_t>(j)] - ap_want * dx[static_cast<std::size_t>(j)]) *
                                   (w[static_cast<std::size_t>(j)] + ad_want * dw[static_cast<std::size_t>(j)]);
                        if (v < bmin * target) {
                            ct = bmin * target - v;
                        } else if (v > bmax * target) {
                            ct = -std::min(v - bmax * target, bmax * target);
                        }
                    }
                    corr_g_[static_cast<std::size_t>(j)] = cg;
                    corr_t_[static_cast<std::size_t>(j)] = ct;
                    any = any || cg != 0.0 || ct != 0.0;
                }
                if (!any) {
                    break;
                }
                for (int j = 0; j < n; ++j) {
                    double v = 0.0;
                    if (has_l(j)) {
                        v -= corr_g_[static_cast<std::size_t>(j)] / g[static_cast<std::size_t>(j)];
                    }
                    if (has_u(j)) {
                        v += corr_t_[static_cast<std::size_t>(j)] / t[static_cast<std::size_t>(j)];
                    }
                    rhs_x[static_cast<std::size_t>(j)] = v;
                }
                std::fill(zero_m_.begin(), zero_m_.end(), 0.0);
                solve_kkt(rhs_x, zero_m_, ddx_, ddy_);
                double ap_new, ad_new;
                for (int j = 0; j < n; ++j) {
                    trial_dx_[static_cast<std::size_t>(j)] = dx[static_cast<std::size_t>(j)] + ddx_[static_cast<std::size_t>(j)];
                    trial_dz_[static_cast<std::size_t>(j)] =
                        has_l(j) ? dz[static_cast<std::size_t>(j)] +
                                       (corr_g_[static_cast<std::size_t>(j)] -
                                        z[static_cast<std::size_t>(j)] * ddx_[static_cast<std::size_t>(j)]) /
                                           g[static_cast<std::size_t>(j)]
                                 : 0.0;
                    trial_dw_[static_cast<std::size_t>(j)] =
                        has_u(j) ? dw[static_cast<std::size_t>(j)] +
                                       (corr_t_[static_cast<std::size_t>(j)] +
                                        w[static_cast<std::size_t>(j)] * ddx_[static_cast<std::size_t>(j)]) /
                                           t[static_cast<std::size_t>(j)]
                                 : 0.0;
                }
                ap_new = frac * max_step(g, t, trial_dx_);
                ad_new = frac * max_step_dual(z, trial_dz_, w, trial_dw_);
                // accept only a genuine enlargement of both step lengths
                if (ap_new + 1e-12 < ap || ad_new + 1e-12 < ad || ap_new + ad_new < ap + ad + 0.01) {
                    break;
                }
                ap = ap_new;
                ad = ad_new;
                dx.swap(trial_dx_);
                dz.swap(trial_dz_);
                dw.swap(trial_dw_);
                for (int i = 0; i < m; ++i) {
                    dy[static_cast<std::size_t>(i)] += ddy_[static_cast<std::size_t>(i)];
                }
            }
            ap = std::min(ap, 1.0);
            ad = std::min(ad, 1.0);
            if (trace) {
                std::fprintf(stderr, "  ap_aff=%.3e ad_aff=%.3e sigma=%.3e ap=%.3e ad=%.3e\n", ap_aff, ad_aff,
                             sigma, ap, ad);
            }
            bool finite = true;
            for (int j = 0; j < n && finite; ++j) {
                finite = std::isfinite(dx[static_cast<std::size_t>(j)]) &&
                         std::isfinite(dz[static_cast<std::size_t>(j)]) &&
                         std::isfinite(dw[static_cast<std::size_t>(j)]);
            }
            for (int i = 0; i < m && finite; ++i) {
                finite = std::isfinite(dy[static_cast<std::size_t>(i)]);
            }
            if (!finite) {
                break; // direction breakdown; fall back to the best iterate
            }
            if (ap < 1e-11 && ad < 1e-11) {
                break; // no usable step
            }

            for (int j = 0; j < n; ++j) {
                x[static_cast<std::size_t>(j)] += ap * dx[static_cast<std::size_t>(j)];
                if (has_l(j)) {
                    g[static_cast<std::size_t>(j)] += ap * dx[static_cast<std::size_t>(j)];
                    z[static_cast<std::size_t>(j)] += ad * dz[static_cast<std::size_t>(j)];
                }
                if (has_u(j)) {
                    t[static_cast<std::size_t>(j)] -= ap * dx[static_cast<std::size_t>(j)];
                    w[static_cast<std::size_t>(j)] += ad * dw[static_cast<std::size_t>(j)];
                }
            }
            for (int i = 0; i < m; ++i) {
                y[static_cast<std::size_t>(i)] += ad * dy[static_cast<std::size_t>(i)];
            }
        }

        if (!res.converged && !best_x.empty()) {
            // report (and possibly accept) the best iterate seen
            x = best_x;
            y = best_y;
            res.rel_primal = best_rp;
            res.rel_dual = best_rd;
            res.rel_gap = best_gap;
            if (best_rp <= opts_.accept_feas && best_rd <= opts_.accept_feas &&
                best_gap <= opts_.accept_gap) {
                res.converged = true;
            }
        }

        if (res.converged) {
            // primal polish: re-solve for the remaining primal residual at
            // the final barrier so the unscaled point passes strict row
            // audits
            for (int round = 0; round < 2; ++round) {
                compute_residuals(x, y, z, w, rp, rd);
                double rn = inf_norm(rp);
                if (rn <= 1e-11 * (1.0 + bnorm)) {
                    break;
                }
                for (int j = 0; j < n; ++j) {
                    double ti = 0.0;
                    if (has_l(j)) {
                        ti += z[static_cast<std::size_t>(j)] / std::max(g[static_cast<std::size_t>(j)], 1e-300);
                    }
                    if (has_u(j)) {
                        ti += w[static_cast<std::size_t>(j)] / std::max(t[static_cast<std::size_t>(j)], 1e-300);
                    }
                    theta_inv[static_cast<std::size_t>(j)] = std::min(ti, 1e30);
                }
                factorize(theta_inv);
                std::fill(rhs_x.begin(), rhs_x.end(), 0.0);
                solve_kkt(rhs_x, rp, dx, dy);
                double step = std::min(1.0, 0.999 * max_step(g, t, dx));
                for (int j = 0; j < n; ++j) {
                    x[static_cast<std::size_t>(j)] += step * dx[static_cast<std::size_t>(j)];
                    if (has_l(j)) {
                        g[static_cast<std::size_t>(j)] += step * dx[static_cast<std::size_t>(j)];
                    }
                    if (has_u(j)) {
                        t[static_cast<std::size_t>(j)] -= step * dx[static_cast<std::size_t>(j)];
                    }
                }
            }
            compute_residuals(x, y, z, w, rp, rd);
            res.rel_primal = inf_norm(rp) / (1.0 + bnorm);
        }

        // unscale
        res.x.assign(static_cast<std::size_t>(n), 0.0);
        res.y.assign(static_cast<std::size_t>(m), 0.0);
        for (int j = 0; j < n; ++j) {
            res.x[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] * col_scale_[static_cast<std::size_t>(j)];
        }
        for (int i = 0; i < m; ++i) {
            res.y[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] * row_scale_[static_cast<std::size_t>(i)];
        }
        return res;
    }

  private:
    bool has_l(int j) const { return lb_[static_cast<std::size_t>(j)] != -kInf; }
    bool has_u(int j) const { return ub_[static_cast<std::size_t>(j)] != kInf; }

    static double inf_norm(const std::vector<double>& v)
    {
        double m = 0.0;
        for (double a : v) {
            m = std::max(m, std::abs(a));
        }
        return m;
    }
    static double dot(const std::vector<double>& a, const std::vector<double>& b)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            s += a[i] * b[i];
        }
        return s;
    }

    double max_step(const std::vector<double>& g, const std::vector<double>& t,
                    const std::vector<double>& dx) const
    {
        double a = 1.0;
        for (int j = 0; j < n_; ++j) {
            if (has_l(j) && dx[static_cast<std::size_t>(j)] < 0.0) {
                a = std::min(a, -g[static_cast<std::size_t>(j)] / dx[static_cast<std::size_t>(j)]);
            }
            if (has_u(j) && dx[static_cast<std::size_t>(j)] > 0.0) {
                a = std::min(a, t[static_cast<std::size_t>(j)] / dx[static_cast<std::size_t>(j)]);
            }
        }
        return a;
    }
    double max_step_dual(const std::vector<double>& z, const std::vector<double>& dz,
                         const std::vector<double>& w, const std::vector<double>& dw) const
    {
        double a = 1.0;
        for (int j = 0; j < n_; ++j) {
            if (has_l(j) && dz[static_cast<std::size_t>(j)] < 0.0) {
                a = std::min(a, -z[static_cast<std::size_t>(j)] / dz[static_cast<std::size_t>(j)]);
            }
            if (has_u(j) && dw[static_cast<std::size_t>(j)] < 0.0) {
                a = std::min(a, -w[static_cast<std::size_t>(j)] / dw[static_cast<std::size_t>(j)]);
            }
        }
        return a;
    }

    void compute_residuals(const std::vector<double>& x, const std::vector<double>& y,
                           const std::vector<double>& z, const std::vector<double>& w,
                           std::vector<double>& rp, std::vector<double>& rd) const
    {
        rp = b_;
        for (int j = 0; j < n_; ++j) {
            double xj = x[static_cast<std::size_t>(j)];
            if (xj != 0.0) {
                for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                    rp[static_cast<std::size_t>(Ai_[p])] -= Ax_[p] * xj;
                }
            }
        }
        for (int j = 0; j < n_; ++j) {
            double v = c_[static_cast<std::size_t>(j)];
            for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                v -= Ax_[p] * y[static_cast<std::size_t>(Ai_[p])];
            }
            v -= z[static_cast<std::size_t>(j)];
            v += w[static_cast<std::size_t>(j)];
            rd[static_cast<std::size_t>(j)] = v;
        }
    }

    // Ruiz equilibration into local scaled copies.
    void scale()
    {
        const auto& ilp = ilp_;
        Ap_ = ilp.col_ptr;
        Ai_ = ilp.row_ind;
        Ax_ = ilp.values;
        b_ = ilp.b;
        c_ = ilp.c;
        lb_ = ilp.lb;
        ub_ = ilp.ub;
        row_scale_.assign(static_cast<std::size_t>(m_), 1.0);
        col_scale_.assign(static_cast<std::size_t>(n_), 1.0);
        for (int pass = 0; pass < 5; ++pass) {
            for (int j = 0; j < n_; ++j) {
                double mx = 0.0;
                for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                    mx = std::max(mx, std::abs(Ax_[p]));
                }
                if (mx > 0.0) {
                    double s = 1.0 / std::sqrt(mx);
                    for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                        Ax_[p] *= s;
                    }
                    col_scale_[static_cast<std::size_t>(j)] *= s;
                }
            }
            std::vector<double> rmax(static_cast<std::size_t>(m_), 0.0);
            for (int j = 0; j < n_; ++j) {
                for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                    rmax[static_cast<std::size_t>(Ai_[p])] = std::max(rmax[static_cast<std::size_t>(Ai_[p])], std::abs(Ax_[p]));
                }
            }
            std::vector<double> rs(static_cast<std::size_t>(m_), 1.0);
            for (int i = 0; i < m_; ++i) {
                if (rmax[static_cast<std::size_t>(i)] > 0.0) {
                    rs[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(rmax[static_cast<std::size_t>(i)]);
                    row_scale_[static_cast<std::size_t>(i)] *= rs[static_cast<std::size_t>(i)];
                }
            }
            for (int j = 0; j < n_; ++j) {
                for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                    Ax_[p] *= rs[static_cast<std::size_t>(Ai_[p])];
                }
            }
        }
        // x = col_scale .* x_scaled  =>  bounds and costs transform with it
        for (int i = 0; i < m_; ++i) {
            b_[static_cast<std::size_t>(i)] *= row_scale_[static_cast<std::size_t>(i)];
        }
        for (int j = 0; j < n_; ++j) {
            c_[static_cast<std::size_t>(j)] *= col_scale_[static_cast<std::size_t>(j)];
            if (lb_[static_cast<std::size_t>(j)] != -kInf) {
                lb_[static_cast<std::size_t>(j)] /= col_scale_[static_cast<std::size_t>(j)];
            }
            if (ub_[static_cast<std::size_t>(j)] != kInf) {
                ub_[static_cast<std::size_t>(j)] /= col_scale_[static_cast<std::size_t>(j)];
            }
        }
    }

    void build_kkt_pattern()
    {
        const int N = n_ + m_;
        // bipartite adjacency for the ordering
        std::vector<std::size_t> adj_ptr(static_cast<std::size_t>(N) + 1, 0);
        for (int j = 0; j < n_; ++j) {
            adj_ptr[static_cast<std::size_t>(j) + 1] = Ap_[static_cast<std::size_t>(j) + 1] - Ap_[static_cast<std::size_t>(j)];
        }
        for (int j = 0; j < n_; ++j) {
            for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                ++adj_ptr[static_cast<std::size_t>(n_ + Ai_[p]) + 1];
            }
        }
        for (int v = 0; v < N; ++v) {
            adj_ptr[static_cast<std::size_t>(v) + 1] += adj_ptr[static_cast<std::size_t>(v)];
        }
        std::vector<int> adj(adj_ptr.back());
        std::vector<std::size_t> fill(adj_ptr.begin(), adj_ptr.end() - 1);
        for (int j = 0; j < n_; ++j) {
            for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                int i = Ai_[p];
                adj[fill[static_cast<std::size_t>(j)]++] = n_ + i;
                adj[fill[static_cast<std::size_t>(n_ + i)]++] = j;
            }
        }
        perm_ = rcm_border_order(N, adj_ptr, adj);
        iperm_.assign(static_cast<std::size_t>(N), 0);
        for (int k = 0; k < N; ++k) {
            iperm_[static_cast<std::size_t>(perm_[static_cast<std::size_t>(k)])] = k;
        }

        // permuted upper-triangular pattern: one diagonal per node plus one
        // entry per A nonzero
        const std::size_t nnz = Ax_.size() + static_cast<std::size_t>(N);
        std::vector<int> tri_col(nnz), tri_row(nnz);
        std::vector<double> tri_val(nnz);
        std::size_t k = 0;
        for (int v = 0; v < N; ++v) {
            tri_col[k] = v;
            tri_row[k] = v;
            tri_val[k] = 0.0;
            ++k;
        }
        for (int j = 0; j < n_; ++j) {
            for (std::size_t p = Ap_[static_cast<std::size_t>(j)]; p < Ap_[static_cast<std::size_t>(j) + 1]; ++p) {
                int a = iperm_[static_cast<std::size_t>(j)];
                int b = iperm_[static_cast<std::size_t>(n_ + Ai_[p])];
                tri_col[k] = std::max(a, b);
                tri_row[k] = std::min(a, b);
                tri_val[k] = Ax_[p];
                ++k;
            }
        }
        pattern_.n = N;
        pattern_.ptr.assign(static_cast<std::size_t>(N) + 1, 0);
        for (std::size_t e = 0; e < nnz; ++e) {
            ++pattern_.ptr[static_cast<std::size_t>(tri_col[e]) + 1];
        }
        for (int v = 0; v < N; ++v) {
            pattern_.ptr[static_cast<std::size_t>(v) + 1] += pattern_.ptr[static_cast<std::size_t>(v)];
        }
        pattern_.ind.assign(nnz, 0);
        values_.assign(nnz, 0.0);
        pattern_.diag_slot.assign(static_cast<std::size_t>(N), 0);
        std::vector<std::size_t> next(pattern_.ptr.begin(), pattern_.ptr.end() - 1);
        for (std::size_t e = 0; e < nnz; ++e) {
            std::size_t slot = next[static_cast<std::size_t>(tri_col[e])]++;
            pattern_.ind[slot] = tri_row[e];
            values_[slot] = tri_val[e];
            if (tri_row[e] == tri_col[e]) {
                pattern_.diag_slot[static_cast<std::size_t>(tri_col[e])] = slot;
            }
        }
        factor_.analyze(pattern_);
        expected_sign_.assign(static_cast<std::size_t>(N), 0);
        for (int j = 0; j < n_; ++j) {
            expected_sign_[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(j)])] = -1;
        }
        for (int i = 0; i < m_; ++i) {
            expected_sign_[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(n_ + i)])] = 1;
        }
        kkt_rhs_.assign(static_cast<std::size_t>(N), 0.0);
        kkt_sol_.assign(static_cast<std::size_t>(N), 0.0);
        kkt_res_.assign(static_cast<std::size_t>(N), 0.0);
        kkt_tmp_.assign(static_cast<std::size_t>(N), 0.0);
    }

    // Factorize with the given barrier diagonal, escalating the
    // regularization whenever cancellation forces pivot clamps; a clean
    // factorization keeps the recovered Newton direction bounded.
    void factorize(const std::vector<double>& theta_inv)
    {
        double delta = opts_.regularization;
        for (int attempt = 0; attempt < 5; ++attempt) {
            for (int j = 0; j < n_; ++j) {
                values_[pattern_.diag_slot[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(j)])]] =
                    -theta_inv[static_cast<std::size_t>(j)] - delta;
            }
            for (int i = 0; i < m_; ++i) {
                values_[pattern_.diag_slot[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(n_ + i)])]] =
                    delta;
            }
            int clamped = factor_.factorize(pattern_, values_, expected_sign_, delta * 1e-2 + 1e-300);
            if (std::getenv("GRIDPLAN_IPM_TRACE") && clamped > 0) {
                std::fprintf(stderr, "  factorize: %d clamped pivots at delta=%.1e\n", clamped, delta);
            }
            if (clamped == 0 || delta > 1e-3) {
                break;
            }
            delta *= 100.0;
        }
        // refinement targets the unregularized system, with the factorized
        // (regularized) matrix as the preconditioner; otherwise rho |y|
        // caps the reachable primal accuracy
        values_true_ = values_;
        for (int j = 0; j < n_; ++j) {
            values_true_[pattern_.diag_slot[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(j)])]] =
                -theta_inv[static_cast<std::size_t>(j)];
        }
        for (int i = 0; i < m_; ++i) {
            values_true_[pattern_.diag_slot[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(n_ + i)])]] =
                0.0;
        }
    }

    // multiply v by the unregularized KKT matrix
    void kkt_multiply(const std::vector<double>& v, std::vector<double>& out) const
    {
        std::fill(out.begin(), out.end(), 0.0);
        for (int col = 0; col < pattern_.n; ++col) {
            for (std::size_t p = pattern_.ptr[static_cast<std::size_t>(col)]; p < pattern_.ptr[static_cast<std::size_t>(col) + 1]; ++p) {
                int row = pattern_.ind[p];
                double a = values_true_[p];
                out[static_cast<std::size_t>(row)] += a * v[static_cast<std::size_t>(col)];
                if (row != col) {
                    out[static_cast<std::size_t>(col)] += a * v[static_cast<std::size_t>(row)];
                }
            }
        }
    }

    void solve_kkt(const std::vector<double>& rx, const std::vector<double>& ry,
                   std::vector<double>& dx, std::vector<double>& dy)
    {
        const int N = n_ + m_;
        for (int j = 0; j < n_; ++j) {
            kkt_rhs_[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(j)])] = rx[static_cast<std::size_t>(j)];
        }
        for (int i = 0; i < m_; ++i) {
            kkt_rhs_[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(n_ + i)])] = ry[static_cast<std::size_t>(i)];
        }
        kkt_sol_ = kkt_rhs_;
        factor_.solve(kkt_sol_);
        double rhs_norm = inf_norm(kkt_rhs_);
        double best_rn = kInf;
        for (int round = 0; round < 8; ++round) {
            kkt_multiply(kkt_sol_, kkt_res_);
            for (int v = 0; v < N; ++v) {
                kkt_res_[static_cast<std::size_t>(v)] = kkt_rhs_[static_cast<std::size_t>(v)] - kkt_res_[static_cast<std::size_t>(v)];
            }
            double rn = inf_norm(kkt_res_);
            if (rn < best_rn) {
                best_rn = rn;
                kkt_best_ = kkt_sol_;
            } else {
                // refinement stopped contracting; keep the best correction
                kkt_sol_ = kkt_best_;
                break;
            }
            if (rn <= 1e-13 * (1.0 + rhs_norm)) {
                break;
            }
            kkt_tmp_ = kkt_res_;
            factor_.solve(kkt_tmp_);
            for (int v = 0; v < N; ++v) {
                kkt_sol_[static_cast<std::size_t>(v)] += kkt_tmp_[static_cast<std::size_t>(v)];
            }
        }
        if (std::getenv("GRIDPLAN_IPM_TRACE")) {
            std::fprintf(stderr, "  kkt residual %.3e (rhs %.3e)\n", best_rn, rhs_norm);
        }
        for (int j = 0; j < n_; ++j) {
            dx[static_cast<std::size_t>(j)] = kkt_sol_[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(j)])];
        }
        for (int i = 0; i < m_; ++i) {
            dy[static_cast<std::size_t>(i)] = kkt_sol_[static_cast<std::size_t>(iperm_[static_cast<std::size_t>(n_ + i)])];
        }
    }

    const InternalLp& ilp_;
    IpmOptions opts_;
    int n_ = 0, m_ = 0;
    std::vector<std::size_t> Ap_;
    std::vector<int> Ai_;
    std::vector<double> Ax_;
    std::vector<double> b_, c_, lb_, ub_;
    std::vector<double> row_scale_, col_scale_;
    std::vector<int> perm_, iperm_;
    SymPattern pattern_;
    std::vector<double> values_;
    std::vector<int> expected_sign_;
    LdlFactor factor_;
    std::vector<double> values_true_;
    std::vector<double> kkt_rhs_, kkt_sol_, kkt_res_, kkt_tmp_, kkt_best_;
    std::vector<double> corr_g_, corr_t_, ddx_, ddy_, trial_dx_, trial_dz_, trial_dw_, zero_m_;
};

} // namespace ipm_detail

class InteriorPointSolver final : public LpSolver {
  public:
    explicit InteriorPointSolver(IpmOptions opts = {}) : opts_(opts) {}

    std::string name() const override { return "ipm"; }

    LpSolution solve(const LinearProgram& lp) override
    {
        if (!lp.finalized()) {
            throw LpError("solve: linear program is not finalized");
        }
        if (lp.num_cols() == 0) {
            throw LpError("solve: linear program has no columns");
        }
        LpSolution sol = solve_plain(lp, opts_);
        if (sol.status != SolveStatus::failure || !opts_.classify) {
            return sol;
        }

        // classification: total-violation relaxation, then recession ray
        LinearProgram elastic = build_elastic(lp);
        IpmOptions eopts = opts_;
        eopts.classify = false;
        LpSolution esol = solve_plain(elastic, eopts);
        if (esol.status == SolveStatus::optimal) {
            double scale = 1.0;
            for (int i = 0; i < lp.num_rows(); ++i) {
                scale = std::max(scale, std::abs(lp.row(i).rhs));
            }
            if (esol.objective > 1e-7 * scale) {
                sol.status = SolveStatus::infeasible;
                sol.message = "total constraint violation " + std::to_string(esol.objective) +
                              " in the elastic relaxation";
                return sol;
            }
        }
        bool has_ray = false;
        LinearProgram ray = build_ray(lp, has_ray);
        if (has_ray) {
            LpSolution rsol = solve_plain(ray, eopts);
            if (rsol.status == SolveStatus::optimal && rsol.objective < -0.5) {
                sol.status = SolveStatus::unbounded;
                sol.message = "recession direction with negative cost";
                return sol;
            }
        }
        // feasible and bounded as far as the certificates go: retry harder
        IpmOptions retry = opts_;
        retry.classify = false;
        retry.max_iterations = opts_.max_iterations * 2;
        retry.regularization = opts_.regularization * 100.0;
        LpSolution second = solve_plain(lp, retry);
        if (second.status == SolveStatus::optimal) {
            return second;
        }
        sol.status = SolveStatus::failure;
        if (sol.message.empty()) {
            sol.message = "interior point iteration did not converge";
        }
        return sol;
    }

  private:
    static LpSolution solve_plain(const LinearProgram& lp, const IpmOptions& opts)
    {
        LpSolution sol;
        ipm_detail::PresolveOutcome pre = ipm_detail::presolve(lp);
        if (pre.decided) {
            sol.status = pre.status;
            sol.message = pre.message;
            if (pre.status == SolveStatus::optimal) {
                sol.x = pre.ilp.resolved;
                // all columns were resolved; re-check rows before accepting
                if (lp.max_violation(sol.x) > 1e-9) {
                    sol.status = SolveStatus::infeasible;
                    sol.message = "presolved point violates a row";
                    sol.x.clear();
                    return sol;
                }
                sol.duals.assign(static_cast<std::size_t>(lp.num_rows()), 0.0);
                sol.objective = lp.objective_value(sol.x);
            }
            return sol;
        }

        ipm_detail::IpmCore core(pre.ilp, opts);
        ipm_detail::CoreResult res = core.run();
        sol.iterations = res.iterations;
        if (!res.converged) {
            sol.status = SolveStatus::failure;
            sol.message = "not converged (primal " + std::to_string(res.rel_primal) + ", dual " +
                          std::to_string(res.rel_dual) + ", gap " + std::to_string(res.rel_gap) + ")";
            return sol;
        }

        sol.x.assign(static_cast<std::size_t>(lp.num_cols()), 0.0);
        for (int j = 0; j < lp.num_cols(); ++j) {
            int jj = pre.ilp.col_map[static_cast<std::size_t>(j)];
            double v = jj >= 0 ? res.x[static_cast<std::size_t>(jj)] : pre.ilp.resolved[static_cast<std::size_t>(j)];
            // project interior iterates onto the box exactly
            v = std::min(std::max(v, lp.column(j).lb), lp.column(j).ub);
            sol.x[static_cast<std::size_t>(j)] = v;
        }
        sol.duals.assign(static_cast<std::size_t>(lp.num_rows()), 0.0);
        for (int i = 0; i < lp.num_rows(); ++i) {
            int ii = pre.ilp.row_map[static_cast<std::size_t>(i)];
            if (ii >= 0) {
                sol.duals[static_cast<std::size_t>(i)] = res.y[static_cast<std::size_t>(ii)];
            }
        }
        sol.objective = lp.objective_value(sol.x);
        double viol = lp.max_violation(sol.x);
        if (viol > 1e-6) {
            if (std::getenv("GRIDPLAN_IPM_TRACE")) {
                std::vector<double> act = lp.row_activity(sol.x);
                int worst = -1;
                double wv = 0.0;
                for (int i = 0; i < lp.num_rows(); ++i) {
                    double scale = 1.0 + std::abs(lp.row(i).rhs);
                    double v = 0.0;
                    switch (lp.row(i).sense) {
                    case RowSense::le: v = act[static_cast<std::size_t>(i)] - lp.row(i).rhs; break;
                    case RowSense::ge: v = lp.row(i).rhs - act[static_cast<std::size_t>(i)]; break;
                    case RowSense::eq: v = std::abs(act[static_cast<std::size_t>(i)] - lp.row(i).rhs); break;
                    }
                    if (v / scale > wv) {
                        wv = v / scale;
                        worst = i;
                    }
                }
                std::fprintf(stderr, "  audit failure: max violation %.3e at row %s\n", viol,
                             worst >= 0 ? lp.row(worst).name.c_str() : "(bound)");
            }
            sol.status = SolveStatus::failure;
            sol.message = "converged point fails the feasibility audit";
            sol.x.clear();
            sol.duals.clear();
            return sol;
        }
        sol.status = SolveStatus::optimal;
        return sol;
    }

    static LinearProgram build_elastic(const LinearProgram& lp)
    {
        LinearProgram e;
        for (int j = 0; j < lp.num_cols(); ++j) {
            const auto& c = lp.column(j);
            e.add_column(c.name, c.lb, c.ub, 0.0);
        }
        for (int i = 0; i < lp.num_rows(); ++i) {
            const auto& r = lp.row(i);
            e.add_row(r.name, r.sense, r.rhs);
        }
        for (const auto& entry : lp.entries()) {
            e.set_coeff(entry.row, entry.col, entry.value);
        }
        for (int i = 0; i < lp.num_rows(); ++i) {
            RowSense s = lp.row(i).sense;
            if (s == RowSense::ge || s == RowSense::eq) {
                int up = e.add_column("elastic_up_" + std::to_string(i), 0.0, kInf, 1.0);
                e.set_coeff(i, up, 1.0);
            }
            if (s == RowSense::le || s == RowSense::eq) {
                int dn = e.add_column("elastic_dn_" + std::to_string(i), 0.0, kInf, 1.0);
                e.set_coeff(i, dn, -1.0);
            }
        }
        e.finalize();
        return e;
    }

    static LinearProgram build_ray(const LinearProgram& lp, bool& has_ray_columns)
    {
        LinearProgram r;
        std::vector<int> dcol(static_cast<std::size_t>(lp.num_cols()), -1);
        bool any = false;
        for (int j = 0; j < lp.num_cols(); ++j) {
            const auto& c = lp.column(j);
            bool l = c.lb != -kInf;
            bool u = c.ub != kInf;
            if (l && u) {
                continue; // boxed directions vanish
            }
            double lb = l ? 0.0 : -kInf;
            double ub = u ? 0.0 : kInf;
            dcol[static_cast<std::size_t>(j)] = r.add_column("d_" + c.name, lb, ub, c.obj);
            any = true;
        }
        has_ray_columns = any;
        if (!any) {
            return r;
        }
        for (int i = 0; i < lp.num_rows(); ++i) {
            r.add_row(lp.row(i).name, lp.row(i).sense, 0.0);
        }
        for (const auto& entry : lp.entries()) {
            if (dcol[static_cast<std::size_t>(entry.col)] >= 0) {
                r.set_coeff(entry.row, dcol[static_cast<std::size_t>(entry.col)], entry.value);
            }
        }
        int norm = r.add_row("ray_normalization", RowSense::ge, -1.0);
        for (int j = 0; j < lp.num_cols(); ++j) {
            if (dcol[static_cast<std::size_t>(j)] >= 0 && lp.column(j).obj != 0.0) {
                r.set_coeff(norm, dcol[static_cast<std::size_t>(j)], lp.column(j).obj);
            }
        }
        r.finalize();
        return r;
    }

    IpmOptions opts_;
};

// Solver registry. An empty name falls back to the GRIDPLAN_SOLVER
// environment variable, then to the bundled interior point solver.
inline std::unique_ptr<LpSolver> make_solver(const std::string& name = {})
{
    std::string pick = name;
    if (pick.empty()) {
        if (const char* env = std::getenv("GRIDPLAN_SOLVER")) {
            pick = env;
        }
    }
    if (pick.empty() || pick == "ipm") {
        return std::make_unique<InteriorPointSolver>();
    }
    throw LpError("unknown solver '" + pick + "' (available: ipm)");
}

inline LpSolution solve_lp(const LinearProgram& lp)
{
    return InteriorPointSolver().solve(lp);
}

} // namespace gridplan
