#pragma once

// Sparse symmetric quasi-definite LDL^T factorization for the interior
// point KKT systems, plus the fill-reducing ordering used with it.
//
// The KKT matrix is
//     [ -Theta^-1 - delta I   A^T   ]
//     [        A            rho I   ]
// whose graph is exactly the bipartite column/row graph of A. Planning
// programs are chains of hourly blocks coupled by a handful of build and
// annual-accounting variables, so a reverse Cuthill-McKee order over the
// low-degree nodes with the high-degree ("border") nodes eliminated last
// keeps fill close to the natural band.
//
// The factorization is up-looking with a fixed symbolic pattern; only the
// diagonal values change between interior point iterations. Pivots are
// clamped to their expected sign (negative on the variable block, positive
// on the row block), which keeps the factorization stable without
// pivoting; iterative refinement at the solve level absorbs the
// perturbation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

namespace gridplan {

// Reverse Cuthill-McKee with a degree-threshold border. adj is a symmetric
// graph in CSR form. Returns perm with perm[new_index] = old_index.
inline std::vector<int> rcm_border_order(int n, const std::vector<std::size_t>& adj_ptr,
                                         const std::vector<int>& adj)
{
    std::vector<int> degree(static_cast<std::size_t>(n));
    double avg = 0.0;
    for (int v = 0; v < n; ++v) {
        degree[static_cast<std::size_t>(v)] =
            static_cast<int>(adj_ptr[static_cast<std::size_t>(v) + 1] - adj_ptr[static_cast<std::size_t>(v)]);
        avg += degree[static_cast<std::size_t>(v)];
    }
    avg = n > 0 ? avg / n : 0.0;

    std::size_t threshold = std::max<std::size_t>(64, static_cast<std::size_t>(8.0 * avg));
    std::vector<char> border(static_cast<std::size_t>(n), 0);
    for (;;) {
        std::size_t count = 0;
        for (int v = 0; v < n; ++v) {
            border[static_cast<std::size_t>(v)] = degree[static_cast<std::size_t>(v)] > static_cast<int>(threshold);
            count += border[static_cast<std::size_t>(v)];
        }
        if (count <= std::max<std::size_t>(static_cast<std::size_t>(n) / 10, 2000) || threshold > static_cast<std::size_t>(n)) {
            break;
        }
        threshold *= 2;
    }

    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    std::vector<int> frontier, next, scratch;

    auto bfs_component = [&](int start, bool record) {
        int last = start;
        frontier.assign(1, start);
        visited[static_cast<std::size_t>(start)] = 1;
        if (record) {
            order.push_back(start);
        }
        while (!frontier.empty()) {
            next.clear();
            for (int v : frontier) {
                scratch.clear();
                for (std::size_t p = adj_ptr[static_cast<std::size_t>(v)]; p < adj_ptr[static_cast<std::size_t>(v) + 1]; ++p) {
                    int u = adj[p];
                    if (!visited[static_cast<std::size_t>(u)] && !border[static_cast<std::size_t>(u)]) {
                        visited[static_cast<std::size_t>(u)] = 1;
                        scratch.push_back(u);
                    }
                }
                std::sort(scratch.begin(), scratch.end(), [&](int a, int b) {
                    if (degree[static_cast<std::size_t>(a)] != degree[static_cast<std::size_t>(b)]) {
                        return degree[static_cast<std::size_t>(a)] < degree[static_cast<std::size_t>(b)];
                    }
                    return a < b;
                });
                for (int u : scratch) {
                    next.push_back(u);
                    if (record) {
                        order.push_back(u);
                    }
                    last = u;
                }
            }
            frontier.swap(next);
        }
        return last;
    };

    for (int v = 0; v < n; ++v) {
        if (visited[static_cast<std::size_t>(v)] || border[static_cast<std::size_t>(v)]) {
            continue;
        }
        // pick the component's min-degree node, then one BFS pass toward a
        // pseudo-peripheral start
        int start = v;
        int peripheral = bfs_component(start, false);
        // reset visit marks for this component before the recording pass
        frontier.assign(1, start);
        std::vector<int> comp{start};
        visited[static_cast<std::size_t>(start)] = 2;
        while (!frontier.empty()) {
            next.clear();
            for (int u : frontier) {
                for (std::size_t p = adj_ptr[static_cast<std::size_t>(u)]; p < adj_ptr[static_cast<std::size_t>(u) + 1]; ++p) {
                    int w = adj[p];
                    if (visited[static_cast<std::size_t>(w)] == 1 && !border[static_cast<std::size_t>(w)]) {
                        visited[static_cast<std::size_t>(w)] = 2;
                        next.push_back(w);
                        comp.push_back(w);
                    }
                }
            }
            frontier.swap(next);
        }
        for (int u : comp) {
            visited[static_cast<std::size_t>(u)] = 0;
        }
        bfs_component(peripheral, true);
    }
    std::reverse(order.begin(), order.end());

    std::vector<int> border_nodes;
    for (int v = 0; v < n; ++v) {
        if (border[static_cast<std::size_t>(v)]) {
            border_nodes.push_back(v);
        }
    }
    std::sort(border_nodes.begin(), border_nodes.end(), [&](int a, int b) {
        if (degree[static_cast<std::size_t>(a)] != degree[static_cast<std::size_t>(b)]) {
            return degree[static_cast<std::size_t>(a)] < degree[static_cast<std::size_t>(b)];
        }
        return a < b;
    });
    order.insert(order.end(), border_nodes.begin(), border_nodes.end());
    return order;
}

// Upper-triangular CSC symmetric matrix with a fixed pattern.
struct SymPattern {
    int n = 0;
    std::vector<std::size_t> ptr; // n+1
    std::vector<int> ind;         // row indices, i <= column
    std::vector<std::size_t> diag_slot; // position of the diagonal entry per column
};

class LdlFactor {
  public:
    // Symbolic analysis: elimination tree and column counts.
    void analyze(const SymPattern& pattern)
    {
        n_ = pattern.n;
        parent_.assign(static_cast<std::size_t>(n_), -1);
        lnz_.assign(static_cast<std::size_t>(n_), 0);
        std::vector<int> flag(static_cast<std::size_t>(n_), -1);
        for (int k = 0; k < n_; ++k) {
            parent_[static_cast<std::size_t>(k)] = -1;
            flag[static_cast<std::size_t>(k)] = k;
            for (std::size_t p = pattern.ptr[static_cast<std::size_t>(k)]; p < pattern.ptr[static_cast<std::size_t>(k) + 1]; ++p) {
                int i = pattern.ind[p];
                while (i < k && flag[static_cast<std::size_t>(i)] != k) {
                    if (parent_[static_cast<std::size_t>(i)] == -1) {
                        parent_[static_cast<std::size_t>(i)] = k;
                    }
                    ++lnz_[static_cast<std::size_t>(i)];
                    flag[static_cast<std::size_t>(i)] = k;
                    i = parent_[static_cast<std::size_t>(i)];
                }
            }
        }
        lp_.assign(static_cast<std::size_t>(n_) + 1, 0);
        for (int k = 0; k < n_; ++k) {
            lp_[static_cast<std::size_t>(k) + 1] = lp_[static_cast<std::size_t>(k)] + static_cast<std::size_t>(lnz_[static_cast<std::size_t>(k)]);
        }
        li_.assign(lp_[static_cast<std::size_t>(n_)], 0);
        lx_.assign(lp_[static_cast<std::size_t>(n_)], 0.0);
        d_.assign(static_cast<std::size_t>(n_), 0.0);
        y_.assign(static_cast<std::size_t>(n_), 0.0);
        pattern_stack_.assign(static_cast<std::size_t>(n_), 0);
        fill_.assign(static_cast<std::size_t>(n_), 0);
        flag_.assign(static_cast<std::size_t>(n_), -1);
        analyzed_ = true;
    }

    std::size_t factor_nonzeros() const { return lp_.empty() ? 0 : lp_.back(); }

    // Numeric factorization. expected_sign[k] is -1 on the variable block
    // and +1 on the row block; pivots falling below pivot_floor in
    // magnitude (or crossing zero) are clamped to expected_sign *
    // pivot_floor. Returns the number of clamped pivots so the caller can
    // retry with stronger regularization.
    int factorize(const SymPattern& pattern, const std::vector<double>& values,
                  const std::vector<int>& expected_sign, double pivot_floor)
    {
        int clamped = 0;
        std::fill(fill_.begin(), fill_.end(), 0);
        for (int k = 0; k < n_; ++k) {
            int top = n_;
            y_[static_cast<std::size_t>(k)] = 0.0;
            flag_[static_cast<std::size_t>(k)] = k;
            for (std::size_t p = pattern.ptr[static_cast<std::size_t>(k)]; p < pattern.ptr[static_cast<std::size_t>(k) + 1]; ++p) {
                int i = pattern.ind[p];
                if (i > k) {
                    continue;
                }
                y_[static_cast<std::size_t>(i)] += values[p];
                int len = 0;
                while (flag_[static_cast<std::size_t>(i)] != k) {
                    pattern_stack_[static_cast<std::size_t>(len++)] = i;
                    flag_[static_cast<std::size_t>(i)] = k;
                    i = parent_[static_cast<std::size_t>(i)];
                }
                while (len > 0) {
                    pattern_stack_[static_cast<std::size_t>(--top)] = pattern_stack_[static_cast<std::size_t>(--len)];
                }
            }
            double dk = y_[static_cast<std::size_t>(k)];
            y_[static_cast<std::size_t>(k)] = 0.0;
            for (int s = top; s < n_; ++s) {
                int j = pattern_stack_[static_cast<std::size_t>(s)];
                double yj = y_[static_cast<std::size_t>(j)];
                y_[static_cast<std::size_t>(j)] = 0.0;
                std::size_t pend = lp_[static_cast<std::size_t>(j)] + static_cast<std::size_t>(fill_[static_cast<std::size_t>(j)]);
                for (std::size_t p = lp_[static_cast<std::size_t>(j)]; p < pend; ++p) {
                    y_[static_cast<std::size_t>(li_[p])] -= lx_[p] * yj;
                }
                double lkj = yj / d_[static_cast<std::size_t>(j)];
                dk -= lkj * yj;
                li_[pend] = k;
                lx_[pend] = lkj;
                ++fill_[static_cast<std::size_t>(j)];
            }
            // sign clamp keeps the quasi-definite factorization stable
            if (expected_sign[static_cast<std::size_t>(k)] > 0) {
                if (!(dk > pivot_floor)) {
                    dk = pivot_floor;
                    ++clamped;
                }
            } else {
                if (!(dk < -pivot_floor)) {
                    dk = -pivot_floor;
                    ++clamped;
                }
            }
            d_[static_cast<std::size_t>(k)] = dk;
        }
        return clamped;
    }

    // In-place solve of L D L^T x = b.
    void solve(std::vector<double>& b) const
    {
        for (int j = 0; j < n_; ++j) {
            double xj = b[static_cast<std::size_t>(j)];
            if (xj != 0.0) {
                for (std::size_t p = lp_[static_cast<std::size_t>(j)]; p < lp_[static_cast<std::size_t>(j) + 1]; ++p) {
                    b[static_cast<std::size_t>(li_[p])] -= lx_[p] * xj;
                }
            }
        }
        for (int j = 0; j < n_; ++j) {
            b[static_cast<std::size_t>(j)] /= d_[static_cast<std::size_t>(j)];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            double xj = b[static_cast<std::size_t>(j)];
            for (std::size_t p = lp_[static_cast<std::size_t>(j)]; p < lp_[static_cast<std::size_t>(j) + 1]; ++p) {
                xj -= lx_[p] * b[static_cast<std::size_t>(li_[p])];
            }
            b[static_cast<std::size_t>(j)] = xj;
        }
    }

    bool analyzed() const { return analyzed_; }

  private:
    int n_ = 0;
    bool analyzed_ = false;
    std::vector<int> parent_;
    std::vector<int> lnz_;
    std::vector<std::size_t> lp_;
    std::vector<int> li_;
    std::vector<double> lx_;
    std::vector<double> d_;
    // workspaces
    std::vector<double> y_;
    std::vector<int> pattern_stack_;
    std::vector<int> fill_;
    std::vector<int> flag_;
};

} // namespace gridplan
