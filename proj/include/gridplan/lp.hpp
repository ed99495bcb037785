#pragma once

// Solver-agnostic sparse linear program. Columns, rows, and coefficient
// triplets are staged through the builder calls; finalize() deduplicates
// (the last write to a cell wins) and compiles column- and row-major views.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridplan {

class LpError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class RowSense { le, ge, eq };

inline const char* to_string(RowSense s)
{
    switch (s) {
    case RowSense::le: return "<=";
    case RowSense::ge: return ">=";
    default: return "=";
    }
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class LinearProgram {
  public:
    struct Column {
        std::string name;
        double lb = 0.0;
        double ub = kInf;
        double obj = 0.0;
    };
    struct Row {
        std::string name;
        RowSense sense = RowSense::le;
        double rhs = 0.0;
    };

    int add_column(std::string name, double lb, double ub, double obj)
    {
        require_mutable();
        if (lb > ub) {
            throw LpError("column '" + name + "': lower bound " + std::to_string(lb) +
                          " exceeds upper bound " + std::to_string(ub));
        }
        cols_.push_back({std::move(name), lb, ub, obj});
        return static_cast<int>(cols_.size()) - 1;
    }

    int add_row(std::string name, RowSense sense, double rhs)
    {
        require_mutable();
        rows_.push_back({std::move(name), sense, rhs});
        return static_cast<int>(rows_.size()) - 1;
    }

    void set_coeff(int row, int col, double value)
    {
        require_mutable();
        if (row < 0 || row >= static_cast<int>(rows_.size())) {
            throw LpError("set_coeff: unknown row id " + std::to_string(row));
        }
        if (col < 0 || col >= static_cast<int>(cols_.size())) {
            throw LpError("set_coeff: unknown column id " + std::to_string(col));
        }
        entries_.push_back({row, col, value});
    }

    void set_objective(int col, double obj)
    {
        require_mutable();
        cols_.at(static_cast<std::size_t>(col)).obj = obj;
    }

    void set_bounds(int col, double lb, double ub)
    {
        require_mutable();
        if (lb > ub) {
            throw LpError("column '" + cols_.at(static_cast<std::size_t>(col)).name + "': lower bound " +
                          std::to_string(lb) + " exceeds upper bound " + std::to_string(ub));
        }
        auto& c = cols_.at(static_cast<std::size_t>(col));
        c.lb = lb;
        c.ub = ub;
    }

    // Deduplicates staged triplets (later writes win, exact zeros drop out)
    // and builds the compressed views. The program is immutable afterwards.
    void finalize()
    {
        require_mutable();
        std::vector<std::size_t> order(entries_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
            if (entries_[a].row != entries_[b].row) {
                return entries_[a].row < entries_[b].row;
            }
            return entries_[a].col < entries_[b].col;
        });
        std::vector<Entry> dedup;
        dedup.reserve(entries_.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            const Entry& e = entries_[order[k]];
            if (!dedup.empty() && dedup.back().row == e.row && dedup.back().col == e.col) {
                dedup.back().value = e.value; // stable sort keeps insertion order within a cell
            } else {
                dedup.push_back(e);
            }
        }
        std::erase_if(dedup, [](const Entry& e) { return e.value == 0.0; });
        entries_ = std::move(dedup);

        // entries_ are now row-major sorted; build both index views
        row_ptr_.assign(rows_.size() + 1, 0);
        for (const Entry& e : entries_) {
            ++row_ptr_[static_cast<std::size_t>(e.row) + 1];
        }
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            row_ptr_[i + 1] += row_ptr_[i];
        }

        col_ptr_.assign(cols_.size() + 1, 0);
        for (const Entry& e : entries_) {
            ++col_ptr_[static_cast<std::size_t>(e.col) + 1];
        }
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            col_ptr_[j + 1] += col_ptr_[j];
        }
        col_rows_.resize(entries_.size());
        col_values_.resize(entries_.size());
        std::vector<std::size_t> next(col_ptr_.begin(), col_ptr_.end() - 1);
        for (const Entry& e : entries_) {
            std::size_t slot = next[static_cast<std::size_t>(e.col)]++;
            col_rows_[slot] = e.row;
            col_values_[slot] = e.value;
        }
        finalized_ = true;
    }

    bool finalized() const { return finalized_; }
    int num_cols() const { return static_cast<int>(cols_.size()); }
    int num_rows() const { return static_cast<int>(rows_.size()); }
    std::size_t num_nonzeros() const { return entries_.size(); }

    const Column& column(int j) const { return cols_[static_cast<std::size_t>(j)]; }
    const Row& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
    const std::vector<Column>& columns() const { return cols_; }
    const std::vector<Row>& rows() const { return rows_; }

    struct Entry {
        int row;
        int col;
        double value;
    };

    // row-major entries, sorted by (row, col); valid after finalize()
    const std::vector<Entry>& entries() const
    {
        require_finalized();
        return entries_;
    }
    std::size_t row_begin(int i) const { return row_ptr_[static_cast<std::size_t>(i)]; }
    std::size_t row_end(int i) const { return row_ptr_[static_cast<std::size_t>(i) + 1]; }

    // column-major view; valid after finalize()
    std::size_t col_begin(int j) const { return col_ptr_[static_cast<std::size_t>(j)]; }
    std::size_t col_end(int j) const { return col_ptr_[static_cast<std::size_t>(j) + 1]; }
    int col_row(std::size_t k) const { return col_rows_[k]; }
    double col_value(std::size_t k) const { return col_values_[k]; }

    double objective_value(const std::vector<double>& x) const
    {
        double v = 0.0;
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            v += cols_[j].obj * x[j];
        }
        return v;
    }

    // row activities a_i^T x for a full primal vector
    std::vector<double> row_activity(const std::vector<double>& x) const
    {
        require_finalized();
        std::vector<double> act(rows_.size(), 0.0);
        for (const Entry& e : entries_) {
            act[static_cast<std::size_t>(e.row)] += e.value * x[static_cast<std::size_t>(e.col)];
        }
        return act;
    }

    // worst violation of row senses and variable bounds, scaled by
    // 1 + |rhs| per row
    double max_violation(const std::vector<double>& x) const
    {
        std::vector<double> act = row_activity(x);
        double worst = 0.0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            double scale = 1.0 + std::abs(rows_[i].rhs);
            double v = 0.0;
            switch (rows_[i].sense) {
            case RowSense::le: v = act[i] - rows_[i].rhs; break;
            case RowSense::ge: v = rows_[i].rhs - act[i]; break;
            case RowSense::eq: v = std::abs(act[i] - rows_[i].rhs); break;
            }
            worst = std::max(worst, v / scale);
        }
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            double scale = 1.0 + std::max(std::abs(cols_[j].lb) == kInf ? 0.0 : std::abs(cols_[j].lb),
                                          std::abs(cols_[j].ub) == kInf ? 0.0 : std::abs(cols_[j].ub));
            if (cols_[j].lb != -kInf) {
                worst = std::max(worst, (cols_[j].lb - x[j]) / scale);
            }
            if (cols_[j].ub != kInf) {
                worst = std::max(worst, (x[j] - cols_[j].ub) / scale);
            }
        }
        return worst;
    }

  private:
    void require_mutable() const
    {
        if (finalized_) {
            throw LpError("linear program is finalized");
        }
    }
    void require_finalized() const
    {
        if (!finalized_) {
            throw LpError("linear program is not finalized");
        }
    }

    std::vector<Column> cols_;
    std::vector<Row> rows_;
    std::vector<Entry> entries_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_ptr_;
    std::vector<int> col_rows_;
    std::vector<double> col_values_;
    bool finalized_ = false;
};

enum class SolveStatus { optimal, infeasible, unbounded, failure };

inline const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    default: return "failure";
    }
}

struct LpSolution {
    SolveStatus status = SolveStatus::failure;
    double objective = 0.0;
    std::vector<double> x;     // per column, empty unless optimal
    std::vector<double> duals; // per row, empty unless optimal
    int iterations = 0;
    std::string message;
};

} // namespace gridplan
