#pragma once

// LP text format (CPLEX dialect) writer and reader. The writer sanitizes
// names to a portable character set; the reader accepts the subset of the
// format the writer produces plus the usual hand-written variations.

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridplan/csv.hpp"
#include "gridplan/lp.hpp"

namespace gridplan {

namespace lp_io_detail {

inline bool safe_name_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

inline std::vector<std::string> sanitized_names(const std::vector<std::string>& raw, const char* prefix)
{
    std::vector<std::string> out;
    out.reserve(raw.size());
    std::map<std::string, int> used;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        std::string s = raw[k];
        for (char& c : s) {
            if (!safe_name_char(c)) {
                c = '_';
            }
        }
        if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.' || s[0] == 'e' ||
            s[0] == 'E') {
            s = prefix + s;
        }
        auto [it, inserted] = used.try_emplace(s, 0);
        if (!inserted) {
            s += "_" + std::to_string(++it->second) + "_" + std::to_string(k);
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_terms(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
                        const std::vector<std::string>& names)
{
    int written = 0;
    int line_len = 0;
    for (const auto& [col, v] : terms) {
        std::string piece;
        if (written == 0) {
            piece = (v < 0 ? "- " : "") + fmt_double(std::abs(v)) + " " + names[static_cast<std::size_t>(col)];
        } else {
            piece = std::string(v < 0 ? "- " : "+ ") + fmt_double(std::abs(v)) + " " +
                    names[static_cast<std::size_t>(col)];
        }
        if (line_len + static_cast<int>(piece.size()) > 220) {
            os << "\n   ";
            line_len = 4;
        }
        os << " " << piece;
        line_len += static_cast<int>(piece.size()) + 1;
        ++written;
    }
    if (written == 0) {
        os << " 0 " << names.at(0);
    }
}

} // namespace lp_io_detail

inline void export_lp(const LinearProgram& lp, const std::string& path)
{
    if (!lp.finalized()) {
        throw LpError("export_lp: linear program is not finalized");
    }
    if (lp.num_cols() == 0) {
        throw LpError("export_lp: refusing to write an empty program");
    }
    std::vector<std::string> raw_cols, raw_rows;
    raw_cols.reserve(static_cast<std::size_t>(lp.num_cols()));
    for (int j = 0; j < lp.num_cols(); ++j) {
        raw_cols.push_back(lp.column(j).name);
    }
    raw_rows.reserve(static_cast<std::size_t>(lp.num_rows()));
    for (int i = 0; i < lp.num_rows(); ++i) {
        raw_rows.push_back(lp.row(i).name);
    }
    std::vector<std::string> cnames = lp_io_detail::sanitized_names(raw_cols, "x");
    std::vector<std::string> rnames = lp_io_detail::sanitized_names(raw_rows, "c");

    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw LpError("export_lp: cannot open " + path);
    }
    os << "\\ " << lp.num_cols() << " columns, " << lp.num_rows() << " rows, " << lp.num_nonzeros()
       << " nonzeros\n";
    os << "Minimize\n obj:";
    {
        std::vector<std::pair<int, double>> terms;
        for (int j = 0; j < lp.num_cols(); ++j) {
            if (lp.column(j).obj != 0.0) {
                terms.emplace_back(j, lp.column(j).obj);
            }
        }
        lp_io_detail::write_terms(os, terms, cnames);
    }
    os << "\nSubject To\n";
    {
        std::vector<std::vector<std::pair<int, double>>> by_row(static_cast<std::size_t>(lp.num_rows()));
        for (const auto& e : lp.entries()) {
            by_row[static_cast<std::size_t>(e.row)].emplace_back(e.col, e.value);
        }
        for (int i = 0; i < lp.num_rows(); ++i) {
            os << " " << rnames[static_cast<std::size_t>(i)] << ":";
            lp_io_detail::write_terms(os, by_row[static_cast<std::size_t>(i)], cnames);
            os << " " << to_string(lp.row(i).sense) << " " << fmt_double(lp.row(i).rhs) << "\n";
        }
    }
    os << "Bounds\n";
    for (int j = 0; j < lp.num_cols(); ++j) {
        const auto& c = lp.column(j);
        const std::string& nm = cnames[static_cast<std::size_t>(j)];
        if (c.lb == -kInf && c.ub == kInf) {
            os << " " << nm << " free\n";
        } else if (c.lb == c.ub) {
            os << " " << nm << " = " << fmt_double(c.lb) << "\n";
        } else if (c.lb == -kInf) {
            os << " -inf <= " << nm << " <= " << fmt_double(c.ub) << "\n";
        } else if (c.ub == kInf) {
            if (c.lb != 0.0) {
                os << " " << nm << " >= " << fmt_double(c.lb) << "\n";
            }
        } else {
            os << " " << fmt_double(c.lb) << " <= " << nm << " <= " << fmt_double(c.ub) << "\n";
        }
    }
    os << "End\n";
    if (!os) {
        throw LpError("export_lp: write failed for " + path);
    }
}

namespace lp_io_detail {

struct Token {
    std::string text;
};

inline std::vector<std::string> tokenize_lp(std::istream& in)
{
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t comment = line.find('\\');
        if (comment != std::string::npos) {
            line.resize(comment);
        }
        std::size_t i = 0;
        while (i < line.size()) {
            char c = line[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
                continue;
            }
            if (c == '+' || c == '-') {
                tokens.emplace_back(1, c);
                ++i;
                continue;
            }
            if (c == '<' || c == '>' || c == '=') {
                std::string op(1, c);
                if (i + 1 < line.size() && line[i + 1] == '=') {
                    op += '=';
                    ++i;
                }
                tokens.push_back(op);
                ++i;
                continue;
            }
            if (c == ':') {
                tokens.emplace_back(":");
                ++i;
                continue;
            }
            std::size_t start = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != ':' &&
                   line[i] != '<' && line[i] != '>' && line[i] != '=' && line[i] != '+' && line[i] != '-') {
                ++i;
            }
            tokens.push_back(line.substr(start, i - start));
        }
    }
    return tokens;
}

inline bool is_number_token(const std::string& t, double& value)
{
    if (t.empty()) {
        return false;
    }
    char first = t[0];
    if (!std::isdigit(static_cast<unsigned char>(first)) && first != '.') {
        return false;
    }
    try {
        std::size_t pos = 0;
        value = std::stod(t, &pos);
        return pos == t.size();
    } catch (...) {
        return false;
    }
}

inline bool ieq(const std::string& a, const char* b)
{
    if (a.size() != std::string(b).size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

} // namespace lp_io_detail

// Reads a program previously written by export_lp (or a compatible
// hand-written file). Maximization objectives are negated into the
// internal minimize convention.
inline LinearProgram import_lp(const std::string& path)
{
    using namespace lp_io_detail;
    std::ifstream in(path);
    if (!in) {
        throw LpError("import_lp: cannot open " + path);
    }
    std::vector<std::string> tok = tokenize_lp(in);
    std::size_t pos = 0;
    auto peek = [&]() -> const std::string& {
        static const std::string empty;
        return pos < tok.size() ? tok[pos] : empty;
    };
    auto at_section = [&](std::size_t p) {
        if (p >= tok.size()) {
            return true;
        }
        const std::string& t = tok[p];
        if (ieq(t, "subject") || ieq(t, "st") || ieq(t, "s.t.") || ieq(t, "bounds") || ieq(t, "end") ||
            ieq(t, "general") || ieq(t, "binary")) {
            return true;
        }
        return false;
    };

    double obj_sign = 1.0;
    if (ieq(peek(), "minimize") || ieq(peek(), "min")) {
        ++pos;
    } else if (ieq(peek(), "maximize") || ieq(peek(), "max")) {
        obj_sign = -1.0;
        ++pos;
    } else {
        throw LpError("import_lp: expected Minimize/Maximize at start of " + path);
    }

    struct ColInfo {
        double lb = 0.0;
        double ub = kInf;
        double obj = 0.0;
        bool bounded_explicitly = false;
    };
    std::vector<std::string> col_order;
    std::map<std::string, int> col_ids;
    std::vector<ColInfo> cols;
    auto col_of = [&](const std::string& name) {
        auto [it, inserted] = col_ids.try_emplace(name, static_cast<int>(cols.size()));
        if (inserted) {
            cols.emplace_back();
            col_order.push_back(name);
        }
        return it->second;
    };

    // linear expression: [label :] {sign|coef|name}*
    auto parse_expression = [&](std::vector<std::pair<int, double>>& terms, std::string& label) {
        label.clear();
        if (pos + 1 < tok.size() && tok[pos + 1] == ":") {
            label = tok[pos];
            pos += 2;
        }
        double sign = 1.0;
        bool have_coef = false;
        double coef = 1.0;
        while (pos < tok.size()) {
            const std::string& t = tok[pos];
            if (t == "+") {
                if (!have_coef) {
                    sign = sign; // consecutive signs fold
                }
                ++pos;
                continue;
            }
            if (t == "-") {
                sign = -sign;
                ++pos;
                continue;
            }
            double v = 0.0;
            if (is_number_token(t, v)) {
                coef = have_coef ? coef * v : v;
                have_coef = true;
                ++pos;
                continue;
            }
            if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">") {
                break;
            }
            if (at_section(pos)) {
                break;
            }
            // a name token
            int col = col_of(t);
            terms.emplace_back(col, sign * (have_coef ? coef : 1.0));
            sign = 1.0;
            coef = 1.0;
            have_coef = false;
            ++pos;
        }
    };

    std::vector<std::pair<int, double>> obj_terms;
    {
        std::string label;
        parse_expression(obj_terms, label);
    }

    struct RowInfo {
        std::string name;
        RowSense sense;
        double rhs;
        std::vector<std::pair<int, double>> terms;
    };
    std::vector<RowInfo> rows;
    if (ieq(peek(), "subject")) {
        pos += 2; // subject to
    } else if (ieq(peek(), "st") || ieq(peek(), "s.t.")) {
        ++pos;
    } else {
        throw LpError("import_lp: expected 'Subject To' in " + path);
    }
    while (pos < tok.size() && !ieq(peek(), "bounds") && !ieq(peek(), "end")) {
        RowInfo r;
        parse_expression(r.terms, r.name);
        const std::string& op = peek();
        if (op == "<=" || op == "<") {
            r.sense = RowSense::le;
        } else if (op == ">=" || op == ">") {
            r.sense = RowSense::ge;
        } else if (op == "=") {
            r.sense = RowSense::eq;
        } else {
            throw LpError("import_lp: expected a relational operator in row '" + r.name + "'");
        }
        ++pos;
        double sign = 1.0;
        while (peek() == "-" || peek() == "+") {
            if (peek() == "-") {
                sign = -sign;
            }
            ++pos;
        }
        double v = 0.0;
        if (!is_number_token(peek(), v)) {
            throw LpError("import_lp: expected a numeric rhs in row '" + r.name + "'");
        }
        ++pos;
        r.rhs = sign * v;
        if (r.name.empty()) {
            r.name = "c" + std::to_string(rows.size());
        }
        rows.push_back(std::move(r));
    }

    if (ieq(peek(), "bounds")) {
        ++pos;
        while (pos < tok.size() && !ieq(peek(), "end")) {
            // forms: name free | name = v | name >= v | name <= v |
            //        v <= name <= v | -inf <= name <= v
            double sign = 1.0;
            while (peek() == "-" || peek() == "+") {
                if (peek() == "-") {
                    sign = -sign;
                }
                ++pos;
            }
            double v = 0.0;
            if (is_number_token(peek(), v) || ieq(peek(), "inf") || ieq(peek(), "infinity")) {
                double lo = ieq(peek(), "inf") || ieq(peek(), "infinity") ? kInf : v;
                lo *= sign;
                ++pos;
                if (peek() != "<=" && peek() != "<") {
                    throw LpError("import_lp: malformed bound line");
                }
                ++pos;
                int col = col_of(peek());
                ++pos;
                cols[static_cast<std::size_t>(col)].lb = lo;
                cols[static_cast<std::size_t>(col)].bounded_explicitly = true;
                if (peek() == "<=" || peek() == "<") {
                    ++pos;
                    double sign2 = 1.0;
                    while (peek() == "-" || peek() == "+") {
                        if (peek() == "-") {
                            sign2 = -sign2;
                        }
                        ++pos;
                    }
                    double hi = 0.0;
                    if (ieq(peek(), "inf") || ieq(peek(), "infinity")) {
                        hi = kInf;
                    } else if (!is_number_token(peek(), hi)) {
                        throw LpError("import_lp: malformed bound line");
                    }
                    ++pos;
                    cols[static_cast<std::size_t>(col)].ub = sign2 * hi;
                }
                continue;
            }
            int col = col_of(peek());
            ++pos;
            if (ieq(peek(), "free")) {
                cols[static_cast<std::size_t>(col)].lb = -kInf;
                cols[static_cast<std::size_t>(col)].ub = kInf;
                ++pos;
                continue;
            }
            const std::string op = peek();
            if (op != "<=" && op != ">=" && op != "=" && op != "<" && op != ">") {
                throw LpError("import_lp: malformed bound line near '" + op + "'");
            }
            ++pos;
            double sign2 = 1.0;
            while (peek() == "-" || peek() == "+") {
                if (peek() == "-") {
                    sign2 = -sign2;
                }
                ++pos;
            }
            double bv = 0.0;
            if (ieq(peek(), "inf") || ieq(peek(), "infinity")) {
                bv = kInf;
            } else if (!is_number_token(peek(), bv)) {
                throw LpError("import_lp: malformed bound value");
            }
            ++pos;
            bv *= sign2;
            if (op == "<=" || op == "<") {
                cols[static_cast<std::size_t>(col)].ub = bv;
            } else if (op == ">=" || op == ">") {
                cols[static_cast<std::size_t>(col)].lb = bv;
            } else {
                cols[static_cast<std::size_t>(col)].lb = bv;
                cols[static_cast<std::size_t>(col)].ub = bv;
            }
        }
    }

    for (const auto& [col, v] : obj_terms) {
        cols[static_cast<std::size_t>(col)].obj += obj_sign * v;
    }

    LinearProgram lp;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        lp.add_column(col_order[j], cols[j].lb, cols[j].ub, cols[j].obj);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        int row = lp.add_row(rows[i].name, rows[i].sense, rows[i].rhs);
        std::map<int, double> acc; // repeated names accumulate
        for (const auto& [col, v] : rows[i].terms) {
            acc[col] += v;
        }
        for (const auto& [col, v] : acc) {
            lp.set_coeff(row, col, v);
        }
    }
    lp.finalize();
    return lp;
}

} // namespace gridplan
