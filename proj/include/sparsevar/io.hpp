#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sparsevar/error.hpp"
#include "sparsevar/testing.hpp"
#include "sparsevar/varmodel.hpp"

// Text formats:
//
// Model file: sections [A1] ... [Ad] and [SIGMA], each followed by p rows of
// p whitespace-separated numbers. '#' starts a comment.
//
// Series CSV: one header row, then one row per time point (oldest first), no
// index column.
//
// Group file: one entry per line, indices 1-based.
//   A <eq> <var> [lag]   coefficient A^(lag)_{eq,var}, lag defaults to 1
//   S <i> <j>            innovation covariance entry, i != j
namespace sparsevar::io {

namespace detail {

inline std::string_view strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    return line;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Token {
    std::string text;
    int column;  // 1-based
};

inline std::vector<Token> split_ws(std::string_view line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        out.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
    }
    return out;
}

inline double parse_double(const std::string& text, int line, int column) {
    if (text.empty()) throw ParseError("empty numeric field", line, column);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE)
        throw ParseError("invalid number '" + text + "'", line, column);
    if (!std::isfinite(v)) throw ParseError("non-finite number '" + text + "'", line, column);
    return v;
}

inline int parse_int(const std::string& text, int line, int column) {
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
        throw ParseError("invalid integer '" + text + "'", line, column);
    return static_cast<int>(v);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline VarModel parse_model(std::istream& in) {
    std::map<std::string, std::vector<std::vector<double>>> sections;
    std::map<std::string, int> section_line;
    std::string current;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = detail::trim(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no, 1);
            current = std::string(detail::trim(line.substr(1, line.size() - 2)));
            for (auto& c : current) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            const bool is_lag = current.size() > 1 && current[0] == 'A' &&
                                current.find_first_not_of("0123456789", 1) == std::string::npos;
            if (current != "SIGMA" && !is_lag) throw ParseError("unknown section [" + current + "]", line_no, 2);
            if (sections.count(current)) throw ParseError("duplicate section [" + current + "]", line_no, 2);
            sections[current];
            section_line[current] = line_no;
            continue;
        }
        if (current.empty()) throw ParseError("data outside of a section", line_no, 1);
        std::vector<double> row;
        const std::string_view body = detail::strip_comment(raw);
        for (const auto& tok : detail::split_ws(body)) row.push_back(detail::parse_double(tok.text, line_no, tok.column));
        sections[current].push_back(std::move(row));
    }
    if (!sections.count("SIGMA")) throw ParseError("missing [SIGMA] section", line_no, 1);
    auto to_matrix = [&](const std::string& name) {
        const auto& rows = sections[name];
        const auto p = static_cast<Index>(rows.size());
        MatrixXd m(p, p);
        for (Index i = 0; i < p; ++i) {
            if (static_cast<Index>(rows[static_cast<std::size_t>(i)].size()) != p)
                throw ParseError("section [" + name + "] row " + std::to_string(i + 1) + " has " +
                                     std::to_string(rows[static_cast<std::size_t>(i)].size()) + " entries, expected " +
                                     std::to_string(p),
                                 section_line[name] + static_cast<int>(i) + 1, 1);
            for (Index j = 0; j < p; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        return m;
    };
    const MatrixXd sigma = to_matrix("SIGMA");
    LagMatrices coeffs;
    for (int s = 1;; ++s) {
        const std::string name = "A" + std::to_string(s);
        if (!sections.count(name)) break;
        coeffs.push_back(to_matrix(name));
    }
    if (coeffs.empty()) throw ParseError("missing [A1] section", line_no, 1);
    if (coeffs.size() + 1 != sections.size()) throw ParseError("lag sections must be numbered A1..Ad without gaps", line_no, 1);
    return VarModel(std::move(coeffs), sigma);
}

inline VarModel read_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open model file " + path);
    return parse_model(in);
}

inline void write_model(std::ostream& out, const VarModel& model) {
    auto emit = [&](const std::string& name, const MatrixXd& m) {
        out << '[' << name << "]\n";
        for (Index i = 0; i < m.rows(); ++i) {
            for (Index j = 0; j < m.cols(); ++j) out << (j ? " " : "") << detail::format_double(m(i, j));
            out << '\n';
        }
    };
    for (int s = 0; s < model.d(); ++s) emit("A" + std::to_string(s + 1), model.coeff(s));
    emit("SIGMA", model.sigma_eps());
}

inline TimeSeries parse_csv(std::istream& in) {
    std::string raw;
    int line_no = 0;
    Index p = -1;
    std::vector<double> values;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (line_no == 1) {
            p = static_cast<Index>(std::count(raw.begin(), raw.end(), ',')) + 1;
            if (detail::trim(raw).empty()) throw ParseError("empty header row", 1, 1);
            continue;
        }
        if (detail::trim(raw).empty()) continue;
        Index field = 0;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = raw.find(',', start);
            const std::string cell(detail::trim(std::string_view(raw).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            values.push_back(detail::parse_double(cell, line_no, static_cast<int>(start) + 1));
            ++field;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (field != p)
            throw ParseError("row has " + std::to_string(field) + " fields, header has " + std::to_string(p), line_no, 1);
    }
    if (p < 1) throw ParseError("missing header row", 1, 1);
    const Index n = static_cast<Index>(values.size()) / p;
    MatrixXd data(n, p);
    for (Index t = 0; t < n; ++t)
        for (Index j = 0; j < p; ++j) data(t, j) = values[static_cast<std::size_t>(t * p + j)];
    return TimeSeries(std::move(data));
}

inline TimeSeries read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open data file " + path);
    return parse_csv(in);
}

/// Header var1..varp; values printed with 17 significant digits so that
/// parse_csv followed by write_csv reproduces the input bytes.
inline void write_csv(std::ostream& out, const TimeSeries& ts) {
    for (Index j = 0; j < ts.p(); ++j) out << (j ? "," : "") << "var" << j + 1;
    out << '\n';
    for (Index t = 0; t < ts.n(); ++t) {
        for (Index j = 0; j < ts.p(); ++j) out << (j ? "," : "") << detail::format_double(ts.data()(t, j));
        out << '\n';
    }
}

inline GroupSpec parse_group(std::istream& in) {
    GroupSpec g;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto toks = detail::split_ws(detail::strip_comment(raw));
        if (toks.empty()) continue;
        const std::string& kind = toks[0].text;
        if (kind == "A" || kind == "a") {
            if (toks.size() != 3 && toks.size() != 4) throw ParseError("expected 'A eq var [lag]'", line_no, toks[0].column);
            const int eq = detail::parse_int(toks[1].text, line_no, toks[1].column);
            const int var = detail::parse_int(toks[2].text, line_no, toks[2].column);
            const int lag = toks.size() == 4 ? detail::parse_int(toks[3].text, line_no, toks[3].column) : 1;
            g.g_a.push_back({eq - 1, var - 1, lag - 1});
        } else if (kind == "S" || kind == "s") {
            if (toks.size() != 3) throw ParseError("expected 'S i j'", line_no, toks[0].column);
            int i = detail::parse_int(toks[1].text, line_no, toks[1].column);
            int j = detail::parse_int(toks[2].text, line_no, toks[2].column);
            if (i == j) throw ParseError("covariance entry must be off-diagonal", line_no, toks[1].column);
            if (i > j) std::swap(i, j);
            g.g_sigma.push_back({i - 1, j - 1});
        } else {
            throw ParseError("unknown entry kind '" + kind + "' (expected A or S)", line_no, toks[0].column);
        }
    }
    return g;
}

inline GroupSpec read_group(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open group file " + path);
    return parse_group(in);
}

inline void write_group(std::ostream& out, const GroupSpec& g) {
    for (const auto& c : g.g_a) out << "A " << c.eq + 1 << ' ' << c.var + 1 << ' ' << c.lag + 1 << '\n';
    for (const auto& s : g.g_sigma) out << "S " << s.i + 1 << ' ' << s.j + 1 << '\n';
}

} // namespace sparsevar::io
