#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "lsnw/curves.hpp"
#include "lsnw/error.hpp"
#include "lsnw/experiments.hpp"
#include "lsnw/wasserstein.hpp"

namespace lsnw::io {

/// 17 significant digits, always with a decimal point or exponent so the
/// value reads back as a real ("1.0", not "1").
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    if (s.find_first_of(".eEn") == std::string::npos) {
        s += ".0";
    }
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

inline bool parse_double(std::string_view field, double& out) {
    if (field.empty()) {
        return false;
    }
    std::string tmp(field);
    char* end = nullptr;
    out = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && std::isfinite(out);
}

/// Numeric rows of a CSV. A first line that does not parse is taken as a
/// header; any later unparsable or empty field, or a blank line before the
/// last row, is an error.
inline std::vector<std::vector<double>> read_numeric_csv(std::istream& in, const std::string& what) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t blank = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            blank = blank ? blank : lineno;
            continue;
        }
        if (blank) {
            throw InvalidArgument(what + ": missing value on line " + std::to_string(blank));
        }
        const auto fields = split_fields(line);
        std::vector<double> row;
        row.reserve(fields.size());
        bool ok = true;
        for (auto f : fields) {
            double v = 0.0;
            if (!parse_double(f, v)) {
                ok = false;
                break;
            }
            row.push_back(v);
        }
        if (!ok) {
            if (rows.empty() && lineno == 1) {
                continue;
            }
            throw InvalidArgument(what + ": missing or non-numeric value on line " + std::to_string(lineno));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw EmptyInput(what + ": no data rows");
    }
    const std::size_t width = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != width) {
            throw InvalidArgument(what + ": ragged rows");
        }
    }
    return rows;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidArgument("cannot open '" + path + "'");
    }
    return in;
}

inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
    auto in = open_input(path);
    return read_numeric_csv(in, path);
}

inline std::vector<double> read_column(const std::string& path) {
    const auto rows = read_numeric_csv(path);
    if (rows.front().size() != 1) {
        throw InvalidArgument(path + ": expected a single column");
    }
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(r[0]);
    }
    return out;
}

/// (value, weight) rows.
inline DiscreteDistribution read_distribution(const std::string& path) {
    const auto rows = read_numeric_csv(path);
    if (rows.front().size() != 2) {
        throw InvalidArgument(path + ": expected value,weight rows");
    }
    std::vector<double> v;
    std::vector<double> w;
    for (const auto& r : rows) {
        v.push_back(r[0]);
        w.push_back(r[1]);
    }
    return DiscreteDistribution::from_atoms(v, w);
}

/// T x N curve matrix plus a T x 1 response column. Curves are placed on
/// the uniform grid of N points over [0, 1].
inline FunctionalSample read_sample(const std::string& curves_path, const std::string& responses_path) {
    const auto rows = read_numeric_csv(curves_path);
    const auto y = read_column(responses_path);
    if (rows.size() != y.size()) {
        throw InvalidArgument("curves and responses have different row counts");
    }
    const auto grid = Grid::uniform(rows.front().size());
    std::vector<Curve> curves;
    curves.reserve(rows.size());
    for (const auto& r : rows) {
        curves.emplace_back(grid, r);
    }
    return FunctionalSample(std::move(curves), y);
}

inline void write_curves(std::ostream& out, const std::vector<Curve>& curves) {
    for (const auto& c : curves) {
        for (std::size_t n = 0; n < c.size(); ++n) {
            out << (n ? "," : "") << format_double(c[n]);
        }
        out << '\n';
    }
}

inline void write_column(std::ostream& out, const std::vector<double>& values) {
    for (double v : values) {
        out << format_double(v) << '\n';
    }
}

/// atom,weight,cumweight
inline void write_distribution(std::ostream& out, const DiscreteDistribution& d) {
    out << "atom,weight,cumweight\n";
    for (std::size_t k = 0; k < d.size(); ++k) {
        out << format_double(d.atoms()[k]) << ',' << format_double(d.weights()[k]) << ','
            << format_double(d.cumulative()[k]) << '\n';
    }
}

/// Columns exactly T,u,w1_mean,w1_std,degenerate,seconds.
inline void write_report(std::ostream& out, const ExperimentReport& report) {
    out << "T,u,w1_mean,w1_std,degenerate,seconds\n";
    for (const auto& r : report.rows) {
        out << r.T << ',' << format_double(r.u) << ',' << format_double(r.w1_mean) << ','
            << format_double(r.w1_std) << ',' << r.degenerate << ',' << format_double(r.seconds) << '\n';
    }
}

} // namespace lsnw::io
