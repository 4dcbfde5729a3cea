#pragma once

#include "vssqn/solvers/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace vssqn {

inline constexpr const char* kCsvHeader = "k,samples_cum,grad_evals_cum,fval,gap,grad_norm,step_norm,wall_ms";

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_double(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
}

inline std::string format_csv(const std::vector<IterateRecord>& records) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : records) {
        out += std::to_string(r.k);
        out += ',' + std::to_string(r.samples_cum);
        out += ',' + std::to_string(r.grad_evals_cum);
        out += ',' + format_double(r.fval);
        out += ',' + format_double(r.gap);
        out += ',' + format_double(r.grad_norm);
        out += ',' + format_double(r.step_norm);
        out += ',' + format_double(r.wall_ms);
        out += '\n';
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path + "'");
}

/// Parses a log written by format_csv; missing values come back empty.
inline std::vector<IterateRecord> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw ParseError(1, "unexpected CSV header");
    std::vector<IterateRecord> rows;
    std::size_t lineno = 1;
    auto num = [&](const std::string& s) -> std::optional<double> {
        if (s == "nan") return std::nullopt;
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw ParseError(lineno, "bad number '" + s + "'");
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 8) throw ParseError(lineno, "expected 8 fields");
        IterateRecord r;
        r.k = static_cast<long>(num(f[0]).value_or(-1));
        r.samples_cum = static_cast<std::uint64_t>(num(f[1]).value_or(0));
        r.grad_evals_cum = static_cast<std::uint64_t>(num(f[2]).value_or(0));
        r.fval = num(f[3]);
        r.gap = num(f[4]);
        r.grad_norm = num(f[5]);
        r.step_norm = num(f[6]).value_or(std::numeric_limits<double>::quiet_NaN());
        r.wall_ms = num(f[7]).value_or(std::numeric_limits<double>::quiet_NaN());
        rows.push_back(r);
    }
    return rows;
}

/// Ordered key=value lines.
class Summary {
public:
    void put(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }
    void put(const std::string& key, double value) { put(key, format_double(value)); }
    void put(const std::string& key, const std::optional<double>& value) { put(key, format_double(value)); }
    void put(const std::string& key, std::uint64_t value) { put(key, std::to_string(value)); }
    void put(const std::string& key, long value) { put(key, std::to_string(value)); }

    std::optional<std::string> get(const std::string& key) const {
        for (const auto& [k, v] : lines_)
            if (k == key) return v;
        return std::nullopt;
    }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : lines_) out += k + "=" + v + "\n";
        return out;
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

} // namespace vssqn
