#pragma once

#include "vssqn/core/schedule.hpp"
#include "vssqn/core/types.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace vssqn {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

} // namespace detail

/**
 * Flat `key = value` text. `#` starts a comment. Every read marks the key as
 * used so leftovers can be reported as unknown.
 */
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse(const std::string& text, const std::string& source = "<config>") {
        KeyValueConfig c;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
            line = detail::trim(line);
            if (line.empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError(lineno, source + ":" + std::to_string(lineno) + ": expected 'key = value'");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError(lineno, source + ":" + std::to_string(lineno) + ": empty key");
            if (c.values_.count(key)) throw ConfigError(key, "duplicate key at " + source + ":" + std::to_string(lineno));
            c.values_[key] = value;
        }
        return c;
    }

    static KeyValueConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    /// Keys of `other` replace ours.
    void merge(const KeyValueConfig& other) {
        for (const auto& [k, v] : other.values_) values_[k] = v;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void erase(const std::string& key) { values_.erase(key); }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& entries() const noexcept { return values_; }

    std::optional<std::string> raw(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        used_.insert(key);
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        return raw(key).value_or(fallback);
    }
    std::string require_string(const std::string& key) const {
        auto v = raw(key);
        if (!v) throw ConfigError(key, "required key is missing");
        return *v;
    }

    std::optional<double> get_double(const std::string& key) const {
        auto v = raw(key);
        if (!v) return std::nullopt;
        return to_double(key, *v);
    }
    double get_double(const std::string& key, double fallback) const { return get_double(key).value_or(fallback); }

    std::optional<std::uint64_t> get_u64(const std::string& key) const {
        auto v = raw(key);
        if (!v) return std::nullopt;
        return to_u64(key, *v);
    }

    std::optional<bool> get_bool(const std::string& key) const {
        auto v = raw(key);
        if (!v) return std::nullopt;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw ConfigError(key, "expected a boolean, got '" + *v + "'");
    }

    std::optional<Vector> get_vector(const std::string& key) const {
        auto v = raw(key);
        if (!v) return std::nullopt;
        auto parts = detail::split(*v, ',');
        Vector out(static_cast<Eigen::Index>(parts.size()));
        for (std::size_t i = 0; i < parts.size(); ++i) out[static_cast<Eigen::Index>(i)] = to_double(key, parts[i]);
        return out;
    }

    std::optional<BatchSchedule> get_batch(const std::string& key) const {
        auto v = raw(key);
        if (!v) return std::nullopt;
        auto p = detail::split(*v, ':');
        auto arg = [&](std::size_t i) { return to_double(key, p.at(i)); };
        auto offset = [&](std::size_t i) { return p.size() > i ? static_cast<int>(to_double(key, p[i])) : 0; };
        try {
            if (p[0] == "geometric" && (p.size() == 3 || p.size() == 4))
                return BatchSchedule::geometric(arg(1), arg(2), offset(3));
            if (p[0] == "polynomial" && (p.size() == 3 || p.size() == 4))
                return BatchSchedule::polynomial(arg(1), arg(2), offset(3));
            if (p[0] == "constant" && p.size() == 2) return BatchSchedule::constant(arg(1));
        } catch (const ConfigError& e) {
            throw ConfigError(key, e.what());
        }
        throw ConfigError(key, "expected geometric:n0:rate[:offset], polynomial:n0:exponent[:offset] or constant:n, "
                               "got '" + *v + "'");
    }

    std::optional<ScalarSchedule> get_scalar(const std::string& key) const {
        auto v = raw(key);
        if (!v) return std::nullopt;
        auto p = detail::split(*v, ':');
        auto arg = [&](std::size_t i) { return to_double(key, p.at(i)); };
        try {
            if (p.size() == 1) return ScalarSchedule::constant(arg(0));
            if (p[0] == "constant" && p.size() == 2) return ScalarSchedule::constant(arg(1));
            if (p[0] == "power" && (p.size() == 3 || p.size() == 4))
                return ScalarSchedule::power(arg(1), arg(2), p.size() == 4 ? static_cast<int>(arg(3)) : 0);
            if (p[0] == "horizon" && p.size() == 4)
                return ScalarSchedule::horizon_constant(arg(1), arg(2), static_cast<long>(arg(3)));
        } catch (const ConfigError& e) {
            throw ConfigError(key, e.what());
        }
        throw ConfigError(key, "expected a number, power:base:exponent[:offset] or horizon:base:exponent:K, got '" +
                                   *v + "'");
    }

    /// Throws for the first key nobody read.
    void check_all_used() const {
        for (const auto& [k, v] : values_)
            if (!used_.count(k)) throw ConfigError(k, "unknown key");
    }

    static double to_double(const std::string& key, const std::string& s) {
        double v = 0;
        const char* b = s.data();
        const char* e = b + s.size();
        if (!s.empty() && *b == '+') ++b;
        auto [ptr, ec] = std::from_chars(b, e, v);
        if (ec != std::errc() || ptr != e) throw ConfigError(key, "expected a number, got '" + s + "'");
        return v;
    }

    static std::uint64_t to_u64(const std::string& key, const std::string& s) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && ptr == s.data() + s.size()) return v;
        // accept 1e6 style when it is integral
        double d = to_double(key, s);
        if (d < 0 || d != std::floor(d) || d > 1.8e19) throw ConfigError(key, "expected a non-negative integer, got '" + s + "'");
        return static_cast<std::uint64_t>(d);
    }

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

} // namespace vssqn
