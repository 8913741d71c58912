#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "dgs/error.hpp"

namespace dgs {

/// Flat `key = value` configuration file. Lines starting with '#' and blank
/// lines are skipped. Keys are unique; later assignments override earlier
/// ones. The schema is documented in docs/config_schema.md.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("config not found: " + path);
        KvConfig cfg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string_view sv = trim(line);
            if (sv.empty() || sv.front() == '#') continue;
            const auto eq = sv.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
            const std::string key(trim(sv.substr(0, eq)));
            const std::string value(trim(sv.substr(eq + 1)));
            if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    std::string require_str(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing config key: " + key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_double(key, it->second);
    }

    long long get_int(const std::string& key, long long fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_int(key, it->second);
    }

    bool get_bool(const std::string& key, bool fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("config key " + key + ": expected boolean, got '" + v + "'");
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

    std::string to_text() const {
        std::ostringstream out;
        for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
        return out.str();
    }

private:
    static std::string_view trim(std::string_view sv) {
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t' || sv.front() == '\r')) sv.remove_prefix(1);
        while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t' || sv.back() == '\r')) sv.remove_suffix(1);
        return sv;
    }

    static double parse_double(const std::string& key, const std::string& v) {
        double out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw ConfigError("config key " + key + ": expected number, got '" + v + "'");
        return out;
    }

    static long long parse_int(const std::string& key, const std::string& v) {
        long long out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
            throw ConfigError("config key " + key + ": expected integer, got '" + v + "'");
        return out;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace dgs
