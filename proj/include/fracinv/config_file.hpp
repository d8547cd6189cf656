#pragma once

// Plain-text experiment configs:
//     # comment
//     key = value
//     [scenario name]
//     key = value
// Keys before the first section are global. Callers check each section
// against the keys valid for their subcommand.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fracinv/errors.hpp"

namespace fracinv {

struct ConfigEntry {
    std::string value;
    int line = 0;
};

class ConfigSection {
public:
    ConfigSection() = default;
    explicit ConfigSection(std::string name) : name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }
    const std::map<std::string, ConfigEntry>& entries() const noexcept { return entries_; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    void set(const std::string& key, std::string value, int line) {
        if (has(key))
            throw InvalidArgument("line " + std::to_string(line) + ": duplicate key '" + key + "' (first set on line " +
                                  std::to_string(entries_.at(key).line) + ")");
        entries_[key] = {std::move(value), line};
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second.value;
    }
    std::string require(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end())
            throw InvalidArgument("missing required key '" + key + "'" + (name_.empty() ? "" : " in [" + name_ + "]"));
        return it->second.value;
    }

    double get_double(const std::string& key, double fallback) const {
        return has(key) ? to_double(key) : fallback;
    }
    int get_int(const std::string& key, int fallback) const {
        if (!has(key)) return fallback;
        const double v = to_double(key);
        if (v != static_cast<double>(static_cast<long long>(v)))
            throw InvalidArgument(where(key) + "'" + key + "' must be an integer");
        return static_cast<int>(v);
    }
    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string v = entries_.at(key).value;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw InvalidArgument(where(key) + "'" + key + "' must be true or false, got '" + v + "'");
    }
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const {
        if (!has(key)) return fallback;
        std::vector<double> out;
        std::stringstream ss(entries_.at(key).value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(item, &used));
                if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw InvalidArgument(where(key) + "'" + key + "' must be a comma-separated list of numbers");
            }
        }
        return out;
    }

    /// Throws for keys outside `valid`, listing the valid ones.
    void check_keys(const std::set<std::string>& valid) const {
        for (const auto& [k, e] : entries_) {
            if (valid.count(k)) continue;
            std::string list;
            for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
            throw InvalidArgument("line " + std::to_string(e.line) + ": unknown key '" + k + "'" +
                                  (name_.empty() ? "" : " in [" + name_ + "]") + "; valid keys: " + list);
        }
    }

private:
    std::string where(const std::string& key) const { return "line " + std::to_string(entries_.at(key).line) + ": "; }
    double to_double(const std::string& key) const {
        const std::string& v = entries_.at(key).value;
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw InvalidArgument(where(key) + "'" + key + "' must be a number, got '" + v + "'");
        }
    }

    std::string name_;
    std::map<std::string, ConfigEntry> entries_;
};

struct ConfigFile {
    ConfigSection global;
    std::vector<ConfigSection> sections;
    std::string raw;  ///< file contents, for hashing
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline ConfigFile parse_config(const std::string& text) {
    ConfigFile cfg;
    cfg.raw = text;
    ConfigSection* current = &cfg.global;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw InvalidArgument("line " + std::to_string(lineno) + ": unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": empty section name");
            for (const auto& s : cfg.sections)
                if (s.name() == name)
                    throw InvalidArgument("line " + std::to_string(lineno) + ": duplicate section [" + name + "]");
            cfg.sections.emplace_back(name);
            current = &cfg.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": missing key before '='");
        if (value.empty()) throw InvalidArgument("line " + std::to_string(lineno) + ": missing value for '" + key + "'");
        current->set(key, value, lineno);
    }
    return cfg;
}

inline ConfigFile load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace fracinv
