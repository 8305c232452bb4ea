#pragma once

// Run configuration: a flat `key = value` text format with dotted keys
// (dynamics.kappa_per_ps = 25), '#' comments, and later-wins duplicates.
// Command-line --set overrides apply on top of the file. Keys are tracked as
// they are read so a run can reject unrecognized (misspelled) parameters.

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qbat/core.hpp"

namespace qbat {

class ConfigError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

inline bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            return false;
    return true;
}

} // namespace detail

class Config {
  public:
    Config() = default;

    /// Parse one `key = value` assignment (the --set argument format).
    void set(const std::string& assignment, const std::string& origin = "--set") {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ": expected key = value, got '" + assignment + "'");
        const std::string key = detail::trim(assignment.substr(0, eq));
        const std::string value = detail::trim(assignment.substr(eq + 1));
        if (!detail::valid_key(key))
            throw ConfigError(origin + ": malformed key '" + key + "'");
        values_[key] = value;
    }

    void load_stream(std::istream& in, const std::string& source) {
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            set(line, source + ":" + std::to_string(lineno));
        }
    }

    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path + ": cannot open config file");
        load_stream(in, path);
    }

    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    /// First present key among aliases wins; fallback when none present.
    /// Every probed alias is marked as recognized.
    double get_double(const std::vector<std::string>& aliases, double fallback) const {
        const std::string* raw = lookup(aliases);
        if (!raw) return fallback;
        double v = 0.0;
        auto res = std::from_chars(raw->data(), raw->data() + raw->size(), v);
        if (res.ec != std::errc{} || res.ptr != raw->data() + raw->size())
            throw ConfigError("key '" + found_ + "': value '" + *raw + "' is not a number");
        return v;
    }

    long get_int(const std::vector<std::string>& aliases, long fallback) const {
        const std::string* raw = lookup(aliases);
        if (!raw) return fallback;
        long v = 0;
        auto res = std::from_chars(raw->data(), raw->data() + raw->size(), v);
        if (res.ec != std::errc{} || res.ptr != raw->data() + raw->size())
            throw ConfigError("key '" + found_ + "': value '" + *raw + "' is not an integer");
        return v;
    }

    std::string get_string(const std::vector<std::string>& aliases,
                           const std::string& fallback) const {
        const std::string* raw = lookup(aliases);
        return raw ? *raw : fallback;
    }

    /// Comma-separated list of numbers.
    std::vector<double> get_double_list(const std::vector<std::string>& aliases,
                                        const std::vector<double>& fallback) const {
        const std::string* raw = lookup(aliases);
        if (!raw) return fallback;
        std::vector<double> out;
        std::stringstream ss(*raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            double v = 0.0;
            auto res = std::from_chars(item.data(), item.data() + item.size(), v);
            if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
                throw ConfigError("key '" + found_ + "': list entry '" + item +
                                  "' is not a number");
            out.push_back(v);
        }
        if (out.empty())
            throw ConfigError("key '" + found_ + "': empty list");
        return out;
    }

    /// Reject keys that no getter ever probed: catches misspelled overrides.
    void require_all_recognized() const {
        std::vector<std::string> unknown;
        for (const auto& [k, v] : values_)
            if (recognized_.count(k) == 0) unknown.push_back(k);
        if (unknown.empty()) return;
        std::string msg = "unrecognized parameter(s):";
        for (const auto& k : unknown) msg += " '" + k + "'";
        throw DomainError(msg);
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    const std::string* lookup(const std::vector<std::string>& aliases) const {
        const std::string* hit = nullptr;
        for (const auto& a : aliases) {
            recognized_.insert(a);
            auto it = values_.find(a);
            if (!hit && it != values_.end()) {
                hit = &it->second;
                found_ = a;
            }
        }
        return hit;
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> recognized_;
    mutable std::string found_;
};

} // namespace qbat
