#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cnsf/errors.hpp"

namespace cnsf {

/// Flat key-value run configuration with [section] headers and # comments.
/// Keys are addressed as "section.key". Later assignments win.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig from_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw ContractError("config file not found: " + path);
        RunConfig cfg;
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[' && s.back() == ']') {
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw ContractError("malformed config line " + std::to_string(lineno) + " in " +
                                    path + ": " + s);
            const std::string key = strip(s.substr(0, eq));
            const std::string value = strip(s.substr(eq + 1));
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ContractError("config key '" + key + "' is not a number: " + it->second);
        }
    }

    long long get_int(const std::string& key, long long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ContractError("config key '" + key + "' is not an integer: " + it->second);
        }
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string& v = it->second;
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ContractError("config key '" + key + "' is not a boolean: " + v);
    }

    /// Whitespace- or comma-separated list of numbers.
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback = {}) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::string s = it->second;
        for (char& c : s)
            if (c == ',') c = ' ';
        std::istringstream iss(s);
        std::vector<double> out;
        double v;
        while (iss >> v) out.push_back(v);
        if (out.empty())
            throw ContractError("config key '" + key + "' is not a numeric list: " + it->second);
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    static std::string strip(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

} // namespace cnsf
