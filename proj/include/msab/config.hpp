#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace msab {

/// Raised on malformed or unknown configuration input; the message always
/// names the offending key or line.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key/value configuration with dotted-key nesting, e.g.
/// `scenario.box.max_x = 10000`. Lines starting with '#' (or trailing
/// '#' comments) are ignored. Typed getters track which keys were consumed
/// so unknown keys can be reported by name.
class KeyValueConfig {
public:
    KeyValueConfig() = default;

    static KeyValueConfig parse_string(const std::string& text) {
        KeyValueConfig cfg;
        std::istringstream in(text);
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + trimmed + "'");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            if (cfg.entries_.count(key))
                throw ConfigError("config key '" + key + "' appears more than once");
            cfg.entries_[key] = value;
        }
        return cfg;
    }

    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return parse_string(buffer.str());
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        consumed_.insert(key);
        const auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        consumed_.insert(key);
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size())
                throw ConfigError("config key '" + key + "': trailing characters in number '" +
                                  it->second + "'");
            return v;
        } catch (const std::invalid_argument&) {
            throw ConfigError("config key '" + key + "': not a number: '" + it->second + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("config key '" + key + "': number out of range: '" + it->second +
                              "'");
        }
    }

    long get_int(const std::string& key, long fallback) const {
        consumed_.insert(key);
        const auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size())
                throw ConfigError("config key '" + key + "': trailing characters in integer '" +
                                  it->second + "'");
            return v;
        } catch (const std::invalid_argument&) {
            throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
        } catch (const std::out_of_range&) {
            throw ConfigError("config key '" + key + "': integer out of range: '" + it->second +
                              "'");
        }
    }

    /// Throws if any key was never consumed by a getter (catches typos).
    void reject_unknown_keys() const {
        for (const auto& [key, value] : entries_)
            if (!consumed_.count(key))
                throw ConfigError("unknown config key '" + key + "'");
    }

    /// Canonical serialization (sorted keys), used for run manifests.
    std::string serialize() const {
        std::string out;
        for (const auto& [key, value] : entries_) out += key + " = " + value + "\n";
        return out;
    }

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> consumed_;
};

/// Locale-independent shortest-roundtrip formatting for CSV output.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace msab
