#include "gsdm/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gsdm/errors.hpp"

namespace gsdm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw format_error("config: line " + std::to_string(lineno) + " has no '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw format_error("config: line " + std::to_string(lineno) + " has empty key");
        cfg.entries_[key] = val;
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
    resolved_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw format_error("override must be key=value: " + assignment);
    entries_[assignment.substr(0, eq)] = assignment.substr(eq + 1);
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& def) const {
    const auto it = entries_.find(key);
    const std::string v = it == entries_.end() ? def : it->second;
    resolved_[key] = v;
    return v;
}

double Config::get_double(const std::string& key, double def) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        resolved_[key] = get_string(key, std::to_string(def));
        return def;
    }
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        throw format_error("config: " + key + " is not a number: " + it->second);
    resolved_[key] = it->second;
    return v;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t def) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        resolved_[key] = std::to_string(def);
        return def;
    }
    char* end = nullptr;
    const long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw format_error("config: " + key + " is not an integer: " + it->second);
    resolved_[key] = it->second;
    return v;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t def) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        resolved_[key] = std::to_string(def);
        return def;
    }
    char* end = nullptr;
    const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        throw format_error("config: " + key + " is not an unsigned integer: " + it->second);
    resolved_[key] = it->second;
    return v;
}

bool Config::get_bool(const std::string& key, bool def) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        resolved_[key] = def ? "true" : "false";
        return def;
    }
    const std::string& v = it->second;
    resolved_[key] = v;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw format_error("config: " + key + " is not a boolean: " + v);
}

std::string Config::resolved() const {
    std::map<std::string, std::string> all = resolved_;
    for (const auto& [k, v] : entries_) all[k] = v;
    std::ostringstream out;
    for (const auto& [k, v] : all) out << k << "=" << v << "\n";
    return out.str();
}

void Config::write_resolved(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw format_error("config: cannot write " + path);
    out << resolved();
}

}  // namespace gsdm
