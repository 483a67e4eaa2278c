#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gsdm {

// Flat key=value configuration with dotted section names
// (e.g. schedule.family=cosine). Values are stored as strings and parsed
// on access; accessed keys are recorded together with the value used so a
// run can emit its fully resolved configuration.
class Config {
  public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    // "key=value" form, as accepted on the command line
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& def) const;
    double get_double(const std::string& key, double def) const;
    std::int64_t get_int(const std::string& key, std::int64_t def) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t def) const;
    bool get_bool(const std::string& key, bool def) const;

    // every key=value pair that was set or read, in sorted key order
    std::string resolved() const;
    void write_resolved(const std::string& path) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
    mutable std::map<std::string, std::string> resolved_;
};

}  // namespace gsdm
