#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

// Sectioned key = value configuration. Every value a command reads (explicit
// or defaulted) is remembered so the resolved configuration can be echoed.

namespace obsmix::cli {

class Config {
  public:
    Config() = default;
    /// Throws ConfigError on unreadable or malformed input.
    static Config from_file(const std::string &path);
    static Config from_string(const std::string &text, const std::string &origin = "<string>");

    [[nodiscard]] bool has(const std::string &section, const std::string &key) const;
    /// Replaces (or adds) a value, as if it had been written in the file.
    void set(const std::string &section, const std::string &key, const std::string &value);

    std::string get_string(const std::string &section, const std::string &key, const std::string &fallback);
    double get_double(const std::string &section, const std::string &key, double fallback);
    long long get_int(const std::string &section, const std::string &key, long long fallback);
    unsigned long long get_uint(const std::string &section, const std::string &key, unsigned long long fallback);
    bool get_bool(const std::string &section, const std::string &key, bool fallback);
    std::vector<int> get_int_list(const std::string &section, const std::string &key, const std::vector<int> &fallback);
    std::vector<std::string> get_string_list(const std::string &section, const std::string &key,
                                             const std::vector<std::string> &fallback);

    /// Throws ConfigError if a section in `sections` holds a key that was never read.
    void reject_unknown(const std::set<std::string> &sections) const;

    /// "[section] key = value" lines of every resolved value, sorted.
    [[nodiscard]] std::vector<std::string> echo() const;
    /// Section names present in the source, in file order.
    [[nodiscard]] std::vector<std::string> sections() const;
    [[nodiscard]] const std::string &origin() const noexcept { return origin_; }

  private:
    std::string raw(const std::string &section, const std::string &key, const std::string &fallback);

    boost::property_tree::ptree tree_;
    std::map<std::string, std::map<std::string, std::string>> resolved_;
    std::string origin_ = "<defaults>";
};

/// Splits on commas and trims whitespace; empty items are dropped.
std::vector<std::string> split_list(const std::string &text, char separator = ',');

/// Shortest round-trippable rendering used in the echo and CSV output (17 significant digits).
std::string format_double(double value);

} // namespace obsmix::cli
