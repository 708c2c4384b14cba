#include "obsmix_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <fmt/format.h>

#include "obsmix/errors.hpp"

namespace obsmix::cli {

namespace {

std::string trim(const std::string &s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

boost::property_tree::ptree::path_type path(const std::string &section, const std::string &key) {
    return boost::property_tree::ptree::path_type(section + '\x1f' + key, '\x1f');
}

[[noreturn]] void bad_value(const std::string &section, const std::string &key, const std::string &value,
                            const char *expected) {
    throw ConfigError("[" + section + "] " + key + " = '" + value + "' is not " + expected);
}

} // namespace

std::vector<std::string> split_list(const std::string &text, char separator) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, separator)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

Config Config::from_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_string(buffer.str(), path);
}

Config Config::from_string(const std::string &text, const std::string &origin) {
    Config c;
    c.origin_ = origin;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, c.tree_);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    return c;
}

bool Config::has(const std::string &section, const std::string &key) const {
    return static_cast<bool>(tree_.get_optional<std::string>(path(section, key)));
}

void Config::set(const std::string &section, const std::string &key, const std::string &value) {
    tree_.put(path(section, key), value);
}

std::string Config::raw(const std::string &section, const std::string &key, const std::string &fallback) {
    const auto found = tree_.get_optional<std::string>(path(section, key));
    const std::string value = found ? trim(*found) : fallback;
    resolved_[section][key] = value;
    return value;
}

std::string Config::get_string(const std::string &section, const std::string &key, const std::string &fallback) {
    return raw(section, key, fallback);
}

double Config::get_double(const std::string &section, const std::string &key, double fallback) {
    const std::string text = raw(section, key, fmt::format("{}", fallback));
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) bad_value(section, key, text, "a number");
        return v;
    } catch (const std::logic_error &) {
        bad_value(section, key, text, "a number");
    }
}

long long Config::get_int(const std::string &section, const std::string &key, long long fallback) {
    const std::string text = raw(section, key, std::to_string(fallback));
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) bad_value(section, key, text, "an integer");
    return v;
}

unsigned long long Config::get_uint(const std::string &section, const std::string &key, unsigned long long fallback) {
    const std::string text = raw(section, key, std::to_string(fallback));
    unsigned long long v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) bad_value(section, key, text, "an unsigned integer");
    return v;
}

bool Config::get_bool(const std::string &section, const std::string &key, bool fallback) {
    const std::string text = raw(section, key, fallback ? "true" : "false");
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    bad_value(section, key, text, "a boolean");
}

std::vector<int> Config::get_int_list(const std::string &section, const std::string &key,
                                      const std::vector<int> &fallback) {
    std::string joined;
    for (std::size_t i = 0; i < fallback.size(); ++i) joined += (i ? ", " : "") + std::to_string(fallback[i]);
    const std::string text = raw(section, key, joined);
    std::vector<int> out;
    for (const auto &item : split_list(text)) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size()) bad_value(section, key, text, "a list of integers");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> Config::get_string_list(const std::string &section, const std::string &key,
                                                 const std::vector<std::string> &fallback) {
    std::string joined;
    for (std::size_t i = 0; i < fallback.size(); ++i) joined += (i ? ", " : "") + fallback[i];
    return split_list(raw(section, key, joined));
}

void Config::reject_unknown(const std::set<std::string> &sections) const {
    for (const auto &[section, child] : tree_) {
        if (!sections.contains(section)) continue;
        const auto used = resolved_.find(section);
        for (const auto &[key, value] : child) {
            (void)value;
            if (used == resolved_.end() || !used->second.contains(key))
                throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
        }
    }
}

std::vector<std::string> Config::sections() const {
    std::vector<std::string> out;
    for (const auto &[section, child] : tree_) out.push_back(section);
    return out;
}

std::vector<std::string> Config::echo() const {
    std::vector<std::string> out;
    for (const auto &[section, entries] : resolved_)
        for (const auto &[key, value] : entries) out.push_back("[" + section + "] " + key + " = " + value);
    return out;
}

} // namespace obsmix::cli
