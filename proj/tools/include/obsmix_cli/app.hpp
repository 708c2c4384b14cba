#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace obsmix::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_domain = 3, exit_verification = 4 };

struct Options {
    std::string command;
    std::optional<std::string> config_path;
    std::optional<std::string> out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> preset;
    std::optional<double> entropy; ///< temperature: target entropy
};

/// Built-in configurations by name.
const std::map<std::string, std::string> &presets();

const std::vector<std::string> &command_names();

/// Parses argv and runs. The output document goes to `out` unless --out is given.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// Runs a parsed command; maps errors to exit codes and reports them on `err`.
int execute(const Options &options, std::ostream &out, std::ostream &err);

} // namespace obsmix::cli
