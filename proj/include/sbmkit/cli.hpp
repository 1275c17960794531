#pragma once

// Command-line front end: parameter schemas, config-file merging, dispatch
// to the verifiers, and emission of JSON reports, CSV tables and SVG plots.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbmkit/plot.hpp"

namespace sbmkit {

const char* version();

/// Malformed configuration: unknown key, wrong type, bad value.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ParamType { Num, Int, Str, Bool, NumList, Point, PointList, OptNum };

struct Param {
    std::string name;  // snake_case; the flag is the same with dashes
    ParamType type;
    nlohmann::json default_value;
    std::string help;
};

/// Full command names: "phi", "chi", "kernel", "simulate", "martin",
/// "verify special-identity", ...
const std::vector<std::string>& command_names();
/// Schema of a command, shared parameters included. Throws ConfigError for
/// an unknown command.
const std::vector<Param>& command_schema(const std::string& command);

/// A command plus every one of its parameters. Serializes to
/// {"command": ..., "params": {...}}.
struct RunConfig {
    std::string command;
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json to_json() const;
    /// Accepts the serialized form or a flat object with a "command" key.
    /// Missing parameters take their defaults.
    static RunConfig from_json(const nlohmann::json& doc, const std::string& command = {});
};

/// Defaults, then the config file values, then the flags (flags win).
/// Throws ConfigError naming the offending key.
RunConfig resolve_config(const std::string& command, const nlohmann::json& file, const nlohmann::json& flags);

/// Converts a flag string to the JSON value of the parameter type.
nlohmann::json parse_flag_value(const Param& p, const std::string& text);

struct RunResult {
    nlohmann::json document;  // {tool, version, config, pass, reports, ...}
    std::vector<std::string> csv_header;
    std::vector<std::vector<std::string>> csv_rows;
    std::vector<PlotSpec> plots;
    bool pass = true;
};

/// Runs the experiment without touching the file system. Numerical failures
/// propagate as QuadratureError, InversionError or SimulationError.
RunResult execute(const RunConfig& config);

std::string to_csv(const RunResult& result);

/// execute plus artifacts: the JSON report (to params.report, else `out`),
/// CSV to params.out, SVG to params.plot. Returns the exit code
/// 0 pass, 1 verification failure, 2 usage/config, 3 numerical failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace sbmkit
