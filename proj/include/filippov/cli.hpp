#pragma once

// Command-line driver: validate, simulate, isolate, sweep, omega, pertappx.
//
// Exit codes: 0 success (validate: no witness), 1 usage, parse or domain
// error, 2 validate found a USC witness (pertappx: a containment witness).

#include "filippov/geometry.hpp"
#include "filippov/systems.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace filippov {

struct RunConfig {
    std::string command;
    std::string system;                       // built-in name or spec file path
    std::optional<std::size_t> grid;          // subdivisions per axis
    std::optional<double> h_tau;              // 0 or absent picks the automatic horizon
    std::vector<double> lambdas;              // empty means the command default
    std::optional<Box> neighborhood;
    std::optional<double> eps;
    std::optional<double> T;
    std::optional<double> step;
    std::string selection = "min";
    std::uint64_t seed = 0;
    std::optional<Point> x0;
    std::optional<std::filesystem::path> out_dir;
};

/// Parses "a,b,c" or "start:step:stop" (inclusive, rounded to the step count).
std::vector<double> parse_lambda_list(std::string_view text);
/// Parses "a,b,..." into a point.
Point parse_point(std::string_view text);

/// Throws std::invalid_argument when an override falls outside the system's
/// declared lambda range or window.
void validate_config(const RunConfig& cfg, const SystemSpec& spec);

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_isolate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_omega(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_pertappx(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses arguments (without the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace filippov
