#pragma once

// Built-in systems and the system spec file format.
//
// A spec file is line oriented; '#' starts a comment.
//
//   name           = systemA
//   dims           = 1
//   lambda_range   = [0, 1]
//   window         = [-1, 1]                 # '[a, b] x [c, d]' in 2-D
//   neighborhood   = [-1, 1]                 # optional, defaults to window
//   switch s       = x1                      # named switching function
//   piece          = tanh(x1/lambda) + 2     # components separated by ';'
//   zero.piece [s < 0] = 1                   # lambda = 0 member
//   zero.piece [s > 0] = 3
//
// Guards are comma-separated conditions 'name > 0', 'name < 0' or
// 'name = 0' inside brackets after the keyword. A '= 0' piece only
// contributes on its switching set, which adds vertices to the
// convexified value there.

#include "filippov/field.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace filippov {

class SpecError : public std::runtime_error {
public:
    SpecError(const std::string& origin, std::size_t line, const std::string& message);
    /// One-based line number; 0 when the error concerns the file as a whole.
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct SystemSpec {
    std::string name;
    std::size_t dims = 0;
    Interval lambda_range{0.0, 0.0};
    Box window;
    Box neighborhood;
    std::vector<std::string> switch_names;
    PiecewiseSpec regular;
    std::optional<PiecewiseSpec> zero_member;

    FilippovFamily family() const;
    /// Canonical text form; parse_system(to_text()) reproduces the definition.
    std::string to_text() const;

    friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// systemA, systemB, familyH, systemC, planarDemo (plus aliases familyF, familyG).
SystemSpec builtin(std::string_view name);
std::vector<std::string> builtin_names();
/// Source text of a built-in, exactly as parsed by builtin().
std::string builtin_text(std::string_view name);

SystemSpec parse_system(std::string_view text, const std::string& origin = "<string>");
SystemSpec load_system(const std::filesystem::path& path);
/// A built-in name or a path to a spec file.
SystemSpec resolve_system(const std::string& name_or_path);

/// g_1(u) = tanh(u) + 2 - 2e * mollifier(u), in plain double arithmetic.
double g_one(double u);
/// min over u of g_1, computed once (dense scan + golden section) and frozen.
double tau_min();
/// Argument of the minimum.
double tau_argmin();

/// Parses '[a, b] x [c, d]'.
Box parse_box(std::string_view text);

}  // namespace filippov
