#include "doctest.h"

#include "filippov/systems.hpp"
#include "oracles.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace filippov;

namespace {

Box at(const SystemSpec& s, std::vector<double> x, double lam) {
    return eval_value(s.family(), std::span<const double>(x), lam).box();
}

std::string expect_spec_error(const std::string& text) {
    try {
        parse_system(text);
    } catch (const SpecError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("built-in examples") {
    CHECK(at(builtin("systemA"), {0.0}, 0.0) == Box{Interval(1.0, 3.0)});
    CHECK(at(builtin("systemC"), {0.0}, 0.0) == Box{Interval(0.0, 1.0)});
    CHECK(at(builtin("systemC"), {-0.5}, 0.3) == Box{Interval(0.5)});
    CHECK(at(builtin("systemC"), {0.5}, 0.3) == Box{Interval(1.0)});

    const auto planar = builtin("planarDemo");
    CHECK(planar.dims == 2);
    CHECK(at(planar, {0.2, 0.4}, 0.0) == Box{Interval(-0.2), Interval(-1.0)});
    CHECK(at(planar, {0.2, -0.4}, 0.0) == Box{Interval(-0.2), Interval(1.0)});
    CHECK(planar.neighborhood == Box{Interval(-1.0, 1.0), Interval(-1.0, 1.0)});

    CHECK_THROWS_AS(builtin("systemZ"), std::invalid_argument);
    CHECK(builtin("familyF") == builtin("systemA"));
    CHECK(builtin("familyG") == builtin("systemB"));
    CHECK(builtin_names().size() >= 5);
}

TEST_CASE("tau_min is negative and reproduces under a dense scan") {
    const double tau = tau_min();
    CHECK(tau < 0.0);
    CHECK(std::fabs(tau - oracle::tau_scan(1.0)) <= 1e-6);
    CHECK(tau_argmin() == doctest::Approx(-0.22586).epsilon(1e-3));
    CHECK(g_one(tau_argmin()) == tau);
    CHECK(g_one(0.0) == 0.0);
}

TEST_CASE("tau_min does not depend on lambda") {
    const double ref = oracle::tau_scan(1.0);
    for (double lam : {0.5, 0.1}) CHECK(std::fabs(oracle::tau_scan(lam) - ref) <= 1e-6);
    const auto b = builtin("systemB");
    for (double lam : {1.0, 0.5, 0.1}) {
        std::vector<double> x = {tau_argmin() * lam};
        CHECK(at(b, x, lam)[0].lo() == doctest::Approx(tau_min()).epsilon(1e-9));
    }
}

TEST_CASE("g_lambda(0) is exactly zero") {
    const auto b = builtin("systemB");
    for (double lam : {1.0, 0.5, 0.1, 0.01, 1e-6}) CHECK(at(b, {0.0}, lam) == Box{Interval(0.0)});
}

TEST_CASE("spec file round trip") {
    for (const auto& name : builtin_names()) {
        const auto spec = builtin(name);
        CHECK(parse_system(spec.to_text()) == spec);
        CHECK(parse_system(builtin_text(name)) == spec);
    }
    const auto dir = std::filesystem::temp_directory_path() / "filippov_systems_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "a.sys";
    {
        std::ofstream out(path);
        out << "# hand transcription\n"
               "name = systemA\n"
               "dims = 1\n"
               "lambda_range = [0, 1]\n"
               "window = [-1, 1]\n"
               "neighborhood = [-1, 1]\n"
               "switch s = x1\n"
               "piece = tanh(x1/lambda) + 2\n"
               "zero.piece [s < 0] = 1\n"
               "zero.piece [s > 0] = 3\n";
    }
    CHECK(load_system(path) == builtin("systemA"));
    CHECK(resolve_system(path.string()) == builtin("systemA"));
    CHECK(resolve_system("systemC") == builtin("systemC"));
    CHECK_THROWS(resolve_system((dir / "missing.sys").string()));
    std::filesystem::remove_all(dir);
}

TEST_CASE("spec file diagnostics") {
    const std::string header = "name = t\ndims = 1\nlambda_range = [0, 1]\nwindow = [-1, 1]\nswitch s = x1\n";

    const auto overlap = expect_spec_error(header + "piece [s > 0] = 1\npiece [s < 0] = 2\npiece = 5\n");
    CHECK(overlap.find("contradictory") != std::string::npos);

    const auto gap = expect_spec_error(header + "piece [s > 0] = 1\n");
    CHECK_FALSE(gap.empty());

    const auto pitfall = expect_spec_error(header + "piece = tanh(x1/lambda) + 2\n");
    CHECK(pitfall.find("lambda = 0") != std::string::npos);

    const auto range = expect_spec_error("name = t\ndims = 1\nlambda_range = [1, 0]\nwindow = [-1, 1]\npiece = 1\n");
    CHECK(range.find("lambda_range") != std::string::npos);

    try {
        parse_system(header + "piece = 1 +\n");
        FAIL("expected an error");
    } catch (const SpecError& e) {
        CHECK(e.line() == 6);
    }
    CHECK_FALSE(expect_spec_error(header + "piece [q > 0] = 1\n").empty());
    CHECK_FALSE(expect_spec_error("dims = 1\nwindow = [-1, 1]\npiece = 1\n").empty());
    CHECK_FALSE(expect_spec_error(header + "colour = red\npiece = 1\n").empty());

    // A lambda-free field needs no zero member; agreeing overlaps are fine.
    CHECK_NOTHROW(parse_system(header + "piece = -x1\n"));
    CHECK_NOTHROW(parse_system(header + "piece [s > 0] = 1\npiece [s < 0] = 1\npiece [s = 0] = 1\n"));
}

TEST_CASE("parse_box") {
    CHECK(parse_box("[-1, 1]") == Box{Interval(-1.0, 1.0)});
    CHECK(parse_box("[-1,1] x [0, 2]") == Box{Interval(-1.0, 1.0), Interval(0.0, 2.0)});
    CHECK_THROWS(parse_box("[1, -1]"));
    CHECK_THROWS(parse_box("(0, 1)"));
}
