#include "doctest.h"

#include "filippov/cli.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace filippov;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("filippov_cli_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_lines(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) n += line.find(needle) != std::string::npos ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("lambda lists and points") {
    const auto r = parse_lambda_list("0:0.05:1");
    REQUIRE(r.size() == 21);
    CHECK(r.front() == 0.0);
    CHECK(r.back() == 1.0);
    CHECK(r[10] == doctest::Approx(0.5));
    CHECK(parse_lambda_list("0, 0.5,1") == std::vector<double>{0.0, 0.5, 1.0});
    CHECK_THROWS_AS(parse_lambda_list("0:0:1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_lambda_list("a,b"), std::invalid_argument);
    CHECK_THROWS_AS(parse_lambda_list("1:0.1"), std::invalid_argument);
    CHECK(parse_point("-0.5,0.25") == Point{-0.5, 0.25});
}

TEST_CASE("validate exit codes") {
    const auto h = call({"validate", "familyH"});
    CHECK(h.code == 2);
    CHECK(h.out.find("witness=found\n") != std::string::npos);
    CHECK(h.out.find("base=0\n") != std::string::npos);
    CHECK(h.out.find("base_lambda=0\n") != std::string::npos);

    CHECK(call({"validate", "systemA"}).code == 0);
    CHECK(call({"validate", "--system", "familyG"}).code == 0);
    CHECK(call({"validate", "systemC"}).code == 0);

    const auto dir = scratch("validate");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.sys") << "name = broken\ndims = 1\nwindow = [-1, 1]\npiece = x1 +\n";
    const auto bad = call({"validate", (dir / "bad.sys").string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("error:") != std::string::npos);

    // A spec file transcribing family H behaves like the built-in.
    std::ofstream(dir / "h.sys") << "name = myH\ndims = 1\nlambda_range = [0, 1]\nwindow = [-1, 1]\n"
                                    "switch s = x1\n"
                                    "piece = tanh(x1/lambda) + 2 - 2*exp(1)*mollifier(x1/lambda)\n"
                                    "zero.piece [s < 0] = 1\nzero.piece [s > 0] = 3\n";
    CHECK(call({"validate", (dir / "h.sys").string()}).code == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("usage errors exit with 1") {
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({"isolate"}).code == 1);
    CHECK(call({"isolate", "noSuchSystem"}).code == 1);
    CHECK(call({"sweep", "systemA", "--lambda", "2"}).code == 1);
    CHECK(call({"sweep", "systemA", "--lambda", "x"}).code == 1);
    CHECK(call({"simulate", "systemA", "--x0", "3"}).code == 1);
    CHECK(call({"simulate", "systemA", "--sel", "fancy"}).code == 1);
    CHECK(call({"isolate", "systemA", "--nbox", "[-2, 1]"}).code == 1);
    CHECK(call({"isolate", "systemA", "--grid", "0"}).code == 1);
    CHECK(call({"validate", "systemA", "--eps", "-1"}).code == 1);
    const auto help = call({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("sweep") != std::string::npos);
}

TEST_CASE("isolate System B") {
    const auto r = call({"isolate", "systemB"});
    CHECK(r.code == 0);
    CHECK(r.out.find("verdict=Isolating\n") != std::string::npos);
    CHECK(r.out.find("grid_cells=512\n") != std::string::npos);

    const auto dir = scratch("isolate");
    CHECK(call({"isolate", "systemB", "--out", dir.string()}).code == 0);
    CHECK(std::filesystem::exists(dir / "isolation_report.txt"));
    CHECK_FALSE(slurp(dir / "invariant_cells.txt").empty());
    CHECK(slurp(dir / "boundary_cells.txt") == "0\n511\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep System A") {
    const auto r = call({"sweep", "systemA"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("lambda,verdict,inv_cell_count,min_boundary_distance,grid_cells,h_tau\n", 0) == 0);
    CHECK(count_lines(r.out, ",Isolating,0,inf,512,") == 21);
    CHECK(count_lines(r.out, "Inconclusive") == 0);
    CHECK(r.out.find("# eps_star=1\n") != std::string::npos);

    const auto dir = scratch("sweep");
    CHECK(call({"sweep", "systemA", "--lambda", "0,0.5", "--out", dir.string()}).code == 0);
    CHECK(count_lines(slurp(dir / "sweep.csv"), "Isolating") == 2);
    CHECK(slurp(dir / "sweep_summary.txt").find("eps_star=0.5\n") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("omega of System C from -0.5") {
    const auto r = call({"omega", "systemC", "--x0", "-0.5"});
    CHECK(r.code == 0);
    CHECK(r.out.find("# start_cell=128\n") != std::string::npos);
    CHECK(count_lines(r.out, "256") >= 1);
    CHECK(r.out.find("\n128\n") == std::string::npos);
}

TEST_CASE("simulate and pertappx") {
    const auto r = call({"simulate", "systemC", "--x0", "-0.5", "--T", "1", "--step", "0.1"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("t,x1,v1,lambda,delta_cert\n0,-0.5,0.5,0,", 0) == 0);
    CHECK(count_lines(r.out, ",0,") == 11);

    const auto h = call({"pertappx", "familyH", "--eps", "0.5"});
    CHECK(h.code == 2);
    CHECK(h.out.find("witness=found\n") != std::string::npos);
    const auto a = call({"pertappx", "systemA", "--eps", "0.1", "--lambda", "0.001,0.005,0.01"});
    CHECK(a.code == 0);
    CHECK(a.out.find("certified_delta=0.01\n") != std::string::npos);
}

TEST_CASE("identical flags and seed give byte-identical output") {
    const std::vector<std::vector<std::string>> runs = {
        {"simulate", "systemB", "--sel", "random", "--seed", "42", "--x0", "-0.3", "--lambda", "0.5", "--T", "2"},
        {"sweep", "systemB", "--lambda", "0:0.25:1", "--grid", "128"},
        {"omega", "planarDemo", "--x0", "0.5,0.5", "--grid", "16"},
        {"validate", "familyH"},
    };
    for (const auto& args : runs) {
        const auto first = call(args), second = call(args);
        CHECK(first.code == second.code);
        CHECK(first.out == second.out);
    }
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    const std::vector<std::string> base = {"simulate", "planarDemo", "--sel", "random", "--seed", "7", "--x0", "0.8,0.3"};
    auto a1 = base, a2 = base;
    a1.insert(a1.end(), {"--out", d1.string()});
    a2.insert(a2.end(), {"--out", d2.string()});
    CHECK(call(a1).code == 0);
    CHECK(call(a2).code == 0);
    CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
    CHECK_FALSE(slurp(d1 / "trajectory.csv").empty());
    const auto other = call({"simulate", "planarDemo", "--sel", "random", "--seed", "8", "--x0", "0.8,0.3"});
    CHECK(other.out != slurp(d1 / "trajectory.csv"));
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
}
