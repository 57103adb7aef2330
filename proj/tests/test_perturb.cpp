#include "doctest.h"

#include "filippov/perturb.hpp"
#include "filippov/systems.hpp"
#include "oracles.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace filippov;

namespace {

std::vector<double> unit_sweep() {
    std::vector<double> lams;
    for (int k = 0; k <= 20; ++k) lams.push_back(0.05 * k);
    return lams;
}

RobustnessReport sweep(const char* name, std::span<const double> lams, const SweepOptions& opts = {}) {
    const auto spec = builtin(name);
    return isolation_sweep(spec.family(), spec.window, spec.neighborhood, lams, opts);
}

/// F_eps(x, 0) for System A by hand: the hull of F0 over [x - eps, x + eps], widened by eps.
Interval system_a_target(double x, double eps) {
    double lo = x - eps > 0.0 ? 3.0 : 1.0;
    double hi = x + eps < 0.0 ? 1.0 : 3.0;
    return Interval(lo - eps, hi + eps);
}

}  // namespace

TEST_CASE("System A sweep isolates with an empty invariant part") {
    const auto lams = unit_sweep();
    // Sign analysis: f_lambda >= 1 on the window, so no equilibria at any lambda.
    for (const double lam : lams) {
        if (lam == 0.0) continue;
        const auto [x, fmin] = oracle::scan_min([lam](double u) { return oracle::f_lambda(u, lam); }, -1.0, 1.0, 20000);
        CHECK(fmin >= 1.0);
    }
    const auto r = sweep("systemA", lams);
    REQUIRE(r.entries.size() == lams.size());
    for (const auto& e : r.entries) {
        INFO("lambda=" << e.lambda);
        CHECK(e.report.verdict == Verdict::Isolating);
        CHECK(e.report.invariant.empty());
        CHECK(e.refinements == 0);
    }
    CHECK(r.zero_isolating);
    CHECK(r.eps_star == 1.0);
    CHECK(r.window_clipped);
}

TEST_CASE("System B sweep keeps the invariant band near the equilibria") {
    const auto lams = unit_sweep();
    const auto r = sweep("systemB", lams);
    CHECK(r.eps_star == 1.0);
    for (const auto& e : r.entries) {
        INFO("lambda=" << e.lambda);
        CHECK(e.report.verdict == Verdict::Isolating);
        REQUIRE_FALSE(e.report.invariant.empty());
        const Box band = bounding_box(e.report.grid, e.report.invariant);
        CHECK(band[0].lo() >= -0.7);
        CHECK(band[0].hi() <= 0.1);
        CHECK(e.report.min_boundary_distance >= 0.3);
        // The band holds both zeros of g_lambda: 0 and lambda times the negative zero of g_1.
        CHECK(band[0].contains(0.0));
        if (e.lambda > 0.0) {
            const double zero = e.lambda * -0.43;
            CHECK(oracle::g_lambda(zero - 0.02 * e.lambda, e.lambda) * oracle::g_lambda(zero + 0.02 * e.lambda, e.lambda) < 0.0);
            CHECK(band[0].contains(zero));
        }
    }
}

TEST_CASE("sweep bookkeeping") {
    const std::vector<double> only_zero = {0.0};
    const auto z = sweep("systemB", only_zero);
    CHECK(z.zero_isolating);
    CHECK(z.eps_star == 0.0);

    const std::vector<double> no_zero = {0.5, 1.0};
    const auto nz = sweep("systemA", no_zero);
    CHECK_FALSE(nz.zero_isolating);
    CHECK(nz.eps_star == 0.0);
    CHECK(nz.at_lambda(0.5) != nullptr);
    CHECK(nz.at_lambda(0.25) == nullptr);

    // N strictly inside the window is not flagged as clipped.
    const auto spec = builtin("systemC");
    const std::vector<double> lams = {0.0};
    const auto inner = isolation_sweep(spec.family(), spec.window, Box{Interval(-0.5, 0.5)}, lams);
    CHECK_FALSE(inner.window_clipped);
    CHECK(inner.entries[0].report.verdict == Verdict::Isolating);
    CHECK(inner.entries[0].report.neighborhood.count() == 256);
}

TEST_CASE("refinement on an inconclusive verdict") {
    // A coarse grid with a long horizon smears the rest point of System C
    // onto the boundary of a tight N; refinement halves h_tau each round.
    const auto spec = builtin("systemC");
    const std::vector<double> lams = {0.0};
    SweepOptions opts;
    opts.subdivisions = 16;
    opts.h_tau = 0.5;
    opts.budget = 3;
    const auto r = isolation_sweep(spec.family(), spec.window, Box{Interval(-0.25, 0.25)}, lams, opts);
    const auto& e = r.entries[0];
    CHECK(e.refinements > 0);
    CHECK(e.report.grid.cell_count() == 16u << e.refinements);
    CHECK(e.report.h_tau == doctest::Approx(0.5 / (1 << e.refinements)));

    opts.budget = 0;
    const auto none = isolation_sweep(spec.family(), spec.window, Box{Interval(-0.25, 0.25)}, lams, opts);
    CHECK(none.entries[0].refinements == 0);
    CHECK(none.entries[0].report.verdict == Verdict::Inconclusive);
}

TEST_CASE("certified lambdas stay certified on a refined grid") {
    const auto lams = std::vector<double>{0.0, 0.3, 0.7, 1.0};
    for (const char* name : {"systemA", "systemB", "systemC"}) {
        SweepOptions coarse, fine;
        coarse.subdivisions = 256;
        fine.subdivisions = 512;
        const auto a = sweep(name, lams, coarse);
        const auto b = sweep(name, lams, fine);
        for (std::size_t i = 0; i < lams.size(); ++i) {
            if (a.entries[i].report.verdict != Verdict::Isolating) continue;
            INFO(name << " lambda=" << lams[i]);
            CHECK(b.entries[i].report.verdict == Verdict::Isolating);
        }
    }
}

TEST_CASE("sweep CSV export") {
    const std::vector<double> lams = {0.0, 1.0};
    const auto r = sweep("systemA", lams);
    std::ostringstream out;
    write_sweep_csv(r, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "lambda,verdict,inv_cell_count,min_boundary_distance,grid_cells,h_tau");
    std::getline(in, line);
    CHECK(line.rfind("0,Isolating,0,inf,512,", 0) == 0);
    std::getline(in, line);
    CHECK(line.rfind("1,Isolating,0,inf,512,", 0) == 0);

    std::ostringstream summary;
    write_sweep_summary(r, summary);
    CHECK(summary.str() == "eps_star=1\nzero_isolating=true\nwindow_clipped=true\nsamples=2\nisolating=2\n");
}

TEST_CASE("pertappx containment for System A") {
    const auto fam = builtin("systemA").family();
    const auto xs = lattice(Box{Interval(-1.0, 1.0)}, 1000);
    const auto probes = default_lambda_probes(fam.lambda_range());
    CHECK(probes.front() == 1e-4);
    CHECK(probes.back() == 1.0);

    const auto r = check_pertappx(fam, 0.1, probes, xs);
    CHECK(r.delta >= 0.01);
    REQUIRE(r.witness.has_value());
    CHECK(std::abs(r.witness->lambda) > r.delta);
    CHECK(r.witness->separation > 0.0);

    // Dense-evaluation oracle: up to the largest passing probe, f_lambda(x)
    // sits inside the hand-built target (the threshold is monotone in lambda).
    const double passed = r.delta;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ul(0.0, 1.0);
    for (int k = 0; k < 20000; ++k) {
        const double x = xs[rng() % xs.size()][0];
        const double lam = ul(rng) * passed;
        if (lam <= 0.0) continue;
        CHECK(system_a_target(x, 0.1).contains(oracle::f_lambda(x, lam)));
    }
    // The witness is a genuine violation.
    const double wx = r.witness->x[0];
    CHECK_FALSE(system_a_target(wx, 0.1).contains(oracle::f_lambda(wx, r.witness->lambda)));

    // Larger eps certifies at least as far.
    CHECK(check_pertappx(fam, 0.5, probes, xs).delta >= r.delta);
}

TEST_CASE("pertappx witness for family H and none for G with a large eps") {
    const auto xs = lattice(Box{Interval(-1.0, 1.0)}, 1001);
    const auto h = builtin("familyH").family();
    const auto probes = default_lambda_probes(h.lambda_range());
    const auto r = check_pertappx(h, 0.5, probes, xs);
    REQUIRE(r.witness.has_value());
    CHECK(r.witness->lambda > 0.0);
    CHECK(r.witness->lambda <= 1e-3);
    CHECK(std::abs(r.witness->x[0]) <= 0.01);
    CHECK(r.witness->target[0].lo() == doctest::Approx(0.5));
    CHECK(r.witness->target[0].hi() == doctest::Approx(3.5));
    CHECK(r.witness->value[0].hi() < 0.5);

    const auto g = builtin("systemB").family();
    const double tau = oracle::tau_scan();
    CHECK_FALSE(check_pertappx(g, 1.0 + std::abs(tau) + 1e-3, probes, xs).witness.has_value());

    CHECK_THROWS_AS(check_pertappx(g, 0.0, probes, xs), std::invalid_argument);
    CHECK_THROWS_AS(check_pertappx(g, -1.0, probes, xs), std::invalid_argument);
}

TEST_CASE("perturbed trajectories are eps-solutions") {
    const auto spec = builtin("systemA");
    const auto fam = spec.family();
    const Point x0 = {-0.9};
    const auto t05 = integrate(fam, x0, 0.05, 1.0, 0.005, SelectionStrategy::extremal_min(), spec.window);
    CHECK(verify_eps_solution(t05, fam, 0.2));

    const auto t0 = integrate(fam, x0, 0.0, 1.0, 0.005, SelectionStrategy::extremal_min(), spec.window);
    for (const double eps : {1e-6, 0.01, 0.5}) CHECK(verify_eps_solution(t0, fam, eps));

    const auto hspec = builtin("familyH");
    const auto hfam = hspec.family();
    const double lam = 0.01;
    const Point start = {lam * tau_argmin()};
    const auto th = integrate(hfam, start, lam, 0.1, 0.001, SelectionStrategy::extremal_min(), hspec.window);
    CHECK(th.velocities[0][0] == doctest::Approx(oracle::tau_scan()).epsilon(1e-4));
    CHECK_FALSE(verify_eps_solution(th, hfam, 0.5));
    CHECK(first_eps_violation(th, hfam, 0.5) == std::optional<std::size_t>(0));

    CHECK_THROWS_AS(verify_eps_solution(t0, fam, 0.0), std::invalid_argument);
}

TEST_CASE("eps-solution check is monotone in eps") {
    std::mt19937_64 rng(99);
    for (const char* name : {"systemA", "systemB", "familyH"}) {
        const auto spec = builtin(name);
        const auto fam = spec.family();
        std::uniform_real_distribution<double> ux(-0.9, 0.5), ul(0.0, 0.3);
        for (int trial = 0; trial < 10; ++trial) {
            const Point x0 = {ux(rng)};
            const auto traj = integrate(fam, x0, ul(rng), 0.5, 0.01, SelectionStrategy::seeded_random(rng()), spec.window);
            bool seen_true = false;
            for (const double eps : {0.01, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 4.0}) {
                const bool ok = verify_eps_solution(traj, fam, eps);
                if (seen_true) CHECK(ok);
                seen_true = seen_true || ok;
            }
            CHECK(seen_true);
        }
    }
}
