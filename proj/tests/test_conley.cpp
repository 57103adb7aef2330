#include "doctest.h"

#include "filippov/conley.hpp"
#include "filippov/systems.hpp"
#include "sampling.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace filippov;

namespace {

struct Built {
    Grid grid;
    CombinatorialMultiflow mf;
};

Built build(const char* name, double lam, std::size_t cells, double h = -1.0) {
    const auto spec = builtin(name);
    Grid g(spec.window, std::vector<std::size_t>(spec.dims, cells));
    const auto fam = spec.family();
    const double tau = h >= 0.0 ? h : auto_h_tau(fam, lam, g);
    return {g, build_outer_approx(fam, lam, g, tau)};
}

std::size_t cell_at(const Grid& g, double x) { return g.cell_of(std::vector<double>{x}); }

}  // namespace

TEST_CASE("empty neighborhood has empty invariant part") {
    const auto b = build("systemB", 0.0, 256);
    CHECK(invariant_part(b.mf, CellSet(b.grid.cell_count())).empty());
    CHECK(omega_limit(b.mf, CellSet(b.grid.cell_count())).empty());
}

TEST_CASE("System A has no invariant cells and is isolating") {
    const auto a = build("systemA", 0.0, 512);
    const auto n = CellSet::full(a.grid.cell_count());
    CHECK(invariant_part(a.mf, n).empty());
    const auto r = check_isolation(a.mf, n);
    CHECK(r.verdict == Verdict::Isolating);
    CHECK(r.invariant.empty());
    CHECK(std::isinf(r.min_boundary_distance));
    CHECK(r.boundary.count() == 2);
}

TEST_CASE("System B invariant band around the equilibrium") {
    const auto b = build("systemB", 0.0, 1024, 0.02);
    const auto n = CellSet::full(b.grid.cell_count());
    const auto inv = invariant_part(b.mf, n);
    CHECK_FALSE(inv.empty());
    CHECK(inv.subset_of(cells_meeting(b.grid, Box{Interval(-0.1, 0.1)})));
    CHECK(inv.contains(cell_at(b.grid, 0.0)));

    const auto r = check_isolation(b.mf, n);
    CHECK(r.verdict == Verdict::Isolating);
    CHECK(r.min_boundary_distance >= 0.8);
}

TEST_CASE("System C isolates the rest point") {
    const auto c = build("systemC", 0.0, 512);
    const double w = c.grid.width(0);
    const auto r = check_isolation(c.mf, CellSet::full(c.grid.cell_count()));
    CHECK(r.verdict == Verdict::Isolating);
    CHECK(r.invariant.contains(cell_at(c.grid, 0.0)));
    // Right of 0 the unit drift empties the band; left of 0 the slow
    // contraction keeps a few cells self-looping.
    CHECK(r.invariant.subset_of(cells_meeting(c.grid, Box{Interval(-12 * w, w)})));
}

TEST_CASE("invariant part is a fixpoint, shrinks N and is monotone") {
    std::mt19937_64 rng(12);
    for (const char* name : {"systemB", "systemC", "familyH"}) {
        const auto b = build(name, 0.0, 256);
        const std::size_t n = b.grid.cell_count();
        const auto full = invariant_part(b.mf, CellSet::full(n));
        CHECK(invariant_part(b.mf, full) == full);
        CHECK(invariant_part_rounds(b.mf, full, 1) == full);
        CHECK(invariant_part_rounds(b.mf, CellSet::full(n), 10000) == full);
        for (int trial = 0; trial < 20; ++trial) {
            CellSet n1(n), n2(n);
            std::size_t lo = rng() % n, hi = rng() % n;
            if (lo > hi) std::swap(lo, hi);
            for (std::size_t k = lo; k <= hi; ++k) {
                n2.insert(k);
                if (rng() % 4 != 0) n1.insert(k);
            }
            const auto i1 = invariant_part(b.mf, n1), i2 = invariant_part(b.mf, n2);
            CHECK(i1.subset_of(n1));
            CHECK(i2.subset_of(n2));
            CHECK(i1.subset_of(i2));
            CHECK(invariant_part_rounds(b.mf, n2, 5).subset_of(invariant_part_rounds(b.mf, n2, 2)));
        }
    }
}

TEST_CASE("orbits staying in N pass only through surviving cells") {
    std::mt19937_64 rng(31);
    std::size_t orbits = 0;
    for (const double lam : {0.2, 0.5, 1.0}) {
        const auto spec = builtin("systemB");
        const auto fam = spec.family();
        const auto rev = fam.reversed();
        const auto b = build("systemB", lam, 512);
        const auto survivors = invariant_part_rounds(b.mf, CellSet::full(b.grid.cell_count()), 50);
        const double h = b.mf.h_tau();
        // Heteroclinic orbits between the equilibria at 0 and near -0.43 lambda.
        std::uniform_real_distribution<double> start(-0.42 * lam, -0.01 * lam);
        for (int k = 0; k < 34; ++k) {
            Point x0 = {start(rng)};
            Point fwd = x0, bwd = x0;
            bool inside = true;
            for (int step = 0; step <= 50 && inside; ++step) {
                for (const Point* p : {&fwd, &bwd}) {
                    const auto meeting = cells_meeting(b.grid, Box::from_point(*p));
                    CHECK(meeting.intersects(survivors));
                }
                const auto f = sampling::endpoint(fam, fwd, lam, h, SelectionStrategy::extremal_min(), b.grid.window(), 200);
                const auto r = sampling::endpoint(rev, bwd, lam, h, SelectionStrategy::extremal_min(), b.grid.window(), 200);
                inside = f && r;
                if (inside) {
                    fwd = *f;
                    bwd = *r;
                }
            }
            CHECK(inside);
            ++orbits;
        }
    }
    CHECK(orbits >= 100);
}

TEST_CASE("boundary cells") {
    const Grid g(Box{Interval(-1.0, 1.0)}, {10});
    CellSet n(10);
    for (std::size_t k = 3; k <= 6; ++k) n.insert(k);
    CHECK(combinatorial_boundary(g, n).indices() == std::vector<std::size_t>{3, 6});
    CHECK(combinatorial_boundary(g, CellSet::full(10)).indices() == std::vector<std::size_t>{0, 9});

    const Grid p(Box{Interval(0.0, 1.0), Interval(0.0, 1.0)}, {4, 4});
    const auto bp = combinatorial_boundary(p, CellSet::full(16));
    CHECK(bp.count() == 12);
}

TEST_CASE("omega limits on System C") {
    const auto c = build("systemC", 0.0, 512);
    const auto& g = c.grid;
    const double w = g.width(0);
    const double h = c.mf.h_tau();

    CellSet from_left(g.cell_count());
    from_left.insert(cell_at(g, -0.5));
    const auto omega = omega_limit(c.mf, from_left);
    CHECK(omega.contains(cell_at(g, 0.0)));
    CHECK_FALSE(omega.contains(cell_at(g, -0.5)));
    CHECK(omega.subset_of(cells_meeting(g, Box{Interval(-12 * w, 1.0)})));

    // The cell of 0 spreads into the rightward band [0, t].
    CellSet zero(g.cell_count());
    zero.insert(cell_at(g, 0.0));
    const auto one = image(c.mf, zero, 1);
    CHECK(zero.subset_of(one));
    CHECK(one.count() > zero.count());
    const auto steps = static_cast<std::size_t>(std::ceil(1.0 / h));
    CHECK(cells_meeting(g, Box{Interval(0.0, 0.9)}).subset_of(image(c.mf, zero, steps)));
}

TEST_CASE("report export") {
    const auto a = build("systemA", 0.0, 8, 0.0);
    const auto r = check_isolation(a.mf, CellSet::full(8));
    std::ostringstream out;
    write_report(r, out);
    const std::string text = out.str();
    CHECK(text.find("verdict=Inconclusive\n") != std::string::npos);
    CHECK(text.find("inv_cell_count=8\n") != std::string::npos);
    CHECK(text.find("grid_cells=8\n") != std::string::npos);
    std::ostringstream cells;
    write_cells(r.boundary, cells);
    CHECK(cells.str() == "0\n7\n");
}
