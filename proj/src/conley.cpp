#include "filippov/conley.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <vector>

namespace filippov {

std::string to_string(Verdict v) { return v == Verdict::Isolating ? "Isolating" : "Inconclusive"; }

CellSet invariant_part(const CombinatorialMultiflow& mf, const CellSet& n) {
    const std::size_t cells = mf.cell_count();
    if (n.universe() != cells) throw std::invalid_argument("neighborhood belongs to a different grid");
    const DualMultiflow dual = transpose(mf);
    CellSet s = n;
    std::vector<std::size_t> out_count(cells, 0), in_count(cells, 0);
    std::deque<std::size_t> work;
    s.for_each([&](std::size_t c) {
        for (const auto t : mf.successors(c))
            if (s.contains(t)) ++out_count[c];
        for (const auto p : dual.successors(c))
            if (s.contains(p)) ++in_count[c];
        if (out_count[c] == 0 || in_count[c] == 0) work.push_back(c);
    });
    while (!work.empty()) {
        const std::size_t c = work.front();
        work.pop_front();
        if (!s.contains(c)) continue;
        s.erase(c);
        for (const auto t : mf.successors(c)) {
            if (s.contains(t) && --in_count[t] == 0) work.push_back(t);
        }
        for (const auto p : dual.successors(c)) {
            if (s.contains(p) && --out_count[p] == 0) work.push_back(p);
        }
    }
    return s;
}

CellSet invariant_part_rounds(const CombinatorialMultiflow& mf, const CellSet& n, std::size_t rounds) {
    const DualMultiflow dual = transpose(mf);
    CellSet s = n;
    for (std::size_t r = 0; r < rounds; ++r) {
        CellSet next(s.universe());
        s.for_each([&](std::size_t c) {
            bool succ = false, pred = false;
            for (const auto t : mf.successors(c))
                if (s.contains(t)) {
                    succ = true;
                    break;
                }
            for (const auto p : dual.successors(c))
                if (s.contains(p)) {
                    pred = true;
                    break;
                }
            if (succ && pred) next.insert(c);
        });
        if (next == s) break;
        s = std::move(next);
    }
    return s;
}

CellSet combinatorial_boundary(const Grid& grid, const CellSet& n) {
    CellSet boundary(grid.cell_count());
    n.for_each([&](std::size_t c) {
        if (grid.touches_boundary(c)) {
            boundary.insert(c);
            return;
        }
        // Any of the 3^d - 1 neighbours outside N puts c on the boundary.
        const auto base = grid.coords(c);
        const std::size_t d = grid.dims();
        std::vector<std::size_t> first(d), last(d);
        for (std::size_t i = 0; i < d; ++i) {
            first[i] = base[i] - 1;
            last[i] = base[i] + 1;
        }
        std::vector<std::size_t> k = first;
        while (true) {
            if (!n.contains(grid.index(k))) {
                boundary.insert(c);
                return;
            }
            std::size_t i = d;
            while (i-- > 0) {
                if (k[i] < last[i]) {
                    ++k[i];
                    break;
                }
                k[i] = first[i];
            }
            if (i == static_cast<std::size_t>(-1)) return;
        }
    });
    return boundary;
}

IsolationReport check_isolation(const CombinatorialMultiflow& mf, const CellSet& n) {
    IsolationReport r;
    r.grid = mf.grid();
    r.h_tau = mf.h_tau();
    r.lambda = mf.lambda();
    r.neighborhood = n;
    r.invariant = invariant_part(mf, n);
    r.boundary = combinatorial_boundary(mf.grid(), n);
    r.verdict = r.invariant.intersects(r.boundary) ? Verdict::Inconclusive : Verdict::Isolating;
    if (r.invariant.empty() || r.boundary.empty()) {
        r.min_boundary_distance = std::numeric_limits<double>::infinity();
    } else {
        // Per-cell gaps; the boundary set is small relative to the grid in practice.
        double best = std::numeric_limits<double>::infinity();
        const auto inv = r.invariant.indices();
        const auto bnd = r.boundary.indices();
        std::vector<Box> inv_boxes;
        inv_boxes.reserve(inv.size());
        for (const auto c : inv) inv_boxes.push_back(mf.grid().cell_box(c));
        for (const auto b : bnd) {
            const Box bb = mf.grid().cell_box(b);
            for (const auto& ib : inv_boxes) best = std::min(best, gap(ib, bb));
        }
        r.min_boundary_distance = best;
    }
    return r;
}

CellSet omega_limit(const CombinatorialMultiflow& mf, const CellSet& a) {
    std::vector<CellSet> seq;
    std::unordered_multimap<std::size_t, std::size_t> seen;
    CellSet s = a;
    while (true) {
        const std::size_t h = s.hash();
        auto [lo, hi] = seen.equal_range(h);
        for (auto it = lo; it != hi; ++it) {
            if (seq[it->second] == s) {
                CellSet omega(mf.cell_count());
                for (std::size_t k = it->second; k < seq.size(); ++k) omega |= seq[k];
                return omega;
            }
        }
        seen.emplace(h, seq.size());
        seq.push_back(s);
        s = image(mf, s, 1);
    }
}

void write_report(const IsolationReport& report, std::ostream& out) {
    out << "verdict=" << to_string(report.verdict) << '\n';
    out << "lambda=" << format_number(report.lambda) << '\n';
    out << "h_tau=" << format_number(report.h_tau) << '\n';
    out << "window=" << to_string(report.grid.window()) << '\n';
    out << "subdivisions=";
    for (std::size_t i = 0; i < report.grid.dims(); ++i) out << (i ? "x" : "") << report.grid.subdivisions()[i];
    out << '\n';
    out << "grid_cells=" << report.grid.cell_count() << '\n';
    out << "neighborhood_cells=" << report.neighborhood.count() << '\n';
    out << "boundary_cells=" << report.boundary.count() << '\n';
    out << "inv_cell_count=" << report.invariant.count() << '\n';
    out << "min_boundary_distance=" << format_number(report.min_boundary_distance) << '\n';
    if (!report.invariant.empty()) out << "inv_bounding_box=" << to_string(bounding_box(report.grid, report.invariant)) << '\n';
}

void write_cells(const CellSet& cells, std::ostream& out) {
    cells.for_each([&](std::size_t c) { out << c << '\n'; });
}

}  // namespace filippov
