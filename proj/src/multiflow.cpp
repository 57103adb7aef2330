#include "filippov/multiflow.hpp"

#include "filippov/solver.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>

namespace filippov {

// ---------------------------------------------------------------- Grid

Grid::Grid(Box window, std::vector<std::size_t> subdivisions)
    : window_(std::move(window)), subdivisions_(std::move(subdivisions)) {
    if (window_.dims() == 0 || subdivisions_.size() != window_.dims())
        throw std::invalid_argument("grid needs one subdivision count per window axis");
    count_ = 1;
    for (std::size_t i = 0; i < window_.dims(); ++i) {
        if (subdivisions_[i] == 0) throw std::invalid_argument("grid has zero cells along an axis");
        if (!(window_[i].width() > 0.0) || !window_[i].is_finite())
            throw std::invalid_argument("grid window must have positive finite extent");
        widths_.push_back(window_[i].width() / static_cast<double>(subdivisions_[i]));
        count_ *= subdivisions_[i];
    }
}

std::vector<std::size_t> Grid::coords(std::size_t cell) const {
    std::vector<std::size_t> c(dims());
    for (std::size_t i = dims(); i-- > 0;) {
        c[i] = cell % subdivisions_[i];
        cell /= subdivisions_[i];
    }
    return c;
}

std::size_t Grid::index(std::span<const std::size_t> coords) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dims(); ++i) idx = idx * subdivisions_[i] + coords[i];
    return idx;
}

Box Grid::cell_box(std::size_t cell) const {
    const auto c = coords(cell);
    std::vector<Interval> axes;
    axes.reserve(dims());
    for (std::size_t i = 0; i < dims(); ++i) {
        const double lo = window_[i].lo() + static_cast<double>(c[i]) * widths_[i];
        const double hi = c[i] + 1 == subdivisions_[i] ? window_[i].hi()
                                                       : window_[i].lo() + static_cast<double>(c[i] + 1) * widths_[i];
        axes.emplace_back(lo, hi);
    }
    return Box(std::move(axes));
}

std::size_t Grid::cell_of(std::span<const double> p) const {
    if (p.size() != dims()) throw std::invalid_argument("point has the wrong dimension");
    std::vector<std::size_t> c(dims());
    for (std::size_t i = 0; i < dims(); ++i) {
        const double u = std::floor((p[i] - window_[i].lo()) / widths_[i]);
        const double top = static_cast<double>(subdivisions_[i] - 1);
        c[i] = static_cast<std::size_t>(std::clamp(u, 0.0, top));
    }
    return index(c);
}

bool Grid::touches_boundary(std::size_t cell) const {
    const auto c = coords(cell);
    for (std::size_t i = 0; i < dims(); ++i)
        if (c[i] == 0 || c[i] + 1 == subdivisions_[i]) return true;
    return false;
}

// ---------------------------------------------------------------- CellSet

CellSet::CellSet(std::size_t universe) : universe_(universe), words_((universe + 63) / 64, 0) {}

CellSet CellSet::full(std::size_t universe) {
    CellSet s(universe);
    for (auto& w : s.words_) w = ~std::uint64_t{0};
    if (universe % 64 != 0 && !s.words_.empty()) s.words_.back() = (std::uint64_t{1} << (universe % 64)) - 1;
    return s;
}

bool CellSet::contains(std::size_t cell) const {
    return cell < universe_ && ((words_[cell / 64] >> (cell % 64)) & 1U) != 0;
}

void CellSet::insert(std::size_t cell) {
    if (cell >= universe_) throw std::out_of_range("cell index outside the grid");
    words_[cell / 64] |= std::uint64_t{1} << (cell % 64);
}

void CellSet::erase(std::size_t cell) {
    if (cell >= universe_) return;
    words_[cell / 64] &= ~(std::uint64_t{1} << (cell % 64));
}

std::size_t CellSet::count() const {
    std::size_t n = 0;
    for (const auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

bool CellSet::empty() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::vector<std::size_t> CellSet::indices() const {
    std::vector<std::size_t> out;
    for_each([&](std::size_t c) { out.push_back(c); });
    return out;
}

bool CellSet::subset_of(const CellSet& other) const {
    if (other.universe_ != universe_) throw std::invalid_argument("cell sets over different grids");
    for (std::size_t w = 0; w < words_.size(); ++w)
        if ((words_[w] & ~other.words_[w]) != 0) return false;
    return true;
}

bool CellSet::intersects(const CellSet& other) const {
    if (other.universe_ != universe_) throw std::invalid_argument("cell sets over different grids");
    for (std::size_t w = 0; w < words_.size(); ++w)
        if ((words_[w] & other.words_[w]) != 0) return true;
    return false;
}

std::size_t CellSet::hash() const {
    std::size_t h = std::hash<std::size_t>{}(universe_);
    for (const auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

CellSet& CellSet::operator|=(const CellSet& other) {
    if (other.universe_ != universe_) throw std::invalid_argument("cell sets over different grids");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    return *this;
}

CellSet& CellSet::operator&=(const CellSet& other) {
    if (other.universe_ != universe_) throw std::invalid_argument("cell sets over different grids");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    return *this;
}

namespace {

/// Inclusive index range of cells along one axis meeting [lo, hi]; false when empty.
bool axis_range(const Grid& grid, std::size_t axis, const Interval& iv, std::size_t& first, std::size_t& last) {
    const Interval& w = grid.window()[axis];
    if (iv.hi() < w.lo() || iv.lo() > w.hi()) return false;
    const double width = grid.width(axis);
    const double top = static_cast<double>(grid.subdivisions()[axis] - 1);
    const double a = std::ceil((iv.lo() - w.lo()) / width) - 1.0;
    const double b = std::floor((iv.hi() - w.lo()) / width);
    first = static_cast<std::size_t>(std::clamp(a, 0.0, top));
    last = static_cast<std::size_t>(std::clamp(b, 0.0, top));
    return first <= last;
}

template <typename F>
void for_each_in_ranges(const Grid& grid, const std::vector<std::size_t>& first, const std::vector<std::size_t>& last,
                        F&& f) {
    const std::size_t n = grid.dims();
    std::vector<std::size_t> c = first;
    while (true) {
        f(grid.index(c));
        std::size_t i = n;
        while (i-- > 0) {
            if (c[i] < last[i]) {
                ++c[i];
                break;
            }
            c[i] = first[i];
        }
        if (i == static_cast<std::size_t>(-1)) return;
    }
}

template <typename F>
void for_each_meeting(const Grid& grid, const Box& b, F&& f) {
    std::vector<std::size_t> first(grid.dims()), last(grid.dims());
    for (std::size_t i = 0; i < grid.dims(); ++i)
        if (!axis_range(grid, i, b[i], first[i], last[i])) return;
    for_each_in_ranges(grid, first, last, std::forward<F>(f));
}

/// Enclosure of F over b, evaluated on `splits` sub-boxes per axis.
Box enclose(const FilippovFamily& fam, const Box& b, double lambda, std::size_t splits) {
    if (splits <= 1) return eval_box(fam, b, lambda).box();
    const std::size_t n = b.dims();
    std::vector<std::size_t> idx(n, 0);
    std::optional<Box> acc;
    while (true) {
        std::vector<Interval> axes;
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = b[i].lo(), hi = b[i].hi();
            const double a = idx[i] == 0 ? lo : lo + (hi - lo) * static_cast<double>(idx[i]) / static_cast<double>(splits);
            const double z = idx[i] + 1 == splits ? hi
                                                  : lo + (hi - lo) * static_cast<double>(idx[i] + 1) / static_cast<double>(splits);
            axes.emplace_back(std::min(a, z), std::max(a, z));
        }
        const Box v = eval_box(fam, Box(std::move(axes)), lambda).box();
        acc = acc ? hull(*acc, v) : v;
        std::size_t i = n;
        while (i-- > 0) {
            if (++idx[i] < splits) break;
            idx[i] = 0;
        }
        if (i == static_cast<std::size_t>(-1)) break;
    }
    return *acc;
}

/// c + [0, h] * V, outward rounded.
Box sweep(const Box& c, double h, const Box& v) { return translate(c, Interval(0.0, h), v); }

bool strictly_inside(const Box& inner, const Box& outer) {
    for (std::size_t i = 0; i < inner.dims(); ++i)
        if (!(outer[i].lo() < inner[i].lo() && inner[i].hi() < outer[i].hi())) return false;
    return true;
}

std::size_t default_splits(std::size_t dims) { return dims == 1 ? 4 : (dims == 2 ? 2 : 1); }

}  // namespace

CellSet cells_meeting(const Grid& grid, const Box& b) {
    if (b.dims() != grid.dims()) throw std::invalid_argument("box has the wrong dimension");
    CellSet s(grid.cell_count());
    for_each_meeting(grid, b, [&](std::size_t c) { s.insert(c); });
    return s;
}

Box bounding_box(const Grid& grid, const CellSet& cells) {
    std::optional<Box> acc;
    cells.for_each([&](std::size_t c) {
        const Box b = grid.cell_box(c);
        acc = acc ? hull(*acc, b) : b;
    });
    if (!acc) throw std::invalid_argument("bounding box of an empty cell set");
    return *acc;
}

// ---------------------------------------------------------------- multiflow

CombinatorialMultiflow::CombinatorialMultiflow(Grid grid, double h_tau, double lambda, double bound,
                                               std::vector<std::vector<std::size_t>> adjacency)
    : grid_(std::move(grid)), h_tau_(h_tau), lambda_(lambda), bound_(bound) {
    if (adjacency.size() != grid_.cell_count()) throw std::invalid_argument("adjacency size does not match the grid");
    offsets_.reserve(adjacency.size() + 1);
    offsets_.push_back(0);
    for (auto& row : adjacency) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        for (const auto t : row) {
            if (t >= grid_.cell_count()) throw std::invalid_argument("adjacency target outside the grid");
            targets_.push_back(t);
        }
        offsets_.push_back(targets_.size());
    }
}

std::span<const std::size_t> CombinatorialMultiflow::successors(std::size_t cell) const {
    return std::span<const std::size_t>(targets_).subspan(offsets_[cell], offsets_[cell + 1] - offsets_[cell]);
}

CellSet CombinatorialMultiflow::image_of(std::size_t cell) const {
    CellSet s(cell_count());
    for (const auto t : successors(cell)) s.insert(t);
    return s;
}

double reach_bound(const FilippovFamily& fam, double lambda, const Box& window, double h_tau) {
    double m = bound(fam, window, Interval(lambda));
    for (int it = 0; it < 2; ++it) m = std::max(m, bound(fam, inflate(window, m * h_tau), Interval(lambda)));
    return m;
}

CombinatorialMultiflow build_outer_approx(const FilippovFamily& fam, double lambda, const Grid& grid, double h_tau,
                                          const BuildOptions& options) {
    if (grid.cell_count() == 0) throw std::invalid_argument("degenerate grid");
    if (!(h_tau >= 0.0) || !std::isfinite(h_tau)) throw std::invalid_argument("h_tau must be a nonnegative finite number");
    const std::size_t n = grid.cell_count();
    std::vector<std::vector<std::size_t>> adjacency(n);
    if (h_tau == 0.0) {
        for (std::size_t c = 0; c < n; ++c) adjacency[c] = {c};
        return CombinatorialMultiflow(grid, 0.0, lambda, 0.0, std::move(adjacency));
    }

    const double m = reach_bound(fam, lambda, grid.window(), h_tau);
    const std::size_t splits = options.splits == 0 ? default_splits(grid.dims()) : options.splits;
    const std::vector<double>& slack = grid.widths();

    for (std::size_t c = 0; c < n; ++c) {
        const Box cell = grid.cell_box(c);
        // A priori reach box: solutions from the cell stay in B over [0, h_tau]
        // whenever cell + [0, h_tau] V(B) lies strictly inside B. Candidates
        // grow from the cell by epsilon inflation, then by doubling radii.
        std::optional<Box> reach;
        Box b = inflate(cell, 1e-12);
        for (int attempt = 0; attempt < 16 && !reach; ++attempt) {
            const Box swept = sweep(cell, h_tau, enclose(fam, b, lambda, splits));
            if (strictly_inside(swept, b)) {
                reach = swept;
                break;
            }
            std::vector<double> widen(swept.dims());
            for (std::size_t i = 0; i < widen.size(); ++i) widen[i] = 0.1 * swept[i].width() + 1e-12;
            b = inflate(hull(b, swept), widen);
        }
        for (double radius = m * h_tau * 1.0625 + 1e-12; !reach && radius < 1e6 * (m * h_tau + 1.0); radius *= 2.0) {
            const Box candidate = inflate(cell, radius);
            const Box swept = sweep(cell, h_tau, enclose(fam, candidate, lambda, splits));
            if (strictly_inside(swept, candidate)) reach = swept;
        }
        if (!reach) {
            adjacency[c] = CellSet::full(n).indices();
            continue;
        }
        Box v = enclose(fam, *reach, lambda, splits);
        for (int it = 0; it < options.picard_iterations; ++it) {
            Box tighter;
            if (!intersect(sweep(cell, h_tau, v), *reach, tighter)) break;
            reach = tighter;
            v = enclose(fam, *reach, lambda, splits);
        }
        const Box endpoint = inflate(translate(cell, Interval(h_tau), v), slack);
        for_each_meeting(grid, endpoint, [&](std::size_t t) { adjacency[c].push_back(t); });
    }
    return CombinatorialMultiflow(grid, h_tau, lambda, m, std::move(adjacency));
}

double auto_h_tau(const FilippovFamily& fam, double lambda, const Grid& grid) {
    const std::size_t n = grid.dims();
    // Drift floor: along some axis, every cell's velocity keeps one strict sign.
    double best = 0.0;
    std::size_t best_axis = 0;
    for (std::size_t axis = 0; axis < n; ++axis) {
        double floor_pos = std::numeric_limits<double>::infinity();
        double floor_neg = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            const Interval v = eval_box(fam, grid.cell_box(c), lambda).box()[axis];
            floor_pos = std::min(floor_pos, v.lo() > 0.0 ? v.lo() : 0.0);
            floor_neg = std::min(floor_neg, v.hi() < 0.0 ? -v.hi() : 0.0);
        }
        const double floor = std::max(floor_pos, floor_neg);
        if (floor > best) {
            best = floor;
            best_axis = axis;
        }
    }
    if (best > 0.0) return 4.0 * grid.width(best_axis) / best;

    const double m = std::max(bound(fam, grid.window(), Interval(lambda)), 1e-9);
    double extent = std::numeric_limits<double>::infinity();
    double w_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        extent = std::min(extent, grid.window()[i].width());
        w_max = std::max(w_max, grid.width(i));
    }
    return std::max(10.0 * w_max, 0.15 * extent) / m;
}

CellSet image(const CombinatorialMultiflow& mf, const CellSet& a, std::size_t steps) {
    CellSet current = a;
    for (std::size_t s = 0; s < steps; ++s) {
        CellSet next(mf.cell_count());
        current.for_each([&](std::size_t c) {
            for (const auto t : mf.successors(c)) next.insert(t);
        });
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

DualMultiflow transpose(const CombinatorialMultiflow& mf) {
    std::vector<std::vector<std::size_t>> adjacency(mf.cell_count());
    for (std::size_t c = 0; c < mf.cell_count(); ++c)
        for (const auto t : mf.successors(c)) adjacency[t].push_back(c);
    return DualMultiflow(mf.grid(), mf.h_tau(), mf.lambda(), mf.bound(), std::move(adjacency));
}

MonoidReport check_monoid(const CombinatorialMultiflow& mf, const FilippovFamily& fam, std::size_t samples,
                          std::uint64_t seed) {
    MonoidReport report;
    const Grid& grid = mf.grid();
    const auto identity = build_outer_approx(fam, mf.lambda(), grid, 0.0);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const auto s = identity.successors(c);
        if (s.size() != 1 || s[0] != c) ++report.identity_violations;
    }
    if (mf.h_tau() == 0.0) return report;

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_cell(0, grid.cell_count() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::vector<SelectionStrategy> selections = {SelectionStrategy::extremal_min(), SelectionStrategy::extremal_max(),
                                                       SelectionStrategy::sliding(), SelectionStrategy::zero_if_available(),
                                                       SelectionStrategy::seeded_random(seed)};
    constexpr std::size_t kSubsteps = 40;
    const double dt = 2.0 * mf.h_tau() / static_cast<double>(kSubsteps);
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t c = pick_cell(rng);
        const Box cell = grid.cell_box(c);
        Point x(grid.dims());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::lerp(cell[i].lo(), cell[i].hi(), unit(rng));
        const Point start = x;
        SelectionStrategy sel = selections[s % selections.size()];
        sel.seed = seed + s;
        bool inside = true;
        for (std::size_t k = 0; k < kSubsteps && inside; ++k) {
            const Point v = select_velocity(fam, x, mf.lambda(), sel, k);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += dt * v[i];
            inside = grid.window().contains(x);
        }
        if (!inside) continue;
        ++report.samples;
        CellSet from(grid.cell_count());
        from.insert(c);
        const std::size_t end_cell = grid.cell_of(x);
        if (!image(mf, from, 2).contains(end_cell)) {
            ++report.containment_violations;
            report.violations.push_back({c, start, x, end_cell});
        }
    }
    return report;
}

void write_edge_list(const CombinatorialMultiflow& mf, std::ostream& out) {
    out << "# window=" << to_string(mf.grid().window()) << " subdivisions=";
    for (std::size_t i = 0; i < mf.grid().dims(); ++i) out << (i ? "x" : "") << mf.grid().subdivisions()[i];
    out << " h_tau=" << format_number(mf.h_tau()) << " lambda=" << format_number(mf.lambda())
        << " M=" << format_number(mf.bound()) << '\n';
    for (std::size_t c = 0; c < mf.cell_count(); ++c)
        for (const auto t : mf.successors(c)) out << c << ' ' << t << '\n';
}

}  // namespace filippov
