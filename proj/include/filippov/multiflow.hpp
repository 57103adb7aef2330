#pragma once

// Cubical grids over a compact window and the combinatorial outer
// approximation of the time-h_tau solution map of a differential inclusion.

#include "filippov/field.hpp"
#include "filippov/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace filippov {

/// Uniform grid of closed cells tiling a window; cells are indexed row-major
/// with the last axis varying fastest.
class Grid {
public:
    Grid() = default;
    /// Throws std::invalid_argument for zero subdivisions or a degenerate window.
    Grid(Box window, std::vector<std::size_t> subdivisions);

    const Box& window() const { return window_; }
    std::size_t dims() const { return window_.dims(); }
    const std::vector<std::size_t>& subdivisions() const { return subdivisions_; }
    std::size_t cell_count() const { return count_; }
    double width(std::size_t axis) const { return widths_[axis]; }
    const std::vector<double>& widths() const { return widths_; }

    std::vector<std::size_t> coords(std::size_t cell) const;
    std::size_t index(std::span<const std::size_t> coords) const;
    Box cell_box(std::size_t cell) const;
    /// Cell containing p (ties go to the higher cell except on the upper face).
    std::size_t cell_of(std::span<const double> p) const;
    bool touches_boundary(std::size_t cell) const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Box window_;
    std::vector<std::size_t> subdivisions_;
    std::vector<double> widths_;
    std::size_t count_ = 0;
};

/// Dense bit set over the cells of a grid.
class CellSet {
public:
    CellSet() = default;
    explicit CellSet(std::size_t universe);
    static CellSet full(std::size_t universe);

    std::size_t universe() const { return universe_; }
    bool contains(std::size_t cell) const;
    void insert(std::size_t cell);
    void erase(std::size_t cell);
    std::size_t count() const;
    bool empty() const;
    std::vector<std::size_t> indices() const;
    bool subset_of(const CellSet& other) const;
    bool intersects(const CellSet& other) const;
    std::size_t hash() const;

    CellSet& operator|=(const CellSet& other);
    CellSet& operator&=(const CellSet& other);
    friend CellSet operator|(CellSet a, const CellSet& b) { return a |= b; }
    friend CellSet operator&(CellSet a, const CellSet& b) { return a &= b; }
    friend bool operator==(const CellSet&, const CellSet&) = default;

    template <typename F>
    void for_each(F&& f) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits != 0) {
                const int b = __builtin_ctzll(bits);
                f(w * 64 + static_cast<std::size_t>(b));
                bits &= bits - 1;
            }
        }
    }

private:
    std::size_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Cells of the grid meeting a closed box (empty when the box misses the window).
CellSet cells_meeting(const Grid& grid, const Box& b);
/// Union of the boxes of a cell set; throws std::invalid_argument when empty.
Box bounding_box(const Grid& grid, const CellSet& cells);

/// Multivalued cell map in compressed sparse row form.
class CombinatorialMultiflow {
public:
    CombinatorialMultiflow() = default;
    CombinatorialMultiflow(Grid grid, double h_tau, double lambda, double bound,
                           std::vector<std::vector<std::size_t>> adjacency);

    const Grid& grid() const { return grid_; }
    double h_tau() const { return h_tau_; }
    double lambda() const { return lambda_; }
    double bound() const { return bound_; }
    std::size_t cell_count() const { return grid_.cell_count(); }
    std::size_t edge_count() const { return targets_.size(); }

    /// Sorted image cells of one cell.
    std::span<const std::size_t> successors(std::size_t cell) const;
    CellSet image_of(std::size_t cell) const;

    friend bool operator==(const CombinatorialMultiflow&, const CombinatorialMultiflow&) = default;

private:
    Grid grid_;
    double h_tau_ = 0.0;
    double lambda_ = 0.0;
    double bound_ = 0.0;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> targets_;
};

/// The transposed map: b is in dual(a) iff a is in primal(b).
using DualMultiflow = CombinatorialMultiflow;

struct BuildOptions {
    int picard_iterations = 2;  // tightening passes after the a priori reach box is validated
    std::size_t splits = 0;     // sub-boxes per axis when enclosing V; 0 picks by dimension
};

/// M from the two-iteration fixpoint M <- bound(F, inflate(window, M h_tau)).
double reach_bound(const FilippovFamily& fam, double lambda, const Box& window, double h_tau);

/// Throws std::invalid_argument for a negative h_tau or a grid without cells.
CombinatorialMultiflow build_outer_approx(const FilippovFamily& fam, double lambda, const Grid& grid, double h_tau,
                                          const BuildOptions& options = {});

/// Default horizon: 4 cell widths over the drift floor when every cell moves
/// with one strict sign along some axis, otherwise max(10 w, 0.15 extent) / M.
double auto_h_tau(const FilippovFamily& fam, double lambda, const Grid& grid);

CellSet image(const CombinatorialMultiflow& mf, const CellSet& a, std::size_t steps = 1);
DualMultiflow transpose(const CombinatorialMultiflow& mf);

struct MonoidViolation {
    std::size_t cell = 0;
    Point start;
    Point end;
    std::size_t end_cell = 0;
};

struct MonoidReport {
    std::size_t identity_violations = 0;
    std::size_t samples = 0;
    std::size_t containment_violations = 0;
    std::vector<MonoidViolation> violations;

    bool ok() const { return identity_violations == 0 && containment_violations == 0; }
};

/// (a) the h_tau = 0 map on the same grid is the identity; (b) endpoints of
/// sampled trajectories over 2 h_tau lie in image(mf, cell, 2).
MonoidReport check_monoid(const CombinatorialMultiflow& mf, const FilippovFamily& fam, std::size_t samples,
                          std::uint64_t seed = 1);

/// Edge list: one metadata header line, then "src dst" per edge.
void write_edge_list(const CombinatorialMultiflow& mf, std::ostream& out);

}  // namespace filippov
