#pragma once

// Combinatorial invariant sets, isolation verdicts and omega-limit sets on a
// combinatorial multiflow.

#include "filippov/multiflow.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>

namespace filippov {

enum class Verdict { Isolating, Inconclusive };

std::string to_string(Verdict v);

struct IsolationReport {
    Verdict verdict = Verdict::Inconclusive;
    CellSet neighborhood;
    CellSet invariant;
    CellSet boundary;
    /// Gap between the invariant cells and the boundary cells; infinite when
    /// the invariant part is empty.
    double min_boundary_distance = 0.0;
    Grid grid;
    double h_tau = 0.0;
    double lambda = 0.0;
};

/// Greatest S in N whose cells all have a successor and a predecessor in S.
CellSet invariant_part(const CombinatorialMultiflow& mf, const CellSet& n);
/// The same pruning run for at most `rounds` synchronous passes; more rounds never grow the result.
CellSet invariant_part_rounds(const CombinatorialMultiflow& mf, const CellSet& n, std::size_t rounds);

/// Cells of N that touch a cell outside N or the window boundary.
CellSet combinatorial_boundary(const Grid& grid, const CellSet& n);

IsolationReport check_isolation(const CombinatorialMultiflow& mf, const CellSet& n);

/// Union of the eventual cycle of S_{k+1} = image(S_k) from S_0 = A.
CellSet omega_limit(const CombinatorialMultiflow& mf, const CellSet& a);

/// Key-value report followed by nothing; cells go to write_cells.
void write_report(const IsolationReport& report, std::ostream& out);
/// Sorted cell indices, one per line.
void write_cells(const CellSet& cells, std::ostream& out);

}  // namespace filippov
