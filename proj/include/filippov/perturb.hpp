#pragma once

// Robustness of isolation under lambda-perturbation, the containment of
// perturbed values in the eps-inflated unperturbed field, and the check that
// perturbed trajectories are eps-solutions of the unperturbed inclusion.

#include "filippov/conley.hpp"
#include "filippov/field.hpp"
#include "filippov/solver.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace filippov {

struct SweepOptions {
    std::size_t subdivisions = 512;  // per axis on the first attempt
    double h_tau = 0.0;              // 0 picks auto_h_tau per lambda
    std::size_t budget = 3;          // refinement rounds after an Inconclusive verdict
};

struct SweepEntry {
    double lambda = 0.0;
    IsolationReport report;
    std::size_t refinements = 0;
};

struct RobustnessReport {
    std::vector<SweepEntry> entries;  // in the order the samples were given
    /// Largest sampled |lambda| such that every sample with |lambda| at most
    /// this radius is Isolating; 0 when lambda = 0 is missing or fails.
    double eps_star = 0.0;
    bool zero_isolating = false;
    /// N reaches the window boundary, so verdicts describe the clipped flow.
    bool window_clipped = false;

    const SweepEntry* at_lambda(double lambda) const;
};

/// Cells of the grid lying inside the closed box.
CellSet cells_inside(const Grid& grid, const Box& b);

/// Builds the multiflow for every sampled lambda and checks N for isolation,
/// doubling the subdivisions and halving h_tau on each Inconclusive round.
RobustnessReport isolation_sweep(const FilippovFamily& fam, const Box& window, const Box& n_box,
                                 std::span<const double> lambdas, const SweepOptions& options = {});

/// Header lambda,verdict,inv_cell_count,min_boundary_distance,grid_cells,h_tau.
void write_sweep_csv(const RobustnessReport& report, std::ostream& out);
/// Key-value summary: eps_star, zero_isolating, window_clipped, samples, isolating.
void write_sweep_summary(const RobustnessReport& report, std::ostream& out);

struct PertappxWitness {
    Point x;
    double lambda = 0.0;
    Box value;       // F(x, lambda)
    Box target;      // F_eps(x, 0)
    double separation = 0.0;
};

struct PertappxResult {
    /// Largest probed |lambda| such that every probe with |lambda| up to it
    /// passes at every sample; 0 when the smallest probe already fails.
    double delta = 0.0;
    std::optional<PertappxWitness> witness;  // at the smallest failing |lambda|
    std::size_t checks = 0;
};

/// Checks F(x, lambda) inside F_eps(x, 0) over the sampled points and lambdas.
/// Throws std::invalid_argument for eps <= 0.
PertappxResult check_pertappx(const FilippovFamily& fam, double eps, std::span<const double> lam_probe,
                              std::span<const Point> x_samples);

/// 1-2-5 steps from 1e-4 up to the top of the declared range, mirrored when it
/// extends below zero.
std::vector<double> default_lambda_probes(const Interval& lambda_range);
/// n evenly spaced points per axis over the box (n >= 2).
std::vector<Point> lattice(const Box& b, std::size_t n);

/// Index of the first step whose velocity lies outside F_eps(x_k, 0).
std::optional<std::size_t> first_eps_violation(const Trajectory& traj, const FilippovFamily& fam, double eps);
/// True iff every selected velocity lies in F_eps(x_k, 0). Throws for eps <= 0.
bool verify_eps_solution(const Trajectory& traj, const FilippovFamily& fam, double eps);

}  // namespace filippov
