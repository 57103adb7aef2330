#pragma once

// Selection-based Euler stepping for differential inclusions.
//
// Each step picks a velocity v_k from the enclosure of F(x_k, lambda) and
// sets x_{k+1} = x_k + h v_k. The piecewise-linear interpolant is then a
// delta-solution with delta = M h, where M bounds |F| over the window.

#include "filippov/field.hpp"
#include "filippov/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace filippov {

enum class SelectionKind { ExtremalMin, ExtremalMax, ZeroIfAvailable, Sliding, SeededRandom };

struct SelectionStrategy {
    SelectionKind kind = SelectionKind::ExtremalMin;
    std::uint64_t seed = 0;  // used by SeededRandom only

    static SelectionStrategy extremal_min() { return {SelectionKind::ExtremalMin, 0}; }
    static SelectionStrategy extremal_max() { return {SelectionKind::ExtremalMax, 0}; }
    static SelectionStrategy zero_if_available() { return {SelectionKind::ZeroIfAvailable, 0}; }
    static SelectionStrategy sliding() { return {SelectionKind::Sliding, 0}; }
    static SelectionStrategy seeded_random(std::uint64_t seed) { return {SelectionKind::SeededRandom, seed}; }
};

/// Parses min, max, zero, sliding or random (case sensitive).
SelectionStrategy parse_selection(std::string_view name, std::uint64_t seed = 0);
std::string to_string(SelectionKind kind);

struct Trajectory {
    double lambda = 0.0;
    double h = 0.0;
    std::vector<double> times;
    std::vector<Point> points;
    std::vector<Point> velocities;  // v_k selected at points[k]
    double delta_cert = 0.0;
    double bound = 0.0;             // M used for delta_cert
    bool exited = false;            // left the window
    std::optional<std::size_t> exit_step;

    std::size_t size() const { return points.size(); }
    const Point& final_point() const { return points.back(); }
    /// Piecewise-linear interpolant; t is clamped to the recorded time span.
    Point at(double t) const;
};

/// Velocity chosen from the enclosure of F(x, lambda).
Point select_velocity(const FilippovFamily& fam, std::span<const double> x, double lambda,
                      const SelectionStrategy& sel, std::uint64_t step);

/// Throws std::invalid_argument for x0 outside the window or nonpositive h or T.
Trajectory integrate(const FilippovFamily& fam, std::span<const double> x0, double lambda, double T, double h,
                     const SelectionStrategy& sel, const Box& window);

/// True iff |x_i - x_j| <= (M + delta_cert) |t_i - t_j| for every pair of grid points.
bool lipschitz_check(const Trajectory& traj, double M);

struct ConvergenceRow {
    double h = 0.0;
    std::optional<double> distance_to_previous;  // sup over the coarser grid times
    std::optional<double> distance_ratio;        // this distance over the previous one
    std::optional<double> endpoint_error;        // against the closed form, when given
    std::optional<double> error_ratio;
};

using ClosedForm = std::function<Point(double)>;

std::vector<ConvergenceRow> convergence_study(const FilippovFamily& fam, std::span<const double> x0, double lambda,
                                              double T, const std::vector<double>& h_schedule,
                                              const SelectionStrategy& sel, const Box& window,
                                              const ClosedForm& exact = {});

/// CSV with header t,x1..xn,v1..vn,lambda,delta_cert.
void write_csv(const Trajectory& traj, std::ostream& out);

}  // namespace filippov
