#pragma once

// Piecewise vector fields and their Filippov convexification.
//
// A PiecewiseSpec lists switching functions h_j and pieces guarded by sign
// conditions on them. The convexified value at x is the box hull of every
// piece whose closed guard region contains x; away from switching sets that
// is the single active piece. A guard "h_j = 0" marks a piece that only
// contributes on the switching set, which is how extra vertices such as the
// tau of a set-valued limit are declared.

#include "filippov/expr.hpp"
#include "filippov/geometry.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace filippov {

enum class GuardSign { Positive, Negative, Zero };

struct Guard {
    std::size_t switch_index = 0;
    GuardSign sign = GuardSign::Positive;

    friend bool operator==(const Guard&, const Guard&) = default;
};

struct Piece {
    std::vector<Guard> guards;      // conjunction; empty means "everywhere"
    std::vector<Expr> components;   // one per state dimension

    friend bool operator==(const Piece&, const Piece&) = default;
};

struct PiecewiseSpec {
    std::size_t dims = 0;
    std::vector<Expr> switches;
    std::vector<Piece> pieces;
    Interval lambda_range{0.0, 0.0};

    /// Structural checks: component counts, variable indices, guard indices.
    /// Throws std::invalid_argument.
    void validate() const;

    friend bool operator==(const PiecewiseSpec&, const PiecewiseSpec&) = default;
};

struct PieceValue {
    std::size_t piece = 0;
    Point velocity;
};

/// The convexified set-valued map F(x, lambda).
///
/// An optional explicit lambda = 0 member replaces the regular pieces at
/// lambda == 0 exactly. It is never inferred as a pointwise limit.
class FilippovFamily {
public:
    FilippovFamily(PiecewiseSpec regular, std::optional<PiecewiseSpec> zero_member);

    std::size_t dims() const { return regular_.dims; }
    const Interval& lambda_range() const { return regular_.lambda_range; }
    bool has_zero_member() const { return zero_member_.has_value(); }
    const PiecewiseSpec& regular() const { return regular_; }
    const std::optional<PiecewiseSpec>& zero_member() const { return zero_member_; }

    /// The piecewise definition in force at this lambda.
    const PiecewiseSpec& regime(double lambda) const;

    /// Point values of every piece contributing at (x, lambda).
    std::vector<PieceValue> active_values(std::span<const double> x, double lambda) const;

    /// Index of the first switching function with |h(x)| <= kSwitchTie.
    std::optional<std::size_t> near_switch(std::span<const double> x, double lambda) const;
    double switch_value(std::size_t j, std::span<const double> x, double lambda) const;

    ValueEnclosure value(std::span<const double> x, double lambda) const;
    ValueEnclosure value_over(const Box& b, const Interval& lambda) const;

    /// The field with every component negated (time reversal).
    FilippovFamily reversed() const;

private:
    void check_point(std::span<const double> x, double lambda) const;

    PiecewiseSpec regular_;
    std::optional<PiecewiseSpec> zero_member_;
};

FilippovFamily convexify(PiecewiseSpec spec);
FilippovFamily convexify(PiecewiseSpec regular, PiecewiseSpec zero_member);

/// Enclosure of F(x, lambda). Throws std::domain_error outside the declared domain.
ValueEnclosure eval_value(const FilippovFamily& fam, std::span<const double> x, double lambda);
/// Enclosure of F(y, lambda) for every y in b.
ValueEnclosure eval_box(const FilippovFamily& fam, const Box& b, double lambda);
ValueEnclosure eval_box(const FilippovFamily& fam, const Box& b, const Interval& lambda);

/// F_delta(x) = B_delta(co(F(B_delta(x)))) with box hulls.
ValueEnclosure delta_inflate(const FilippovFamily& fam, std::span<const double> x, double lambda, double delta);

/// Upper bound on the sup-norm of F over window x lam_range.
double bound(const FilippovFamily& fam, const Box& window, const Interval& lam_range);

struct SearchParams {
    Box window;
    std::size_t base_budget = 41;     // lattice points over the window
    std::size_t probe_budget = 1089;  // probes per radius over state x lambda offsets
    std::vector<double> radii = {0.1, 0.03, 0.01, 0.003, 0.001, 3e-4, 1e-4};
};

/// A probe whose value escapes the eps-inflated base value at every radius tried.
struct USCWitness {
    Point base;
    double base_lambda = 0.0;
    Point probe;
    double probe_lambda = 0.0;
    double eps = 0.0;
    double radius = 0.0;       // smallest radius at which the probe was found
    double separation = 0.0;   // distance(inflate(F(base), eps), F(probe))
};

/// Searches for a violation of upper-semicontinuity at lambda0.
/// Finding nothing does not prove the family is USC.
std::optional<USCWitness> usc_falsify(const FilippovFamily& fam, double lam0, double eps,
                                      const SearchParams& search);

}  // namespace filippov
