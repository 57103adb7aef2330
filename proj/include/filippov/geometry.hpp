#pragma once

// Interval and box arithmetic for set-valued enclosures.
//
// Every operation that can round rounds outward: lower bounds move toward
// -inf and upper bounds toward +inf. Exact results (e.g. 1 - 0.5) stay exact,
// so inflating by zero is the identity.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace filippov {

using Point = std::vector<double>;

/// Relative tie tolerance used for "value is on a switching set" decisions.
inline constexpr double kSwitchTie = 1e-12;

namespace rounding {

double add_down(double a, double b);
double add_up(double a, double b);
double sub_down(double a, double b);
double sub_up(double a, double b);
double mul_down(double a, double b);
double mul_up(double a, double b);
double div_down(double a, double b);
double div_up(double a, double b);
double sqrt_down(double a);
double sqrt_up(double a);

// libm transcendental results are widened by this many ulps.
inline constexpr int kLibmUlps = 2;
double widen_down(double v, int ulps = kLibmUlps);
double widen_up(double v, int ulps = kLibmUlps);

}  // namespace rounding

/// Closed interval [lo, hi]; a degenerate interval is a point.
class Interval {
public:
    constexpr Interval() = default;
    explicit Interval(double point);
    Interval(double lo, double hi);

    static Interval entire();

    double lo() const { return lo_; }
    double hi() const { return hi_; }

    double width() const;
    double midpoint() const;
    double magnitude() const;  // max |v| over the interval
    double mignitude() const;  // min |v| over the interval

    bool contains(double v) const { return lo_ <= v && v <= hi_; }
    bool contains(const Interval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }
    bool is_point() const { return lo_ == hi_; }
    bool is_finite() const;

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

Interval hull(const Interval& a, const Interval& b);
/// Intersection; returns false when disjoint.
bool intersect(const Interval& a, const Interval& b, Interval& out);

Interval pow(const Interval& x, int exponent);
Interval sqrt(const Interval& x);
Interval exp(const Interval& x);
Interval tanh(const Interval& x);
Interval sin(const Interval& x);
Interval cos(const Interval& x);
Interval abs(const Interval& x);
Interval min(const Interval& a, const Interval& b);
Interval max(const Interval& a, const Interval& b);

/// exp(-1/(1-u^2)) for |u| < 1 and 0 otherwise.
double mollifier(double u);
Interval mollifier(const Interval& u);

/// Axis-aligned box; a point is a degenerate box.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<Interval> axes);
    Box(std::initializer_list<Interval> axes);

    static Box from_point(std::span<const double> p);

    std::size_t dims() const { return axes_.size(); }
    const Interval& operator[](std::size_t i) const { return axes_[i]; }
    Interval& operator[](std::size_t i) { return axes_[i]; }
    const std::vector<Interval>& axes() const { return axes_; }

    double volume() const;
    Point center() const;
    bool contains(std::span<const double> p) const;
    /// Sup-norm of the box's farthest point from the origin.
    double sup_norm() const;

    friend bool operator==(const Box&, const Box&) = default;

private:
    std::vector<Interval> axes_;
};

/// Box enclosure of a convex set value; empty only for images clipped away.
class ValueEnclosure {
public:
    ValueEnclosure() = default;
    explicit ValueEnclosure(Box box);

    static ValueEnclosure empty(std::size_t dims);

    bool is_empty() const { return empty_; }
    std::size_t dims() const { return dims_; }
    /// Throws std::logic_error when empty.
    const Box& box() const;

    friend bool operator==(const ValueEnclosure&, const ValueEnclosure&) = default;

private:
    Box box_;
    std::size_t dims_ = 0;
    bool empty_ = true;
};

/// Widens every axis by eps on both sides. Rejects negative eps.
Box inflate(const Box& b, double eps);
/// Widens axis i by eps[i] on both sides.
Box inflate(const Box& b, std::span<const double> eps);
ValueEnclosure inflate(const ValueEnclosure& v, double eps);

ValueEnclosure hull(std::span<const ValueEnclosure> values);
Box hull(const Box& a, const Box& b);
bool intersect(const Box& a, const Box& b, Box& out);

/// Axis-wise containment of inner in outer.
bool contains(const Box& outer, const Box& inner);
bool contains(const ValueEnclosure& outer, const ValueEnclosure& inner);

/// Smallest eps such that inner is contained in inflate(outer, eps).
double distance(const Box& outer, const Box& inner);
double distance(const ValueEnclosure& outer, const ValueEnclosure& inner);

/// Chebyshev gap between two boxes (0 when they touch or overlap).
double gap(const Box& a, const Box& b);

/// a + t * v for every a in box, t in times, v in velocity box.
Box translate(const Box& b, const Interval& times, const Box& velocity);

std::string to_string(const Interval& i);
std::string to_string(const Box& b);
/// Shortest-round-trip-safe decimal with 17 significant digits.
std::string format_number(double v);

}  // namespace filippov
