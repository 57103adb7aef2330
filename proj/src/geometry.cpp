#include "filippov/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace filippov {

namespace rounding {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude fma/two-sum residuals can underflow; widen unconditionally.
constexpr double kTiny = 0x1p-960;

double down(double v) { return std::nextafter(v, -kInf); }
double up(double v) { return std::nextafter(v, kInf); }

// Exact error of s = a + b (Knuth two-sum).
double two_sum_err(double a, double b, double s) {
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

}  // namespace

double add_down(double a, double b) {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return two_sum_err(a, b, s) < 0.0 ? down(s) : s;
}

double add_up(double a, double b) {
    const double s = a + b;
    if (!std::isfinite(s)) return s;
    return two_sum_err(a, b, s) > 0.0 ? up(s) : s;
}

double sub_down(double a, double b) { return add_down(a, -b); }
double sub_up(double a, double b) { return add_up(a, -b); }

double mul_down(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    if (std::fabs(p) < kTiny) return down(p);
    return std::fma(a, b, -p) < 0.0 ? down(p) : p;
}

double mul_up(double a, double b) {
    if (a == 0.0 || b == 0.0) return 0.0;
    const double p = a * b;
    if (!std::isfinite(p)) return p;
    if (std::fabs(p) < kTiny) return up(p);
    return std::fma(a, b, -p) > 0.0 ? up(p) : p;
}

namespace {

// Sign of (a/b - q) for the rounded quotient q.
int quotient_residual_sign(double a, double b, double q) {
    const double r = std::fma(-q, b, a);
    if (r == 0.0) return 0;
    return ((r > 0.0) == (b > 0.0)) ? 1 : -1;
}

}  // namespace

double div_down(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (!std::isfinite(q) || std::isinf(b)) return q == 0.0 ? down(q) : q;
    if (std::fabs(q) < kTiny) return down(q);
    return quotient_residual_sign(a, b, q) < 0 ? down(q) : q;
}

double div_up(double a, double b) {
    if (a == 0.0) return 0.0;
    const double q = a / b;
    if (!std::isfinite(q) || std::isinf(b)) return q == 0.0 ? up(q) : q;
    if (std::fabs(q) < kTiny) return up(q);
    return quotient_residual_sign(a, b, q) > 0 ? up(q) : q;
}

double sqrt_down(double a) {
    const double s = std::sqrt(a);
    if (!std::isfinite(s) || s == 0.0) return s;
    return std::fma(-s, s, a) < 0.0 ? down(s) : s;
}

double sqrt_up(double a) {
    const double s = std::sqrt(a);
    if (!std::isfinite(s) || s == 0.0) return s;
    return std::fma(-s, s, a) > 0.0 ? up(s) : s;
}

double widen_down(double v, int ulps) {
    if (std::isinf(v)) return v;
    for (int i = 0; i < ulps; ++i) v = down(v);
    return v;
}

double widen_up(double v, int ulps) {
    if (std::isinf(v)) return v;
    for (int i = 0; i < ulps; ++i) v = up(v);
    return v;
}

}  // namespace rounding

using namespace rounding;

// ---------------------------------------------------------------------------
// Interval

Interval::Interval(double point) : Interval(point, point) {}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
        throw std::invalid_argument("Interval: require lo <= hi, got [" + format_number(lo) + ", " +
                                    format_number(hi) + "]");
    }
}

Interval Interval::entire() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
}

double Interval::width() const { return sub_up(hi_, lo_); }
double Interval::midpoint() const {
    if (std::isinf(lo_) || std::isinf(hi_)) return std::isinf(lo_) && std::isinf(hi_) ? 0.0 : (std::isinf(lo_) ? hi_ : lo_);
    return lo_ + 0.5 * (hi_ - lo_);
}
double Interval::magnitude() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }
double Interval::mignitude() const {
    if (lo_ <= 0.0 && hi_ >= 0.0) return 0.0;
    return std::min(std::fabs(lo_), std::fabs(hi_));
}
bool Interval::is_finite() const { return std::isfinite(lo_) && std::isfinite(hi_); }

Interval operator+(const Interval& a, const Interval& b) {
    return {add_down(a.lo(), b.lo()), add_up(a.hi(), b.hi())};
}

Interval operator-(const Interval& a, const Interval& b) {
    return {sub_down(a.lo(), b.hi()), sub_up(a.hi(), b.lo())};
}

Interval operator-(const Interval& a) { return {-a.hi(), -a.lo()}; }

Interval operator*(const Interval& a, const Interval& b) {
    const double l1 = mul_down(a.lo(), b.lo()), l2 = mul_down(a.lo(), b.hi());
    const double l3 = mul_down(a.hi(), b.lo()), l4 = mul_down(a.hi(), b.hi());
    const double u1 = mul_up(a.lo(), b.lo()), u2 = mul_up(a.lo(), b.hi());
    const double u3 = mul_up(a.hi(), b.lo()), u4 = mul_up(a.hi(), b.hi());
    return {std::min({l1, l2, l3, l4}), std::max({u1, u2, u3, u4})};
}

Interval operator/(const Interval& a, const Interval& b) {
    if (b.contains(0.0)) return Interval::entire();
    const double l1 = div_down(a.lo(), b.lo()), l2 = div_down(a.lo(), b.hi());
    const double l3 = div_down(a.hi(), b.lo()), l4 = div_down(a.hi(), b.hi());
    const double u1 = div_up(a.lo(), b.lo()), u2 = div_up(a.lo(), b.hi());
    const double u3 = div_up(a.hi(), b.lo()), u4 = div_up(a.hi(), b.hi());
    return {std::min({l1, l2, l3, l4}), std::max({u1, u2, u3, u4})};
}

Interval hull(const Interval& a, const Interval& b) {
    return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

bool intersect(const Interval& a, const Interval& b, Interval& out) {
    const double lo = std::max(a.lo(), b.lo());
    const double hi = std::min(a.hi(), b.hi());
    if (lo > hi) return false;
    out = Interval(lo, hi);
    return true;
}

namespace {

double pow_nonneg_down(double a, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r = mul_down(r, a);
    return r;
}

double pow_nonneg_up(double a, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r = mul_up(r, a);
    return r;
}

// True when some offset + k*period (k integer) may lie in [lo, hi].
// Errs toward true.
bool hits_periodic_point(double lo, double hi, double offset, double period) {
    const double k = std::ceil((lo - offset) / period - 1e-9);
    const double p = offset + k * period;
    return p <= hi + 1e-9 * std::max(1.0, std::fabs(hi));
}

}  // namespace

Interval pow(const Interval& x, int exponent) {
    if (exponent == 0) return Interval(1.0);
    if (exponent < 0) return Interval(1.0) / pow(x, -exponent);
    if (exponent % 2 == 1) {
        const double lo = x.lo() >= 0.0 ? pow_nonneg_down(x.lo(), exponent)
                                         : -pow_nonneg_up(-x.lo(), exponent);
        const double hi = x.hi() >= 0.0 ? pow_nonneg_up(x.hi(), exponent)
                                         : -pow_nonneg_down(-x.hi(), exponent);
        return {lo, hi};
    }
    return {pow_nonneg_down(x.mignitude(), exponent), pow_nonneg_up(x.magnitude(), exponent)};
}

Interval sqrt(const Interval& x) {
    if (x.hi() < 0.0) throw std::domain_error("sqrt of a negative interval " + to_string(x));
    const double lo = std::max(0.0, x.lo());
    return {sqrt_down(lo), sqrt_up(x.hi())};
}

Interval exp(const Interval& x) {
    return {std::max(0.0, widen_down(std::exp(x.lo()))), widen_up(std::exp(x.hi()))};
}

Interval tanh(const Interval& x) {
    return {std::max(-1.0, widen_down(std::tanh(x.lo()))), std::min(1.0, widen_up(std::tanh(x.hi())))};
}

Interval cos(const Interval& x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (!x.is_finite() || x.hi() - x.lo() >= two_pi) return {-1.0, 1.0};
    const double a = std::cos(x.lo()), b = std::cos(x.hi());
    double lo = std::max(-1.0, widen_down(std::min(a, b)));
    double hi = std::min(1.0, widen_up(std::max(a, b)));
    if (hits_periodic_point(x.lo(), x.hi(), 0.0, two_pi)) hi = 1.0;
    if (hits_periodic_point(x.lo(), x.hi(), std::numbers::pi, two_pi)) lo = -1.0;
    return {lo, hi};
}

Interval sin(const Interval& x) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (!x.is_finite() || x.hi() - x.lo() >= two_pi) return {-1.0, 1.0};
    const double a = std::sin(x.lo()), b = std::sin(x.hi());
    double lo = std::max(-1.0, widen_down(std::min(a, b)));
    double hi = std::min(1.0, widen_up(std::max(a, b)));
    if (hits_periodic_point(x.lo(), x.hi(), 0.5 * std::numbers::pi, two_pi)) hi = 1.0;
    if (hits_periodic_point(x.lo(), x.hi(), -0.5 * std::numbers::pi, two_pi)) lo = -1.0;
    return {lo, hi};
}

Interval abs(const Interval& x) {
    if (x.lo() >= 0.0) return x;
    if (x.hi() <= 0.0) return -x;
    return {0.0, std::max(-x.lo(), x.hi())};
}

Interval min(const Interval& a, const Interval& b) {
    return {std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}

Interval max(const Interval& a, const Interval& b) {
    return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

double mollifier(double u) {
    if (!(std::fabs(u) < 1.0)) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

Interval mollifier(const Interval& u) {
    // Even, increasing on (-1, 0], decreasing on [0, 1); max e^{-1} at 0.
    // Point evaluation chains four roundings plus libm, so widen generously.
    constexpr int ulps = 8;
    const double a = mollifier(u.lo()), b = mollifier(u.hi());
    const double top = u.contains(0.0) ? mollifier(0.0) : std::max(a, b);
    const double bottom = std::min(a, b);
    return {std::max(0.0, widen_down(bottom, ulps)), widen_up(top, ulps)};
}

// ---------------------------------------------------------------------------
// Box

Box::Box(std::vector<Interval> axes) : axes_(std::move(axes)) {}
Box::Box(std::initializer_list<Interval> axes) : axes_(axes) {}

Box Box::from_point(std::span<const double> p) {
    std::vector<Interval> axes;
    axes.reserve(p.size());
    for (double v : p) axes.emplace_back(v);
    return Box(std::move(axes));
}

double Box::volume() const {
    double v = 1.0;
    for (const auto& a : axes_) v *= a.hi() - a.lo();
    return v;
}

Point Box::center() const {
    Point c(axes_.size());
    for (std::size_t i = 0; i < axes_.size(); ++i) c[i] = axes_[i].midpoint();
    return c;
}

bool Box::contains(std::span<const double> p) const {
    if (p.size() != axes_.size()) throw std::invalid_argument("Box::contains: dimension mismatch");
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (!axes_[i].contains(p[i])) return false;
    }
    return true;
}

double Box::sup_norm() const {
    double m = 0.0;
    for (const auto& a : axes_) m = std::max(m, a.magnitude());
    return m;
}

ValueEnclosure::ValueEnclosure(Box box) : box_(std::move(box)), dims_(box_.dims()), empty_(false) {}

ValueEnclosure ValueEnclosure::empty(std::size_t dims) {
    ValueEnclosure v;
    v.dims_ = dims;
    return v;
}

const Box& ValueEnclosure::box() const {
    if (empty_) throw std::logic_error("ValueEnclosure::box on an empty enclosure");
    return box_;
}

namespace {

void require_same_dims(const Box& a, const Box& b, const char* what) {
    if (a.dims() != b.dims()) {
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" + std::to_string(a.dims()) +
                                    " vs " + std::to_string(b.dims()) + ")");
    }
}

void require_nonneg(double eps) {
    if (!(eps >= 0.0)) throw std::invalid_argument("inflate: eps must be nonnegative, got " + format_number(eps));
}

}  // namespace

Box inflate(const Box& b, double eps) {
    require_nonneg(eps);
    std::vector<Interval> axes;
    axes.reserve(b.dims());
    for (const auto& a : b.axes()) axes.emplace_back(sub_down(a.lo(), eps), add_up(a.hi(), eps));
    return Box(std::move(axes));
}

Box inflate(const Box& b, std::span<const double> eps) {
    if (eps.size() != b.dims()) throw std::invalid_argument("inflate: per-axis eps has wrong length");
    std::vector<Interval> axes;
    axes.reserve(b.dims());
    for (std::size_t i = 0; i < b.dims(); ++i) {
        require_nonneg(eps[i]);
        axes.emplace_back(sub_down(b[i].lo(), eps[i]), add_up(b[i].hi(), eps[i]));
    }
    return Box(std::move(axes));
}

ValueEnclosure inflate(const ValueEnclosure& v, double eps) {
    require_nonneg(eps);
    if (v.is_empty()) return v;
    return ValueEnclosure(inflate(v.box(), eps));
}

ValueEnclosure hull(std::span<const ValueEnclosure> values) {
    std::optional<Box> acc;
    std::size_t dims = 0;
    for (const auto& v : values) {
        if (dims == 0) dims = v.dims();
        if (v.dims() != dims) throw std::invalid_argument("hull: dimension mismatch");
        if (v.is_empty()) continue;
        acc = acc ? hull(*acc, v.box()) : v.box();
    }
    if (!acc) return ValueEnclosure::empty(dims);
    return ValueEnclosure(std::move(*acc));
}

Box hull(const Box& a, const Box& b) {
    require_same_dims(a, b, "hull");
    std::vector<Interval> axes;
    axes.reserve(a.dims());
    for (std::size_t i = 0; i < a.dims(); ++i) axes.push_back(hull(a[i], b[i]));
    return Box(std::move(axes));
}

bool intersect(const Box& a, const Box& b, Box& out) {
    require_same_dims(a, b, "intersect");
    std::vector<Interval> axes(a.dims());
    for (std::size_t i = 0; i < a.dims(); ++i) {
        if (!intersect(a[i], b[i], axes[i])) return false;
    }
    out = Box(std::move(axes));
    return true;
}

bool contains(const Box& outer, const Box& inner) {
    require_same_dims(outer, inner, "contains");
    for (std::size_t i = 0; i < outer.dims(); ++i) {
        if (!outer[i].contains(inner[i])) return false;
    }
    return true;
}

bool contains(const ValueEnclosure& outer, const ValueEnclosure& inner) {
    if (inner.is_empty()) return true;
    if (outer.is_empty()) return false;
    return contains(outer.box(), inner.box());
}

double distance(const Box& outer, const Box& inner) {
    require_same_dims(outer, inner, "distance");
    double d = 0.0;
    for (std::size_t i = 0; i < outer.dims(); ++i) {
        d = std::max({d, sub_up(outer[i].lo(), inner[i].lo()), sub_up(inner[i].hi(), outer[i].hi())});
    }
    return d;
}

double distance(const ValueEnclosure& outer, const ValueEnclosure& inner) {
    if (inner.is_empty()) return 0.0;
    if (outer.is_empty()) return std::numeric_limits<double>::infinity();
    return distance(outer.box(), inner.box());
}

double gap(const Box& a, const Box& b) {
    require_same_dims(a, b, "gap");
    double d = 0.0;
    for (std::size_t i = 0; i < a.dims(); ++i) {
        d = std::max({d, a[i].lo() - b[i].hi(), b[i].lo() - a[i].hi()});
    }
    return d;
}

Box translate(const Box& b, const Interval& times, const Box& velocity) {
    require_same_dims(b, velocity, "translate");
    std::vector<Interval> axes;
    axes.reserve(b.dims());
    for (std::size_t i = 0; i < b.dims(); ++i) axes.push_back(b[i] + times * velocity[i]);
    return Box(std::move(axes));
}

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string to_string(const Interval& i) {
    return "[" + format_number(i.lo()) + ", " + format_number(i.hi()) + "]";
}

std::string to_string(const Box& b) {
    std::string s;
    for (std::size_t i = 0; i < b.dims(); ++i) {
        if (i) s += " x ";
        s += to_string(b[i]);
    }
    return s;
}

}  // namespace filippov
