#include "filippov/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace filippov {

namespace {

bool can_hold(const Interval& h, GuardSign sign) {
    switch (sign) {
        case GuardSign::Positive: return h.hi() >= -kSwitchTie;
        case GuardSign::Negative: return h.lo() <= kSwitchTie;
        case GuardSign::Zero: return h.hi() >= -kSwitchTie && h.lo() <= kSwitchTie;
    }
    return true;
}

bool holds_everywhere(const Interval& h, GuardSign sign) {
    switch (sign) {
        case GuardSign::Positive: return h.lo() > kSwitchTie;
        case GuardSign::Negative: return h.hi() < -kSwitchTie;
        case GuardSign::Zero: return false;
    }
    return false;
}

bool point_holds(double h, GuardSign sign) {
    switch (sign) {
        case GuardSign::Positive: return h >= -kSwitchTie;
        case GuardSign::Negative: return h <= kSwitchTie;
        case GuardSign::Zero: return std::fabs(h) <= kSwitchTie;
    }
    return true;
}

constexpr int kShaveIterations = 30;

// Shrinks b along every axis to the part where the guard can hold.
// Cut-off slabs are certified infeasible by interval evaluation, so the
// result still contains every point of b satisfying the guard.
bool shave(Box& b, const Expr& h, GuardSign sign, const Interval& lambda) {
    if (!can_hold(h.eval(b, lambda), sign)) return false;
    for (std::size_t axis = 0; axis < b.dims(); ++axis) {
        const Interval full = b[axis];
        if (full.is_point()) continue;
        auto feasible = [&](double lo, double hi) {
            Box probe = b;
            probe[axis] = Interval(lo, hi);
            return can_hold(h.eval(probe, lambda), sign);
        };
        // Left edge: [lo, a] stays infeasible; right edge: [c, hi] stays infeasible.
        double a = full.lo(), c = full.hi();
        for (int it = 0; it < kShaveIterations; ++it) {
            const double mid = a + 0.5 * (c - a);
            if (feasible(full.lo(), mid)) c = mid; else a = mid;
        }
        const double cut_lo = a;
        a = cut_lo;
        c = full.hi();
        for (int it = 0; it < kShaveIterations; ++it) {
            const double mid = a + 0.5 * (c - a);
            if (feasible(mid, full.hi())) a = mid; else c = mid;
        }
        const double cut_hi = c;
        if (cut_lo > cut_hi) return false;
        b[axis] = Interval(cut_lo, cut_hi);
    }
    return true;
}

ValueEnclosure spec_over_box(const PiecewiseSpec& spec, const Box& b, const Interval& lambda) {
    std::optional<Box> acc;
    for (const auto& piece : spec.pieces) {
        Box region = b;
        bool active = true;
        for (const auto& g : piece.guards) {
            const Expr& h = spec.switches[g.switch_index];
            const Interval hv = h.eval(region, lambda);
            if (!can_hold(hv, g.sign)) {
                active = false;
                break;
            }
            if (!holds_everywhere(hv, g.sign) && !shave(region, h, g.sign, lambda)) {
                active = false;
                break;
            }
        }
        if (!active) continue;
        std::vector<Interval> axes;
        axes.reserve(spec.dims);
        for (const auto& c : piece.components) axes.push_back(c.eval(region, lambda));
        Box v(std::move(axes));
        acc = acc ? hull(*acc, v) : std::move(v);
    }
    if (!acc) throw std::domain_error("no piece is active on box " + to_string(b));
    return ValueEnclosure(std::move(*acc));
}

std::vector<PieceValue> spec_at_point(const PiecewiseSpec& spec, std::span<const double> x, double lambda) {
    std::vector<double> h(spec.switches.size());
    for (std::size_t j = 0; j < h.size(); ++j) {
        h[j] = spec.switches[j].eval(x, lambda);
        if (!std::isfinite(h[j])) throw std::domain_error("switching function " + std::to_string(j + 1) + " is not finite at this point");
    }
    std::vector<PieceValue> out;
    for (std::size_t p = 0; p < spec.pieces.size(); ++p) {
        const auto& piece = spec.pieces[p];
        const bool active = std::all_of(piece.guards.begin(), piece.guards.end(),
                                        [&](const Guard& g) { return point_holds(h[g.switch_index], g.sign); });
        if (!active) continue;
        PieceValue v{p, Point(spec.dims)};
        for (std::size_t i = 0; i < spec.dims; ++i) {
            v.velocity[i] = piece.components[i].eval(x, lambda);
            if (!std::isfinite(v.velocity[i])) {
                throw std::domain_error("piece " + std::to_string(p + 1) + " is not finite at this point (lambda = " +
                                        format_number(lambda) + ")");
            }
        }
        out.push_back(std::move(v));
    }
    if (out.empty()) throw std::domain_error("no piece is active at this point");
    return out;
}

PiecewiseSpec negate(const PiecewiseSpec& s) {
    PiecewiseSpec r = s;
    for (auto& piece : r.pieces) {
        for (auto& c : piece.components) c = Expr::unary(Expr::Op::Neg, c);
    }
    return r;
}

}  // namespace

void PiecewiseSpec::validate() const {
    if (dims == 0) throw std::invalid_argument("dims must be positive");
    if (pieces.empty()) throw std::invalid_argument("at least one piece is required");
    for (std::size_t j = 0; j < switches.size(); ++j) {
        if (switches[j].state_arity() > dims) {
            throw std::invalid_argument("switching function " + std::to_string(j + 1) + " uses a state variable beyond dims");
        }
    }
    for (std::size_t p = 0; p < pieces.size(); ++p) {
        const auto& piece = pieces[p];
        const std::string where = "piece " + std::to_string(p + 1);
        if (piece.components.size() != dims) {
            throw std::invalid_argument(where + " has " + std::to_string(piece.components.size()) +
                                        " components, expected " + std::to_string(dims));
        }
        for (const auto& c : piece.components) {
            if (c.state_arity() > dims) throw std::invalid_argument(where + " uses a state variable beyond dims");
        }
        for (const auto& g : piece.guards) {
            if (g.switch_index >= switches.size()) throw std::invalid_argument(where + " references an undeclared switching function");
        }
    }
}

FilippovFamily::FilippovFamily(PiecewiseSpec regular, std::optional<PiecewiseSpec> zero_member)
    : regular_(std::move(regular)), zero_member_(std::move(zero_member)) {
    regular_.validate();
    if (zero_member_) {
        zero_member_->validate();
        if (zero_member_->dims != regular_.dims) throw std::invalid_argument("lambda = 0 member has different dims");
        if (!regular_.lambda_range.contains(0.0)) throw std::invalid_argument("lambda = 0 member declared but 0 is outside lambda_range");
        zero_member_->lambda_range = regular_.lambda_range;
    }
}

const PiecewiseSpec& FilippovFamily::regime(double lambda) const {
    if (lambda == 0.0 && zero_member_) return *zero_member_;
    return regular_;
}

void FilippovFamily::check_point(std::span<const double> x, double lambda) const {
    if (x.size() != dims()) {
        throw std::invalid_argument("point has " + std::to_string(x.size()) + " coordinates, field has " + std::to_string(dims()));
    }
    if (!lambda_range().contains(lambda)) {
        throw std::domain_error("lambda = " + format_number(lambda) + " is outside " + to_string(lambda_range()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw std::domain_error("non-finite state coordinate");
    }
}

std::vector<PieceValue> FilippovFamily::active_values(std::span<const double> x, double lambda) const {
    check_point(x, lambda);
    return spec_at_point(regime(lambda), x, lambda);
}

std::optional<std::size_t> FilippovFamily::near_switch(std::span<const double> x, double lambda) const {
    const auto& spec = regime(lambda);
    for (std::size_t j = 0; j < spec.switches.size(); ++j) {
        if (std::fabs(spec.switches[j].eval(x, lambda)) <= kSwitchTie) return j;
    }
    return std::nullopt;
}

double FilippovFamily::switch_value(std::size_t j, std::span<const double> x, double lambda) const {
    return regime(lambda).switches.at(j).eval(x, lambda);
}

ValueEnclosure FilippovFamily::value(std::span<const double> x, double lambda) const {
    const auto values = active_values(x, lambda);
    std::vector<Interval> axes;
    axes.reserve(dims());
    for (std::size_t i = 0; i < dims(); ++i) {
        double lo = values.front().velocity[i], hi = lo;
        for (const auto& v : values) {
            lo = std::min(lo, v.velocity[i]);
            hi = std::max(hi, v.velocity[i]);
        }
        axes.emplace_back(lo, hi);
    }
    return ValueEnclosure(Box(std::move(axes)));
}

ValueEnclosure FilippovFamily::value_over(const Box& b, const Interval& lambda) const {
    if (b.dims() != dims()) throw std::invalid_argument("box dimension does not match the field");
    if (!lambda_range().contains(lambda)) {
        throw std::domain_error("lambda range " + to_string(lambda) + " is outside " + to_string(lambda_range()));
    }
    if (zero_member_ && lambda.contains(0.0)) {
        ValueEnclosure zero = spec_over_box(*zero_member_, b, Interval(0.0));
        if (lambda.is_point()) return zero;
        const ValueEnclosure parts[] = {zero, spec_over_box(regular_, b, lambda)};
        return hull(parts);
    }
    return spec_over_box(regular_, b, lambda);
}

FilippovFamily FilippovFamily::reversed() const {
    std::optional<PiecewiseSpec> zero;
    if (zero_member_) zero = negate(*zero_member_);
    return FilippovFamily(negate(regular_), std::move(zero));
}

FilippovFamily convexify(PiecewiseSpec spec) { return FilippovFamily(std::move(spec), std::nullopt); }

FilippovFamily convexify(PiecewiseSpec regular, PiecewiseSpec zero_member) {
    return FilippovFamily(std::move(regular), std::move(zero_member));
}

ValueEnclosure eval_value(const FilippovFamily& fam, std::span<const double> x, double lambda) {
    return fam.value(x, lambda);
}

ValueEnclosure eval_box(const FilippovFamily& fam, const Box& b, double lambda) {
    return fam.value_over(b, Interval(lambda));
}

ValueEnclosure eval_box(const FilippovFamily& fam, const Box& b, const Interval& lambda) {
    return fam.value_over(b, lambda);
}

ValueEnclosure delta_inflate(const FilippovFamily& fam, std::span<const double> x, double lambda, double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("delta must be nonnegative");
    const Box ball = inflate(Box::from_point(x), delta);
    return inflate(eval_box(fam, ball, lambda), delta);
}

double bound(const FilippovFamily& fam, const Box& window, const Interval& lam_range) {
    const std::size_t n = window.dims();
    const auto per_axis = static_cast<std::size_t>(std::max(1.0, std::floor(std::pow(256.0, 1.0 / static_cast<double>(n)))));
    const std::size_t lam_parts = lam_range.is_point() ? 1 : 16;

    std::vector<Interval> lam_pieces;
    for (std::size_t k = 0; k < lam_parts; ++k) {
        const double a = k == 0 ? lam_range.lo() : lam_range.lo() + (lam_range.hi() - lam_range.lo()) * static_cast<double>(k) / static_cast<double>(lam_parts);
        const double b = k + 1 == lam_parts ? lam_range.hi() : lam_range.lo() + (lam_range.hi() - lam_range.lo()) * static_cast<double>(k + 1) / static_cast<double>(lam_parts);
        lam_pieces.emplace_back(a, b);
    }

    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= per_axis;

    double m = 0.0;
    std::vector<Interval> axes(n);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rest = flat;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = rest % per_axis;
            rest /= per_axis;
            const Interval& w = window[i];
            const double span = w.hi() - w.lo();
            const double a = k == 0 ? w.lo() : w.lo() + span * static_cast<double>(k) / static_cast<double>(per_axis);
            const double b = k + 1 == per_axis ? w.hi() : w.lo() + span * static_cast<double>(k + 1) / static_cast<double>(per_axis);
            axes[i] = Interval(a, b);
        }
        const Box cell(axes);
        for (const auto& lam : lam_pieces) {
            const auto v = eval_box(fam, cell, lam);
            m = std::max(m, v.box().sup_norm());
        }
    }
    if (!std::isfinite(m)) throw std::domain_error("field is unbounded on " + to_string(window));
    return m;
}

namespace {

std::size_t odd_count(double budget, double root) {
    auto k = static_cast<std::size_t>(std::llround(std::pow(std::max(budget, 1.0), 1.0 / root)));
    k = std::max<std::size_t>(k, 3);
    if (k % 2 == 0) ++k;
    return k;
}

// Symmetric lattice offsets in [-1, 1] with `count` (odd) points.
std::vector<double> unit_offsets(std::size_t count) {
    std::vector<double> out(count);
    const double half = static_cast<double>(count - 1) / 2.0;
    for (std::size_t k = 0; k < count; ++k) out[k] = (static_cast<double>(k) - half) / half;
    return out;
}

}  // namespace

std::optional<USCWitness> usc_falsify(const FilippovFamily& fam, double lam0, double eps, const SearchParams& search) {
    if (!(eps > 0.0)) throw std::invalid_argument("usc_falsify: eps must be positive");
    if (search.window.dims() != fam.dims()) throw std::invalid_argument("usc_falsify: window dimension mismatch");
    if (search.radii.empty()) throw std::invalid_argument("usc_falsify: empty radius schedule");
    const std::size_t n = fam.dims();
    const Interval& lam_range = fam.lambda_range();
    if (!lam_range.contains(lam0)) throw std::domain_error("usc_falsify: lambda0 outside the family's range");

    // Separations at or below this are rounding noise between point evaluations.
    constexpr double kNoise = 1e-9;

    const std::size_t bases_per_axis = odd_count(static_cast<double>(search.base_budget), static_cast<double>(n));
    const bool lam_free = !lam_range.is_point();
    const std::size_t probes_per_axis =
        odd_count(static_cast<double>(search.probe_budget), static_cast<double>(n + (lam_free ? 1 : 0)));
    const auto base_offsets = unit_offsets(bases_per_axis);
    const auto probe_offsets = unit_offsets(probes_per_axis);

    std::size_t base_total = 1, probe_state_total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        base_total *= bases_per_axis;
        probe_state_total *= probes_per_axis;
    }

    std::optional<USCWitness> best;
    Point base(n), probe(n);
    for (std::size_t bflat = 0; bflat < base_total; ++bflat) {
        std::size_t rest = bflat;
        for (std::size_t i = 0; i < n; ++i) {
            const Interval& w = search.window[i];
            const double t = 0.5 * (base_offsets[rest % bases_per_axis] + 1.0);
            rest /= bases_per_axis;
            base[i] = w.lo() + t * (w.hi() - w.lo());
        }
        const ValueEnclosure reach = inflate(eval_value(fam, base, lam0), eps);

        std::optional<USCWitness> local;
        for (double r : search.radii) {
            std::optional<USCWitness> at_radius;
            for (double lam_off : lam_free ? probe_offsets : std::vector<double>{0.0}) {
                const double lam = lam0 + r * lam_off;
                if (!lam_range.contains(lam)) continue;
                for (std::size_t pflat = 0; pflat < probe_state_total; ++pflat) {
                    std::size_t prest = pflat;
                    for (std::size_t i = 0; i < n; ++i) {
                        probe[i] = base[i] + r * probe_offsets[prest % probes_per_axis];
                        prest /= probes_per_axis;
                    }
                    const double sep = distance(reach, eval_value(fam, probe, lam));
                    if (sep > kNoise && (!at_radius || sep > at_radius->separation)) {
                        at_radius = USCWitness{base, lam0, probe, lam, eps, r, sep};
                    }
                }
            }
            if (!at_radius) {
                local.reset();
                break;
            }
            local = at_radius;
        }
        if (local && (!best || local->separation > best->separation)) best = local;
    }
    return best;
}

}  // namespace filippov
