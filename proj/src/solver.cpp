#include "filippov/solver.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace filippov {

namespace {

constexpr double kGradientStep = 1e-6;

Point clamp_into(Point v, const Box& b) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], b[i].lo(), b[i].hi());
    return v;
}

Point gradient(const FilippovFamily& fam, std::size_t j, std::span<const double> x, double lambda) {
    Point g(x.size());
    Point probe(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = probe[i];
        probe[i] = xi + kGradientStep;
        const double up = fam.switch_value(j, probe, lambda);
        probe[i] = xi - kGradientStep;
        const double down = fam.switch_value(j, probe, lambda);
        probe[i] = xi;
        g[i] = (up - down) / (2.0 * kGradientStep);
    }
    return g;
}

double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Point mean_of(const std::vector<PieceValue>& values, std::size_t dims) {
    Point v(dims, 0.0);
    for (const auto& pv : values)
        for (std::size_t i = 0; i < dims; ++i) v[i] += pv.velocity[i];
    for (auto& c : v) c /= static_cast<double>(values.size());
    return v;
}

Point sliding_velocity(const FilippovFamily& fam, std::span<const double> x, double lambda, const Box& enc) {
    const auto values = fam.active_values(x, lambda);
    const std::size_t n = x.size();
    if (values.size() == 1) return values.front().velocity;
    const auto sw = fam.near_switch(x, lambda);
    if (!sw) return mean_of(values, n);
    const Point grad = gradient(fam, *sw, x, lambda);
    std::size_t lo = 0, hi = 0;
    std::vector<double> d(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        d[k] = dot(grad, values[k].velocity);
        if (d[k] < d[lo]) lo = k;
        if (d[k] > d[hi]) hi = k;
    }
    if (!(d[lo] <= 0.0 && d[hi] >= 0.0) || d[hi] == d[lo]) return mean_of(values, n);
    const double alpha = std::clamp(-d[lo] / (d[hi] - d[lo]), 0.0, 1.0);
    Point v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = alpha * values[hi].velocity[i] + (1.0 - alpha) * values[lo].velocity[i];
    return clamp_into(std::move(v), enc);
}

Point random_velocity(const FilippovFamily& fam, std::span<const double> x, double lambda, const Box& enc,
                      std::uint64_t seed, std::uint64_t step) {
    const auto values = fam.active_values(x, lambda);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32)};
    std::mt19937_64 rng(seq);
    std::exponential_distribution<double> weight(1.0);
    std::vector<double> w(values.size());
    double total = 0.0;
    for (auto& wk : w) total += (wk = weight(rng));
    Point v(x.size(), 0.0);
    for (std::size_t k = 0; k < values.size(); ++k)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[k] / total * values[k].velocity[i];
    return clamp_into(std::move(v), enc);
}

}  // namespace

SelectionStrategy parse_selection(std::string_view name, std::uint64_t seed) {
    if (name == "min") return SelectionStrategy::extremal_min();
    if (name == "max") return SelectionStrategy::extremal_max();
    if (name == "zero") return SelectionStrategy::zero_if_available();
    if (name == "sliding") return SelectionStrategy::sliding();
    if (name == "random") return SelectionStrategy::seeded_random(seed);
    throw std::invalid_argument("unknown selection '" + std::string(name) + "' (expected min, max, zero, sliding or random)");
}

std::string to_string(SelectionKind kind) {
    switch (kind) {
        case SelectionKind::ExtremalMin: return "min";
        case SelectionKind::ExtremalMax: return "max";
        case SelectionKind::ZeroIfAvailable: return "zero";
        case SelectionKind::Sliding: return "sliding";
        case SelectionKind::SeededRandom: return "random";
    }
    return "unknown";
}

Point Trajectory::at(double t) const {
    if (points.empty()) throw std::logic_error("empty trajectory");
    if (t <= times.front()) return points.front();
    if (t >= times.back()) return points.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    const double s = t - times[k];
    Point x = points[k];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += s * velocities[k][i];
    return x;
}

Point select_velocity(const FilippovFamily& fam, std::span<const double> x, double lambda,
                      const SelectionStrategy& sel, std::uint64_t step) {
    const Box enc = eval_value(fam, x, lambda).box();
    Point v(x.size());
    switch (sel.kind) {
        case SelectionKind::ExtremalMin:
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = enc[i].lo();
            return v;
        case SelectionKind::ExtremalMax:
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = enc[i].hi();
            return v;
        case SelectionKind::ZeroIfAvailable:
            return clamp_into(Point(x.size(), 0.0), enc);
        case SelectionKind::Sliding:
            return sliding_velocity(fam, x, lambda, enc);
        case SelectionKind::SeededRandom:
            return random_velocity(fam, x, lambda, enc, sel.seed, step);
    }
    throw std::logic_error("unhandled selection");
}

Trajectory integrate(const FilippovFamily& fam, std::span<const double> x0, double lambda, double T, double h,
                     const SelectionStrategy& sel, const Box& window) {
    if (!(h > 0.0) || !(T > 0.0)) throw std::invalid_argument("step and horizon must be positive");
    if (h > T) throw std::invalid_argument("step exceeds the horizon");
    if (x0.size() != window.dims()) throw std::invalid_argument("initial point has the wrong dimension");
    if (!window.contains(x0)) throw std::invalid_argument("initial point lies outside the window");

    Trajectory traj;
    traj.lambda = lambda;
    traj.h = h;
    traj.bound = bound(fam, window, Interval(lambda));
    traj.delta_cert = traj.bound * h;

    const auto steps = static_cast<std::size_t>(std::ceil(T / h - 1e-9));
    traj.times.reserve(steps + 1);
    traj.points.reserve(steps + 1);
    traj.velocities.reserve(steps + 1);

    Point x(x0.begin(), x0.end());
    for (std::size_t k = 0;; ++k) {
        Point v = select_velocity(fam, x, lambda, sel, k);
        traj.times.push_back(static_cast<double>(k) * h);
        traj.points.push_back(x);
        traj.velocities.push_back(v);
        if (k == steps) break;
        Point next(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] + h * v[i];
        if (!window.contains(next)) {
            traj.exited = true;
            traj.exit_step = k;
            break;
        }
        x = std::move(next);
    }
    return traj;
}

bool lipschitz_check(const Trajectory& traj, double M) {
    const double rate = M + traj.delta_cert;
    constexpr double kSlack = 1e-12;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        for (std::size_t j = i + 1; j < traj.size(); ++j) {
            double d = 0.0;
            for (std::size_t a = 0; a < traj.points[i].size(); ++a)
                d = std::max(d, std::fabs(traj.points[i][a] - traj.points[j][a]));
            const double dt = std::fabs(traj.times[j] - traj.times[i]);
            if (d > rate * dt + kSlack * (1.0 + d)) return false;
        }
    }
    return true;
}

std::vector<ConvergenceRow> convergence_study(const FilippovFamily& fam, std::span<const double> x0, double lambda,
                                              double T, const std::vector<double>& h_schedule,
                                              const SelectionStrategy& sel, const Box& window,
                                              const ClosedForm& exact) {
    for (std::size_t k = 1; k < h_schedule.size(); ++k)
        if (!(h_schedule[k] < h_schedule[k - 1])) throw std::invalid_argument("step schedule must be strictly decreasing");

    std::vector<ConvergenceRow> rows;
    std::optional<Trajectory> previous;
    for (const double h : h_schedule) {
        Trajectory traj = integrate(fam, x0, lambda, T, h, sel, window);
        ConvergenceRow row;
        row.h = h;
        if (previous) {
            double d = 0.0;
            for (std::size_t k = 0; k < previous->size(); ++k) {
                const Point fine = traj.at(previous->times[k]);
                for (std::size_t i = 0; i < fine.size(); ++i)
                    d = std::max(d, std::fabs(fine[i] - previous->points[k][i]));
            }
            row.distance_to_previous = d;
            if (!rows.empty() && rows.back().distance_to_previous && *rows.back().distance_to_previous > 0.0)
                row.distance_ratio = d / *rows.back().distance_to_previous;
        }
        if (exact) {
            const Point ref = exact(traj.times.back());
            double e = 0.0;
            for (std::size_t i = 0; i < ref.size(); ++i) e = std::max(e, std::fabs(ref[i] - traj.final_point()[i]));
            row.endpoint_error = e;
            if (!rows.empty() && rows.back().endpoint_error && *rows.back().endpoint_error > 0.0)
                row.error_ratio = e / *rows.back().endpoint_error;
        }
        rows.push_back(row);
        previous = std::move(traj);
    }
    return rows;
}

void write_csv(const Trajectory& traj, std::ostream& out) {
    const std::size_t n = traj.points.empty() ? 0 : traj.points.front().size();
    out << "t";
    for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
    for (std::size_t i = 1; i <= n; ++i) out << ",v" << i;
    out << ",lambda,delta_cert\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
        out << format_number(traj.times[k]);
        for (const double c : traj.points[k]) out << ',' << format_number(c);
        for (const double c : traj.velocities[k]) out << ',' << format_number(c);
        out << ',' << format_number(traj.lambda) << ',' << format_number(traj.delta_cert) << '\n';
    }
}

}  // namespace filippov
