#include "filippov/perturb.hpp"

#include "filippov/multiflow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace filippov {

namespace {

void require_positive_eps(double eps, const char* who) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw std::invalid_argument(std::string(who) + ": eps must be positive, got " + format_number(eps));
}

bool clipped(const Box& window, const Box& n) {
    for (std::size_t i = 0; i < window.dims(); ++i)
        if (n[i].lo() <= window[i].lo() || n[i].hi() >= window[i].hi()) return true;
    return false;
}

}  // namespace

const SweepEntry* RobustnessReport::at_lambda(double lambda) const {
    for (const auto& e : entries)
        if (e.lambda == lambda) return &e;
    return nullptr;
}

CellSet cells_inside(const Grid& grid, const Box& b) {
    CellSet inside(grid.cell_count());
    const Box loose = inflate(b, 1e-12 * (1.0 + b.sup_norm()));
    cells_meeting(grid, b).for_each([&](std::size_t c) {
        if (contains(loose, grid.cell_box(c))) inside.insert(c);
    });
    return inside;
}

RobustnessReport isolation_sweep(const FilippovFamily& fam, const Box& window, const Box& n_box,
                                 std::span<const double> lambdas, const SweepOptions& options) {
    if (n_box.dims() != window.dims()) throw std::invalid_argument("isolation_sweep: N and window differ in dimension");
    if (options.subdivisions == 0) throw std::invalid_argument("isolation_sweep: subdivisions must be positive");

    RobustnessReport report;
    report.window_clipped = clipped(window, n_box);
    for (const double lam : lambdas) {
        std::size_t k = options.subdivisions;
        Grid grid(window, std::vector<std::size_t>(window.dims(), k));
        double h = options.h_tau > 0.0 ? options.h_tau : auto_h_tau(fam, lam, grid);
        SweepEntry entry;
        entry.lambda = lam;
        for (std::size_t round = 0;; ++round) {
            const auto mf = build_outer_approx(fam, lam, grid, h);
            entry.report = check_isolation(mf, cells_inside(grid, n_box));
            entry.refinements = round;
            if (entry.report.verdict == Verdict::Isolating || round >= options.budget) break;
            k *= 2;
            h *= 0.5;
            grid = Grid(window, std::vector<std::size_t>(window.dims(), k));
        }
        report.entries.push_back(std::move(entry));
    }

    const SweepEntry* zero = report.at_lambda(0.0);
    report.zero_isolating = zero != nullptr && zero->report.verdict == Verdict::Isolating;
    if (report.zero_isolating) {
        std::vector<std::pair<double, bool>> by_radius;
        for (const auto& e : report.entries)
            by_radius.emplace_back(std::abs(e.lambda), e.report.verdict == Verdict::Isolating);
        std::sort(by_radius.begin(), by_radius.end());
        for (std::size_t i = 0; i < by_radius.size(); ++i) {
            // Every sample at this radius must certify, including its mirror.
            if (!by_radius[i].second) break;
            if (i + 1 < by_radius.size() && by_radius[i + 1].first == by_radius[i].first) continue;
            report.eps_star = by_radius[i].first;
        }
    }
    return report;
}

void write_sweep_csv(const RobustnessReport& report, std::ostream& out) {
    out << "lambda,verdict,inv_cell_count,min_boundary_distance,grid_cells,h_tau\n";
    for (const auto& e : report.entries) {
        const auto& r = e.report;
        out << format_number(e.lambda) << ',' << to_string(r.verdict) << ',' << r.invariant.count() << ','
            << format_number(r.min_boundary_distance) << ',' << r.grid.cell_count() << ',' << format_number(r.h_tau)
            << '\n';
    }
}

void write_sweep_summary(const RobustnessReport& report, std::ostream& out) {
    std::size_t isolating = 0;
    for (const auto& e : report.entries) isolating += e.report.verdict == Verdict::Isolating ? 1 : 0;
    out << "eps_star=" << format_number(report.eps_star) << '\n';
    out << "zero_isolating=" << (report.zero_isolating ? "true" : "false") << '\n';
    out << "window_clipped=" << (report.window_clipped ? "true" : "false") << '\n';
    out << "samples=" << report.entries.size() << '\n';
    out << "isolating=" << isolating << '\n';
}

PertappxResult check_pertappx(const FilippovFamily& fam, double eps, std::span<const double> lam_probe,
                              std::span<const Point> x_samples) {
    require_positive_eps(eps, "check_pertappx");
    std::vector<double> probes(lam_probe.begin(), lam_probe.end());
    std::stable_sort(probes.begin(), probes.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });

    std::vector<Box> targets;
    targets.reserve(x_samples.size());
    for (const auto& x : x_samples) targets.push_back(delta_inflate(fam, x, 0.0, eps).box());

    PertappxResult result;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const double lam = probes[p];
        for (std::size_t i = 0; i < x_samples.size(); ++i) {
            ++result.checks;
            const Box value = eval_value(fam, x_samples[i], lam).box();
            if (contains(targets[i], value)) continue;
            result.witness = PertappxWitness{x_samples[i], lam, value, targets[i], distance(targets[i], value)};
            return result;
        }
        // A radius counts once both of its signs have passed.
        if (p + 1 == probes.size() || std::abs(probes[p + 1]) != std::abs(lam)) result.delta = std::abs(lam);
    }
    return result;
}

std::vector<double> default_lambda_probes(const Interval& lambda_range) {
    std::vector<double> positive;
    const double top = std::max(std::abs(lambda_range.lo()), lambda_range.hi());
    for (double decade = 1e-4; decade <= top * (1.0 + 1e-12); decade *= 10.0) {
        for (const double m : {1.0, 2.0, 5.0}) {
            const double v = m * decade;
            if (v <= top * (1.0 + 1e-12)) positive.push_back(v);
        }
    }
    std::vector<double> probes;
    for (const double v : positive) {
        if (v <= lambda_range.hi()) probes.push_back(v);
        if (-v >= lambda_range.lo()) probes.push_back(-v);
    }
    return probes;
}

std::vector<Point> lattice(const Box& b, std::size_t n) {
    if (n < 2) throw std::invalid_argument("lattice: need at least 2 points per axis");
    std::size_t total = 1;
    for (std::size_t i = 0; i < b.dims(); ++i) total *= n;
    std::vector<Point> points;
    points.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        Point p(b.dims());
        std::size_t rest = k;
        for (std::size_t i = b.dims(); i-- > 0;) {
            const double t = static_cast<double>(rest % n) / static_cast<double>(n - 1);
            rest /= n;
            p[i] = std::lerp(b[i].lo(), b[i].hi(), t);
        }
        points.push_back(std::move(p));
    }
    return points;
}

std::optional<std::size_t> first_eps_violation(const Trajectory& traj, const FilippovFamily& fam, double eps) {
    require_positive_eps(eps, "verify_eps_solution");
    for (std::size_t k = 0; k < traj.velocities.size(); ++k) {
        const Box target = delta_inflate(fam, traj.points[k], 0.0, eps).box();
        if (!contains(target, Box::from_point(traj.velocities[k]))) return k;
    }
    return std::nullopt;
}

bool verify_eps_solution(const Trajectory& traj, const FilippovFamily& fam, double eps) {
    return !first_eps_violation(traj, fam, eps).has_value();
}

}  // namespace filippov
