#include "filippov/cli.hpp"

#include "filippov/conley.hpp"
#include "filippov/multiflow.hpp"
#include "filippov/perturb.hpp"
#include "filippov/solver.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace filippov {

namespace {

double parse_double(std::string_view text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
        throw std::invalid_argument("not a finite number: '" + std::string(text) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::size_t default_grid(const SystemSpec& spec) { return spec.dims == 1 ? 512 : 64; }

Grid make_grid(const RunConfig& cfg, const SystemSpec& spec) {
    return Grid(spec.window, std::vector<std::size_t>(spec.dims, cfg.grid.value_or(default_grid(spec))));
}

double first_lambda(const RunConfig& cfg, const SystemSpec& spec) {
    if (!cfg.lambdas.empty()) return cfg.lambdas.front();
    return spec.lambda_range.contains(0.0) ? 0.0 : spec.lambda_range.lo();
}

/// Twenty steps from 0 to the top of the range, mirrored below zero when declared.
std::vector<double> default_sweep(const Interval& range) {
    std::vector<double> lams;
    const double top = std::max(std::abs(range.lo()), std::abs(range.hi()));
    for (int k = 0; k <= 20; ++k) {
        const double v = top * k / 20.0;
        if (range.contains(v)) lams.push_back(v);
        if (k > 0 && range.contains(-v)) lams.push_back(-v);
    }
    if (lams.empty()) lams.push_back(range.lo());
    return lams;
}

Point default_x0(const SystemSpec& spec) {
    Point p(spec.dims);
    for (std::size_t i = 0; i < spec.dims; ++i) p[i] = spec.neighborhood[i].midpoint();
    return p;
}

std::string point_text(const Point& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + format_number(p[i]);
    return s;
}

/// Writes to out_dir/name when an output directory is set, otherwise to the stream.
template <typename F>
void emit(const RunConfig& cfg, const std::string& name, std::ostream& fallback, F&& write) {
    if (!cfg.out_dir) {
        write(fallback);
        return;
    }
    std::filesystem::create_directories(*cfg.out_dir);
    const auto path = *cfg.out_dir / name;
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path.string());
    write(file);
    if (!file) throw std::runtime_error("error writing " + path.string());
}

SystemSpec load(const RunConfig& cfg) {
    if (cfg.system.empty()) throw std::invalid_argument("no system given (positional name or --system)");
    auto spec = resolve_system(cfg.system);
    validate_config(cfg, spec);
    return spec;
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const SpecError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return 1;
}

}  // namespace

std::vector<double> parse_lambda_list(std::string_view text) {
    std::vector<double> values;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw std::invalid_argument("lambda range must be start:step:stop");
        const double a = parse_double(parts[0]), step = parse_double(parts[1]), b = parse_double(parts[2]);
        if (!(step > 0.0) || b < a) throw std::invalid_argument("lambda range needs step > 0 and start <= stop");
        const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
        for (long k = 0; k <= n; ++k) values.push_back(k == n && std::abs(a + k * step - b) < 1e-9 * step ? b : a + k * step);
        return values;
    }
    for (const auto part : split(text, ',')) values.push_back(parse_double(part));
    return values;
}

Point parse_point(std::string_view text) {
    Point p;
    for (const auto part : split(text, ',')) p.push_back(parse_double(part));
    return p;
}

void validate_config(const RunConfig& cfg, const SystemSpec& spec) {
    for (const double lam : cfg.lambdas)
        if (!spec.lambda_range.contains(lam))
            throw std::invalid_argument("lambda " + format_number(lam) + " outside the declared range " +
                                        to_string(spec.lambda_range));
    if (cfg.neighborhood) {
        if (cfg.neighborhood->dims() != spec.dims) throw std::invalid_argument("--nbox has the wrong dimension");
        if (!contains(spec.window, *cfg.neighborhood))
            throw std::invalid_argument("--nbox " + to_string(*cfg.neighborhood) + " leaves the window " +
                                        to_string(spec.window));
    }
    if (cfg.x0) {
        if (cfg.x0->size() != spec.dims) throw std::invalid_argument("--x0 has the wrong dimension");
        if (!spec.window.contains(*cfg.x0)) throw std::invalid_argument("--x0 lies outside the window");
    }
    if (cfg.grid && *cfg.grid == 0) throw std::invalid_argument("--grid must be positive");
    if (cfg.h_tau && !(*cfg.h_tau >= 0.0)) throw std::invalid_argument("--htau must be nonnegative");
    if (cfg.eps && !(*cfg.eps > 0.0)) throw std::invalid_argument("--eps must be positive");
    if (cfg.T && !(*cfg.T > 0.0)) throw std::invalid_argument("--T must be positive");
    if (cfg.step && !(*cfg.step > 0.0)) throw std::invalid_argument("--step must be positive");
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load(cfg);
        spec.regular.validate();
        if (spec.zero_member) spec.zero_member->validate();
        const auto fam = spec.family();
        const double eps = cfg.eps.value_or(0.1);
        std::vector<double> lams = cfg.lambdas;
        if (lams.empty()) {
            const Interval& r = spec.lambda_range;
            if (r.contains(0.0)) lams.push_back(0.0);
            for (int k = 0; k <= 4; ++k) {
                const double lam = std::lerp(r.lo(), r.hi(), k / 4.0);
                if (lam != 0.0 && (k == 0 || lam != lams.back())) lams.push_back(lam);
            }
        }

        std::optional<USCWitness> witness;
        for (const double lam0 : lams) {
            witness = usc_falsify(fam, lam0, eps, SearchParams{spec.window});
            if (witness) break;
        }
        emit(cfg, "validate.txt", out, [&](std::ostream& o) {
            o << "system=" << spec.name << '\n';
            o << "structure=ok\n";
            o << "eps=" << format_number(eps) << '\n';
            o << "lambda0=";
            for (std::size_t i = 0; i < lams.size(); ++i) o << (i ? "," : "") << format_number(lams[i]);
            o << '\n';
            if (!witness) {
                o << "witness=none\n";
                return;
            }
            o << "witness=found\n";
            o << "base=" << point_text(witness->base) << '\n';
            o << "base_lambda=" << format_number(witness->base_lambda) << '\n';
            o << "probe=" << point_text(witness->probe) << '\n';
            o << "probe_lambda=" << format_number(witness->probe_lambda) << '\n';
            o << "radius=" << format_number(witness->radius) << '\n';
            o << "separation=" << format_number(witness->separation) << '\n';
        });
        return witness ? 2 : 0;
    });
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load(cfg);
        const auto fam = spec.family();
        const Point x0 = cfg.x0.value_or(default_x0(spec));
        const auto sel = parse_selection(cfg.selection, cfg.seed);
        const auto traj =
            integrate(fam, x0, first_lambda(cfg, spec), cfg.T.value_or(1.0), cfg.step.value_or(0.01), sel, spec.window);
        emit(cfg, "trajectory.csv", out, [&](std::ostream& o) { write_csv(traj, o); });
        if (cfg.out_dir) {
            out << "steps=" << traj.size() - 1 << '\n';
            out << "final=" << point_text(traj.final_point()) << '\n';
            out << "exited=" << (traj.exited ? "true" : "false") << '\n';
            out << "delta_cert=" << format_number(traj.delta_cert) << '\n';
        }
        return 0;
    });
}

int cmd_isolate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load(cfg);
        const auto fam = spec.family();
        SweepOptions opts;
        opts.subdivisions = cfg.grid.value_or(default_grid(spec));
        opts.h_tau = cfg.h_tau.value_or(0.0);
        const std::vector<double> lams = {first_lambda(cfg, spec)};
        const auto sweep = isolation_sweep(fam, spec.window, cfg.neighborhood.value_or(spec.neighborhood), lams, opts);
        const auto& entry = sweep.entries.front();
        emit(cfg, "isolation_report.txt", out, [&](std::ostream& o) {
            o << "system=" << spec.name << '\n';
            write_report(entry.report, o);
            o << "refinements=" << entry.refinements << '\n';
            o << "window_clipped=" << (sweep.window_clipped ? "true" : "false") << '\n';
        });
        if (cfg.out_dir) {
            emit(cfg, "invariant_cells.txt", out, [&](std::ostream& o) { write_cells(entry.report.invariant, o); });
            emit(cfg, "boundary_cells.txt", out, [&](std::ostream& o) { write_cells(entry.report.boundary, o); });
            out << "verdict=" << to_string(entry.report.verdict) << '\n';
        }
        return 0;
    });
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load(cfg);
        const auto fam = spec.family();
        SweepOptions opts;
        opts.subdivisions = cfg.grid.value_or(default_grid(spec));
        opts.h_tau = cfg.h_tau.value_or(0.0);
        const auto lams = cfg.lambdas.empty() ? default_sweep(spec.lambda_range) : cfg.lambdas;
        const auto report = isolation_sweep(fam, spec.window, cfg.neighborhood.value_or(spec.neighborhood), lams, opts);
        if (cfg.out_dir) {
            emit(cfg, "sweep.csv", out, [&](std::ostream& o) { write_sweep_csv(report, o); });
            emit(cfg, "sweep_summary.txt", out, [&](std::ostream& o) { write_sweep_summary(report, o); });
            write_sweep_summary(report, out);
        } else {
            write_sweep_csv(report, out);
            std::ostringstream summary;
            write_sweep_summary(report, summary);
            std::istringstream lines(summary.str());
            for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
        }
        return 0;
    });
}

int cmd_omega(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load(cfg);
        const auto fam = spec.family();
        const Grid grid = make_grid(cfg, spec);
        const double lam = first_lambda(cfg, spec);
        const double h = cfg.h_tau.value_or(0.0) > 0.0 ? *cfg.h_tau : auto_h_tau(fam, lam, grid);
        const auto mf = build_outer_approx(fam, lam, grid, h);
        const Point x0 = cfg.x0.value_or(default_x0(spec));
        CellSet start(grid.cell_count());
        start.insert(grid.cell_of(x0));
        const auto omega = omega_limit(mf, start);
        const auto header = [&](std::ostream& o) {
            o << "system=" << spec.name << '\n';
            o << "lambda=" << format_number(lam) << '\n';
            o << "h_tau=" << format_number(h) << '\n';
            o << "x0=" << point_text(x0) << '\n';
            o << "start_cell=" << grid.cell_of(x0) << '\n';
            o << "omega_cell_count=" << omega.count() << '\n';
            if (!omega.empty()) o << "omega_bounding_box=" << to_string(bounding_box(grid, omega)) << '\n';
        };
        if (cfg.out_dir) {
            emit(cfg, "omega_report.txt", out, header);
            emit(cfg, "omega_cells.txt", out, [&](std::ostream& o) { write_cells(omega, o); });
            header(out);
        } else {
            std::ostringstream head;
            header(head);
            std::istringstream lines(head.str());
            for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
            write_cells(omega, out);
        }
        return 0;
    });
}

int cmd_pertappx(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto spec = load(cfg);
        const auto fam = spec.family();
        const double eps = cfg.eps.value_or(0.1);
        const auto probes = cfg.lambdas.empty() ? default_lambda_probes(spec.lambda_range) : cfg.lambdas;
        const auto xs = lattice(spec.window, spec.dims == 1 ? 1000 : 32);
        const auto r = check_pertappx(fam, eps, probes, xs);
        emit(cfg, "pertappx.txt", out, [&](std::ostream& o) {
            o << "system=" << spec.name << '\n';
            o << "eps=" << format_number(eps) << '\n';
            o << "x_samples=" << xs.size() << '\n';
            o << "lambda_probes=" << probes.size() << '\n';
            o << "certified_delta=" << format_number(r.delta) << '\n';
            if (!r.witness) {
                o << "witness=none\n";
                return;
            }
            o << "witness=found\n";
            o << "x=" << point_text(r.witness->x) << '\n';
            o << "lambda=" << format_number(r.witness->lambda) << '\n';
            o << "value=" << to_string(r.witness->value) << '\n';
            o << "target=" << to_string(r.witness->target) << '\n';
            o << "separation=" << format_number(r.witness->separation) << '\n';
        });
        return r.witness ? 2 : 0;
    });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Filippov differential-inclusion verification toolkit", "filippov"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string lambda_text, nbox_text, x0_text, out_text;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("name", cfg.system, "Built-in system name or spec file path");
        sub->add_option("--system", cfg.system, "Built-in system name or spec file path");
        sub->add_option("--grid", cfg.grid, "Subdivisions per axis")->check(CLI::PositiveNumber);
        sub->add_option("--htau", cfg.h_tau, "Multiflow horizon (0 = automatic)");
        sub->add_option("--lambda", lambda_text, "Comma list or start:step:stop");
        sub->add_option("--nbox", nbox_text, "Neighborhood '[a, b] x [c, d]'");
        sub->add_option("--eps", cfg.eps, "Inflation radius");
        sub->add_option("--T", cfg.T, "Final time");
        sub->add_option("--step", cfg.step, "Euler step");
        sub->add_option("--sel", cfg.selection, "Selection: min, max, zero, sliding, random");
        sub->add_option("--seed", cfg.seed, "Seed for the random selection");
        sub->add_option("--x0", x0_text, "Start point, comma separated");
        sub->add_option("--out", out_text, "Output directory");
    };
    const std::vector<std::pair<const char*, const char*>> commands = {
        {"validate", "Structural checks and USC falsification"},
        {"simulate", "Euler selection trajectory as CSV"},
        {"isolate", "Isolation verdict for a neighborhood"},
        {"sweep", "Isolation verdicts over lambda samples"},
        {"omega", "Combinatorial omega-limit of the cell of x0"},
        {"pertappx", "Containment of perturbed values in the eps-inflated field"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help));

    std::vector<std::string> argv_store = {"filippov"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run 'filippov --help' for usage\n";
        return 1;
    }

    try {
        if (!lambda_text.empty()) cfg.lambdas = parse_lambda_list(lambda_text);
        if (!nbox_text.empty()) cfg.neighborhood = parse_box(nbox_text);
        if (!x0_text.empty()) cfg.x0 = parse_point(x0_text);
        if (!out_text.empty()) cfg.out_dir = out_text;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "validate") return cmd_validate(cfg, out, err);
    if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
    if (cfg.command == "isolate") return cmd_isolate(cfg, out, err);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
    if (cfg.command == "omega") return cmd_omega(cfg, out, err);
    return cmd_pertappx(cfg, out, err);
}

}  // namespace filippov
