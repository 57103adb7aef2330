#include "filippov/systems.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace filippov {

SpecError::SpecError(const std::string& origin, std::size_t line, const std::string& message)
    : std::runtime_error(origin + (line ? ":" + std::to_string(line) : std::string()) + ": " + message), line_(line) {}

// ---------------------------------------------------------------------------
// System B's minimum

double g_one(double u) {
    return std::tanh(u) + 2.0 - 2.0 * std::numbers::e * mollifier(u);
}

namespace {

struct TauMin {
    double argmin;
    double value;
};

TauMin compute_tau_min() {
    // Dense scan brackets the minimizer; golden section polishes it.
    constexpr int kScan = 1'000'000;
    double best_u = 0.0, best_v = g_one(0.0);
    for (int k = 1; k < kScan; ++k) {
        const double u = -1.0 + 2.0 * static_cast<double>(k) / kScan;
        const double v = g_one(u);
        if (v < best_v) {
            best_v = v;
            best_u = u;
        }
    }
    const double step = 2.0 / kScan;
    double a = best_u - step, b = best_u + step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        if (g_one(c) < g_one(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    const double u = 0.5 * (a + b);
    const double v = g_one(u);
    return v < best_v ? TauMin{u, v} : TauMin{best_u, best_v};
}

const TauMin& frozen_tau() {
    static const TauMin tau = compute_tau_min();
    return tau;
}

}  // namespace

double tau_min() { return frozen_tau().value; }
double tau_argmin() { return frozen_tau().argmin; }

// ---------------------------------------------------------------------------
// Text helpers

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

double parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
        throw std::invalid_argument("malformed number '" + std::string(s) + "'");
    }
    return v;
}

bool is_identifier(std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

Interval parse_interval(std::string_view s) {
    s = trim(s);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']') {
        throw std::invalid_argument("expected an interval '[lo, hi]', got '" + std::string(s) + "'");
    }
    const auto parts = split(s.substr(1, s.size() - 2), ',');
    if (parts.size() != 2) throw std::invalid_argument("interval needs exactly two bounds: '" + std::string(s) + "'");
    const double lo = parse_number(parts[0]), hi = parse_number(parts[1]);
    if (!(lo <= hi)) throw std::invalid_argument("interval lower bound exceeds upper bound: '" + std::string(s) + "'");
    return {lo, hi};
}

std::string box_text(const Box& b) {
    std::string s;
    for (std::size_t i = 0; i < b.dims(); ++i) {
        if (i) s += " x ";
        s += "[" + format_number(b[i].lo()) + ", " + format_number(b[i].hi()) + "]";
    }
    return s;
}

}  // namespace

Box parse_box(std::string_view text) {
    std::vector<Interval> axes;
    text = trim(text);
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto open = text.find('[', pos);
        if (open == std::string_view::npos) break;
        if (!trim(text.substr(pos, open - pos)).empty() && trim(text.substr(pos, open - pos)) != "x") {
            throw std::invalid_argument("expected 'x' between box axes in '" + std::string(text) + "'");
        }
        const auto close = text.find(']', open);
        if (close == std::string_view::npos) throw std::invalid_argument("unterminated interval in '" + std::string(text) + "'");
        axes.push_back(parse_interval(text.substr(open, close - open + 1)));
        pos = close + 1;
    }
    if (axes.empty() || !trim(text.substr(std::min(pos, text.size()))).empty()) {
        throw std::invalid_argument("malformed box '" + std::string(text) + "'");
    }
    return Box(std::move(axes));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct PieceSource {
    Piece piece;
    std::size_t line = 0;
};

class SpecParser {
public:
    SpecParser(std::string_view text, std::string origin) : text_(text), origin_(std::move(origin)) {}

    SystemSpec parse() {
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start <= text_.size()) {
            auto end = text_.find('\n', start);
            if (end == std::string_view::npos) end = text_.size();
            ++line_no;
            std::string_view line = text_.substr(start, end - start);
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            line = trim(line);
            if (!line.empty()) {
                try {
                    parse_line(line, line_no);
                } catch (const SpecError&) {
                    throw;
                } catch (const ParseError& e) {
                    throw SpecError(origin_, line_no, e.what());
                } catch (const std::exception& e) {
                    throw SpecError(origin_, line_no, e.what());
                }
            }
            if (end == text_.size()) break;
            start = end + 1;
        }
        return finish();
    }

private:
    [[noreturn]] void fail(std::size_t line, const std::string& msg) const { throw SpecError(origin_, line, msg); }

    void parse_line(std::string_view line, std::size_t line_no) {
        const auto eq = find_assignment(line);
        if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
        std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (value.empty()) fail(line_no, "empty value for '" + std::string(key) + "'");

        if (key.starts_with("switch ") || key.starts_with("switch\t")) {
            const auto name = trim(key.substr(6));
            if (!is_identifier(name) || name == "lambda" || (name.size() == 2 && name[0] == 'x' && std::isdigit(static_cast<unsigned char>(name[1])))) {
                fail(line_no, "invalid switching function name '" + std::string(name) + "'");
            }
            if (std::find(switch_names_.begin(), switch_names_.end(), name) != switch_names_.end()) {
                fail(line_no, "switching function '" + std::string(name) + "' declared twice");
            }
            switch_names_.emplace_back(name);
            switches_.push_back(parse_expr(value));
            return;
        }
        if (key.starts_with("piece") || key.starts_with("zero.piece")) {
            const bool zero = key.starts_with("zero.");
            std::string_view rest = trim(key.substr(zero ? 10 : 5));
            PieceSource src;
            src.line = line_no;
            if (!rest.empty()) {
                if (rest.front() != '[' || rest.back() != ']') fail(line_no, "guards must be written as '[s > 0, ...]'");
                for (auto cond : split(rest.substr(1, rest.size() - 2), ',')) src.piece.guards.push_back(parse_guard(cond, line_no));
            }
            for (auto comp : split(value, ';')) {
                if (comp.empty()) fail(line_no, "empty component expression");
                src.piece.components.push_back(parse_expr(comp));
            }
            (zero ? zero_pieces_ : pieces_).push_back(std::move(src));
            return;
        }

        const std::string k(key);
        if (seen_.count(k)) fail(line_no, "field '" + k + "' given twice");
        seen_[k] = line_no;
        if (k == "name") {
            name_ = std::string(value);
        } else if (k == "dims") {
            const double d = parse_number(value);
            if (d != std::floor(d) || d < 1 || d > 9) fail(line_no, "dims must be an integer in 1..9");
            dims_ = static_cast<std::size_t>(d);
        } else if (k == "lambda_range") {
            try {
                lambda_range_ = parse_interval(value);
            } catch (const std::exception& e) {
                fail(line_no, std::string("lambda_range malformed: ") + e.what());
            }
        } else if (k == "window") {
            window_ = parse_box(value);
        } else if (k == "neighborhood") {
            neighborhood_ = parse_box(value);
        } else {
            fail(line_no, "unknown field '" + k + "'");
        }
    }

    // '=' that is not part of a guard condition inside brackets.
    static std::size_t find_assignment(std::string_view line) {
        int depth = 0;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '[') ++depth;
            else if (line[i] == ']') --depth;
            else if (line[i] == '=' && depth == 0) return i;
        }
        return std::string_view::npos;
    }

    Guard parse_guard(std::string_view cond, std::size_t line_no) {
        const auto op = cond.find_first_of("<>=");
        if (op == std::string_view::npos) fail(line_no, "guard '" + std::string(cond) + "' needs '>', '<' or '='");
        const auto name = trim(cond.substr(0, op));
        const auto rhs = trim(cond.substr(op + 1));
        if (rhs != "0") fail(line_no, "guards compare a switching function with 0: '" + std::string(cond) + "'");
        const auto it = std::find(switch_names_.begin(), switch_names_.end(), name);
        if (it == switch_names_.end()) fail(line_no, "guard uses undeclared switching function '" + std::string(name) + "'");
        Guard g;
        g.switch_index = static_cast<std::size_t>(it - switch_names_.begin());
        g.sign = cond[op] == '>' ? GuardSign::Positive : cond[op] == '<' ? GuardSign::Negative : GuardSign::Zero;
        return g;
    }

    PiecewiseSpec assemble(const std::vector<PieceSource>& sources) const {
        PiecewiseSpec s;
        s.dims = dims_;
        s.switches = switches_;
        s.lambda_range = lambda_range_;
        for (const auto& p : sources) s.pieces.push_back(p.piece);
        return s;
    }

    void check_pieces(const std::vector<PieceSource>& sources) const {
        for (const auto& p : sources) {
            if (p.piece.components.size() != dims_) {
                fail(p.line, "piece has " + std::to_string(p.piece.components.size()) + " component(s) but dims = " + std::to_string(dims_));
            }
            for (const auto& c : p.piece.components) {
                if (c.state_arity() > dims_) fail(p.line, "component uses a state variable beyond dims = " + std::to_string(dims_));
            }
        }
    }

    // Every sample off the switching sets must lie in exactly one strict
    // guard region, or in several whose pieces agree there.
    void check_partition(const std::vector<PieceSource>& sources, const std::vector<double>& lambdas, const Box& window,
                         const char* regime) const {
        const std::size_t n = dims_;
        const auto per_axis = static_cast<std::size_t>(std::max(3.0, std::floor(std::pow(4096.0, 1.0 / static_cast<double>(n)))));
        std::size_t total = 1;
        for (std::size_t i = 0; i < n; ++i) total *= per_axis;
        Point x(n);
        for (double lam : lambdas) {
            for (std::size_t flat = 0; flat < total; ++flat) {
                std::size_t rest = flat;
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = (static_cast<double>(rest % per_axis) + 0.5) / static_cast<double>(per_axis);
                    rest /= per_axis;
                    x[i] = window[i].lo() + t * (window[i].hi() - window[i].lo());
                }
                std::vector<double> h(switches_.size());
                bool on_switch = false;
                for (std::size_t j = 0; j < h.size(); ++j) {
                    h[j] = switches_[j].eval(x, lam);
                    if (!std::isfinite(h[j])) fail(0, std::string(regime) + ": switching function '" + switch_names_[j] + "' is not finite inside the window");
                    on_switch = on_switch || std::fabs(h[j]) <= 1e-9;
                }
                if (on_switch) continue;

                std::vector<const PieceSource*> hits;
                for (const auto& p : sources) {
                    bool active = true, zero_only = false;
                    for (const auto& g : p.piece.guards) {
                        if (g.sign == GuardSign::Zero) zero_only = true;
                        if (g.sign == GuardSign::Positive && !(h[g.switch_index] > 0.0)) active = false;
                        if (g.sign == GuardSign::Negative && !(h[g.switch_index] < 0.0)) active = false;
                    }
                    if (active && !zero_only) hits.push_back(&p);
                }
                const std::string where = " at x = (" + point_text(x) + "), lambda = " + format_number(lam);
                if (hits.empty()) fail(0, std::string(regime) + ": guards leave a gap" + where + "; guards must partition the window");
                for (std::size_t a = 1; a < hits.size(); ++a) {
                    for (std::size_t i = 0; i < n; ++i) {
                        const double va = hits[0]->piece.components[i].eval(x, lam);
                        const double vb = hits[a]->piece.components[i].eval(x, lam);
                        if (!(std::fabs(va - vb) <= 1e-12 * std::max(1.0, std::fabs(va)))) {
                            fail(hits[a]->line, std::string(regime) + ": guards overlap with contradictory pieces (lines " +
                                                    std::to_string(hits[0]->line) + " and " + std::to_string(hits[a]->line) + ")" + where);
                        }
                    }
                }
                for (const auto* p : hits) {
                    for (const auto& c : p->piece.components) {
                        if (!std::isfinite(c.eval(x, lam))) fail(p->line, std::string(regime) + ": piece is not finite" + where);
                    }
                }
            }
        }
    }

    static std::string point_text(const Point& x) {
        std::string s;
        for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_number(x[i]);
        return s;
    }

    SystemSpec finish() {
        for (const char* f : {"name", "dims", "lambda_range", "window"}) {
            if (!seen_.count(f)) fail(0, std::string("missing required field '") + f + "'");
        }
        if (pieces_.empty()) fail(0, "no 'piece' lines");
        if (window_.dims() != dims_) fail(seen_.at("window"), "window has " + std::to_string(window_.dims()) + " axes but dims = " + std::to_string(dims_));
        if (seen_.count("neighborhood")) {
            if (neighborhood_.dims() != dims_) fail(seen_.at("neighborhood"), "neighborhood dimension does not match dims");
            if (!contains(window_, neighborhood_)) fail(seen_.at("neighborhood"), "neighborhood must lie inside the window");
        } else {
            neighborhood_ = window_;
        }
        for (std::size_t j = 0; j < switches_.size(); ++j) {
            if (switches_[j].state_arity() > dims_) fail(0, "switching function '" + switch_names_[j] + "' uses a state variable beyond dims");
        }
        check_pieces(pieces_);
        check_pieces(zero_pieces_);

        const bool uses_lambda =
            std::any_of(switches_.begin(), switches_.end(), [](const Expr& e) { return e.references_lambda(); }) ||
            std::any_of(pieces_.begin(), pieces_.end(), [](const PieceSource& p) {
                return std::any_of(p.piece.components.begin(), p.piece.components.end(),
                                   [](const Expr& e) { return e.references_lambda(); });
            });
        if (!zero_pieces_.empty() && !lambda_range_.contains(0.0)) {
            fail(zero_pieces_.front().line, "zero.piece given but lambda_range excludes 0");
        }
        if (zero_pieces_.empty() && uses_lambda && lambda_range_.contains(0.0)) {
            fail(seen_.at("lambda_range"),
                 "lambda_range contains 0 and the pieces depend on lambda, but no lambda = 0 member is declared. "
                 "The pointwise limit of a family is not necessarily its set-valued limit (compare F0 = [1,3] with "
                 "G0 = [tau,3] at a switching point); declare the lambda = 0 member explicitly with 'zero.piece' lines");
        }

        std::vector<double> lambdas;
        for (int k = 0; k <= 4; ++k) {
            const double lam = lambda_range_.lo() + (lambda_range_.hi() - lambda_range_.lo()) * k / 4.0;
            if (lam == 0.0 && !zero_pieces_.empty()) continue;
            if (std::find(lambdas.begin(), lambdas.end(), lam) == lambdas.end()) lambdas.push_back(lam);
        }
        check_partition(pieces_, lambdas, window_, "pieces");
        if (!zero_pieces_.empty()) check_partition(zero_pieces_, {0.0}, window_, "zero.pieces");

        SystemSpec spec;
        spec.name = name_;
        spec.dims = dims_;
        spec.lambda_range = lambda_range_;
        spec.window = window_;
        spec.neighborhood = neighborhood_;
        spec.switch_names = switch_names_;
        spec.regular = assemble(pieces_);
        if (!zero_pieces_.empty()) spec.zero_member = assemble(zero_pieces_);
        try {
            spec.regular.validate();
            if (spec.zero_member) spec.zero_member->validate();
        } catch (const std::exception& e) {
            fail(0, e.what());
        }
        return spec;
    }

    std::string_view text_;
    std::string origin_;
    std::map<std::string, std::size_t> seen_;
    std::string name_;
    std::size_t dims_ = 0;
    Interval lambda_range_{0.0, 0.0};
    Box window_;
    Box neighborhood_;
    std::vector<std::string> switch_names_;
    std::vector<Expr> switches_;
    std::vector<PieceSource> pieces_;
    std::vector<PieceSource> zero_pieces_;
};

std::string guard_text(const Guard& g, const std::vector<std::string>& names) {
    const char* op = g.sign == GuardSign::Positive ? " > 0" : g.sign == GuardSign::Negative ? " < 0" : " = 0";
    return names.at(g.switch_index) + op;
}

void emit_pieces(std::ostringstream& out, const char* keyword, const PiecewiseSpec& spec,
                 const std::vector<std::string>& names) {
    for (const auto& p : spec.pieces) {
        out << keyword;
        if (!p.guards.empty()) {
            out << " [";
            for (std::size_t i = 0; i < p.guards.size(); ++i) out << (i ? ", " : "") << guard_text(p.guards[i], names);
            out << "]";
        }
        out << " = ";
        for (std::size_t i = 0; i < p.components.size(); ++i) out << (i ? " ; " : "") << p.components[i].to_string();
        out << "\n";
    }
}

}  // namespace

SystemSpec parse_system(std::string_view text, const std::string& origin) { return SpecParser(text, origin).parse(); }

SystemSpec load_system(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SpecError(path.string(), 0, "cannot open system file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_system(buf.str(), path.string());
}

FilippovFamily SystemSpec::family() const { return FilippovFamily(regular, zero_member); }

std::string SystemSpec::to_text() const {
    std::ostringstream out;
    out << "name = " << name << "\n";
    out << "dims = " << dims << "\n";
    out << "lambda_range = [" << format_number(lambda_range.lo()) << ", " << format_number(lambda_range.hi()) << "]\n";
    out << "window = " << box_text(window) << "\n";
    out << "neighborhood = " << box_text(neighborhood) << "\n";
    for (std::size_t j = 0; j < switch_names.size(); ++j) {
        out << "switch " << switch_names[j] << " = " << regular.switches[j].to_string() << "\n";
    }
    emit_pieces(out, "piece", regular, switch_names);
    if (zero_member) emit_pieces(out, "zero.piece", *zero_member, switch_names);
    return out.str();
}

// ---------------------------------------------------------------------------
// Built-ins

namespace {

constexpr const char* kSystemA = R"(# f_lambda(x) = tanh(x/lambda) + 2 with its convexified limit F0
name = systemA
dims = 1
lambda_range = [0, 1]
window = [-1, 1]
neighborhood = [-1, 1]
switch s = x1
piece = tanh(x1/lambda) + 2
zero.piece [s < 0] = 1
zero.piece [s > 0] = 3
)";

// g_lambda(x) = tanh(x/lambda) + 2 - 2e mollifier(x/lambda)
constexpr const char* kSmoothG = "tanh(x1/lambda) + 2 - 2*exp(1)*mollifier(x1/lambda)";

constexpr const char* kSystemC = R"(# -x for x < 0, [0,1] at 0, 1 for x > 0
name = systemC
dims = 1
lambda_range = [0, 1]
window = [-1, 1]
neighborhood = [-1, 1]
switch s = x1
piece [s < 0] = -x1
piece [s > 0] = 1
)";

constexpr const char* kPlanarDemo = R"(# planar sliding demo: the switching line x2 = 0 attracts, sliding drives x1 to 0
name = planarDemo
dims = 2
lambda_range = [0, 1]
window = [-1, 1] x [-1, 1]
neighborhood = [-1, 1] x [-1, 1]
switch s = x2
piece [s > 0] = -x1 ; -1
piece [s < 0] = -x1 ; 1
)";

std::string system_b_text() {
    // The lambda = 0 member G0 carries the frozen minimum tau of g_1 as an extra vertex.
    std::ostringstream out;
    out << "# g_lambda with its set-valued limit G0 = [tau, 3] at 0\n"
        << "name = systemB\n"
        << "dims = 1\n"
        << "lambda_range = [0, 1]\n"
        << "window = [-1, 1]\n"
        << "neighborhood = [-1, 1]\n"
        << "switch s = x1\n"
        << "piece = " << kSmoothG << "\n"
        << "zero.piece [s < 0] = 1\n"
        << "zero.piece [s > 0] = 3\n"
        << "zero.piece [s = 0] = " << format_number(tau_min()) << "\n";
    return out.str();
}

std::string family_h_text() {
    // g_lambda for lambda > 0 glued to F0: deliberately not upper-semicontinuous.
    std::ostringstream out;
    out << "# g_lambda glued to F0 = [1, 3]; not upper-semicontinuous at (0, 0)\n"
        << "name = familyH\n"
        << "dims = 1\n"
        << "lambda_range = [0, 1]\n"
        << "window = [-1, 1]\n"
        << "neighborhood = [-1, 1]\n"
        << "switch s = x1\n"
        << "piece = " << kSmoothG << "\n"
        << "zero.piece [s < 0] = 1\n"
        << "zero.piece [s > 0] = 3\n";
    return out.str();
}

}  // namespace

std::vector<std::string> builtin_names() { return {"systemA", "systemB", "familyH", "systemC", "planarDemo"}; }

std::string builtin_text(std::string_view name) {
    if (name == "systemA" || name == "familyF") return kSystemA;
    if (name == "systemB" || name == "familyG") return system_b_text();
    if (name == "familyH") return family_h_text();
    if (name == "systemC") return kSystemC;
    if (name == "planarDemo") return kPlanarDemo;
    throw std::invalid_argument("unknown built-in system '" + std::string(name) + "'");
}

SystemSpec builtin(std::string_view name) {
    return parse_system(builtin_text(name), "builtin:" + std::string(name));
}

SystemSpec resolve_system(const std::string& name_or_path) {
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end() || name_or_path == "familyF" ||
        name_or_path == "familyG") {
        return builtin(name_or_path);
    }
    return load_system(name_or_path);
}

}  // namespace filippov
