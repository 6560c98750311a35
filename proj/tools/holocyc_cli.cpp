#include "holocyc/averaging.hpp"
#include "holocyc/core.hpp"
#include "holocyc/flow.hpp"
#include "holocyc/lyapunov.hpp"
#include "holocyc/rigor.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace holocyc;
using json = nlohmann::json;

namespace {

// Usage and input problems exit with 2, failed analyses with 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string system, out, csv, range, boxes, certificate;
    int grid = 0;
    double eps = 0.0;
    int order = 1;
    int precision_bits = 128;
    double tol = 0.0;
    double x = 0.0;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::pair<double, double> parse_range(const std::string& text, std::pair<double, double> fallback)
{
    if (text.empty()) return fallback;
    auto colon = text.find(':');
    if (colon == std::string::npos) throw InputError("--range expects A:B");
    try {
        double a = std::stod(text.substr(0, colon)), b = std::stod(text.substr(colon + 1));
        if (!(a < b)) throw InputError("--range needs A < B");
        return {a, b};
    } catch (const std::logic_error&) {
        throw InputError("--range expects numbers A:B");
    }
}

PiecewiseSystem system_from(const Options& o)
{
    if (o.system.empty()) throw InputError("--system is required");
    try {
        return parse_system(read_file(o.system));
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
}

std::ofstream csv_file(const Options& o, const std::string& name)
{
    std::filesystem::create_directories(o.csv);
    std::ofstream f(std::filesystem::path(o.csv) / name);
    if (!f) throw InputError("cannot write into " + o.csv);
    f.precision(17);
    return f;
}

void write_trajectory(std::ofstream& f, const std::vector<TrajectoryPoint>& pts)
{
    f << "t,x,y,side\n";
    for (const auto& p : pts) f << p.t << ',' << p.x << ',' << p.y << ',' << (p.side == Side::upper ? "upper" : "lower") << '\n';
}

const char* stability_name(Stability s)
{
    switch (s) {
    case Stability::attracting: return "attracting";
    case Stability::repelling: return "repelling";
    case Stability::nonhyperbolic: return "nonhyperbolic";
    }
    return "?";
}

json complex_json(Complex z) { return {z.real(), z.imag()}; }

json equilibria_json(const PiecewiseSystem& s)
{
    json out = json::array();
    for (Side side : {Side::upper, Side::lower}) {
        for (const auto& e : equilibria(s.side(side))) {
            const char* where = e.side == EqSide::boundary ? "boundary" : e.side == EqSide::upper ? "upper" : "lower";
            bool real = (side == Side::upper) == (e.side == EqSide::upper);
            out.push_back({{"field", side == Side::upper ? "upper" : "lower"},
                           {"location", complex_json(e.location)},
                           {"half_plane", where},
                           {"real", e.side != EqSide::boundary && real}});
        }
    }
    return out;
}

int run_lyapunov(const Options& o, json& inputs, json& results)
{
    PiecewiseSystem s = system_from(o);
    double tol = o.tol > 0 ? o.tol : 1e-9;
    inputs["tol"] = tol;
    LyapunovVector lv = lyapunov_quantities(s, tol);
    results["V"] = lv.V;
    results["defined_through"] = lv.defined_through;
    results["first_nonzero"] = lv.first_nonzero ? json(*lv.first_nonzero) : json(nullptr);
    results["order"] = lv.first_nonzero ? json(*lv.first_nonzero) : json(nullptr);
    results["tolerances"] = {{"zero", tol}};
    SideSeriesData up = side_data(s.upper), lo = reflected(side_data(s.lower));
    results["omega_upper"] = omega_pi(up);
    results["omega_lower_reflected"] = omega_pi(lo);
    return 0;
}

PerturbationPair perturbation_from(const Options& o)
{
    if (o.system.empty()) throw InputError("--system must name a perturbation file");
    json doc;
    try {
        doc = json::parse(read_file(o.system));
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed perturbation file: ") + e.what());
    }
    auto side = [&](const char* key) {
        if (!doc.contains(key) || !doc[key].is_array()) throw InputError(std::string("perturbation lacks \"") + key + "\"");
        std::vector<std::pair<double, double>> out;
        for (const auto& c : doc[key]) {
            if (!c.is_array() || c.size() != 2) throw InputError("coefficients are [a_k, b_k] pairs");
            auto num = [](const json& v) { return to_double(parse_rational(v.is_string() ? v.get<std::string>() : v.dump())); };
            try {
                out.emplace_back(num(c[0]), num(c[1]));
            } catch (const std::invalid_argument& e) {
                throw InputError(e.what());
            }
        }
        if (out.size() < 2) throw InputError("each side needs degree at least 1");
        return out;
    };
    return {side("upper"), side("lower")};
}

int run_average(const Options& o, json& inputs, json& results)
{
    PerturbationPair p = perturbation_from(o);
    if (o.order != 1 && o.order != 2) throw InputError("--order must be 1 or 2");
    inputs["order"] = o.order;
    RealPoly m1 = averaged_M1(p);
    results["M1"] = m1.coeffs;
    RealPoly m = m1;
    if (o.order == 2) {
        if (!m1.is_zero(1e-12)) {
            results["error"] = {{"type", "precondition"}, {"message", "M1 is not identically zero, M2 is undefined"}};
            return 1;
        }
        m = averaged_M2(p);
        results["M2"] = m.coeffs;
    }
    int n_plus = static_cast<int>(p.upper.size()) - 1, n_minus = static_cast<int>(p.lower.size()) - 1;
    json zeros = json::array();
    for (double r : positive_zeros(m)) zeros.push_back({{"r", r}, {"derivative", m.derivative()(r)}});
    results["zeros"] = zeros;
    results["descartes_bound"] = m.is_zero() ? json(nullptr) : json(descartes_bound(m));
    results["max_zeros"] = max_zeros(n_plus, n_minus, o.order);
    if (!o.csv.empty()) {
        auto [a, b] = parse_range(o.range, {0.0, 2.0});
        int grid = o.grid > 0 ? o.grid : 400;
        auto f = csv_file(o, "averaged.csv");
        f << "r,M\n";
        for (int i = 0; i <= grid; ++i) {
            double r = a + (b - a) * i / grid;
            f << r << ',' << m(r) << '\n';
        }
    }
    if (o.eps > 0) {
        inputs["eps"] = o.eps;
        int grid = o.grid > 0 ? o.grid : 400;
        inputs["grid"] = grid;
        PredictionReport rep = predict_cycles(p, o.order, o.eps, grid);
        json pairs = json::array();
        for (const auto& c : rep.pairs)
            pairs.push_back({{"predicted", c.predicted},
                             {"observed", std::isnan(c.observed) ? json(nullptr) : json(c.observed)},
                             {"error", std::isnan(c.error) ? json(nullptr) : json(c.error)}});
        results["prediction"] = {{"pairs", pairs}, {"observed_count", rep.observed_count},
                                 {"ambiguous", rep.ambiguous}, {"notes", rep.notes}};
        if (rep.ambiguous) {
            results["error"] = {{"type", "analysis"}, {"message", "pairing of cycles with zeros is ambiguous"}};
            return 1;
        }
    }
    return 0;
}

int run_simulate(const Options& o, json& inputs, json& results)
{
    PiecewiseSystem s = system_from(o);
    auto [a, b] = parse_range(o.range, {o.x > 0 ? o.x : 1.0, o.x > 0 ? o.x : 1.0});
    int grid = o.grid > 0 ? o.grid : 1;
    inputs["range"] = {a, b};
    inputs["grid"] = grid;
    FlowOptions fo;
    if (o.tol > 0) fo.rtol = o.tol;
    json samples = json::array();
    int failures = 0;
    for (int i = 0; i < grid; ++i) {
        double x = grid == 1 ? a : a + (b - a) * i / (grid - 1);
        json rec{{"x", x}};
        try {
            rec["upper_landing"] = half_return(s, Side::upper, x, fo);
            rec["return"] = return_map(s, x, fo);
            rec["delta2"] = displacement(s, x, fo);
            rec["period"] = return_time(s, x, fo);
            if (!o.csv.empty()) {
                auto f = csv_file(o, "trajectory_" + std::to_string(i) + ".csv");
                write_trajectory(f, trajectory(s, x, 400, fo));
            }
        } catch (const FlowError& e) {
            rec["error"] = e.what();
            ++failures;
        }
        samples.push_back(rec);
    }
    results["samples"] = samples;
    if (failures == grid) results["error"] = {{"type", "analysis"}, {"message", "no start point returned to the axis"}};
    return failures == grid ? 1 : 0;
}

int run_cycles(const Options& o, json& inputs, json& results)
{
    PiecewiseSystem s = system_from(o);
    auto [a, b] = parse_range(o.range, {0.1, 12.0});
    if (a <= 0) throw InputError("cycles needs a positive range");
    int grid = o.grid > 0 ? o.grid : 2000;
    FlowOptions fo;
    if (o.tol > 0) fo.rtol = o.tol;
    inputs["range"] = {a, b};
    inputs["grid"] = grid;
    CycleScan scan = find_cycles(s, a, b, grid, fo);
    json cycles = json::array();
    for (size_t i = 0; i < scan.cycles.size(); ++i) {
        const auto& c = scan.cycles[i];
        cycles.push_back({{"section_point", c.section_point},
                          {"period", c.period},
                          {"floquet_slope", c.floquet_slope},
                          {"stability", stability_name(c.stability)},
                          {"residual", c.residual}});
        if (!o.csv.empty()) {
            auto f = csv_file(o, "cycle_" + std::to_string(i) + ".csv");
            write_trajectory(f, trajectory(s, c.section_point, 400, fo));
        }
    }
    results["count"] = scan.cycles.size();
    results["cycles"] = cycles;
    results["failures"] = scan.failures;
    results["equilibria"] = equilibria_json(s);
    if (!o.csv.empty()) {
        auto f = csv_file(o, "displacement.csv");
        f << "x,delta2\n";
        for (int i = 0; i <= grid; ++i) {
            double x = a + (b - a) * i / grid;
            try {
                f << x << ',' << displacement(s, x, fo) << '\n';
            } catch (const FlowError&) {
            }
        }
    }
    return 0;
}

int run_invert(const Options& o, json& inputs, json& results)
{
    PiecewiseSystem s = system_from(o);
    (void)inputs;
    PiecewiseSystem w;
    try {
        w = invert_at_infinity(s);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    results["inverted"] = json::parse(serialize_system(w));
    results["equilibria"] = equilibria_json(w);
    return 0;
}

int run_verify(const Options& o, json& inputs, json& results)
{
    PiecewiseSystem s = system_from(o);
    if (o.boxes.empty()) throw InputError("verify needs --boxes");
    std::vector<BoxSpec> specs;
    CrossingEquations eq;
    try {
        specs = parse_boxes(read_file(o.boxes));
        eq = crossing_equations(s);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    inputs["boxes"] = o.boxes;
    inputs["precision_bits"] = o.precision_bits;
    std::vector<MirandaCertificate> certs;
    json roots = json::array();
    bool all = true;
    for (const auto& spec : specs) {
        auto params = spec.faces ? *spec.faces : default_face_params(eq, spec.box);
        MirandaCertificate mc = miranda_verify(eq, spec.box, params, o.precision_bits);
        all = all && mc.certified;
        NewtonResult nr = damped_newton(eq, spec.box);
        roots.push_back({{"u", static_cast<double>(nr.u)},
                         {"v", static_cast<double>(nr.v)},
                         {"residual", static_cast<double>(nr.residual)},
                         {"converged", nr.converged},
                         {"inside", nr.inside},
                         {"section_point", static_cast<double>(eq.section_point(nr.u))}});
        certs.push_back(std::move(mc));
    }
    results["certified_boxes"] = std::count_if(certs.begin(), certs.end(), [](const auto& c) { return c.certified; });
    results["certificate"] = json::parse(certificate_json(s, certs));
    results["newton"] = roots;
    if (!all) results["error"] = {{"type", "analysis"}, {"message", "some boxes were not certified"}};
    return all ? 0 : 1;
}

int run_reverify(const Options& o, json& inputs, json& results)
{
    if (o.certificate.empty()) throw InputError("reverify needs a certificate file");
    inputs["certificate"] = o.certificate;
    json doc;
    try {
        doc = json::parse(read_file(o.certificate));
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed certificate: ") + e.what());
    }
    // accept the report written by `verify` as well as a bare certificate
    if (doc.contains("results") && doc["results"].contains("certificate")) doc = doc["results"]["certificate"];
    ReverifyResult r;
    try {
        r = reverify(doc.dump());
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    results["ok"] = r.ok;
    results["mismatches"] = r.mismatches;
    if (!r.ok) results["error"] = {{"type", "analysis"}, {"message", "certificate does not replay"}};
    return r.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Limit cycles of piecewise holomorphic systems split along Im z = 0"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "write the JSON report here instead of stdout");
        sub->add_option("--csv", o.csv, "directory for plot-ready CSV exports");
        sub->add_option("--tol", o.tol, "tolerance (zero test for lyapunov, integrator rtol otherwise)");
    };
    auto* lyap = app.add_subcommand("lyapunov", "Lyapunov quantities V_1..V_5 at the origin");
    lyap->add_option("--system", o.system, "system JSON")->required();
    add_common(lyap);

    auto* avg = app.add_subcommand("average", "averaged functions of a perturbation of iz");
    avg->add_option("--system", o.system, "perturbation JSON {\"upper\": [[a_k, b_k], ...], \"lower\": ...}")->required();
    avg->add_option("--order", o.order, "averaging order")->check(CLI::IsMember({1, 2}));
    avg->add_option("--eps", o.eps, "simulate at this epsilon and pair cycles with zeros");
    avg->add_option("--grid", o.grid, "scan grid for --eps, samples for --csv");
    avg->add_option("--range", o.range, "r range A:B for the CSV samples");
    add_common(avg);

    auto* sim = app.add_subcommand("simulate", "return map samples and trajectories");
    sim->add_option("--system", o.system, "system JSON")->required();
    sim->add_option("--range", o.range, "start points A:B on the positive real axis");
    sim->add_option("--grid", o.grid, "number of start points");
    sim->add_option("--x", o.x, "single start point");
    add_common(sim);

    auto* cyc = app.add_subcommand("cycles", "crossing limit cycles from sign changes of the displacement");
    cyc->add_option("--system", o.system, "system JSON")->required();
    cyc->add_option("--range", o.range, "section range A:B (default 0.1:12)");
    cyc->add_option("--grid", o.grid, "scan grid (default 2000)");
    add_common(cyc);

    auto* inv = app.add_subcommand("invert", "system seen from infinity, w = 1/z");
    inv->add_option("--system", o.system, "system JSON")->required();
    add_common(inv);

    auto* ver = app.add_subcommand("verify", "Poincare-Miranda certificates for boxes of flight times");
    ver->add_option("--system", o.system, "piecewise linear system JSON with exact coefficients")->required();
    ver->add_option("--boxes", o.boxes, "boxes JSON")->required();
    ver->add_option("--precision-bits", o.precision_bits, "working precision of the enclosures")->check(CLI::Range(16, 4096));
    add_common(ver);

    auto* rev = app.add_subcommand("reverify", "replay a stored certificate");
    rev->add_option("certificate", o.certificate, "certificate or verify report")->required();
    add_common(rev);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    json report{{"command", name}, {"inputs", json::object()}, {"results", json::object()}};
    if (!o.system.empty()) report["inputs"]["system"] = o.system;

    auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    try {
        json& in = report["inputs"];
        json& res = report["results"];
        if (name == "lyapunov") code = run_lyapunov(o, in, res);
        else if (name == "average") code = run_average(o, in, res);
        else if (name == "simulate") code = run_simulate(o, in, res);
        else if (name == "cycles") code = run_cycles(o, in, res);
        else if (name == "invert") code = run_invert(o, in, res);
        else if (name == "verify") code = run_verify(o, in, res);
        else code = run_reverify(o, in, res);
    } catch (const InputError& e) {
        report["results"]["error"] = {{"type", "input"}, {"message", e.what()}};
        code = 2;
    } catch (const std::invalid_argument& e) {
        report["results"]["error"] = {{"type", "input"}, {"message", e.what()}};
        code = 2;
    } catch (const std::exception& e) {
        report["results"]["error"] = {{"type", "analysis"}, {"message", e.what()}};
        code = 1;
    }
    report["timing"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    report["status"] = code == 0 ? "ok" : "failed";

    std::string text = report.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(o.out);
        if (!f) {
            std::cerr << "cannot write " << o.out << "\n";
            return 2;
        }
        f << text;
    }
    return code;
}
