#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fbl/beltrami.hpp"
#include "fbl/boundary.hpp"
#include "fbl/field_io.hpp"
#include "fbl/field_ops.hpp"
#include "fbl/frequency.hpp"
#include "fbl/hodograph.hpp"
#include "fbl/obstacle.hpp"
#include "fbl/scenarios.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fbl;

namespace {

// nlohmann prints the shortest round-trip form; outputs here use 17 significant digits.
void dump(std::ostream& out, const json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case json::value_t::object: {
        if (j.empty()) {
            out << "{}";
            return;
        }
        out << "{\n";
        std::size_t k = 0;
        for (const auto& [key, value] : j.items()) {
            out << pad << json(key).dump() << ": ";
            dump(out, value, indent, depth + 1);
            out << (++k < j.size() ? ",\n" : "\n");
        }
        out << close << '}';
        return;
    }
    case json::value_t::array: {
        if (j.empty()) {
            out << "[]";
            return;
        }
        const bool flat = std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_primitive(); });
        out << (flat ? "[" : "[\n");
        for (std::size_t k = 0; k < j.size(); ++k) {
            if (!flat) out << pad;
            dump(out, j[k], indent, depth + 1);
            if (k + 1 < j.size()) out << (flat ? ", " : ",\n");
        }
        out << (flat ? "]" : "\n" + close + "]");
        return;
    }
    case json::value_t::number_float: {
        const double v = j.get<double>();
        out << (std::isfinite(v) ? format_number(v) : "null");
        return;
    }
    default:
        out << j.dump();
    }
}

std::string dump(const json& j) {
    std::ostringstream out;
    dump(out, j, 2, 0);
    out << '\n';
    return out.str();
}

void write_json(const fs::path& path, const json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    ensure(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
    out << dump(j);
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
    fs::path p(prefix + suffix);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
}

json intervals_json(const IntervalSet& iv) {
    json out = json::array();
    for (const auto& i : iv.intervals) out.push_back(json::array({i.a, i.b}));
    return out;
}

json scenario_json(const ScenarioResult& r, const std::vector<std::string>& artifacts) {
    json j;
    j["kind"] = r.kind;
    j["anchors"] = r.anchors;
    json params = json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    j["parameters"] = params;
    json metrics = json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    j["metrics"] = metrics;
    json series = json::object();
    for (const auto& [k, v] : r.series) series[k] = v;
    j["series"] = series;
    json criteria = json::array();
    for (const auto& c : r.criteria) criteria.push_back({{"id", c.id}, {"description", c.description}, {"pass", c.pass}});
    j["criteria"] = criteria;
    j["pass"] = r.pass();
    j["artifacts"] = artifacts;
    return j;
}

// Writes fields, tables and summary.json into dir; returns the exit status.
int persist(const ScenarioResult& r, const fs::path& dir) {
    fs::create_directories(dir);
    std::vector<std::string> artifacts;
    for (const auto& [name, field] : r.fields) {
        write_fld(dir / (name + ".fld"), field);
        artifacts.push_back(name + ".fld");
    }
    for (const auto& t : r.tables) {
        write_csv(dir / (t.name + ".csv"), t.header, t.rows);
        artifacts.push_back(t.name + ".csv");
    }
    write_json(dir / "summary.json", scenario_json(r, artifacts));
    for (const auto& c : r.criteria) std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << ": " << c.description << '\n';
    return r.pass() ? 0 : 3;
}

ScalarField load_or_model(const std::string& source, int n) {
    if (source == "model") return ScalarField::from_function(half_square(n), [](double x, double y) {
        const double r = std::hypot(x, y);
        return r == 0.0 ? 0.0 : std::pow(r, 1.5) * std::cos(1.5 * std::atan2(std::max(y, 0.0), x));
    });
    return read_fld(source);
}

int report(const fs::path& dir) {
    ensure(fs::is_directory(dir), ErrorKind::Io, "not a directory: " + dir.string());
    const auto path = dir / "summary.json";
    ensure(fs::exists(path), ErrorKind::Io, "no summary.json in " + dir.string());
    std::ifstream in(path);
    const auto j = json::parse(in);
    const auto& m = j.at("metrics");
    std::cout << "scenario " << j.at("kind").get<std::string>() << " in " << dir.string() << '\n';
    std::cout << "criteria\n";
    for (const auto& c : j.at("criteria"))
        std::printf("  %-22s %s  %s\n", c.at("id").get<std::string>().c_str(), c.at("pass").get<bool>() ? "pass" : "FAIL",
                    c.at("description").get<std::string>().c_str());
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "model-recovery") {
        std::cout << "sup-error " << format_number(m.at("sup_error").get<double>()) << " (refined "
                  << format_number(m.at("sup_error_refined").get<double>()) << ")\n";
        std::cout << "non-contact intervals";
        const auto& e = j.at("series").at("interval_endpoints");
        for (std::size_t k = 0; k + 1 < e.size(); k += 2)
            std::cout << " (" << format_number(e[k].get<double>()) << ", " << format_number(e[k + 1].get<double>()) << ")";
        std::cout << '\n';
    }
    if (kind == "frequency-scan")
        std::cout << "l " << format_number(m.at("l").get<double>()) << "  m " << m.at("m").get<double>() << "  mismatch "
                  << format_number(m.at("mismatch").get<double>()) << '\n';
    std::cout << "metrics\n";
    for (const auto& [key, value] : m.items())
        std::printf("  %-28s %s\n", key.c_str(), value.is_number() ? format_number(value.get<double>()).c_str() : "null");
    for (const auto& a : j.at("artifacts")) {
        const auto name = a.get<std::string>();
        if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") std::cout << "plot data " << (dir / name).string() << '\n';
    }
    return 0;
}

int fail(const std::string& kind, const std::string& message) {
    json e;
    e["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << e.dump() << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thin obstacle, Beltrami, frequency, hodograph and free-boundary construction laboratory"};
    app.require_subcommand(1);

    auto* thin = app.add_subcommand("solve-thin-obstacle", "Harmonic thin obstacle problem on the unit half-disk");
    int thin_n = 128;
    std::string thin_data = "model", thin_out = "thin_obstacle";
    double thin_tol = 1e-10, thin_radius = 1.0;
    thin->add_option("--n", thin_n, "Nodes per unit length");
    thin->add_option("--data", thin_data, "'model' for Re z^{3/2} or a .fld file with boundary data");
    thin->add_option("--radius", thin_radius, "Radius of the half-disk");
    thin->add_option("--tol", thin_tol, "Solver tolerance");
    thin->add_option("--out", thin_out, "Output prefix");

    auto* two = app.add_subcommand("two-membrane", "Nonlinear two-membrane problem with eps Re z^{3/2} difference data");
    int two_n = 64;
    double two_eps = 0.01, two_tol = 1e-10;
    std::string two_F = "hodograph", two_out = "two_membrane";
    two->add_option("--n", two_n, "Nodes per unit length");
    two->add_option("--nonlinearity", two_F, "quadratic, hodograph or two-phase");
    two->add_option("--eps", two_eps, "Amplitude of the difference data");
    two->add_option("--tol", two_tol, "Solver tolerance");
    two->add_option("--out", two_out, "Output prefix");

    auto* bel = app.add_subcommand("beltrami", "Normalised quasiconformal map for a constant coefficient matrix");
    std::vector<double> bel_matrix{2.0, 0.0, 0.5};
    int bel_n = 512;
    double bel_l = 4.0;
    std::string bel_out = "beltrami";
    bel->add_option("--matrix", bel_matrix, "m11 m12 m22")->expected(3);
    bel->add_option("--n", bel_n, "Periodic grid points per axis");
    bel->add_option("--length", bel_l, "Periodic box side");
    bel->add_option("--out", bel_out, "Output prefix");

    auto* freq = app.add_subcommand("frequency", "Frequency and Weiss profile of a field");
    std::string freq_field = "model", freq_out = "frequency";
    int freq_n = 128;
    double freq_k = 1.5, freq_k0 = 4.0, freq_rmin = 0.1, freq_rmax = 0.5;
    int freq_radii = 8;
    freq->add_option("--field", freq_field, "'model' for Re z^{3/2} or a .fld file");
    freq->add_option("--n", freq_n, "Nodes per unit length for the model field");
    freq->add_option("--k", freq_k, "Homogeneity k");
    freq->add_option("--k0", freq_k0, "Truncation level k0");
    freq->add_option("--r-min", freq_rmin, "Smallest radius");
    freq->add_option("--r-max", freq_rmax, "Largest radius");
    freq->add_option("--radii", freq_radii, "Number of geometrically spaced radii");
    freq->add_option("--out", freq_out, "Output prefix");

    auto* hod = app.add_subcommand("hodograph", "Classical hodograph transform of a field increasing in y");
    std::string hod_field, hod_out = "hodograph";
    double hod_scale = 1.0;
    hod->add_option("--field", hod_field, "Input .fld file")->required();
    hod->add_option("--scale", hod_scale, "Divide the field by this before inverting");
    hod->add_option("--out", hod_out, "Output prefix");

    auto* ext = app.add_subcommand("extend-boundary", "Construct a one-phase solution with a prescribed free boundary");
    std::string ext_curve = "catenary", ext_out = "boundary";
    double ext_radius = 0.0, ext_half = 0.3, ext_h = 1.0 / 400, ext_ymin = -0.05, ext_ymax = 0.15;
    ext->add_option("--curve", ext_curve, "flat, catenary, parabola or a coefficient file");
    ext->add_option("--radius", ext_radius, "Series radius (default: the working radius)");
    ext->add_option("--half-width", ext_half, "Half width of the x-range");
    ext->add_option("--spacing", ext_h, "Grid spacing");
    ext->add_option("--y-min", ext_ymin, "Lowest grid row");
    ext->add_option("--y-max", ext_ymax, "Highest grid row");
    ext->add_option("--out", ext_out, "Output prefix");

    auto* run = app.add_subcommand("run", "Run a scenario config");
    std::string run_config, run_out;
    run->add_option("config", run_config, "Scenario config file")->required();
    run->add_option("--out", run_out, "Output directory (default: runs/<config stem>)");

    auto* rep = app.add_subcommand("report", "Summarise a completed run");
    std::string rep_dir;
    rep->add_option("dir", rep_dir, "Run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*thin) {
            const auto data = load_or_model(thin_data, thin_n);
            SolverOptions opt;
            opt.tol = thin_tol;
            auto [w, r] = solve_thin_obstacle({CornerCoefficients::identity(data.spec), data, thin_radius}, opt);
            write_fld(with_suffix(thin_out, ".fld"), w);
            json j;
            j["anchors"] = {"harmonic thin obstacle problem"};
            j["converged"] = r.converged;
            j["iterations"] = r.iterations;
            j["residual"] = r.residual;
            j["complementarity"] = r.complementarity;
            j["energy"] = r.energy;
            j["omega"] = r.omega;
            j["non_contact_intervals"] = intervals_json(contact_intervals(w, 1e-6 * w.max_abs()));
            if (thin_data == "model") {
                double e = 0.0;
                for (std::size_t k = 0; k < w.values.size(); ++k) e = std::max(e, std::abs(w.values[k] - data.values[k]));
                j["sup_error"] = e;
            }
            write_json(with_suffix(thin_out, ".json"), j);
            return r.converged ? 0 : 3;
        }
        if (*two) {
            Config c;
            c.set("kind", "two-membrane-refinement");
            const auto s = half_square(two_n);
            const auto F = nonlinearity_by_name(two_F);
            const auto bv = ScalarField::from_function(s, [](double x, double y) { return 0.2 * x + 0.1 * y; });
            const auto model = load_or_model("model", two_n);
            auto bu = bv;
            for (std::size_t k = 0; k < bu.values.size(); ++k) bu.values[k] += two_eps * model.values[k];
            SolverOptions opt;
            opt.tol = two_tol;
            const auto r = solve_two_membrane(F, bu, bv, 1.0, opt);
            auto d = r.u;
            for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] -= r.v.values[k];
            write_fld(with_suffix(two_out, "_u.fld"), r.u);
            write_fld(with_suffix(two_out, "_v.fld"), r.v);
            json j;
            j["anchors"] = {"nonlinear thin two-membrane problem"};
            j["nonlinearity"] = F.name();
            j["converged"] = r.report.converged;
            j["newton_steps"] = r.newton_steps;
            j["iterations"] = r.report.iterations;
            j["residual"] = r.report.residual;
            j["complementarity"] = r.report.complementarity;
            j["non_contact_intervals"] = intervals_json(contact_intervals(d, 1e-6 * d.max_abs()));
            write_json(with_suffix(two_out, ".json"), j);
            return r.report.converged ? 0 : 3;
        }
        if (*bel) {
            const auto M = MatrixField::constant(half_square(64), bel_matrix[0], bel_matrix[1], bel_matrix[2]);
            const auto pair = reflect_coefficients(beltrami_from_matrix(normalize_det(M).M), periodic_grid(bel_n, bel_l));
            const auto q = solve_beltrami(pair);
            write_complex_fld(with_suffix(bel_out, "_f"), q.spec, q.f);
            json j;
            j["anchors"] = {"Beltrami coefficients of a coefficient matrix", "normalised quasiconformal solution"};
            j["k_ell"] = q.k_ell;
            j["converged"] = q.converged;
            j["iterations"] = q.iterations;
            j["contraction_rate"] = q.contraction_rate;
            j["symmetry_defect"] = q.symmetry_defect;
            j["jacobian_positive"] = q.jacobian_positive;
            j["K_est"] = q.K_est;
            j["delta_est"] = q.delta_est;
            j["c_est"] = q.c_est;
            j["update_norms"] = q.update_norms;
            write_json(with_suffix(bel_out, ".json"), j);
            return q.converged ? 0 : 3;
        }
        if (*freq) {
            const auto w = load_or_model(freq_field, freq_n);
            std::vector<double> radii;
            for (int k = 0; k < freq_radii; ++k)
                radii.push_back(freq_rmin * std::pow(freq_rmax / freq_rmin, k / std::max(1.0, freq_radii - 1.0)));
            const auto p = frequency_profile(w, WeissConstants::make(freq_k, freq_k0), radii);
            write_profile_csv(with_suffix(freq_out, ".csv").string(), p);
            json j;
            j["anchors"] = {"Almgren frequency", "Weiss energy", "branch classification"};
            j["l"] = p.l;
            j["m"] = p.m;
            j["mismatch"] = p.mismatch;
            j["branch"] = p.branch;
            j["gamma_est"] = p.gamma_est;
            j["infinite_order"] = p.infinite_order;
            j["r"] = p.r;
            j["N"] = p.N;
            j["W"] = p.W;
            write_json(with_suffix(freq_out, ".json"), j);
            return 0;
        }
        if (*hod) {
            const auto u = read_fld(hod_field);
            const auto r = classical_hodograph(u, hod_scale);
            const auto id = hodograph_identities(u, r);
            const auto e = hodograph_energy_check(u, r);
            write_fld(with_suffix(hod_out, "_uprime.fld"), r.uprime);
            write_fld(with_suffix(hod_out, "_utilde.fld"), r.utilde);
            json j;
            j["anchors"] = {"hodograph transform", "energy transformation"};
            j["margin"] = r.margin;
            j["transport"] = id.transport;
            j["jacobian"] = id.jacobian;
            j["round_trip"] = id.round_trip;
            j["energy"] = {{"lhs", e.lhs}, {"rhs", e.rhs}, {"defect", e.defect}, {"lhs_tilde", e.lhs_tilde}, {"rhs_tilde", e.rhs_tilde}};
            write_json(with_suffix(hod_out, ".json"), j);
            return 0;
        }
        if (*ext) {
            Config c;
            c.set("kind", "construct-boundary");
            c.set("curve", ext_curve);
            c.set("half_width", format_number(ext_half));
            c.set("h", format_number(ext_h));
            c.set("y_min", format_number(ext_ymin));
            c.set("y_max", format_number(ext_ymax));
            if (ext_radius > 0.0) c.set("radius", format_number(ext_radius));
            const auto r = construct_boundary(c);
            std::vector<std::string> artifacts;
            for (const auto& [name, field] : r.fields) {
                if (name == "u_signed") continue;
                const auto p = with_suffix(ext_out, "_" + name + ".fld");
                write_fld(p, field);
                artifacts.push_back(p.filename().string());
            }
            for (const auto& t : r.tables) {
                const auto p = with_suffix(ext_out, "_" + t.name + ".csv");
                write_csv(p, t.header, t.rows);
                artifacts.push_back(p.filename().string());
            }
            write_json(with_suffix(ext_out, ".json"), scenario_json(r, artifacts));
            return r.pass() ? 0 : 3;
        }
        if (*run) {
            const auto cfg = Config::load(run_config);
            const fs::path dir = run_out.empty() ? fs::path("runs") / fs::path(run_config).stem() : fs::path(run_out);
            return persist(run_scenario(cfg), dir);
        }
        if (*rep) return report(rep_dir);
    } catch (const Error& e) {
        return fail(to_string(e.kind()), e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return 0;
}
