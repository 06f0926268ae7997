#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>

#include "fbl/beltrami.hpp"
#include "fbl/obstacle.hpp"
#include "fbl/scenarios.hpp"
#include "oracles.hpp"

using namespace fbl;

namespace {

int failures = 0;

void line(const std::string& id, bool pass, const std::string& detail) {
    std::printf("%-6s %s  %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Config config(const std::string& kind, const std::vector<std::pair<std::string, std::string>>& extra = {}) {
    Config c;
    c.set("kind", kind);
    for (const auto& [k, v] : extra) c.set(k, v);
    return c;
}

bool criterion(const ScenarioResult& r, const std::string& id) {
    for (const auto& c : r.criteria)
        if (c.id == id) return c.pass;
    return false;
}

// Runs one check; exceptions count as failures.
void guarded(const std::string& ids, const std::function<void()>& check) {
    try {
        check();
    } catch (const std::exception& e) {
        for (std::size_t a = 0; a < ids.size();) {
            const auto b = std::min(ids.find(',', a), ids.size());
            line(ids.substr(a, b - a), false, std::string("threw: ") + e.what());
            a = b + 1;
        }
    }
}

double sup_on_disk(const QuasiconformalMap& q, double r, const std::function<cplx(cplx)>& exact) {
    double e = 0.0;
    for (int j = 0; j < q.spec.ny; ++j)
        for (int i = 0; i < q.spec.nx; ++i) {
            const cplx z(q.spec.x(i), q.spec.y(j));
            if (std::abs(z) > r) continue;
            e = std::max(e, std::abs(q.f[q.spec.index(i, j)] - exact(z)));
        }
    return e;
}

Sym2 series_membrane(Vec2 p, Vec2 q) {
    using J = oracle::Jet<20>;
    const auto x = J::constant(q[0]) + (p[0] - q[0]) * J::variable(0.0);
    const auto y1 = J::constant(1.0 + q[1]) + (p[1] - q[1]) * J::variable(0.0);
    const auto one = J::constant(1.0);
    const J hxx = one / y1;
    const J hxy = J::constant(0.0) - x / (y1 * y1);
    const J hyy = (one + x * x) / (y1 * y1 * y1);
    Sym2 m{0.0, 0.0, 0.0};
    for (int k = 0; k < 20; ++k) {
        m[0] += hxx.c[k] / (k + 1);
        m[1] += hxy.c[k] / (k + 1);
        m[2] += hyy.c[k] / (k + 1);
    }
    return m;
}

void ac1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = model_recovery(config("model-recovery"));
    const double t = seconds_since(t0);
    line("AC-1", criterion(r, "AC-1") && t < 60.0,
         fmt("sup error %.3e", r.metric("sup_error")) + fmt(", ratio %.3f", r.metric("error_ratio")) +
             fmt(", intervals %.0f", r.metric("intervals")) + fmt(", left endpoint %.4f", r.metric("left_endpoint")) +
             fmt(", %.1f s", t));
}

void ac2_ac3() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = frequency_scan(config("frequency-scan"));
    const double t = seconds_since(t0);
    line("AC-2", criterion(r, "AC-2") && t < 30.0,
         fmt("N in [%.5f, ", r.metric("N_min")) + fmt("%.5f]", r.metric("N_max")) + fmt(", l %.5f", r.metric("l")) +
             fmt(", m %.0f", r.metric("m")) + fmt(", mismatch %.2e", r.metric("mismatch")) +
             fmt(", higher m %.0f", r.metric("higher_m")) + fmt(", %.1f s", t));
    line("AC-3", criterion(r, "AC-3"),
         fmt("W0(0.2) %.2e", r.metric("weiss0_r0.2")) + fmt(", W0(0.4) %.2e", r.metric("weiss0_r0.4")) +
             fmt(", a %.17g", r.metric("a_3/2")) + fmt(", b %.17g", r.metric("b_k0=2")));
}

void ac4() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = periodic_grid(512);
    const auto id = solve_beltrami({s, std::vector<cplx>(s.size()), std::vector<cplx>(s.size()), 0.0});
    const double e_id = sup_on_disk(id, 10.0, [](cplx z) { return z; });
    const auto pair = reflect_coefficients(beltrami_from_matrix(MatrixField::constant(half_square(256), 2.0, 0.0, 0.5)), s);
    const auto q = solve_beltrami(pair);
    const double e_lin = sup_on_disk(q, 0.5, [](cplx z) { return cplx(z.real(), 2.0 * z.imag()); });
    const double t = seconds_since(t0);
    const bool pass = id.converged && q.converged && e_id <= 1e-10 && e_lin <= 5e-3 && q.symmetry_defect <= 1e-8 &&
                      q.contraction_rate <= q.k_ell + 0.05 && t < 120.0;
    line("AC-4", pass,
         fmt("identity %.2e", e_id) + fmt(", linear map %.2e", e_lin) + fmt(", symmetry %.2e", q.symmetry_defect) +
             fmt(", rate %.4f", q.contraction_rate) + fmt(" vs k %.4f", q.k_ell) + fmt(", %.1f s", t));
}

void ac5() {
    const auto r = straighten(config("straighten"));
    line("AC-5", criterion(r, "AC-5"),
         fmt("pullback residual %.3e", r.metric("pullback_residual")) +
             fmt(", intervals %.0f", r.metric("intervals_original")) + fmt(" -> %.0f", r.metric("intervals_pullback")));
}

void ac6() {
    const auto F = hodograph_lagrangian();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    double series = 0.0, identity = 0.0;
    int tested = 0;
    while (tested < 100) {
        const Vec2 q{U(rng), U(rng)};
        const Vec2 p{q[0] + 0.6 * (1 + q[1]) * U(rng), q[1] + 0.6 * (1 + q[1]) * U(rng)};
        if (!F.admissible(p[0], p[1]) || !F.admissible(q[0], q[1])) continue;
        if (std::hypot(p[0] - q[0], p[1] - q[1]) > 0.3 * (1 + q[1])) continue;
        ++tested;
        const auto M = membrane_matrix(F, p, q);
        const auto S = series_membrane(p, q);
        for (int e = 0; e < 3; ++e) series = std::max(series, std::abs(M[e] - S[e]));
        const auto gp = F.grad(p[0], p[1]), gq = F.grad(q[0], q[1]);
        const double dx = p[0] - q[0], dy = p[1] - q[1];
        identity = std::max(identity, std::abs(gp[0] - gq[0] - (M[0] * dx + M[1] * dy)));
        identity = std::max(identity, std::abs(gp[1] - gq[1] - (M[1] * dx + M[2] * dy)));
    }
    line("AC-6", series <= 1e-8 && identity <= 1e-10,
         fmt("series %.2e", series) + fmt(", fundamental identity %.2e", identity) + " over 100 points");
}

void ac7_ac8() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto flat = construct_boundary(config("construct-boundary", {{"curve", "flat"}}));
    const auto cat = construct_boundary(config("construct-boundary", {{"curve", "catenary"}}));
    const double t = seconds_since(t0);
    line("AC-7", criterion(flat, "AC-7") && criterion(cat, "AC-7") && t < 60.0,
         fmt("flat error %.2e", flat.metric("flat_error")) + fmt(", pde %.2e", cat.metric("pde_residual")) +
             fmt(", bc %.2e", cat.metric("bc_residual")) + fmt(", gradient %.2e", cat.metric("fb_residual")) +
             fmt(", boundary %.2e", cat.metric("geometry_defect")) + fmt(", %.1f s", t));
    line("AC-8", criterion(cat, "AC-8"),
         fmt("cauchy-riemann %.2e", cat.metric("cauchy_riemann_defect")) + fmt(", eta %.2e", cat.metric("eta_defect")) +
             fmt(", gradient product %.2e", cat.metric("gradient_product_defect")) +
             fmt(", Im P %.2e", cat.metric("imP_defect")));
}

void ac9() {
    const auto r = two_membrane_refinement(config("two-membrane-refinement"));
    std::string counts;
    for (const auto& [name, v] : r.series)
        if (name == "interval_counts")
            for (double c : v) counts += (counts.empty() ? "" : ", ") + fmt("%.0f", c);
    line("AC-9", criterion(r, "AC-9"), "interval counts [" + counts + "]");
}

void ac10() {
    const auto r = two_phase_hodograph_scenario(config("two-phase-hodograph"));
    line("AC-10", criterion(r, "AC-10"),
         fmt("energy defect %.2e", r.metric("defect_u")) + fmt(", ratio %.3f", r.metric("defect_ratio")));
}

}  // namespace

int main() {
    guarded("AC-1", ac1);
    guarded("AC-2,AC-3", ac2_ac3);
    guarded("AC-4", ac4);
    guarded("AC-5", ac5);
    guarded("AC-6", ac6);
    guarded("AC-7,AC-8", ac7_ac8);
    guarded("AC-9", ac9);
    guarded("AC-10", ac10);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
