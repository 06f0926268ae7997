#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fbl/boundary.hpp"
#include "oracles.hpp"

using namespace fbl;

namespace {

// Taylor coefficients of 1 / sqrt(1 + s^2)
double inverse_root_coefficient(int n) {
    if (n % 2) return 0.0;
    const int k = n / 2;
    double b = 1.0;
    for (int m = 1; m <= k; ++m) b *= -(2.0 * m - 1.0) / (2.0 * m);
    return b;
}

double max_abs_diff(const ScalarField& a, const std::function<double(double, double)>& g) {
    double e = 0.0;
    for (int j = 0; j < a.spec.ny; ++j)
        for (int i = 0; i < a.spec.nx; ++i) e = std::max(e, std::abs(a(i, j) - g(a.spec.x(i), a.spec.y(j))));
    return e;
}

}  // namespace

TEST_CASE("arclength of standard curves") {
    const auto c = AnalyticCurve::catenary();
    for (double x : {0.05, 0.3, 0.8}) {
        CHECK(std::abs(arclength(c, x) - std::sinh(x)) <= 1e-12);
        CHECK(arclength(c, -x) == doctest::Approx(-arclength(c, x)).epsilon(1e-14));
    }
    CHECK(arclength(c, 0.3) == doctest::Approx(0.3045202934471426).epsilon(1e-13));
    CHECK(arclength(AnalyticCurve::flat(), 0.7) == doctest::Approx(0.7).epsilon(1e-14));
    const auto p = AnalyticCurve::parabola(0.1);
    const double ref = oracle::gauss([](double t) { return std::sqrt(1.0 + 0.04 * t * t); }, 0.0, 0.4, 16);
    CHECK(std::abs(arclength(p, 0.4) - ref) <= 1e-13);
    CHECK_THROWS_AS(arclength(c, 1.0), Error);
    CHECK(inverse_arclength(c, std::sinh(0.4)) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("curve construction and validation") {
    const auto c = AnalyticCurve::catenary();
    CHECK(c.rho() == doctest::Approx(std::asinh(1.0)));
    CHECK(c.taylor().size() == static_cast<std::size_t>(taylor_degree + 1));
    CHECK(c.taylor()[2] == doctest::Approx(0.5));
    CHECK(c.taylor()[4] == doctest::Approx(1.0 / 24.0));
    CHECK(c.taylor()[3] == 0.0);
    CHECK(AnalyticCurve::parabola(0.1).rho() == 1.0);
    CHECK(AnalyticCurve::parabola(2.0).rho() == doctest::Approx(0.25));
    CHECK_THROWS_AS(AnalyticCurve::parabola(0.0), Error);
    CHECK_THROWS_AS(AnalyticCurve::polynomial({0.0, 0.5, 1.0}), Error);
    CHECK_THROWS_AS(AnalyticCurve::polynomial({1.0, 0.0, 1.0}), Error);
    CHECK_THROWS_AS(AnalyticCurve("bad", {}, 1.0, [](double x) { return x * x; }, [](double x) { return 2.0 * x; }), Error);
    CHECK(AnalyticCurve::by_name("catenary").name() == "catenary");
    CHECK(AnalyticCurve::by_name("flat").name() == "flat");
}

TEST_CASE("polynomial curve from a coefficient file") {
    const std::string path = "curve_test.cfg";
    {
        std::ofstream out(path);
        out << "# cubic perturbation of a parabola\ncoefficients = 0, 0, 0.2, 0.05\n";
    }
    const auto p = AnalyticCurve::by_name(path);
    CHECK(p.name() == "polynomial");
    CHECK(p.taylor()[2] == 0.2);
    CHECK(p.taylor()[3] == 0.05);
    CHECK(p.f(0.5) == doctest::Approx(0.2 * 0.25 + 0.05 * 0.125));
    // |f'| = |0.4 x + 0.15 x^2| <= 1 holds on all of [-1, 1]
    CHECK(p.rho() == doctest::Approx(1.0).epsilon(1e-3));
    {
        std::ofstream out(path);
        out << "coefficients = 0, 0, 1\nradius = 0.25\n";
    }
    CHECK(AnalyticCurve::from_file(path).rho() == 0.25);
    {
        std::ofstream out(path);
        out << "radius = 0.25\n";
    }
    CHECK_THROWS_AS(AnalyticCurve::from_file(path), Error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(AnalyticCurve::from_file("missing_curve.cfg"), Error);
}

TEST_CASE("alpha and beta samplers of the catenary") {
    const auto ab = coefficients_alpha_beta(AnalyticCurve::catenary());
    CHECK(ab.s_min == doctest::Approx(-1.0));
    CHECK(ab.s_max == doctest::Approx(1.0));
    for (double s : {-0.9, -0.3, 0.0, 0.25, 0.7}) {
        CHECK(std::abs(ab.alpha(s) - s / std::sqrt(1.0 + s * s)) <= 1e-12);
        CHECK(std::abs(ab.beta(s) - 1.0 / std::sqrt(1.0 + s * s)) <= 1e-12);
    }
    CHECK(ab.circle_defect <= 1e-10);
    CHECK_THROWS_AS(ab.alpha(1.5), Error);
}

TEST_CASE("complex gradient series of the catenary") {
    const auto c = AnalyticCurve::catenary();
    const auto q = extend_Q(c, 0.4);
    // Q(s) = (s - i) / sqrt(1 + s^2)
    for (int n = 0; n <= taylor_degree; ++n) {
        const double re = n >= 1 ? inverse_root_coefficient(n - 1) : 0.0;
        const double im = -inverse_root_coefficient(n);
        CHECK(std::abs(q.c[n] - cplx(re, im)) <= 1e-9);
        // even coefficients are imaginary, odd ones real
        if (n % 2) CHECK(q.c[n].imag() == 0.0);
        else CHECK(q.c[n].real() == 0.0);
    }
    CHECK(q.convergence == doctest::Approx(1.0).epsilon(0.1));
    CHECK(q.tail <= series_tail_tolerance);
    CHECK(q.boundary_defect <= 1e-10);
    CHECK(q.chebyshev_defect <= 1e-9);
    const double w = working_radius(c);
    CHECK(w > 0.3);
    CHECK(w <= 0.5 * q.convergence + 1e-12);
    CHECK_THROWS_AS(extend_Q(c, 0.9), Error);
}

TEST_CASE("complex gradient series of the flat curve") {
    const auto q = extend_Q(AnalyticCurve::flat(), 0.5);
    CHECK(q.c[0] == cplx(0.0, -1.0));
    for (int n = 1; n <= taylor_degree; ++n) CHECK(q.c[n] == cplx(0.0, 0.0));
    CHECK(q.tail == 0.0);
    CHECK(working_radius(AnalyticCurve::flat()) == doctest::Approx(1.0));
}

TEST_CASE("integrated forms of the flat chart") {
    const ConformalChart chart(extend_Q(AnalyticCurve::flat(), 1.0));
    const auto forms = integrate_forms(chart, GridSpec{41, 21, -0.5, -0.25, 1.0 / 40});
    CHECK(max_abs_diff(forms.V, [](double x, double) { return -x; }) <= 1e-14);
    CHECK(max_abs_diff(forms.v, [](double, double y) { return y; }) <= 1e-14);
    CHECK(forms.gradient_defect <= 1e-9);
    CHECK(forms.laplacian_residual <= 1e-9);
}

TEST_CASE("integrated forms of the catenary chart") {
    const auto c = AnalyticCurve::catenary();
    const ConformalChart chart(extend_Q(c, working_radius(c)));
    const auto forms = integrate_forms(chart, GridSpec{201, 201, -0.25, -0.25, 1.0 / 400});
    CHECK(forms.gradient_defect <= 1e-8);
    CHECK(forms.laplacian_residual <= 1e-4);
    // on the real axis (-V, v) runs along the graph parametrised by arclength
    for (double s : {-0.2, 0.1, 0.25}) {
        const cplx w = chart.S(s);
        CHECK(std::abs(w.real() + std::asinh(s)) <= 1e-12);
        CHECK(std::abs(w.imag() - (std::sqrt(1.0 + s * s) - 1.0)) <= 1e-12);
    }
    // closed forms: loop integrals of dv = alpha dx + beta dy over random rectangles
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-0.25, 0.25);
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const double x0 = std::min(d(rng), 0.0), y0 = std::min(d(rng), 0.0);
        const double x1 = x0 + 0.1 + 0.1 * std::abs(d(rng)), y1 = y0 + 0.1 + 0.1 * std::abs(d(rng));
        auto alpha = [&](double x, double y) { return chart.Q(cplx(x, y)).real(); };
        auto beta = [&](double x, double y) { return -chart.Q(cplx(x, y)).imag(); };
        const double loop = oracle::gauss([&](double x) { return alpha(x, y0) - alpha(x, y1); }, x0, x1, 8) +
                            oracle::gauss([&](double y) { return beta(x1, y) - beta(x0, y); }, y0, y1, 8);
        worst = std::max(worst, std::abs(loop));
    }
    CHECK(worst <= 1e-12);
    CHECK_THROWS_AS(integrate_forms(chart, GridSpec{41, 41, -0.5, -0.5, 1.0 / 40}), Error);
}

TEST_CASE("constructor reproduces the flat solution") {
    const auto f = AnalyticCurve::flat();
    const ConformalChart chart(extend_Q(f, working_radius(f)));
    const auto rep = invert_to_solution(chart, f, GridSpec{81, 41, -0.4, -0.2, 1.0 / 100}, 0.3);
    CHECK(max_abs_diff(rep.u, [](double, double y) { return std::max(y, 0.0); }) <= 1e-10);
    CHECK(max_abs_diff(rep.u_signed, [](double, double y) { return y; }) <= 1e-10);
    CHECK(max_abs_diff(rep.U, [](double x, double) { return -x; }) <= 1e-10);
    CHECK(rep.pde_residual <= 1e-10);
    CHECK(rep.bc_residual <= 1e-10);
    CHECK(rep.fb_residual <= 1e-10);
    CHECK(rep.geometry_defect <= 1e-10);
    CHECK(rep.masked == 0);
}

TEST_CASE("constructor realises the catenary as a free boundary") {
    const auto f = AnalyticCurve::catenary();
    const ConformalChart chart(extend_Q(f, working_radius(f)));
    const auto rep = invert_to_solution(chart, f, GridSpec{241, 81, -0.3, -0.05, 1.0 / 400}, 0.3);
    CHECK(rep.masked == 0);
    CHECK(rep.pde_residual <= 1e-4);
    CHECK(rep.bc_residual <= 1e-4);
    CHECK(rep.fb_residual <= 1e-4);
    CHECK(rep.geometry_defect <= 1e-6);
    CHECK(rep.composition_defect <= 1e-8);
    CHECK(rep.dS0_defect <= 1e-8);
    CHECK(rep.xs.size() == 241);
    for (std::size_t k = 0; k < rep.xs.size(); ++k) CHECK(std::abs(rep.g[k] - (std::cosh(rep.xs[k]) - 1.0)) <= 1e-6);
    for (int n = 0; n <= 12; ++n) CHECK(std::abs(rep.recovered_taylor[n] - f.taylor()[n]) <= 1e-10);
}

TEST_CASE("constructor realises a parabola") {
    const auto f = AnalyticCurve::parabola(0.1);
    const ConformalChart chart(extend_Q(f, working_radius(f)));
    const auto rep = invert_to_solution(chart, f, GridSpec{161, 61, -0.2, -0.05, 1.0 / 400}, 0.2);
    CHECK(rep.geometry_defect <= 1e-6);
    CHECK(rep.bc_residual <= 1e-4);
    CHECK(rep.fb_residual <= 1e-4);
    CHECK(rep.pde_residual <= 1e-4);
}

TEST_CASE("constructor rejects grids beyond the working disk") {
    const auto f = AnalyticCurve::catenary();
    const ConformalChart chart(extend_Q(f, working_radius(f)));
    CHECK_THROWS_AS(invert_to_solution(chart, f, GridSpec{61, 61, -0.6, -0.3, 1.0 / 50}, 0.3), Error);
}
