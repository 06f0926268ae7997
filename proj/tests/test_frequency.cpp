#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "fbl/field_ops.hpp"
#include "fbl/frequency.hpp"
#include "fbl/obstacle.hpp"
#include "oracles.hpp"

using namespace fbl;

namespace {

ScalarField field(int n, const std::function<double(double, double)>& g) {
    return ScalarField::from_function(half_square(n), g);
}

std::vector<double> geometric(double lo, double hi, int count) {
    std::vector<double> r;
    for (int k = 0; k < count; ++k) r.push_back(lo * std::pow(hi / lo, k / (count - 1.0)));
    return r;
}

ScalarField model_solution(int n) {
    const auto s = half_square(n);
    SolverOptions o;
    o.tol = 1e-10;
    return solve_thin_obstacle({CornerCoefficients::identity(s), ScalarField::from_function(s, oracle::re_pow(1.5)), 1.0}, o)
        .first;
}

}  // namespace

TEST_CASE("Weiss constants follow their defining formulas") {
    const auto c = WeissConstants::make(1.5, 2.0);
    CHECK(c.a() == 6.0);
    CHECK(c.b() == 12.0);
    CHECK(WeissConstants::make(1.5, 4.0).b() == 20.0);
    CHECK(WeissConstants::make(1.0, 3.0, 3).a() == 6.0);
    CHECK_THROWS_AS(WeissConstants::make(2.0, 2.0), Error);
    CHECK_THROWS_AS(WeissConstants::make(0.5, 1.5), Error);
    CHECK_THROWS_AS(WeissConstants::make(0.0, 3.0), Error);
}

TEST_CASE("weiss0 vanishes on homogeneous harmonic fields") {
    const auto w = field(256, oracle::re_pow(1.5));
    for (double r : {0.2, 0.4}) CHECK(std::abs(weiss0(w, 1.5, r)) <= 1e-3);
    const auto y = field(64, [](double, double y) { return y; });
    CHECK(std::abs(weiss0(y, 1.0, 0.5)) <= 1e-3);
    const auto zero = field(32, [](double, double) { return 0.0; });
    CHECK(weiss0(zero, 1.5, 0.5) == 0.0);
    CHECK(weiss(zero, WeissConstants::make(1.5, 2.0), 0.5) == 0.0);
}

TEST_CASE("weiss0 is scale-free on homogeneous fields") {
    const auto w = field(256, oracle::re_pow(1.5));
    const double ref = weiss0(w, 1.5, 0.5);
    for (double r : {0.15, 0.25, 0.35}) CHECK(std::abs(weiss0(w, 1.5, r) - ref) <= 1e-3);
}

TEST_CASE("weiss agrees with a fine independent quadrature") {
    const auto c = WeissConstants::make(1.5, 2.0);
    const double r = 0.25;
    const double value = weiss(field(256, oracle::re_pow(1.5)), c, r);
    // exact: int |grad w|^2 = k/r int w^2 and int_{half circle} w^2 = r^4 int_0^pi cos^2(3t/2) dt
    const double circle = std::pow(r, 4) * oracle::gauss([](double t) { return std::pow(std::cos(1.5 * t), 2); },
                                                         0.0, std::numbers::pi, 256);
    const double D = 1.5 / r * circle;
    const double exact = std::exp(6.0 * std::sqrt(r)) * std::pow(r, -3.0) * (D - 1.5 * (1.0 - 12.0 * std::sqrt(r)) / r * circle);
    CHECK(std::abs(value - exact) <= 1e-3 * std::abs(exact));
}

TEST_CASE("weiss tends to zero from above on homogeneous fields") {
    const auto c = WeissConstants::make(1.5, 2.0);
    const auto w = field(1024, oracle::re_pow(1.5));
    double prev = std::numeric_limits<double>::infinity();
    for (int e = 2; e <= 7; ++e) {
        const double v = weiss(w, c, std::ldexp(1.0, -e));
        CHECK(v >= 0.0);
        if (e >= 4) CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("frequency profile of the model solution") {
    const auto w = model_solution(128);
    const auto radii = geometric(0.1, 0.5, 8);
    const auto p = frequency_profile(w, WeissConstants::make(1.5, 4.0), radii);
    for (double N : p.N) {
        CHECK(N >= 1.48);
        CHECK(N <= 1.52);
    }
    for (std::size_t k = 0; k + 1 < p.Ntrunc.size(); ++k) CHECK(p.Ntrunc[k] <= p.Ntrunc[k + 1] + 1e-3);
    for (double v : p.Ntrunc) CHECK(v <= 4.0);
    for (std::size_t k = 0; k + 1 < p.W.size(); ++k) CHECK(p.W[k] <= p.W[k + 1] + 1e-3);
    CHECK(p.m == 1);
    CHECK(p.mismatch <= 0.02);
    CHECK(p.branch);
    CHECK_FALSE(p.infinite_order);
    CHECK(p.gamma_est == doctest::Approx(1.5).epsilon(0.02));
}

TEST_CASE("frequency profile on default radii of a solver output") {
    const auto w = model_solution(128);
    const auto c = WeissConstants::make(1.5, 2.0);
    const auto p = frequency_profile(w, c, default_radii(w.spec));
    CHECK(p.r.front() == doctest::Approx(2.0 / 128).epsilon(0.45));
    CHECK(p.r.back() == doctest::Approx(0.5));
    for (std::size_t k = 0; k + 1 < p.W.size(); ++k) CHECK(p.W[k] <= p.W[k + 1] + 1e-3);
    CHECK_FALSE(p.infinite_order);
    CHECK(p.m == 1);
}

TEST_CASE("degree one and higher branch fields") {
    const auto radii = geometric(0.1, 0.5, 8);
    const auto c = WeissConstants::make(1.5, 4.0);
    const auto y = frequency_profile(field(64, [](double, double y) { return y; }), c, radii);
    for (double N : y.N) CHECK(std::abs(N - 1.0) <= 1e-3);
    CHECK_FALSE(y.branch);

    const auto w = frequency_profile(field(256, oracle::re_pow(3.5)), c, radii);
    CHECK(std::abs(w.l - 3.5) <= 0.05);
    CHECK(w.m == 2);
    CHECK(w.branch);
}

TEST_CASE("frequency is invariant under positive scaling") {
    const auto radii = geometric(0.1, 0.5, 8);
    const auto c = WeissConstants::make(1.5, 4.0);
    auto w = field(128, oracle::re_pow(1.5));
    const auto a = frequency_profile(w, c, radii);
    for (auto& v : w.values) v *= 7.25;
    const auto b = frequency_profile(w, c, radii);
    for (std::size_t k = 0; k < a.N.size(); ++k) {
        CHECK(std::abs(a.N[k] - b.N[k]) <= 1e-13 * a.N[k]);
        CHECK(std::abs(a.Ntrunc[k] - b.Ntrunc[k]) <= 1e-13 * a.Ntrunc[k]);
    }
}

TEST_CASE("frequency profile flags infinite order and validates input") {
    const auto radii = geometric(0.1, 0.5, 8);
    const auto c = WeissConstants::make(1.5, 4.0);
    const auto p = frequency_profile(field(32, [](double, double) { return 0.0; }), c, radii);
    CHECK(p.infinite_order);
    CHECK_FALSE(p.branch);
    CHECK_THROWS_AS(frequency_profile(field(32, oracle::re_pow(1.5)), c, geometric(0.1, 0.5, 5)), Error);
    CHECK_THROWS_AS(frequency_profile(field(32, oracle::re_pow(1.5)), c, geometric(0.1, 1.5, 8)), Error);
}

TEST_CASE("blow-up rescalings") {
    const std::vector<double> radii = geometric(0.125, 0.5, 5);
    const auto w = field(512, oracle::re_pow(1.5));
    const auto same = blowup_check(w, 1.5, radii);
    CHECK(same.cauchy);
    for (double d : same.differences) CHECK(d <= 1e-4);

    const auto two = field(512, [](double x, double y) { return oracle::re_pow(1.5)(x, y) + oracle::re_pow(3.5)(x, y); });
    const auto b = blowup_check(two, 1.5, radii);
    CHECK(b.cauchy);
    CHECK(std::abs(b.difference_exponent - 2.0) <= 0.2);
    CHECK(b.C > 0.0);

    const auto wrong = blowup_check(w, 1.0, radii);
    CHECK_FALSE(wrong.cauchy);
    CHECK_THROWS_AS(blowup_check(w, 0.0, radii), Error);
}

TEST_CASE("decay bounds") {
    const auto w = field(512, oracle::re_pow(1.5));
    const auto radii = default_radii(w.spec);
    const auto ok = decay_bounds(w, 1.5, radii);
    CHECK(ok.pass);
    CHECK(ok.ratio <= 1.05);
    const auto bad = decay_bounds(w, 1.0, radii);
    CHECK_FALSE(bad.pass);
    CHECK(bad.ratio > 100.0);
    const auto zero = decay_bounds(field(64, [](double, double) { return 0.0; }), 1.5, default_radii(half_square(64)));
    CHECK(zero.eta_lower == 0.0);
    CHECK_FALSE(zero.pass);
}

TEST_CASE("harmonic thin obstacle residual check") {
    const auto w = model_solution(128);
    const auto r = harmonic_obstacle_residual(w, 0.5);
    CHECK(r.residual <= 1e-6);
    CHECK(r.intervals == 1);
    CHECK(r.reference_intervals == 1);

    // harmonic with its own data, but the slit flux has the wrong sign where y vanishes
    const auto y = field(64, [](double, double y) { return y; });
    CHECK(harmonic_obstacle_residual(y, 0.5).residual > 0.1);

    CHECK_THROWS_AS(harmonic_obstacle_residual(w, 2.0), Error);
}

TEST_CASE("profile csv") {
    const auto p = frequency_profile(field(64, oracle::re_pow(1.5)), WeissConstants::make(1.5, 4.0), geometric(0.1, 0.5, 8));
    const std::string path = "frequency_profile_test.csv";
    write_profile_csv(path, p);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "r,H,D,N,Ntrunc,W0,W");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 8);
    std::remove(path.c_str());
}
