#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "fbl/field_io.hpp"
#include "fbl/field_ops.hpp"
#include "oracles.hpp"

using namespace fbl;
using std::numbers::pi;

TEST_CASE("gradient is exact on affine fields") {
    const auto s = half_square(16);
    const auto f = ScalarField::from_function(s, [](double x, double y) { return 3.0 * x - 2.0 * y + 1.0; });
    const auto g = gradient(f);
    for (std::size_t k = 0; k < s.size(); ++k) {
        CHECK(g.dx.values[k] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(g.dy.values[k] == doctest::Approx(-2.0).epsilon(1e-12));
    }
}

TEST_CASE("gradient of y is (0, 1)") {
    const auto s = half_square(8);
    const auto g = gradient(ScalarField::from_function(s, [](double, double y) { return y; }));
    CHECK(g.dx.max_abs() < 1e-14);
    for (double v : g.dy.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("centred difference is exact on x^2") {
    const GridSpec s{21, 11, -1.0, 0.0, 0.1};
    const auto g = gradient(ScalarField::from_function(s, [](double x, double) { return x * x; }));
    for (int j = 1; j + 1 < s.ny; ++j)
        for (int i = 1; i + 1 < s.nx; ++i) CHECK(std::abs(g.dx(i, j) - 2.0 * s.x(i)) < 1e-12);
}

TEST_CASE("gradient of Re z^{3/2} near (0.5, 0.5)") {
    const auto s = half_square(256);
    const auto f = ScalarField::from_function(s, oracle::re_pow(1.5));
    const auto g = gradient(f);
    const int i = 256 + 128, j = 128;
    const auto d = 1.5 * std::sqrt(std::complex<double>(0.5, 0.5));
    CHECK(std::abs(g.dx(i, j) - d.real()) < 1e-3);
    CHECK(std::abs(g.dy(i, j) + d.imag()) < 1e-3);
}

TEST_CASE("degenerate grids are rejected") {
    const GridSpec s{2, 5, 0.0, 0.0, 0.1};
    CHECK_THROWS_AS(gradient(ScalarField(s)), Error);
    const GridSpec z{5, 5, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(z.validate(), Error);
}

TEST_CASE("height and energy of y on the unit half-disk") {
    const auto s = half_square(128);
    const auto f = ScalarField::from_function(s, [](double, double y) { return y; });
    CHECK(height(f, 1.0) == doctest::Approx(pi / 2).epsilon(1e-4));
    CHECK(dirichlet_energy(f, 1.0) == doctest::Approx(pi / 2).epsilon(1e-4));
    const ScalarField zero(s);
    CHECK(height(zero, 0.7) == 0.0);
    CHECK(dirichlet_energy(ScalarField(s, 2.5), 0.7) == doctest::Approx(0.0));
}

TEST_CASE("radius beyond the grid is an error") {
    const auto s = half_square(16, 0.5);
    CHECK_THROWS_AS(height(ScalarField(s), 0.6), Error);
    CHECK_THROWS_AS(dirichlet_energy(ScalarField(s), 0.6), Error);
}

TEST_CASE("homogeneous scaling of H and the ratio D/H") {
    const auto s = half_square(256);
    const auto f = ScalarField::from_function(s, oracle::re_pow(1.5));
    for (double r : {0.2, 0.4}) CHECK(height(f, r) == doctest::Approx(r * r * r * pi / 2).epsilon(1e-3));
    for (double r : {0.1, 0.2, 0.4, 0.8}) {
        const double ratio = dirichlet_energy(f, r) / height(f, r);
        CHECK(std::abs(ratio - 1.5) < 1e-2);
    }
}

TEST_CASE("rescale") {
    const auto s = half_square(128);
    const auto f = ScalarField::from_function(s, [](double x, double y) { return x * x - y * y + 0.5 * x * y; });
    const auto same = rescale(f, 1.0, 1.0);
    for (std::size_t k = 0; k < s.size(); ++k) CHECK(same.values[k] == doctest::Approx(f.values[k]));

    // quadratic homogeneity with normalizer r^2
    const auto fr = rescale(f, 0.5, 0.25);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) worst = std::max(worst, std::abs(fr.values[k] - f.values[k]));
    CHECK(worst < 1e-4);

    const auto w = ScalarField::from_function(s, oracle::re_pow(1.5));
    const auto wr = rescale(w, 0.5, std::sqrt(height(w, 0.5)));
    CHECK(height(wr, 1.0) == doctest::Approx(1.0).epsilon(1e-3));

    CHECK_THROWS_AS(rescale(f, 0.5, 0.0), Error);
    CHECK_THROWS_AS(rescale(f, 0.5, 1e-31), Error);
}

TEST_CASE("height commutes with rescale") {
    const auto s = half_square(128);
    const auto f = ScalarField::from_function(s, [](double x, double y) { return std::cos(x) * (1.0 + y * y); });
    const double r = 0.6;
    CHECK(std::abs(height(rescale(f, r, 1.0), 1.0) - height(f, r)) < 1e-4);
}

TEST_CASE("contact intervals") {
    const auto s = half_square(128);
    const auto w = ScalarField::from_function(s, oracle::re_pow(1.5));
    auto iv = contact_intervals(w, 1e-8);
    REQUIRE(iv.count() == 1);
    CHECK(std::abs(iv.intervals[0].a) <= s.h + 1e-12);
    CHECK(iv.intervals[0].b == doctest::Approx(1.0));

    CHECK(contact_intervals(ScalarField(s), 1e-8).empty());

    const auto q = ScalarField::from_function(s, [](double x, double) { return std::max(0.0, x * x - 0.25); });
    iv = contact_intervals(q, 1e-12);
    REQUIRE(iv.count() == 2);
    CHECK(iv.intervals[0].a == doctest::Approx(-1.0));
    CHECK(iv.intervals[0].b == doctest::Approx(-0.5));
    CHECK(iv.intervals[1].a == doctest::Approx(0.5));
    CHECK(iv.intervals[1].b == doctest::Approx(1.0));

    // scaling both field and threshold leaves the set unchanged
    auto q3 = q;
    for (auto& v : q3.values) v *= 7.0;
    const auto iv3 = contact_intervals(q3, 7e-12);
    REQUIRE(iv3.count() == 2);
    CHECK(iv3.intervals[1].a == iv.intervals[1].a);
}

TEST_CASE("single node gaps are merged") {
    const auto s = half_square(8);
    ScalarField f(s, 1.0);
    f(8, 0) = 0.0;
    CHECK(contact_intervals(f, 1e-8).count() == 1);
    f(9, 0) = 0.0;
    CHECK(contact_intervals(f, 1e-8).count() == 2);
}

TEST_CASE("fld round trip is bit exact") {
    const auto s = half_square(6);
    const auto f = ScalarField::from_function(s, [](double x, double y) { return std::sin(x * 3.1) / (1.0 + y) + 1e-300; });
    const auto g = parse_fld(to_fld_string(f));
    CHECK(g.spec == f.spec);
    CHECK(g.values == f.values);
    const auto path = std::filesystem::temp_directory_path() / "fbl_roundtrip.fld";
    write_fld(path, f);
    CHECK(read_fld(path).values == f.values);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(parse_fld("3 3 0 0 1\n1 2 3\n"), Error);
}

TEST_CASE("config parsing") {
    const auto c = Config::parse("# comment\nkind = model-recovery\n tol=1e-9 # inline\nradii = 0.1, 0.2,0.4\n");
    CHECK(c.get("kind") == "model-recovery");
    CHECK(c.get_double("tol", 0.0) == 1e-9);
    CHECK(c.get_int("missing", 7) == 7);
    CHECK(c.get_doubles("radii", {}).size() == 3);
    CHECK_THROWS_AS(Config::parse("novalue\n"), Error);
    CHECK_THROWS_AS(c.get_double("kind", 0.0), Error);
    CHECK_THROWS_AS(c.get("absent"), Error);
}
