#include "fbl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fbl {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateGrid: return "degenerate-grid";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::DegenerateRescaling: return "degenerate-rescaling";
        case ErrorKind::Ellipticity: return "ellipticity";
        case ErrorKind::OutOfRange: return "out-of-range";
        case ErrorKind::NonInvertible: return "non-invertible";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Config: return "config";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

std::optional<int> GridSpec::slit_row() const {
    if (h <= 0.0) return std::nullopt;
    const double jr = -y0 / h;
    const int j = static_cast<int>(std::lround(jr));
    if (j < 0 || j >= ny) return std::nullopt;
    if (std::abs(y(j)) > 1e-9 * h) return std::nullopt;
    return j;
}

void GridSpec::validate() const {
    ensure(h > 0.0 && std::isfinite(h), ErrorKind::DegenerateGrid, "grid spacing must be positive");
    ensure(nx >= 3 && ny >= 3, ErrorKind::DegenerateGrid, "grid needs at least 3 points per axis");
}

GridSpec GridSpec::cells() const {
    return GridSpec{nx - 1, ny - 1, x0 + 0.5 * h, y0 + 0.5 * h, h};
}

GridSpec half_square(int n, double half_width) {
    return GridSpec{2 * n + 1, n + 1, -half_width, 0.0, half_width / n};
}

GridSpec full_square(int n, double half_width) {
    return GridSpec{2 * n + 1, 2 * n + 1, -half_width, -half_width, half_width / n};
}

ScalarField::ScalarField(const GridSpec& s, double fill) : spec(s), values(s.size(), fill) {}

ScalarField::ScalarField(const GridSpec& s, std::vector<double> v) : spec(s), values(std::move(v)) {
    ensure(values.size() == spec.size(), ErrorKind::DegenerateGrid,
           "field size does not match its grid");
}

ScalarField ScalarField::from_function(const GridSpec& s,
                                       const std::function<double(double, double)>& fn) {
    ScalarField f(s);
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) f(i, j) = fn(s.x(i), s.y(j));
    return f;
}

bool ScalarField::contains(double x, double y, double slack) const {
    const double tol = slack * std::max(1.0, spec.h);
    return x >= spec.x0 - tol && x <= spec.x_max() + tol && y >= spec.y0 - tol &&
           y <= spec.y_max() + tol;
}

namespace {

struct CellLocation {
    int i, j;
    double tx, ty;
};

CellLocation locate(const GridSpec& s, double x, double y) {
    double fx = (x - s.x0) / s.h;
    double fy = (y - s.y0) / s.h;
    fx = std::clamp(fx, 0.0, static_cast<double>(s.nx - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(s.ny - 1));
    int i = std::min(static_cast<int>(fx), s.nx - 2);
    int j = std::min(static_cast<int>(fy), s.ny - 2);
    return {i, j, fx - i, fy - j};
}

}  // namespace

double ScalarField::sample(double x, double y) const {
    ensure(contains(x, y, 1e-9), ErrorKind::Domain, "sample point outside grid");
    const auto c = locate(spec, x, y);
    const double f00 = (*this)(c.i, c.j), f10 = (*this)(c.i + 1, c.j);
    const double f01 = (*this)(c.i, c.j + 1), f11 = (*this)(c.i + 1, c.j + 1);
    return (1 - c.ty) * ((1 - c.tx) * f00 + c.tx * f10) + c.ty * ((1 - c.tx) * f01 + c.tx * f11);
}

std::array<double, 3> ScalarField::sample_with_gradient(double x, double y) const {
    ensure(contains(x, y, 1e-9), ErrorKind::Domain, "sample point outside grid");
    const auto c = locate(spec, x, y);
    const double f00 = (*this)(c.i, c.j), f10 = (*this)(c.i + 1, c.j);
    const double f01 = (*this)(c.i, c.j + 1), f11 = (*this)(c.i + 1, c.j + 1);
    const double v =
        (1 - c.ty) * ((1 - c.tx) * f00 + c.tx * f10) + c.ty * ((1 - c.tx) * f01 + c.tx * f11);
    const double gx = ((1 - c.ty) * (f10 - f00) + c.ty * (f11 - f01)) / spec.h;
    const double gy = ((1 - c.tx) * (f01 - f00) + c.tx * (f11 - f10)) / spec.h;
    return {v, gx, gy};
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::all_finite() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

MatrixField::MatrixField(const GridSpec& s)
    : spec(s), a11(s.size(), 0.0), a12(s.size(), 0.0), a22(s.size(), 0.0) {}

MatrixField MatrixField::identity(const GridSpec& s) { return constant(s, 1.0, 0.0, 1.0); }

MatrixField MatrixField::constant(const GridSpec& s, double m11, double m12, double m22) {
    MatrixField m(s);
    std::fill(m.a11.begin(), m.a11.end(), m11);
    std::fill(m.a12.begin(), m.a12.end(), m12);
    std::fill(m.a22.begin(), m.a22.end(), m22);
    m.update_bounds();
    m.check_det_normalized();
    return m;
}

std::array<double, 3> MatrixField::sample(double x, double y) const {
    const auto c = locate(spec, x, y);
    auto interp = [&](const std::vector<double>& a) {
        const double f00 = a[spec.index(c.i, c.j)], f10 = a[spec.index(c.i + 1, c.j)];
        const double f01 = a[spec.index(c.i, c.j + 1)], f11 = a[spec.index(c.i + 1, c.j + 1)];
        return (1 - c.ty) * ((1 - c.tx) * f00 + c.tx * f10) +
               c.ty * ((1 - c.tx) * f01 + c.tx * f11);
    };
    return {interp(a11), interp(a12), interp(a22)};
}

std::array<double, 2> sym_eigenvalues(double m11, double m12, double m22) {
    const double mean = 0.5 * (m11 + m22);
    const double rad = std::hypot(0.5 * (m11 - m22), m12);
    return {mean - rad, mean + rad};
}

void MatrixField::update_bounds() {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k < a11.size(); ++k) {
        ensure(std::isfinite(a11[k]) && std::isfinite(a12[k]) && std::isfinite(a22[k]),
               ErrorKind::Ellipticity, "non-finite coefficient");
        const auto ev = sym_eigenvalues(a11[k], a12[k], a22[k]);
        lo = std::min(lo, ev[0]);
        hi = std::max(hi, ev[1]);
    }
    ensure(lo > 0.0, ErrorKind::Ellipticity, "coefficient field is not uniformly elliptic");
    lambda = lo;
    Lambda = hi;
}

bool MatrixField::check_det_normalized(double tol) {
    det_normalized = true;
    for (std::size_t k = 0; k < a11.size(); ++k) {
        if (std::abs(a11[k] * a22[k] - a12[k] * a12[k] - 1.0) > tol) {
            det_normalized = false;
            break;
        }
    }
    return det_normalized;
}

}  // namespace fbl
