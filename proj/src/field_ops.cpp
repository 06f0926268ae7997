#include "fbl/field_ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fbl {

GradientField gradient(const ScalarField& f) {
    const GridSpec& s = f.spec;
    s.validate();
    GradientField g{ScalarField(s), ScalarField(s)};
    const double inv2h = 0.5 / s.h;
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            double gx;
            if (i == 0)
                gx = (-3.0 * f(0, j) + 4.0 * f(1, j) - f(2, j)) * inv2h;
            else if (i == s.nx - 1)
                gx = (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) * inv2h;
            else
                gx = (f(i + 1, j) - f(i - 1, j)) * inv2h;
            double gy;
            if (j == 0)
                gy = (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) * inv2h;
            else if (j == s.ny - 1)
                gy = (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) * inv2h;
            else
                gy = (f(i, j + 1) - f(i, j - 1)) * inv2h;
            g.dx(i, j) = gx;
            g.dy(i, j) = gy;
        }
    }
    return g;
}

bool admissible_radius(const GridSpec& s, double r) {
    const double tol = 1e-12;
    return r > 0.0 && s.x0 <= -r + tol && s.x_max() >= r - tol && s.y0 <= tol &&
           s.y_max() >= r - tol;
}

double height(const ScalarField& f, double r, int d) {
    ensure(admissible_radius(f.spec, r), ErrorKind::Domain, "radius exceeds the grid");
    const int n = static_cast<int>(std::ceil(std::numbers::pi * r / f.spec.h)) * 4;
    const double dtheta = std::numbers::pi / n;
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double t = k * dtheta;
        const double x = std::clamp(r * std::cos(t), f.spec.x0, f.spec.x_max());
        const double y = std::clamp(r * std::sin(t), f.spec.y0, f.spec.y_max());
        const double w = f.sample(x, y);
        sum += (k == 0 || k == n ? 0.5 : 1.0) * w * w;
    }
    const double arc_integral = r * sum * dtheta;
    return arc_integral / std::pow(r, d - 1);
}

double half_disk_integral(const ScalarField& g, double r) {
    const GridSpec& s = g.spec;
    ensure(admissible_radius(s, r), ErrorKind::Domain, "radius exceeds the grid");
    const double r2 = r * r;
    const double h = s.h;
    constexpr int sub = 16;
    double total = 0.0;
    for (int j = 0; j + 1 < s.ny; ++j) {
        const double ya = s.y(j), yb = s.y(j + 1);
        if (yb <= 0.0 || ya >= r) continue;
        for (int i = 0; i + 1 < s.nx; ++i) {
            const double xa = s.x(i), xb = s.x(i + 1);
            if (xb <= -r || xa >= r) continue;
            // nearest and farthest squared distances from the origin to the cell
            const double nxd = std::max({xa, 0.0, -xb});
            const double nyd = std::max({ya, 0.0, -yb});
            if (nxd * nxd + nyd * nyd >= r2) continue;
            const double fxd = std::max(std::abs(xa), std::abs(xb));
            const double fyd = std::max(std::abs(ya), std::abs(yb));
            const double f00 = g(i, j), f10 = g(i + 1, j), f01 = g(i, j + 1), f11 = g(i + 1, j + 1);
            const bool lower_cut = ya < 0.0;
            if (fxd * fxd + fyd * fyd <= r2 && !lower_cut) {
                total += 0.25 * (f00 + f10 + f01 + f11) * h * h;
                continue;
            }
            double acc = 0.0;
            for (int b = 0; b < sub; ++b) {
                const double ty = (b + 0.5) / sub;
                const double y = ya + ty * h;
                if (y < 0.0) continue;
                for (int a = 0; a < sub; ++a) {
                    const double tx = (a + 0.5) / sub;
                    const double x = xa + tx * h;
                    if (x * x + y * y > r2) continue;
                    acc += (1 - ty) * ((1 - tx) * f00 + tx * f10) + ty * ((1 - tx) * f01 + tx * f11);
                }
            }
            total += acc * (h * h) / (sub * sub);
        }
    }
    return total;
}

double dirichlet_energy(const ScalarField& f, double r, int d) {
    ensure(admissible_radius(f.spec, r), ErrorKind::Domain, "radius exceeds the grid");
    const auto g = gradient(f);
    ScalarField density(f.spec);
    for (std::size_t k = 0; k < density.values.size(); ++k)
        density.values[k] = g.dx.values[k] * g.dx.values[k] + g.dy.values[k] * g.dy.values[k];
    return half_disk_integral(density, r) / std::pow(r, d - 2);
}

ScalarField rescale(const ScalarField& f, double r, double normalizer) {
    ensure(normalizer > 1e-30, ErrorKind::DegenerateRescaling, "rescaling normalizer vanishes");
    ensure(r > 0.0 && r <= 1.0, ErrorKind::Domain, "rescaling radius must lie in (0, 1]");
    ScalarField out(f.spec);
    const GridSpec& s = f.spec;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) out(i, j) = f.sample(r * s.x(i), r * s.y(j)) / normalizer;
    return out;
}

IntervalSet contact_intervals(const ScalarField& f, double tol) {
    const auto row = f.spec.slit_row();
    ensure(row.has_value(), ErrorKind::Domain, "grid has no slit row");
    const int j = *row;
    const int n = f.spec.nx;
    std::vector<char> positive(n);
    for (int i = 0; i < n; ++i) positive[i] = f(i, j) > tol;
    // fill isolated single-node gaps between two positive runs
    for (int i = 1; i + 1 < n; ++i)
        if (!positive[i] && positive[i - 1] && positive[i + 1]) positive[i] = 2;

    IntervalSet out;
    int i = 0;
    while (i < n) {
        if (!positive[i]) {
            ++i;
            continue;
        }
        const int start = i;
        while (i < n && positive[i]) ++i;
        const int end = i - 1;
        const double a = f.spec.x(std::max(start - 1, 0));
        const double b = f.spec.x(std::min(end + 1, n - 1));
        out.intervals.push_back({a, b});
    }
    return out;
}

ScalarField laplacian(const ScalarField& f) {
    const GridSpec& s = f.spec;
    ScalarField out(s);
    const double inv = 1.0 / (s.h * s.h);
    for (int j = 1; j + 1 < s.ny; ++j)
        for (int i = 1; i + 1 < s.nx; ++i)
            out(i, j) = (f(i + 1, j) + f(i - 1, j) + f(i, j + 1) + f(i, j - 1) - 4.0 * f(i, j)) * inv;
    return out;
}

}  // namespace fbl
