#include "fbl/hodograph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "fbl/field_ops.hpp"

namespace fbl {

namespace {

// Cubic Hermite interpolant of one column with nodal values and derivatives.
struct Column {
    double y0, h;
    std::vector<double> c, d;

    double value(int j, double t) const {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * c[j] + (t3 - 2 * t2 + t) * h * d[j] + (-2 * t3 + 3 * t2) * c[j + 1] +
               (t3 - t2) * h * d[j + 1];
    }
    double slope(int j, double t) const {
        const double t2 = t * t;
        return ((6 * t2 - 6 * t) * c[j] + (3 * t2 - 4 * t + 1) * h * d[j] + (-6 * t2 + 6 * t) * c[j + 1] +
                (3 * t2 - 2 * t) * h * d[j + 1]) /
               h;
    }

    // y with value(y) = z; the column is increasing
    double invert(double z) const {
        const int n = static_cast<int>(c.size());
        int j = static_cast<int>(std::upper_bound(c.begin(), c.end(), z) - c.begin()) - 1;
        j = std::clamp(j, 0, n - 2);
        double lo = 0.0, hi = 1.0, t = 0.5;
        for (int it = 0; it < 100; ++it) {
            const double r = value(j, t) - z;
            if (std::abs(r) <= 1e-15) break;
            if (r > 0) hi = t; else lo = t;
            const double s = slope(j, t) * h;
            double next = s > 0 ? t - r / s : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - t) * h <= 1e-14) {
                t = next;
                break;
            }
            t = next;
        }
        return y0 + (j + t) * h;
    }
};

double trapezoid_weight(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

// integral over [a, b] of the piecewise linear interpolant of g on the column nodes
double column_integral(const std::vector<double>& g, double y0, double h, double a, double b) {
    auto at = [&](double y) {
        const double t = (y - y0) / h;
        const int j = std::clamp(static_cast<int>(std::floor(t)), 0, static_cast<int>(g.size()) - 2);
        const double s = t - j;
        return (1 - s) * g[j] + s * g[j + 1];
    };
    double total = 0.0;
    const int ja = static_cast<int>(std::ceil((a - y0) / h - 1e-12));
    const int jb = static_cast<int>(std::floor((b - y0) / h + 1e-12));
    if (ja > jb) return 0.5 * (at(a) + at(b)) * (b - a);
    total += 0.5 * (at(a) + g[ja]) * (y0 + ja * h - a);
    for (int j = ja; j < jb; ++j) total += 0.5 * (g[j] + g[j + 1]) * h;
    total += 0.5 * (g[jb] + at(b)) * (b - (y0 + jb * h));
    return total;
}

struct Sample {
    double U, u, Ux, Uy, ux, uy;
};

// bilinear values and exact gradients of the interpolants of U and u
Sample sample_pair(const ScalarField& U, const ScalarField& u, double x, double y) {
    const auto a = U.sample_with_gradient(x, y);
    const auto b = u.sample_with_gradient(x, y);
    return {a[0], b[0], a[1], a[2], b[1], b[2]};
}

// Fourth-order differences along one line of n >= 5 samples.
double diff4(const std::function<double(int)>& f, int k, int n, double h) {
    if (k < 2) {
        static constexpr double w[2][5] = {{-25, 48, -36, 16, -3}, {-3, -10, 18, -6, 1}};
        double acc = 0.0;
        for (int m = 0; m < 5; ++m) acc += w[k][m] * f(m);
        return acc / (12.0 * h);
    }
    if (k > n - 3) return -diff4([&](int m) { return f(n - 1 - m); }, n - 1 - k, n, h);
    return (f(k - 2) - 8.0 * f(k - 1) + 8.0 * f(k + 1) - f(k + 2)) / (12.0 * h);
}

GradientField gradient4(const ScalarField& u) {
    const GridSpec& s = u.spec;
    if (s.nx < 5 || s.ny < 5) return gradient(u);
    GradientField g{ScalarField(s), ScalarField(s)};
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            g.dx(i, j) = diff4([&](int m) { return u(m, j); }, i, s.nx, s.h);
            g.dy(i, j) = diff4([&](int m) { return u(i, m); }, j, s.ny, s.h);
        }
    return g;
}

}  // namespace

HodographResult classical_hodograph(const ScalarField& u_in, double scale) {
    ensure(scale > 0.0, ErrorKind::Domain, "hodograph scale must be positive");
    const GridSpec& s = u_in.spec;
    s.validate();
    ScalarField u = u_in;
    for (auto& v : u.values) v /= scale;
    const auto g = gradient(u);
    HodographResult r;
    r.scale = scale;
    r.margin = std::numeric_limits<double>::infinity();
    for (double v : g.dy.values) r.margin = std::min(r.margin, v);
    ensure(r.margin > 0.0, ErrorKind::NonInvertible, "d_y u is not positive on the strip");

    double zmax = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.nx; ++i) {
        ensure(u(i, 0) <= 0.0, ErrorKind::Domain, "grid column does not reach u = 0");
        zmax = std::min(zmax, u(i, s.ny - 1));
    }
    zmax *= 0.9;
    const int nz = static_cast<int>(std::floor(zmax / s.h + 1e-9));
    ensure(nz >= 2, ErrorKind::DegenerateGrid, "hodograph image has fewer than three rows");
    const GridSpec img{s.nx, nz + 1, s.x0, 0.0, s.h};
    r.uprime = ScalarField(img);
    r.utilde = ScalarField(img);
    for (int i = 0; i < s.nx; ++i) {
        Column col{s.y0, s.h, std::vector<double>(s.ny), std::vector<double>(s.ny)};
        for (int j = 0; j < s.ny; ++j) {
            col.c[j] = u(i, j);
            col.d[j] = g.dy(i, j);
        }
        for (int k = 0; k <= nz; ++k) {
            const double z = img.y(k);
            const double y = col.invert(z);
            r.uprime(i, k) = y;
            r.utilde(i, k) = y - z;
        }
    }
    return r;
}

HodographIdentities hodograph_identities(const ScalarField& u_in, const HodographResult& r) {
    ScalarField u = u_in;
    for (auto& v : u.values) v /= r.scale;
    const auto g = gradient(u);
    const auto gp = gradient(r.uprime);
    const GridSpec& img = r.uprime.spec;
    HodographIdentities out;
    for (int k = 0; k < img.ny; ++k)
        for (int i = 0; i < img.nx; ++i) {
            const double x = img.x(i), y = r.uprime(i, k);
            out.round_trip = std::max(out.round_trip, std::abs(u.sample(x, y) - img.y(k)));
            if (i == 0 || k == 0 || i + 1 == img.nx || k + 1 == img.ny) continue;
            const double ux = g.dx.sample(x, y), uy = g.dy.sample(x, y);
            out.transport = std::max(out.transport, std::abs(ux + uy * gp.dx(i, k)));
            out.jacobian = std::max(out.jacobian, std::abs(uy * gp.dy(i, k) - 1.0));
        }
    return out;
}

EnergyCheck hodograph_energy_check(const ScalarField& u_in, const HodographResult& r) {
    ScalarField u = u_in;
    for (auto& v : u.values) v /= r.scale;
    const GridSpec& s = u.spec;
    const GridSpec& img = r.uprime.spec;
    const auto g = gradient(u);
    EnergyCheck e;

    std::vector<double> col(s.ny);
    for (int i = 0; i < s.nx; ++i) {
        for (int j = 0; j < s.ny; ++j) col[j] = g.dx(i, j) * g.dx(i, j) + g.dy(i, j) * g.dy(i, j) + 1.0;
        const double a = r.uprime(i, 0), b = r.uprime(i, img.ny - 1);
        e.lhs += trapezoid_weight(i, s.nx) * s.h * column_integral(col, s.y0, s.h, a, b);
    }

    const auto gp = gradient(r.uprime);
    double area = 0.0;
    for (int k = 0; k < img.ny; ++k)
        for (int i = 0; i < img.nx; ++i) {
            const double w = trapezoid_weight(i, img.nx) * trapezoid_weight(k, img.ny) * img.h * img.h;
            const double p = gp.dx(i, k), q = gp.dy(i, k);
            e.rhs += w * (1.0 + p * p + q * q) / q;
            const double ty = q - 1.0;  // d_z u~
            e.rhs_tilde += w * (p * p + ty * ty) / (1.0 + ty);
            area += w;
        }
    e.lhs_tilde = e.lhs - 2.0 * area;
    e.defect = std::abs(e.lhs - e.rhs) / std::abs(e.lhs);
    return e;
}

TwoPhaseHodograph two_phase_hodograph(const ScalarField& u, const ScalarField& v, double lambda_u, double lambda_v) {
    ensure(lambda_v > 0.0 && lambda_u >= lambda_v, ErrorKind::Domain, "two-phase constants need lambda_u >= lambda_v > 0");
    return {classical_hodograph(u, std::sqrt(lambda_u)), classical_hodograph(v, std::sqrt(lambda_v))};
}

ScalarField harmonic_conjugate(const ScalarField& u) {
    const GridSpec& s = u.spec;
    s.validate();
    const auto g = gradient4(u);
    const auto row = s.slit_row();
    const int jb = row ? *row : 0;
    const int i0c = static_cast<int>(std::lround(-s.x0 / s.h));
    const int ib = (i0c >= 0 && i0c < s.nx && std::abs(s.x(i0c)) <= 1e-9 * s.h) ? i0c : s.nx / 2;
    ScalarField U(s);
    const double hh = 0.5 * s.h;
    U(ib, jb) = 0.0;
    for (int i = ib + 1; i < s.nx; ++i) U(i, jb) = U(i - 1, jb) + hh * (g.dy(i - 1, jb) + g.dy(i, jb));
    for (int i = ib - 1; i >= 0; --i) U(i, jb) = U(i + 1, jb) - hh * (g.dy(i + 1, jb) + g.dy(i, jb));
    for (int i = 0; i < s.nx; ++i) {
        for (int j = jb + 1; j < s.ny; ++j) U(i, j) = U(i, j - 1) - hh * (g.dx(i, j - 1) + g.dx(i, j));
        for (int j = jb - 1; j >= 0; --j) U(i, j) = U(i, j + 1) + hh * (g.dx(i, j + 1) + g.dx(i, j));
    }
    return U;
}

double conjugate_loop_defect(const ScalarField& u, int loops, std::uint64_t seed) {
    const GridSpec& s = u.spec;
    ensure(s.nx >= 3 && s.ny >= 3, ErrorKind::DegenerateGrid, "grid too small for 2 x 2 loops");
    const auto g = gradient4(u);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> di(0, s.nx - 3), dj(0, s.ny - 3);
    const double hh = 0.5 * s.h;
    double worst = 0.0;
    for (int n = 0; n < loops; ++n) {
        const int i = di(rng), j = dj(rng);
        double loop = 0.0;
        // counter-clockwise: bottom, right, top, left; alpha = u_y dx - u_x dy
        for (int k = 0; k < 2; ++k) {
            loop += hh * (g.dy(i + k, j) + g.dy(i + k + 1, j));
            loop -= hh * (g.dx(i + 2, j + k) + g.dx(i + 2, j + k + 1));
            loop -= hh * (g.dy(i + k, j + 2) + g.dy(i + k + 1, j + 2));
            loop += hh * (g.dx(i, j + k) + g.dx(i, j + k + 1));
        }
        worst = std::max(worst, std::abs(loop));
    }
    return worst;
}

cplx moebius_P(cplx Q) { return cplx(0.0, -1.0) * (Q + cplx(0.0, 1.0)) / (Q - cplx(0.0, 1.0)); }

cplx moebius_Q(cplx P) { return (1.0 + cplx(0.0, 1.0) * P) / (P + cplx(0.0, 1.0)); }

ConformalHodograph conformal_hodograph(const ScalarField& u, const AnalyticCurve& f,
                                       const ConformalHodographOptions& opt) {
    const GridSpec& s = u.spec;
    const GridSpec& img = opt.image;
    img.validate();
    ensure(u.all_finite(), ErrorKind::Domain, "field has non-finite values");
    const auto zero_row = img.slit_row();
    ensure(zero_row.has_value(), ErrorKind::Domain, "image grid must contain the row y' = 0");

    ConformalHodograph ch;
    ch.U = harmonic_conjugate(u);
    ch.origin_defect = std::abs(ch.U.sample(0.0, 0.0));
    const auto gu = gradient(u);
    const auto gU = gradient(ch.U);
    for (int j = 1; j + 1 < s.ny; ++j)
        for (int i = 1; i + 1 < s.nx; ++i) {
            const double d = std::abs(gU.dx(i, j) - gu.dy(i, j)) + std::abs(gU.dy(i, j) + gu.dx(i, j));
            ch.cr_defect = std::max(ch.cr_defect, d);
        }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    ch.V = ScalarField(img, nan);
    ch.v = ScalarField(img, nan);
    ch.masked.assign(img.size(), 1);
    for (int j = 0; j < img.ny; ++j) {
        bool have = false;
        double px = 0.0, py = 0.0;
        for (int i = 0; i < img.nx; ++i) {
            const double tx = img.x(i), ty = img.y(j);
            auto newton = [&](double& x, double& y) {
                for (int it = 0; it < 50; ++it) {
                    if (!u.contains(x, y)) return false;
                    const auto m = sample_pair(ch.U, u, x, y);
                    const double r1 = m.U - tx, r2 = m.u - ty;
                    const double det = m.Ux * m.uy - m.Uy * m.ux;
                    if (!(std::abs(det) > 1e-14)) return false;
                    const double dx = (m.uy * r1 - m.Uy * r2) / det;
                    const double dy = (-m.ux * r1 + m.Ux * r2) / det;
                    x -= dx;
                    y -= dy;
                    if (std::hypot(dx, dy) <= 1e-12) return u.contains(x, y);
                }
                return false;
            };
            double x = have ? px : tx, y = have ? py : ty;
            bool ok = newton(x, y);
            if (!ok && have) {
                x = tx;
                y = ty;
                ok = newton(x, y);
            }
            const std::size_t k = img.index(i, j);
            if (!ok) {
                ++ch.masked_count;
                have = false;
                continue;
            }
            ch.V.values[k] = x;
            ch.v.values[k] = y;
            ch.masked[k] = 0;
            px = x;
            py = y;
            have = true;
        }
    }

    const auto gv = gradient(ch.v);
    ch.Q.assign(img.size(), cplx(nan, nan));
    ch.P.assign(img.size(), cplx(nan, nan));
    for (std::size_t k = 0; k < img.size(); ++k) {
        const cplx q(gv.dx.values[k], -gv.dy.values[k]);
        if (!std::isfinite(q.real()) || !std::isfinite(q.imag())) continue;
        ch.Q[k] = q;
        if (std::abs(q - cplx(0.0, 1.0)) >= 1e-6) {
            ch.P[k] = moebius_P(q);
        } else if (!ch.masked[k]) {
            ch.masked[k] = 1;
            ++ch.masked_count;
        }
    }

    for (int j = 1; j + 1 < img.ny; ++j)
        for (int i = 1; i + 1 < img.nx; ++i) {
            const std::size_t k = img.index(i, j);
            const double vx = gv.dx.values[k], vy = gv.dy.values[k];
            if (!std::isfinite(vx) || !std::isfinite(vy)) continue;
            const double x = ch.V.values[k], y = ch.v.values[k];
            const double gx = gu.dx.sample(x, y), gy = gu.dy.sample(x, y);
            ch.gradient_product_defect = std::max(ch.gradient_product_defect, std::abs(std::hypot(gx, gy) * std::hypot(vx, vy) - 1.0));
        }

    for (int n = 0; n < opt.samples; ++n) {
        const double x = opt.sample_half_width * (2.0 * n / (opt.samples - 1.0) - 1.0);
        const double e = ch.U.sample(x, f.f(x));
        ch.xs.push_back(x);
        ch.eta.push_back(e);
        ch.eta_defect = std::max(ch.eta_defect, std::abs(e - arclength(f, x)));
        ensure(e >= img.x0 && e <= img.x_max(), ErrorKind::Domain, "boundary image leaves the image grid");
        const double vx = gv.dx.sample(e, 0.0), vy = gv.dy.sample(e, 0.0);
        ensure(std::isfinite(vx) && std::isfinite(vy), ErrorKind::NonInvertible, "boundary image touches a masked node");
        const double fp = f.fp(x);
        ch.slope_defect = std::max(ch.slope_defect, std::abs(fp - vx / vy));
        ch.eta_prime_defect = std::max(ch.eta_prime_defect, std::abs(std::sqrt(1.0 + fp * fp) - 1.0 / vy));
        const cplx q(vx, -vy);
        ch.modulus_defect = std::max(ch.modulus_defect, std::abs(std::abs(q) - 1.0));
        ch.imP_defect = std::max(ch.imP_defect, std::abs(moebius_P(q).imag()));
    }
    return ch;
}

}  // namespace fbl
