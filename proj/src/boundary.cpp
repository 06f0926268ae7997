#include "fbl/boundary.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fbl/field_io.hpp"

namespace fbl {

namespace {

// Truncated power series arithmetic; all series share the length of the first argument.
template <class T>
std::vector<T> mul(const std::vector<T>& a, const std::vector<T>& b) {
    const std::size_t n = a.size();
    std::vector<T> out(n, T(0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; i + j < n; ++j) out[i + j] += a[i] * b[j];
    return out;
}

template <class T>
std::vector<T> reciprocal(const std::vector<T>& a) {
    std::vector<T> out(a.size(), T(0));
    out[0] = T(1) / a[0];
    for (std::size_t n = 1; n < a.size(); ++n) {
        T acc(0);
        for (std::size_t k = 1; k <= n; ++k) acc += a[k] * out[n - k];
        out[n] = -acc / a[0];
    }
    return out;
}

std::vector<double> series_sqrt(const std::vector<double>& a) {
    std::vector<double> out(a.size(), 0.0);
    out[0] = std::sqrt(a[0]);
    for (std::size_t n = 1; n < a.size(); ++n) {
        double acc = a[n];
        for (std::size_t k = 1; k < n; ++k) acc -= out[k] * out[n - k];
        out[n] = acc / (2.0 * out[0]);
    }
    return out;
}

template <class T>
std::vector<T> integrate(const std::vector<T>& a) {
    std::vector<T> out(a.size(), T(0));
    for (std::size_t k = 0; k + 1 < a.size(); ++k) out[k + 1] = a[k] / static_cast<double>(k + 1);
    return out;
}

std::vector<double> differentiate(const std::vector<double>& a) {
    std::vector<double> out(a.size(), 0.0);
    for (std::size_t k = 0; k + 1 < a.size(); ++k) out[k] = a[k + 1] * static_cast<double>(k + 1);
    return out;
}

// a(x(s)) for x(0) = 0
template <class T>
std::vector<T> compose(const std::vector<T>& a, const std::vector<T>& x) {
    std::vector<T> out(a.size(), T(0));
    for (std::size_t k = a.size(); k-- > 0;) {
        out = mul(out, x);
        out[0] += a[k];
    }
    return out;
}

// x(s) with a(x(s)) = s, for a(0) = 0 and a'(0) = slope
std::vector<double> revert(const std::vector<double>& a) {
    const double slope = a[1];
    std::vector<double> s(a.size(), 0.0);
    if (s.size() > 1) s[1] = 1.0;
    std::vector<double> x(a.size(), 0.0);
    if (x.size() > 1) x[1] = 1.0 / slope;
    for (std::size_t it = 0; it < a.size(); ++it) {
        const auto ax = compose(a, x);
        for (std::size_t k = 0; k < x.size(); ++k) x[k] -= (ax[k] - s[k]) / slope;
    }
    return x;
}

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

std::vector<double> pad(std::vector<double> c) {
    c.resize(taylor_degree + 1, 0.0);
    return c;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

// Largest radius in (0, 1] with |f'| <= 1 on [-r, r], on a 1e-4 lattice.
double derivative_radius(const std::function<double(double)>& fp) {
    const double step = 1e-4;
    double r = 0.0;
    while (r + step <= 1.0 + 1e-12) {
        const double t = r + step;
        if (std::abs(fp(t)) > 1.0 || std::abs(fp(-t)) > 1.0) break;
        r = t;
    }
    return r;
}

std::pair<double, double> tail_estimate(const std::vector<cplx>& c, double r) {
    const int deg = static_cast<int>(c.size()) - 1;
    double inv = 0.0;
    for (int k = deg / 2; k <= deg; ++k)
        if (std::abs(c[k]) > 0.0) inv = std::max(inv, std::pow(std::abs(c[k]), 1.0 / k));
    if (inv == 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
    const double R = 1.0 / inv;
    double M = 0.0;
    for (int k = deg / 2; k <= deg; ++k) M = std::max(M, std::abs(c[k]) * std::pow(R, k));
    const double q = r / R;
    if (q >= 1.0) return {R, std::numeric_limits<double>::infinity()};
    return {R, M * std::pow(q, deg + 1) / (1.0 - q)};
}

// Chebyshev interpolant on [-r, r] with n + 1 nodes.
struct Chebyshev {
    double r;
    std::vector<double> a;

    Chebyshev(const std::function<double(double)>& g, double r_, int n) : r(r_), a(n + 1, 0.0) {
        std::vector<double> vals(n + 1);
        for (int k = 0; k <= n; ++k) vals[k] = g(r * std::cos(std::numbers::pi * (k + 0.5) / (n + 1)));
        for (int j = 0; j <= n; ++j) {
            double acc = 0.0;
            for (int k = 0; k <= n; ++k) acc += vals[k] * std::cos(std::numbers::pi * j * (k + 0.5) / (n + 1));
            a[j] = acc * 2.0 / (n + 1);
        }
        a[0] *= 0.5;
    }

    double operator()(double x) const {
        const double t = x / r;
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t j = a.size(); j-- > 1;) {
            const double b0 = 2.0 * t * b1 - b2 + a[j];
            b2 = b1;
            b1 = b0;
        }
        return t * b1 - b2 + a[0];
    }
};

}  // namespace

AnalyticCurve::AnalyticCurve(std::string name, std::vector<double> taylor, double rho, Fn f, Fn fp)
    : name_(std::move(name)), taylor_(pad(std::move(taylor))), rho_(rho), f_(std::move(f)), fp_(std::move(fp)) {
    ensure(rho_ > 0.0, ErrorKind::Domain, "curve needs a positive validity radius");
    ensure(std::abs(f_(0.0)) <= 1e-14 && std::abs(fp_(0.0)) <= 1e-14, ErrorKind::Domain,
           "curve must satisfy f(0) = f'(0) = 0");
    ensure(std::abs(taylor_[0]) <= 1e-14 && std::abs(taylor_[1]) <= 1e-14, ErrorKind::Domain,
           "Taylor data must satisfy f(0) = f'(0) = 0");
    for (int k = 0; k <= 100; ++k) {
        const double x = rho_ * (2.0 * k / 100.0 - 1.0);
        ensure(std::abs(fp_(x)) <= 1.0 + 1e-12, ErrorKind::Domain, "|f'| exceeds 1 on the validity interval");
    }
}

AnalyticCurve AnalyticCurve::flat() {
    return AnalyticCurve("flat", {}, 1.0, [](double) { return 0.0; }, [](double) { return 0.0; });
}

AnalyticCurve AnalyticCurve::catenary() {
    std::vector<double> c(taylor_degree + 1, 0.0);
    for (int k = 2; k <= taylor_degree; k += 2) c[k] = 1.0 / factorial(k);
    return AnalyticCurve("catenary", c, std::asinh(1.0), [](double x) { return std::cosh(x) - 1.0; },
                         [](double x) { return std::sinh(x); });
}

AnalyticCurve AnalyticCurve::parabola(double eps) {
    ensure(eps > 0.0, ErrorKind::Domain, "parabola needs eps > 0");
    std::vector<double> c(taylor_degree + 1, 0.0);
    c[2] = eps;
    return AnalyticCurve("parabola", c, std::min(1.0, 0.5 / eps), [eps](double x) { return eps * x * x; },
                         [eps](double x) { return 2.0 * eps * x; });
}

AnalyticCurve AnalyticCurve::polynomial(std::vector<double> coefficients, double rho) {
    ensure(!coefficients.empty(), ErrorKind::Config, "polynomial curve needs coefficients");
    ensure(coefficients.size() <= taylor_degree + 1, ErrorKind::Config, "polynomial degree exceeds the Taylor degree");
    const auto c = coefficients;
    const auto d = differentiate(pad(coefficients));
    auto f = [c](double x) { return horner(c, x); };
    auto fp = [d](double x) { return horner(d, x); };
    if (rho <= 0.0) rho = derivative_radius(fp);
    return AnalyticCurve("polynomial", coefficients, rho, f, fp);
}

AnalyticCurve AnalyticCurve::from_file(const std::string& path) {
    const auto cfg = Config::load(path);
    ensure(cfg.has("coefficients"), ErrorKind::Config, "curve file needs a coefficients entry");
    return polynomial(cfg.get_doubles("coefficients", {}), cfg.get_double("radius", 0.0));
}

AnalyticCurve AnalyticCurve::by_name(const std::string& name) {
    if (name == "flat") return flat();
    if (name == "catenary") return catenary();
    if (name == "parabola") return parabola(0.1);
    return from_file(name);
}

double arclength(const AnalyticCurve& f, double x) {
    ensure(std::abs(x) <= f.rho() * (1.0 + 1e-12), ErrorKind::Domain, "arclength outside the validity interval");
    if (x == 0.0) return 0.0;
    auto g = [&f](double t) {
        const double d = f.fp(t);
        return std::sqrt(1.0 + d * d);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, x, 10, 1e-12);
}

double inverse_arclength(const AnalyticCurve& f, double s) {
    double x = s;
    for (int it = 0; it < 60; ++it) {
        x = std::clamp(x, -f.rho(), f.rho());
        const double d = f.fp(x);
        const double step = (arclength(f, x) - s) / std::sqrt(1.0 + d * d);
        x -= step;
        if (std::abs(step) <= 1e-12) return x;
    }
    throw Error(ErrorKind::Convergence, "inverse arclength did not converge");
}

AlphaBeta coefficients_alpha_beta(const AnalyticCurve& f) {
    AlphaBeta ab;
    ab.s_min = arclength(f, -f.rho());
    ab.s_max = arclength(f, f.rho());
    const double lo = ab.s_min, hi = ab.s_max;
    auto check = [lo, hi](double s) {
        ensure(s >= lo - 1e-12 && s <= hi + 1e-12, ErrorKind::Domain, "arclength parameter out of range");
    };
    ab.beta = [f, check](double s) {
        check(s);
        const double d = f.fp(inverse_arclength(f, s));
        return 1.0 / std::sqrt(1.0 + d * d);
    };
    ab.alpha = [f, check](double s) {
        check(s);
        const double d = f.fp(inverse_arclength(f, s));
        return d / std::sqrt(1.0 + d * d);
    };
    for (int k = 0; k < 1000; ++k) {
        const double s = lo + (hi - lo) * k / 999.0;
        const double a = ab.alpha(s), b = ab.beta(s);
        ab.circle_defect = std::max(ab.circle_defect, std::abs(a * a + b * b - 1.0));
    }
    return ab;
}

cplx HolomorphicSeries::operator()(cplx z) const {
    cplx acc(0.0, 0.0);
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
    return acc;
}

cplx HolomorphicSeries::derivative(cplx z) const {
    cplx acc(0.0, 0.0);
    for (std::size_t k = c.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * c[k];
    return acc;
}

HolomorphicSeries HolomorphicSeries::primitive() const {
    HolomorphicSeries p = *this;
    p.c.assign(c.size() + 1, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < c.size(); ++k) p.c[k + 1] = c[k] / static_cast<double>(k + 1);
    return p;
}

HolomorphicSeries extend_Q(const AnalyticCurve& f, double radius, int degree) {
    ensure(degree >= 4, ErrorKind::Domain, "Taylor degree too small");
    ensure(radius > 0.0, ErrorKind::Domain, "radius must be positive");
    std::vector<double> ft = f.taylor();
    ft.resize(degree + 1, 0.0);
    const auto fp = differentiate(ft);
    auto one_plus = mul(fp, fp);
    one_plus[0] += 1.0;
    const auto g = series_sqrt(one_plus);
    const auto eta = integrate(g);
    const auto x = revert(eta);
    const auto beta = reciprocal(compose(g, x));
    const auto alpha = mul(compose(fp, x), beta);

    HolomorphicSeries q;
    q.c.resize(degree + 1);
    for (int k = 0; k <= degree; ++k) q.c[k] = cplx(alpha[k], -beta[k]);
    q.radius = radius;
    std::tie(q.convergence, q.tail) = tail_estimate(q.c, radius);
    ensure(q.tail <= series_tail_tolerance, ErrorKind::OutOfRange,
           "series tail bound fails: radius too large for the Taylor degree");

    for (int k = 0; k <= 200; ++k) {
        const double s = radius * (2.0 * k / 200.0 - 1.0);
        q.boundary_defect = std::max(q.boundary_defect, std::abs(std::abs(q(s)) - 1.0));
    }

    const auto ab = coefficients_alpha_beta(f);
    const double cr = std::min({radius, -ab.s_min, ab.s_max});
    const Chebyshev ca(ab.alpha, cr, degree), cb(ab.beta, cr, degree);
    for (int k = 0; k <= 100; ++k) {
        const double s = cr * (2.0 * k / 100.0 - 1.0);
        const cplx v = q(s);
        q.chebyshev_defect = std::max({q.chebyshev_defect, std::abs(v.real() - ca(s)), std::abs(-v.imag() - cb(s))});
    }
    return q;
}

double working_radius(const AnalyticCurve& f, int degree) {
    const auto q = extend_Q(f, 1e-3, degree);
    double r = std::min(arclength(f, f.rho()), 0.5 * q.convergence);
    while (r > 1e-3 && tail_estimate(q.c, r).second > series_tail_tolerance) r *= 0.98;
    return r;
}

ConformalChart::ConformalChart(HolomorphicSeries q) : Q(std::move(q)) {
    HolomorphicSeries minus_iQ = Q;
    for (auto& v : minus_iQ.c) v *= cplx(0.0, -1.0);
    Psi = minus_iQ.primitive();
}

bool ConformalChart::invert(cplx w, cplx& zp) const {
    const cplx target = std::conj(w);
    const double limit = Q.radius * (1.0 + 1e-9);
    for (int it = 0; it < 50; ++it) {
        if (std::abs(zp) > limit) return false;
        const cplx d = Psi.derivative(zp);
        if (std::abs(d) < 1e-12) return false;
        const cplx step = (Psi(zp) - target) / d;
        zp -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(zp))) return std::abs(zp) <= limit;
    }
    return std::abs(Psi(zp) - target) <= 1e-13 && std::abs(zp) <= limit;
}

FormFields integrate_forms(const ConformalChart& chart, const GridSpec& grid) {
    grid.validate();
    FormFields out{ScalarField(grid), ScalarField(grid)};
    const double limit = chart.Q.radius * (1.0 + 1e-12);
    const double d = 1e-5;
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const cplx z(grid.x(i), grid.y(j));
            ensure(std::abs(z) <= limit, ErrorKind::Domain, "grid leaves the working disk of the series");
            const cplx s = chart.S(z);
            out.V(i, j) = s.real();
            out.v(i, j) = s.imag();
            // centred differences of the primitive against the forms
            if (std::abs(z) + d > limit) continue;
            const cplx sx = (chart.S(z + d) - chart.S(z - d)) / (2.0 * d);
            const cplx sy = (chart.S(z + cplx(0.0, d)) - chart.S(z - cplx(0.0, d))) / (2.0 * d);
            const cplx q = chart.Q(z);
            const double alpha = q.real(), beta = -q.imag();
            out.gradient_defect = std::max({out.gradient_defect, std::abs(sx.real() + beta), std::abs(sy.real() - alpha),
                                            std::abs(sx.imag() - alpha), std::abs(sy.imag() - beta)});
        }
    const double h2 = grid.h * grid.h;
    for (int j = 1; j + 1 < grid.ny; ++j)
        for (int i = 1; i + 1 < grid.nx; ++i) {
            const double lap = (out.v(i + 1, j) + out.v(i - 1, j) + out.v(i, j + 1) + out.v(i, j - 1) - 4.0 * out.v(i, j)) / h2;
            out.laplacian_residual = std::max(out.laplacian_residual, std::abs(lap));
        }
    return out;
}

SolutionReport invert_to_solution(const ConformalChart& chart, const AnalyticCurve& f, const GridSpec& grid,
                                  double sample_half_width, int samples) {
    grid.validate();
    SolutionReport rep;
    rep.u = ScalarField(grid);
    rep.u_signed = ScalarField(grid);
    rep.U = ScalarField(grid);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int j = 0; j < grid.ny; ++j) {
        bool have = false;
        cplx prev;
        for (int i = 0; i < grid.nx; ++i) {
            const cplx w(grid.x(i), grid.y(j));
            cplx z = have ? prev : -std::conj(w);
            bool ok = chart.invert(w, z);
            if (!ok && have) {
                z = -std::conj(w);
                ok = chart.invert(w, z);
            }
            if (!ok) {
                ++rep.masked;
                rep.u(i, j) = rep.u_signed(i, j) = rep.U(i, j) = nan;
                have = false;
                continue;
            }
            rep.U(i, j) = z.real();
            rep.u_signed(i, j) = z.imag();
            rep.u(i, j) = std::max(0.0, z.imag());
            prev = z;
            have = true;
        }
    }
    ensure(rep.masked == 0, ErrorKind::Domain,
           "S cannot be inverted on the whole grid; shrink the domain below radius " +
               std::to_string(chart.Q.radius));

    const double h2 = grid.h * grid.h;
    for (int j = 1; j + 1 < grid.ny; ++j)
        for (int i = 1; i + 1 < grid.nx; ++i) {
            const auto& u = rep.u_signed;
            if (u(i, j) <= 0.0 || u(i + 1, j) <= 0.0 || u(i - 1, j) <= 0.0 || u(i, j + 1) <= 0.0 || u(i, j - 1) <= 0.0)
                continue;
            const double lap = (u(i + 1, j) + u(i - 1, j) + u(i, j + 1) + u(i, j - 1) - 4.0 * u(i, j)) / h2;
            rep.pde_residual = std::max(rep.pde_residual, std::abs(lap));
        }

    auto u_at = [&chart](double x, double y) {
        cplx z = -std::conj(cplx(x, y));
        ensure(chart.invert(cplx(x, y), z), ErrorKind::NonInvertible, "S is not invertible at a sample point");
        return z.imag();
    };
    const double d = 1e-5;
    for (int k = 0; k < samples; ++k) {
        const double x = sample_half_width * (2.0 * k / (samples - 1.0) - 1.0);
        const double y = f.f(x);
        rep.bc_residual = std::max(rep.bc_residual, std::abs(u_at(x, y)));
        const double ux = (u_at(x + d, y) - u_at(x - d, y)) / (2.0 * d);
        const double uy = (u_at(x, y + d) - u_at(x, y - d)) / (2.0 * d);
        rep.fb_residual = std::max(rep.fb_residual, std::abs(std::hypot(ux, uy) - 1.0));
    }

    // zero level of u per grid column, bracketed by a sign change of the sampled field
    for (int i = 0; i < grid.nx; ++i) {
        const double x = grid.x(i);
        if (std::abs(x) > sample_half_width * (1.0 + 1e-12)) continue;
        int jb = -1;
        for (int j = 0; j + 1 < grid.ny; ++j)
            if (rep.u_signed(i, j) <= 0.0 && rep.u_signed(i, j + 1) > 0.0) {
                jb = j;
                break;
            }
        ensure(jb >= 0, ErrorKind::Domain, "free boundary does not cross a grid column");
        std::uintmax_t iters = 100;
        auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15; };
        const auto [a, b] = boost::math::tools::toms748_solve([&](double y) { return u_at(x, y); }, grid.y(jb),
                                                              grid.y(jb + 1), tol, iters);
        const double g = 0.5 * (a + b);
        rep.xs.push_back(x);
        rep.g.push_back(g);
        rep.f.push_back(f.f(x));
        rep.geometry_defect = std::max(rep.geometry_defect, std::abs(g - f.f(x)));
    }

    const double r = chart.Q.radius;
    for (int a = 0; a < 64; ++a)
        for (double frac : {0.2, 0.5, 0.8}) {
            const cplx zp = std::polar(frac * r, 2.0 * std::numbers::pi * a / 64.0);
            cplx z = zp;
            if (!chart.invert(chart.S(zp), z)) {
                rep.composition_defect = std::numeric_limits<double>::infinity();
                continue;
            }
            rep.composition_defect = std::max(rep.composition_defect, std::abs(z - zp));
        }

    const double e = 1e-6;
    const cplx sx = (chart.S(e) - chart.S(-e)) / (2.0 * e);
    const cplx sy = (chart.S(cplx(0.0, e)) - chart.S(cplx(0.0, -e))) / (2.0 * e);
    rep.dS0_defect = std::max({std::abs(sx.real() + 1.0), std::abs(sy.real()), std::abs(sx.imag()), std::abs(sy.imag() - 1.0)});

    // g = v(s(x), 0) with V(s(x), 0) = x, by series reversion
    const auto& pc = chart.Psi.c;
    std::vector<double> X(taylor_degree + 1, 0.0), Y(taylor_degree + 1, 0.0);
    for (std::size_t k = 0; k < X.size() && k < pc.size(); ++k) {
        X[k] = pc[k].real();
        Y[k] = -pc[k].imag();
    }
    rep.recovered_taylor = compose(Y, revert(X));
    return rep;
}

}  // namespace fbl
