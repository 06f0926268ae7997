#include "fbl/beltrami.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace fbl {

DetNormalized normalize_det(const MatrixField& A, double constant_tol) {
    DetNormalized out;
    out.M = MatrixField(A.spec);
    out.det_min = std::numeric_limits<double>::infinity();
    out.det_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < A.a11.size(); ++k) {
        const auto [a, b, c] = A.at(k);
        const double det = a * c - b * b;
        ensure(det > 0.0 && a > 0.0, ErrorKind::Ellipticity, "coefficient matrix is not positive definite");
        out.det_min = std::min(out.det_min, det);
        out.det_max = std::max(out.det_max, det);
        const double s = 1.0 / std::sqrt(det);
        out.M.set(k, a * s, b * s, c * s);
    }
    out.det_constant = out.det_max - out.det_min <= constant_tol * out.det_max;
    out.M.update_bounds();
    out.M.check_det_normalized();
    return out;
}

void BeltramiPair::update_bound() {
    k_ell = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) k_ell = std::max(k_ell, std::abs(mu[k]) + std::abs(nu[k]));
}

cplx beltrami_coefficient(double m11, double m12, double m22) {
    const double det = m11 * m22 - m12 * m12;
    ensure(det > 0.0 && m11 > 0.0, ErrorKind::Ellipticity, "coefficient matrix is not positive definite");
    // G = M^{-1}; the formula is invariant under scaling of G
    const double g11 = m22 / det, g12 = -m12 / det, g22 = m11 / det;
    const double sq = std::sqrt(g11 * g22 - g12 * g12);
    return cplx(g11 - g22, 2.0 * g12) / (g11 + g22 + 2.0 * sq);
}

std::array<double, 3> matrix_from_beltrami(cplx mu) {
    const double n = std::norm(mu);
    ensure(n < 1.0, ErrorKind::Ellipticity, "Beltrami coefficient must satisfy |mu| < 1");
    const double s = 1.0 / (1.0 - n);
    return {std::norm(1.0 - mu) * s, -2.0 * mu.imag() * s, std::norm(1.0 + mu) * s};
}

BeltramiPair beltrami_from_matrix(const MatrixField& M) {
    BeltramiPair p;
    p.spec = M.spec;
    p.mu.resize(M.a11.size());
    p.nu.assign(M.a11.size(), cplx(0.0, 0.0));
    for (std::size_t k = 0; k < M.a11.size(); ++k) {
        const auto [a, b, c] = M.at(k);
        p.mu[k] = beltrami_coefficient(a, b, c);
    }
    p.update_bound();
    ensure(p.k_ell < 1.0, ErrorKind::Ellipticity, "Beltrami coefficients are not uniformly elliptic");
    return p;
}

namespace {

cplx sample_complex(const GridSpec& s, const std::vector<cplx>& v, double x, double y) {
    double fx = std::clamp((x - s.x0) / s.h, 0.0, static_cast<double>(s.nx - 1));
    double fy = std::clamp((y - s.y0) / s.h, 0.0, static_cast<double>(s.ny - 1));
    const int i = std::min(static_cast<int>(fx), s.nx - 2);
    const int j = std::min(static_cast<int>(fy), s.ny - 2);
    const double tx = fx - i, ty = fy - j;
    return (1 - ty) * ((1 - tx) * v[s.index(i, j)] + tx * v[s.index(i + 1, j)]) +
           ty * ((1 - tx) * v[s.index(i, j + 1)] + tx * v[s.index(i + 1, j + 1)]);
}

}  // namespace

BeltramiPair reflect_coefficients(const BeltramiPair& upper, const GridSpec& target) {
    const GridSpec& u = upper.spec;
    ensure(u.x0 <= -1.0 + 1e-12 && u.x_max() >= 1.0 - 1e-12 && u.y0 <= 1e-12 && u.y_max() >= 1.0 - 1e-12,
           ErrorKind::Domain, "coefficients must cover the upper unit half-disk");
    BeltramiPair out;
    out.spec = target;
    out.mu.assign(target.size(), cplx(0.0, 0.0));
    out.nu.assign(target.size(), cplx(0.0, 0.0));
    const double axis_tol = 1e-12 * target.h;
    for (int j = 0; j < target.ny; ++j)
        for (int i = 0; i < target.nx; ++i) {
            const double x = target.x(i), y = target.y(j);
            if (x * x + y * y >= 1.0) continue;
            const std::size_t k = target.index(i, j);
            if (std::abs(y) <= axis_tol) {
                out.mu[k] = sample_complex(u, upper.mu, x, 0.0).real();
                out.nu[k] = sample_complex(u, upper.nu, x, 0.0).real();
            } else if (y > 0.0) {
                out.mu[k] = sample_complex(u, upper.mu, x, y);
                out.nu[k] = sample_complex(u, upper.nu, x, y);
            } else {
                out.mu[k] = std::conj(sample_complex(u, upper.mu, x, -y));
                out.nu[k] = std::conj(sample_complex(u, upper.nu, x, -y));
            }
        }
    out.update_bound();
    return out;
}

GridSpec periodic_grid(int N, double L) {
    ensure(N >= 8 && N % 2 == 0, ErrorKind::DegenerateGrid, "periodic grid needs an even N >= 8");
    return GridSpec{N, N, -0.5 * L, -0.5 * L, L / N};
}

namespace {

class Fft2 {
public:
    explicit Fft2(int n) : n_(n) {
        buf_ = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
        fwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    ~Fft2() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    // Applies a Fourier multiplier symbol(xi1, xi2); zero and Nyquist modes are dropped.
    template <class Symbol>
    std::vector<cplx> multiply(const std::vector<cplx>& g, double L, Symbol symbol) {
        const std::size_t total = static_cast<std::size_t>(n_) * n_;
        ensure(g.size() == total, ErrorKind::DegenerateGrid, "field size does not match the FFT grid");
        auto* b = reinterpret_cast<cplx*>(buf_);
        std::copy(g.begin(), g.end(), b);
        fftw_execute(fwd_);
        const double w = 2.0 * std::numbers::pi / L;
        for (int j = 0; j < n_; ++j) {
            const int m2 = j < n_ / 2 ? j : j - n_;
            for (int i = 0; i < n_; ++i) {
                const int m1 = i < n_ / 2 ? i : i - n_;
                cplx& c = b[static_cast<std::size_t>(j) * n_ + i];
                if (m1 == -n_ / 2 || m2 == -n_ / 2 || (m1 == 0 && m2 == 0))
                    c = 0.0;
                else
                    c *= symbol(w * m1, w * m2);
            }
        }
        fftw_execute(bwd_);
        std::vector<cplx> out(b, b + total);
        const double scale = 1.0 / static_cast<double>(total);
        for (auto& v : out) v *= scale;
        return out;
    }

private:
    int n_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

cplx beurling_symbol(double a, double b) { return cplx(a, -b) / cplx(a, b); }
cplx cauchy_symbol(double a, double b) { return 2.0 / (cplx(0.0, 1.0) * cplx(a, b)); }

double rms(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::norm(a[k] - b[k]);
    return std::sqrt(s / a.size());
}

void check_periodic(const GridSpec& s) {
    ensure(s.nx == s.ny && s.nx % 2 == 0 && std::abs(s.x0 + 0.5 * s.nx * s.h) < 1e-12 &&
               std::abs(s.y0 - s.x0) < 1e-12,
           ErrorKind::Domain, "Beltrami solver needs a centred periodic square grid");
}

// Eisenstein sums of the unit square lattice: G4 = Gamma(1/4)^8 / (960 pi^2), G8 = 3 G4^2 / 7.
double lattice_g4() { return std::pow(std::tgamma(0.25), 8) / (960.0 * std::numbers::pi * std::numbers::pi); }
double lattice_g8() { return 3.0 * lattice_g4() * lattice_g4() / 7.0; }

// Moments (1/pi) sum g(w) w^k h^2 for k = 0..7.
std::array<cplx, 8> moments(const GridSpec& s, const std::vector<cplx>& g) {
    std::array<cplx, 8> m{};
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            const cplx v = g[s.index(i, j)];
            if (v == 0.0) continue;
            const cplx w(s.x(i), s.y(j));
            cplx p = v;
            for (int k = 0; k < 8; ++k) {
                m[k] += p;
                p *= w;
            }
        }
    for (auto& v : m) v *= s.h * s.h / std::numbers::pi;
    return m;
}

// (1/pi) integral of g(w) (z - w)^n, expanded in the moments.
cplx moment_power(const std::array<cplx, 8>& m, cplx z, int n) {
    cplx acc(0.0, 0.0);
    double binom = 1.0;
    for (int k = 0; k <= n; ++k) {
        acc += binom * std::pow(z, n - k) * ((k % 2) ? -m[k] : m[k]);
        binom = binom * (n - k) / (k + 1);
    }
    return acc;
}

// Difference between the free-space and the periodic kernels, 1/z - K_per(z) - pi conj(z)/A,
// expanded to the z^7 term: G4 z^3 + G8 z^7 on the lattice L Z[i].
struct LatticeCorrection {
    double g4, g8;
    explicit LatticeCorrection(double L) : g4(lattice_g4() / std::pow(L, 4)), g8(lattice_g8() / std::pow(L, 8)) {}
    cplx cauchy(const std::array<cplx, 8>& m, cplx z) const {
        return g4 * moment_power(m, z, 3) + g8 * moment_power(m, z, 7);
    }
    cplx beurling(const std::array<cplx, 8>& m, cplx z) const {
        return 3.0 * g4 * moment_power(m, z, 2) + 7.0 * g8 * moment_power(m, z, 6);
    }
};

}  // namespace

std::vector<cplx> beurling_transform(const std::vector<cplx>& g, int N, double L) {
    Fft2 fft(N);
    return fft.multiply(g, L, beurling_symbol);
}

std::vector<cplx> cauchy_transform(const std::vector<cplx>& g, int N, double L) {
    Fft2 fft(N);
    return fft.multiply(g, L, cauchy_symbol);
}

cplx QuasiconformalMap::operator()(double x, double y) const {
    const double slack = 1e-9;
    ensure(x >= spec.x0 - slack && x <= spec.x_max() + slack && y >= spec.y0 - slack &&
               y <= spec.y_max() + slack,
           ErrorKind::Domain, "point outside the map grid");
    return sample_complex(spec, f, x, y);
}

QuasiconformalMap solve_beltrami(const BeltramiPair& p, const BeltramiOptions& opt) {
    const GridSpec& s = p.spec;
    check_periodic(s);
    ensure(p.k_ell < 1.0, ErrorKind::Ellipticity, "Beltrami coefficients need k < 1");
    const int N = s.nx;
    const double L = N * s.h;
    Fft2 fft(N);

    QuasiconformalMap q;
    q.spec = s;
    q.k_ell = p.k_ell;
    const std::size_t total = s.size();
    std::vector<cplx> g(total, 0.0), next(total);
    std::vector<cplx> Sg(total, 0.0);
    const LatticeCorrection lattice(L);
    auto beurling = [&](const std::vector<cplx>& v) {
        auto out = fft.multiply(v, L, beurling_symbol);
        if (opt.lattice_correction) {
            const auto m = moments(s, v);
            for (int j = 0; j < N; ++j)
                for (int i = 0; i < N; ++i) out[s.index(i, j)] += lattice.beurling(m, cplx(s.x(i), s.y(j)));
        }
        return out;
    };
    double prev = 0.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
        for (std::size_t k = 0; k < total; ++k) {
            const cplx fz = 1.0 + Sg[k];
            next[k] = p.mu[k] * fz + p.nu[k] * std::conj(fz);
        }
        const double d = rms(next, g);
        g.swap(next);
        q.update_norms.push_back(d);
        q.iterations = it;
        if (it > 1 && prev > 1e-13) q.contraction_rate = std::max(q.contraction_rate, d / prev);
        prev = d;
        if (d <= opt.tol) {
            q.converged = true;
            break;
        }
        Sg = beurling(g);
    }
    Sg = beurling(g);

    cplx mean(0.0, 0.0);
    for (const auto& v : g) mean += v;
    mean /= static_cast<double>(total);
    auto Cg = fft.multiply(g, L, cauchy_symbol);
    if (opt.lattice_correction) {
        const auto m = moments(s, g);
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) Cg[s.index(i, j)] += lattice.cauchy(m, cplx(s.x(i), s.y(j)));
    }
    q.f.resize(total);
    q.fz.resize(total);
    q.fzbar.resize(total);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
            const std::size_t k = s.index(i, j);
            const cplx z(s.x(i), s.y(j));
            q.f[k] = z + Cg[k] + mean * std::conj(z);
            q.fz[k] = 1.0 + Sg[k];
            q.fzbar[k] = g[k];
        }

    const cplx f0 = q(0.0, 0.0);
    const cplx a = 1.0 / (q(1.0, 0.0) - f0);
    for (std::size_t k = 0; k < total; ++k) {
        q.f[k] = a * (q.f[k] - f0);
        q.fz[k] *= a;
        q.fzbar[k] *= a;
    }
    q.residual0 = std::abs(q(0.0, 0.0));
    q.residual1 = std::abs(q(1.0, 0.0) - 1.0);

    for (int j = 1; j < N; ++j)
        for (int i = 0; i < N; ++i)
            q.symmetry_defect =
                std::max(q.symmetry_defect, std::abs(q.f[s.index(i, N - j)] - std::conj(q.f[s.index(i, j)])));

    // discrete Jacobian and distortion inside B_0.9
    int inside = 0, positive = 0;
    double kmax = 0.0;
    const double inv2h = 0.5 / s.h;
    for (int j = 1; j + 1 < N; ++j)
        for (int i = 1; i + 1 < N; ++i) {
            const double x = s.x(i), y = s.y(j);
            if (x * x + y * y > 0.81) continue;
            const cplx fx = (q.f[s.index(i + 1, j)] - q.f[s.index(i - 1, j)]) * inv2h;
            const cplx fy = (q.f[s.index(i, j + 1)] - q.f[s.index(i, j - 1)]) * inv2h;
            const double J = fx.real() * fy.imag() - fx.imag() * fy.real();
            ++inside;
            if (J > 0.0) ++positive;
            const cplx dz = 0.5 * (fx - cplx(0.0, 1.0) * fy);
            const cplx dzb = 0.5 * (fx + cplx(0.0, 1.0) * fy);
            if (std::abs(dz) > 0.0) kmax = std::max(kmax, std::abs(dzb) / std::abs(dz));
        }
    q.jacobian_positive = inside ? static_cast<double>(positive) / inside : 1.0;
    q.K_est = kmax < 1.0 ? (1.0 + kmax) / (1.0 - kmax) : std::numeric_limits<double>::infinity();

    // Hoelder fit of min_{|z|=r} |f(z)| against r on dyadic radii
    std::vector<double> lr, lm;
    for (int e = 7; e >= 2; --e) {
        const double r = std::ldexp(1.0, -e);
        double m = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 64; ++t) {
            const double th = 2.0 * std::numbers::pi * t / 64;
            m = std::min(m, std::abs(q(r * std::cos(th), r * std::sin(th))));
        }
        lr.push_back(std::log(r));
        lm.push_back(std::log(m));
    }
    const double n = static_cast<double>(lr.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < lr.size(); ++k) {
        sx += lr[k];
        sy += lm[k];
        sxx += lr[k] * lr[k];
        sxy += lr[k] * lm[k];
    }
    q.delta_est = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    q.c_est = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lr.size(); ++k) q.c_est = std::min(q.c_est, std::exp(lm[k] - q.delta_est * lr[k]));
    return q;
}

namespace {

struct MapSample {
    cplx f, fx, fy;
};

MapSample sample_map(const QuasiconformalMap& q, double x, double y) {
    const GridSpec& s = q.spec;
    double fx = std::clamp((x - s.x0) / s.h, 0.0, static_cast<double>(s.nx - 1));
    double fy = std::clamp((y - s.y0) / s.h, 0.0, static_cast<double>(s.ny - 1));
    const int i = std::min(static_cast<int>(fx), s.nx - 2);
    const int j = std::min(static_cast<int>(fy), s.ny - 2);
    const double tx = fx - i, ty = fy - j;
    const cplx f00 = q.f[s.index(i, j)], f10 = q.f[s.index(i + 1, j)];
    const cplx f01 = q.f[s.index(i, j + 1)], f11 = q.f[s.index(i + 1, j + 1)];
    MapSample m;
    m.f = (1 - ty) * ((1 - tx) * f00 + tx * f10) + ty * ((1 - tx) * f01 + tx * f11);
    m.fx = ((1 - ty) * (f10 - f00) + ty * (f11 - f01)) / s.h;
    m.fy = ((1 - tx) * (f01 - f00) + tx * (f11 - f10)) / s.h;
    return m;
}

bool invert_point(const QuasiconformalMap& q, cplx target, cplx& z) {
    const GridSpec& s = q.spec;
    for (int it = 0; it < 50; ++it) {
        if (z.real() < s.x0 || z.real() > s.x_max() || z.imag() < s.y0 || z.imag() > s.y_max()) return false;
        const auto m = sample_map(q, z.real(), z.imag());
        const cplx r = m.f - target;
        const double a = m.fx.real(), b = m.fy.real(), c = m.fx.imag(), d = m.fy.imag();
        const double det = a * d - b * c;
        if (!(std::abs(det) > 1e-14)) return false;
        const double dx = (d * r.real() - b * r.imag()) / det;
        const double dy = (-c * r.real() + a * r.imag()) / det;
        z -= cplx(dx, dy);
        if (std::hypot(dx, dy) <= 1e-10) return std::abs(sample_map(q, z.real(), z.imag()).f - target) <= 1e-8;
    }
    return false;
}

}  // namespace

PullbackResult pullback(const ScalarField& u, const QuasiconformalMap& f, const GridSpec& target) {
    target.validate();
    PullbackResult out;
    out.h = ScalarField(target);
    out.masked.assign(target.size(), 0);
    const double slack = 1e-9;
    for (int j = 0; j < target.ny; ++j) {
        bool have_prev = false;
        cplx prev;
        for (int i = 0; i < target.nx; ++i) {
            const cplx zeta(target.x(i), target.y(j));
            cplx z = have_prev ? prev : zeta;
            bool ok = invert_point(f, zeta, z);
            if (!ok && have_prev) {
                z = zeta;
                ok = invert_point(f, zeta, z);
            }
            // the real axis is invariant; remove rounding across the slit
            if (ok && std::abs(z.imag()) <= slack && zeta.imag() == 0.0) z = z.real();
            if (ok && !u.contains(z.real(), z.imag(), slack)) ok = false;
            const std::size_t k = target.index(i, j);
            if (!ok) {
                out.masked[k] = 1;
                ++out.masked_count;
                have_prev = false;
                continue;
            }
            out.h.values[k] = u.sample(z.real(), std::max(z.imag(), u.spec.y0));
            prev = z;
            have_prev = true;
        }
    }
    return out;
}

}  // namespace fbl
