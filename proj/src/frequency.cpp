#include "fbl/frequency.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fbl/field_io.hpp"
#include "fbl/field_ops.hpp"
#include "fbl/obstacle.hpp"

namespace fbl {

namespace {

struct Fit {
    double slope = 0.0;
    double intercept = 0.0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return {};
    const double slope = (n * sxy - sx * sy) / den;
    return {slope, (sy - slope * sx) / n};
}

// raw integrals: int_{B_r+} |grad w|^2 and int_{dB_r+} w^2
std::pair<double, double> raw_integrals(const ScalarField& w, double r, int d) {
    return {dirichlet_energy(w, r, d) * std::pow(r, d - 2), height(w, r, d) * std::pow(r, d - 1)};
}

double l1_norm(const ScalarField& f) {
    ScalarField a(f.spec);
    for (std::size_t k = 0; k < f.values.size(); ++k) a.values[k] = std::abs(f.values[k]);
    return half_disk_integral(a, 1.0);
}

double l1_distance(const ScalarField& f, const ScalarField& g) {
    ScalarField a(f.spec);
    for (std::size_t k = 0; k < f.values.size(); ++k) a.values[k] = std::abs(f.values[k] - g.values[k]);
    return half_disk_integral(a, 1.0);
}

}  // namespace

WeissConstants WeissConstants::make(double k, double k0, int d) {
    ensure(d >= 2, ErrorKind::Domain, "dimension must be at least 2");
    ensure(k0 >= 2.0, ErrorKind::Domain, "truncation level k0 must be at least 2");
    ensure(k > 0.0 && k < k0, ErrorKind::Domain, "frequency parameter must satisfy 0 < k < k0");
    return {d, k, k0};
}

double weiss0(const ScalarField& w, double k, double r, int d) {
    const auto [D, H] = raw_integrals(w, r, d);
    return std::pow(r, -(d + 2.0 * k - 2.0)) * (D - k / r * H);
}

double weiss(const ScalarField& w, const WeissConstants& c, double r) {
    const auto [D, H] = raw_integrals(w, r, c.d);
    const double sr = std::sqrt(r);
    return std::exp(c.a() * sr) * std::pow(r, -(c.d + 2.0 * c.k - 2.0)) *
           (D - c.k * (1.0 - c.b() * sr) / r * H);
}

std::vector<double> default_radii(const GridSpec& s, double r_max, double r_min) {
    const double start = std::max(2.0 * s.h, r_min);
    ensure(start < r_max, ErrorKind::Domain, "radius range is empty");
    std::vector<double> radii;
    // count down from r_max so that the outer radius is hit exactly
    for (double r = r_max; r >= start * (1.0 - 1e-12); r /= std::sqrt(2.0)) radii.push_back(r);
    std::reverse(radii.begin(), radii.end());
    return radii;
}

FrequencyProfile frequency_profile(const ScalarField& w, const WeissConstants& c,
                                   const std::vector<double>& radii) {
    ensure(radii.size() >= 8, ErrorKind::Domain, "frequency profile needs at least 8 radii");
    std::vector<double> rs = radii;
    std::sort(rs.begin(), rs.end());
    FrequencyProfile p;
    p.constants = c;
    const double b = c.b();
    for (double r : rs) {
        ensure(admissible_radius(w.spec, r), ErrorKind::Domain, "radius exceeds the grid");
        const double H = height(w, r, c.d);
        const double D = dirichlet_energy(w, r, c.d);
        if (!(H >= 1e-30)) p.infinite_order = true;
        const double N = H > 0.0 ? D / H : 0.0;
        const double den = 1.0 - b * std::sqrt(r);
        p.r.push_back(r);
        p.H.push_back(H);
        p.D.push_back(D);
        p.N.push_back(N);
        p.Ntrunc.push_back(den > 0.0 ? std::min(N / den, c.k0) : c.k0);
        p.W0.push_back(weiss0(w, c.k, r, c.d));
        p.W.push_back(weiss(w, c, r));
    }
    std::array<double, 3> small{};
    for (int k = 0; k < 3; ++k) small[k] = std::min(p.N[k], c.k0);
    std::sort(small.begin(), small.end());
    p.l = small[1];
    p.m = std::max(1, static_cast<int>(std::lround((p.l + 0.5) / 2.0)));
    p.mismatch = std::abs(p.l - (2.0 * p.m - 0.5));
    p.branch = !p.infinite_order && p.mismatch <= branch_match_tolerance;
    if (!p.infinite_order) {
        std::vector<double> lr, lh;
        for (std::size_t k = 0; k < p.r.size(); ++k) {
            lr.push_back(std::log(p.r[k]));
            lh.push_back(std::log(p.H[k]));
        }
        p.gamma_est = least_squares(lr, lh).slope / 2.0;
    }
    return p;
}

BlowupReport blowup_check(const ScalarField& w, double l, std::vector<double> radii) {
    ensure(l > 0.0, ErrorKind::Domain, "blow-up exponent must be positive");
    ensure(radii.size() >= 3, ErrorKind::Domain, "blow-up check needs at least 3 radii");
    ensure(admissible_radius(w.spec, 1.0), ErrorKind::Domain, "field must cover the unit half-disk");
    std::sort(radii.begin(), radii.end(), std::greater<>());
    BlowupReport rep;
    rep.radii = radii;
    std::vector<ScalarField> scaled;
    for (double r : radii) scaled.push_back(rescale(w, r, std::pow(r, l)));

    for (std::size_t k = 0; k + 1 < scaled.size(); ++k) {
        const double norm = std::max(l1_norm(scaled[k]), 1e-300);
        rep.differences.push_back(l1_distance(scaled[k], scaled[k + 1]) / norm);
    }
    const ScalarField& finest = scaled.back();
    for (std::size_t k = 0; k < scaled.size(); ++k)
        rep.decay.push_back(std::pow(radii[k], l) * l1_distance(scaled[k], finest));

    std::vector<double> lr, ld;
    for (std::size_t k = 0; k < rep.differences.size(); ++k)
        if (rep.differences[k] > 0.0) {
            lr.push_back(std::log(radii[k]));
            ld.push_back(std::log(rep.differences[k]));
        }
    if (lr.size() >= 2) rep.difference_exponent = least_squares(lr, ld).slope;

    lr.clear();
    ld.clear();
    for (std::size_t k = 0; k + 1 < rep.decay.size(); ++k)
        if (rep.decay[k] > 0.0) {
            lr.push_back(std::log(radii[k]));
            ld.push_back(std::log(rep.decay[k]));
        }
    if (lr.size() >= 2) {
        const auto fit = least_squares(lr, ld);
        rep.decay_exponent = fit.slope;
        rep.C = std::exp(fit.intercept);
    }

    const bool quiet = std::all_of(rep.differences.begin(), rep.differences.end(),
                                   [](double d) { return d <= blowup_noise; });
    bool monotone = true;
    for (std::size_t k = 0; k + 1 < rep.differences.size(); ++k)
        if (rep.differences[k + 1] > rep.differences[k] + blowup_noise) monotone = false;
    rep.cauchy = quiet || (monotone && rep.difference_exponent > 0.1);
    return rep;
}

DecayBounds decay_bounds(const ScalarField& w, double l, const std::vector<double>& radii,
                         double ratio_bound) {
    ensure(l > 0.0, ErrorKind::Domain, "decay exponent must be positive");
    ensure(!radii.empty(), ErrorKind::Domain, "decay bounds need radii");
    DecayBounds out;
    out.C_upper = 0.0;
    out.eta_lower = std::numeric_limits<double>::infinity();
    for (double r : radii) {
        const double q = height(w, r) / std::pow(r, 2.0 * l);
        out.C_upper = std::max(out.C_upper, q);
        out.eta_lower = std::min(out.eta_lower, q);
    }
    out.ratio = out.eta_lower > 0.0 ? out.C_upper / out.eta_lower : std::numeric_limits<double>::infinity();
    out.pass = out.eta_lower > 0.0 && out.ratio <= ratio_bound;
    return out;
}

ObstacleResidual harmonic_obstacle_residual(const ScalarField& w, double rho, double tol) {
    const GridSpec& s = w.spec;
    const auto row = s.slit_row();
    ensure(row.has_value(), ErrorKind::Domain, "field has no slit row");
    const int n = static_cast<int>(std::floor(rho / s.h + 1e-9));
    ensure(n >= 4, ErrorKind::DegenerateGrid, "residual radius is too small for the grid");
    const int i0 = static_cast<int>(std::lround(-s.x0 / s.h));
    ensure(std::abs(s.x(i0)) <= 1e-9 * s.h && i0 - n >= 0 && i0 + n < s.nx && *row + n < s.ny,
           ErrorKind::Domain, "residual half-square exceeds the grid");

    const GridSpec sub{2 * n + 1, n + 1, -n * s.h, 0.0, s.h};
    ScalarField local(sub);
    double scale = 0.0;
    for (int j = 0; j < sub.ny; ++j)
        for (int i = 0; i < sub.nx; ++i) {
            local(i, j) = w(i0 - n + i, *row + j);
            scale = std::max(scale, std::abs(local(i, j)));
        }
    ensure(local.all_finite(), ErrorKind::Domain, "field has non-finite values");

    SolverOptions opt;
    opt.tol = tol;
    auto [ref, rep] = solve_thin_obstacle({CornerCoefficients::identity(sub), local, n * s.h}, opt);
    ObstacleResidual out;
    double diff = 0.0;
    for (std::size_t k = 0; k < local.values.size(); ++k) diff = std::max(diff, std::abs(ref.values[k] - local.values[k]));
    out.residual = scale > 0.0 ? diff / scale : diff;
    const double ctol = 1e-6 * scale;
    out.intervals = static_cast<int>(contact_intervals(local, ctol).count());
    out.reference_intervals = static_cast<int>(contact_intervals(ref, ctol).count());
    out.reference = std::move(ref);
    return out;
}

void write_profile_csv(const std::string& path, const FrequencyProfile& p) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < p.r.size(); ++k)
        rows.push_back({p.r[k], p.H[k], p.D[k], p.N[k], p.Ntrunc[k], p.W0[k], p.W[k]});
    write_csv(path, {"r", "H", "D", "N", "Ntrunc", "W0", "W"}, rows);
}

}  // namespace fbl
