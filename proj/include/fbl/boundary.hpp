#pragma once

// Construction of a one-phase Bernoulli solution whose free boundary is a given analytic graph.

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fbl/grid.hpp"

namespace fbl {

/// Analytic graph y = f(x) with f(0) = f'(0) = 0, given by evaluators and Taylor coefficients.
class AnalyticCurve {
public:
    using Fn = std::function<double(double)>;

    /// rho is the radius on which |f'| <= 1 is guaranteed.
    AnalyticCurve(std::string name, std::vector<double> taylor, double rho, Fn f, Fn fp);

    static AnalyticCurve flat();
    /// cosh x - 1, rho = asinh 1.
    static AnalyticCurve catenary();
    /// eps x^2, rho = min(1, 1 / (2 eps)).
    static AnalyticCurve parabola(double eps);
    /// Polynomial with coefficients c_0, c_1, ...; rho defaults to the largest radius
    /// (searched on [0, 1]) with |f'| <= 1.
    static AnalyticCurve polynomial(std::vector<double> coefficients, double rho = 0.0);
    /// Flat key/value file with keys `coefficients` (comma-separated) and optional `radius`.
    static AnalyticCurve from_file(const std::string& path);
    /// "flat", "catenary", "parabola" (eps = 0.1) or a coefficient file path.
    static AnalyticCurve by_name(const std::string& name);

    const std::string& name() const { return name_; }
    double rho() const { return rho_; }
    double f(double x) const { return f_(x); }
    double fp(double x) const { return fp_(x); }
    /// Taylor coefficients about 0 up to degree taylor_degree.
    const std::vector<double>& taylor() const { return taylor_; }

private:
    std::string name_;
    std::vector<double> taylor_;
    double rho_;
    Fn f_, fp_;
};

inline constexpr int taylor_degree = 24;

/// eta(x) = int_0^x sqrt(1 + f'(t)^2) dt by adaptive Gauss-Kronrod. Requires |x| <= rho.
double arclength(const AnalyticCurve& f, double x);

struct AlphaBeta {
    std::function<double(double)> alpha, beta;
    double s_min = 0.0, s_max = 0.0;  // eta-range on which the samplers are valid
    double circle_defect = 0.0;       // max |alpha^2 + beta^2 - 1| over 1000 samples
};

/// beta(s) = 1 / eta'(eta^{-1}(s)) and alpha(s) = f'(eta^{-1}(s)) beta(s), with eta^{-1} by Newton.
/// The samplers cover the eta-image of [-rho, rho].
AlphaBeta coefficients_alpha_beta(const AnalyticCurve& f);

/// Inverse arclength by Newton to 1e-12; throws Convergence on failure.
double inverse_arclength(const AnalyticCurve& f, double s);

using cplx = std::complex<double>;

struct HolomorphicSeries {
    std::vector<cplx> c;       // Taylor coefficients about 0
    double radius = 0.0;       // working radius
    double convergence = 0.0;  // estimated radius of convergence
    double tail = 0.0;         // bound on the truncation tail at the working radius
    double boundary_defect = 0.0;  // max ||Q(s)| - 1| on the real interval
    double chebyshev_defect = 0.0; // max difference to a Chebyshev fit of the samplers

    cplx operator()(cplx z) const;
    cplx derivative(cplx z) const;
    /// Coefficients of the primitive vanishing at 0.
    HolomorphicSeries primitive() const;
};

/// Tolerance for the truncation tail.
inline constexpr double series_tail_tolerance = 1e-10;

/// Taylor coefficients of Q = alpha - i beta (in the arclength variable) by power-series
/// arithmetic on the Taylor data of f. Throws OutOfRange when the tail bound fails at `radius`.
HolomorphicSeries extend_Q(const AnalyticCurve& f, double radius, int degree = taylor_degree);

/// Largest radius (<= the curve's arclength range and half the estimated convergence radius)
/// at which the tail bound of extend_Q holds.
double working_radius(const AnalyticCurve& f, int degree = taylor_degree);

/// The conformal chart S = (V, v): V - i v is the primitive of -i Q.
struct ConformalChart {
    HolomorphicSeries Q;
    HolomorphicSeries Psi;  // primitive of -i Q

    explicit ConformalChart(HolomorphicSeries q);
    /// (V, v) at z' = x' + i y', returned as V + i v.
    cplx S(cplx zp) const { return std::conj(Psi(zp)); }
    /// Preimage z' with S(z') = w by complex Newton; false when it leaves the working disk.
    bool invert(cplx w, cplx& zp) const;
};

struct FormFields {
    ScalarField V, v;
    double gradient_defect = 0.0;  // centred differences against (-beta, alpha), (alpha, beta)
    double laplacian_residual = 0.0;  // max |5-point Laplacian of v| at interior nodes
};

/// V and v sampled on `grid`; every node must lie in the working disk.
FormFields integrate_forms(const ConformalChart& chart, const GridSpec& grid);

struct SolutionReport {
    ScalarField u;         // positive part
    ScalarField u_signed;  // harmonic across the free boundary
    ScalarField U;         // first component of T = S^{-1}
    std::vector<double> xs, g, f;  // recovered boundary against the curve
    double pde_residual = 0.0;   // max |5-point Laplacian| where the stencil lies in {u > 0}
    double bc_residual = 0.0;    // max |u(x, f(x))|
    double fb_residual = 0.0;    // max ||grad u(x, f(x))| - 1|
    double geometry_defect = 0.0;  // max |g - f|
    double composition_defect = 0.0;  // max |T(S(z')) - z'| on the working disk
    double dS0_defect = 0.0;      // |grad S(0) - diag(-1, 1)|
    std::vector<double> recovered_taylor;  // Taylor coefficients of g
    int masked = 0;
};

/// Inverts S onto `grid` and verifies the result on the curve samples |x| <= sample_half_width.
SolutionReport invert_to_solution(const ConformalChart& chart, const AnalyticCurve& f,
                                  const GridSpec& grid, double sample_half_width, int samples = 201);

}  // namespace fbl
