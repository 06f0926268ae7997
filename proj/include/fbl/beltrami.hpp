#pragma once

// Beltrami coefficients of a coefficient matrix, the normalised quasiconformal
// solution on a periodic grid, and pullbacks through it.

#include <complex>
#include <vector>

#include "fbl/grid.hpp"

namespace fbl {

using cplx = std::complex<double>;

struct DetNormalized {
    MatrixField M;
    double det_min = 0.0;
    double det_max = 0.0;
    bool det_constant = true;  // false triggers a warning in callers
};

/// M = A / sqrt(det A) pointwise. Throws Ellipticity if det A <= 0 anywhere.
DetNormalized normalize_det(const MatrixField& A, double constant_tol = 1e-10);

struct BeltramiPair {
    GridSpec spec;
    std::vector<cplx> mu, nu;
    double k_ell = 0.0;  // sup |mu| + |nu|

    void update_bound();
};

/// Beltrami coefficient of G = M^{-1} in the nu = 0 gauge:
/// mu = (g11 - g22 + 2 i g12) / (g11 + g22 + 2).
cplx beltrami_coefficient(double m11, double m12, double m22);

/// Inverse correspondence: the det-one matrix M whose coefficient is mu.
std::array<double, 3> matrix_from_beltrami(cplx mu);

BeltramiPair beltrami_from_matrix(const MatrixField& M);

/// Extends a pair given on the upper half onto `target`: conjugate reflection in the
/// lower half of the unit disk, the real part on the axis itself, zero outside B_1.
BeltramiPair reflect_coefficients(const BeltramiPair& upper, const GridSpec& target);

/// Periodic square grid [-L/2, L/2)^2 with N points per axis.
GridSpec periodic_grid(int N = 512, double L = 4.0);

/// Spectral Beurling transform, symbol conj(xi) / xi, on a periodic grid. The zero mode
/// and the Nyquist row and column are dropped.
std::vector<cplx> beurling_transform(const std::vector<cplx>& g, int N, double L);

/// Spectral Cauchy transform (inverse of d/dzbar), symbol 2 / (i xi), same truncation.
std::vector<cplx> cauchy_transform(const std::vector<cplx>& g, int N, double L);

struct BeltramiOptions {
    double tol = 1e-12;
    int max_iter = 500;
    /// Adds the G4 z^3 + G8 z^7 lattice-sum terms so that the periodic transforms
    /// approximate the free-space ones for data supported in B_1.
    bool lattice_correction = true;
};

struct QuasiconformalMap {
    GridSpec spec;  // periodic grid
    std::vector<cplx> f, fz, fzbar;
    double k_ell = 0.0;
    double residual0 = 0.0;  // |f(0)|
    double residual1 = 0.0;  // |f(1) - 1|
    double K_est = 1.0;      // empirical distortion inside B_0.9
    double delta_est = 1.0;  // Hoelder exponent of |f(z)| >= c |z|^delta
    double c_est = 1.0;
    double symmetry_defect = 0.0;       // max |f(conj z) - conj f(z)|
    double jacobian_positive = 1.0;     // fraction of nodes in B_0.9 with J > 0
    double contraction_rate = 0.0;      // largest observed ratio of successive updates
    std::vector<double> update_norms;   // RMS norm of g_{n+1} - g_n
    int iterations = 0;
    bool converged = false;

    cplx operator()(double x, double y) const;
};

QuasiconformalMap solve_beltrami(const BeltramiPair& p, const BeltramiOptions& opt = {});

struct PullbackResult {
    ScalarField h;
    std::vector<unsigned char> masked;  // 1 where the Newton inversion failed
    int masked_count = 0;
};

/// h = u o f^{-1} on the target grid. f^{-1} by Newton on the bilinear interpolant of f.
PullbackResult pullback(const ScalarField& u, const QuasiconformalMap& f, const GridSpec& target);

}  // namespace fbl
