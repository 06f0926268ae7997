#pragma once

// Classical hodograph transform, harmonic conjugates and the conformal hodograph.

#include <complex>
#include <cstdint>
#include <vector>

#include "fbl/boundary.hpp"
#include "fbl/grid.hpp"

namespace fbl {

struct HodographResult {
    ScalarField uprime;  // y = u'(s, z) with u(s, y) = z, on the (s, z) grid
    ScalarField utilde;  // u' - z
    double margin = 0.0;  // min d_y u over the grid
    double scale = 1.0;   // u was divided by this before inverting
};

/// Inverts y -> u(x, y) / scale per column (cubic Hermite interpolation, bisection then
/// Newton to 1e-12) onto z = 0, h, ..., within [0, 0.9 min over columns of max u].
/// Throws NonInvertible when d_y u <= 0 somewhere and Domain when a column does not reach u = 0.
HodographResult classical_hodograph(const ScalarField& u, double scale = 1.0);

struct HodographIdentities {
    double transport = 0.0;  // max |u_x + u_y d_s u'|
    double jacobian = 0.0;   // max |u_y d_z u' - 1|
    double round_trip = 0.0; // max |u(s, u'(s, z)) - z|
};

/// Derivative identities at interior image nodes and the round trip at all nodes.
HodographIdentities hodograph_identities(const ScalarField& u, const HodographResult& r);

struct EnergyCheck {
    double lhs = 0.0;  // int (|grad u|^2 + 1) over the strip 0 <= u <= z_max
    double rhs = 0.0;  // int (1 + (d_s u')^2 + (d_z u')^2) / d_z u' over the image
    double defect = 0.0;  // |lhs - rhs| / |lhs|
    double lhs_tilde = 0.0;  // lhs - 2 |image|
    double rhs_tilde = 0.0;  // 2 int F(grad u~) with F(x, y) = (x^2 + y^2) / (2 (1 + y))
};

/// Both integrals by trapezoid quadrature; the strip is cut per column at u'(s, 0) and u'(s, z_max).
EnergyCheck hodograph_energy_check(const ScalarField& u, const HodographResult& r);

struct TwoPhaseHodograph {
    HodographResult plus, minus;
};

/// Two hodographs of u / sqrt(lambda_u) and v / sqrt(lambda_v). Requires lambda_u >= lambda_v > 0.
TwoPhaseHodograph two_phase_hodograph(const ScalarField& u, const ScalarField& v, double lambda_u,
                                      double lambda_v);

/// U with grad U = (d_y u, -d_x u): trapezoid integration along the row y = 0 (the bottom row
/// when y = 0 is not a grid row) from x = 0 (the middle column otherwise), then vertically.
ScalarField harmonic_conjugate(const ScalarField& u);

/// Largest |loop integral| of d_y u dx - d_x u dy over random 2 x 2 cell squares.
double conjugate_loop_defect(const ScalarField& u, int loops = 200, std::uint64_t seed = 1);

using cplx = std::complex<double>;

/// P = -i (Q + i) / (Q - i) and its inverse Q = (1 + i P) / (P + i).
cplx moebius_P(cplx Q);
cplx moebius_Q(cplx P);

struct ConformalHodographOptions {
    GridSpec image;                 // (x', y') grid; must contain the row y' = 0
    double sample_half_width = 0.2; // curve samples x in [-w, w]
    int samples = 81;
};

struct ConformalHodograph {
    ScalarField U;        // harmonic conjugate of u
    ScalarField V, v;     // S = T^{-1} on the image grid, NaN where masked
    std::vector<cplx> Q, P;  // on the image grid
    std::vector<double> xs, eta;  // eta(x) = U(x, f(x))
    std::vector<unsigned char> masked;
    int masked_count = 0;
    double cr_defect = 0.0;        // max |U_x - u_y| + |U_y + u_x| at interior nodes
    double eta_defect = 0.0;       // max |eta - arclength|
    double slope_defect = 0.0;     // max |f' - v_x' / v_y'| at (eta(x), 0)
    double eta_prime_defect = 0.0; // max |eta' - 1 / v_y'| at (eta(x), 0)
    double gradient_product_defect = 0.0;  // max ||grad u| |grad v| - 1| at interior image nodes
    double imP_defect = 0.0;       // max |Im P| at (eta(x), 0)
    double modulus_defect = 0.0;   // max ||Q| - 1| at (eta(x), 0)
    double origin_defect = 0.0;    // |U(0, 0)|
};

/// u must be harmonic across the free boundary (the signed field of the constructor).
/// T = (U, u) is inverted on the image grid by Newton on the bilinear interpolants.
ConformalHodograph conformal_hodograph(const ScalarField& u, const AnalyticCurve& f,
                                       const ConformalHodographOptions& opt);

}  // namespace fbl
