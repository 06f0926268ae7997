#pragma once

// Weiss energies, the truncated Almgren frequency, blow-up convergence and decay checks.

#include <string>
#include <vector>

#include "fbl/grid.hpp"

namespace fbl {

struct WeissConstants {
    int d = 2;
    double k = 1.5;
    double k0 = 4.0;

    /// Throws Domain unless k0 >= 2 and 0 < k < k0.
    static WeissConstants make(double k, double k0, int d = 2);

    /// a_k = 2 (d + 2k - 2).
    double a() const { return 2.0 * (d + 2.0 * k - 2.0); }
    /// b = 2 (d + 2 k0).
    double b() const { return 2.0 * (d + 2.0 * k0); }
};

/// r^{-(d+2k-2)} (int_{B_r+} |grad w|^2 - (k/r) int_{dB_r, y>0} w^2).
double weiss0(const ScalarField& w, double k, double r, int d = 2);

/// exp(a_k sqrt r) r^{-(d+2k-2)} (int |grad w|^2 - k (1 - b sqrt r) / r int w^2).
double weiss(const ScalarField& w, const WeissConstants& c, double r);

/// Geometric radii with ratio sqrt 2 from max(2h, r_min) up to r_max, increasing.
std::vector<double> default_radii(const GridSpec& s, double r_max = 0.5, double r_min = 0.0);

struct FrequencyProfile {
    WeissConstants constants;
    std::vector<double> r, H, D, N, Ntrunc, W0, W;
    double l = 0.0;          // median of min(N, k0) over the three smallest radii
    int m = 0;               // nearest solution of l = 2m - 1/2
    double mismatch = 0.0;   // |l - (2m - 1/2)|
    bool branch = false;     // mismatch within the matching tolerance
    double gamma_est = 0.0;  // slope of log H against log r, halved
    bool infinite_order = false;
};

/// Tolerance for matching l to the lattice 2m - 1/2.
inline constexpr double branch_match_tolerance = 0.25;

/// Needs at least 8 radii, all admissible. N = D / H, and
/// Ntrunc = min(N / (1 - b sqrt r), k0), which is k0 when 1 - b sqrt r <= 0.
FrequencyProfile frequency_profile(const ScalarField& w, const WeissConstants& c,
                                   const std::vector<double>& radii);

struct BlowupReport {
    std::vector<double> radii;        // decreasing
    std::vector<double> differences;  // relative L1(B_1+) distance of successive rescalings
    std::vector<double> decay;        // int_{B_1+} |w(r x) - r^l w~_0(x)|, the scaled decay quantity
    double difference_exponent = 0.0;
    double C = 0.0;                   // decay ~ C r^decay_exponent
    double decay_exponent = 0.0;
    bool cauchy = false;
};

/// Noise floor for the rescaling differences.
inline constexpr double blowup_noise = 1e-4;

/// w~_r(x) = w(r x) / r^l. The grid of w must contain B_1+; radii lie in (0, 1].
/// The rescalings are Cauchy when every difference is below the noise floor, or when
/// the differences never grow beyond it and decay with a positive fitted exponent.
BlowupReport blowup_check(const ScalarField& w, double l, std::vector<double> radii);

struct DecayBounds {
    double C_upper = 0.0;
    double eta_lower = 0.0;
    double ratio = 0.0;
    bool pass = false;
};

/// C_upper = max H / r^{2l}, eta_lower = min H / r^{2l}; pass iff eta_lower > 0 and the
/// ratio stays within ratio_bound.
DecayBounds decay_bounds(const ScalarField& w, double l, const std::vector<double>& radii,
                         double ratio_bound = 100.0);

struct ObstacleResidual {
    double residual = 0.0;  // sup |w - w*| / sup |w| on the half-square of size rho
    int intervals = 0;      // non-contact intervals of w
    int reference_intervals = 0;
    ScalarField reference;
};

/// Re-solves the harmonic thin obstacle problem on the nodes of w inside [-rho, rho] x [0, rho]
/// with w as boundary data, and compares. rho is rounded down to a multiple of h.
ObstacleResidual harmonic_obstacle_residual(const ScalarField& w, double rho, double tol = 1e-11);

/// CSV with columns r, H, D, N, Ntrunc, W0, W.
void write_profile_csv(const std::string& path, const FrequencyProfile& p);

}  // namespace fbl
