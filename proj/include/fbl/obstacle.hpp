#pragma once

// Thin obstacle and two-membrane solvers on the half-square.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "fbl/grid.hpp"

namespace fbl {

using Vec2 = std::array<double, 2>;
using Sym2 = std::array<double, 3>;  // (m11, m12, m22)

/// Convex integrand on the gradient plane with its first and second derivatives.
class Nonlinearity {
public:
    using ValueFn = std::function<double(double, double)>;
    using GradFn = std::function<Vec2(double, double)>;
    using HessFn = std::function<Sym2(double, double)>;

    /// Checks value, gradient and Hessian at the origin (Hessian = origin_scale * I).
    Nonlinearity(std::string name, ValueFn f, GradFn grad, HessFn hess, double rho,
                 double origin_scale = 1.0);

    const std::string& name() const { return name_; }
    double rho() const { return rho_; }
    double value(double px, double py) const { return f_(px, py); }
    Vec2 grad(double px, double py) const { return grad_(px, py); }
    Sym2 hess(double px, double py) const { return hess_(px, py); }
    bool admissible(double px, double py) const { return px * px + py * py <= rho_ * rho_; }

private:
    std::string name_;
    ValueFn f_;
    GradFn grad_;
    HessFn hess_;
    double rho_;
};

/// |p|^2 / 2, valid everywhere.
Nonlinearity quadratic_nonlinearity();
/// F(x, y) = (x^2 + y^2) / (2 (1 + y)), the hodograph lagrangian.
Nonlinearity hodograph_lagrangian(double rho = 0.5);
/// (x^2 + y^2) / (1 + y); its Hessian at the origin is 2I.
Nonlinearity two_phase_lagrangian(double rho = 0.5);
/// "quadratic", "hodograph" or "two-phase".
Nonlinearity nonlinearity_by_name(const std::string& name, double rho = 0.5);

/// Segment mean of the Hessian between q and p (16-point Gauss-Legendre).
/// Satisfies grad F(p) - grad F(q) = M (p - q). Throws OutOfRange outside the ball.
Sym2 membrane_matrix(const Nonlinearity& F, Vec2 p, Vec2 q);

/// Pointwise membrane matrix of two gradient fields on a common grid.
MatrixField assemble_membrane_matrix(const Nonlinearity& F, const GradientField& gu,
                                     const GradientField& gv);

/// Each cell carries one matrix per corner gradient. Corner c = 2a + b uses the
/// x-difference along row j + a and the y-difference along column i + b, i.e. the
/// gradient of the linear interpolant on one of the four triangles of the two
/// diagonal splittings. The discrete energy is (h^2/4) times the sum over corners.
struct CornerCoefficients {
    GridSpec nodes;
    std::array<MatrixField, 4> corner;  // each on nodes.cells()

    static CornerCoefficients identity(const GridSpec& nodes);
    /// Same matrix on all four corners of a cell.
    static CornerCoefficients from_cells(const GridSpec& nodes, const MatrixField& cells);
    /// Corner c of cell (i, j) takes the value at node (i + b, j + a).
    static CornerCoefficients from_nodes(const MatrixField& node_field);

    double lambda() const;
    double Lambda() const;
};

/// Forward-difference gradient at corner c of cell (i, j).
Vec2 corner_gradient(const ScalarField& w, int i, int j, int c);

/// Membrane matrices between the corner gradients of u and v.
CornerCoefficients membrane_coefficients(const Nonlinearity& F, const ScalarField& u,
                                         const ScalarField& v);

struct ObstacleProblem {
    CornerCoefficients coefficients;
    /// Values at fixed nodes (outside the open disk) and the starting guess elsewhere.
    ScalarField boundary;
    double radius = 1.0;
};

struct SolverOptions {
    double tol = 1e-9;
    int max_iter = 200000;
    double omega = 0.0;   // <= 0 selects 2 / (1 + sin(pi h / 2))
    bool nested = true;   // warm start from coarser grids
    bool record_energy = false;
};

struct SolverReport {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;         // Jacobi-scaled equation residual
    double complementarity = 0.0;  // slit complementarity defect
    double energy = 0.0;
    double omega = 0.0;
    std::vector<double> energy_history;
};

/// 0 for fixed nodes, 1 for free interior nodes, 2 for constrained slit nodes.
std::vector<unsigned char> node_roles(const GridSpec& s, double radius);

/// (1/2) w^T K w for the stencil built from the corner coefficients.
double discrete_energy(const CornerCoefficients& c, const ScalarField& w);

/// K w at every node.
ScalarField apply_operator(const CornerCoefficients& c, const ScalarField& w);

/// Diagonal of K.
ScalarField operator_diagonal(const CornerCoefficients& c);

/// -(K w) / h on the slit row: discrete conormal derivative e2 . M grad w.
std::vector<double> slit_flux(const CornerCoefficients& c, const ScalarField& w);

std::pair<ScalarField, SolverReport> solve_thin_obstacle(const ObstacleProblem& p,
                                                         const SolverOptions& opt = {});

/// Sum over cells of (h^2/4) sum_c F(corner gradient). Infinite when any corner
/// gradient leaves the validity ball.
double nonlinear_energy(const Nonlinearity& F, const ScalarField& w);

/// Gradient of nonlinear_energy divided by the diagonal of its Hessian, at every node.
ScalarField euler_lagrange_residual(const Nonlinearity& F, const ScalarField& w);

struct TwoMembraneResult {
    ScalarField u, v;
    SolverReport report;
    int newton_steps = 0;
};

/// Minimises the two nonlinear energies with u >= v on the slit by Newton steps whose
/// coupled quadratic subproblems are solved by block projected SOR.
TwoMembraneResult solve_two_membrane(const Nonlinearity& F, const ScalarField& bu,
                                     const ScalarField& bv, double radius = 1.0,
                                     const SolverOptions& opt = {});

}  // namespace fbl
