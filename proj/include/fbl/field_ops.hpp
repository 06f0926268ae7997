#pragma once

// Differential and quadrature primitives on sampled fields.

#include "fbl/grid.hpp"

namespace fbl {

/// Centred differences inside, second-order one-sided stencils on the edges.
GradientField gradient(const ScalarField& f);

/// True when the upper half-disk of radius r fits inside the grid.
bool admissible_radius(const GridSpec& s, double r);

/// H(r) = r^{-(d-1)} times the integral of f^2 over the upper half-circle of radius r.
/// Trapezoid rule in the angle with ceil(pi r / h) * 4 intervals, bilinear sampling.
double height(const ScalarField& f, double r, int d = 2);

/// D(r) = r^{-(d-2)} times the integral of |grad f|^2 over the upper half-disk.
/// Cells inside the disk use the bilinear cell mean; cut cells are integrated on a
/// 16 x 16 sub-cell lattice so that only the covered fraction contributes.
double dirichlet_energy(const ScalarField& f, double r, int d = 2);

/// Same quadrature as dirichlet_energy, applied to an arbitrary nodal density.
double half_disk_integral(const ScalarField& density, double r);

/// x -> f(r x) / normalizer on the grid of f.
ScalarField rescale(const ScalarField& f, double r, double normalizer);

/// Maximal runs of slit nodes with f > tol as open intervals. Runs separated by a
/// single sub-threshold node are merged.
IntervalSet contact_intervals(const ScalarField& f, double tol);

/// Five-point Laplacian at interior nodes, zero on the boundary ring.
ScalarField laplacian(const ScalarField& f);

}  // namespace fbl
