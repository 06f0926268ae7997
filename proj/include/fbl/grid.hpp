#pragma once

// Uniform grids and the sampled fields that live on them.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "fbl/error.hpp"

namespace fbl {

struct GridSpec {
    int nx = 0;
    int ny = 0;
    double x0 = 0.0;
    double y0 = 0.0;
    double h = 0.0;

    double x(int i) const { return x0 + i * h; }
    double y(int j) const { return y0 + j * h; }
    double x_max() const { return x(nx - 1); }
    double y_max() const { return y(ny - 1); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * nx + i;
    }

    /// Row index of y = 0 if it is a grid row.
    std::optional<int> slit_row() const;

    /// Throws DegenerateGrid unless h > 0 and nx, ny >= 3.
    void validate() const;

    /// Cell-centred companion grid (nx-1 by ny-1, shifted by h/2).
    GridSpec cells() const;

    bool operator==(const GridSpec&) const = default;
};

/// Half-square [-L, L] x [0, L] with spacing L/n; the slit is row 0.
GridSpec half_square(int n, double half_width = 1.0);

/// Square [-L, L]^2 with spacing L/n.
GridSpec full_square(int n, double half_width = 1.0);

struct ScalarField {
    GridSpec spec;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const GridSpec& s, double fill = 0.0);
    ScalarField(const GridSpec& s, std::vector<double> v);

    static ScalarField from_function(const GridSpec& s,
                                     const std::function<double(double, double)>& fn);

    double& operator()(int i, int j) { return values[spec.index(i, j)]; }
    double operator()(int i, int j) const { return values[spec.index(i, j)]; }

    bool contains(double x, double y, double slack = 1e-12) const;

    /// Bilinear interpolation; throws Domain outside the grid.
    double sample(double x, double y) const;

    /// Sample plus the exact gradient of the bilinear interpolant.
    std::array<double, 3> sample_with_gradient(double x, double y) const;

    double max_abs() const;
    bool all_finite() const;
};

struct GradientField {
    ScalarField dx;
    ScalarField dy;
};

/// Symmetric 2x2 coefficient field. Entries are stored per node of `spec`.
struct MatrixField {
    GridSpec spec;
    std::vector<double> a11, a12, a22;
    double lambda = 0.0;  // smallest eigenvalue over the field
    double Lambda = 0.0;  // largest eigenvalue over the field
    bool det_normalized = false;

    MatrixField() = default;
    explicit MatrixField(const GridSpec& s);

    static MatrixField identity(const GridSpec& s);
    static MatrixField constant(const GridSpec& s, double m11, double m12, double m22);

    std::array<double, 3> at(std::size_t k) const { return {a11[k], a12[k], a22[k]}; }
    void set(std::size_t k, double m11, double m12, double m22) {
        a11[k] = m11;
        a12[k] = m12;
        a22[k] = m22;
    }

    /// Bilinear interpolation of all three entries.
    std::array<double, 3> sample(double x, double y) const;

    /// Recomputes lambda/Lambda; throws Ellipticity unless lambda > 0.
    void update_bounds();

    /// Sets det_normalized when |det - 1| <= tol at every node.
    bool check_det_normalized(double tol = 1e-12);
};

/// Eigenvalues (min, max) of a symmetric 2x2 matrix.
std::array<double, 2> sym_eigenvalues(double m11, double m12, double m22);

struct Interval {
    double a = 0.0;
    double b = 0.0;
};

struct IntervalSet {
    std::vector<Interval> intervals;

    std::size_t count() const { return intervals.size(); }
    bool empty() const { return intervals.empty(); }
};

}  // namespace fbl
