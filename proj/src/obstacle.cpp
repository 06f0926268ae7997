#include "fbl/obstacle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace fbl {

Nonlinearity::Nonlinearity(std::string name, ValueFn f, GradFn grad, HessFn hess, double rho,
                           double origin_scale)
    : name_(std::move(name)), f_(std::move(f)), grad_(std::move(grad)), hess_(std::move(hess)),
      rho_(rho) {
    ensure(rho_ > 0.0, ErrorKind::Config, "validity radius must be positive");
    const auto g = grad_(0.0, 0.0);
    const auto H = hess_(0.0, 0.0);
    const double tol = 1e-12;
    ensure(std::abs(f_(0.0, 0.0)) <= tol, ErrorKind::Config, name_ + ": F(0) must vanish");
    ensure(std::abs(g[0]) <= tol && std::abs(g[1]) <= tol, ErrorKind::Config,
           name_ + ": grad F(0) must vanish");
    ensure(std::abs(H[0] - origin_scale) <= tol && std::abs(H[1]) <= tol &&
               std::abs(H[2] - origin_scale) <= tol,
           ErrorKind::Config, name_ + ": Hessian at the origin has the wrong scale");
}

Nonlinearity quadratic_nonlinearity() {
    return Nonlinearity(
        "quadratic", [](double x, double y) { return 0.5 * (x * x + y * y); },
        [](double x, double y) { return Vec2{x, y}; },
        [](double, double) { return Sym2{1.0, 0.0, 1.0}; }, std::numeric_limits<double>::infinity());
}

namespace {

Nonlinearity scaled_lagrangian(const std::string& name, double s, double rho) {
    ensure(rho < 1.0, ErrorKind::Config, "validity radius must stay below the pole at y = -1");
    return Nonlinearity(
        name, [s](double x, double y) { return s * (x * x + y * y) / (2.0 * (1.0 + y)); },
        [s](double x, double y) {
            const double q = 1.0 + y;
            return Vec2{s * x / q, s * (y * y + 2.0 * y - x * x) / (2.0 * q * q)};
        },
        [s](double x, double y) {
            const double q = 1.0 + y;
            return Sym2{s / q, -s * x / (q * q), s * (1.0 + x * x) / (q * q * q)};
        },
        rho, s);
}

}  // namespace

Nonlinearity hodograph_lagrangian(double rho) { return scaled_lagrangian("hodograph", 1.0, rho); }

Nonlinearity two_phase_lagrangian(double rho) { return scaled_lagrangian("two-phase", 2.0, rho); }

Nonlinearity nonlinearity_by_name(const std::string& name, double rho) {
    if (name == "quadratic") return quadratic_nonlinearity();
    if (name == "hodograph") return hodograph_lagrangian(rho);
    if (name == "two-phase") return two_phase_lagrangian(rho);
    throw Error(ErrorKind::Config, "unknown nonlinearity '" + name + "'");
}

namespace {

using Gauss16 = boost::math::quadrature::gauss<double, 16>;

}  // namespace

Sym2 membrane_matrix(const Nonlinearity& F, Vec2 p, Vec2 q) {
    ensure(F.admissible(p[0], p[1]) && F.admissible(q[0], q[1]), ErrorKind::OutOfRange,
           "gradient outside the validity ball of " + F.name());
    Sym2 m{0.0, 0.0, 0.0};
    const double dx = p[0] - q[0], dy = p[1] - q[1];
    const auto& xs = Gauss16::abscissa();
    const auto& ws = Gauss16::weights();
    for (std::size_t k = 0; k < xs.size(); ++k) {
        for (double sgn : {-1.0, 1.0}) {
            const double t = 0.5 * (1.0 + sgn * xs[k]);
            const auto H = F.hess(q[0] + t * dx, q[1] + t * dy);
            for (int e = 0; e < 3; ++e) m[e] += 0.5 * ws[k] * H[e];
        }
    }
    return m;
}

MatrixField assemble_membrane_matrix(const Nonlinearity& F, const GradientField& gu,
                                     const GradientField& gv) {
    const GridSpec& s = gu.dx.spec;
    ensure(gv.dx.spec == s, ErrorKind::Domain, "gradient fields live on different grids");
    MatrixField m(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
        const auto M = membrane_matrix(F, {gu.dx.values[k], gu.dy.values[k]},
                                       {gv.dx.values[k], gv.dy.values[k]});
        m.set(k, M[0], M[1], M[2]);
    }
    m.update_bounds();
    m.check_det_normalized();
    return m;
}

CornerCoefficients CornerCoefficients::identity(const GridSpec& nodes) {
    return from_cells(nodes, MatrixField::identity(nodes.cells()));
}

CornerCoefficients CornerCoefficients::from_cells(const GridSpec& nodes, const MatrixField& cells) {
    ensure(cells.spec == nodes.cells(), ErrorKind::Domain, "cell field does not match the grid");
    CornerCoefficients c;
    c.nodes = nodes;
    for (auto& m : c.corner) m = cells;
    return c;
}

CornerCoefficients CornerCoefficients::from_nodes(const MatrixField& f) {
    CornerCoefficients c;
    c.nodes = f.spec;
    const GridSpec cs = f.spec.cells();
    for (int k = 0; k < 4; ++k) {
        const int a = k >> 1, b = k & 1;
        MatrixField m(cs);
        for (int j = 0; j < cs.ny; ++j)
            for (int i = 0; i < cs.nx; ++i) {
                const auto v = f.at(f.spec.index(i + b, j + a));
                m.set(cs.index(i, j), v[0], v[1], v[2]);
            }
        m.update_bounds();
        m.check_det_normalized();
        c.corner[k] = std::move(m);
    }
    return c;
}

double CornerCoefficients::lambda() const {
    double v = corner[0].lambda;
    for (const auto& m : corner) v = std::min(v, m.lambda);
    return v;
}

double CornerCoefficients::Lambda() const {
    double v = corner[0].Lambda;
    for (const auto& m : corner) v = std::max(v, m.Lambda);
    return v;
}

Vec2 corner_gradient(const ScalarField& w, int i, int j, int c) {
    const int a = c >> 1, b = c & 1;
    const double inv = 1.0 / w.spec.h;
    return {(w(i + 1, j + a) - w(i, j + a)) * inv, (w(i + b, j + 1) - w(i + b, j)) * inv};
}

CornerCoefficients membrane_coefficients(const Nonlinearity& F, const ScalarField& u,
                                         const ScalarField& v) {
    ensure(u.spec == v.spec, ErrorKind::Domain, "membranes live on different grids");
    CornerCoefficients out;
    out.nodes = u.spec;
    const GridSpec cs = u.spec.cells();
    for (int c = 0; c < 4; ++c) {
        MatrixField m(cs);
        for (int j = 0; j < cs.ny; ++j)
            for (int i = 0; i < cs.nx; ++i) {
                const auto M = membrane_matrix(F, corner_gradient(u, i, j, c), corner_gradient(v, i, j, c));
                m.set(cs.index(i, j), M[0], M[1], M[2]);
            }
        m.update_bounds();
        m.check_det_normalized();
        out.corner[c] = std::move(m);
    }
    return out;
}

namespace {

using Stencil = std::vector<std::array<double, 9>>;

constexpr int slot(int di, int dj) { return (dj + 1) * 3 + (di + 1); }

// Accumulates (1/4) sum_c B_c^T M_c B_c over the cells for which `active` holds.
template <class MatFn, class ActiveFn>
Stencil build_stencil(const GridSpec& s, MatFn mat, ActiveFn active) {
    Stencil K(s.size());
    for (auto& row : K) row.fill(0.0);
    for (int j = 0; j + 1 < s.ny; ++j) {
        for (int i = 0; i + 1 < s.nx; ++i) {
            if (!active(i, j)) continue;
            double loc[4][4] = {};
            for (int c = 0; c < 4; ++c) {
                const int a = c >> 1, b = c & 1;
                const Sym2 m = mat(i, j, c);
                double dx[4] = {}, dy[4] = {};
                dx[2 * a] = -1.0;
                dx[2 * a + 1] = 1.0;
                dy[b] = -1.0;
                dy[b + 2] = 1.0;
                for (int P = 0; P < 4; ++P)
                    for (int Q = 0; Q < 4; ++Q)
                        loc[P][Q] += 0.25 * (m[0] * dx[P] * dx[Q] + m[1] * (dx[P] * dy[Q] + dy[P] * dx[Q]) +
                                             m[2] * dy[P] * dy[Q]);
            }
            for (int P = 0; P < 4; ++P) {
                const int pi = i + (P & 1), pj = j + (P >> 1);
                auto& row = K[s.index(pi, pj)];
                for (int Q = 0; Q < 4; ++Q) row[slot((Q & 1) - (P & 1), (Q >> 1) - (P >> 1))] += loc[P][Q];
            }
        }
    }
    return K;
}

Stencil linear_stencil(const CornerCoefficients& c) {
    const GridSpec cs = c.nodes.cells();
    return build_stencil(
        c.nodes,
        [&](int i, int j, int k) {
            const auto& m = c.corner[k];
            return m.at(cs.index(i, j));
        },
        [](int, int) { return true; });
}

// (K w)_k with guards at the grid edges.
inline double stencil_apply(const Stencil& K, const GridSpec& s, const std::vector<double>& w, int i,
                            int j) {
    const auto& row = K[s.index(i, j)];
    double r = 0.0;
    for (int dj = -1; dj <= 1; ++dj) {
        const int jj = j + dj;
        if (jj < 0 || jj >= s.ny) continue;
        for (int di = -1; di <= 1; ++di) {
            const int ii = i + di;
            if (ii < 0 || ii >= s.nx) continue;
            r += row[slot(di, dj)] * w[s.index(ii, jj)];
        }
    }
    return r;
}

// Same, for nodes known to have all neighbours except possibly the row below.
inline double stencil_apply_inner(const std::array<double, 9>& row, const double* w, int nx, bool slit) {
    double r = row[3] * w[-1] + row[4] * w[0] + row[5] * w[1] + row[6] * w[nx - 1] + row[7] * w[nx] +
               row[8] * w[nx + 1];
    if (!slit) r += row[0] * w[-nx - 1] + row[1] * w[-nx] + row[2] * w[-nx + 1];
    return r;
}

void check_half_square(const GridSpec& s, double radius) {
    s.validate();
    ensure(s.slit_row() == 0, ErrorKind::Domain, "the slit must be the bottom grid row");
    ensure(radius > 0.0 && radius < -s.x0 + 1e-12 && radius < s.x_max() + 1e-12 &&
               radius < s.y_max() + 1e-12,
           ErrorKind::Domain, "solver disk does not fit inside the grid");
}

double auto_omega(double h, double radius) {
    return 2.0 / (1.0 + std::sin(std::numbers::pi * h / (2.0 * radius)));
}

struct FreeNode {
    int i, j;
    bool slit;
};

std::vector<FreeNode> free_nodes(const GridSpec& s, const std::vector<unsigned char>& roles) {
    std::vector<FreeNode> out;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            const auto r = roles[s.index(i, j)];
            if (r) out.push_back({i, j, r == 2});
        }
    return out;
}

bool coarsenable(const GridSpec& s, double radius) {
    if ((s.nx - 1) % 2 || (s.ny - 1) % 2) return false;
    // coarse grid must still resolve the disk with a reasonable number of nodes
    return radius / (2.0 * s.h) >= 8.0;
}

GridSpec coarsen(const GridSpec& s) { return GridSpec{(s.nx - 1) / 2 + 1, (s.ny - 1) / 2 + 1, s.x0, s.y0, 2.0 * s.h}; }

ScalarField inject(const ScalarField& f) {
    const GridSpec cs = coarsen(f.spec);
    ScalarField out(cs);
    for (int j = 0; j < cs.ny; ++j)
        for (int i = 0; i < cs.nx; ++i) out(i, j) = f(2 * i, 2 * j);
    return out;
}

CornerCoefficients coarsen_coefficients(const CornerCoefficients& c) {
    CornerCoefficients out;
    out.nodes = coarsen(c.nodes);
    const GridSpec fc = c.nodes.cells();
    const GridSpec cc = out.nodes.cells();
    for (int k = 0; k < 4; ++k) {
        MatrixField m(cc);
        for (int j = 0; j < cc.ny; ++j)
            for (int i = 0; i < cc.nx; ++i) {
                Sym2 acc{0.0, 0.0, 0.0};
                for (int q = 0; q < 2; ++q)
                    for (int p = 0; p < 2; ++p) {
                        const auto v = c.corner[k].at(fc.index(2 * i + p, 2 * j + q));
                        for (int e = 0; e < 3; ++e) acc[e] += 0.25 * v[e];
                    }
                m.set(cc.index(i, j), acc[0], acc[1], acc[2]);
            }
        m.lambda = c.corner[k].lambda;
        m.Lambda = c.corner[k].Lambda;
        out.corner[k] = std::move(m);
    }
    return out;
}

// Bilinear prolongation onto the free nodes of the fine field.
void prolongate_into(const ScalarField& coarse, ScalarField& fine, const std::vector<unsigned char>& roles) {
    const GridSpec& s = fine.spec;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i)
            if (roles[s.index(i, j)]) fine(i, j) = coarse.sample(s.x(i), s.y(j));
}

struct Residuals {
    double equation = 0.0;
    double complementarity = 0.0;
};

Residuals obstacle_residuals(const Stencil& K, const ScalarField& w, const std::vector<FreeNode>& nodes) {
    Residuals r;
    for (const auto& n : nodes) {
        const double d = K[w.spec.index(n.i, n.j)][4];
        const double g = stencil_apply(K, w.spec, w.values, n.i, n.j) / d;
        if (n.slit)
            r.complementarity = std::max(r.complementarity, std::abs(std::min(w(n.i, n.j), g)));
        else
            r.equation = std::max(r.equation, std::abs(g));
    }
    return r;
}

double quadratic_energy(const Stencil& K, const ScalarField& w) {
    double e = 0.0;
    const GridSpec& s = w.spec;
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) e += w(i, j) * stencil_apply(K, s, w.values, i, j);
    return 0.5 * e;
}

std::pair<ScalarField, SolverReport> obstacle_impl(const ObstacleProblem& p, const SolverOptions& opt) {
    const GridSpec& s = p.boundary.spec;
    const auto roles = node_roles(s, p.radius);
    ScalarField w = p.boundary;

    SolverReport rep;
    if (opt.nested && coarsenable(s, p.radius)) {
        ObstacleProblem cp{coarsen_coefficients(p.coefficients), inject(p.boundary), p.radius};
        SolverOptions co = opt;
        co.record_energy = false;
        co.omega = 0.0;
        const auto coarse = obstacle_impl(cp, co);
        prolongate_into(coarse.first, w, roles);
        rep.iterations += coarse.second.iterations;
    }
    const auto nodes = free_nodes(s, roles);
    for (const auto& n : nodes)
        if (n.slit) w(n.i, n.j) = std::max(0.0, w(n.i, n.j));

    const Stencil K = linear_stencil(p.coefficients);
    const double omega = opt.omega > 0.0 ? opt.omega : auto_omega(s.h, p.radius);
    ensure(omega < 2.0, ErrorKind::Config, "relaxation parameter must lie in (0, 2)");
    rep.omega = omega;
    if (opt.record_energy) rep.energy_history.push_back(quadratic_energy(K, w));

    const int nx = s.nx;
    const int check_every = 10;
    for (int it = 1; it <= opt.max_iter; ++it) {
        for (const auto& n : nodes) {
            const std::size_t k = s.index(n.i, n.j);
            const auto& row = K[k];
            const double r = stencil_apply_inner(row, &w.values[k], nx, n.slit);
            double nw = w.values[k] - omega * r / row[4];
            if (n.slit) nw = std::max(0.0, nw);
            w.values[k] = nw;
        }
        rep.iterations = it;
        if (opt.record_energy) rep.energy_history.push_back(quadratic_energy(K, w));
        if (it % check_every == 0 || it == opt.max_iter) {
            const auto res = obstacle_residuals(K, w, nodes);
            rep.residual = res.equation;
            rep.complementarity = res.complementarity;
            if (res.equation <= opt.tol && res.complementarity <= opt.tol) {
                rep.converged = true;
                break;
            }
        }
    }
    rep.energy = quadratic_energy(K, w);
    return {std::move(w), rep};
}

}  // namespace

std::vector<unsigned char> node_roles(const GridSpec& s, double radius) {
    check_half_square(s, radius);
    std::vector<unsigned char> roles(s.size(), 0);
    const double r2 = radius * radius * (1.0 - 1e-12);
    for (int j = 0; j + 1 < s.ny; ++j)
        for (int i = 1; i + 1 < s.nx; ++i) {
            const double x = s.x(i), y = s.y(j);
            if (x * x + y * y < r2) roles[s.index(i, j)] = j == 0 ? 2 : 1;
        }
    return roles;
}

double discrete_energy(const CornerCoefficients& c, const ScalarField& w) {
    ensure(c.nodes == w.spec, ErrorKind::Domain, "coefficients and field grids differ");
    return quadratic_energy(linear_stencil(c), w);
}

ScalarField apply_operator(const CornerCoefficients& c, const ScalarField& w) {
    ensure(c.nodes == w.spec, ErrorKind::Domain, "coefficients and field grids differ");
    const Stencil K = linear_stencil(c);
    ScalarField out(w.spec);
    for (int j = 0; j < w.spec.ny; ++j)
        for (int i = 0; i < w.spec.nx; ++i) out(i, j) = stencil_apply(K, w.spec, w.values, i, j);
    return out;
}

ScalarField operator_diagonal(const CornerCoefficients& c) {
    const Stencil K = linear_stencil(c);
    ScalarField out(c.nodes);
    for (std::size_t k = 0; k < K.size(); ++k) out.values[k] = K[k][4];
    return out;
}

std::vector<double> slit_flux(const CornerCoefficients& c, const ScalarField& w) {
    const auto Kw = apply_operator(c, w);
    const auto row = w.spec.slit_row();
    ensure(row.has_value(), ErrorKind::Domain, "grid has no slit row");
    std::vector<double> flux(w.spec.nx);
    for (int i = 0; i < w.spec.nx; ++i) flux[i] = -Kw(i, *row) / w.spec.h;
    return flux;
}

std::pair<ScalarField, SolverReport> solve_thin_obstacle(const ObstacleProblem& p, const SolverOptions& opt) {
    ensure(opt.tol > 0.0, ErrorKind::Config, "tolerance must be positive");
    ensure(p.coefficients.nodes == p.boundary.spec, ErrorKind::Domain,
           "coefficients and boundary grids differ");
    ensure(p.boundary.all_finite(), ErrorKind::Domain, "boundary data must be finite");
    for (const auto& m : p.coefficients.corner) {
        ensure(m.spec == p.boundary.spec.cells(), ErrorKind::Domain, "corner field has the wrong grid");
        ensure(m.lambda > 0.0, ErrorKind::Ellipticity, "coefficients are not uniformly elliptic");
    }
    node_roles(p.boundary.spec, p.radius);
    return obstacle_impl(p, opt);
}

// ---------------------------------------------------------------------------
// Nonlinear energies

namespace {

template <class ActiveFn>
double nonlinear_energy_impl(const Nonlinearity& F, const ScalarField& w, ActiveFn active) {
    const GridSpec& s = w.spec;
    const double wgt = 0.25 * s.h * s.h;
    double e = 0.0;
    for (int j = 0; j + 1 < s.ny; ++j)
        for (int i = 0; i + 1 < s.nx; ++i) {
            if (!active(i, j)) continue;
            for (int c = 0; c < 4; ++c) {
                const auto g = corner_gradient(w, i, j, c);
                if (!F.admissible(g[0], g[1])) return std::numeric_limits<double>::infinity();
                e += wgt * F.value(g[0], g[1]);
            }
        }
    return e;
}

// Gradient of the nonlinear energy and its Hessian stencil.
template <class ActiveFn>
std::pair<std::vector<double>, Stencil> linearize(const Nonlinearity& F, const ScalarField& w, ActiveFn active) {
    const GridSpec& s = w.spec;
    std::vector<double> G(s.size(), 0.0);
    const double wgt = 0.25 * s.h;
    for (int j = 0; j + 1 < s.ny; ++j)
        for (int i = 0; i + 1 < s.nx; ++i) {
            if (!active(i, j)) continue;
            for (int c = 0; c < 4; ++c) {
                const int a = c >> 1, b = c & 1;
                const auto g = corner_gradient(w, i, j, c);
                ensure(F.admissible(g[0], g[1]), ErrorKind::OutOfRange,
                       "gradient left the validity ball of " + F.name());
                const auto dF = F.grad(g[0], g[1]);
                G[s.index(i + 1, j + a)] += wgt * dF[0];
                G[s.index(i, j + a)] -= wgt * dF[0];
                G[s.index(i + b, j + 1)] += wgt * dF[1];
                G[s.index(i + b, j)] -= wgt * dF[1];
            }
        }
    Stencil K = build_stencil(
        s,
        [&](int i, int j, int c) {
            const auto g = corner_gradient(w, i, j, c);
            return F.hess(g[0], g[1]);
        },
        active);
    return {std::move(G), std::move(K)};
}

}  // namespace

double nonlinear_energy(const Nonlinearity& F, const ScalarField& w) {
    return nonlinear_energy_impl(F, w, [](int, int) { return true; });
}

ScalarField euler_lagrange_residual(const Nonlinearity& F, const ScalarField& w) {
    const auto [G, K] = linearize(F, w, [](int, int) { return true; });
    ScalarField out(w.spec);
    for (std::size_t k = 0; k < G.size(); ++k) out.values[k] = K[k][4] > 0.0 ? G[k] / K[k][4] : 0.0;
    return out;
}

namespace {

std::vector<char> active_cells(const GridSpec& s, const std::vector<unsigned char>& roles) {
    const GridSpec cs = s.cells();
    std::vector<char> act(cs.size(), 0);
    for (int j = 0; j < cs.ny; ++j)
        for (int i = 0; i < cs.nx; ++i)
            act[cs.index(i, j)] = roles[s.index(i, j)] || roles[s.index(i + 1, j)] ||
                                  roles[s.index(i, j + 1)] || roles[s.index(i + 1, j + 1)];
    return act;
}

// KKT defects of the pair problem with gradients Gu, Gv and diagonals from Ku, Kv.
Residuals pair_residuals(const std::vector<double>& Gu, const std::vector<double>& Gv, const Stencil& Ku,
                         const Stencil& Kv, const ScalarField& u, const ScalarField& v,
                         const std::vector<FreeNode>& nodes) {
    Residuals r;
    for (const auto& n : nodes) {
        const std::size_t k = u.spec.index(n.i, n.j);
        const double a = Ku[k][4], b = Kv[k][4];
        if (!n.slit) {
            r.equation = std::max({r.equation, std::abs(Gu[k]) / a, std::abs(Gv[k]) / b});
            continue;
        }
        r.equation = std::max(r.equation, std::abs(Gu[k] + Gv[k]) / (a + b));
        const double m = 0.5 * (Gu[k] / a - Gv[k] / b);
        r.complementarity = std::max(r.complementarity, std::abs(std::min(u.values[k] - v.values[k], m)));
    }
    return r;
}

TwoMembraneResult two_membrane_impl(const Nonlinearity& F, const ScalarField& bu, const ScalarField& bv,
                                    double radius, const SolverOptions& opt) {
    const GridSpec& s = bu.spec;
    const auto roles = node_roles(s, radius);
    const auto nodes = free_nodes(s, roles);
    TwoMembraneResult res{bu, bv, {}, 0};
    ScalarField& u = res.u;
    ScalarField& v = res.v;

    if (opt.nested && coarsenable(s, radius)) {
        SolverOptions co = opt;
        co.omega = 0.0;
        const auto coarse = two_membrane_impl(F, inject(bu), inject(bv), radius, co);
        prolongate_into(coarse.u, u, roles);
        prolongate_into(coarse.v, v, roles);
        res.report.iterations += coarse.report.iterations;
    }
    for (const auto& n : nodes) {
        if (!n.slit) continue;
        const std::size_t k = s.index(n.i, n.j);
        if (u.values[k] < v.values[k]) u.values[k] = v.values[k] = 0.5 * (u.values[k] + v.values[k]);
    }

    const auto act = active_cells(s, roles);
    const GridSpec cs = s.cells();
    auto active = [&](int i, int j) { return act[cs.index(i, j)] != 0; };
    auto energy = [&](const ScalarField& a, const ScalarField& b) {
        return nonlinear_energy_impl(F, a, active) + nonlinear_energy_impl(F, b, active);
    };
    double E = energy(u, v);
    ensure(std::isfinite(E), ErrorKind::OutOfRange,
           "boundary data leaves the validity ball of " + F.name());

    const double omega = opt.omega > 0.0 ? opt.omega : auto_omega(s.h, radius);
    ensure(omega < 2.0, ErrorKind::Config, "relaxation parameter must lie in (0, 2)");
    res.report.omega = omega;
    if (opt.record_energy) res.report.energy_history.push_back(E);

    const int nx = s.nx;
    ScalarField du(s), dv(s);
    ScalarField tu(s), tv(s);
    const int max_newton = 100;
    for (int step = 0; step < max_newton; ++step) {
        const auto [Gu, Ku] = linearize(F, u, active);
        const auto [Gv, Kv] = linearize(F, v, active);
        const auto kkt = pair_residuals(Gu, Gv, Ku, Kv, u, v, nodes);
        res.report.residual = kkt.equation;
        res.report.complementarity = kkt.complementarity;
        if (kkt.equation <= opt.tol && kkt.complementarity <= opt.tol) {
            res.report.converged = true;
            break;
        }
        if (res.report.iterations >= opt.max_iter) break;

        // Block projected SOR for the quadratic model in (du, dv).
        std::fill(du.values.begin(), du.values.end(), 0.0);
        std::fill(dv.values.begin(), dv.values.end(), 0.0);
        const double inner_tol = std::max(0.3 * opt.tol, 1e-3 * std::max(kkt.equation, kkt.complementarity));
        for (int it = 1;; ++it) {
            for (const auto& n : nodes) {
                const std::size_t k = s.index(n.i, n.j);
                const double a = Ku[k][4], b = Kv[k][4];
                const double ru = Gu[k] + stencil_apply_inner(Ku[k], &du.values[k], nx, n.slit);
                const double rv = Gv[k] + stencil_apply_inner(Kv[k], &dv.values[k], nx, n.slit);
                if (!n.slit) {
                    du.values[k] -= omega * ru / a;
                    dv.values[k] -= omega * rv / b;
                    continue;
                }
                const double u0 = u.values[k] + du.values[k], v0 = v.values[k] + dv.values[k];
                const double us = u0 - ru / a, vs = v0 - rv / b;
                double un, vn;
                if (us >= vs) {
                    un = u0 + omega * (us - u0);
                    vn = v0 + omega * (vs - v0);
                    if (un < vn) {
                        // clip the relaxed step at the constraint along its segment
                        const double g0 = u0 - v0, g1 = un - vn;
                        const double t = g0 / (g0 - g1);
                        un = u0 + t * (un - u0);
                        vn = v0 + t * (vn - v0);
                        vn = un;
                    }
                } else {
                    un = vn = (a * us + b * vs) / (a + b);
                }
                du.values[k] = un - u.values[k];
                dv.values[k] = vn - v.values[k];
            }
            ++res.report.iterations;
            if (it % 10 == 0 || res.report.iterations >= opt.max_iter) {
                std::vector<double> Ru(Gu), Rv(Gv);
                for (const auto& n : nodes) {
                    const std::size_t k = s.index(n.i, n.j);
                    Ru[k] += stencil_apply(Ku, s, du.values, n.i, n.j);
                    Rv[k] += stencil_apply(Kv, s, dv.values, n.i, n.j);
                }
                for (std::size_t k = 0; k < s.size(); ++k) {
                    tu.values[k] = u.values[k] + du.values[k];
                    tv.values[k] = v.values[k] + dv.values[k];
                }
                const auto q = pair_residuals(Ru, Rv, Ku, Kv, tu, tv, nodes);
                if ((q.equation <= inner_tol && q.complementarity <= inner_tol) ||
                    res.report.iterations >= opt.max_iter)
                    break;
            }
        }

        // Backtracking on the true energy; the full step is taken when the change is at rounding level.
        double slope = 0.0;
        for (std::size_t k = 0; k < s.size(); ++k) slope += Gu[k] * du.values[k] + Gv[k] * dv.values[k];
        double alpha = 1.0;
        double En = 0.0;
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t k = 0; k < s.size(); ++k) {
                tu.values[k] = u.values[k] + alpha * du.values[k];
                tv.values[k] = v.values[k] + alpha * dv.values[k];
            }
            En = energy(tu, tv);
            if (std::isfinite(En) &&
                (En <= E + 1e-4 * alpha * std::min(slope, 0.0) || En <= E + 1e-14 * (1.0 + std::abs(E))))
                break;
            alpha *= 0.5;
        }
        ensure(std::isfinite(En), ErrorKind::OutOfRange, "iterate left the validity ball of " + F.name());
        std::swap(u.values, tu.values);
        std::swap(v.values, tv.values);
        E = En;
        ++res.newton_steps;
        if (opt.record_energy) res.report.energy_history.push_back(E);
    }
    res.report.energy = E;
    return res;
}

}  // namespace

TwoMembraneResult solve_two_membrane(const Nonlinearity& F, const ScalarField& bu, const ScalarField& bv,
                                     double radius, const SolverOptions& opt) {
    ensure(opt.tol > 0.0, ErrorKind::Config, "tolerance must be positive");
    ensure(bu.spec == bv.spec, ErrorKind::Domain, "membrane traces live on different grids");
    ensure(bu.all_finite() && bv.all_finite(), ErrorKind::Domain, "boundary data must be finite");
    node_roles(bu.spec, radius);
    return two_membrane_impl(F, bu, bv, radius, opt);
}

}  // namespace fbl
