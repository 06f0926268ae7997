#pragma once

// Closed forms and independent reference computations used only by the tests.

#include <cmath>
#include <complex>
#include <functional>

namespace oracle {

/// Re z^p on the closed upper half-plane (branch cut along the negative imaginary axis).
inline std::function<double(double, double)> re_pow(double p) {
    return [p](double x, double y) {
        const double r = std::hypot(x, y);
        if (r == 0.0) return 0.0;
        const double t = std::atan2(std::max(y, 0.0), x);
        return std::pow(r, p) * std::cos(p * t);
    };
}

inline std::function<double(double, double)> im_pow(double p) {
    return [p](double x, double y) {
        const double r = std::hypot(x, y);
        if (r == 0.0) return 0.0;
        const double t = std::atan2(std::max(y, 0.0), x);
        return std::pow(r, p) * std::sin(p * t);
    };
}

/// Composite Gauss-Legendre (5 points) on [a, b] with n panels.
inline double gauss(const std::function<double(double)>& g, double a, double b, int n) {
    static const double xs[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                 0.9061798459386640};
    static const double ws[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                 0.2369268850561891, 0.2369268850561891};
    const double step = (b - a) / n;
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
        const double c = a + (k + 0.5) * step;
        for (int q = 0; q < 5; ++q) s += ws[q] * g(c + 0.5 * step * xs[q]);
    }
    return 0.5 * step * s;
}

/// Truncated power series arithmetic (forward-mode Taylor jets) in one variable.
template <int N>
struct Jet {
    double c[N] = {};

    static Jet variable(double x0) {
        Jet j;
        j.c[0] = x0;
        if (N > 1) j.c[1] = 1.0;
        return j;
    }
    static Jet constant(double v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    friend Jet operator+(const Jet& a, const Jet& b) {
        Jet r;
        for (int k = 0; k < N; ++k) r.c[k] = a.c[k] + b.c[k];
        return r;
    }
    friend Jet operator-(const Jet& a, const Jet& b) {
        Jet r;
        for (int k = 0; k < N; ++k) r.c[k] = a.c[k] - b.c[k];
        return r;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (int i = 0; i < N; ++i)
            for (int k = 0; i + k < N; ++k) r.c[i + k] += a.c[i] * b.c[k];
        return r;
    }
    friend Jet operator*(double s, const Jet& a) {
        Jet r;
        for (int k = 0; k < N; ++k) r.c[k] = s * a.c[k];
        return r;
    }
    friend Jet operator/(const Jet& a, const Jet& b) {
        Jet r;
        for (int k = 0; k < N; ++k) {
            double s = a.c[k];
            for (int i = 1; i <= k; ++i) s -= b.c[i] * r.c[k - i];
            r.c[k] = s / b.c[0];
        }
        return r;
    }
};

}  // namespace oracle
