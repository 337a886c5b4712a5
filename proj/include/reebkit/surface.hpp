#pragma once

/**
 * @file surface.hpp
 * @brief Area-preserving dynamics on surfaces with boundary-degenerate
 *        area forms.
 *
 * A surface carries an area form omega that equals -r dr ^ ds in a
 * collar coordinate at each boundary circle, together with a fixed
 * primitive nu. Hamiltonian isotopies are generated by time-dependent
 * functions constant on every boundary component; their flow maps,
 * normalized actions and flux are computed here.
 *
 * Chart conventions:
 *  - disk of radius rho: Cartesian (X, Y), omega = dX ^ dY / (2 pi),
 *    nu = (X dY - Y dX) / (4 pi). With the angle s = theta / (2 pi)
 *    and collar coordinate r_c = sqrt(rho^2 - r^2) this is exactly
 *    -r_c dr_c ^ ds, so the whole disk is one collar plus its center.
 *  - annulus: (x, s) in [0,1] x R/Z, omega = w(x) dx ^ ds with w = x
 *    near 0, w = 1 - x near 1 and a positive Hermite blend between.
 */

#include "ode.hpp"
#include "reeb.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace reebkit {

struct SurfaceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BoundaryEscape : SurfaceError {
    BoundaryEscape() : SurfaceError("BoundaryEscape") {}
};
struct NonConstantOnBoundary : SurfaceError {
    NonConstantOnBoundary() : SurfaceError("NonConstantOnBoundary") {}
};
struct NotNormalized : SurfaceError {
    NotNormalized() : SurfaceError("NotNormalized") {}
};

using P2 = Eigen::Vector2d;

struct WeightedPoint {
    P2 z;
    double w;  // quadrature weight against omega
};

class Surface {
public:
    virtual ~Surface() = default;

    virtual double area() const = 0;
    /// sigma with omega = sigma dc1 ^ dc2 in chart coordinates.
    virtual double omega_density(const P2& z) const = 0;
    /// Components of the fixed primitive nu.
    virtual P2 nu(const P2& z) const = 0;
    virtual bool in_domain(const P2& z) const = 0;
    virtual int boundary_components() const = 0;
    /// Point of boundary component c at loop parameter u in [0,1).
    virtual P2 boundary_point(int c, double u) const = 0;
    /// Integral of nu over boundary component c (with its loop orientation).
    virtual double boundary_nu_integral(int c) const = 0;
    /// Interior quadrature nodes: sum of w * f(z) approximates the
    /// omega-integral of f; refinement level n doubles node counts.
    virtual std::vector<WeightedPoint> quadrature(int n) const = 0;
    /// True if the loop with total chart displacement d is contractible.
    virtual bool loop_contractible(const P2& d) const = 0;
};

class DiskSurface final : public Surface {
public:
    explicit DiskSurface(double rho = 1.0) : rho_(rho) {
        if (rho <= 0) throw SurfaceError("disk radius must be positive");
    }

    double rho() const { return rho_; }
    double area() const override { return rho_ * rho_ / 2; }
    double omega_density(const P2&) const override { return 1.0 / (2 * std::numbers::pi); }

    P2 nu(const P2& z) const override {
        return {-z[1] / (4 * std::numbers::pi), z[0] / (4 * std::numbers::pi)};
    }

    bool in_domain(const P2& z) const override { return z.norm() < rho_ * (1 + 1e-9); }
    int boundary_components() const override { return 1; }

    P2 boundary_point(int, double u) const override {
        return {rho_ * std::cos(2 * std::numbers::pi * u), rho_ * std::sin(2 * std::numbers::pi * u)};
    }

    double boundary_nu_integral(int) const override { return rho_ * rho_ / 2; }

    std::vector<WeightedPoint> quadrature(int n) const override {
        const detail::GaussRule g = detail::gauss_rule(n);
        const int na = 2 * n;
        std::vector<WeightedPoint> pts;
        pts.reserve(n * na);
        for (int i = 0; i < n; ++i) {
            const double r = g.nodes[i] * rho_;
            const double w = g.weights[i] * rho_ * r / na;
            for (int j = 0; j < na; ++j) {
                const double th = 2 * std::numbers::pi * j / na;
                pts.push_back({{r * std::cos(th), r * std::sin(th)}, w});
            }
        }
        return pts;
    }

    bool loop_contractible(const P2&) const override { return true; }

private:
    double rho_;
};

class AnnulusSurface final : public Surface {
public:
    AnnulusSurface() = default;

    // w = x near 0, 1-x near 1, cubic Hermite blend >= 1/4 between.
    static double density(double x) {
        if (x <= 0.25) return x;
        if (x >= 0.75) return 1 - x;
        const double t = 2 * (x - 0.25);
        return 0.25 + t * (1 - t) / 2;
    }

    /// Integral of the density from 0 to x.
    static double density_primitive(double x) {
        if (x <= 0.25) return x * x / 2;
        if (x <= 0.75) {
            const double t = 2 * (x - 0.25);
            return 1.0 / 32 + 0.5 * (t / 4 + t * t / 4 - t * t * t / 6);
        }
        const double a = 1 - x;
        return 19.0 / 96 + (1.0 / 16 - a * a) / 2;
    }

    double area() const override { return density_primitive(1.0); }
    double omega_density(const P2& z) const override { return density(z[0]); }
    P2 nu(const P2& z) const override { return {0.0, density_primitive(z[0])}; }
    bool in_domain(const P2& z) const override { return z[0] > -1e-9 && z[0] < 1 + 1e-9; }
    int boundary_components() const override { return 2; }
    P2 boundary_point(int c, double u) const override { return {c == 0 ? 0.0 : 1.0, u}; }
    double boundary_nu_integral(int c) const override {
        return c == 0 ? 0.0 : density_primitive(1.0);
    }

    std::vector<WeightedPoint> quadrature(int n) const override {
        // One Gauss panel per density piece; the density is polynomial
        // on each, so the x-integration is exact.
        const detail::GaussRule g = detail::gauss_rule(n);
        const int ns = 2 * n;
        const double edges[4] = {0.0, 0.25, 0.75, 1.0};
        std::vector<WeightedPoint> pts;
        pts.reserve(3 * n * ns);
        for (int panel = 0; panel < 3; ++panel) {
            const double a = edges[panel], len = edges[panel + 1] - a;
            for (int i = 0; i < n; ++i) {
                const double x = a + len * g.nodes[i];
                const double w = len * g.weights[i] * density(x) / ns;
                for (int j = 0; j < ns; ++j) pts.push_back({{x, double(j) / ns}, w});
            }
        }
        return pts;
    }

    bool loop_contractible(const P2& d) const override {
        return std::lround(d[1]) == 0;
    }
};

/// Time-dependent Hamiltonian on [0,1] x Surface, with its chart gradient.
struct HamiltonianSystem {
    std::shared_ptr<const Surface> surface;
    std::function<double(double, const P2&)> value;
    std::function<P2(double, const P2&)> gradient;
};

/// X with X -| omega = dH_t, in chart coordinates.
inline P2 hamiltonian_field(const HamiltonianSystem& sys, double t, const P2& z) {
    const P2 g = sys.gradient(t, z);
    const double sigma = sys.surface->omega_density(z);
    return {g[1] / sigma, -g[0] / sigma};
}

/// Checks per-component boundary constancy and, when require_normalized,
/// vanishing boundary time-averages.
inline void assert_boundary_contract(const HamiltonianSystem& sys, bool require_normalized) {
    const int nt = 32, nu_samples = 16;
    const detail::GaussRule g = detail::gauss_rule(nt);
    for (int c = 0; c < sys.surface->boundary_components(); ++c) {
        double avg = 0;
        for (int i = 0; i < nt; ++i) {
            const double t = g.nodes[i];
            const double ref = sys.value(t, sys.surface->boundary_point(c, 0.0));
            for (int j = 1; j < nu_samples; ++j) {
                const double v = sys.value(t, sys.surface->boundary_point(c, double(j) / nu_samples));
                if (std::abs(v - ref) > 1e-10) throw NonConstantOnBoundary();
            }
            avg += g.weights[i] * ref;
        }
        if (require_normalized && std::abs(avg) > 1e-12) throw NotNormalized();
    }
}

/// phi_t(z0): integrates the Hamiltonian field from time 0 to t.
inline P2 flow_point(const HamiltonianSystem& sys, const P2& z0, double t, double tol) {
    if (t == 0.0) return z0;
    AdaptiveRk rk(
        [&sys](double s, const Vec& y) {
            P2 x = hamiltonian_field(sys, s, {y[0], y[1]});
            Vec dy(2);
            dy << x[0], x[1];
            return dy;
        },
        tol,
        [&sys](Vec& y) {
            if (!sys.surface->in_domain({y[0], y[1]})) throw BoundaryEscape();
        });
    double time = 0.0;
    Vec y(2);
    y << z0[0], z0[1];
    rk.advance(time, y, t);
    return {y[0], y[1]};
}

/// Evaluator z -> phi_t(z).
inline std::function<P2(const P2&)> flow_map(const HamiltonianSystem& sys, double t, double tol) {
    return [&sys, t, tol](const P2& z) { return flow_point(sys, z, t, tol); };
}

/**
 * Normalized action a(z) = integral of nu along t -> phi_t(z) plus the
 * integral of H_t(phi_t(z)) dt, computed with one augmented ODE. The
 * primitive may be overridden (e.g. by nu + dg) to test independence at
 * contractible fixed points. Also reports the total chart displacement
 * of the path for contractibility decisions.
 */
inline double action_of_point(const HamiltonianSystem& sys, const P2& z, double tol,
                              const std::function<P2(const P2&)>& nu_override = {},
                              P2* displacement = nullptr) {
    auto nu_at = [&](const P2& p) { return nu_override ? nu_override(p) : sys.surface->nu(p); };
    AdaptiveRk rk(
        [&](double s, const Vec& y) {
            const P2 p{y[0], y[1]};
            const P2 x = hamiltonian_field(sys, s, p);
            Vec dy(4);
            dy << x[0], x[1], nu_at(p).dot(x) + sys.value(s, p), x.norm();
            return dy;
        },
        tol,
        [&sys](Vec& y) {
            if (!sys.surface->in_domain({y[0], y[1]})) throw BoundaryEscape();
        });
    double time = 0.0;
    Vec y(4);
    y << z[0], z[1], 0.0, 0.0;
    rk.advance(time, y, 1.0);
    if (displacement) *displacement = P2{y[0] - z[0], y[1] - z[1]};
    return y[2];
}

/// Flux between two boundary components: difference of the boundary
/// time-averages of H.
inline double flux_between(const HamiltonianSystem& sys, int c0, int c1) {
    assert_boundary_contract(sys, false);
    const int nt = 32;
    const detail::GaussRule g = detail::gauss_rule(nt);
    double f = 0;
    for (int i = 0; i < nt; ++i)
        f += g.weights[i] * (sys.value(g.nodes[i], sys.surface->boundary_point(c1, 0.0)) -
                             sys.value(g.nodes[i], sys.surface->boundary_point(c0, 0.0)));
    return f;
}

// --- system presets ------------------------------------------------------

/// H = eps (r^2 - rho^2) / 2 on the disk of radius rho; vanishes on the
/// boundary, rotates each circle rigidly, fixes the center.
inline HamiltonianSystem radial_quadratic_system(double rho, double eps) {
    auto surface = std::make_shared<DiskSurface>(rho);
    HamiltonianSystem sys;
    sys.surface = surface;
    sys.value = [eps, rho](double, const P2& z) {
        return eps * (z.squaredNorm() - rho * rho) / 2;
    };
    sys.gradient = [eps](double, const P2& z) { return P2(eps * z); };
    return sys;
}

/// Random smooth normalized system on the disk: a low-order polynomial
/// with smooth time dependence, multiplied by (rho^2 - r^2) so it
/// vanishes on the boundary.
inline HamiltonianSystem random_disk_system(double rho, double amplitude, std::mt19937& rng) {
    auto surface = std::make_shared<DiskSurface>(rho);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    struct Term {
        int i, j;
        double c0, c1, phase;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; i + j <= 2; ++j)
            terms->push_back({i, j, u(rng), u(rng), std::numbers::pi * u(rng)});

    auto poly = [terms](double t, const P2& z) {
        double v = 0;
        for (const auto& tm : *terms)
            v += (tm.c0 + tm.c1 * std::sin(2 * std::numbers::pi * t + tm.phase)) *
                 std::pow(z[0], tm.i) * std::pow(z[1], tm.j);
        return v;
    };
    auto poly_grad = [terms](double t, const P2& z) {
        P2 g{0, 0};
        for (const auto& tm : *terms) {
            const double c = tm.c0 + tm.c1 * std::sin(2 * std::numbers::pi * t + tm.phase);
            if (tm.i > 0) g[0] += c * tm.i * std::pow(z[0], tm.i - 1) * std::pow(z[1], tm.j);
            if (tm.j > 0) g[1] += c * tm.j * std::pow(z[0], tm.i) * std::pow(z[1], tm.j - 1);
        }
        return g;
    };

    HamiltonianSystem sys;
    sys.surface = surface;
    sys.value = [=](double t, const P2& z) {
        return amplitude * (rho * rho - z.squaredNorm()) * poly(t, z);
    };
    sys.gradient = [=](double t, const P2& z) {
        const double cut = rho * rho - z.squaredNorm();
        return P2(amplitude * (cut * poly_grad(t, z) - 2 * poly(t, z) * z));
    };
    return sys;
}

}  // namespace reebkit
