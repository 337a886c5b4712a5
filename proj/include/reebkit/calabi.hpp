#pragma once

/**
 * @file calabi.hpp
 * @brief Calabi invariant, action-minimizing fixed points, and the
 *        sharp fixed-point inequality.
 *
 * The Calabi invariant of a normalized Hamiltonian isotopy is computed
 * two ways: the omega-integral of the normalized action, and twice the
 * time-integral of the spatial mean of the Hamiltonian. Their agreement
 * is the cross-check; the fixed-point inequality a + c a^2 <= Cal/(2 area)
 * is verified at the action minimizer of a quasi-autonomous system.
 */

#include "surface.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace reebkit {

struct MinimizerOnBoundary : SurfaceError {
    MinimizerOnBoundary() : SurfaceError("MinimizerOnBoundary") {}
};
struct PositiveCalabi : SurfaceError {
    PositiveCalabi() : SurfaceError("PositiveCalabi") {}
};
struct NotSmallEnough : SurfaceError {
    NotSmallEnough() : SurfaceError("NotSmallEnough") {}
};
struct NotQuasiAutonomous : SurfaceError {
    NotQuasiAutonomous() : SurfaceError("NotQuasiAutonomous") {}
};

struct CalabiValues {
    double via_action;
    double via_hamiltonian;
};

namespace detail {

/// 2 * time-space quadrature of H against omega at a given level.
inline double calabi_hamiltonian_level(const HamiltonianSystem& sys, int n) {
    const GaussRule tg = gauss_rule(std::max(8, n));
    double total = 0;
    for (const auto& [z, w] : sys.surface->quadrature(n))
        for (std::size_t i = 0; i < tg.nodes.size(); ++i)
            total += 2 * w * tg.weights[i] * sys.value(tg.nodes[i], z);
    return total;
}

inline double calabi_action_level(const HamiltonianSystem& sys, int n, double ode_tol) {
    double total = 0;
    for (const auto& [z, w] : sys.surface->quadrature(n))
        total += w * action_of_point(sys, z, ode_tol);
    return total;
}

}  // namespace detail

/// Both Calabi formulas, each refined until successive quadrature levels
/// agree within quad_tol.
inline CalabiValues calabi(const HamiltonianSystem& sys, double quad_tol) {
    assert_boundary_contract(sys, true);
    CalabiValues out{0, 0};

    double prev = detail::calabi_hamiltonian_level(sys, 8);
    bool ok = false;
    for (int n = 16; n <= 128; n *= 2) {
        double cur = detail::calabi_hamiltonian_level(sys, n);
        if (std::abs(cur - prev) < quad_tol) {
            out.via_hamiltonian = cur;
            ok = true;
            break;
        }
        prev = cur;
    }
    if (!ok) throw QuadratureNotConverged();

    const double ode_tol = std::clamp(quad_tol / 100, 1e-13, 1e-11);
    prev = detail::calabi_action_level(sys, 8, ode_tol);
    ok = false;
    for (int n = 16; n <= 64; n *= 2) {
        double cur = detail::calabi_action_level(sys, n, ode_tol);
        if (std::abs(cur - prev) < quad_tol) {
            out.via_action = cur;
            ok = true;
            break;
        }
        prev = cur;
    }
    if (!ok) throw QuadratureNotConverged();
    return out;
}

/**
 * Calabi invariant of the composition psi o phi via the Hamiltonian
 * formula for the concatenated generator K_t + H_t o psi_t^{-1}; the
 * inverse is evaluated by backward integration of the outer flow at
 * each quadrature node.
 */
inline double calabi_of_composition(const HamiltonianSystem& outer,
                                    const HamiltonianSystem& inner, double quad_tol) {
    assert_boundary_contract(outer, true);
    assert_boundary_contract(inner, true);
    const double ode_tol = std::clamp(quad_tol / 100, 1e-13, 1e-11);
    auto level = [&](int n) {
        const detail::GaussRule tg = detail::gauss_rule(std::max(8, n));
        double total = 0;
        for (const auto& [z, w] : outer.surface->quadrature(n)) {
            for (std::size_t i = 0; i < tg.nodes.size(); ++i) {
                const double t = tg.nodes[i];
                // psi_t^{-1}(z): run the outer flow backwards from t to 0.
                AdaptiveRk rk(
                    [&outer](double s, const Vec& y) {
                        P2 x = hamiltonian_field(outer, s, {y[0], y[1]});
                        Vec dy(2);
                        dy << x[0], x[1];
                        return dy;
                    },
                    ode_tol);
                double time = t;
                Vec y(2);
                y << z[0], z[1];
                rk.advance(time, y, -t);
                total += 2 * w * tg.weights[i] *
                         (outer.value(t, z) + inner.value(t, {y[0], y[1]}));
            }
        }
        return total;
    };
    double prev = level(8);
    for (int n = 16; n <= 64; n *= 2) {
        double cur = level(n);
        if (std::abs(cur - prev) < quad_tol) return cur;
        prev = cur;
    }
    throw QuadratureNotConverged();
}

struct FixedPointRecord {
    P2 point;
    double action = 0.0;
    bool contractible = true;
};

namespace detail {

/// Spatial minimizer of g over the surface by coarse grid search plus
/// gradient descent with backtracking.
inline std::pair<P2, double> minimize_on_surface(const Surface& surface,
                                                 const std::function<double(const P2&)>& g,
                                                 const std::function<P2(const P2&)>& grad) {
    P2 best{0, 0};
    double best_v = std::numeric_limits<double>::infinity();
    for (const auto& [z, w] : surface.quadrature(16)) {
        const double v = g(z);
        if (v < best_v) {
            best_v = v;
            best = z;
        }
    }
    double step = 0.1;
    for (int it = 0; it < 400; ++it) {
        const P2 d = grad(best);
        if (d.norm() < 1e-13) break;
        P2 trial = best - step * d;
        if (surface.in_domain(trial) && g(trial) < best_v) {
            best = trial;
            best_v = g(best);
            step *= 1.3;
        } else {
            step /= 2;
            if (step < 1e-15) break;
        }
    }
    // Polish with Newton on the gradient; value comparisons stall at
    // sqrt(machine epsilon) from the minimizer, the gradient does not.
    for (int it = 0; it < 25; ++it) {
        const P2 d = grad(best);
        if (d.norm() < 1e-15) break;
        Eigen::Matrix2d jac;
        const double h = 1e-7;
        for (int c = 0; c < 2; ++c) {
            P2 zp = best;
            zp[c] += h;
            jac.col(c) = (grad(zp) - d) / h;
        }
        Eigen::FullPivLU<Eigen::Matrix2d> lu(jac);
        if (!lu.isInvertible()) break;
        P2 trial = best - P2(lu.solve(d));
        if (!surface.in_domain(trial) || grad(trial).norm() >= d.norm()) break;
        best = trial;
    }
    return {best, g(best)};
}

}  // namespace detail

/**
 * The action minimizer of a quasi-autonomous normalized system whose
 * Hamiltonian vanishes on the boundary: the common spatial minimizer of
 * H_t is a fixed point of the flow, and its action is returned.
 */
inline FixedPointRecord min_action_fixed_point(const HamiltonianSystem& sys, double tol) {
    assert_boundary_contract(sys, true);

    // Quasi-autonomy check: the t-slices must share their minimizer.
    const int nt = 32;
    auto mean_h = [&sys, nt](const P2& z) {
        const detail::GaussRule g = detail::gauss_rule(nt);
        double v = 0;
        for (int i = 0; i < nt; ++i) v += g.weights[i] * sys.value(g.nodes[i], z);
        return v;
    };
    auto mean_grad = [&sys, nt](const P2& z) {
        const detail::GaussRule g = detail::gauss_rule(nt);
        P2 v{0, 0};
        for (int i = 0; i < nt; ++i) v += g.weights[i] * sys.gradient(g.nodes[i], z);
        return v;
    };
    auto [z_min, value] = detail::minimize_on_surface(
        *sys.surface, mean_h, mean_grad);
    // Boundary values are zero, so an interior minimizer must be negative.
    if (value >= -1e-14) throw MinimizerOnBoundary();
    for (int i = 0; i < nt; ++i) {
        const double t = double(i) / nt;
        auto [zt, vt] = detail::minimize_on_surface(
            *sys.surface, [&](const P2& z) { return sys.value(t, z); },
            [&](const P2& z) { return sys.gradient(t, z); });
        if ((zt - z_min).norm() > std::max(1e-6, 100 * tol)) throw NotQuasiAutonomous();
    }

    P2 displacement;
    FixedPointRecord rec;
    rec.point = z_min;
    rec.action = action_of_point(sys, z_min, std::clamp(tol / 10, 1e-13, 1e-11), {}, &displacement);
    rec.contractible = sys.surface->loop_contractible(displacement);
    if ((flow_point(sys, z_min, 1.0, 1e-12) - z_min).norm() > tol)
        throw SurfaceError("minimizer is not a fixed point");
    return rec;
}

struct InequalityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // lhs - rhs
    bool pass = false;
    bool equality = false;
};

/// sup over a sample grid of max(|H|, |grad H|); the C^1-size gate.
inline double c1_norm_estimate(const HamiltonianSystem& sys) {
    double sup = 0;
    const int nt = 16;
    for (int i = 0; i <= nt; ++i) {
        const double t = double(i) / nt;
        for (const auto& [z, w] : sys.surface->quadrature(24))
            sup = std::max({sup, std::abs(sys.value(t, z)), sys.gradient(t, z).norm()});
    }
    return sup;
}

/**
 * Verifies a(z_min) + c a^2 <= Cal / (2 area) for a small normalized
 * quasi-autonomous system with non-positive Calabi invariant. The
 * smallness gate is |H|_{C1} < N / (8 area c) with N the number of
 * boundary components, half the regime in which the inequality is
 * asserted; outside the gate nothing is claimed.
 */
inline InequalityReport verify_fixed_point_inequality(const HamiltonianSystem& sys, double c,
                                                      double quad_tol) {
    if (c <= 0) throw SurfaceError("c must be positive");
    const double area = sys.surface->area();
    const double gate = sys.surface->boundary_components() / (8 * area * c);
    if (c1_norm_estimate(sys) >= gate) throw NotSmallEnough();

    const CalabiValues cal = calabi(sys, quad_tol);
    if (cal.via_hamiltonian > quad_tol) throw PositiveCalabi();

    const FixedPointRecord fp = min_action_fixed_point(sys, 1e-9);
    InequalityReport rep;
    rep.lhs = fp.action + c * fp.action * fp.action;
    rep.rhs = cal.via_hamiltonian / (2 * area);
    rep.margin = rep.lhs - rep.rhs;
    rep.pass = rep.lhs <= rep.rhs + quad_tol;
    rep.equality = std::abs(rep.margin) <= quad_tol;
    return rep;
}

}  // namespace reebkit
