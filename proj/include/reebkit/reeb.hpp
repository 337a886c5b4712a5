#pragma once

/**
 * @file reeb.hpp
 * @brief Reeb vector fields, flows, periodic orbits, volume, return maps.
 *
 * The Reeb field of a contact form lambda is the unique solution of
 * lambda(R) = 1, R -| dlambda = 0. Everything here reduces to that
 * linear system plus adaptive integration of the resulting flow.
 */

#include "chart.hpp"
#include "ode.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace reebkit {

struct DynamicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoConvergence : DynamicsError {
    explicit NoConvergence(int iterations)
        : DynamicsError("NoConvergence after " + std::to_string(iterations) + " iterations"),
          iterations(iterations) {}
    int iterations;
};
struct SectionNotTransverse : DynamicsError {
    SectionNotTransverse() : DynamicsError("SectionNotTransverse") {}
};
struct QuadratureNotConverged : DynamicsError {
    QuadratureNotConverged() : DynamicsError("QuadratureNotConverged") {}
};
struct TransversalityViolated : DynamicsError {
    TransversalityViolated() : DynamicsError("TransversalityViolated") {}
};

/// Solves lambda(R) = 1, dlambda(R, .) = 0 at x. On a constraint
/// surface the second identity is required only against tangent vectors
/// and R is kept tangent.
inline Vec reeb_field(const ContactChart& chart, const Vec& x) {
    const int n = chart.dim();
    const Vec l = chart.lambda(x);
    const Mat omega = chart.dlambda(x);

    int rows = 1 + n + (chart.has_constraint() ? 1 : 0);
    Mat a(rows, n);
    Vec rhs = Vec::Zero(rows);
    a.row(0) = l.transpose();
    rhs[0] = 1.0;
    if (chart.has_constraint()) {
        const Vec g = chart.constraint_gradient(x);
        a.row(1) = g.transpose();
        const Mat proj = Mat::Identity(n, n) - (g * g.transpose()) / g.squaredNorm();
        a.bottomRows(n) = proj * omega;
    } else {
        a.bottomRows(n) = omega;
    }

    Eigen::ColPivHouseholderQR<Mat> qr(a);
    if (qr.rank() < n) throw DegenerateContactForm();
    Vec r = qr.solve(rhs);
    if ((a * r - rhs).norm() > 1e-9 * std::max(1.0, r.norm())) throw DegenerateContactForm();
    if (std::abs(l.dot(r) - 1.0) > 1e-12) throw DegenerateContactForm();
    return r;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    OdeStats stats;
};

namespace detail {

inline OdePostStep projection_hook(const ContactChart& chart) {
    return [&chart](Vec& y) {
        chart.project(y);
        if (!chart.in_domain(y)) throw LeftChartDomain();
    };
}

}  // namespace detail

/// Integrates the Reeb flow from x0 over a (possibly negative) time t.
inline Trajectory integrate(const ContactChart& chart, const Vec& x0, double t, double tol) {
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    if (t == 0.0) return traj;

    AdaptiveRk rk([&chart](double, const Vec& y) { return reeb_field(chart, y); }, tol,
                  detail::projection_hook(chart));
    double time = 0.0;
    Vec y = x0;
    rk.advance(time, y, t, [&traj](double s, const Vec& ys) {
        traj.times.push_back(s);
        traj.states.push_back(ys);
    });
    traj.stats = rk.stats();
    return traj;
}

/// Endpoint-only flow evaluation.
inline Vec flow(const ContactChart& chart, const Vec& x0, double t, double tol) {
    if (t == 0.0) return x0;
    AdaptiveRk rk([&chart](double, const Vec& y) { return reeb_field(chart, y); }, tol,
                  detail::projection_hook(chart));
    double time = 0.0;
    Vec y = x0;
    rk.advance(time, y, t);
    return y;
}

enum class OrbitTag { Short, Continued, Unknown };

struct OrbitRecord {
    Vec anchor;
    double period = 0.0;
    double residual = 0.0;
    OrbitTag tag = OrbitTag::Unknown;
};

/**
 * Newton shooting for a periodic orbit near the seed. Unknowns are two
 * offsets on a transversal section through the seed and the return time;
 * the closure defect is projected onto the section frame and the flow
 * direction. Jacobians are finite differences.
 */
inline OrbitRecord find_periodic_orbit(const ContactChart& chart, const Vec& seed,
                                       double period_guess, double tol,
                                       OrbitTag tag = OrbitTag::Unknown) {
    if (period_guess <= 0) throw DynamicsError("period_guess must be positive");
    const int n = chart.dim();
    Vec anchor = seed;
    chart.project(anchor);

    const Vec r_seed = reeb_field(chart, anchor);
    if (r_seed.norm() < 1e-10) throw SectionNotTransverse();
    const Vec r_dir = r_seed.normalized();

    // Orthonormal frame of the section: orthogonal to the flow direction
    // and, on a constraint surface, to its normal.
    Mat killed(n, chart.has_constraint() ? 2 : 1);
    killed.col(0) = r_dir;
    if (chart.has_constraint())
        killed.col(1) = chart.constraint_gradient(anchor).normalized();
    Eigen::HouseholderQR<Mat> frame_qr(killed);
    Mat q = frame_qr.householderQ();
    const Vec u1 = q.col(killed.cols());
    const Vec u2 = q.col(killed.cols() + 1);

    const double ode_tol = std::clamp(tol / 100, 1e-13, 1e-10);
    auto defect = [&](const Eigen::Vector3d& xi) -> std::pair<Eigen::Vector3d, double> {
        Vec x = anchor + xi[0] * u1 + xi[1] * u2;
        chart.project(x);
        Vec e = chart.displacement(x, flow(chart, x, xi[2], ode_tol));
        Eigen::Vector3d f(e.dot(u1), e.dot(u2), e.dot(r_dir));
        return {f, e.norm()};
    };

    Eigen::Vector3d xi(0.0, 0.0, period_guess);
    const int max_iter = 40;
    for (int it = 0; it < max_iter; ++it) {
        auto [f, full] = defect(xi);
        if (full < tol) {
            Vec x = anchor + xi[0] * u1 + xi[1] * u2;
            chart.project(x);
            if (xi[2] <= 0) throw SectionNotTransverse();
            return {x, xi[2], full, tag};
        }
        Eigen::Matrix3d jac;
        for (int c = 0; c < 3; ++c) {
            Eigen::Vector3d xp = xi;
            const double h = 1e-6 * std::max(1.0, std::abs(xi[c]));
            xp[c] += h;
            jac.col(c) = (defect(xp).first - f) / h;
        }
        Eigen::FullPivLU<Eigen::Matrix3d> lu(jac);
        if (!lu.isInvertible()) throw SectionNotTransverse();
        Eigen::Vector3d step = lu.solve(f);
        // Keep the return time near the requested period.
        step[2] = std::clamp(step[2], -0.4 * period_guess, 0.4 * period_guess);
        const double cap = 0.5;
        if (std::hypot(step[0], step[1]) > cap) step.head<2>() *= cap / std::hypot(step[0], step[1]);
        // Back off when a trial step leaves the chart.
        double damp = 1.0;
        bool landed = false;
        for (int ls = 0; ls < 25 && !landed; ++ls) {
            try {
                defect(xi - damp * step);
                landed = true;
            } catch (const ChartError&) {
                damp /= 2;
            }
        }
        if (!landed) throw NoConvergence(it + 1);
        xi -= damp * step;
        if (xi[2] < 0.2 * period_guess || xi[2] > 3.0 * period_guess) throw NoConvergence(it + 1);
    }
    throw NoConvergence(max_iter);
}

namespace detail {

inline double triple(const ContactChart& chart, const Vec& x, const Vec& a, const Vec& b,
                     const Vec& c) {
    const Vec l = chart.lambda(x);
    const Mat w = chart.dlambda(x);
    return l.dot(a) * b.dot(w * c) - l.dot(b) * a.dot(w * c) + l.dot(c) * a.dot(w * b);
}

struct GaussRule {
    std::vector<double> nodes, weights;  // on [0, 1]
};

inline GaussRule gauss_rule(int n) {
    // Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
    Mat jm = Mat::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double b = i / std::sqrt(4.0 * i * i - 1.0);
        jm(i - 1, i) = b;
        jm(i, i - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(jm);
    GaussRule rule;
    for (int i = 0; i < n; ++i) {
        rule.nodes.push_back((es.eigenvalues()[i] + 1) / 2);
        double w0 = es.eigenvectors()(0, i);
        rule.weights.push_back(w0 * w0);
    }
    return rule;
}

inline const ContactChart& root_base(const ContactChart& chart) {
    const ContactChart* c = &chart;
    while (auto* conf = dynamic_cast<const ConformalChart*>(c)) c = &conf->base();
    return *c;
}

inline double torus_radius(const ContactChart& chart) {
    const ContactChart& base = root_base(chart);
    if (auto* d = dynamic_cast<const DiskTorusChart*>(&base)) return d->rho();
    if (auto* s = dynamic_cast<const SeifertTorusChart*>(&base)) return s->rho();
    throw DynamicsError("chart is not a solid-torus model");
}

inline double volume_level(const ContactChart& chart, int n,
                           const std::vector<double>& radial_breaks) {
    const ContactChart& base = root_base(chart);
    if (base.kind() == ChartKind::Ellipsoid) {
        const auto& ell = dynamic_cast<const EllipsoidChart&>(base);
        const GaussRule g = gauss_rule(n);
        const int na = std::max(8, n);
        const double pi = std::numbers::pi;
        const double hpsi = pi / 2, hphi = 2 * pi / na;
        double total = 0;
        for (int i = 0; i < n; ++i) {
            const double psi = g.nodes[i] * hpsi;
            const double r1 = std::sqrt(ell.p() / pi), r2 = std::sqrt(ell.q() / pi);
            for (int j = 0; j < na; ++j) {
                const double phi1 = j * hphi;
                for (int k = 0; k < na; ++k) {
                    const double phi2 = k * hphi;
                    Vec x = ell.point(psi, phi1, phi2);
                    Vec dpsi(4), dphi1(4), dphi2(4);
                    dpsi << r1 * std::cos(psi) * std::cos(phi1),
                        r1 * std::cos(psi) * std::sin(phi1),
                        -r2 * std::sin(psi) * std::cos(phi2),
                        -r2 * std::sin(psi) * std::sin(phi2);
                    dphi1 << -x[1], x[0], 0, 0;
                    dphi2 << 0, 0, -x[3], x[2];
                    total += g.weights[i] * hpsi * hphi * hphi *
                             triple(chart, x, dpsi, dphi1, dphi2);
                }
            }
        }
        return total;
    }
    const double rho = torus_radius(chart);
    // Radial panels split at supplied breakpoints (e.g. where a
    // conformal factor is only C^1), keeping Gauss nodes off the kinks.
    std::vector<double> edges{0.0};
    for (double b : radial_breaks)
        if (b > 1e-12 && b < rho - 1e-12) edges.push_back(b);
    edges.push_back(rho);
    std::sort(edges.begin(), edges.end());
    const GaussRule g = gauss_rule(n);
    const int na = std::max(8, n);
    const double htheta = 2 * std::numbers::pi / na, hs = 1.0 / na;
    double total = 0;
    for (std::size_t seg = 0; seg + 1 < edges.size(); ++seg)
    for (int i = 0; i < n; ++i) {
        const double len = edges[seg + 1] - edges[seg];
        const double r = edges[seg] + g.nodes[i] * len;
        for (int j = 0; j < na; ++j) {
            const double theta = j * htheta;
            Vec dr(3), dtheta(3), ds(3);
            dr << std::cos(theta), std::sin(theta), 0;
            dtheta << -r * std::sin(theta), r * std::cos(theta), 0;
            ds << 0, 0, 1;
            for (int k = 0; k < na; ++k) {
                Vec x(3);
                x << r * std::cos(theta), r * std::sin(theta), k * hs;
                total += g.weights[i] * len * htheta * hs * triple(chart, x, dr, dtheta, ds);
            }
        }
    }
    return total;
}

}  // namespace detail

/// Integral of lambda ^ dlambda over the chart domain by tensor-product
/// quadrature with doubling refinement. Radial breakpoints split the
/// quadrature panels where the integrand loses smoothness.
inline double contact_volume(const ContactChart& chart, double quad_tol,
                             const std::vector<double>& radial_breaks = {}) {
    if (quad_tol <= 0) throw DynamicsError("quad_tol must be positive");
    double prev = detail::volume_level(chart, 8, radial_breaks);
    for (int n = 16; n <= 128; n *= 2) {
        double cur = detail::volume_level(chart, n, radial_breaks);
        if (std::abs(cur - prev) < quad_tol) return cur;
        prev = cur;
    }
    throw QuadratureNotConverged();
}

struct ReturnRecord {
    Eigen::Vector2d z;    // section point on D x {0}
    double tau = 0.0;     // first-return time
    Eigen::Vector2d phi;  // return point
    double winding = 0.0; // unwrapped angle swept about the core, radians
};

/**
 * First-return data of the disk section D x {0} of a solid-torus chart.
 * The flow must be transverse to the section and co-oriented with d_s;
 * the s-coordinate is unwrapped, so one return means s has advanced by 1.
 */
inline std::vector<ReturnRecord> first_return_data(const ContactChart& chart,
                                                   const std::vector<Eigen::Vector2d>& grid,
                                                   double tol) {
    detail::torus_radius(chart);
    std::vector<ReturnRecord> out;
    out.reserve(grid.size());
    for (const auto& z : grid) {
        Vec y(3);
        y << z[0], z[1], 0.0;
        if (!chart.in_domain(y)) throw LeftChartDomain();

        double t = 0.0;
        double winding = 0.0;
        double prev_angle = std::atan2(y[1], y[0]);
        bool track_angle = y.head<2>().norm() > 1e-9;
        auto check = [&](const Vec& ys) {
            Vec r = reeb_field(chart, ys);
            if (r[2] <= 1e-10) throw TransversalityViolated();
            return r;
        };
        check(y);

        AdaptiveRk rk([&chart](double, const Vec& ys) { return reeb_field(chart, ys); }, tol,
                      detail::projection_hook(chart));
        // Step in chunks until s passes 1, watching transversality and
        // accumulating the unwrapped polar angle.
        auto observe = [&](double, const Vec& ys) {
            check(ys);
            if (track_angle) {
                double a = std::atan2(ys[1], ys[0]);
                double da = a - prev_angle;
                while (da > std::numbers::pi) da -= 2 * std::numbers::pi;
                while (da < -std::numbers::pi) da += 2 * std::numbers::pi;
                winding += da;
                prev_angle = a;
            }
        };
        long guard = 0;
        while (y[2] < 1.0) {
            double dt = std::clamp((1.0 - y[2]) / check(y)[2], 1e-6, 0.25);
            rk.advance(t, y, dt, observe);
            if (++guard > 100000) throw DynamicsError("first return not reached");
        }
        // Newton in time onto the section s = 1.
        for (int it = 0; it < 50 && std::abs(y[2] - 1.0) > 1e-13; ++it) {
            double dt = (1.0 - y[2]) / check(y)[2];
            rk.advance(t, y, dt, observe);
        }
        if (std::abs(y[2] - 1.0) > 1e-12) throw DynamicsError("section landing failed");
        out.push_back({z, t, {y[0], y[1]}, winding});
    }
    return out;
}

}  // namespace reebkit
