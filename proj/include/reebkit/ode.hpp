#pragma once

/**
 * @file ode.hpp
 * @brief Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).
 *
 * The stepper keeps the per-step local error estimate below a requested
 * tolerance and supports an optional post-step hook, used by the charts
 * to re-project states onto a constraint surface.
 */

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace reebkit {

struct OdeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepSizeUnderflow : OdeError {
    StepSizeUnderflow() : OdeError("StepSizeUnderflow") {}
};

using Vec = Eigen::VectorXd;
using OdeRhs = std::function<Vec(double, const Vec&)>;
/// Applied to each accepted state (e.g. constraint projection). May throw.
using OdePostStep = std::function<void(Vec&)>;

struct OdeStats {
    long steps = 0;
    long rejected = 0;
    double max_local_error = 0.0;
};

namespace detail {

// Dormand-Prince coefficients.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr double dp_b5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                                    -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double dp_b4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

}  // namespace detail

class AdaptiveRk {
public:
    AdaptiveRk(OdeRhs rhs, double tol, OdePostStep post_step = {})
        : rhs_(std::move(rhs)), tol_(tol), post_step_(std::move(post_step)) {
        if (tol <= 0) throw OdeError("tolerance must be positive");
    }

    /// Integrates from (t, y) to t + dt, adapting the internal step.
    /// Calls observe(t, y) after every accepted step when provided.
    void advance(double& t, Vec& y, double dt,
                 const std::function<void(double, const Vec&)>& observe = {}) {
        if (dt == 0.0) return;
        const double dir = dt > 0 ? 1.0 : -1.0;
        const double t_end = t + dt;
        double h = dir * std::min(std::abs(dt), initial_step(t, y));
        while (dir * (t_end - t) > 0) {
            if (dir * (t + h) > dir * t_end) h = t_end - t;
            if (std::abs(h) < 1e-14 * (std::abs(t) + 1.0)) throw StepSizeUnderflow();
            double err;
            Vec y_next = try_step(t, y, h, err);
            stats_.max_local_error = std::max(stats_.max_local_error, err);
            if (err <= tol_) {
                t += h;
                y = std::move(y_next);
                if (post_step_) post_step_(y);
                ++stats_.steps;
                if (observe) observe(t, y);
            } else {
                ++stats_.rejected;
            }
            double scale = err > 0 ? 0.9 * std::pow(tol_ / err, 0.2) : 5.0;
            h *= std::clamp(scale, 0.2, 5.0);
        }
    }

    const OdeStats& stats() const { return stats_; }

private:
    double initial_step(double t, const Vec& y) const {
        double f = rhs_(t, y).norm();
        double scale = std::max(y.norm(), 1.0);
        return std::max(1e-8, 0.01 * scale / std::max(f, 1e-12));
    }

    Vec try_step(double t, const Vec& y, double h, double& err) const {
        Vec k[7];
        k[0] = rhs_(t, y);
        for (int i = 1; i < 7; ++i) {
            Vec yi = y;
            for (int j = 0; j < i; ++j)
                if (detail::dp_a[i][j] != 0.0) yi += h * detail::dp_a[i][j] * k[j];
            k[i] = rhs_(t + detail::dp_c[i] * h, yi);
        }
        Vec y5 = y, y4 = y;
        for (int i = 0; i < 7; ++i) {
            if (detail::dp_b5[i] != 0.0) y5 += h * detail::dp_b5[i] * k[i];
            if (detail::dp_b4[i] != 0.0) y4 += h * detail::dp_b4[i] * k[i];
        }
        err = (y5 - y4).norm();
        return y5;
    }

    OdeRhs rhs_;
    double tol_;
    OdePostStep post_step_;
    OdeStats stats_;
};

}  // namespace reebkit
