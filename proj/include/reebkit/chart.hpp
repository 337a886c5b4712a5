#pragma once

/**
 * @file chart.hpp
 * @brief Coordinate models of contact forms.
 *
 * Three base models are provided:
 *  - EllipsoidChart: the restriction of the standard Liouville form of
 *    R^4 to the boundary of the solid ellipsoid E(p,q), handled in
 *    ambient coordinates with a constraint surface.
 *  - SeifertTorusChart: the local model around a (possibly singular)
 *    fiber of a Seifert fibration, lambda = r^2/a1 dtheta +
 *    (1 + 2 pi a1'/a1 r^2)/a1 ds on a solid torus.
 *  - DiskTorusChart: the fibered disk model lambda = ds + r^2/2 dtheta
 *    around a regular fiber.
 * ConformalChart wraps any of them with a factor (1 + eps f), and
 * BumpSpec builds the radial bump factor used to perturb a Besse flow.
 *
 * Torus models use Cartesian coordinates (x, y, s); the polar
 * expressions are singular on the core orbit.
 */

#include "ode.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace reebkit {

struct ChartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FactorNotPositive : ChartError {
    FactorNotPositive() : ChartError("FactorNotPositive") {}
};
struct LeftChartDomain : ChartError {
    LeftChartDomain() : ChartError("LeftChartDomain") {}
};
struct DegenerateContactForm : ChartError {
    DegenerateContactForm() : ChartError("DegenerateContactForm") {}
};

enum class ChartKind { Ellipsoid, SolidTorus, Conformal };

using Mat = Eigen::MatrixXd;

/// A scalar function with its gradient, in chart coordinates.
struct ScalarField {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
};

class ContactChart {
public:
    virtual ~ContactChart() = default;

    virtual ChartKind kind() const = 0;
    virtual int dim() const = 0;

    /// Covector components of lambda at x.
    virtual Vec lambda(const Vec& x) const = 0;
    /// J(i,j) = d lambda_j / d x_i.
    virtual Mat lambda_jacobian(const Vec& x) const = 0;

    /// Exterior derivative as the antisymmetric matrix of dlambda(e_i, e_j).
    Mat dlambda(const Vec& x) const {
        Mat j = lambda_jacobian(x);
        return j - j.transpose();
    }

    virtual bool has_constraint() const { return false; }
    virtual double constraint(const Vec&) const { return 0.0; }
    virtual Vec constraint_gradient(const Vec& x) const { return Vec::Zero(x.size()); }
    /// Re-projects x onto the constraint surface (no-op without one).
    virtual void project(Vec&) const {}
    virtual bool in_domain(const Vec&) const { return true; }

    /// to - from with periodic chart coordinates wrapped to the nearest
    /// representative (the solid-torus fiber coordinate has period 1).
    virtual Vec displacement(const Vec& from, const Vec& to) const { return to - from; }
};

class EllipsoidChart final : public ContactChart {
public:
    EllipsoidChart(int p, int q) : p_(p), q_(q) {
        if (p <= 0 || q <= 0) throw ChartError("ellipsoid requires positive p, q");
    }

    ChartKind kind() const override { return ChartKind::Ellipsoid; }
    int dim() const override { return 4; }
    int p() const { return p_; }
    int q() const { return q_; }

    // lambda = (x1 dy1 - y1 dx1 + x2 dy2 - y2 dx2) / 2
    Vec lambda(const Vec& x) const override {
        Vec l(4);
        l << -x[1] / 2, x[0] / 2, -x[3] / 2, x[2] / 2;
        return l;
    }

    Mat lambda_jacobian(const Vec&) const override {
        Mat j = Mat::Zero(4, 4);
        j(0, 1) = 0.5;
        j(1, 0) = -0.5;
        j(2, 3) = 0.5;
        j(3, 2) = -0.5;
        return j;
    }

    bool has_constraint() const override { return true; }

    // |z1|^2/p + |z2|^2/q = 1/pi
    double constraint(const Vec& x) const override {
        return (x[0] * x[0] + x[1] * x[1]) / p_ + (x[2] * x[2] + x[3] * x[3]) / q_ -
               1.0 / std::numbers::pi;
    }

    Vec constraint_gradient(const Vec& x) const override {
        Vec g(4);
        g << 2 * x[0] / p_, 2 * x[1] / p_, 2 * x[2] / q_, 2 * x[3] / q_;
        return g;
    }

    void project(Vec& x) const override {
        for (int it = 0; it < 3; ++it) {
            double c = constraint(x);
            if (std::abs(c) < 1e-15) break;
            Vec g = constraint_gradient(x);
            x -= (c / g.squaredNorm()) * g;
        }
    }

    /// Point on the constraint surface with |z1| at polar angle psi of the
    /// fibered parametrization and phases (phi1, phi2).
    Vec point(double psi, double phi1, double phi2) const {
        const double r1 = std::sqrt(p_ / std::numbers::pi) * std::sin(psi);
        const double r2 = std::sqrt(q_ / std::numbers::pi) * std::cos(psi);
        Vec x(4);
        x << r1 * std::cos(phi1), r1 * std::sin(phi1), r2 * std::cos(phi2), r2 * std::sin(phi2);
        return x;
    }

private:
    int p_;
    int q_;
};

/// Local Seifert model: Reeb field -2 pi a1' d_theta + a1 d_s.
class SeifertTorusChart final : public ContactChart {
public:
    SeifertTorusChart(int alpha1, int alpha1_prime, double rho = 1.0)
        : a1_(alpha1), a1p_(alpha1_prime), rho_(rho) {
        if (alpha1 <= 0 || rho <= 0) throw ChartError("invalid solid torus parameters");
    }

    ChartKind kind() const override { return ChartKind::SolidTorus; }
    int dim() const override { return 3; }
    double rho() const { return rho_; }
    int alpha1() const { return a1_; }
    int alpha1_prime() const { return a1p_; }

    Vec lambda(const Vec& x) const override {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        Vec l(3);
        l << -x[1] / a1_, x[0] / a1_,
            (1.0 + 2 * std::numbers::pi * (double(a1p_) / a1_) * r2) / a1_;
        return l;
    }

    Mat lambda_jacobian(const Vec& x) const override {
        Mat j = Mat::Zero(3, 3);
        j(0, 1) = 1.0 / a1_;
        j(1, 0) = -1.0 / a1_;
        const double c = 4 * std::numbers::pi * double(a1p_) / (a1_ * a1_);
        j(0, 2) = c * x[0];
        j(1, 2) = c * x[1];
        return j;
    }

    bool in_domain(const Vec& x) const override {
        return x[0] * x[0] + x[1] * x[1] < rho_ * rho_;
    }

    Vec displacement(const Vec& from, const Vec& to) const override {
        Vec d = to - from;
        d[2] -= std::round(d[2]);
        return d;
    }

private:
    int a1_;
    int a1p_;
    double rho_;
};

/// Disk model around a regular fiber: lambda = ds + r^2/2 dtheta, Reeb d_s.
class DiskTorusChart final : public ContactChart {
public:
    explicit DiskTorusChart(double rho = 1.0) : rho_(rho) {
        if (rho <= 0) throw ChartError("invalid disk radius");
    }

    ChartKind kind() const override { return ChartKind::SolidTorus; }
    int dim() const override { return 3; }
    double rho() const { return rho_; }

    Vec lambda(const Vec& x) const override {
        Vec l(3);
        l << -x[1] / 2, x[0] / 2, 1.0;
        return l;
    }

    Mat lambda_jacobian(const Vec&) const override {
        Mat j = Mat::Zero(3, 3);
        j(0, 1) = 0.5;
        j(1, 0) = -0.5;
        return j;
    }

    bool in_domain(const Vec& x) const override {
        return x[0] * x[0] + x[1] * x[1] < rho_ * rho_;
    }

    Vec displacement(const Vec& from, const Vec& to) const override {
        Vec d = to - from;
        d[2] -= std::round(d[2]);
        return d;
    }

private:
    double rho_;
};

/// lambda = (1 + eps f) lambda_base.
class ConformalChart final : public ContactChart {
public:
    ConformalChart(std::shared_ptr<const ContactChart> base, double eps, ScalarField f)
        : base_(std::move(base)), eps_(eps), f_(std::move(f)) {}

    ChartKind kind() const override { return ChartKind::Conformal; }
    int dim() const override { return base_->dim(); }
    const ContactChart& base() const { return *base_; }
    double eps() const { return eps_; }
    double factor(const Vec& x) const {
        double c = 1.0 + eps_ * f_.value(x);
        if (c <= 0) throw FactorNotPositive();
        return c;
    }

    Vec lambda(const Vec& x) const override { return factor(x) * base_->lambda(x); }

    Mat lambda_jacobian(const Vec& x) const override {
        const Vec lb = base_->lambda(x);
        const Vec gf = f_.gradient(x);
        return factor(x) * base_->lambda_jacobian(x) + eps_ * gf * lb.transpose();
    }

    bool has_constraint() const override { return base_->has_constraint(); }
    double constraint(const Vec& x) const override { return base_->constraint(x); }
    Vec constraint_gradient(const Vec& x) const override { return base_->constraint_gradient(x); }
    void project(Vec& x) const override { base_->project(x); }
    bool in_domain(const Vec& x) const override { return base_->in_domain(x); }
    Vec displacement(const Vec& from, const Vec& to) const override {
        return base_->displacement(from, to);
    }

private:
    std::shared_ptr<const ContactChart> base_;
    double eps_;
    ScalarField f_;
};

inline std::shared_ptr<ContactChart> perturb_conformal(std::shared_ptr<const ContactChart> base,
                                                       double eps, ScalarField f) {
    return std::make_shared<ConformalChart>(std::move(base), eps, std::move(f));
}

/**
 * Radial bump factor h for the perturbation (1 + eps h) lambda_0 of a
 * Besse flow: h equals c_plus away from the distinguished disk and is a
 * monotone radial profile chi on it, with chi(0) = -c_minus. The mean
 * of h over the ambient manifold is removed by shifting the profile, so
 * that vol(lambda_eps) = vol_0 + c eps^2 holds exactly.
 */
class BumpSpec {
public:
    BumpSpec(double eps, double c_minus, double c_plus, double rho, double ambient_volume)
        : eps_(eps), rho_(rho), ambient_volume_(ambient_volume) {
        if (c_minus <= 0 || c_plus <= 0 || rho <= 0)
            throw ChartError("bump requires positive c_minus, c_plus, rho");
        const double disk_vol = std::numbers::pi * rho * rho;
        if (ambient_volume <= disk_vol)
            throw ChartError("ambient volume must exceed the disk volume");
        // Mean of the unshifted h over the ambient manifold.
        const double chi_int =
            -c_minus * rho * rho / 2 + (c_minus + c_plus) * (7.0 / 20.0) * rho * rho;
        const double mean =
            (c_plus * (ambient_volume - disk_vol) + 2 * std::numbers::pi * chi_int) /
            ambient_volume;
        c_minus_ = c_minus + mean;
        c_plus_ = c_plus - mean;
        if (c_minus_ <= 0 || c_plus_ <= 0)
            throw ChartError("mean-zero shift made the bump one-sided");
        if (eps * c_minus_ >= 1) throw FactorNotPositive();
    }

    double eps() const { return eps_; }
    double c_minus() const { return c_minus_; }
    double c_plus() const { return c_plus_; }
    double rho() const { return rho_; }
    double ambient_volume() const { return ambient_volume_; }

    /// Smoothstep profile; chi(0) = -c_minus, chi(rho) = c_plus, chi' > 0 inside.
    double chi(double r) const {
        const double t = std::clamp(r / rho_, 0.0, 1.0);
        const double s = t * t * (3 - 2 * t);
        return -c_minus_ + (c_minus_ + c_plus_) * s;
    }

    double chi_prime(double r) const {
        if (r <= 0 || r >= rho_) return 0.0;
        const double t = r / rho_;
        return (c_minus_ + c_plus_) * 6 * t * (1 - t) / rho_;
    }

    /// |integral of h over the ambient manifold|; vanishes by construction.
    double mean_certificate() const {
        const double disk_vol = std::numbers::pi * rho_ * rho_;
        return std::abs(c_plus_ * (ambient_volume_ - disk_vol) +
                        2 * std::numbers::pi * chi_radial_moment(1));
    }

    /// c = integral of h^2 over the ambient manifold.
    double quadratic_volume_coefficient() const {
        const double disk_vol = std::numbers::pi * rho_ * rho_;
        return c_plus_ * c_plus_ * (ambient_volume_ - disk_vol) +
               2 * std::numbers::pi * chi_radial_moment(2);
    }

    ScalarField field() const {
        return {[*this](const Vec& x) { return chi(std::hypot(x[0], x[1])); },
                [*this](const Vec& x) {
                    const double r = std::hypot(x[0], x[1]);
                    Vec g = Vec::Zero(x.size());
                    if (r > 1e-14) {
                        const double d = chi_prime(r) / r;
                        g[0] = d * x[0];
                        g[1] = d * x[1];
                    }
                    return g;
                }};
    }

    /// The perturbed disk chart (1 + eps chi) (ds + r^2/2 dtheta). The
    /// chart may extend past the bump support (chi is constant there),
    /// so nearby regular fibers stay inside the chart.
    std::shared_ptr<ContactChart> chart(double domain_radius = 0.0) const {
        if (domain_radius <= 0) domain_radius = 1.25 * rho_;
        if (domain_radius < rho_) throw ChartError("chart domain smaller than bump support");
        return perturb_conformal(std::make_shared<DiskTorusChart>(domain_radius), eps_, field());
    }

private:
    /// integral of chi(r)^k r dr over [0, rho]; the integrand is a
    /// polynomial, so 8-node Gauss-Legendre is exact.
    double chi_radial_moment(int k) const {
        static constexpr double xs[8] = {-0.9602898564975363, -0.7966664774136267,
                                         -0.5255324099163290, -0.1834346424956498,
                                         0.1834346424956498,  0.5255324099163290,
                                         0.7966664774136267,  0.9602898564975363};
        static constexpr double ws[8] = {0.1012285362903763, 0.2223810344533745,
                                         0.3137066458778873, 0.3626837833783620,
                                         0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};
        double total = 0;
        for (int i = 0; i < 8; ++i) {
            const double r = rho_ * (xs[i] + 1) / 2;
            total += ws[i] * std::pow(chi(r), k) * r;
        }
        return total * rho_ / 2;
    }

    double eps_;
    double c_minus_;
    double c_plus_;
    double rho_;
    double ambient_volume_;
};

}  // namespace reebkit
