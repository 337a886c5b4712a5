#include <reebkit/calabi.hpp>
#include <reebkit/surface.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace reebkit;
using Catch::Approx;

namespace {
constexpr double pi = std::numbers::pi;

HamiltonianSystem constant_system(double b) {
    auto surface = std::make_shared<DiskSurface>(1.0);
    HamiltonianSystem sys;
    sys.surface = surface;
    sys.value = [b](double, const P2&) { return b; };
    sys.gradient = [](double, const P2&) { return P2{0, 0}; };
    return sys;
}
}  // namespace

TEST_CASE("surface geometry") {
    DiskSurface disk(1.0);
    CHECK(disk.area() == Approx(0.5));
    CHECK(disk.boundary_nu_integral(0) == Approx(0.5));
    double quad_area = 0;
    for (const auto& [z, w] : disk.quadrature(16)) quad_area += w;
    CHECK(quad_area == Approx(disk.area()).margin(1e-12));

    AnnulusSurface ann;
    CHECK(ann.area() == Approx(11.0 / 48).margin(1e-15));
    CHECK(ann.density(0.1) == Approx(0.1));
    CHECK(ann.density(0.9) == Approx(0.1));
    CHECK(ann.density(0.5) == Approx(0.375));
    quad_area = 0;
    for (const auto& [z, w] : ann.quadrature(16)) quad_area += w;
    CHECK(quad_area == Approx(ann.area()).margin(1e-12));
    // The primitive differentiates back to the density.
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.95}) {
        const double fd =
            (AnnulusSurface::density_primitive(x + 1e-6) - AnnulusSurface::density_primitive(x - 1e-6)) /
            2e-6;
        CHECK(fd == Approx(AnnulusSurface::density(x)).margin(1e-9));
    }
}

TEST_CASE("constant Hamiltonians generate the identity") {
    const HamiltonianSystem sys = constant_system(0.37);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    for (int i = 0; i < 10; ++i) {
        const P2 z{u(rng), u(rng)};
        CHECK((flow_point(sys, z, 1.0, 1e-12) - z).norm() < 1e-12);
    }
}

TEST_CASE("radial quadratic flow: circles invariant, center fixed") {
    const double eps = 0.05;
    const HamiltonianSystem sys = radial_quadratic_system(1.0, eps);
    CHECK((flow_point(sys, {0, 0}, 1.0, 1e-12)).norm() < 1e-12);
    const auto phi = flow_map(sys, 1.0, 1e-12);
    for (double r : {0.2, 0.5, 0.8}) {
        const P2 image = phi({r, 0.0});
        CHECK(image.norm() == Approx(r).margin(1e-10));
        // Rigid rotation by -2 pi eps per unit time.
        CHECK(std::atan2(image[1], image[0]) == Approx(-2 * pi * eps).margin(1e-9));
    }
}

TEST_CASE("time-reversed Hamiltonian inverts the flow") {
    std::mt19937 rng(5);
    const HamiltonianSystem sys = random_disk_system(1.0, 0.08, rng);
    HamiltonianSystem rev;
    rev.surface = sys.surface;
    rev.value = [&sys](double t, const P2& z) { return -sys.value(1 - t, z); };
    rev.gradient = [&sys](double t, const P2& z) { return P2(-sys.gradient(1 - t, z)); };
    const double tol = 1e-11;
    const P2 z{0.3, -0.2};
    const P2 back = flow_point(rev, flow_point(sys, z, 1.0, tol), 1.0, tol);
    CHECK((back - z).norm() < 10 * tol);
}

TEST_CASE("flows preserve the area form") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.55, 0.55);
    const HamiltonianSystem sys = random_disk_system(1.0, 0.06, rng);
    const double h = 1e-5;
    int tested = 0;
    while (tested < 100) {
        const P2 z{u(rng), u(rng)};
        if (z.norm() > 0.8) continue;
        Eigen::Matrix2d jac;
        for (int c = 0; c < 2; ++c) {
            P2 zp = z, zm = z;
            zp[c] += h;
            zm[c] -= h;
            jac.col(c) = (flow_point(sys, zp, 1.0, 1e-12) - flow_point(sys, zm, 1.0, 1e-12)) / (2 * h);
        }
        const P2 image = flow_point(sys, z, 1.0, 1e-12);
        const double ratio = jac.determinant() * sys.surface->omega_density(image) /
                             sys.surface->omega_density(z);
        REQUIRE(std::abs(ratio - 1.0) < 1e-6);
        ++tested;
    }
}

TEST_CASE("actions") {
    SECTION("identity system has zero action everywhere") {
        const HamiltonianSystem sys = constant_system(0.0);
        CHECK(action_of_point(sys, {0.3, 0.4}, 1e-12) == Approx(0.0).margin(1e-12));
    }
    SECTION("radial center action is the Hamiltonian value") {
        const double eps = 0.05;
        const HamiltonianSystem sys = radial_quadratic_system(1.0, eps);
        CHECK(action_of_point(sys, {0, 0}, 1e-12) == Approx(-eps / 2).margin(1e-11));
    }
    SECTION("boundary points pick up exactly the nu integral of the loop") {
        // With H vanishing on the boundary the orbit stays put, so only
        // a rigid-rotation system moves boundary points; use a constant
        // angular Hamiltonian H = eps (r^2 - 1)/2 whose boundary orbit
        // is the full boundary circle after time 1/eps; at time 1 it
        // sweeps a fraction eps of the loop.
        const double eps = 0.25;
        const HamiltonianSystem sys = radial_quadratic_system(1.0, eps);
        P2 disp;
        const double a = action_of_point(sys, {1.0, 0.0}, 1e-12, {}, &disp);
        // nu integral over the swept arc: eps * (full loop integral).
        CHECK(a == Approx(-eps * sys.surface->boundary_nu_integral(0)).margin(1e-10));
    }
    SECTION("action at a contractible fixed point ignores the choice of primitive") {
        std::mt19937 rng(11);
        const double eps = 0.05;
        const HamiltonianSystem sys = radial_quadratic_system(1.0, eps);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double a = u(rng), b = u(rng), c = u(rng);
        // nu + dg with g = a x^2 + b x y + c y^2.
        auto nu2 = [&](const P2& z) {
            const P2 base = sys.surface->nu(z);
            return P2{base[0] + 2 * a * z[0] + b * z[1], base[1] + b * z[0] + 2 * c * z[1]};
        };
        const double a0 = action_of_point(sys, {0, 0}, 1e-12);
        const double a1 = action_of_point(sys, {0, 0}, 1e-12, nu2);
        CHECK(a0 == Approx(a1).margin(1e-10));
    }
}

TEST_CASE("flux") {
    SECTION("globally constant Hamiltonian has zero flux") {
        auto surface = std::make_shared<AnnulusSurface>();
        HamiltonianSystem sys{surface, [](double, const P2&) { return 0.4; },
                              [](double, const P2&) { return P2{0, 0}; }};
        CHECK(flux_between(sys, 0, 1) == Approx(0.0).margin(1e-14));
    }
    SECTION("annulus with distinct boundary constants") {
        auto surface = std::make_shared<AnnulusSurface>();
        const double beta = 0.7;
        // H = beta nu'(x)-independent interpolation: H(x) = beta x,
        // constant on each boundary circle.
        HamiltonianSystem sys{surface, [beta](double, const P2& z) { return beta * z[0]; },
                              [beta](double, const P2&) { return P2{beta, 0}; }};
        CHECK(flux_between(sys, 0, 1) == Approx(beta).margin(1e-13));
        CHECK(flux_between(sys, 1, 0) == Approx(-beta).margin(1e-13));
    }
    SECTION("normalized systems have zero flux between all pairs") {
        const HamiltonianSystem sys = radial_quadratic_system(1.0, 0.1);
        CHECK(flux_between(sys, 0, 0) == Approx(0.0).margin(1e-14));
    }
    SECTION("non-constant boundary values are rejected") {
        auto surface = std::make_shared<DiskSurface>(1.0);
        HamiltonianSystem sys{surface, [](double, const P2& z) { return z[0]; },
                              [](double, const P2&) { return P2{1, 0}; }};
        CHECK_THROWS_AS(flux_between(sys, 0, 0), NonConstantOnBoundary);
    }
}

TEST_CASE("calabi on closed forms") {
    SECTION("identity") {
        const CalabiValues cal = calabi(constant_system(0.0), 1e-10);
        CHECK(cal.via_action == Approx(0.0).margin(1e-12));
        CHECK(cal.via_hamiltonian == Approx(0.0).margin(1e-12));
    }
    SECTION("radial quadratic oracle") {
        const double eps = 0.05;
        const CalabiValues cal = calabi(radial_quadratic_system(1.0, eps), 1e-9);
        CHECK(cal.via_action == Approx(-eps / 4).margin(1e-9));
        CHECK(cal.via_hamiltonian == Approx(-eps / 4).margin(1e-9));
    }
    SECTION("the two formulas agree on random systems") {
        std::mt19937 rng(13);
        for (int i = 0; i < 6; ++i) {
            const HamiltonianSystem sys = random_disk_system(1.0, 0.05, rng);
            const CalabiValues cal = calabi(sys, 1e-9);
            CHECK(cal.via_action == Approx(cal.via_hamiltonian).margin(2e-9));
        }
    }
    SECTION("composition is additive") {
        std::mt19937 rng(17);
        const HamiltonianSystem outer = random_disk_system(1.0, 0.05, rng);
        const HamiltonianSystem inner = random_disk_system(1.0, 0.05, rng);
        const double composed = calabi_of_composition(outer, inner, 1e-8);
        const double sum = calabi(outer, 1e-9).via_action + calabi(inner, 1e-9).via_action;
        CHECK(composed == Approx(sum).margin(4e-8));
    }
}

TEST_CASE("minimum-action fixed point") {
    SECTION("radial quadratic") {
        const double eps = 0.05;
        const FixedPointRecord fp = min_action_fixed_point(radial_quadratic_system(1.0, eps), 1e-9);
        CHECK(fp.point.norm() < 1e-10);
        CHECK(fp.action == Approx(-eps / 2).margin(1e-10));
        CHECK(fp.contractible);
    }
    SECTION("non-negative Hamiltonian minimized on the boundary") {
        CHECK_THROWS_AS(min_action_fixed_point(radial_quadratic_system(1.0, -0.05), 1e-9),
                        MinimizerOnBoundary);
    }
    SECTION("a rotating minimizer is not quasi-autonomous") {
        auto surface = std::make_shared<DiskSurface>(1.0);
        HamiltonianSystem sys;
        sys.surface = surface;
        sys.value = [](double t, const P2& z) {
            const double cx = 0.4 * std::cos(2 * pi * t), cy = 0.4 * std::sin(2 * pi * t);
            return 0.05 * (1 - z.squaredNorm()) * ((z[0] - cx) * (z[0] - cx) + (z[1] - cy) * (z[1] - cy) - 1);
        };
        sys.gradient = [](double t, const P2& z) {
            const double cx = 0.4 * std::cos(2 * pi * t), cy = 0.4 * std::sin(2 * pi * t);
            const double q = (z[0] - cx) * (z[0] - cx) + (z[1] - cy) * (z[1] - cy) - 1;
            P2 g = -2.0 * q * z;
            g[0] += (1 - z.squaredNorm()) * 2 * (z[0] - cx);
            g[1] += (1 - z.squaredNorm()) * 2 * (z[1] - cy);
            return P2(0.05 * g);
        };
        CHECK_THROWS_AS(min_action_fixed_point(sys, 1e-9), NotQuasiAutonomous);
    }
}

TEST_CASE("fixed-point inequality") {
    SECTION("closed-form family") {
        for (double eps : {0.05, 0.2}) {
            const InequalityReport rep =
                verify_fixed_point_inequality(radial_quadratic_system(1.0, eps), 0.5, 1e-9);
            CHECK(rep.lhs == Approx(-eps / 2 + eps * eps / 8).margin(1e-9));
            CHECK(rep.rhs == Approx(-eps / 4).margin(1e-9));
            CHECK(rep.pass);
            CHECK(rep.margin < 0);
        }
    }
    SECTION("positive Calabi is rejected") {
        // H >= 0 has positive Calabi invariant; the inequality is not
        // asserted there.
        auto sys = radial_quadratic_system(1.0, -0.05);
        CHECK_THROWS_AS(verify_fixed_point_inequality(sys, 0.5, 1e-9), PositiveCalabi);
    }
    SECTION("large Hamiltonians are outside the smallness gate") {
        auto sys = radial_quadratic_system(1.0, 1.5);
        CHECK_THROWS_AS(verify_fixed_point_inequality(sys, 0.5, 1e-9), NotSmallEnough);
    }
}
