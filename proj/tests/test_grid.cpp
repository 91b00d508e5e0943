#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aet/grid.hpp"

using namespace aet;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Deterministic values in [-1, 1] for property checks.
Eigen::VectorXd pseudo_random(int count, unsigned long long seed) {
    Eigen::VectorXd v(count);
    std::uint64_t s = seed;
    for (int k = 0; k < count; ++k) {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        v[k] = 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
    }
    return v;
}

double max_gradient_error(int n) {
    const Grid g = make_grid(n);
    const ScalarField f = ScalarField::sample(g, [](double x, double y) {
        return std::sin(kPi * x) * std::cos(kPi * y);
    });
    const VectorField grad = gradient(f);
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double ex = kPi * std::cos(kPi * g.x(i)) * std::cos(kPi * g.y(j));
            const double ey = -kPi * std::sin(kPi * g.x(i)) * std::sin(kPi * g.y(j));
            err = std::max(err, std::abs(grad.x(i, j) - ex));
            err = std::max(err, std::abs(grad.y(i, j) - ey));
        }
    }
    return err;
}

// Interior bump, numerically zero at the boundary.
double bump(double x, double y) {
    return std::exp(-50.0 * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)));
}

double max_divergence_error(int n) {
    const Grid g = make_grid(n);
    Eigen::VectorXd vx(g.num_nodes()), vy(g.num_nodes());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = g.x(i), y = g.y(j);
            vx[g.index(i, j)] = -100.0 * (x - 0.5) * bump(x, y);
            vy[g.index(i, j)] = -100.0 * (y - 0.5) * bump(x, y);
        }
    }
    const ScalarField div = divergence(VectorField(g, std::move(vx), std::move(vy)));
    double err = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = g.x(i), y = g.y(j);
            const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
            const double exact = (-200.0 + 10000.0 * r2) * bump(x, y);
            err = std::max(err, std::abs(div(i, j) - exact));
        }
    }
    return err;
}

} // namespace

TEST_CASE("make_grid spacing and validation") {
    CHECK(make_grid(101).h == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(make_grid(3).h == 0.5);
    CHECK(make_grid(101).num_nodes() == 101 * 101);
    CHECK_THROWS_AS(make_grid(2), GridError);
}

TEST_CASE("gradient of constants and affine fields") {
    const Grid g = make_grid(21);
    const VectorField zero = gradient(ScalarField::constant(g, 3.25));
    CHECK(zero.vx().cwiseAbs().maxCoeff() == 0.0);
    CHECK(zero.vy().cwiseAbs().maxCoeff() == 0.0);

    const ScalarField fx = ScalarField::sample(g, [](double x, double) { return x; });
    const VectorField grad = gradient(fx);
    CHECK((grad.vx().array() - 1.0).abs().maxCoeff() < 1e-13);
    CHECK(grad.vy().cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("gradient converges at second order") {
    const double e1 = max_gradient_error(51);
    const double e2 = max_gradient_error(101);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.4);
    CHECK(ratio < 4.7);
}

TEST_CASE("divergence of a constant field vanishes away from the boundary") {
    const Grid g = make_grid(17);
    const VectorField v(g, Eigen::VectorXd::Constant(g.num_nodes(), 1.5),
                        Eigen::VectorXd::Constant(g.num_nodes(), -0.75));
    const ScalarField div = divergence(v);
    // The adjoint construction carries the zero-normal-trace convention, so the
    // stencil is pure central differencing only at depth >= 2.
    for (int j = 2; j < g.n - 2; ++j) {
        for (int i = 2; i < g.n - 2; ++i) {
            CHECK(std::abs(div(i, j)) < 1e-12);
        }
    }
}

TEST_CASE("divergence of grad(x^2+y^2) is 4 away from the boundary") {
    const Grid g = make_grid(33);
    const ScalarField f =
        ScalarField::sample(g, [](double x, double y) { return x * x + y * y; });
    const ScalarField div = divergence(gradient(f));
    for (int j = 2; j < g.n - 2; ++j) {
        for (int i = 2; i < g.n - 2; ++i) {
            CHECK(div(i, j) == doctest::Approx(4.0).epsilon(1e-11));
        }
    }
}

TEST_CASE("integration by parts is exact for zero-normal-trace fields") {
    const Grid g = make_grid(23);
    const int nodes = g.num_nodes();
    for (unsigned long long seed : {11ull, 12ull, 13ull}) {
        const ScalarField f(g, pseudo_random(nodes, seed));
        Eigen::VectorXd vx = pseudo_random(nodes, seed + 100);
        Eigen::VectorXd vy = pseudo_random(nodes, seed + 200);
        for (int k = 0; k < g.n; ++k) {
            vx[g.index(0, k)] = 0.0;
            vx[g.index(g.n - 1, k)] = 0.0;
            vy[g.index(k, 0)] = 0.0;
            vy[g.index(k, g.n - 1)] = 0.0;
        }
        const VectorField v(g, std::move(vx), std::move(vy));
        const VectorField gf = gradient(f);
        const ScalarField dv = divergence(v);
        const double lhs = inner_l2(ScalarField(g, gf.vx()), ScalarField(g, v.vx())) +
                           inner_l2(ScalarField(g, gf.vy()), ScalarField(g, v.vy()));
        const double rhs = inner_l2(f, dv);
        CHECK(std::abs(lhs + rhs) < 1e-12 * std::max(std::abs(lhs), 1.0));
    }
}

TEST_CASE("divergence converges at second order on smooth interior fields") {
    const double e1 = max_divergence_error(51);
    const double e2 = max_divergence_error(101);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
}

TEST_CASE("inner product weights sum to the unit area") {
    const Grid g5 = make_grid(5); // h = 0.25 is exact in binary
    CHECK(inner_l2(ScalarField::constant(g5, 1.0), ScalarField::constant(g5, 1.0)) == 1.0);

    const Grid g = make_grid(101);
    const ScalarField one = ScalarField::constant(g, 1.0);
    CHECK(inner_l2(one, one) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(inner_l2(one, ScalarField::constant(g, 0.0)) == 0.0);
}

TEST_CASE("inner product of sin(pi x) against itself") {
    const Grid g = make_grid(51);
    const ScalarField f =
        ScalarField::sample(g, [](double x, double) { return std::sin(kPi * x); });
    CHECK(inner_l2(f, f) == doctest::Approx(0.5).epsilon(4e-3));
}

TEST_CASE("inner product rejects grid mismatch") {
    const ScalarField a = ScalarField::constant(make_grid(11), 1.0);
    const ScalarField b = ScalarField::constant(make_grid(13), 1.0);
    CHECK_THROWS_AS(inner_l2(a, b), GridError);
}

TEST_CASE("complex inner product is conjugate-linear in the second slot") {
    const Grid g = make_grid(9);
    const ComplexField f = ComplexField::constant(g, {0.0, 1.0});
    const ComplexField one = ComplexField::constant(g, {1.0, 0.0});
    const std::complex<double> val = inner_l2(one, f);
    CHECK(val.real() == doctest::Approx(0.0));
    CHECK(val.imag() == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("H1 norm examples") {
    const Grid g = make_grid(101);
    CHECK(norm_h1(ScalarField::constant(g, 0.0)) == 0.0);
    CHECK(norm_h1(ScalarField::constant(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    const ScalarField fx = ScalarField::sample(g, [](double x, double) { return x; });
    CHECK(norm_h1(fx) == doctest::Approx(std::sqrt(1.0 / 3.0 + 1.0)).epsilon(1e-4));
}

TEST_CASE("inner_l2(f,f) is positive definite") {
    const Grid g = make_grid(15);
    const ScalarField f(g, pseudo_random(g.num_nodes(), 99));
    CHECK(inner_l2(f, f) > 0.0);
    CHECK(inner_l2(ScalarField::constant(g, 0.0), ScalarField::constant(g, 0.0)) == 0.0);
}

TEST_CASE("field constructors validate") {
    const Grid g = make_grid(5);
    Eigen::VectorXd bad = Eigen::VectorXd::Zero(g.num_nodes());
    bad[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ScalarField(g, bad), FieldError);
    CHECK_THROWS_AS(ScalarField(g, Eigen::VectorXd::Zero(7)), FieldError);
}

TEST_CASE("subtract_mean yields a zero-integral field") {
    const Grid g = make_grid(19);
    const ScalarField f(g, pseudo_random(g.num_nodes(), 4242));
    const ScalarField centered = subtract_mean(f);
    CHECK(std::abs(integral(centered)) < 1e-15);
}
