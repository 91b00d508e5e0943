#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aet/diagnostics.hpp"
#include "aet/pde.hpp"

using namespace aet;

namespace {

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

// Smooth admissible permittivity, exactly 1 near the boundary.
ScalarField smooth_q(const Grid& g) {
    return ScalarField::sample(g, [&](double x, double y) {
        const double r2 = (x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5);
        const double b = std::exp(-40.0 * r2);
        const double cut = std::min(std::min(x, y), std::min(1.0 - x, 1.0 - y));
        return cut < 4.0 * g.h ? 1.0 : 1.0 + 0.5 * b;
    });
}

} // namespace

TEST_CASE("assembly: omega = 0 system is bordered and reproduces u = 1") {
    const Grid g = make_grid(21);
    const ScalarField q = smooth_q(g);
    const SparseSystem sys = assemble_helmholtz(g, q, 0.0);
    CHECK(sys.constraint_rows == 1);
    CHECK(sys.dimension() == g.num_nodes() + 1);

    const ComplexField phi = ComplexField::constant(g, 1.0);
    LinearSolveReport rep;
    const ComplexField u = solve_helmholtz(q, 0.0, phi, ComplexField::zero(g), &rep);
    CHECK((u.values().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(rep.relative_residual <= 1e-10);
}

TEST_CASE("assembly: interior stencil row at omega > 0") {
    const Grid g = make_grid(11);
    const double omega = 2.5;
    const SparseSystem sys = assemble_helmholtz(g, ScalarField::constant(g, 1.0), omega);
    CHECK(sys.constraint_rows == 0);
    const double inv_h2 = 1.0 / (g.h * g.h);
    const int k = g.index(5, 5);
    CHECK(sys.matrix.coeff(k, k).real() ==
          doctest::Approx(4.0 * inv_h2 - omega * omega).epsilon(1e-14));
    CHECK(sys.matrix.coeff(k, k).imag() == 0.0);
    CHECK(sys.matrix.coeff(k, g.index(4, 5)).real() == doctest::Approx(-inv_h2));
    CHECK(sys.matrix.coeff(k, g.index(5, 6)).real() == doctest::Approx(-inv_h2));
}

TEST_CASE("assembly: matrix is complex-symmetric") {
    const Grid g = make_grid(5);
    const SparseSystem sys = assemble_helmholtz(g, ScalarField::constant(g, 1.3), 4.0);
    Eigen::SparseMatrix<std::complex<double>> diff =
        sys.matrix - Eigen::SparseMatrix<std::complex<double>>(sys.matrix.transpose());
    CHECK(diff.norm() == 0.0);
}

TEST_CASE("assembly rejects non-positive q") {
    const Grid g = make_grid(5);
    Eigen::VectorXd v = Eigen::VectorXd::Constant(g.num_nodes(), 1.0);
    v[7] = 0.0;
    CHECK_THROWS_AS(assemble_helmholtz(g, ScalarField(g, v), 1.0), AssemblyError);
}

TEST_CASE("omega = 0 solve returns 1 for every admissible q") {
    const Grid g = make_grid(31);
    const ComplexField phi = ComplexField::constant(g, 1.0);
    for (unsigned long long seed : {1ull, 2ull}) {
        Eigen::VectorXd v =
            (pseudo_random(g.num_nodes(), seed).array() * 0.75 + 1.25).matrix();
        const ComplexField u =
            solve_helmholtz(ScalarField(g, v), 0.0, phi, ComplexField::zero(g));
        CHECK((u.values().array() - 1.0).abs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("manufactured Helmholtz solution converges at second order") {
    const double e1 = helmholtz_mms_error(26, 3.0);
    const double e2 = helmholtz_mms_error(51, 3.0);
    const double e3 = helmholtz_mms_error(101, 3.0);
    CHECK(observed_order(e1, e2) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(observed_order(e2, e3) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("solution is continuous in omega near zero") {
    const Grid g = make_grid(31);
    const ScalarField q = smooth_q(g);
    const ComplexField phi = ComplexField::constant(g, 1.0);
    const ComplexField zero = ComplexField::zero(g);
    const ComplexField u0 = solve_helmholtz(q, 0.0, phi, zero);
    double prev = -1.0;
    for (double omega : {1e-1, 1e-2, 1e-3}) {
        const ComplexField u = solve_helmholtz(q, omega, phi, zero);
        const double err = (u.values() - u0.values()).norm();
        if (prev > 0.0) {
            const double drop = prev / err;
            CHECK(drop > 5.0);
            CHECK(drop < 20.0);
        }
        prev = err;
    }
}

TEST_CASE("solve_domega at omega = 0 forced to i/4 by the constraint") {
    const Grid g = make_grid(21);
    const ScalarField q = ScalarField::constant(g, 1.0);
    const ComplexField phi = ComplexField::constant(g, 1.0);
    const ComplexField u0 = solve_helmholtz(q, 0.0, phi, ComplexField::zero(g));
    const ComplexField w = solve_domega(q, 0.0, phi, u0);
    CHECK((w.values().array() - std::complex<double>{0.0, 0.25}).abs().maxCoeff() < 1e-10);
}

TEST_CASE("solve_domega matches the omega central difference at second order") {
    const Grid g = make_grid(41);
    const ScalarField q = smooth_q(g);
    const double e1 = domega_central_difference_error(q, 3.0, 1e-2);
    const double e2 = domega_central_difference_error(q, 3.0, 5e-3);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.0);
}

TEST_CASE("solve_domega stays bounded across frequencies") {
    const Grid g = make_grid(31);
    const ScalarField q = ScalarField::constant(g, 1.0);
    const ComplexField phi = ComplexField::constant(g, 1.0);
    for (double omega : {1.0, 5.0, 15.0}) {
        const ComplexField u = solve_helmholtz(q, omega, phi, ComplexField::zero(g));
        const ComplexField w = solve_domega(q, omega, phi, u);
        // Empirical cap for this configuration; the holomorphy bound is O(1).
        CHECK(w.values().cwiseAbs().maxCoeff() < 10.0);
    }
}

TEST_CASE("Poisson solve of zero is zero") {
    const Grid g = make_grid(21);
    const ScalarField psi = solve_neumann_poisson(ScalarField::constant(g, 0.0));
    CHECK(psi.values().cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Poisson solve inverts the conservative divergence exactly") {
    const Grid g = make_grid(33);
    const ScalarField f = ScalarField::sample(g, [&](double x, double y) {
        const double cut = std::min(std::min(x, y), std::min(1.0 - x, 1.0 - y));
        if (cut < 3.0 * g.h) return 0.0;
        return std::exp(-30.0 * ((x - 0.45) * (x - 0.45) + (y - 0.55) * (y - 0.55)));
    });
    const ScalarField rhs = flux_divergence(ScalarField::constant(g, 1.0), f);
    const ScalarField psi = solve_neumann_poisson(rhs);
    const ScalarField target = subtract_mean(f);
    const ScalarField diff(g, psi.values() - target.values());
    CHECK(norm_l2(diff) / norm_l2(target) < 1e-11);
}

TEST_CASE("manufactured Poisson solution converges at second order") {
    const double e1 = poisson_mms_error(26);
    const double e2 = poisson_mms_error(51);
    const double e3 = poisson_mms_error(101);
    CHECK(observed_order(e1, e2) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(observed_order(e2, e3) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("diffusion stiffness application is symmetric") {
    const Grid g = make_grid(17);
    const ScalarField s(g, (pseudo_random(g.num_nodes(), 5).array() * 0.4 + 1.0).matrix());
    const Eigen::VectorXd p = pseudo_random(g.num_nodes(), 6);
    const Eigen::VectorXd z = pseudo_random(g.num_nodes(), 7);
    const double a = z.dot(diffusion_apply_weighted(s, p));
    const double b = p.dot(diffusion_apply_weighted(s, z));
    CHECK(a == doctest::Approx(b).epsilon(1e-13));
}

TEST_CASE("diffusion coefficient slot and its adjoint agree") {
    const Grid g = make_grid(17);
    const ScalarField qf(g, (pseudo_random(g.num_nodes(), 8).array() + 2.0).matrix());
    const ScalarField c(g, pseudo_random(g.num_nodes(), 9));
    const Eigen::VectorXd z = pseudo_random(g.num_nodes(), 10);
    const double forward = z.dot(diffusion_apply_weighted(c, qf.values()));
    const double adjoint = c.values().dot(diffusion_coefficient_adjoint(qf, z));
    CHECK(forward == doctest::Approx(adjoint).epsilon(1e-13));
}

TEST_CASE("iterative backend matches the direct solver") {
    const Grid g = make_grid(21);
    const ScalarField q = ScalarField::constant(g, 1.0);
    const ComplexField phi = ComplexField::constant(g, 1.0);
    const RobinData robin = RobinData::from_phi(g, 2.0, phi);
    const ComplexField zero = ComplexField::zero(g);

    HelmholtzSystem direct(q, 2.0, 1e-10, SolverKind::direct);
    HelmholtzSystem krylov(q, 2.0, 1e-8, SolverKind::iterative);
    LinearSolveReport rep_direct, rep_krylov;
    const ComplexField ud = direct.solve(zero, robin, 0.0, &rep_direct);
    const ComplexField uk = krylov.solve(zero, robin, 0.0, &rep_krylov);
    CHECK(rep_direct.solver_kind == SolverKind::direct);
    CHECK(rep_krylov.solver_kind == SolverKind::iterative);
    CHECK(rep_krylov.iterations > 0);
    CHECK((ud.values() - uk.values()).cwiseAbs().maxCoeff() < 1e-6);
}
