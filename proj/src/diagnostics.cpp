#include "aet/diagnostics.hpp"

#include <cmath>

namespace aet {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

std::complex<double> mms_exact(double omega, double x, double y) {
    return std::exp(kI * omega * x) * (1.0 + y * y) * 0.5;
}

} // namespace

double helmholtz_mms_error(int n, double omega) {
    const Grid g = make_grid(n);
    const ScalarField q = ScalarField::constant(g, 1.0);
    const ComplexField source = ComplexField::sample(
        g, [&](double x, double) { return std::exp(kI * omega * x); });

    RobinData robin = RobinData::zero(g);
    for (int k = 0; k < g.n; ++k) {
        const double t = g.h * k;
        // g = du*/dnu - i omega u* on each face
        robin.left[k] = -2.0 * kI * omega * mms_exact(omega, 0.0, t);
        robin.right[k] = 0.0;
        robin.bottom[k] = -kI * omega * mms_exact(omega, t, 0.0);
        robin.top[k] = std::exp(kI * omega * t) * (1.0 - kI * omega);
    }

    HelmholtzSystem sys(q, omega);
    const ComplexField u = sys.solve(source, robin, 0.0);
    double err = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            err = std::max(err, std::abs(u(i, j) - mms_exact(omega, g.x(i), g.y(j))));
        }
    }
    return err;
}

double poisson_mms_error(int n) {
    const Grid g = make_grid(n);
    const double pi = std::acos(-1.0);
    const ScalarField rhs = ScalarField::sample(g, [&](double x, double y) {
        return -5.0 * pi * pi * std::cos(pi * x) * std::cos(2.0 * pi * y);
    });
    const ScalarField psi = solve_neumann_poisson(rhs);
    double err = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double exact = std::cos(pi * g.x(i)) * std::cos(2.0 * pi * g.y(j));
            err = std::max(err, std::abs(psi(i, j) - exact));
        }
    }
    return err;
}

double omega0_constant_deviation(const Permittivity& q) {
    const ComplexField phi = ComplexField::constant(q.grid(), 1.0);
    const ComplexField u =
        solve_helmholtz(q.field(), 0.0, phi, ComplexField::zero(q.grid()));
    return (u.values().array() - 1.0).abs().maxCoeff();
}

double omega0_datum_deviation(const Permittivity& q) {
    const ComplexField phi = ComplexField::constant(q.grid(), 1.0);
    const ScalarField psi = synthesize_psi(q, 0.0, phi);
    const Eigen::VectorXd w = quad_weights(q.grid());
    const double mean = w.dot(q.field().values()) / w.sum();
    const ScalarField target(q.grid(), q.field().values().array() - mean);
    const ScalarField diff(q.grid(), psi.values() - target.values());
    return norm_l2(diff) / norm_l2(target);
}

double domega_central_difference_error(const ScalarField& q, double omega, double eps) {
    const Grid& g = q.grid();
    const ComplexField phi = ComplexField::constant(g, 1.0);
    const ComplexField zero = ComplexField::zero(g);
    const ComplexField u = solve_helmholtz(q, omega, phi, zero);
    const ComplexField w = solve_domega(q, omega, phi, u);
    const ComplexField up = solve_helmholtz(q, omega + eps, phi, zero);
    const ComplexField um = solve_helmholtz(q, omega - eps, phi, zero);
    const ComplexField diff(
        g, (up.values() - um.values()) / (2.0 * eps) - w.values());
    return norm_l2(diff);
}

double taylor_remainder_ratio(const Permittivity& q, double omega, const ScalarField& rho,
                              double eps) {
    const ComplexField phi = ComplexField::constant(q.grid(), 1.0);
    const ScalarField rho_in = mask_interior(rho, q.margin());
    DerivativeWorkspace ws(q, omega, phi);
    const ScalarField xi = ws.apply_df(rho_in);
    const ScalarField psi0 = ws.psi();

    const Permittivity q_pert(
        ScalarField(q.grid(), q.field().values() + eps * rho_in.values()),
        q.lambda_bound(), q.margin());
    DerivativeWorkspace ws_pert(q_pert, omega, phi);
    const ScalarField psi1 = ws_pert.psi();

    const ScalarField remainder(
        q.grid(), psi1.values() - psi0.values() - eps * xi.values());
    return norm_l2(remainder) / (eps * norm_l2(xi));
}

double observed_order(double coarse_err, double fine_err, double ratio) {
    return std::log(coarse_err / fine_err) / std::log(ratio);
}

} // namespace aet
