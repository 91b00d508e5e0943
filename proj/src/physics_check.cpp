#include "aet/physics_check.hpp"

#include <cmath>

namespace aet {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// Catmull-Rom weights at offset t in [0,1]; reproduces linears exactly and its
// derivative at t = 0 is the central difference.
void catmull_rom_weights(double t, double w[4]) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    w[0] = -0.5 * t + t2 - 0.5 * t3;
    w[1] = 1.0 - 2.5 * t2 + 1.5 * t3;
    w[2] = 0.5 * t + 2.0 * t2 - 1.5 * t3;
    w[3] = -0.5 * t2 + 0.5 * t3;
}

int clamp_index(int k, int n) { return std::min(std::max(k, 0), n - 1); }

double interpolate(const ScalarField& f, double px, double py) {
    const Grid& g = f.grid();
    const double gx = px / g.h;
    const double gy = py / g.h;
    int ix = static_cast<int>(std::floor(gx));
    int iy = static_cast<int>(std::floor(gy));
    ix = std::min(std::max(ix, 0), g.n - 2);
    iy = std::min(std::max(iy, 0), g.n - 2);
    const double tx = gx - ix;
    const double ty = gy - iy;

    double wx[4], wy[4];
    catmull_rom_weights(tx, wx);
    catmull_rom_weights(ty, wy);

    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int j = clamp_index(iy - 1 + b, g.n);
        double row = 0.0;
        for (int a = 0; a < 4; ++a) {
            const int i = clamp_index(ix - 1 + a, g.n);
            row += wx[a] * f(i, j);
        }
        acc += wy[b] * row;
    }
    return acc;
}

} // namespace

Displacement radial_bump(const Grid& g, double cx, double cy, double radius,
                         double amplitude) {
    if (radius <= 0.0) throw FieldError("radial_bump: radius must be positive");
    Eigen::VectorXd vx = Eigen::VectorXd::Zero(g.num_nodes());
    Eigen::VectorXd vy = Eigen::VectorXd::Zero(g.num_nodes());
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double dx = g.x(i) - cx;
            const double dy = g.y(j) - cy;
            const double r = std::hypot(dx, dy);
            if (r >= radius || r == 0.0) continue;
            const double s = r / radius;
            const double chi = std::exp(1.0 - 1.0 / (1.0 - s * s));
            const int k = g.index(i, j);
            vx[k] = chi * dx / r;
            vy[k] = chi * dy / r;
        }
    }
    return Displacement{VectorField(g, std::move(vx), std::move(vy)), amplitude};
}

ScalarField perturbed_permittivity(const Permittivity& q, const Displacement& v) {
    const Grid& g = q.grid();
    if (!(v.direction.grid() == g)) throw GridError("perturbed_permittivity: grid mismatch");

    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (q.in_collar(i, j) &&
                (v.direction.x(i, j) != 0.0 || v.direction.y(i, j) != 0.0)) {
                throw FieldError("perturbed_permittivity: displacement reaches the collar");
            }
        }
    }

    Eigen::VectorXd out(g.num_nodes());
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double px = g.x(i) - v.amplitude * v.direction.x(i, j);
            const double py = g.y(j) - v.amplitude * v.direction.y(i, j);
            if (px < 0.0 || px > 1.0 || py < 0.0 || py > 1.0) {
                throw FieldError("perturbed_permittivity: displacement exits the domain");
            }
            out[g.index(i, j)] = interpolate(q.field(), px, py);
        }
    }
    return ScalarField(g, std::move(out));
}

CrossCorrelationResult cross_correlation_check(const Permittivity& q, double omega,
                                               const ComplexField& phi,
                                               const Displacement& v) {
    if (!(omega > 0.0)) throw FieldError("cross_correlation_check: omega must be positive");
    const Grid& g = q.grid();
    const ScalarField q_v = perturbed_permittivity(q, v);

    const ComplexField zero_src = ComplexField::zero(g);
    const ComplexField u = solve_helmholtz(q.field(), omega, phi, zero_src);
    const ComplexField u_v = solve_helmholtz(q_v, omega, phi, zero_src);

    CrossCorrelationResult result;

    // Robin substitution du/dn = i*omega*(u - phi) holds exactly for both
    // discrete solutions, so this evaluation satisfies the discrete identity
    // lhs == rhs_exact up to solver residuals.
    std::complex<double> lhs = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (!g.is_boundary(i, j)) continue;
            const std::complex<double> uu = u(i, j);
            const std::complex<double> uvc = std::conj(u_v(i, j));
            const std::complex<double> ph = phi(i, j);
            lhs += g.boundary_weight(i, j) *
                   (2.0 * uu * uvc - ph * uvc - std::conj(ph) * uu);
        }
    }
    result.lhs = kI * omega * lhs;

    // One-sided second-order normal derivatives, face by face.
    auto face_term = [&](int i, int j, std::complex<double> dnu,
                         std::complex<double> dnuv, double w) {
        result.lhs_stencil += w * (dnu * std::conj(u_v(i, j)) - std::conj(dnuv) * u(i, j));
    };
    const double s = 1.0 / (2.0 * g.h);
    for (int k = 0; k < g.n; ++k) {
        const double w = g.h * g.edge_factor(k);
        // left: nu = -x
        face_term(0, k, -s * (-3.0 * u(0, k) + 4.0 * u(1, k) - u(2, k)),
                  -s * (-3.0 * u_v(0, k) + 4.0 * u_v(1, k) - u_v(2, k)), w);
        // right: nu = +x
        face_term(g.n - 1, k,
                  s * (3.0 * u(g.n - 1, k) - 4.0 * u(g.n - 2, k) + u(g.n - 3, k)),
                  s * (3.0 * u_v(g.n - 1, k) - 4.0 * u_v(g.n - 2, k) + u_v(g.n - 3, k)), w);
        // bottom: nu = -y
        face_term(k, 0, -s * (-3.0 * u(k, 0) + 4.0 * u(k, 1) - u(k, 2)),
                  -s * (-3.0 * u_v(k, 0) + 4.0 * u_v(k, 1) - u_v(k, 2)), w);
        // top: nu = +y
        face_term(k, g.n - 1,
                  s * (3.0 * u(k, g.n - 1) - 4.0 * u(k, g.n - 2) + u(k, g.n - 3)),
                  s * (3.0 * u_v(k, g.n - 1) - 4.0 * u_v(k, g.n - 2) + u_v(k, g.n - 3)), w);
    }

    std::complex<double> volume = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            volume += g.quad_weight(i, j) * (q_v(i, j) - q.field()(i, j)) * u(i, j) *
                      std::conj(u_v(i, j));
        }
    }
    result.rhs_exact = omega * omega * volume;

    // Linearization of the transport: q_v - q = -grad(q).v + O(|v|^2).
    const VectorField grad_q = gradient(q.field());
    double approx = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double dot = grad_q.x(i, j) * v.direction.x(i, j) +
                               grad_q.y(i, j) * v.direction.y(i, j);
            approx += g.quad_weight(i, j) * std::norm(u(i, j)) * dot;
        }
    }
    result.rhs_approx = -omega * omega * v.amplitude * approx;

    return result;
}

} // namespace aet
