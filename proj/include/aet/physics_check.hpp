#pragma once

#include "aet/internal_data.hpp"
#include "aet/pde.hpp"

namespace aet {

/// Acoustic displacement: effective v(x) = amplitude * direction(x). The
/// direction field vanishes near the boundary so x -> x + v(x) stays inside
/// the domain.
struct Displacement {
    VectorField direction;
    double amplitude = 0.0;
};

/// Radial push v(x) = chi(|x-c|) (x-c)/|x-c| with a smooth compactly supported
/// cutoff chi (bump profile, support radius `radius`).
Displacement radial_bump(const Grid& g, double cx, double cy, double radius, double amplitude);

/// Transport of the permittivity by the displacement, q_v(x + v(x)) = q(x),
/// evaluated through the first-order inverse y -> y - v(y) with Catmull-Rom
/// interpolation (C1, node derivative = central difference, exact on linears).
/// Throws if any transported point leaves the unit square or if the displacement
/// does not vanish on the collar.
ScalarField perturbed_permittivity(const Permittivity& q, const Displacement& v);

struct CrossCorrelationResult {
    /// Boundary integral of (du/dn conj(u_v) - d(conj(u_v))/dn u), evaluated in
    /// Robin-substituted form (exact for the discrete solutions).
    std::complex<double> lhs;
    /// Same integral with one-sided second-order normal-derivative stencils;
    /// carries O(h) discretization error, kept as a convergence diagnostic.
    std::complex<double> lhs_stencil;
    /// omega^2 * integral of (q_v - q) u conj(u_v).
    std::complex<double> rhs_exact;
    /// First-order linearization -omega^2 * integral of |u|^2 grad(q).v.
    double rhs_approx = 0.0;
};

/// Solve the unperturbed and perturbed Helmholtz problems (same Robin data) and
/// evaluate both sides of the cross-correlation identity plus its linearization.
CrossCorrelationResult cross_correlation_check(const Permittivity& q, double omega,
                                               const ComplexField& phi, const Displacement& v);

} // namespace aet
