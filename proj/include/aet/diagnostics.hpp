#pragma once

#include "aet/inversion.hpp"
#include "aet/physics_check.hpp"

namespace aet {

/// Max-norm error of the manufactured Robin Helmholtz solution
/// u*(x,y) = exp(i omega x)(1+y^2)/2 with q = 1 on an n-grid.
double helmholtz_mms_error(int n, double omega);

/// Max-norm error of the manufactured Neumann Poisson solution
/// psi*(x,y) = cos(pi x) cos(2 pi y) on an n-grid.
double poisson_mms_error(int n);

/// max |u_0 - 1| for the constrained omega = 0 solve with phi = 1.
double omega0_constant_deviation(const Permittivity& q);

/// Relative L2 deviation of psi_0 from q - mean(q), phi = 1.
double omega0_datum_deviation(const Permittivity& q);

/// L2 mismatch between solve_domega and the central omega-difference of
/// solve_helmholtz at step eps (phi = 1).
double domega_central_difference_error(const ScalarField& q, double omega, double eps);

/// Taylor remainder ||psi(q + eps rho) - psi(q) - eps xi(rho)|| / ||eps xi(rho)||
/// at phi = 1; first order in eps when the derivative is consistent.
double taylor_remainder_ratio(const Permittivity& q, double omega, const ScalarField& rho,
                              double eps);

/// Observed convergence order between two grids with h ratio `ratio` (default 2).
double observed_order(double coarse_err, double fine_err, double ratio = 2.0);

} // namespace aet
