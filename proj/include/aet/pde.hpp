#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <complex>
#include <memory>

#include "aet/grid.hpp"

namespace aet {

inline constexpr double kDefaultLinearTol = 1e-10;

enum class SolverKind { direct, iterative };

struct LinearSolveReport {
    double relative_residual = 0.0;
    SolverKind solver_kind = SolverKind::direct;
    int iterations = 0; // 0 for direct solves
    double elapsed_seconds = 0.0;
};

/// Linear solve failed or its residual exceeded the configured tolerance.
class SolveError : public Error {
public:
    SolveError(const std::string& message, LinearSolveReport report)
        : Error(message), report_(report) {}
    const LinearSolveReport& report() const { return report_; }

private:
    LinearSolveReport report_;
};

/// Finalized sparse operator, optionally bordered with one Lagrange row/column.
struct SparseSystem {
    Eigen::SparseMatrix<std::complex<double>> matrix; // compressed, duplicates summed
    int constraint_rows = 0;                          // 0 or 1
    int dimension() const { return static_cast<int>(matrix.rows()); }
};

/// Robin data g in du/dnu - i*omega*u = g, given per face so that manufactured
/// solutions with incompatible corner values remain expressible. Each vector has
/// length n and is indexed by the along-face node index (x-index for bottom/top,
/// y-index for left/right).
struct RobinData {
    Eigen::VectorXcd left, right, bottom, top;

    static RobinData zero(const Grid& g);
    /// g = -i*omega*phi restricted to each face.
    static RobinData from_phi(const Grid& g, double omega, const ComplexField& phi);
};

/// -(Laplacian + omega^2 q) in trapezoid-weighted form: complex-symmetric, with
/// the Robin term on the boundary diagonal. For omega = 0 the Robin condition
/// degenerates to Neumann and the system is bordered with the boundary-integral
/// constraint row, which restores uniqueness.
SparseSystem assemble_helmholtz(const Grid& g, const ScalarField& q, double omega);

/// Assembled + factorized Helmholtz operator for one (q, omega) pair.
class HelmholtzSystem {
public:
    HelmholtzSystem(const ScalarField& q, double omega,
                    double tol_linear = kDefaultLinearTol,
                    SolverKind backend = SolverKind::direct);

    const Grid& grid() const { return grid_; }
    double omega() const { return omega_; }
    const SparseSystem& system() const { return sys_; }

    /// Solve  Laplacian(u) + omega^2 q u = source,  du/dnu - i omega u = g.
    /// At omega = 0 the appended constraint row enforces the boundary integral
    /// of u to equal `constraint_value`.
    ComplexField solve(const ComplexField& source, const RobinData& g,
                       std::complex<double> constraint_value,
                       LinearSolveReport* report = nullptr) const;

private:
    Grid grid_;
    double omega_ = 0.0;
    double tol_ = kDefaultLinearTol;
    SolverKind backend_ = SolverKind::direct;
    SparseSystem sys_;
    std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<std::complex<double>>>> lu_;
};

/// Laplacian(u) + omega^2 q u = omega*f with the Robin condition from phi; at
/// omega = 0 the constraint is  int_bdy u = int_bdy phi - i int f.
ComplexField solve_helmholtz(const ScalarField& q, double omega, const ComplexField& phi,
                             const ComplexField& f, LinearSolveReport* report = nullptr);

/// Frequency derivative of the Helmholtz solution:
///   Laplacian(w) + omega^2 q w = -2 omega q u,  dw/dnu - i omega w = i(u - phi),
/// with  int_bdy w = i int_Omega q u  at omega = 0.
ComplexField solve_domega(const ScalarField& q, double omega, const ComplexField& phi,
                          const ComplexField& u_omega, LinearSolveReport* report = nullptr);

/// Zero-mean Neumann Poisson solver on a fixed grid; the stiffness matrix is the
/// conservative (edge-flux) Laplacian bordered with the volume-mean constraint,
/// factorized once.
class PoissonSolver {
public:
    explicit PoissonSolver(const Grid& g, double tol_linear = kDefaultLinearTol);

    const Grid& grid() const { return grid_; }
    /// Weighted stiffness A_P (no border): A_P = sum over edges of
    /// t_e (delta_a - delta_b)(delta_a - delta_b)^T, symmetric PSD, kernel = constants.
    const Eigen::SparseMatrix<double>& stiffness() const { return stiffness_; }

    /// Laplacian(psi) = rhs, zero normal flux, zero mean; the mean of rhs is
    /// removed first (discrete compatibility).
    ScalarField solve(const ScalarField& rhs, LinearSolveReport* report = nullptr) const;

    /// Solve A_P psi = rw with zero weighted mean. This is the pipeline entry:
    /// rw must be a weighted (covector-side) right-hand side.
    Eigen::VectorXd solve_weighted(const Eigen::VectorXd& rw,
                                   LinearSolveReport* report = nullptr) const;

private:
    Grid grid_;
    double tol_ = kDefaultLinearTol;
    Eigen::SparseMatrix<double> stiffness_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

/// Process-wide per-grid PoissonSolver cache (safe for concurrent reads).
std::shared_ptr<const PoissonSolver> shared_poisson(const Grid& g);

/// Convenience wrapper over the shared solver.
ScalarField solve_neumann_poisson(const ScalarField& rhs, LinearSolveReport* report = nullptr);

/// Conservative divergence div(s grad p) with zero normal flux on the boundary
/// (boundary rows live on half/quarter cells). Composing with the Poisson solve
/// above is exact: solve_neumann_poisson(flux_divergence(1, p)) == p - mean(p)
/// up to the factorization round-off.
ScalarField flux_divergence(const ScalarField& s, const ScalarField& p);

/// Weighted application of the diffusion stiffness with coefficient s:
/// returns sum_e t_e avg(s)_e (p_a - p_b)(delta_a - delta_b). Equals -gamma.*div(s grad p).
Eigen::VectorXd diffusion_apply_weighted(const ScalarField& s, const Eigen::VectorXd& p);

/// Adjoint of the coefficient slot: for fixed p, the transpose of
/// s -> diffusion_apply_weighted(s, p) applied to z.
Eigen::VectorXd diffusion_coefficient_adjoint(const ScalarField& p, const Eigen::VectorXd& z);

} // namespace aet
