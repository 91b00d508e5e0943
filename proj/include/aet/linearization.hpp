#pragma once

#include <memory>

#include "aet/internal_data.hpp"
#include "aet/pde.hpp"

namespace aet {

enum class PairingKind { l2, sobolev };

/// Inner product used on the parameter side of the adjoint. l2 is the plain
/// trapezoid pairing; sobolev realizes an H1-like pairing through one smoothing
/// solve of (I - alpha*Laplacian) with Neumann boundary, restricted to the
/// interior (collar-zero) subspace.
struct GradientPairing {
    PairingKind kind = PairingKind::l2;
    double alpha = 1e-3;
};

/// Factorized (W + alpha*A_P) on the interior subspace; SPD. Maps covectors
/// (transposed-chain outputs) to gradients in the Sobolev pairing.
class SobolevSmoother {
public:
    SobolevSmoother(const Grid& g, int margin, double alpha);

    const Grid& grid() const { return grid_; }
    int margin() const { return margin_; }
    double alpha() const { return alpha_; }

    /// Solve K_int x = covector restricted to the interior, embed by zero.
    ScalarField apply_inverse(const Eigen::VectorXd& covector) const;
    /// The pairing itself: a^T K_int b for interior-supported fields.
    double inner(const ScalarField& a, const ScalarField& b) const;

private:
    Grid grid_;
    int margin_ = 0;
    double alpha_ = 0.0;
    std::vector<int> interior_; // node index -> compact index or -1
    std::vector<int> nodes_;    // compact index -> node index
    Eigen::SparseMatrix<double> k_int_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

std::shared_ptr<const SobolevSmoother> shared_smoother(const Grid& g, int margin, double alpha);

/// Everything needed to apply the derivative of the data map at one (q, omega):
/// the forward solve u, its factorization, and the shared Poisson solver.
class DerivativeWorkspace {
public:
    DerivativeWorkspace(Permittivity q, double omega, ComplexField phi);

    const Permittivity& permittivity() const { return q_; }
    double omega() const { return omega_; }
    const ComplexField& u() const { return u_; }
    const ScalarField& intensity() const { return intensity_; } // |u|^2
    const Grid& grid() const { return q_.grid(); }

    /// Data value psi(q) itself (zero mean).
    ScalarField psi() const;

    /// v solving  Laplacian(v) + omega^2 q v = -omega^2 rho u  with homogeneous
    /// Robin data; identically zero at omega = 0.
    ComplexField solve_v(const ScalarField& rho) const;

    /// Frechet derivative of the data map: the zero-mean Poisson solve of the
    /// conservative divergence of |u|^2 grad rho + 2 Re(conj(u) v) grad q.
    ScalarField apply_df(const ScalarField& rho) const;

    /// Transposed chain against the weighted data pairing: returns M^T W s.
    Eigen::VectorXd adjoint_covector(const ScalarField& residual) const;

    /// Exact adjoint of apply_df in the requested pairing; vanishes on the collar.
    ScalarField apply_df_adjoint(const ScalarField& residual,
                                 const GradientPairing& pairing = {}) const;

private:
    Permittivity q_;
    double omega_ = 0.0;
    ComplexField phi_;
    HelmholtzSystem helmholtz_;
    std::shared_ptr<const PoissonSolver> poisson_;
    ComplexField u_;
    ScalarField intensity_;
};

/// Convert a covector (M^T W s accumulation) into a gradient field in the given
/// pairing, restricted to the interior subspace.
ScalarField covector_to_gradient(const Grid& g, const Eigen::VectorXd& covector, int margin,
                                 const GradientPairing& pairing);

/// Worst-case relative dot-test discrepancy over seeded random (rho, s) pairs.
double adjoint_dot_test(const Permittivity& q, double omega, int trials, unsigned long long seed,
                        const GradientPairing& pairing = {});

/// Deterministic pseudo-random interior-supported direction, unit L2 norm.
ScalarField random_interior_field(const Grid& g, int margin, unsigned long long seed);

} // namespace aet
