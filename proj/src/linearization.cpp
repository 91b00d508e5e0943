#include "aet/linearization.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace aet {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

std::complex<double> boundary_integral(const ComplexField& f) {
    const Grid& g = f.grid();
    std::complex<double> acc = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (g.is_boundary(i, j)) acc += g.boundary_weight(i, j) * f(i, j);
        }
    }
    return acc;
}

Eigen::VectorXd splitmix_values(int count, unsigned long long seed) {
    Eigen::VectorXd v(count);
    std::uint64_t state = seed;
    for (int k = 0; k < count; ++k) {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        v[k] = 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
    }
    return v;
}

} // namespace

SobolevSmoother::SobolevSmoother(const Grid& g, int margin, double alpha)
    : grid_(g), margin_(margin), alpha_(alpha) {
    if (alpha_ <= 0.0) throw FieldError("SobolevSmoother: alpha must be positive");
    const int nodes = g.num_nodes();
    interior_.assign(nodes, -1);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int d = std::min(std::min(i, j), std::min(g.n - 1 - i, g.n - 1 - j));
            if (d >= margin) {
                interior_[g.index(i, j)] = static_cast<int>(nodes_.size());
                nodes_.push_back(g.index(i, j));
            }
        }
    }
    if (nodes_.empty()) throw FieldError("SobolevSmoother: margin leaves no interior");

    const Eigen::SparseMatrix<double>& ap = shared_poisson(g)->stiffness();
    const Eigen::VectorXd w = quad_weights(g);
    std::vector<Eigen::Triplet<double>> trip;
    for (int col = 0; col < ap.outerSize(); ++col) {
        const int cc = interior_[col];
        if (cc < 0) continue;
        for (Eigen::SparseMatrix<double>::InnerIterator it(ap, col); it; ++it) {
            const int rc = interior_[it.row()];
            if (rc < 0) continue;
            trip.emplace_back(rc, cc, alpha_ * it.value());
        }
    }
    for (size_t c = 0; c < nodes_.size(); ++c) {
        trip.emplace_back(static_cast<int>(c), static_cast<int>(c), w[nodes_[c]]);
    }
    k_int_.resize(static_cast<int>(nodes_.size()), static_cast<int>(nodes_.size()));
    k_int_.setFromTriplets(trip.begin(), trip.end());
    k_int_.makeCompressed();
    lu_.compute(k_int_);
    if (lu_.info() != Eigen::Success) {
        throw SolveError("Sobolev smoother factorization failed", LinearSolveReport{});
    }
}

ScalarField SobolevSmoother::apply_inverse(const Eigen::VectorXd& covector) const {
    Eigen::VectorXd rhs(static_cast<int>(nodes_.size()));
    for (size_t c = 0; c < nodes_.size(); ++c) rhs[static_cast<int>(c)] = covector[nodes_[c]];
    Eigen::VectorXd x = lu_.solve(rhs);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(grid_.num_nodes());
    for (size_t c = 0; c < nodes_.size(); ++c) out[nodes_[c]] = x[static_cast<int>(c)];
    return ScalarField(grid_, std::move(out));
}

double SobolevSmoother::inner(const ScalarField& a, const ScalarField& b) const {
    Eigen::VectorXd ca(static_cast<int>(nodes_.size())), cb(static_cast<int>(nodes_.size()));
    for (size_t c = 0; c < nodes_.size(); ++c) {
        ca[static_cast<int>(c)] = a.values()[nodes_[c]];
        cb[static_cast<int>(c)] = b.values()[nodes_[c]];
    }
    return ca.dot(k_int_ * cb);
}

std::shared_ptr<const SobolevSmoother> shared_smoother(const Grid& g, int margin, double alpha) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, double>, std::shared_ptr<const SobolevSmoother>> cache;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_tuple(g.n, margin, alpha);
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, std::make_shared<SobolevSmoother>(g, margin, alpha)).first;
    }
    return it->second;
}

DerivativeWorkspace::DerivativeWorkspace(Permittivity q, double omega, ComplexField phi)
    : q_(std::move(q)), omega_(omega), phi_(std::move(phi)),
      helmholtz_(q_.field(), omega), poisson_(shared_poisson(q_.grid())) {
    if (!(phi_.grid() == q_.grid())) throw GridError("DerivativeWorkspace: phi grid mismatch");
    const RobinData g = RobinData::from_phi(q_.grid(), omega_, phi_);
    u_ = helmholtz_.solve(ComplexField::zero(q_.grid()), g, boundary_integral(phi_));
    intensity_ = u_.squared_magnitude();
}

ScalarField DerivativeWorkspace::psi() const {
    return ScalarField(grid(), poisson_->solve_weighted(
                                   diffusion_apply_weighted(intensity_, q_.field().values())));
}

ComplexField DerivativeWorkspace::solve_v(const ScalarField& rho) const {
    const ScalarField rho_in = mask_interior(rho, q_.margin());
    if (omega_ == 0.0) return ComplexField::zero(grid());
    const Eigen::VectorXcd src = (-omega_ * omega_) *
        rho_in.values().cast<std::complex<double>>().cwiseProduct(u_.values());
    return helmholtz_.solve(ComplexField(grid(), src), RobinData::zero(grid()), 0.0);
}

ScalarField DerivativeWorkspace::apply_df(const ScalarField& rho) const {
    const ScalarField rho_in = mask_interior(rho, q_.margin());
    Eigen::VectorXd rw = diffusion_apply_weighted(intensity_, rho_in.values());
    if (omega_ != 0.0) {
        const ComplexField v = solve_v(rho_in);
        const Eigen::VectorXd c =
            2.0 * (u_.values().conjugate().cwiseProduct(v.values())).real();
        rw += diffusion_apply_weighted(ScalarField(grid(), c), q_.field().values());
    }
    return ScalarField(grid(), poisson_->solve_weighted(rw));
}

Eigen::VectorXd DerivativeWorkspace::adjoint_covector(const ScalarField& residual) const {
    if (!(residual.grid() == grid())) throw GridError("adjoint_covector: grid mismatch");
    const Eigen::VectorXd weighted = quad_weights(grid()).cwiseProduct(residual.values());
    const Eigen::VectorXd z = poisson_->solve_weighted(weighted);

    Eigen::VectorXd covector = diffusion_apply_weighted(intensity_, z);
    if (omega_ != 0.0) {
        const Eigen::VectorXd yc = diffusion_coefficient_adjoint(q_.field(), z);
        // One transposed Helmholtz solve; the matrix is complex-symmetric, so the
        // forward factorization serves. The solver's right-hand side is
        // -gamma.*source, so divide the raw covector by gamma up front.
        Eigen::VectorXcd src(grid().num_nodes());
        for (int j = 0; j < grid().n; ++j) {
            for (int i = 0; i < grid().n; ++i) {
                const int k = grid().index(i, j);
                const double gamma = grid().edge_factor(i) * grid().edge_factor(j);
                src[k] = -std::conj(u_.values()[k]) * yc[k] / gamma;
            }
        }
        const ComplexField z2 =
            helmholtz_.solve(ComplexField(grid(), src), RobinData::zero(grid()), 0.0);
        const Eigen::VectorXd uz2 = (u_.values().cwiseProduct(z2.values())).real();
        const double h2 = grid().h * grid().h;
        covector += (2.0 * omega_ * omega_ / h2) * quad_weights(grid()).cwiseProduct(uz2);
    }
    return covector;
}

ScalarField covector_to_gradient(const Grid& g, const Eigen::VectorXd& covector, int margin,
                                 const GradientPairing& pairing) {
    if (pairing.kind == PairingKind::sobolev) {
        return shared_smoother(g, margin, pairing.alpha)->apply_inverse(covector);
    }
    const Eigen::VectorXd w = quad_weights(g);
    return mask_interior(ScalarField(g, covector.cwiseQuotient(w)), margin);
}

ScalarField DerivativeWorkspace::apply_df_adjoint(const ScalarField& residual,
                                                  const GradientPairing& pairing) const {
    return covector_to_gradient(grid(), adjoint_covector(residual), q_.margin(), pairing);
}

ScalarField random_interior_field(const Grid& g, int margin, unsigned long long seed) {
    ScalarField raw(g, splitmix_values(g.num_nodes(), seed));
    ScalarField masked = mask_interior(raw, margin);
    const double nrm = norm_l2(masked);
    if (nrm == 0.0) throw FieldError("random_interior_field: empty interior");
    return ScalarField(g, masked.values() / nrm);
}

double adjoint_dot_test(const Permittivity& q, double omega, int trials,
                        unsigned long long seed, const GradientPairing& pairing) {
    if (trials < 1) throw FieldError("adjoint_dot_test: trials must be >= 1");
    const Grid& g = q.grid();
    DerivativeWorkspace ws(q, omega, ComplexField::constant(g, 1.0));
    std::shared_ptr<const SobolevSmoother> smoother;
    if (pairing.kind == PairingKind::sobolev) {
        smoother = shared_smoother(g, q.margin(), pairing.alpha);
    }

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const ScalarField rho = random_interior_field(g, q.margin(), seed + 2ull * t);
        ScalarField s(g, splitmix_values(g.num_nodes(), seed + 2ull * t + 1));

        const ScalarField xi = ws.apply_df(rho);
        const ScalarField adj = ws.apply_df_adjoint(s, pairing);
        const double lhs = inner_l2(xi, s);
        const double rhs = smoother ? smoother->inner(rho, adj) : inner_l2(rho, adj);
        const double denom = std::max(norm_l2(xi) * norm_l2(s), 1e-300);
        worst = std::max(worst, std::abs(lhs - rhs) / denom);
    }
    return worst;
}

} // namespace aet
