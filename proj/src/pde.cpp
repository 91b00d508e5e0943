#include "aet/pde.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <chrono>
#include <map>
#include <mutex>
#include <vector>

namespace aet {

namespace {

using Complex = std::complex<double>;
using SparseC = Eigen::SparseMatrix<Complex>;
using SparseD = Eigen::SparseMatrix<double>;
using TripletC = Eigen::Triplet<Complex>;
using TripletD = Eigen::Triplet<double>;

constexpr Complex kI{0.0, 1.0};

// Visits every grid edge with its transverse trapezoid factor over h^2.
// fn(a, b, t) with a, b node indices and t = c_perp / h^2.
template <typename Fn>
void for_each_edge(const Grid& g, Fn fn) {
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int j = 0; j < g.n; ++j) {
        const double t = g.edge_factor(j) * inv_h2;
        for (int i = 0; i + 1 < g.n; ++i) {
            fn(g.index(i, j), g.index(i + 1, j), t);
        }
    }
    for (int i = 0; i < g.n; ++i) {
        const double t = g.edge_factor(i) * inv_h2;
        for (int j = 0; j + 1 < g.n; ++j) {
            fn(g.index(i, j), g.index(i, j + 1), t);
        }
    }
}

// gamma_k = c_i * c_j (quadrature weight over h^2).
double gamma_weight(const Grid& g, int i, int j) {
    return g.edge_factor(i) * g.edge_factor(j);
}

std::complex<double> boundary_integral(const ComplexField& f) {
    const Grid& g = f.grid();
    Complex acc = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (g.is_boundary(i, j)) acc += g.boundary_weight(i, j) * f(i, j);
        }
    }
    return acc;
}

double relative_residual(const SparseC& A, const Eigen::VectorXcd& x,
                         const Eigen::VectorXcd& b) {
    const double denom = std::max(b.norm(), 1e-300);
    return (A * x - b).norm() / denom;
}

} // namespace

RobinData RobinData::zero(const Grid& g) {
    RobinData r;
    r.left = r.right = r.bottom = r.top = Eigen::VectorXcd::Zero(g.n);
    return r;
}

RobinData RobinData::from_phi(const Grid& g, double omega, const ComplexField& phi) {
    RobinData r = zero(g);
    const Complex scale = -kI * omega;
    for (int k = 0; k < g.n; ++k) {
        r.left[k] = scale * phi(0, k);
        r.right[k] = scale * phi(g.n - 1, k);
        r.bottom[k] = scale * phi(k, 0);
        r.top[k] = scale * phi(k, g.n - 1);
    }
    return r;
}

SparseSystem assemble_helmholtz(const Grid& g, const ScalarField& q, double omega) {
    if (!(q.grid() == g)) throw GridError("assemble_helmholtz: q lives on another grid");
    if (omega < 0.0) throw AssemblyError("assemble_helmholtz: omega must be >= 0");
    if ((q.values().array() <= 0.0).any()) {
        throw AssemblyError("assemble_helmholtz: q must be positive everywhere");
    }

    const int nodes = g.num_nodes();
    const bool bordered = (omega == 0.0);
    const int dim = nodes + (bordered ? 1 : 0);

    std::vector<TripletC> trip;
    trip.reserve(static_cast<size_t>(nodes) * 6);

    for_each_edge(g, [&](int a, int b, double t) {
        trip.emplace_back(a, a, Complex(t, 0.0));
        trip.emplace_back(b, b, Complex(t, 0.0));
        trip.emplace_back(a, b, Complex(-t, 0.0));
        trip.emplace_back(b, a, Complex(-t, 0.0));
    });

    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int k = g.index(i, j);
            Complex diag = -omega * omega * gamma_weight(g, i, j) * q(i, j);
            if (g.is_boundary(i, j)) {
                diag -= kI * omega * g.boundary_weight(i, j) * inv_h2;
            }
            if (diag != Complex(0.0, 0.0)) trip.emplace_back(k, k, diag);
        }
    }

    if (bordered) {
        for (int j = 0; j < g.n; ++j) {
            for (int i = 0; i < g.n; ++i) {
                if (!g.is_boundary(i, j)) continue;
                const int k = g.index(i, j);
                const Complex w(g.boundary_weight(i, j), 0.0);
                trip.emplace_back(nodes, k, w);
                trip.emplace_back(k, nodes, w);
            }
        }
    }

    SparseSystem sys;
    sys.constraint_rows = bordered ? 1 : 0;
    sys.matrix.resize(dim, dim);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.matrix.makeCompressed();
    return sys;
}

HelmholtzSystem::HelmholtzSystem(const ScalarField& q, double omega, double tol_linear,
                                 SolverKind backend)
    : grid_(q.grid()), omega_(omega), tol_(tol_linear), backend_(backend),
      sys_(assemble_helmholtz(q.grid(), q, omega)) {
    if (backend_ == SolverKind::direct) {
        lu_ = std::make_unique<Eigen::SparseLU<SparseC>>();
        lu_->compute(sys_.matrix);
        if (lu_->info() != Eigen::Success) {
            throw SolveError("Helmholtz factorization failed", LinearSolveReport{});
        }
    }
}

ComplexField HelmholtzSystem::solve(const ComplexField& source, const RobinData& g,
                                    std::complex<double> constraint_value,
                                    LinearSolveReport* report) const {
    if (!(source.grid() == grid_)) throw GridError("Helmholtz solve: source grid mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = grid_.n;
    const int nodes = grid_.num_nodes();
    const double inv_h2 = 1.0 / (grid_.h * grid_.h);

    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(sys_.dimension());
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            b[grid_.index(i, j)] = -gamma_weight(grid_, i, j) * source(i, j);
        }
    }
    // Robin data enters through the eliminated ghost nodes, one face at a time;
    // corners collect h/2 from each incident face.
    for (int k = 0; k < n; ++k) {
        const double w = grid_.h * grid_.edge_factor(k) * inv_h2;
        b[grid_.index(0, k)] -= w * g.left[k];
        b[grid_.index(n - 1, k)] -= w * g.right[k];
        b[grid_.index(k, 0)] -= w * g.bottom[k];
        b[grid_.index(k, n - 1)] -= w * g.top[k];
    }
    if (sys_.constraint_rows == 1) b[nodes] = constraint_value;

    Eigen::VectorXcd x;
    int iterations = 0;
    if (backend_ == SolverKind::direct) {
        x = lu_->solve(b);
        if (lu_->info() != Eigen::Success) {
            throw SolveError("Helmholtz direct solve failed", LinearSolveReport{});
        }
    } else {
        Eigen::BiCGSTAB<SparseC, Eigen::DiagonalPreconditioner<Complex>> krylov;
        krylov.setTolerance(tol_ * 1e-2);
        krylov.setMaxIterations(20000);
        krylov.compute(sys_.matrix);
        x = krylov.solve(b);
        iterations = static_cast<int>(krylov.iterations());
    }

    LinearSolveReport rep;
    rep.solver_kind = backend_;
    rep.iterations = iterations;
    rep.relative_residual = relative_residual(sys_.matrix, x, b);
    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report) *report = rep;
    if (!(rep.relative_residual <= tol_)) {
        throw SolveError("Helmholtz solve residual " + std::to_string(rep.relative_residual) +
                             " above tolerance",
                         rep);
    }
    return ComplexField(grid_, x.head(nodes));
}

ComplexField solve_helmholtz(const ScalarField& q, double omega, const ComplexField& phi,
                             const ComplexField& f, LinearSolveReport* report) {
    HelmholtzSystem sys(q, omega);
    ComplexField source(q.grid(), omega * f.values());
    const RobinData g = RobinData::from_phi(q.grid(), omega, phi);
    const Complex constraint = boundary_integral(phi) - kI * integral(f);
    return sys.solve(source, g, constraint, report);
}

ComplexField solve_domega(const ScalarField& q, double omega, const ComplexField& phi,
                          const ComplexField& u_omega, LinearSolveReport* report) {
    const Grid& gr = q.grid();
    HelmholtzSystem sys(q, omega);

    Eigen::VectorXcd src = (-2.0 * omega) * q.values().cwiseProduct(u_omega.values());
    RobinData g = RobinData::zero(gr);
    for (int k = 0; k < gr.n; ++k) {
        g.left[k] = kI * (u_omega(0, k) - phi(0, k));
        g.right[k] = kI * (u_omega(gr.n - 1, k) - phi(gr.n - 1, k));
        g.bottom[k] = kI * (u_omega(k, 0) - phi(k, 0));
        g.top[k] = kI * (u_omega(k, gr.n - 1) - phi(k, gr.n - 1));
    }
    const ComplexField qu(gr, q.values().cwiseProduct(u_omega.values()));
    const Complex constraint = kI * integral(qu);
    return sys.solve(ComplexField(gr, std::move(src)), g, constraint, report);
}

PoissonSolver::PoissonSolver(const Grid& g, double tol_linear) : grid_(g), tol_(tol_linear) {
    const int nodes = g.num_nodes();
    std::vector<TripletD> trip;
    trip.reserve(static_cast<size_t>(nodes) * 5);
    for_each_edge(g, [&](int a, int b, double t) {
        trip.emplace_back(a, a, t);
        trip.emplace_back(b, b, t);
        trip.emplace_back(a, b, -t);
        trip.emplace_back(b, a, -t);
    });
    stiffness_.resize(nodes, nodes);
    stiffness_.setFromTriplets(trip.begin(), trip.end());
    stiffness_.makeCompressed();

    // Bordered with the volume-mean constraint.
    std::vector<TripletD> btrip = trip;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int k = g.index(i, j);
            const double w = g.quad_weight(i, j);
            btrip.emplace_back(nodes, k, w);
            btrip.emplace_back(k, nodes, w);
        }
    }
    SparseD bordered(nodes + 1, nodes + 1);
    bordered.setFromTriplets(btrip.begin(), btrip.end());
    bordered.makeCompressed();
    lu_.compute(bordered);
    if (lu_.info() != Eigen::Success) {
        throw SolveError("Poisson factorization failed", LinearSolveReport{});
    }
}

Eigen::VectorXd PoissonSolver::solve_weighted(const Eigen::VectorXd& rw,
                                              LinearSolveReport* report) const {
    const auto t0 = std::chrono::steady_clock::now();
    const int nodes = grid_.num_nodes();
    Eigen::VectorXd b(nodes + 1);
    b.head(nodes) = rw;
    b[nodes] = 0.0;
    Eigen::VectorXd x = lu_.solve(b);
    if (lu_.info() != Eigen::Success) {
        throw SolveError("Poisson solve failed", LinearSolveReport{});
    }

    LinearSolveReport rep;
    rep.solver_kind = SolverKind::direct;
    // Residual of the stiffness equations; the multiplier absorbs the (tiny)
    // incompatibility of rw, so measure against the consistent part.
    Eigen::VectorXd r = stiffness_ * x.head(nodes) - rw;
    r.array() += x[nodes] * quad_weights(grid_).array();
    rep.relative_residual = r.norm() / std::max(rw.norm(), 1e-300);
    rep.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report) *report = rep;
    if (!(rep.relative_residual <= tol_)) {
        throw SolveError("Poisson solve residual " + std::to_string(rep.relative_residual) +
                             " above tolerance",
                         rep);
    }
    return x.head(nodes);
}

ScalarField PoissonSolver::solve(const ScalarField& rhs, LinearSolveReport* report) const {
    if (!(rhs.grid() == grid_)) throw GridError("Poisson solve: rhs grid mismatch");
    const double total_weight = quad_weights(grid_).sum();
    const double mean = integral(rhs) / total_weight;
    Eigen::VectorXd rw(grid_.num_nodes());
    for (int j = 0; j < grid_.n; ++j) {
        for (int i = 0; i < grid_.n; ++i) {
            rw[grid_.index(i, j)] = -gamma_weight(grid_, i, j) * (rhs(i, j) - mean);
        }
    }
    return ScalarField(grid_, solve_weighted(rw, report));
}

std::shared_ptr<const PoissonSolver> shared_poisson(const Grid& g) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const PoissonSolver>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(g.n);
    if (it == cache.end()) {
        it = cache.emplace(g.n, std::make_shared<PoissonSolver>(g)).first;
    }
    return it->second;
}

ScalarField solve_neumann_poisson(const ScalarField& rhs, LinearSolveReport* report) {
    return shared_poisson(rhs.grid())->solve(rhs, report);
}

Eigen::VectorXd diffusion_apply_weighted(const ScalarField& s, const Eigen::VectorXd& p) {
    const Grid& g = s.grid();
    if (p.size() != g.num_nodes()) throw FieldError("diffusion_apply_weighted: size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_nodes());
    const auto& sv = s.values();
    for_each_edge(g, [&](int a, int b, double t) {
        const double flux = t * 0.5 * (sv[a] + sv[b]) * (p[a] - p[b]);
        out[a] += flux;
        out[b] -= flux;
    });
    return out;
}

Eigen::VectorXd diffusion_coefficient_adjoint(const ScalarField& p, const Eigen::VectorXd& z) {
    const Grid& g = p.grid();
    if (z.size() != g.num_nodes()) throw FieldError("diffusion_coefficient_adjoint: size mismatch");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(g.num_nodes());
    const auto& pv = p.values();
    for_each_edge(g, [&](int a, int b, double t) {
        const double tau = 0.5 * t * (pv[a] - pv[b]) * (z[a] - z[b]);
        out[a] += tau;
        out[b] += tau;
    });
    return out;
}

ScalarField flux_divergence(const ScalarField& s, const ScalarField& p) {
    if (!(s.grid() == p.grid())) throw GridError("flux_divergence: grid mismatch");
    const Grid& g = s.grid();
    Eigen::VectorXd w = diffusion_apply_weighted(s, p.values());
    Eigen::VectorXd out(g.num_nodes());
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int k = g.index(i, j);
            out[k] = -w[k] / gamma_weight(g, i, j);
        }
    }
    return ScalarField(g, std::move(out));
}

} // namespace aet
