#include "aet/inversion.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace aet {

namespace {

struct ForwardEval {
    std::vector<DerivativeWorkspace> workspaces;
    std::vector<ScalarField> residuals;
    double j = 0.0;
};

ForwardEval evaluate_forward(const Permittivity& q, const InternalData& data,
                             const ComplexField& phi) {
    ForwardEval ev;
    ev.workspaces.reserve(data.entries.size());
    ev.residuals.reserve(data.entries.size());
    for (const auto& entry : data.entries) {
        ev.workspaces.emplace_back(q, entry.omega, phi);
        const ScalarField psi = ev.workspaces.back().psi();
        ScalarField residual(q.grid(), psi.values() - entry.psi_star.values());
        ev.j += 0.5 * inner_l2(residual, residual);
        ev.residuals.push_back(std::move(residual));
    }
    return ev;
}

Eigen::VectorXd summed_covector(const ForwardEval& ev) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(ev.workspaces.front().grid().num_nodes());
    for (size_t k = 0; k < ev.workspaces.size(); ++k) {
        acc += ev.workspaces[k].adjoint_covector(ev.residuals[k]);
    }
    return acc;
}

double rel_error_l2(const Permittivity& q, const Permittivity& truth) {
    ScalarField diff(q.grid(), q.field().values() - truth.field().values());
    return norm_l2(diff) / norm_l2(truth.field());
}

double rel_error_h1(const Permittivity& q, const Permittivity& truth) {
    ScalarField diff(q.grid(), q.field().values() - truth.field().values());
    return norm_h1(diff) / norm_h1(truth.field());
}

IterationRecord make_record(int iteration, double j, const Permittivity& q,
                            const Permittivity* truth, bool accepted) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.j_value = j;
    rec.rel_err_l2 = truth ? rel_error_l2(q, *truth) : std::numeric_limits<double>::quiet_NaN();
    rec.rel_err_h1 = truth ? rel_error_h1(q, *truth) : std::numeric_limits<double>::quiet_NaN();
    rec.step_accepted = accepted;
    return rec;
}

// Largest singular value of the stacked derivative at q, from a seeded power
// method on sum DF* DF in the configured pairing.
double estimate_sigma_max(const std::vector<DerivativeWorkspace>& workspaces,
                          const LandweberConfig& config, const Grid& g) {
    ScalarField x = random_interior_field(g, config.margin, config.seed);
    std::shared_ptr<const SobolevSmoother> smoother;
    if (config.pairing.kind == PairingKind::sobolev) {
        smoother = shared_smoother(g, config.margin, config.pairing.alpha);
    }
    auto apply_normal = [&](const ScalarField& in) {
        Eigen::VectorXd cov = Eigen::VectorXd::Zero(g.num_nodes());
        for (const auto& ws : workspaces) {
            cov += ws.adjoint_covector(ws.apply_df(in));
        }
        return covector_to_gradient(g, cov, config.margin, config.pairing);
    };
    auto pairing_inner = [&](const ScalarField& a, const ScalarField& b) {
        return smoother ? smoother->inner(a, b) : inner_l2(a, b);
    };

    double lambda = 0.0;
    for (int it = 0; it < config.power_iterations; ++it) {
        const ScalarField y = apply_normal(x);
        const double xx = pairing_inner(x, x);
        lambda = pairing_inner(x, y) / xx;
        const double ny = std::sqrt(std::max(pairing_inner(y, y), 0.0));
        if (ny == 0.0) return 0.0;
        x = ScalarField(g, y.values() / ny);
    }
    return std::sqrt(std::max(lambda, 0.0));
}

} // namespace

FrequencySet frequency_grid(double k_min, double k_max, int m) {
    if (m < 1) throw FieldError("frequency_grid: m must be >= 1");
    if (k_min < 0.0 || k_min > k_max) {
        throw FieldError("frequency_grid: need 0 <= k_min <= k_max");
    }
    FrequencySet set;
    if (m == 1) {
        set.omegas = {k_min};
        return set;
    }
    set.omegas.resize(m);
    for (int i = 1; i <= m; ++i) {
        set.omegas[i - 1] = k_min + (static_cast<double>(i - 1) / (m - 1)) * (k_max - k_min);
    }
    return set;
}

double discrepancy(const Permittivity& q, const InternalData& data, const ComplexField& phi) {
    return evaluate_forward(q, data, phi).j;
}

ScalarField gradient_j(const Permittivity& q, const InternalData& data, const ComplexField& phi,
                       const GradientPairing& pairing) {
    const ForwardEval ev = evaluate_forward(q, data, phi);
    return covector_to_gradient(q.grid(), summed_covector(ev), q.margin(), pairing);
}

Permittivity project_q(const ScalarField& p, double lambda_bound, int margin,
                       double* h1_norm) {
    const Grid& g = p.grid();
    const double lo = 1.0 / lambda_bound;
    Eigen::VectorXd v = p.values();
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int k = g.index(i, j);
            const int d = std::min(std::min(i, j), std::min(g.n - 1 - i, g.n - 1 - j));
            if (d < margin) {
                v[k] = 1.0;
            } else {
                v[k] = std::min(std::max(v[k], lo), lambda_bound);
            }
        }
    }
    ScalarField projected(g, std::move(v));
    if (h1_norm) *h1_norm = norm_h1(projected);
    return Permittivity(std::move(projected), lambda_bound, margin);
}

ReconstructionTrace landweber_run(const InternalData& data, const LandweberConfig& config,
                                  const ComplexField& phi, const Permittivity* truth,
                                  const Permittivity* q0) {
    if (data.entries.empty()) throw FieldError("landweber_run: no data entries");
    if (config.max_iterations < 0) throw FieldError("landweber_run: negative iteration count");
    data.validate();
    const Grid g = data.entries.front().psi_star.grid();

    Permittivity q = q0 ? *q0
                        : Permittivity::constant_one(g, config.lambda_bound, config.margin);

    ReconstructionTrace trace;
    auto fail_if_not_finite = [&](double j) {
        if (!std::isfinite(j)) {
            trace.final_q = q;
            throw LandweberError("landweber_run: non-finite discrepancy", trace);
        }
    };

    ForwardEval ev = evaluate_forward(q, data, phi);
    fail_if_not_finite(ev.j);
    trace.records.push_back(make_record(0, ev.j, q, truth, true));

    double step = config.step_h;
    if (!(step > 0.0)) {
        const double sigma_max = estimate_sigma_max(ev.workspaces, config, g);
        step = sigma_max > 0.0 ? 1.0 / sigma_max : 1.0;
    }
    trace.step_used = step;

    for (int n = 1; n <= config.max_iterations && ev.j > 0.0; ++n) {
        const ScalarField grad =
            covector_to_gradient(g, summed_covector(ev), config.margin, config.pairing);

        double h_try = step;
        bool accepted = false;
        Permittivity q_next;
        ForwardEval ev_next;
        for (int attempt = 0; attempt <= (config.line_search ? config.max_halvings : 0);
             ++attempt) {
            Permittivity candidate = project_q(
                ScalarField(g, q.field().values() - h_try * grad.values()),
                config.lambda_bound, config.margin);
            ForwardEval cand_ev = evaluate_forward(candidate, data, phi);
            fail_if_not_finite(cand_ev.j);
            if (!config.line_search || cand_ev.j <= ev.j) {
                q_next = std::move(candidate);
                ev_next = std::move(cand_ev);
                accepted = true;
                break;
            }
            h_try *= 0.5;
        }

        if (!accepted) {
            trace.records.push_back(make_record(n, ev.j, q, truth, false));
            break;
        }

        const double j_prev = ev.j;
        q = std::move(q_next);
        ev = std::move(ev_next);
        trace.records.push_back(make_record(n, ev.j, q, truth, true));

        if (j_prev > 0.0 && (j_prev - ev.j) <= config.stop_tolerance * j_prev) break;
    }

    trace.final_q = q;
    return trace;
}

double coercivity_probe(const Permittivity& q, const FrequencySet& freqs,
                        const ComplexField& phi, int iterations, unsigned long long seed) {
    if (iterations < 1) throw FieldError("coercivity_probe: iterations must be >= 1");
    if (freqs.omegas.empty()) throw FieldError("coercivity_probe: empty frequency set");
    const Grid& g = q.grid();

    std::vector<DerivativeWorkspace> workspaces;
    workspaces.reserve(freqs.omegas.size());
    for (double omega : freqs.omegas) workspaces.emplace_back(q, omega, phi);

    const Eigen::VectorXd w = quad_weights(g);
    const Eigen::VectorXd sqrt_w = w.cwiseSqrt();

    // Interior mask in vector form.
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(g.num_nodes());
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const int d = std::min(std::min(i, j), std::min(g.n - 1 - i, g.n - 1 - j));
            if (d >= q.margin()) mask[g.index(i, j)] = 1.0;
        }
    }

    // Symmetrized normal operator in z = sqrt(W) x coordinates, restricted to the
    // interior subspace.
    auto apply_bz = [&](const Eigen::VectorXd& z) {
        const ScalarField x(g, mask.cwiseProduct(z.cwiseQuotient(sqrt_w)));
        Eigen::VectorXd cov = Eigen::VectorXd::Zero(g.num_nodes());
        for (const auto& ws : workspaces) {
            cov += ws.adjoint_covector(ws.apply_df(x));
        }
        return mask.cwiseProduct(cov.cwiseQuotient(sqrt_w)).eval();
    };

    // Lanczos with full reorthogonalization.
    const int max_steps = std::min(iterations, g.num_nodes());
    std::vector<Eigen::VectorXd> basis;
    std::vector<double> alpha, beta;

    Eigen::VectorXd v = sqrt_w.cwiseProduct(
        random_interior_field(g, q.margin(), seed).values());
    v /= v.norm();
    basis.push_back(v);

    for (int k = 0; k < max_steps; ++k) {
        Eigen::VectorXd wvec = apply_bz(basis[k]);
        if (k > 0) wvec -= beta[k - 1] * basis[k - 1];
        alpha.push_back(basis[k].dot(wvec));
        wvec -= alpha[k] * basis[k];
        for (const auto& b : basis) wvec -= b.dot(wvec) * b;
        const double nb = wvec.norm();
        if (nb < 1e-12) break; // invariant subspace captured
        beta.push_back(nb);
        basis.push_back(wvec / nb);
    }

    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        tri(k, k) = alpha[k];
        if (k + 1 < m) {
            tri(k, k + 1) = beta[k];
            tri(k + 1, k) = beta[k];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const double lambda_min = es.eigenvalues().minCoeff();
    return std::sqrt(std::max(lambda_min, 0.0));
}

} // namespace aet
