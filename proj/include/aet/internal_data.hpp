#pragma once

#include <vector>

#include "aet/grid.hpp"
#include "aet/pde.hpp"

namespace aet {

/// Admissible permittivity: bounded in [1/Lambda, Lambda] and exactly 1 on the
/// collar of `margin` nodes next to the boundary. The H1-norm bound of the
/// admissible set is reported by callers, not enforced here.
class Permittivity {
public:
    Permittivity() = default;
    Permittivity(ScalarField field, double lambda_bound, int margin);

    const ScalarField& field() const { return field_; }
    const Grid& grid() const { return field_.grid(); }
    double lambda_bound() const { return lambda_bound_; }
    int margin() const { return margin_; }

    /// Nodes with min(i, j, n-1-i, n-1-j) < margin form the collar.
    bool in_collar(int i, int j) const;

    static Permittivity constant_one(const Grid& g, double lambda_bound, int margin);

private:
    ScalarField field_;
    double lambda_bound_ = 0.0;
    int margin_ = 0;
};

/// Zero the collar nodes of a field (perturbations live strictly inside).
ScalarField mask_interior(const ScalarField& f, int margin);

struct InternalData {
    struct Entry {
        double omega = 0.0;
        ScalarField psi_star;
    };
    std::vector<Entry> entries;
    double noise_level = 0.0;
    unsigned long long seed = 0;

    /// Frequencies strictly increasing, every datum zero-mean (to tolerance).
    void validate() const;
};

/// Forward data map: solve the Helmholtz problem at (q, omega, phi), then the
/// zero-mean Neumann Poisson problem with the conservative divergence of
/// |u|^2 grad q. The result has zero mean.
ScalarField synthesize_psi(const Permittivity& q, double omega, const ComplexField& phi);

/// psi + level * ||psi|| * eta / ||eta|| with a seeded zero-mean pseudo-random
/// field eta, re-centered to zero mean. Deterministic given the seed.
ScalarField add_noise(const ScalarField& psi, double level, unsigned long long seed);

} // namespace aet
