#include "aet/internal_data.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace aet {

namespace {

int collar_distance(const Grid& g, int i, int j) {
    return std::min(std::min(i, j), std::min(g.n - 1 - i, g.n - 1 - j));
}

} // namespace

Permittivity::Permittivity(ScalarField field, double lambda_bound, int margin)
    : field_(std::move(field)), lambda_bound_(lambda_bound), margin_(margin) {
    if (!(lambda_bound_ > 1.0)) {
        throw FieldError("Permittivity: lambda bound must exceed 1");
    }
    if (margin_ < 1 || 2 * margin_ >= field_.grid().n) {
        throw FieldError("Permittivity: margin must be >= 1 and leave an interior");
    }
    const Grid& g = field_.grid();
    const double lo = 1.0 / lambda_bound_;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double v = field_(i, j);
            if (v < lo || v > lambda_bound_) {
                throw FieldError("Permittivity: value " + std::to_string(v) +
                                 " outside [1/Lambda, Lambda]");
            }
            if (collar_distance(g, i, j) < margin_ && v != 1.0) {
                throw FieldError("Permittivity: collar node not equal to 1");
            }
        }
    }
}

bool Permittivity::in_collar(int i, int j) const {
    return collar_distance(grid(), i, j) < margin_;
}

Permittivity Permittivity::constant_one(const Grid& g, double lambda_bound, int margin) {
    return Permittivity(ScalarField::constant(g, 1.0), lambda_bound, margin);
}

ScalarField mask_interior(const ScalarField& f, int margin) {
    const Grid& g = f.grid();
    Eigen::VectorXd v = f.values();
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            if (collar_distance(g, i, j) < margin) v[g.index(i, j)] = 0.0;
        }
    }
    return ScalarField(g, std::move(v));
}

void InternalData::validate() const {
    double prev = -1.0;
    for (const auto& e : entries) {
        if (e.omega < 0.0) throw FieldError("InternalData: negative frequency");
        if (!(e.omega > prev)) {
            throw FieldError("InternalData: frequencies must be strictly increasing");
        }
        prev = e.omega;
        const double rel = std::abs(integral(e.psi_star)) /
                           std::max(norm_l2(e.psi_star), 1e-300);
        if (rel > 1e-8) throw FieldError("InternalData: datum is not zero-mean");
    }
    if (noise_level < 0.0) throw FieldError("InternalData: negative noise level");
}

ScalarField synthesize_psi(const Permittivity& q, double omega, const ComplexField& phi) {
    const ComplexField u = solve_helmholtz(q.field(), omega, phi,
                                           ComplexField::zero(q.grid()));
    const ScalarField intensity = u.squared_magnitude();
    return solve_neumann_poisson(flux_divergence(intensity, q.field()));
}

ScalarField add_noise(const ScalarField& psi, double level, unsigned long long seed) {
    if (level < 0.0) throw FieldError("add_noise: level must be >= 0");
    if (level == 0.0) return psi;
    const Grid& g = psi.grid();

    // splitmix64 stream; portable and stable across platforms.
    Eigen::VectorXd eta(g.num_nodes());
    std::uint64_t state = seed;
    for (int k = 0; k < g.num_nodes(); ++k) {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        eta[k] = 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
    }

    ScalarField noise = subtract_mean(ScalarField(g, std::move(eta)));
    const double scale = level * norm_l2(psi) / norm_l2(noise);
    ScalarField noisy(g, psi.values() + scale * noise.values());
    return subtract_mean(noisy);
}

} // namespace aet
