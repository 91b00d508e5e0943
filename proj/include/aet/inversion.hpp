#pragma once

#include <optional>
#include <vector>

#include "aet/linearization.hpp"

namespace aet {

struct FrequencySet {
    std::vector<double> omegas; // strictly increasing, all >= 0
};

/// m equispaced frequencies in [k_min, k_max], endpoints included; m = 1 yields
/// {k_min} (the single-frequency convention).
FrequencySet frequency_grid(double k_min, double k_max, int m);

struct LandweberConfig {
    double step_h = 0.0; // <= 0 selects 1/sigma_max from a seeded power method
    int max_iterations = 100;
    double lambda_bound = 4.0;
    int margin = 5;
    GradientPairing pairing{};
    double stop_tolerance = 1e-10; // relative J-decrease threshold
    bool line_search = true;
    int power_iterations = 10;
    int max_halvings = 30;
    unsigned long long seed = 1;
};

struct IterationRecord {
    int iteration = 0;
    double j_value = 0.0;
    double rel_err_l2 = 0.0; // NaN when no ground truth was supplied
    double rel_err_h1 = 0.0; // NaN when no ground truth was supplied
    bool step_accepted = true;
};

struct ReconstructionTrace {
    std::vector<IterationRecord> records;
    Permittivity final_q;
    double step_used = 0.0; // base step after auto-selection
};

/// Raised when the iteration encounters a non-finite J; carries the partial trace.
class LandweberError : public Error {
public:
    LandweberError(const std::string& message, ReconstructionTrace trace)
        : Error(message), trace_(std::move(trace)) {}
    const ReconstructionTrace& trace() const { return trace_; }

private:
    ReconstructionTrace trace_;
};

/// J(q) = 1/2 sum_omega || psi_omega(q) - psi*_omega ||^2.
double discrepancy(const Permittivity& q, const InternalData& data, const ComplexField& phi);

/// Gradient of J in the requested pairing: the summed adjoint covectors, converted
/// once. Vanishes on the collar.
ScalarField gradient_j(const Permittivity& q, const InternalData& data, const ComplexField& phi,
                       const GradientPairing& pairing = {});

/// Pointwise projection onto the box-and-collar part of the admissible set:
/// clamp to [1/Lambda, Lambda], reset the collar to exactly 1. The H1 norm of
/// the projected field is reported through h1_norm (the admissible set's H1 ball
/// is tracked, not enforced).
Permittivity project_q(const ScalarField& p, double lambda_bound, int margin,
                       double* h1_norm = nullptr);

/// Projected multi-frequency Landweber iteration
///   q_{n+1} = T( q_n - h * sum_omega DF_omega(q_n)^* (F_omega(q_n)) ),
/// starting from q0 (default: the constant-1 field). With line_search enabled the
/// step is halved until J does not increase, so J is monotone non-increasing.
ReconstructionTrace landweber_run(const InternalData& data, const LandweberConfig& config,
                                  const ComplexField& phi,
                                  const Permittivity* truth = nullptr,
                                  const Permittivity* q0 = nullptr);

/// Seeded Lanczos estimate of the smallest singular value of the stacked map
/// rho -> (DF_omega rho)_omega over interior-supported rho, in the L2 pairing.
/// Diagnostic only; an upper-bound estimate that tightens with more iterations.
double coercivity_probe(const Permittivity& q, const FrequencySet& freqs,
                        const ComplexField& phi, int iterations, unsigned long long seed);

} // namespace aet
