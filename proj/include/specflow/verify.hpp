#pragma once

#include "specflow/constraints.hpp"
#include "specflow/objectives.hpp"

namespace specflow {

enum class Verdict { pass, fail, inconclusive };

std::string to_string(Verdict v);

// Outcome of one executable property check. worst_violation is the maximum
// over all samples, never an average, and the recorded seed reproduces the
// run bit for bit.
struct PropertyReport {
    std::string name;
    std::string statement;
    int samples = 0;
    double worst_violation = 0.0;
    double tolerance = 0.0;
    Verdict verdict = Verdict::pass;
    std::uint64_t seed = 0;
};

struct SuiteOptions {
    int samples = 100;
    int J = 4;
    std::uint64_t seed = 0;
    ClusterTolerance cluster_tol;
    // Mutation-test mode: deliberately reverses the checked inequalities so
    // a healthy instance must come back as a reported failure.
    bool flip_inequalities = false;
};

// Four spectral properties on random potentials from the domain of K:
// eigenvalue monotonicity in the potential, concavity of the partial
// eigenvalue sums, the min-max characterization (lower bound over random
// subspaces, equality on the eigenframe), and weak majorization of frame
// energies by the eigenvalues. Checks run concurrently; reports are merged
// in a fixed order by name.
std::vector<PropertyReport> spectral_suite(const BilinearForm& form, const ConstraintFunctional& K,
                                           const SuiteOptions& opts);

// Invariance of sum_{h in cluster} u_h^2 under random orthogonal mixes of
// each fully-degenerate eigenspace. Inconclusive when the spectrum has no
// cluster of size >= 2.
PropertyReport frame_invariance_check(const BilinearForm& form, const PotentialField& V,
                                      int rotations, std::uint64_t seed,
                                      const ClusterTolerance& tol = {});

// Eigenvalues of (L + M(V + beta))^{-1} M match (lambda_k + beta)^{-1} in
// reversed order.
PropertyReport resolvent_relation_check(const BilinearForm& form, const PotentialField& V,
                                        double beta, const ClusterTolerance& tol = {});

// Centered finite differences of H(V) = phi(lambda^J(V)) along random
// directions against <xi, direction>_m. Inconclusive at (near-)degenerate
// spectra, where H is not differentiable.
PropertyReport gradient_fd_check(const BilinearForm& form, const SpectralObjective& obj,
                                 const PotentialField& V, double step, std::uint64_t seed,
                                 const ClusterTolerance& tol = {});

// Sampled growth floor of the objective: phi(lambda) >= -A (1 + max(lambda_J, 0))
// over random admissible tuples, with A = obj.growth_A.
PropertyReport growth_floor_check(const SpectralObjective& obj, double lambda_min, int samples,
                                  std::uint64_t seed);

// True iff every conclusive report passed.
bool all_passed(const std::vector<PropertyReport>& reports);

// Random m-orthonormal k-frame (columns), for majorization-style checks.
Matrix random_m_orthonormal_frame(int d, int k, const MeasureSpace& space, std::mt19937_64& rng);

}  // namespace specflow
