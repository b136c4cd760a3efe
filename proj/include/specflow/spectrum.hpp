#pragma once

#include <vector>

#include "specflow/forms.hpp"

namespace specflow {

// Floating-point stand-in for exact eigenvalue ties: lambda_{i+1} and
// lambda_i belong to one cluster when their gap is at most
// abs_tol + rel_tol * max(1, |lambda_i|), transitively.
struct ClusterTolerance {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
};

// The `count` smallest eigenpairs of L u + M V u = lambda M u, M = diag(m):
// ascending eigenvalues, an m-orthonormal eigenframe (columns), and the
// multiplicity clusters of the computed eigenvalues.
struct Spectrum {
    Vector lambdas;                          // ascending
    Matrix frame;                            // d x count, <u_i,u_j>_m = delta_ij
    std::vector<std::vector<int>> clusters;  // partition of {0,...,count-1}
    PotentialField V_ref;
    int count = 0;

    const Vector eigenvector(int i) const { return frame.col(i); }
};

std::vector<std::vector<int>> detect_clusters(const Vector& lambdas, const ClusterTolerance& tol);

// Reduces the generalized problem by the M^{1/2} similarity transform and
// runs a dense symmetric eigendecomposition. Eigenvector signs are fixed
// (first component above noise made positive) for reproducible output.
Spectrum eigensolve(const BilinearForm& form, const PotentialField& V, int count,
                    const ClusterTolerance& tol = {});

// sigma_k = lambda_1 + ... + lambda_k (1-based k).
double sigma_k(const Spectrum& spec, int k);

// True iff the first J+1 eigenvalues are strictly separated: every cluster
// touching indices {1,...,J+1} is a singleton. A tie between lambda_{J+1}
// and a deeper computed eigenvalue also blocks the gap.
bool interior_gap_ok(const Spectrum& spec, int J);

}  // namespace specflow
