#include "specflow/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace specflow {

std::vector<std::vector<int>> detect_clusters(const Vector& lambdas, const ClusterTolerance& tol) {
    if (tol.rel_tol < 0.0 || tol.abs_tol < 0.0)
        throw std::invalid_argument("detect_clusters: tolerances must be nonnegative");
    std::vector<std::vector<int>> clusters;
    const int n = static_cast<int>(lambdas.size());
    for (int i = 0; i < n; ++i) {
        const bool tied =
            i > 0 && lambdas(i) - lambdas(i - 1) <=
                         tol.abs_tol + tol.rel_tol * std::max(1.0, std::abs(lambdas(i - 1)));
        if (tied)
            clusters.back().push_back(i);
        else
            clusters.push_back({i});
    }
    return clusters;
}

Spectrum eigensolve(const BilinearForm& form, const PotentialField& V, int count,
                    const ClusterTolerance& tol) {
    const int d = form.size();
    if (V.size() != d)
        throw std::invalid_argument("eigensolve: potential/form dimension mismatch");
    if (count < 1 || count > d)
        throw std::invalid_argument("eigensolve: count must lie in [1, d]");

    const MeasureSpace& space = *form.space();
    const Vector& m = space.weights();
    Vector sqrt_m = m.array().sqrt();
    Vector inv_sqrt_m = m.array().rsqrt();

    // B = M^{-1/2} (L + M diag(V)) M^{-1/2} = M^{-1/2} L M^{-1/2} + diag(V)
    Matrix B = inv_sqrt_m.asDiagonal() * form.matrix() * inv_sqrt_m.asDiagonal();
    B.diagonal() += V.values;
    B = 0.5 * (B + B.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    if (es.info() != Eigen::Success)
        throw NumericError("eigensolve: dense symmetric eigendecomposition failed");

    Spectrum spec{Vector(count), Matrix(d, count), {}, V, count};
    spec.lambdas = es.eigenvalues().head(count);
    spec.frame = inv_sqrt_m.asDiagonal() * es.eigenvectors().leftCols(count);

    // Reproducible sign: first component above noise level made positive.
    for (int j = 0; j < count; ++j) {
        const double noise = 1e-12 * spec.frame.col(j).cwiseAbs().maxCoeff();
        for (int i = 0; i < d; ++i) {
            if (std::abs(spec.frame(i, j)) > noise) {
                if (spec.frame(i, j) < 0.0) spec.frame.col(j) *= -1.0;
                break;
            }
        }
    }

    spec.clusters = detect_clusters(spec.lambdas, tol);
    return spec;
}

double sigma_k(const Spectrum& spec, int k) {
    if (k < 1 || k > spec.count)
        throw std::invalid_argument("sigma_k: k out of range");
    return spec.lambdas.head(k).sum();
}

bool interior_gap_ok(const Spectrum& spec, int J) {
    if (J < 1 || J + 1 > spec.count)
        throw std::invalid_argument("interior_gap_ok: spectrum carries fewer than J+1 eigenvalues");
    for (const auto& cluster : spec.clusters) {
        if (cluster.size() <= 1) continue;
        for (int idx : cluster)
            if (idx <= J) return false;  // 0-based: indices 0..J are the first J+1
    }
    return true;
}

}  // namespace specflow
