#include "specflow/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>

#include "specflow/spectrum.hpp"

namespace specflow {

namespace {

Matrix schroedinger_matrix(const BilinearForm& form, const Vector& V) {
    Matrix A = form.matrix();
    A.diagonal() += (form.space()->weights().array() * V.array()).matrix();
    return A;
}

// Largest Rayleigh quotient of E_V over the span of the columns of Z
// (assumed m-orthonormal).
double max_rayleigh(const BilinearForm& form, const Vector& V, const Matrix& Z) {
    const Matrix A = schroedinger_matrix(form, V);
    Matrix B = Z.transpose() * A * Z;
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(B);
    return es.eigenvalues()(B.rows() - 1);
}

Vector monotone_partner(const ConstraintFunctional& K, const Vector& V, std::mt19937_64& rng) {
    std::exponential_distribution<double> bump(4.0);
    Vector W = V;
    for (int i = 0; i < W.size(); ++i) W(i) += bump(rng);
    if (K.kind() != ConstraintKind::psi_budget)
        W = W.array().min(K.box_upper()).matrix();
    return W;
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

PropertyReport growth_floor_check(const SpectralObjective& obj, double lambda_min, int samples,
                                  std::uint64_t seed) {
    PropertyReport r{"growth_floor",
                     "phi(lambda) >= -A (1 + max(lambda_J, 0)) for the configured A",
                     samples,
                     0.0,
                     1e-12,
                     Verdict::pass,
                     seed};
    if (std::isnan(obj.growth_A)) {
        r.verdict = Verdict::inconclusive;  // no A configured
        return r;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 20.0);
    for (int s = 0; s < samples; ++s) {
        Vector l(obj.J);
        for (int i = 0; i < obj.J; ++i) l(i) = lambda_min + unif(rng);
        std::sort(l.begin(), l.end());
        const double floor = -obj.growth_A * (1.0 + std::max(l(obj.J - 1), 0.0));
        r.worst_violation = std::max(r.worst_violation, floor - obj.value(l));
    }
    r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
    return r;
}

bool all_passed(const std::vector<PropertyReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const PropertyReport& r) {
        return r.verdict != Verdict::fail;
    });
}

Matrix random_m_orthonormal_frame(int d, int k, const MeasureSpace& space, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix Z(d, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < d; ++i) Z(i, j) = gauss(rng);
    for (int pass = 0; pass < 2; ++pass) {  // twice-run Gram-Schmidt in <.,.>_m
        for (int j = 0; j < k; ++j) {
            for (int i = 0; i < j; ++i)
                Z.col(j) -= inner_product(Z.col(j), Z.col(i), space) * Z.col(i);
            const double n = norm_m(Z.col(j), space);
            if (n < 1e-12) throw NumericError("random frame degenerated");
            Z.col(j) /= n;
        }
    }
    return Z;
}

std::vector<PropertyReport> spectral_suite(const BilinearForm& form, const ConstraintFunctional& K,
                                           const SuiteOptions& opts) {
    const MeasureSpace& space = *form.space();
    const int d = form.size();
    const int J = std::min(opts.J, d - 1);
    const int count = J + 1;
    const double sign = opts.flip_inequalities ? -1.0 : 1.0;

    auto monotonicity = [&]() {
        PropertyReport r{"eigenvalue_monotonicity",
                         "V1 <= V2 pointwise implies lambda_k(V1) <= lambda_k(V2)",
                         opts.samples,
                         0.0,
                         1e-9,
                         Verdict::pass,
                         opts.seed};
        std::mt19937_64 rng(opts.seed);
        for (int s = 0; s < opts.samples; ++s) {
            const Vector V1 = K.sample_domain(space, rng, s % 2 == 0);
            const Vector V2 = monotone_partner(K, V1, rng);
            const Spectrum s1 = eigensolve(form, PotentialField(V1, form.space(), K.V_min()),
                                           count, opts.cluster_tol);
            const Spectrum s2 = eigensolve(form, PotentialField(V2, form.space(), K.V_min()),
                                           count, opts.cluster_tol);
            for (int k = 0; k < count; ++k)
                r.worst_violation =
                    std::max(r.worst_violation, sign * (s1.lambdas(k) - s2.lambdas(k)));
        }
        r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
        return r;
    };

    auto concavity = [&]() {
        PropertyReport r{"sigma_k_concavity",
                         "sigma_k(t V1 + (1-t) V2) >= t sigma_k(V1) + (1-t) sigma_k(V2)",
                         opts.samples,
                         0.0,
                         1e-9,
                         Verdict::pass,
                         opts.seed + 1};
        std::mt19937_64 rng(opts.seed + 1);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int s = 0; s < opts.samples; ++s) {
            const Vector V1 = K.sample_domain(space, rng, s % 2 == 0);
            const Vector V2 = K.sample_domain(space, rng, false);
            const double t = unif(rng);
            const Vector Vt = t * V1 + (1.0 - t) * V2;
            const Spectrum s1 = eigensolve(form, PotentialField(V1, form.space(), K.V_min()),
                                           count, opts.cluster_tol);
            const Spectrum s2 = eigensolve(form, PotentialField(V2, form.space(), K.V_min()),
                                           count, opts.cluster_tol);
            const Spectrum st = eigensolve(form, PotentialField(Vt, form.space(), K.V_min()),
                                           count, opts.cluster_tol);
            for (int k = 1; k <= count; ++k) {
                const double interpolated = t * sigma_k(s1, k) + (1.0 - t) * sigma_k(s2, k);
                r.worst_violation =
                    std::max(r.worst_violation, sign * (interpolated - sigma_k(st, k)));
            }
        }
        r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
        return r;
    };

    auto minmax = [&]() {
        PropertyReport r{"minmax_principle",
                         "max Rayleigh quotient over any j-dim subspace bounds lambda_j from "
                         "above; equality on the eigenframe",
                         opts.samples,
                         0.0,
                         1e-9,
                         Verdict::pass,
                         opts.seed + 2};
        std::mt19937_64 rng(opts.seed + 2);
        std::uniform_int_distribution<int> pick_j(1, count);
        for (int s = 0; s < opts.samples; ++s) {
            const Vector V = K.sample_domain(space, rng, s % 2 == 0);
            const Spectrum spec = eigensolve(form, PotentialField(V, form.space(), K.V_min()),
                                             count, opts.cluster_tol);
            const int j = pick_j(rng);
            const Matrix Z = random_m_orthonormal_frame(d, j, space, rng);
            const double over_random = max_rayleigh(form, V, Z);
            r.worst_violation =
                std::max(r.worst_violation, sign * (spec.lambdas(j - 1) - over_random));
            const double over_eigen = max_rayleigh(form, V, spec.frame.leftCols(j));
            r.worst_violation =
                std::max(r.worst_violation, std::abs(over_eigen - spec.lambdas(j - 1)));
        }
        r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
        return r;
    };

    auto majorization = [&]() {
        PropertyReport r{"weak_majorization",
                         "ascending partial sums of frame energies dominate sigma_k",
                         opts.samples,
                         0.0,
                         1e-9,
                         Verdict::pass,
                         opts.seed + 3};
        std::mt19937_64 rng(opts.seed + 3);
        for (int s = 0; s < opts.samples; ++s) {
            const Vector V = K.sample_domain(space, rng, s % 2 == 0);
            const Spectrum spec = eigensolve(form, PotentialField(V, form.space(), K.V_min()),
                                             count, opts.cluster_tol);
            const Matrix W = random_m_orthonormal_frame(d, J, space, rng);
            Vector energies(J);
            for (int h = 0; h < J; ++h) energies(h) = form_value(form, V, W.col(h));
            std::sort(energies.begin(), energies.end());
            double partial = 0.0;
            for (int k = 1; k <= J; ++k) {
                partial += energies(k - 1);
                r.worst_violation = std::max(r.worst_violation, sign * (sigma_k(spec, k) - partial));
            }
        }
        r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
        return r;
    };

    auto f1 = std::async(std::launch::async, monotonicity);
    auto f2 = std::async(std::launch::async, concavity);
    auto f3 = std::async(std::launch::async, minmax);
    auto f4 = std::async(std::launch::async, majorization);
    std::vector<PropertyReport> reports{f1.get(), f2.get(), f3.get(), f4.get()};
    std::sort(reports.begin(), reports.end(),
              [](const PropertyReport& a, const PropertyReport& b) { return a.name < b.name; });
    return reports;
}

PropertyReport frame_invariance_check(const BilinearForm& form, const PotentialField& V,
                                      int rotations, std::uint64_t seed,
                                      const ClusterTolerance& tol) {
    PropertyReport r{"frame_invariance",
                     "sum of squared eigenfunctions over a degenerate cluster does not depend "
                     "on the orthonormal frame",
                     rotations,
                     0.0,
                     1e-9,
                     Verdict::pass,
                     seed};
    const Spectrum spec = eigensolve(form, V, form.size(), tol);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    bool found_cluster = false;
    for (const auto& cluster : spec.clusters) {
        const int c = static_cast<int>(cluster.size());
        if (c < 2) continue;
        found_cluster = true;
        Matrix U(form.size(), c);
        for (int j = 0; j < c; ++j) U.col(j) = spec.frame.col(cluster[j]);
        const Vector base = U.array().square().rowwise().sum();
        for (int rot = 0; rot < rotations; ++rot) {
            Matrix G(c, c);
            for (int i = 0; i < c; ++i)
                for (int j = 0; j < c; ++j) G(i, j) = gauss(rng);
            const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
            const Matrix rotated = U * Q;
            const Vector mixed = rotated.array().square().rowwise().sum();
            r.worst_violation =
                std::max(r.worst_violation, (mixed - base).cwiseAbs().maxCoeff());
        }
    }
    if (!found_cluster) {
        r.verdict = Verdict::inconclusive;
        return r;
    }
    r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
    return r;
}

PropertyReport resolvent_relation_check(const BilinearForm& form, const PotentialField& V,
                                        double beta, const ClusterTolerance& tol) {
    PropertyReport r{"resolvent_spectral_map",
                     "resolvent eigenvalues equal (lambda_k + beta)^{-1} in reversed order",
                     form.size(),
                     0.0,
                     1e-9,
                     Verdict::pass,
                     0};
    const double lambda_min = form.alpha() + V.lower_bound;
    if (!(beta > lambda_min))
        throw std::invalid_argument("resolvent_relation_check: needs beta > alpha + V_min");

    const Spectrum spec = eigensolve(form, V, form.size(), tol);
    if (spec.lambdas(0) + beta <= 0.0)
        throw NumericError("resolvent_relation_check: singular shift lambda_1 + beta <= 0");

    const MeasureSpace& space = *form.space();
    Matrix A = schroedinger_matrix(form, (V.values.array() + beta).matrix());
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericError("resolvent_relation_check: shifted operator is not positive definite");
    const Matrix Ainv = llt.solve(Matrix::Identity(form.size(), form.size()));
    Vector sqrt_m = space.weights().array().sqrt();
    Matrix R = sqrt_m.asDiagonal() * Ainv * sqrt_m.asDiagonal();
    R = 0.5 * (R + R.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(R);
    if (es.info() != Eigen::Success)
        throw NumericError("resolvent_relation_check: eigendecomposition failed");

    const int d = form.size();
    for (int k = 0; k < d; ++k) {
        const double expected = 1.0 / (spec.lambdas(k) + beta);
        const double got = es.eigenvalues()(d - 1 - k);  // reversed order
        r.worst_violation = std::max(r.worst_violation, std::abs(got - expected) / expected);
    }
    r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
    return r;
}

PropertyReport gradient_fd_check(const BilinearForm& form, const SpectralObjective& obj,
                                 const PotentialField& V, double step, std::uint64_t seed,
                                 const ClusterTolerance& tol) {
    PropertyReport r{"gradient_chain_rule",
                     "finite differences of H along random directions match <xi, dir>_m",
                     20,
                     0.0,
                     1e-5,
                     Verdict::pass,
                     seed};
    const int count = std::min(obj.J + 1, form.size());
    const Spectrum spec = eigensolve(form, V, count, tol);
    double min_gap = kInf;
    for (int k = 0; k + 1 < count; ++k)
        min_gap = std::min(min_gap, spec.lambdas(k + 1) - spec.lambdas(k));
    if (min_gap < 1e-6) {
        r.verdict = Verdict::inconclusive;  // H is not differentiable at degeneracies
        return r;
    }

    const SubgradientSelection sel = subgradient_xi(spec, obj);
    const MeasureSpace& space = *form.space();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int dir = 0; dir < 20; ++dir) {
        Vector zeta(form.size());
        for (int i = 0; i < zeta.size(); ++i) zeta(i) = gauss(rng);
        zeta /= norm_m(zeta, space);
        auto H_at = [&](const Vector& W) {
            return spectral_H(eigensolve(form, PotentialField(W, V.space, V.lower_bound),
                                         obj.J, tol),
                              obj);
        };
        const double fd =
            (H_at(V.values + step * zeta) - H_at(V.values - step * zeta)) / (2.0 * step);
        const double predicted = inner_product(sel.xi.values, zeta, space);
        const double rel = std::abs(fd - predicted) / std::max(1e-12, std::abs(predicted));
        r.worst_violation = std::max(r.worst_violation, rel);
    }
    r.verdict = r.worst_violation <= r.tolerance ? Verdict::pass : Verdict::fail;
    return r;
}

}  // namespace specflow
