#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "specflow/spectrum.hpp"

namespace specflow {

// C^1 function phi of the first J eigenvalues, defining the spectral term
// H(V) = phi(lambda_1(V), ..., lambda_J(V)). Evaluation is domain-checked:
// the input must be an ascending J-tuple (and strictly positive for the
// builtins that take roots of eigenvalue products).
struct SpectralObjective {
    std::string name;
    int J = 1;
    std::function<double(const Vector&)> eval;
    std::function<Vector(const Vector&)> grad;
    bool needs_positive_spectrum = false;
    // Optional linear growth floor: eval >= -A (1 + max(lambda_J, 0)).
    // NaN means not configured.
    double growth_A = std::numeric_limits<double>::quiet_NaN();

    double value(const Vector& lambdas) const;
    Vector gradient(const Vector& lambdas) const;
    std::pair<double, Vector> eval_grad(const Vector& lambdas) const;

    // lambda_1 + ... + lambda_k (k <= J).
    static SpectralObjective sum_first_k(int k, int J = 0);
    // sum_{i != j, i,j <= k} lambda_i lambda_j (ordered pairs).
    static SpectralObjective elementary_symmetric_2(int k, int J = 0);
    // 2 lambda_1 + sqrt(lambda_1 lambda_2 lambda_3); needs lambda_min > 0.
    static SpectralObjective sqrt_product_mix(int J = 3);
    // (lambda_1 + lambda_2 + lambda_3)(lambda_1^2 + lambda_2^2).
    static SpectralObjective sum_square_product(int J = 3);
    // h(lambda_j - lambda_{j-1}) with h(r) = r^2 (so h'(0) = 0), j >= 2.
    static SpectralObjective gap_penalty(int j, int J = 0);
    static SpectralObjective gap_penalty(int j, std::function<double(double)> h,
                                         std::function<double(double)> dh, int J);
    static SpectralObjective custom(std::string name, int J,
                                    std::function<double(const Vector&)> eval,
                                    std::function<Vector(const Vector&)> grad);
};

// Per-point outcome of the structural compatibility test on grad phi:
//   (a) d_J phi >= 0 everywhere,
//   (b) lambda_{k-1} = lambda_k  =>  d_{k-1} phi >= d_k phi.
// Both clauses checked with tolerance `tol`; ties detected exactly up to
// floating-point scale noise.
struct StructuralSampleResult {
    Vector point;
    bool last_partial_nonneg = true;
    bool tie_monotone = true;
    double worst_violation = 0.0;
};

struct StructuralReport {
    std::vector<StructuralSampleResult> samples;
    bool pass = true;
    double worst_violation = 0.0;
};

StructuralReport check_structural(const SpectralObjective& obj, const std::vector<Vector>& samples,
                                  double tol = 1e-10);

// Random ascending sample points in [lambda_min, lambda_min + span]^J plus,
// for each k, a boundary point with lambda_{k-1} = lambda_k.
std::vector<Vector> structural_sample_points(int J, double lambda_min, double span, int n_random,
                                             std::uint64_t seed);

// One selection xi(x) = sum_j p_j u_j(x)^2 with p = grad phi(lambda^J),
// assembled from the eigensolver frame. When the spectrum carries at least
// J+1 eigenvalues, records whether the strict interior gap held (if it did
// not, xi is one selection from the supergradient set, not the gradient).
struct SubgradientSelection {
    PotentialField xi;
    Vector weights;  // grad phi at lambda^J
    Matrix frame_used;
    std::optional<bool> interior_gap;
};

SubgradientSelection subgradient_xi(const Spectrum& spec, const SpectralObjective& obj);

// sum_{h <= k} u_h^2 as a field on D: an element of the superdifferential
// of sigma_k at the spectrum's potential.
PotentialField sigma_frame_sum(const Spectrum& spec, int k);

// sigma_k(W) - sigma_k(V) - <sigma_frame_sum(V,k), W - V>_m; concavity of
// sigma_k makes this <= 0 up to solver noise.
double linear_bound_check(const BilinearForm& form, const PotentialField& V,
                          const PotentialField& W, int k, const ClusterTolerance& tol = {});

// H(V) = phi(lambda^J) straight from a solved spectrum.
double spectral_H(const Spectrum& spec, const SpectralObjective& obj);

// Reparameterization of phi through partial sums: with s_j = lambda_1 +
// ... + lambda_j, psi(s) = phi(s_1, s_2 - s_1, ..., s_J - s_{J-1}), and
// grad psi_j = grad phi_j - grad phi_{j+1} (last term dropped at j = J).
Vector partial_sum_point(const Vector& lambdas);
Vector lambdas_from_partial_sums(const Vector& s);
double psi_value(const SpectralObjective& obj, const Vector& s);
Vector psi_gradient(const SpectralObjective& obj, const Vector& s);

}  // namespace specflow
