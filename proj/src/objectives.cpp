#include "specflow/objectives.hpp"

#include <cmath>
#include <random>

namespace specflow {

namespace {

void check_domain(const SpectralObjective& obj, const Vector& lambdas) {
    if (lambdas.size() != obj.J)
        throw std::invalid_argument("objective '" + obj.name + "': expected " +
                                    std::to_string(obj.J) + " eigenvalues, got " +
                                    std::to_string(lambdas.size()));
    for (int i = 0; i + 1 < lambdas.size(); ++i) {
        const double slack = 1e-12 * std::max(1.0, std::abs(lambdas(i)));
        if (lambdas(i + 1) < lambdas(i) - slack)
            throw std::domain_error("objective '" + obj.name +
                                    "': eigenvalue tuple is not ascending");
    }
    if (obj.needs_positive_spectrum && lambdas.minCoeff() <= 0.0)
        throw std::domain_error("objective '" + obj.name +
                                "': needs a strictly positive spectrum");
}

int resolve_depth(int k, int J, const char* what) {
    if (k < 1) throw std::invalid_argument(std::string(what) + ": k must be >= 1");
    if (J == 0) J = k;
    if (J < k) throw std::invalid_argument(std::string(what) + ": J must be >= k");
    return J;
}

}  // namespace

double SpectralObjective::value(const Vector& lambdas) const {
    check_domain(*this, lambdas);
    return eval(lambdas);
}

Vector SpectralObjective::gradient(const Vector& lambdas) const {
    check_domain(*this, lambdas);
    return grad(lambdas);
}

std::pair<double, Vector> SpectralObjective::eval_grad(const Vector& lambdas) const {
    check_domain(*this, lambdas);
    return {eval(lambdas), grad(lambdas)};
}

SpectralObjective SpectralObjective::sum_first_k(int k, int J) {
    J = resolve_depth(k, J, "sum_first_k");
    SpectralObjective obj;
    obj.name = "sum_first_k(" + std::to_string(k) + ")";
    obj.J = J;
    obj.eval = [k](const Vector& l) { return l.head(k).sum(); };
    obj.grad = [k, J](const Vector&) {
        Vector g = Vector::Zero(J);
        g.head(k).setOnes();
        return g;
    };
    return obj;
}

SpectralObjective SpectralObjective::elementary_symmetric_2(int k, int J) {
    J = resolve_depth(k, J, "elementary_symmetric_2");
    if (k < 2) throw std::invalid_argument("elementary_symmetric_2: k must be >= 2");
    SpectralObjective obj;
    obj.name = "elementary_symmetric_2(" + std::to_string(k) + ")";
    obj.J = J;
    // sum over ordered pairs i != j equals S^2 - sum of squares.
    obj.eval = [k](const Vector& l) {
        const double S = l.head(k).sum();
        return S * S - l.head(k).squaredNorm();
    };
    obj.grad = [k, J](const Vector& l) {
        const double S = l.head(k).sum();
        Vector g = Vector::Zero(J);
        for (int i = 0; i < k; ++i) g(i) = 2.0 * (S - l(i));
        return g;
    };
    return obj;
}

SpectralObjective SpectralObjective::sqrt_product_mix(int J) {
    if (J < 3) throw std::invalid_argument("sqrt_product_mix: needs J >= 3");
    SpectralObjective obj;
    obj.name = "sqrt_product_mix";
    obj.J = J;
    obj.needs_positive_spectrum = true;
    obj.eval = [](const Vector& l) { return 2.0 * l(0) + std::sqrt(l(0) * l(1) * l(2)); };
    obj.grad = [J](const Vector& l) {
        const double p = std::sqrt(l(0) * l(1) * l(2));
        Vector g = Vector::Zero(J);
        g(0) = 2.0 + p / (2.0 * l(0));
        g(1) = p / (2.0 * l(1));
        g(2) = p / (2.0 * l(2));
        return g;
    };
    return obj;
}

SpectralObjective SpectralObjective::sum_square_product(int J) {
    if (J < 3) throw std::invalid_argument("sum_square_product: needs J >= 3");
    SpectralObjective obj;
    obj.name = "sum_square_product";
    obj.J = J;
    obj.eval = [](const Vector& l) {
        return (l(0) + l(1) + l(2)) * (l(0) * l(0) + l(1) * l(1));
    };
    obj.grad = [J](const Vector& l) {
        const double S = l(0) + l(1) + l(2);
        const double Q = l(0) * l(0) + l(1) * l(1);
        Vector g = Vector::Zero(J);
        g(0) = Q + 2.0 * S * l(0);
        g(1) = Q + 2.0 * S * l(1);
        g(2) = Q;
        return g;
    };
    return obj;
}

SpectralObjective SpectralObjective::gap_penalty(int j, int J) {
    return gap_penalty(
        j, [](double r) { return r * r; }, [](double r) { return 2.0 * r; },
        J == 0 ? j : J);
}

SpectralObjective SpectralObjective::gap_penalty(int j, std::function<double(double)> h,
                                                 std::function<double(double)> dh, int J) {
    if (j < 2) throw std::invalid_argument("gap_penalty: j must be >= 2");
    if (J < j) throw std::invalid_argument("gap_penalty: J must be >= j");
    if (dh(0.0) != 0.0) throw std::invalid_argument("gap_penalty: h'(0) must vanish");
    SpectralObjective obj;
    obj.name = "gap_penalty(" + std::to_string(j) + ")";
    obj.J = J;
    obj.eval = [j, h](const Vector& l) { return h(l(j - 1) - l(j - 2)); };
    obj.grad = [j, J, dh](const Vector& l) {
        const double slope = dh(l(j - 1) - l(j - 2));
        Vector g = Vector::Zero(J);
        g(j - 1) = slope;
        g(j - 2) = -slope;
        return g;
    };
    return obj;
}

SpectralObjective SpectralObjective::custom(std::string name, int J,
                                            std::function<double(const Vector&)> eval,
                                            std::function<Vector(const Vector&)> grad) {
    SpectralObjective obj;
    obj.name = std::move(name);
    obj.J = J;
    obj.eval = std::move(eval);
    obj.grad = std::move(grad);
    return obj;
}

StructuralReport check_structural(const SpectralObjective& obj, const std::vector<Vector>& samples,
                                  double tol) {
    StructuralReport report;
    for (const Vector& point : samples) {
        StructuralSampleResult r;
        r.point = point;
        const Vector g = obj.gradient(point);
        const int J = obj.J;
        if (g(J - 1) < -tol) {
            r.last_partial_nonneg = false;
            r.worst_violation = std::max(r.worst_violation, -g(J - 1));
        }
        for (int k = 1; k < J; ++k) {
            const double tie_scale = 1e-12 * std::max(1.0, std::abs(point(k)));
            if (point(k) - point(k - 1) <= tie_scale && g(k - 1) < g(k) - tol) {
                r.tie_monotone = false;
                r.worst_violation = std::max(r.worst_violation, g(k) - g(k - 1));
            }
        }
        report.pass = report.pass && r.last_partial_nonneg && r.tie_monotone;
        report.worst_violation = std::max(report.worst_violation, r.worst_violation);
        report.samples.push_back(std::move(r));
    }
    return report;
}

std::vector<Vector> structural_sample_points(int J, double lambda_min, double span, int n_random,
                                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, span);
    std::vector<Vector> points;
    auto ascending = [&](Vector v) {
        std::sort(v.begin(), v.end());
        return v.array() + lambda_min;
    };
    for (int s = 0; s < n_random; ++s) {
        Vector v(J);
        for (int i = 0; i < J; ++i) v(i) = unif(rng);
        points.push_back(ascending(v));
    }
    // One boundary point per tie position k: lambda_{k-1} = lambda_k.
    for (int k = 1; k < J; ++k) {
        Vector v(J);
        for (int i = 0; i < J; ++i) v(i) = unif(rng);
        Vector p = ascending(v);
        p(k) = p(k - 1);
        for (int i = k + 1; i < J; ++i) p(i) = std::max(p(i), p(k));
        points.push_back(p);
    }
    return points;
}

SubgradientSelection subgradient_xi(const Spectrum& spec, const SpectralObjective& obj) {
    if (spec.count < obj.J)
        throw std::invalid_argument("subgradient_xi: spectrum depth " + std::to_string(spec.count) +
                                    " below objective depth " + std::to_string(obj.J));
    const Vector lambdas = spec.lambdas.head(obj.J);
    const Vector p = obj.gradient(lambdas);
    const Matrix frame = spec.frame.leftCols(obj.J);
    Vector xi = Vector::Zero(frame.rows());
    for (int j = 0; j < obj.J; ++j) xi += p(j) * frame.col(j).array().square().matrix();

    SubgradientSelection sel{PotentialField(xi, spec.V_ref.space), p, frame, std::nullopt};
    if (spec.count >= obj.J + 1) sel.interior_gap = interior_gap_ok(spec, obj.J);
    return sel;
}

PotentialField sigma_frame_sum(const Spectrum& spec, int k) {
    if (k < 1 || k > spec.count)
        throw std::invalid_argument("sigma_frame_sum: k out of range");
    Vector sum = spec.frame.leftCols(k).array().square().rowwise().sum();
    return PotentialField(sum, spec.V_ref.space);
}

double linear_bound_check(const BilinearForm& form, const PotentialField& V,
                          const PotentialField& W, int k, const ClusterTolerance& tol) {
    const Spectrum at_V = eigensolve(form, V, k, tol);
    const Spectrum at_W = eigensolve(form, W, k, tol);
    const PotentialField xi = sigma_frame_sum(at_V, k);
    const double linear = inner_product(xi.values, W.values - V.values, *form.space());
    return sigma_k(at_W, k) - sigma_k(at_V, k) - linear;
}

double spectral_H(const Spectrum& spec, const SpectralObjective& obj) {
    if (spec.count < obj.J)
        throw std::invalid_argument("spectral_H: spectrum too shallow for objective");
    return obj.value(spec.lambdas.head(obj.J));
}

Vector partial_sum_point(const Vector& lambdas) {
    Vector s(lambdas.size());
    double acc = 0.0;
    for (int i = 0; i < lambdas.size(); ++i) {
        acc += lambdas(i);
        s(i) = acc;
    }
    return s;
}

Vector lambdas_from_partial_sums(const Vector& s) {
    Vector l(s.size());
    for (int i = 0; i < s.size(); ++i) l(i) = i == 0 ? s(0) : s(i) - s(i - 1);
    return l;
}

double psi_value(const SpectralObjective& obj, const Vector& s) {
    return obj.value(lambdas_from_partial_sums(s));
}

Vector psi_gradient(const SpectralObjective& obj, const Vector& s) {
    const Vector p = obj.gradient(lambdas_from_partial_sums(s));
    Vector g(p.size());
    for (int j = 0; j < p.size(); ++j)
        g(j) = j + 1 < p.size() ? p(j) - p(j + 1) : p(j);
    return g;
}

}  // namespace specflow
