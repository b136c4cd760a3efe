#include "specflow/constraints.hpp"

#include <cmath>
#include <utility>

namespace specflow {

namespace {

constexpr double kBracketWidth = 1e-12;  // absolute bisection bracket width

template <typename Derived>
Vector clip(const Eigen::ArrayBase<Derived>& a, double lo, double hi) {
    return a.max(lo).min(hi).matrix();
}

template <typename Derived>
Vector clip(const Eigen::MatrixBase<Derived>& v, double lo, double hi) {
    return clip(v.array(), lo, hi);
}

// Safeguarded Newton for a strictly increasing scalar function with a
// sign-changing bracket [lo, hi].
template <typename F, typename DF>
double newton_in_bracket(F f, DF df, double lo, double hi, const char* what) {
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fx = f(x);
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        const double dfx = df(x);
        double next = dfx > 0.0 ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-15 * (1.0 + std::abs(x))) return next;
        x = next;
    }
    if (hi - lo > 1e-9 * (1.0 + std::abs(x)))
        throw NumericError(std::string(what) + ": scalar root-find stalled, bracket width " +
                           std::to_string(hi - lo));
    return x;
}

}  // namespace

std::string to_string(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::box_mean: return "box_mean";
        case ConstraintKind::psi_budget: return "psi_budget";
        case ConstraintKind::tilted_box: return "tilted_box";
    }
    return "unknown";
}

ConstraintFunctional ConstraintFunctional::box_mean(double V_minus, double V_plus, double v0) {
    if (!(V_minus < V_plus))
        throw ConfigError("box_mean: needs V_minus < V_plus");
    if (v0 > V_plus)
        throw ConfigError("box_mean: empty domain (mean floor above V_plus)");
    ConstraintFunctional K;
    K.kind_ = ConstraintKind::box_mean;
    K.V_minus_ = V_minus;
    K.V_plus_ = V_plus;
    K.v0_ = v0;
    K.V_min_ = V_minus;
    K.theta_ = 0.0;
    return K;
}

ConstraintFunctional ConstraintFunctional::psi_budget(PsiKind psi, double beta, double budget) {
    if (!(beta > 0.0)) throw ConfigError("psi_budget: beta must be > 0");
    if (psi == PsiKind::exponential && !(budget > 0.0 && budget < 1.0))
        throw ConfigError("psi_budget: exponential budget must satisfy 0 < c < 1");
    if (psi == PsiKind::inverse_power && !(budget > 0.0))
        throw ConfigError("psi_budget: inverse-power budget must satisfy c > 0");
    ConstraintFunctional K;
    K.kind_ = ConstraintKind::psi_budget;
    K.psi_ = psi;
    K.beta_ = beta;
    K.budget_ = budget;
    K.V_min_ = 0.0;
    K.theta_ = 0.0;
    return K;
}

ConstraintFunctional ConstraintFunctional::tilted_box(double V_minus, double V_plus, Vector tilt,
                                                      double theta) {
    if (!(V_minus < V_plus))
        throw ConfigError("tilted_box: needs V_minus < V_plus");
    if (theta < 0.0) throw ConfigError("tilted_box: theta must be >= 0");
    ConstraintFunctional K;
    K.kind_ = ConstraintKind::tilted_box;
    K.V_minus_ = V_minus;
    K.V_plus_ = V_plus;
    K.tilt_ = std::move(tilt);
    K.theta_ = theta;
    K.V_min_ = V_minus;
    return K;
}

double ConstraintFunctional::psi(double s) const {
    return psi_ == PsiKind::exponential ? std::exp(-beta_ * s) : std::pow(s, -beta_);
}

double ConstraintFunctional::psi_prime(double s) const {
    return psi_ == PsiKind::exponential ? -beta_ * std::exp(-beta_ * s)
                                        : -beta_ * std::pow(s, -beta_ - 1.0);
}

bool ConstraintFunctional::contains(const Vector& V, const MeasureSpace& space,
                                    double feas_tol) const {
    switch (kind_) {
        case ConstraintKind::box_mean:
            return V.minCoeff() >= V_minus_ - feas_tol && V.maxCoeff() <= V_plus_ + feas_tol &&
                   weighted_mean(V, space) >= v0_ - feas_tol;
        case ConstraintKind::psi_budget: {
            if (V.minCoeff() < -feas_tol) return false;
            if (psi_ == PsiKind::inverse_power && V.minCoeff() <= 0.0) return false;
            double acc = 0.0;
            for (int i = 0; i < V.size(); ++i) acc += space.weight(i) * psi(std::max(V(i), 0.0));
            return acc / space.total_mass() <= budget_ + feas_tol * std::max(1.0, budget_);
        }
        case ConstraintKind::tilted_box:
            return V.minCoeff() >= V_minus_ - feas_tol && V.maxCoeff() <= V_plus_ + feas_tol;
    }
    return false;
}

double ConstraintFunctional::value(const Vector& V, const MeasureSpace& space,
                                   double feas_tol) const {
    if (!contains(V, space, feas_tol)) return kInf;
    if (kind_ != ConstraintKind::tilted_box) return 0.0;
    if (tilt_.size() != V.size())
        throw std::invalid_argument("tilted_box: tilt/potential dimension mismatch");
    return inner_product(tilt_, V, space) - 0.5 * theta_ * inner_product(V, V, space);
}

double ConstraintFunctional::value(const PotentialField& V, double feas_tol) const {
    return value(V.values, *V.space, feas_tol);
}

// KKT structure of the projection onto {box, m-mean >= v0}: the m-weights
// cancel and the solution is clip(W + mu, V-, V+) with a scalar shift
// mu >= 0, mu = 0 when the mean is already at or above the floor, and
// mean = v0 exactly otherwise.
Vector ConstraintFunctional::prox_box_mean(const Vector& W, const MeasureSpace& space,
                                           int& iters) const {
    Vector clipped = clip(W, V_minus_, V_plus_);
    if (weighted_mean(clipped, space) >= v0_) return clipped;

    auto deficit = [&](double mu) {
        return weighted_mean(clip(W.array() + mu, V_minus_, V_plus_), space) - v0_;
    };
    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (deficit(hi) < 0.0) {
        hi *= 2.0;
        if (++guard > 200) throw NumericError("box_mean prox: shift bracket did not close");
    }
    while (hi - lo > kBracketWidth) {
        const double mid = 0.5 * (lo + hi);
        (deficit(mid) < 0.0 ? lo : hi) = mid;
        ++iters;
    }
    double mu = hi;

    // Exact linear solve on the free set identified by the bracket, so the
    // active mean lands on v0 to machine precision.
    const Vector& m = space.weights();
    double fixed_sum = 0.0, free_mass = 0.0, free_w_sum = 0.0;
    for (int i = 0; i < W.size(); ++i) {
        const double shifted = W(i) + mu;
        if (shifted <= V_minus_)
            fixed_sum += m(i) * V_minus_;
        else if (shifted >= V_plus_)
            fixed_sum += m(i) * V_plus_;
        else {
            free_mass += m(i);
            free_w_sum += m(i) * W(i);
        }
    }
    if (free_mass > 0.0) {
        const double mu_star = (v0_ * space.total_mass() - fixed_sum - free_w_sum) / free_mass;
        if (mu_star >= lo - 1e-9 && mu_star <= hi + 1e-9) mu = std::max(mu_star, 0.0);
    }
    return clip(W.array() + mu, V_minus_, V_plus_);
}

// Projection onto { V >= 0, m-mean Psi(V) <= c }. With the budget active,
// each component solves V_i = W_i - mu (Psi'(V_i)) / total_mass (the
// m-weights cancel against the mean), clipped at the bound, and the scalar
// multiplier is driven to the budget by bisection plus a Newton polish.
Vector ConstraintFunctional::prox_psi_budget(const Vector& W, const MeasureSpace& space,
                                             int& iters, bool& floor_active) const {
    const double eps = positivity_floor_;
    const Vector start =
        psi_ == PsiKind::inverse_power ? clip(W, eps, kInf) : clip(W, 0.0, kInf);
    double start_budget = 0.0;
    for (int i = 0; i < start.size(); ++i) start_budget += space.weight(i) * psi(start(i));
    if (start_budget / space.total_mass() <= budget_) {
        if (psi_ == PsiKind::inverse_power && (W.array() < eps).any()) floor_active = true;
        return start;
    }

    const double total = space.total_mass();
    bool local_floor = false;

    // V_i as a function of the scaled multiplier mu_t = mu / total_mass.
    auto component = [&](double w, double mu_t) -> double {
        if (psi_ == PsiKind::exponential) {
            // F(V) = V - w - mu_t beta e^{-beta V}; root <= 0 means the
            // positivity bound is active.
            if (-w - mu_t * beta_ >= 0.0) return 0.0;
            auto f = [&](double v) { return v - w - mu_t * beta_ * std::exp(-beta_ * v); };
            auto df = [&](double v) { return 1.0 + mu_t * beta_ * beta_ * std::exp(-beta_ * v); };
            return newton_in_bracket(f, df, 0.0, std::max(w + mu_t * beta_, 1e-300),
                                     "psi_budget prox (exponential)");
        }
        auto f = [&](double v) { return v - w - mu_t * beta_ * std::pow(v, -beta_ - 1.0); };
        auto df = [&](double v) {
            return 1.0 + mu_t * beta_ * (beta_ + 1.0) * std::pow(v, -beta_ - 2.0);
        };
        if (f(eps) >= 0.0) {  // root at or below the positivity floor
            local_floor = true;
            return eps;
        }
        return newton_in_bracket(f, df, eps, std::max(1.0, w + mu_t * beta_ * std::pow(eps, -beta_ - 1.0)),
                                 "psi_budget prox (inverse power)");
    };
    auto solve_all = [&](double mu_t) {
        Vector V(W.size());
        for (int i = 0; i < W.size(); ++i) V(i) = component(W(i), mu_t);
        return V;
    };
    auto excess = [&](double mu_t) {
        const Vector V = solve_all(mu_t);
        double acc = 0.0;
        for (int i = 0; i < V.size(); ++i) acc += space.weight(i) * psi(V(i));
        return acc / total - budget_;
    };

    double lo = 0.0, hi = 1.0;
    int guard = 0;
    while (excess(hi) > 0.0) {
        hi *= 2.0;
        if (++guard > 400) throw NumericError("psi_budget prox: multiplier bracket did not close");
    }
    while (hi - lo > kBracketWidth) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
        ++iters;
    }
    double mu_t = hi;

    // Newton polish of the budget equation; dV/dmu_t = -Psi'(V) / (1 + mu_t Psi''(V)).
    for (int it = 0; it < 6; ++it) {
        const Vector V = solve_all(mu_t);
        double g = 0.0, dg = 0.0;
        for (int i = 0; i < V.size(); ++i) {
            const double w = space.weight(i) / total;
            g += w * psi(V(i));
            const bool clipped = (psi_ == PsiKind::exponential && V(i) == 0.0) ||
                                 (psi_ == PsiKind::inverse_power && V(i) == eps);
            if (clipped) continue;
            const double dpsi = psi_prime(V(i));
            const double d2psi = psi_ == PsiKind::exponential
                                     ? beta_ * beta_ * std::exp(-beta_ * V(i))
                                     : beta_ * (beta_ + 1.0) * std::pow(V(i), -beta_ - 2.0);
            dg += w * dpsi * (-dpsi) / (1.0 + mu_t * d2psi);
        }
        g -= budget_;
        if (std::abs(g) <= 1e-14 * std::max(1.0, budget_) || dg >= 0.0) break;
        double next = mu_t - g / dg;
        if (!(next > 0.0)) break;
        mu_t = next;
        ++iters;
    }

    floor_active = floor_active || local_floor;
    return solve_all(mu_t);
}

ProxResult ConstraintFunctional::prox(double tau, const PotentialField& W) const {
    if (!(tau > 0.0)) throw std::invalid_argument("prox: tau must be > 0");
    const MeasureSpace& space = *W.space;
    int iters = 0;
    bool floor_active = false;
    Vector V;
    switch (kind_) {
        case ConstraintKind::box_mean:
            V = prox_box_mean(W.values, space, iters);
            break;
        case ConstraintKind::psi_budget:
            V = prox_psi_budget(W.values, space, iters, floor_active);
            break;
        case ConstraintKind::tilted_box: {
            if (tau * theta_ >= 1.0)
                throw std::invalid_argument("tilted_box prox: needs tau * theta < 1");
            if (tilt_.size() != W.values.size())
                throw std::invalid_argument("tilted_box prox: tilt dimension mismatch");
            // Per-component quadratic: minimizer (W - tau a) / (1 - tau theta),
            // clipped to the box.
            V = clip((W.values - tau * tilt_) / (1.0 - tau * theta_), V_minus_, V_plus_);
            break;
        }
    }
    return ProxResult{PotentialField(std::move(V), W.space, V_min_), iters, floor_active};
}

double ConstraintFunctional::subgradient_residual(const PotentialField& V, const Vector& xi,
                                                  const std::vector<Vector>& probes) const {
    const MeasureSpace& space = *V.space;
    const double KV = value(V);
    if (!std::isfinite(KV))
        throw std::invalid_argument("subgradient_residual: base point outside the domain");
    double worst = -kInf;
    for (const Vector& P : probes) {
        const double KP = value(P, space);
        if (!std::isfinite(KP)) continue;  // probes are expected to be domain points
        const Vector diff = P - V.values;
        const double lhs = KV + inner_product(xi, diff, space) -
                           0.5 * theta_ * inner_product(diff, diff, space);
        worst = std::max(worst, lhs - KP);
    }
    return worst;
}

Vector ConstraintFunctional::sample_domain(const MeasureSpace& space, std::mt19937_64& rng,
                                           bool force_boundary) const {
    const int d = space.size();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    switch (kind_) {
        case ConstraintKind::box_mean: {
            const double span = V_plus_ - V_minus_;
            const double inflate = force_boundary ? span : 0.0;
            Vector V(d);
            for (int i = 0; i < d; ++i)
                V(i) = V_minus_ - inflate + (span + 2.0 * inflate) * unif(rng);
            if (force_boundary || !contains(V, space))
                V = prox(1.0, PotentialField(V, std::make_shared<MeasureSpace>(space.weights())))
                        .V.values;
            return V;
        }
        case ConstraintKind::psi_budget: {
            // Componentwise Psi(V_i) <= c by construction: shift the level
            // set value of the budget upward by an exponential tail.
            const double level = psi_ == PsiKind::exponential ? -std::log(budget_) / beta_
                                                              : std::pow(budget_, -1.0 / beta_);
            std::exponential_distribution<double> tail(1.0);
            Vector V(d);
            for (int i = 0; i < d; ++i) {
                const double e = tail(rng);
                V(i) = psi_ == PsiKind::exponential ? level + e / beta_ : level * (1.0 + e);
            }
            if (force_boundary) {
                Vector W = V.array() - (0.5 * level + 1.0);
                V = prox(1.0, PotentialField(W, std::make_shared<MeasureSpace>(space.weights())))
                        .V.values;
            }
            return V;
        }
        case ConstraintKind::tilted_box: {
            Vector V(d);
            for (int i = 0; i < d; ++i) V(i) = V_minus_ + (V_plus_ - V_minus_) * unif(rng);
            if (force_boundary) {
                std::uniform_int_distribution<int> pick(0, d - 1);
                V(pick(rng)) = unif(rng) < 0.5 ? V_minus_ : V_plus_;
            }
            return V;
        }
    }
    throw std::logic_error("sample_domain: unknown kind");
}

double ConstraintFunctional::domain_bound(const MeasureSpace& space) const {
    if (kind_ == ConstraintKind::psi_budget) return kInf;
    const double extreme = std::max(std::abs(V_minus_), std::abs(V_plus_));
    return extreme * std::sqrt(space.total_mass());
}

double ConstraintFunctional::min_value(const MeasureSpace& space) const {
    if (kind_ != ConstraintKind::tilted_box) return 0.0;
    if (tilt_.size() != space.size())
        throw std::invalid_argument("tilted_box: tilt/space dimension mismatch");
    double acc = 0.0;
    for (int i = 0; i < space.size(); ++i) {
        const double at_lo = tilt_(i) * V_minus_ - 0.5 * theta_ * V_minus_ * V_minus_;
        const double at_hi = tilt_(i) * V_plus_ - 0.5 * theta_ * V_plus_ * V_plus_;
        acc += space.weight(i) * std::min(at_lo, at_hi);
    }
    return acc;
}

}  // namespace specflow
