#include "specflow/flow.hpp"

#include <cmath>
#include <sstream>

namespace specflow {

namespace {

struct Energy {
    Spectrum spectrum;
    double H;
    double K;
    double F;
};

Energy evaluate(const BilinearForm& form, const ConstraintFunctional& K,
                const SpectralObjective& obj, const Vector& V, const FlowConfig& cfg) {
    const int count = std::min(obj.J + 1, form.size());
    PotentialField field(V, form.space(), K.V_min());
    Spectrum spec = eigensolve(form, field, count, cfg.cluster_tol);
    const double H = spectral_H(spec, obj);
    const double Kv = K.value(field);
    return Energy{std::move(spec), H, Kv, H + Kv};
}

std::vector<Vector> domain_probes(const ConstraintFunctional& K, const MeasureSpace& space,
                                  int count, std::mt19937_64& rng) {
    std::vector<Vector> probes;
    probes.reserve(count);
    for (int i = 0; i < count; ++i)
        probes.push_back(K.sample_domain(space, rng, /*force_boundary=*/i % 2 == 0));
    return probes;
}

}  // namespace

Vector FlowTrajectory::piecewise_constant(double t) const {
    if (t <= times.front()) return snapshots.front();
    if (t >= times.back()) return snapshots.back();
    const auto n = static_cast<std::size_t>(std::ceil((t - times.front()) / tau - 1e-12));
    return snapshots[std::min(n, snapshots.size() - 1)];
}

Vector FlowTrajectory::piecewise_linear(double t) const {
    if (t <= times.front()) return snapshots.front();
    if (t >= times.back()) return snapshots.back();
    const auto n = static_cast<std::size_t>(std::ceil((t - times.front()) / tau - 1e-12));
    const std::size_t hi = std::min(n, snapshots.size() - 1);
    const double w = (times[hi] - t) / tau;
    return w * snapshots[hi - 1] + (1.0 - w) * snapshots[hi];
}

double FlowTrajectory::edi_residual_decreasing() const {
    if (steps.empty()) return 0.0;
    return steps.back().F - F0 + total_dissipation();
}

double FlowTrajectory::edi_residual_increasing() const {
    if (steps.empty()) return 0.0;
    return steps.back().F - F0 - total_dissipation();
}

double FlowTrajectory::total_dissipation() const {
    double acc = 0.0;
    for (const auto& s : steps) acc += s.step_norm * s.step_norm / tau;
    return acc;
}

double FlowTrajectory::max_stationarity_residual() const {
    double worst = 0.0;
    for (const auto& s : steps) worst = std::max(worst, s.stationarity_residual);
    return worst;
}

InnerSolveResult mm_inner_solve(const BilinearForm& form, const ConstraintFunctional& K,
                                const SpectralObjective& obj, double tau,
                                const PotentialField& V_prev, const FlowConfig& cfg,
                                std::mt19937_64& rng) {
    const MeasureSpace& space = *form.space();
    if (!(tau > 0.0)) throw std::invalid_argument("mm_inner_solve: tau must be > 0");
    if (tau * K.theta() >= 1.0)
        throw std::invalid_argument("mm_inner_solve: needs tau * theta < 1");
    if (!std::isfinite(K.value(V_prev)))
        throw std::invalid_argument("mm_inner_solve: previous iterate outside the domain");

    auto movement = [&](const Vector& W) {
        const double d = dist_m(W, V_prev.values, space);
        return d * d / (2.0 * tau);
    };

    Vector W = V_prev.values;
    Energy cur = evaluate(form, K, obj, W, cfg);
    double phi = cur.F + movement(W);

    int iterations = 0;
    bool converged = false;
    bool restarted = false;
    bool floor_hit = false;

    for (int sweep = 0; sweep < cfg.inner_max_iters; ++sweep) {
        const SubgradientSelection sel = subgradient_xi(cur.spectrum, obj);
        const Vector target = V_prev.values - tau * sel.xi.values;
        const ProxResult prox_step = K.prox(tau, PotentialField(target, V_prev.space, K.V_min()));
        floor_hit = floor_hit || prox_step.positivity_floor_active;
        const Vector& P = prox_step.V.values;

        bool accepted = false;
        Vector cand;
        Energy cand_energy = cur;
        double cand_phi = phi;
        for (double damping = 1.0; damping >= 0x1p-40; damping *= 0.5) {
            cand = W + damping * (P - W);
            cand_energy = evaluate(form, K, obj, cand, cfg);
            cand_phi = cand_energy.F + movement(cand);
            if (cand_phi <= phi + 1e-12) {
                accepted = true;
                break;
            }
        }

        if (!accepted) {
            // A frame-dependent selection at a degenerate spectrum can point
            // the very first sweep uphill; retry once from a nearby point.
            if (sweep == 0 && !restarted) {
                restarted = true;
                std::normal_distribution<double> noise(0.0, 1.0);
                Vector jitter(W.size());
                for (int i = 0; i < W.size(); ++i) jitter(i) = noise(rng);
                const double scale = std::max(cfg.inner_tol, 1e-8) * std::max(1.0, norm_m(W, space));
                const Vector nudged = V_prev.values + scale * jitter;
                const ProxResult restart_prox =
                    K.prox(tau, PotentialField(nudged, V_prev.space, K.V_min()));
                floor_hit = floor_hit || restart_prox.positivity_floor_active;
                W = restart_prox.V.values;
                cur = evaluate(form, K, obj, W, cfg);
                phi = cur.F + movement(W);
                continue;
            }
            break;
        }

        const double step = dist_m(cand, W, space);
        W = cand;
        cur = cand_energy;
        phi = cand_phi;
        ++iterations;
        if (step <= cfg.inner_tol) {
            converged = true;
            break;
        }
    }

    // Fixed-point residual of the final iterate.
    const SubgradientSelection sel = subgradient_xi(cur.spectrum, obj);
    const Vector target = V_prev.values - tau * sel.xi.values;
    const ProxResult fixed_point = K.prox(tau, PotentialField(target, V_prev.space, K.V_min()));
    floor_hit = floor_hit || fixed_point.positivity_floor_active;
    const double residual = dist_m(W, fixed_point.V.values, space);

    InnerSolveResult res{PotentialField(W, V_prev.space, K.V_min()),
                         residual,
                         iterations,
                         converged,
                         std::move(cur.spectrum),
                         cur.H,
                         cur.K,
                         phi,
                         floor_hit};
    return res;
}

double stationarity_residual(const PotentialField& V_n, const PotentialField& V_prev, double tau,
                             const BilinearForm& form, const ConstraintFunctional& K,
                             const SpectralObjective& obj, int probes, std::mt19937_64& rng,
                             const ClusterTolerance& ctol) {
    const MeasureSpace& space = *form.space();
    const int count = std::min(obj.J + 1, form.size());
    const Spectrum spec = eigensolve(form, V_n, count, ctol);
    const SubgradientSelection sel = subgradient_xi(spec, obj);
    const Vector xi_K = -(V_n.values - V_prev.values) / tau - sel.xi.values;
    return K.subgradient_residual(V_n, xi_K, domain_probes(K, space, probes, rng));
}

FlowTrajectory run_flow(const BilinearForm& form, const ConstraintFunctional& K,
                        const SpectralObjective& obj, const PotentialField& V0,
                        const FlowConfig& cfg) {
    const MeasureSpace& space = *form.space();
    if (!(cfg.tau > 0.0) || !(cfg.T > 0.0))
        throw ConfigError("run_flow: tau and T must be positive");
    if (cfg.tau * K.theta() >= 1.0)
        throw ConfigError("run_flow: needs tau * theta < 1");
    if (obj.J + 1 > form.size())
        throw ConfigError("run_flow: needs J + 1 <= d eigenvalues");
    if (!std::isfinite(K.value(V0)))
        throw ConfigError("run_flow: initial potential outside the constraint domain");

    const int N = static_cast<int>(std::ceil(cfg.T / cfg.tau - 1e-12));
    std::mt19937_64 rng(cfg.seed);

    FlowTrajectory traj;
    traj.tau = cfg.tau;
    traj.T = cfg.T;
    traj.space = form.space();
    traj.times.push_back(0.0);
    traj.snapshots.push_back(V0.values);

    Energy prev = evaluate(form, K, obj, V0.values, cfg);
    traj.F0 = prev.F;

    PotentialField V_prev(V0.values, form.space(), K.V_min());
    for (int n = 1; n <= N; ++n) {
        InnerSolveResult inner = mm_inner_solve(form, K, obj, cfg.tau, V_prev, cfg, rng);

        StepRecord rec;
        rec.t = n * cfg.tau;
        rec.H = inner.H;
        rec.K = inner.K;
        rec.F = inner.H + inner.K;
        rec.lambdas = inner.spectrum.lambdas;
        rec.step_norm = dist_m(inner.V.values, V_prev.values, space);
        rec.inner_iterations = inner.iterations;
        rec.inner_residual = inner.residual;
        rec.inner_converged = inner.converged;
        rec.energy_residual =
            rec.F + rec.step_norm * rec.step_norm / (2.0 * cfg.tau) - prev.F;
        rec.gap_ok =
            inner.spectrum.count >= obj.J + 1 && interior_gap_ok(inner.spectrum, obj.J);

        const SubgradientSelection sel = subgradient_xi(inner.spectrum, obj);
        const Vector xi_K = -(inner.V.values - V_prev.values) / cfg.tau - sel.xi.values;
        rec.stationarity_residual = K.subgradient_residual(
            inner.V, xi_K, domain_probes(K, space, cfg.stationarity_probes, rng));

        if (inner.positivity_floor_hit) {
            std::ostringstream msg;
            msg << "step " << n << ": projection clipped at the positivity floor "
                << K.positivity_floor();
            traj.warnings.push_back(msg.str());
        }
        if (!inner.converged) {
            std::ostringstream msg;
            msg << "step " << n << ": inner solve hit the iteration cap, fixed-point residual "
                << inner.residual;
            traj.warnings.push_back(msg.str());
        }
        if (rec.energy_residual > 1e-9) {
            std::ostringstream msg;
            msg << "step " << n << ": one-step energy inequality violated by "
                << rec.energy_residual;
            traj.warnings.push_back(msg.str());
        }
        if (rec.F > traj.F0 + 1e-9) {
            std::ostringstream msg;
            msg << "step " << n << ": F exceeded its initial value by " << rec.F - traj.F0;
            traj.warnings.push_back(msg.str());
        }

        traj.times.push_back(rec.t);
        traj.snapshots.push_back(inner.V.values);
        traj.steps.push_back(std::move(rec));

        V_prev = inner.V;
        prev = Energy{std::move(inner.spectrum), inner.H, inner.K, inner.H + inner.K};
    }
    return traj;
}

double inner_global_gap_debug(const BilinearForm& form, const ConstraintFunctional& K,
                              const SpectralObjective& obj, double tau,
                              const PotentialField& V_prev, const PotentialField& candidate,
                              int points_per_axis) {
    const int d = form.size();
    if (d > 3)
        throw std::invalid_argument("inner_global_gap_debug: grid search only supports d <= 3");
    if (K.kind() == ConstraintKind::psi_budget)
        throw std::invalid_argument("inner_global_gap_debug: needs a box-bounded constraint");
    const MeasureSpace& space = *form.space();
    const double lo = K.box_lower(), hi = K.box_upper();
    FlowConfig cfg;

    auto phi_at = [&](const Vector& W) {
        const double KW = K.value(W, space);
        if (!std::isfinite(KW)) return kInf;
        PotentialField field(W, form.space(), K.V_min());
        const Spectrum spec = eigensolve(form, field, std::min(obj.J + 1, d), cfg.cluster_tol);
        const double move = dist_m(W, V_prev.values, space);
        return spectral_H(spec, obj) + KW + move * move / (2.0 * tau);
    };

    double best = phi_at(candidate.values);
    const double cand_phi = best;
    Vector W(d);
    std::vector<int> idx(d, 0);
    const long total = static_cast<long>(std::pow(points_per_axis, d));
    for (long c = 0; c < total; ++c) {
        long rest = c;
        for (int i = 0; i < d; ++i) {
            idx[i] = static_cast<int>(rest % points_per_axis);
            rest /= points_per_axis;
            W(i) = lo + (hi - lo) * idx[i] / (points_per_axis - 1);
        }
        best = std::min(best, phi_at(W));
    }
    return cand_phi - best;
}

double apriori_norm_bound(const BilinearForm& form, const ConstraintFunctional& K,
                          const SpectralObjective& obj, const PotentialField& V0,
                          const FlowConfig& cfg) {
    const MeasureSpace& space = *form.space();
    const double lambda_min = form.alpha() + K.V_min();
    const Vector floor_point = Vector::Constant(obj.J, lambda_min);
    const double F_lb = obj.value(floor_point) + K.min_value(space);
    const Energy e0 = evaluate(form, K, obj, V0.values, cfg);
    const double gap = std::max(0.0, e0.F - F_lb);
    return norm_m(V0.values, space) + std::sqrt(2.0 * (cfg.T + cfg.tau) * gap);
}

}  // namespace specflow
