#pragma once

#include "specflow/constraints.hpp"
#include "specflow/objectives.hpp"

namespace specflow {

struct FlowConfig {
    double tau = 0.01;
    double T = 1.0;
    int inner_max_iters = 200;
    double inner_tol = 1e-10;  // fixed-point residual, m-metric
    ClusterTolerance cluster_tol;
    int record_every = 1;
    std::uint64_t seed = 0;
    int stationarity_probes = 200;
};

struct StepRecord {
    double t = 0.0;
    double F = 0.0, H = 0.0, K = 0.0;
    Vector lambdas;                      // leading eigenvalues at V^n (J+1)
    double step_norm = 0.0;              // |V^n - V^{n-1}|_m
    double stationarity_residual = 0.0;  // certificate for xi_K = -dV/tau - xi_H
    bool gap_ok = false;                 // strict interior gap at this step
    int inner_iterations = 0;
    double inner_residual = 0.0;
    bool inner_converged = true;
    // F(V^n) + |dV|^2/(2 tau) - F(V^{n-1}); minimality makes this <= 0 up
    // to the inner acceptance slack.
    double energy_residual = 0.0;
};

struct FlowTrajectory {
    double tau = 0.0;
    double T = 0.0;
    std::vector<double> times;      // t_0 .. t_N
    std::vector<Vector> snapshots;  // V^0 .. V^N
    std::vector<StepRecord> steps;  // one per movement
    SpacePtr space;
    double F0 = 0.0;
    std::vector<std::string> warnings;

    int step_count() const { return static_cast<int>(steps.size()); }
    const Vector& terminal() const { return snapshots.back(); }

    // Signed residuals of the two sign conventions of the energy identity
    // F(V_N) = F(V_0) -/+ total dissipation. The decreasing convention is
    // the one the per-step minimality inequality enforces; both are
    // reported so the conventions can be compared on real runs.
    double edi_residual_decreasing() const;  // F_N - F_0 + dissipation
    double edi_residual_increasing() const;  // F_N - F_0 - dissipation

    // The two interpolants of the discrete values: piecewise constant
    // (right-continuous value V^n on (t_{n-1}, t_n]) and piecewise linear.
    Vector piecewise_constant(double t) const;
    Vector piecewise_linear(double t) const;

    // sum_n tau |dV^n / tau|_m^2
    double total_dissipation() const;
    double max_stationarity_residual() const;
};

struct InnerSolveResult {
    PotentialField V;
    double residual = 0.0;  // |V - prox(tau, V_prev - tau xi(V))|_m
    int iterations = 0;
    bool converged = true;
    Spectrum spectrum;  // at V, J+1 deep when the space allows
    double H = 0.0, K = 0.0;
    double phi = 0.0;                    // F(V) + |V - V_prev|^2/(2 tau)
    bool positivity_floor_hit = false;   // any inner projection clipped at the floor
};

// One implicit step: minimize F(W) + |W - V_prev|_m^2/(2 tau) by
// majorize-minimize. Each sweep linearizes the spectral term at the
// current iterate through one subgradient selection, solves the resulting
// prox problem, and keeps the result only if the true objective decreased
// (backtracking on the segment towards the prox point otherwise, with one
// perturbed restart if the very first sweep cannot descend).
InnerSolveResult mm_inner_solve(const BilinearForm& form, const ConstraintFunctional& K,
                                const SpectralObjective& obj, double tau,
                                const PotentialField& V_prev, const FlowConfig& cfg,
                                std::mt19937_64& rng);

FlowTrajectory run_flow(const BilinearForm& form, const ConstraintFunctional& K,
                        const SpectralObjective& obj, const PotentialField& V0,
                        const FlowConfig& cfg);

// Certificate that xi_K := -(V_n - V_prev)/tau - xi_H lies in the
// subdifferential of K at V_n, probed against `probes` random domain
// points (half of them pushed to active constraints).
double stationarity_residual(const PotentialField& V_n, const PotentialField& V_prev, double tau,
                             const BilinearForm& form, const ConstraintFunctional& K,
                             const SpectralObjective& obj, int probes, std::mt19937_64& rng,
                             const ClusterTolerance& ctol = {});

// Computable trajectory norm bound |V^n|_m <= |V0|_m + sqrt(2 (T+tau) (F(V0) - F_lb))
// from the step minimality, with F_lb = phi(lambda_min, ..., lambda_min) +
// min K. Valid for objectives satisfying the structural gradient condition.
double apriori_norm_bound(const BilinearForm& form, const ConstraintFunctional& K,
                          const SpectralObjective& obj, const PotentialField& V0,
                          const FlowConfig& cfg);

// Debug check for tiny instances (d <= 3, box-bounded constraints): the gap
// Phi(candidate) - min over a refined grid of Phi. The inner solve does not
// certify global minimality, so this is the honest way to inspect it.
double inner_global_gap_debug(const BilinearForm& form, const ConstraintFunctional& K,
                              const SpectralObjective& obj, double tau,
                              const PotentialField& V_prev, const PotentialField& candidate,
                              int points_per_axis = 61);

}  // namespace specflow
