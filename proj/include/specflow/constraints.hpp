#pragma once

#include <random>
#include <vector>

#include "specflow/measure_space.hpp"

namespace specflow {

enum class ConstraintKind { box_mean, psi_budget, tilted_box };
enum class PsiKind { exponential, inverse_power };

std::string to_string(ConstraintKind kind);

struct ProxResult {
    PotentialField V;
    int outer_iterations = 0;
    // inverse_power budgets exclude V = 0 pointwise; the prox clips at a
    // small positive floor and reports when the clip fired.
    bool positivity_floor_active = false;
};

// The confining functional K: a -theta-convex, lower semicontinuous
// functional whose domain forces V >= V_min componentwise. Three concrete
// kinds:
//   box_mean   : indicator of { V- <= V <= V+,  m-mean(V) >= v0 }
//   psi_budget : indicator of { V >= 0,  m-mean(Psi(V)) <= c } with
//                Psi(s) = e^{-beta s} or s^{-beta}
//   tilted_box : <a, V>_m - (theta/2) |V|_m^2 on the box, +inf off it
//                (theta > 0 exercises the quadratic-perturbation case)
class ConstraintFunctional {
  public:
    static ConstraintFunctional box_mean(double V_minus, double V_plus, double v0);
    static ConstraintFunctional psi_budget(PsiKind psi, double beta, double budget);
    static ConstraintFunctional tilted_box(double V_minus, double V_plus, Vector tilt,
                                           double theta);

    ConstraintKind kind() const { return kind_; }
    double theta() const { return theta_; }
    double V_min() const { return V_min_; }
    double box_lower() const { return V_minus_; }
    double box_upper() const { return V_plus_; }
    double mean_floor() const { return v0_; }
    PsiKind psi_kind() const { return psi_; }
    double psi_beta() const { return beta_; }
    double budget() const { return budget_; }
    double positivity_floor() const { return positivity_floor_; }

    bool contains(const Vector& V, const MeasureSpace& space, double feas_tol = 1e-9) const;
    // K(V); +inf outside the domain.
    double value(const PotentialField& V, double feas_tol = 1e-9) const;
    double value(const Vector& V, const MeasureSpace& space, double feas_tol = 1e-9) const;

    // Unique minimizer of K(V) + |V - W|_m^2 / (2 tau). For tilted_box this
    // needs tau * theta < 1.
    ProxResult prox(double tau, const PotentialField& W) const;

    // max over probes P of K(V) + <xi, P-V>_m - (theta/2)|P-V|_m^2 - K(P);
    // <= 0 (up to tolerance) certifies xi against the probe set.
    double subgradient_residual(const PotentialField& V, const Vector& xi,
                                const std::vector<Vector>& probes) const;

    // Random domain point. With force_boundary the draw starts outside the
    // domain and is projected back, so active constraints get exercised.
    Vector sample_domain(const MeasureSpace& space, std::mt19937_64& rng,
                         bool force_boundary = false) const;

    // sup |V|_m over the domain (infinite for psi_budget).
    double domain_bound(const MeasureSpace& space) const;
    // min of K over its domain (0 for the indicator kinds).
    double min_value(const MeasureSpace& space) const;

  private:
    ConstraintFunctional() = default;

    ConstraintKind kind_ = ConstraintKind::box_mean;
    double theta_ = 0.0;
    double V_min_ = 0.0;
    double V_minus_ = 0.0, V_plus_ = 0.0, v0_ = 0.0;  // box kinds
    PsiKind psi_ = PsiKind::exponential;
    double beta_ = 1.0, budget_ = 0.5;
    Vector tilt_;
    double positivity_floor_ = 1e-10;

    Vector prox_box_mean(const Vector& W, const MeasureSpace& space, int& iters) const;
    Vector prox_psi_budget(const Vector& W, const MeasureSpace& space, int& iters,
                           bool& floor_active) const;
    double psi(double s) const;
    double psi_prime(double s) const;
};

}  // namespace specflow
