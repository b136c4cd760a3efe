#pragma once

#include <memory>

#include "specflow/common.hpp"

namespace specflow {

// Finite measure space (D, m): D = {0, ..., d-1} with a strictly positive
// weight m_i on every point. All geometry in the library (inner products,
// norms, gradients, proximal maps) lives in the weighted metric
//   <u, v> = sum_i m_i u_i v_i,
// never in the raw Euclidean one; m == 1 recovers the Euclidean case.
class MeasureSpace {
  public:
    explicit MeasureSpace(Vector weights);

    int size() const { return static_cast<int>(m_.size()); }
    const Vector& weights() const { return m_; }
    double weight(int i) const { return m_(i); }
    double total_mass() const { return total_mass_; }

    static std::shared_ptr<const MeasureSpace> uniform(int d, double w = 1.0);

  private:
    Vector m_;
    double total_mass_;
};

using SpacePtr = std::shared_ptr<const MeasureSpace>;

// A potential on D. lower_bound is the constant the potential is measured
// against when asking for admissibility (V_i >= lower_bound everywhere).
struct PotentialField {
    Vector values;
    SpacePtr space;
    double lower_bound;

    PotentialField(Vector v, SpacePtr s, double vmin);
    // lower_bound defaults to the actual minimum, so the field is
    // trivially admissible against itself.
    PotentialField(Vector v, SpacePtr s);

    int size() const { return static_cast<int>(values.size()); }
    bool admissible(double tol = 0.0) const;
};

// A state (e.g. an eigenfunction) on D.
struct StateVector {
    Vector values;
    SpacePtr space;

    StateVector(Vector v, SpacePtr s);

    int size() const { return static_cast<int>(values.size()); }
    // <u, u> == 1 within tol.
    bool normalized(double tol = 1e-10) const;
};

// <u, v> = sum_i m_i u_i v_i. Throws std::invalid_argument on a dimension
// mismatch.
double inner_product(const Vector& u, const Vector& v, const MeasureSpace& space);
double inner_product(const StateVector& u, const StateVector& v, const MeasureSpace& space);

double norm_m(const Vector& u, const MeasureSpace& space);
double dist_m(const Vector& u, const Vector& v, const MeasureSpace& space);

// m-average of a potential: sum_i m_i V_i / sum_i m_i.
double weighted_mean(const Vector& v, const MeasureSpace& space);
double weighted_mean(const PotentialField& V);

}  // namespace specflow
