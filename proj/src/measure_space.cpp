#include "specflow/measure_space.hpp"

#include <cmath>
#include <utility>

namespace specflow {

namespace {

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b)
        throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                    std::to_string(a) + " vs " + std::to_string(b) + ")");
}

}  // namespace

MeasureSpace::MeasureSpace(Vector weights) : m_(std::move(weights)) {
    if (m_.size() < 1)
        throw std::invalid_argument("MeasureSpace: needs at least one point");
    if ((m_.array() <= 0.0).any())
        throw std::invalid_argument("MeasureSpace: all weights must be strictly positive");
    total_mass_ = m_.sum();
}

std::shared_ptr<const MeasureSpace> MeasureSpace::uniform(int d, double w) {
    return std::make_shared<const MeasureSpace>(Vector::Constant(d, w));
}

PotentialField::PotentialField(Vector v, SpacePtr s, double vmin)
    : values(std::move(v)), space(std::move(s)), lower_bound(vmin) {
    require_same_dim(values.size(), space->size(), "PotentialField");
}

PotentialField::PotentialField(Vector v, SpacePtr s)
    : PotentialField(std::move(v), std::move(s), 0.0) {
    lower_bound = values.minCoeff();
}

bool PotentialField::admissible(double tol) const {
    return values.minCoeff() >= lower_bound - tol;
}

StateVector::StateVector(Vector v, SpacePtr s) : values(std::move(v)), space(std::move(s)) {
    require_same_dim(values.size(), space->size(), "StateVector");
}

bool StateVector::normalized(double tol) const {
    return std::abs(inner_product(values, values, *space) - 1.0) <= tol;
}

double inner_product(const Vector& u, const Vector& v, const MeasureSpace& space) {
    require_same_dim(u.size(), v.size(), "inner_product");
    require_same_dim(u.size(), space.weights().size(), "inner_product");
    return (space.weights().array() * u.array() * v.array()).sum();
}

double inner_product(const StateVector& u, const StateVector& v, const MeasureSpace& space) {
    return inner_product(u.values, v.values, space);
}

double norm_m(const Vector& u, const MeasureSpace& space) {
    return std::sqrt(inner_product(u, u, space));
}

double dist_m(const Vector& u, const Vector& v, const MeasureSpace& space) {
    require_same_dim(u.size(), v.size(), "dist_m");
    return norm_m(u - v, space);
}

double weighted_mean(const Vector& v, const MeasureSpace& space) {
    require_same_dim(v.size(), space.weights().size(), "weighted_mean");
    return space.weights().dot(v) / space.total_mass();
}

double weighted_mean(const PotentialField& V) {
    return weighted_mean(V.values, *V.space);
}

}  // namespace specflow
