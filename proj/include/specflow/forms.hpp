#pragma once

#include <string>

#include "specflow/measure_space.hpp"

namespace specflow {

enum class OperatorKind {
    path_dirichlet,
    path_neumann,
    grid2d_dirichlet,
    weighted_edge,
    fractional,
    dense,
};

std::string to_string(OperatorKind kind);

// Recipe for build_operator. Only the fields relevant to `kind` are read:
//   path_dirichlet / path_neumann : n (nodes), h (mesh width)
//   grid2d_dirichlet              : n (interior nodes per side), h
//   weighted_edge                 : n, h, edge_coeffs (n+1 per-edge values,
//                                   Dirichlet path; all-ones == path_dirichlet)
//   fractional                    : exponent s in (0,1) plus a base recipe
//   dense                         : matrix (symmetrized and validated)
struct OperatorSpec {
    OperatorKind kind = OperatorKind::path_dirichlet;
    int n = 1;
    double h = 1.0;
    Vector edge_coeffs;
    double s = 0.5;
    std::shared_ptr<OperatorSpec> base;  // fractional only
    Matrix matrix;                       // dense only
    std::string matrix_file;             // dense only; provenance for config echo

    static OperatorSpec path_dirichlet(int n, double h = 1.0);
    static OperatorSpec path_neumann(int n, double h = 1.0);
    static OperatorSpec grid2d_dirichlet(int n, double h = 1.0);
    static OperatorSpec weighted_edge(int n, Vector coeffs, double h = 1.0);
    static OperatorSpec fractional(OperatorSpec base, double s);
    static OperatorSpec dense(Matrix L);

    // d of the resulting matrix (n for paths, n*n for the 2d grid, ...).
    int dimension() const;
};

// Symmetric positive semidefinite matrix representation of the base
// quadratic form E(u) = u^T L u. The coercivity constant
//   alpha = min_{u != 0} u^T L u / <u, u>
// (smallest generalized eigenvalue of (L, M), M = diag(m)) is computed at
// construction; construction fails if it is below -1e-10 * scale.
class BilinearForm {
  public:
    BilinearForm(Matrix L, SpacePtr space, OperatorKind kind);

    const Matrix& matrix() const { return L_; }
    const SpacePtr& space() const { return space_; }
    OperatorKind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    int size() const { return static_cast<int>(L_.rows()); }

    // u^T L u.
    double energy(const Vector& u) const;

  private:
    Matrix L_;
    SpacePtr space_;
    OperatorKind kind_;
    double alpha_;
};

BilinearForm build_operator(const OperatorSpec& spec, SpacePtr space);

// Cached coercivity constant of the form (computed at construction).
double coercivity_alpha(const BilinearForm& form);

// The Schroedinger form value E_V(u) = u^T L u + sum_i m_i V_i u_i^2.
double form_value(const BilinearForm& form, const PotentialField& V, const StateVector& u);
double form_value(const BilinearForm& form, const Vector& V, const Vector& u);

// Plain-text numeric file: one matrix row per line, whitespace-separated.
Matrix load_dense_matrix(const std::string& path);

}  // namespace specflow
