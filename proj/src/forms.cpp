#include "specflow/forms.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

namespace specflow {

namespace {

// Reduce the pair (L, M), M = diag(m) > 0, to the ordinary symmetric
// problem B = M^{-1/2} L M^{-1/2}; the generalized spectrum of (L, M) is
// the spectrum of B.
Matrix reduced_matrix(const Matrix& L, const MeasureSpace& space) {
    Vector inv_sqrt_m = space.weights().array().rsqrt();
    return inv_sqrt_m.asDiagonal() * L * inv_sqrt_m.asDiagonal();
}

Eigen::SelfAdjointEigenSolver<Matrix> solve_reduced(const Matrix& L, const MeasureSpace& space) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(reduced_matrix(L, space));
    if (es.info() != Eigen::Success)
        throw NumericError("forms: dense symmetric eigendecomposition failed");
    return es;
}

}  // namespace

std::string to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::path_dirichlet: return "path_dirichlet";
        case OperatorKind::path_neumann: return "path_neumann";
        case OperatorKind::grid2d_dirichlet: return "grid2d_dirichlet";
        case OperatorKind::weighted_edge: return "weighted_edge";
        case OperatorKind::fractional: return "fractional";
        case OperatorKind::dense: return "dense";
    }
    return "unknown";
}

OperatorSpec OperatorSpec::path_dirichlet(int n, double h) {
    OperatorSpec s;
    s.kind = OperatorKind::path_dirichlet;
    s.n = n;
    s.h = h;
    return s;
}

OperatorSpec OperatorSpec::path_neumann(int n, double h) {
    OperatorSpec s;
    s.kind = OperatorKind::path_neumann;
    s.n = n;
    s.h = h;
    return s;
}

OperatorSpec OperatorSpec::grid2d_dirichlet(int n, double h) {
    OperatorSpec s;
    s.kind = OperatorKind::grid2d_dirichlet;
    s.n = n;
    s.h = h;
    return s;
}

OperatorSpec OperatorSpec::weighted_edge(int n, Vector coeffs, double h) {
    OperatorSpec s;
    s.kind = OperatorKind::weighted_edge;
    s.n = n;
    s.h = h;
    s.edge_coeffs = std::move(coeffs);
    return s;
}

OperatorSpec OperatorSpec::fractional(OperatorSpec base, double exponent) {
    OperatorSpec s;
    s.kind = OperatorKind::fractional;
    s.s = exponent;
    s.base = std::make_shared<OperatorSpec>(std::move(base));
    s.n = s.base->n;
    s.h = s.base->h;
    return s;
}

OperatorSpec OperatorSpec::dense(Matrix L) {
    OperatorSpec s;
    s.kind = OperatorKind::dense;
    s.matrix = std::move(L);
    s.n = static_cast<int>(s.matrix.rows());
    return s;
}

int OperatorSpec::dimension() const {
    switch (kind) {
        case OperatorKind::grid2d_dirichlet: return n * n;
        case OperatorKind::dense: return static_cast<int>(matrix.rows());
        case OperatorKind::fractional: return base ? base->dimension() : n;
        default: return n;
    }
}

BilinearForm::BilinearForm(Matrix L, SpacePtr space, OperatorKind kind)
    : L_(std::move(L)), space_(std::move(space)), kind_(kind) {
    if (L_.rows() != L_.cols())
        throw std::invalid_argument("BilinearForm: matrix must be square");
    if (L_.rows() != space_->size())
        throw std::invalid_argument("BilinearForm: matrix/space dimension mismatch");
    L_ = 0.5 * (L_ + L_.transpose()).eval();  // exact symmetry

    Eigen::SelfAdjointEigenSolver<Matrix> es = solve_reduced(L_, *space_);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(L_.rows() - 1);
    const double scale = std::max(1.0, std::abs(hi));
    if (lo < -1e-10 * scale)
        throw std::invalid_argument("BilinearForm: matrix is not positive semidefinite (min generalized eigenvalue " +
                                    std::to_string(lo) + ")");
    // Snap eigensolver noise around an exact kernel to zero.
    alpha_ = lo <= 1e-12 * scale ? 0.0 : lo;
}

double BilinearForm::energy(const Vector& u) const {
    if (u.size() != L_.rows())
        throw std::invalid_argument("BilinearForm::energy: dimension mismatch");
    return u.dot(L_ * u);
}

namespace {

Matrix path_dirichlet_matrix(int n, double h) {
    if (n < 1) throw std::invalid_argument("path_dirichlet: n must be >= 1");
    if (h <= 0) throw std::invalid_argument("path_dirichlet: h must be > 0");
    Matrix L = Matrix::Zero(n, n);
    const double w = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
        L(i, i) = 2.0 * w;
        if (i + 1 < n) {
            L(i, i + 1) = -w;
            L(i + 1, i) = -w;
        }
    }
    return L;
}

Matrix path_neumann_matrix(int n, double h) {
    if (n < 1) throw std::invalid_argument("path_neumann: n must be >= 1");
    if (h <= 0) throw std::invalid_argument("path_neumann: h must be > 0");
    Matrix L = Matrix::Zero(n, n);
    const double w = 1.0 / (h * h);
    for (int i = 0; i + 1 < n; ++i) {
        L(i, i) += w;
        L(i + 1, i + 1) += w;
        L(i, i + 1) -= w;
        L(i + 1, i) -= w;
    }
    return L;
}

Matrix grid2d_dirichlet_matrix(int n, double h) {
    if (n < 1) throw std::invalid_argument("grid2d_dirichlet: n must be >= 1");
    if (h <= 0) throw std::invalid_argument("grid2d_dirichlet: h must be > 0");
    const int d = n * n;
    const double w = 1.0 / (h * h);
    Matrix L = Matrix::Zero(d, d);
    auto id = [n](int i, int j) { return i * n + j; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const int k = id(i, j);
            L(k, k) = 4.0 * w;
            if (i + 1 < n) { L(k, id(i + 1, j)) = -w; L(id(i + 1, j), k) = -w; }
            if (j + 1 < n) { L(k, id(i, j + 1)) = -w; L(id(i, j + 1), k) = -w; }
        }
    }
    return L;
}

// Dirichlet path with per-edge conductivities a_0..a_n; edge e joins node
// e-1 to node e, nodes -1 and n being the eliminated boundary.
Matrix weighted_edge_matrix(int n, const Vector& a, double h) {
    if (n < 1) throw std::invalid_argument("weighted_edge: n must be >= 1");
    if (h <= 0) throw std::invalid_argument("weighted_edge: h must be > 0");
    if (a.size() != n + 1)
        throw std::invalid_argument("weighted_edge: expected n+1 edge coefficients, got " +
                                    std::to_string(a.size()));
    if ((a.array() <= 0.0).any())
        throw std::invalid_argument("weighted_edge: edge coefficients must be strictly positive");
    const double w = 1.0 / (h * h);
    Matrix L = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        L(i, i) = (a(i) + a(i + 1)) * w;
        if (i + 1 < n) {
            L(i, i + 1) = -a(i + 1) * w;
            L(i + 1, i) = -a(i + 1) * w;
        }
    }
    return L;
}

// Spectral power: if B = M^{-1/2} L M^{-1/2} = Q diag(mu) Q^T then the
// result is M^{1/2} Q diag(mu^s) Q^T M^{1/2}, i.e. the operator whose
// generalized eigenpairs against M are (mu_k^s, same frame).
Matrix fractional_matrix(const Matrix& L_base, const MeasureSpace& space, double s) {
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("fractional: exponent must lie in (0,1)");
    Eigen::SelfAdjointEigenSolver<Matrix> es = solve_reduced(L_base, space);
    Vector powered = es.eigenvalues().array().max(0.0).pow(s);
    Matrix Bs = es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
    Vector sqrt_m = space.weights().array().sqrt();
    return sqrt_m.asDiagonal() * Bs * sqrt_m.asDiagonal();
}

}  // namespace

BilinearForm build_operator(const OperatorSpec& spec, SpacePtr space) {
    if (spec.dimension() != space->size())
        throw std::invalid_argument("build_operator: operator dimension " +
                                    std::to_string(spec.dimension()) + " does not match space size " +
                                    std::to_string(space->size()));
    switch (spec.kind) {
        case OperatorKind::path_dirichlet:
            return BilinearForm(path_dirichlet_matrix(spec.n, spec.h), space, spec.kind);
        case OperatorKind::path_neumann:
            return BilinearForm(path_neumann_matrix(spec.n, spec.h), space, spec.kind);
        case OperatorKind::grid2d_dirichlet:
            return BilinearForm(grid2d_dirichlet_matrix(spec.n, spec.h), space, spec.kind);
        case OperatorKind::weighted_edge:
            return BilinearForm(weighted_edge_matrix(spec.n, spec.edge_coeffs, spec.h), space, spec.kind);
        case OperatorKind::fractional: {
            if (!spec.base)
                throw std::invalid_argument("fractional: missing base operator");
            BilinearForm base = build_operator(*spec.base, space);
            return BilinearForm(fractional_matrix(base.matrix(), *space, spec.s), space, spec.kind);
        }
        case OperatorKind::dense:
            return BilinearForm(spec.matrix, space, spec.kind);
    }
    throw std::invalid_argument("build_operator: unknown kind");
}

double coercivity_alpha(const BilinearForm& form) {
    return form.alpha();
}

double form_value(const BilinearForm& form, const Vector& V, const Vector& u) {
    if (V.size() != u.size() || u.size() != form.size())
        throw std::invalid_argument("form_value: dimension mismatch");
    const Vector& m = form.space()->weights();
    return form.energy(u) + (m.array() * V.array() * u.array().square()).sum();
}

double form_value(const BilinearForm& form, const PotentialField& V, const StateVector& u) {
    return form_value(form, V.values, u.values);
}

Matrix load_dense_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("load_dense_matrix: cannot open '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x) row.push_back(x);
        if (!ls.eof() && ls.fail())
            throw ConfigError("load_dense_matrix: non-numeric token in '" + path + "'");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ConfigError("load_dense_matrix: no data in '" + path + "'");
    const std::size_t cols = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != cols)
            throw ConfigError("load_dense_matrix: ragged rows in '" + path + "'");
    Matrix L(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) L(i, j) = rows[i][j];
    return L;
}

}  // namespace specflow
