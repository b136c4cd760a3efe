#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "specflow/forms.hpp"

using namespace specflow;

TEST_CASE("path_dirichlet(3,1) is the standard stencil") {
    auto space = MeasureSpace::uniform(3);
    auto form = build_operator(OperatorSpec::path_dirichlet(3, 1.0), space);
    Matrix expected{{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}};
    CHECK((form.matrix() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("path_neumann(2,1) has the constant vector in its kernel") {
    auto space = MeasureSpace::uniform(2);
    auto form = build_operator(OperatorSpec::path_neumann(2, 1.0), space);
    Matrix expected{{1, -1}, {-1, 1}};
    CHECK((form.matrix() - expected).cwiseAbs().maxCoeff() == 0.0);
    CHECK(form.alpha() == 0.0);
}

TEST_CASE("coercivity constants") {
    auto space = MeasureSpace::uniform(3);
    SUBCASE("zero form") {
        auto form = build_operator(OperatorSpec::dense(Matrix::Zero(3, 3)), space);
        CHECK(coercivity_alpha(form) == 0.0);
    }
    SUBCASE("Dirichlet path against the closed form") {
        auto form = build_operator(OperatorSpec::path_dirichlet(3, 1.0), space);
        CHECK(coercivity_alpha(form) ==
              doctest::Approx(oracles::path_dirichlet_eigenvalue(3, 1.0, 1)).epsilon(1e-13));
        CHECK(coercivity_alpha(form) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-13));
    }
    SUBCASE("Neumann path has alpha 0") {
        for (int n : {2, 5, 9}) {
            auto sp = MeasureSpace::uniform(n);
            auto form = build_operator(OperatorSpec::path_neumann(n, 0.5), sp);
            CHECK(coercivity_alpha(form) == 0.0);
        }
    }
}

TEST_CASE("fractional power s=1/2 takes square roots of the base spectrum") {
    auto space = MeasureSpace::uniform(3);
    auto frac =
        build_operator(OperatorSpec::fractional(OperatorSpec::path_dirichlet(3, 1.0), 0.5), space);
    // Oracle: dense generalized eigendecomposition of the base, then sqrt.
    auto base = build_operator(OperatorSpec::path_dirichlet(3, 1.0), space);
    Vector base_eigs = oracles::generalized_eigenvalues(base.matrix(), space->weights());
    Vector frac_eigs = oracles::generalized_eigenvalues(frac.matrix(), space->weights());
    for (int k = 0; k < 3; ++k)
        CHECK(frac_eigs(k) == doctest::Approx(std::sqrt(base_eigs(k))).epsilon(1e-12));
    CHECK(frac_eigs(1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("fractional power is continuous at s -> 1") {
    auto space = MeasureSpace::uniform(5);
    auto base = build_operator(OperatorSpec::path_dirichlet(5, 1.0), space);
    auto frac = build_operator(
        OperatorSpec::fractional(OperatorSpec::path_dirichlet(5, 1.0), 1.0 - 1e-9), space);
    Vector be = oracles::generalized_eigenvalues(base.matrix(), space->weights());
    Vector fe = oracles::generalized_eigenvalues(frac.matrix(), space->weights());
    CHECK((be - fe).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("fractional exponent outside (0,1) is rejected") {
    auto space = MeasureSpace::uniform(3);
    CHECK_THROWS_AS(
        build_operator(OperatorSpec::fractional(OperatorSpec::path_dirichlet(3, 1.0), 1.5), space),
        std::invalid_argument);
    CHECK_THROWS_AS(
        build_operator(OperatorSpec::fractional(OperatorSpec::path_dirichlet(3, 1.0), 0.0), space),
        std::invalid_argument);
}

TEST_CASE("weighted_edge with unit coefficients equals the unweighted stencil exactly") {
    auto space = MeasureSpace::uniform(4);
    auto weighted =
        build_operator(OperatorSpec::weighted_edge(4, Vector::Ones(5), 0.25), space);
    auto plain = build_operator(OperatorSpec::path_dirichlet(4, 0.25), space);
    CHECK((weighted.matrix() - plain.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("weighted_edge validates its coefficients") {
    auto space = MeasureSpace::uniform(3);
    CHECK_THROWS_AS(build_operator(OperatorSpec::weighted_edge(3, Vector::Ones(3), 1.0), space),
                    std::invalid_argument);
    Vector bad = Vector::Ones(4);
    bad(2) = -0.5;
    CHECK_THROWS_AS(build_operator(OperatorSpec::weighted_edge(3, bad, 1.0), space),
                    std::invalid_argument);
}

TEST_CASE("grid2d_dirichlet five point stencil spectrum") {
    const int n = 3;
    auto space = MeasureSpace::uniform(n * n);
    auto form = build_operator(OperatorSpec::grid2d_dirichlet(n, 1.0), space);
    // Product structure: eigenvalues are sums of two 1d path eigenvalues.
    std::vector<double> expected;
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b)
            expected.push_back(oracles::path_dirichlet_eigenvalue(n, 1.0, a) +
                               oracles::path_dirichlet_eigenvalue(n, 1.0, b));
    std::sort(expected.begin(), expected.end());
    Vector eigs = oracles::generalized_eigenvalues(form.matrix(), space->weights());
    for (int k = 0; k < n * n; ++k)
        CHECK(eigs(k) == doctest::Approx(expected[k]).epsilon(1e-12));
}

TEST_CASE("dense forms are symmetrized and PSD-validated") {
    auto space = MeasureSpace::uniform(2);
    SUBCASE("asymmetric input is symmetrized") {
        Matrix A{{2.0, 1.0}, {0.0, 2.0}};
        auto form = build_operator(OperatorSpec::dense(A), space);
        CHECK(form.matrix()(0, 1) == doctest::Approx(0.5));
        CHECK(form.matrix()(0, 1) == form.matrix()(1, 0));
    }
    SUBCASE("non-PSD input is a construction error") {
        Matrix A{{1.0, 0.0}, {0.0, -0.5}};
        CHECK_THROWS_AS(build_operator(OperatorSpec::dense(A), space), std::invalid_argument);
    }
}

TEST_CASE("form_value examples") {
    SUBCASE("Rayleigh quotient of the ground state equals lambda_1") {
        auto space = MeasureSpace::uniform(3);
        auto form = build_operator(OperatorSpec::path_dirichlet(3, 1.0), space);
        // Ground state of tridiag(-1,2,-1): (1, sqrt(2), 1), normalized.
        Vector u{{0.5, std::sqrt(2.0) / 2.0, 0.5}};
        PotentialField V(Vector::Zero(3), space, 0.0);
        CHECK(form_value(form, V, StateVector(u, space)) ==
              doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-13));
    }
    SUBCASE("pure multiplication operator") {
        auto space = MeasureSpace::uniform(2);
        auto form = build_operator(OperatorSpec::dense(Matrix::Zero(2, 2)), space);
        PotentialField V(Vector{{1.0, 2.0}}, space);
        CHECK(form_value(form, V, StateVector(Vector{{1.0, 0.0}}, space)) == 1.0);
    }
    SUBCASE("zero state gives zero") {
        auto space = MeasureSpace::uniform(3);
        auto form = build_operator(OperatorSpec::path_neumann(3, 1.0), space);
        PotentialField V(Vector{{3.0, -1.0, 4.0}}, space);
        CHECK(form_value(form, V, StateVector(Vector::Zero(3), space)) == 0.0);
    }
}

TEST_CASE("shift covariance of the form value") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss;
    auto space = std::make_shared<const MeasureSpace>(Vector{{0.5, 1.0, 2.0, 0.75, 1.25}});
    auto form = build_operator(OperatorSpec::path_dirichlet(5, 0.5), space);
    for (int trial = 0; trial < 30; ++trial) {
        Vector V(5), u(5);
        for (int i = 0; i < 5; ++i) {
            V(i) = gauss(rng);
            u(i) = gauss(rng);
        }
        const double c = gauss(rng);
        const double lhs = form_value(form, Vector(V.array() + c), u);
        const double rhs = form_value(form, V, u) + c * inner_product(u, u, *space);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("dense matrices load from plain text files") {
    const std::string path = "forms_dense_test_matrix.txt";
    {
        std::ofstream out(path);
        out << "2.0 -1.0\n-1.0 2.0\n";
    }
    Matrix L = load_dense_matrix(path);
    CHECK(L.rows() == 2);
    CHECK(L(0, 1) == -1.0);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_dense_matrix("no_such_file.txt"), ConfigError);
}
