#include <doctest.h>

#include <random>

#include "specflow/measure_space.hpp"

using namespace specflow;

TEST_CASE("inner product on unit basis vectors") {
    auto space = MeasureSpace::uniform(2);
    StateVector u(Vector{{1.0, 0.0}}, space);
    CHECK(inner_product(u, u, *space) == 1.0);
}

TEST_CASE("inner product hand expansion with nonuniform weights") {
    auto space = std::make_shared<const MeasureSpace>(Vector{{2.0, 3.0}});
    Vector u{{1.0, 1.0}}, v{{1.0, -1.0}};
    CHECK(inner_product(u, v, *space) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("inner product with the zero vector") {
    auto space = MeasureSpace::uniform(4);
    Vector z = Vector::Zero(4), v{{1.0, -3.0, 2.5, 0.25}};
    CHECK(inner_product(z, v, *space) == 0.0);
}

TEST_CASE("inner product rejects dimension mismatch") {
    auto space = MeasureSpace::uniform(3);
    CHECK_THROWS_AS(inner_product(Vector::Zero(2), Vector::Zero(3), *space),
                    std::invalid_argument);
}

TEST_CASE("weighted mean of a constant field is the constant") {
    auto space = std::make_shared<const MeasureSpace>(Vector{{0.3, 1.2, 5.0}});
    PotentialField V(Vector::Constant(3, 7.5), space);
    CHECK(weighted_mean(V) == doctest::Approx(7.5).epsilon(1e-14));
}

TEST_CASE("weighted mean examples") {
    auto s1 = MeasureSpace::uniform(2);
    CHECK(weighted_mean(Vector{{0.0, 2.0}}, *s1) == doctest::Approx(1.0));
    auto s2 = std::make_shared<const MeasureSpace>(Vector{{3.0, 1.0}});
    CHECK(weighted_mean(Vector{{1.0, 4.0}}, *s2) == doctest::Approx(1.75).epsilon(1e-14));
}

TEST_CASE("Cauchy-Schwarz on random vectors") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> wdist(0.1, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int d = 1 + static_cast<int>(rng() % 12);
        Vector m(d), u(d), v(d);
        for (int i = 0; i < d; ++i) {
            m(i) = wdist(rng);
            u(i) = gauss(rng);
            v(i) = gauss(rng);
        }
        MeasureSpace space(m);
        const double uv = inner_product(u, v, space);
        const double uu = inner_product(u, u, space);
        const double vv = inner_product(v, v, space);
        CHECK(uv * uv <= uu * vv * (1.0 + 1e-12) + 1e-300);
    }
}

TEST_CASE("weighted mean is invariant under joint permutations of V and m") {
    std::mt19937_64 rng(11);
    Vector m{{0.5, 1.5, 2.0, 0.25}}, V{{1.0, -2.0, 0.5, 4.0}};
    MeasureSpace space(m);
    const double base = weighted_mean(V, space);
    std::vector<int> perm{0, 1, 2, 3};
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        Vector mp(4), Vp(4);
        for (int i = 0; i < 4; ++i) {
            mp(i) = m(perm[i]);
            Vp(i) = V(perm[i]);
        }
        CHECK(weighted_mean(Vp, MeasureSpace(mp)) == doctest::Approx(base).epsilon(1e-13));
    }
}

TEST_CASE("measure space validates its weights") {
    CHECK_THROWS_AS(MeasureSpace(Vector{{1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MeasureSpace(Vector{{-1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(MeasureSpace(Vector(0)), std::invalid_argument);
    CHECK(MeasureSpace(Vector{{2.0, 3.0}}).total_mass() == doctest::Approx(5.0));
}

TEST_CASE("state vector normalization check uses the weighted metric") {
    auto space = std::make_shared<const MeasureSpace>(Vector{{4.0}});
    CHECK(StateVector(Vector{{0.5}}, space).normalized());
    CHECK_FALSE(StateVector(Vector{{1.0}}, space).normalized());
}

TEST_CASE("potential admissibility against its lower bound") {
    auto space = MeasureSpace::uniform(3);
    PotentialField V(Vector{{0.0, 1.0, 2.0}}, space, 0.0);
    CHECK(V.admissible());
    PotentialField W(Vector{{-0.5, 1.0, 2.0}}, space, 0.0);
    CHECK_FALSE(W.admissible());
}
