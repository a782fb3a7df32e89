// test_model.cpp — parameter validation, the doubled-up realization and its
// exact structural identities, built-in systems against hand-expanded forms.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qls/dmat.hpp"
#include "qls/model.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace qls;
using testutil::max_abs;

TEST_CASE("cavity realization matches the hand-expanded matrices") {
    const double kappa = 2.0, omega = 1.0;
    const model::SystemParams p = model::cavity(kappa, omega);
    CHECK(p.S_minus(0, 0) == Complex{1.0, 0.0});
    CHECK(std::abs(p.C_minus(0, 0) - std::sqrt(kappa)) < 1e-15);
    CHECK(max_abs(p.C_plus) == 0.0);
    CHECK(std::abs(p.Omega_minus(0, 0) - omega) < 1e-15);
    CHECK(max_abs(p.Omega_plus) == 0.0);

    const model::StateSpaceModel g = model::realize(p);
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = Complex{-kappa / 2.0, -omega};
    A(1, 1) = Complex{-kappa / 2.0, omega};
    CHECK(max_abs(g.A - A) < 1e-14);
    CHECK(max_abs(g.B - dmat::delta(Matrix::Constant(1, 1, -std::sqrt(kappa)))) < 1e-14);
    CHECK(max_abs(g.C - dmat::delta(Matrix::Constant(1, 1, std::sqrt(kappa)))) < 1e-14);
    CHECK(max_abs(g.S - Matrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("amplifier realization matches its direct matrix form") {
    const double kappa = 4.0, eps = 1.0;
    const model::StateSpaceModel g = model::realize(model::dpa(kappa, eps));
    const model::StateSpaceModel direct = model::dpa_model(kappa, eps);
    CHECK(max_abs(g.A - direct.A) < 1e-14);
    CHECK(max_abs(g.B - direct.B) < 1e-14);
    CHECK(max_abs(g.C - direct.C) < 1e-14);
    CHECK(max_abs(g.S - direct.S) < 1e-14);

    Matrix A(2, 2);
    A << -kappa / 2.0, eps / 2.0, eps / 2.0, -kappa / 2.0;
    CHECK(max_abs(g.A - A) < 1e-14);
    CHECK_THROWS_AS(model::dpa(1.0, 3.0), ValidationError);
}

TEST_CASE("every realization satisfies the exact structural identities") {
    std::mt19937_64 rng(31);
    std::vector<model::StateSpaceModel> systems{
        model::realize(model::cavity(2.0, 1.0)),
        model::realize(model::dpa(4.0, 1.0)),
        model::realize(model::cavity_with_passthrough(2.0, 1.0)),
    };
    for (int i = 0; i < 4; ++i) systems.push_back(testutil::random_stable_model(rng));

    for (const auto& g : systems) {
        // B is the negated metric adjoint of C.
        CHECK(max_abs(g.B + dmat::flat(g.C)) < 1e-13);
        // Generator identity: A♭ + A + C♭C = 0 (drives energy conservation).
        CHECK(max_abs(dmat::flat(g.A) + g.A + dmat::flat(g.C) * g.C) < 1e-12);
        // All four matrices carry the doubled-up block pattern.
        CHECK(dmat::is_doubled_up(g.A));
        CHECK(dmat::is_doubled_up(g.B));
        CHECK(dmat::is_doubled_up(g.C));
        CHECK(dmat::is_doubled_up(g.S));
    }
}

TEST_CASE("parameter validation rejects broken inputs") {
    model::SystemParams p = model::cavity(2.0, 1.0);
    p.S_minus(0, 0) = Complex{2.0, 0.0};
    CHECK_THROWS_WITH_AS(model::validate(p), doctest::Contains("unitary"), ValidationError);

    p = model::cavity(2.0, 1.0);
    p.Omega_minus(0, 0) = Complex{1.0, 0.5};
    CHECK_THROWS_WITH_AS(model::validate(p), doctest::Contains("Hermitian"), ValidationError);

    model::SystemParams q = model::dpa(4.0, 1.0);
    q.C_minus = Matrix::Zero(2, 1); // wrong channel count vs S_minus
    CHECK_THROWS_AS(model::validate(q), ValidationError);

    CHECK_THROWS_AS(model::cavity(-1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(model::beamsplitter(1.5), ValidationError);
}

TEST_CASE("from_matrices accepts realized systems and rejects broken structure") {
    const model::StateSpaceModel g = model::realize(model::dpa(4.0, 1.0));
    const model::StateSpaceModel h = model::from_matrices(g.A, g.B, g.C, g.S);
    CHECK(max_abs(h.A - g.A) == 0.0);

    Matrix badS = g.S;
    badS(0, 0) += 0.1; // breaks flat-unitarity and the block pattern
    CHECK_THROWS_AS(model::from_matrices(g.A, g.B, g.C, badS), ValidationError);

    Matrix badA = g.A;
    badA(0, 1) += Complex{0.0, 0.2}; // plus-block no longer mirrored
    CHECK_THROWS_AS(model::from_matrices(badA, g.B, g.C, g.S), ValidationError);
}

TEST_CASE("classification predicates") {
    CHECK(model::is_passive(model::cavity(2.0, 1.0)));
    CHECK(!model::is_passive(model::dpa(4.0, 1.0))); // pumped: Ω₊ ≠ 0
    CHECK(model::is_passive(model::beamsplitter(0.5)));

    CHECK(model::is_static(model::realize(model::beamsplitter(0.3))));
    CHECK(!model::is_static(model::realize(model::cavity(2.0, 1.0))));

    CHECK(model::is_stable(model::realize(model::cavity(2.0, 1.0))));
    CHECK(model::is_stable(model::realize(model::dpa(4.0, 1.0))));
    CHECK(!model::is_stable(model::realize(model::beamsplitter(0.5))));

    // Stable and static systems settle; an undamped non-static system must not.
    CHECK_NOTHROW(model::require_settleable(model::realize(model::cavity(2.0, 1.0)), "test"));
    CHECK_NOTHROW(model::require_settleable(model::realize(model::beamsplitter(0.5)), "test"));
    const Matrix A = 0.5 * Matrix::Identity(2, 2);
    const Matrix B = dmat::delta(Matrix::Constant(1, 1, Complex{-1.0, 0.0}));
    const Matrix C = dmat::delta(Matrix::Constant(1, 1, Complex{1.0, 0.0}));
    const model::StateSpaceModel bad = model::from_matrices(A, B, C, Matrix::Identity(2, 2));
    CHECK_THROWS_AS(model::require_settleable(bad, "test"), NumericalError);
}

TEST_CASE("beamsplitter and passthrough structure") {
    const model::SystemParams bs = model::beamsplitter(0.3);
    const double r = std::sqrt(0.3), s = std::sqrt(0.7);
    CHECK(std::abs(bs.S_minus(0, 0) - r) < 1e-15);
    CHECK(std::abs(bs.S_minus(0, 1) - s) < 1e-15);
    CHECK(std::abs(bs.S_minus(1, 0) + s) < 1e-15);
    CHECK(std::abs(bs.S_minus(1, 1) - r) < 1e-15);
    CHECK(max_abs(model::realize(bs).C) == 0.0);

    const model::StateSpaceModel pc = model::realize(model::cavity_with_passthrough(2.0, 1.0));
    CHECK(pc.n_ch() == 2);
    CHECK(pc.n_osc() == 1);
    // Channel 2 carries no coupling: row 2 of the coupling block vanishes.
    CHECK(max_abs(Matrix(pc.C.row(1))) == 0.0);
    CHECK(max_abs(pc.S - Matrix::Identity(4, 4)) == 0.0);
}
