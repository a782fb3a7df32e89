// test_response.cpp — impulse responses, transfer functions, the stable
// inverse checked against an independent frequency-domain oracle, and the
// axis conservation property.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qls/dmat.hpp"
#include "qls/linalg.hpp"
#include "qls/model.hpp"
#include "qls/response.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace qls;
using testutil::max_abs;

namespace {

// Frequency response of a one-sided smooth-plus-delta impulse response,
// integrated in closed form: causal parts give −left·(gen − iω)⁻¹·right,
// anti-causal parts give −left·(gen + iω)⁻¹·right (both from the convergent
// matrix exponential integral; gen is Hurwitz).
Matrix hat_at(const response::ImpulseResponse& h, double omega) {
    const Index d = h.gen.rows();
    const Matrix I = Matrix::Identity(d, d);
    Matrix inner;
    if (h.support == response::Support::causal)
        inner = (kI * omega * I - h.gen).inverse();
    else
        inner = -(kI * omega * I + h.gen).inverse();
    return h.delta_coeff + h.left * inner * h.right;
}

} // namespace

TEST_CASE("cavity impulse response matches the scalar closed form") {
    const double kappa = 2.0, omega = 1.0;
    const model::StateSpaceModel g = model::realize(model::cavity(kappa, omega));
    const response::ImpulseResponse h = response::impulse(g);
    CHECK(h.support == response::Support::causal);
    CHECK(max_abs(h.delta_coeff - g.S) == 0.0);

    for (double t : {0.0, 0.4, 1.3, 3.0}) {
        const Complex want = -kappa * std::exp(Complex{-kappa / 2.0 * t, -omega * t});
        CHECK(std::abs(h.smooth_minus(t)(0, 0) - want) < 1e-12);
        CHECK(max_abs(h.smooth_plus(t)) == 0.0); // passive: no conjugate mixing
    }
    CHECK(max_abs(h.smooth(-0.5)) == 0.0); // causal support only
}

TEST_CASE("sample_smooth agrees with pointwise evaluation") {
    const model::StateSpaceModel g = model::realize(model::dpa(4.0, 1.0));
    const response::ImpulseResponse h = response::impulse(g);
    const double dt = 0.01;
    const auto samples = response::sample_smooth(h, dt, 400);
    REQUIRE(samples.size() == 400);
    for (std::size_t k : {std::size_t{0}, std::size_t{7}, std::size_t{399}})
        CHECK(max_abs(samples[k] - h.smooth(dt * static_cast<double>(k))) < 1e-11);

    const response::ImpulseResponse hinv = response::stable_inverse(g);
    const auto inv_samples = response::sample_smooth(hinv, dt, 400);
    for (std::size_t k : {std::size_t{1}, std::size_t{250}})
        CHECK(max_abs(inv_samples[k] - hinv.smooth(-dt * static_cast<double>(k))) < 1e-11);
}

TEST_CASE("cavity transfer function is the expected scalar ratio") {
    const double kappa = 2.0, omega = 1.0;
    const model::StateSpaceModel g = model::realize(model::cavity(kappa, omega));
    for (Complex s : {Complex{1.0, 0.0}, Complex{0.0, 2.5}, Complex{0.3, -1.1}}) {
        const Complex den = s + Complex{kappa / 2.0, omega};
        const Complex want = (s - kappa / 2.0 + kI * omega) / den;
        CHECK(std::abs(response::transfer(g, s)(0, 0) - want) < 1e-12);
    }
    // Evaluation at a generator eigenvalue is refused.
    CHECK_THROWS_AS(response::transfer(g, Complex{-kappa / 2.0, -omega}), NumericalError);
}

TEST_CASE("stable inverse matches the frequency-domain inverse") {
    std::mt19937_64 rng(41);
    std::vector<model::StateSpaceModel> systems{model::realize(model::cavity(2.0, 1.0)),
                                                model::realize(model::dpa(4.0, 1.0))};
    for (int i = 0; i < 3; ++i) systems.push_back(testutil::random_stable_model(rng));

    for (const auto& g : systems) {
        const response::ImpulseResponse hinv = response::stable_inverse(g);
        CHECK(hinv.support == response::Support::anticausal);
        CHECK(max_abs(hinv.delta_coeff - dmat::flat(g.S)) < 1e-14);
        CHECK(max_abs(hinv.smooth(0.3)) == 0.0); // vanishes on the causal side
        CHECK(linalg::is_hurwitz(hinv.gen));

        const Index d = g.S.rows();
        for (double w : {0.0, 0.7, -2.3, 11.0}) {
            const Matrix prod = hat_at(hinv, w) * response::transfer(g, kI * w);
            CHECK(max_abs(prod - Matrix::Identity(d, d)) < 1e-10);
        }
    }
}

TEST_CASE("static scattering devices invert to the adjoint scatterer") {
    const model::StateSpaceModel g = model::realize(model::beamsplitter(0.3));
    const response::ImpulseResponse hinv = response::stable_inverse(g);
    CHECK(max_abs(hinv.delta_coeff - dmat::flat(g.S)) < 1e-14);
    CHECK(max_abs(hinv.delta_coeff * g.S - Matrix::Identity(4, 4)) < 1e-14);
}

TEST_CASE("axis conservation holds for realized systems and detects corruption") {
    const model::StateSpaceModel g = model::realize(model::cavity(2.0, 1.0));
    const auto rep = response::check_flat_unitary(g);
    CHECK(rep.pass);
    CHECK(rep.max_residual < 1e-9);

    // Shift the generator off the realization manifold: conservation must fail.
    const model::StateSpaceModel bad = model::from_matrices(
        Matrix(g.A + 0.1 * Matrix::Identity(2, 2)), g.B, g.C, g.S);
    const auto bad_rep = response::check_flat_unitary(bad);
    CHECK(!bad_rep.pass);
    CHECK(bad_rep.max_residual > 1e-3);
}

TEST_CASE("laplace pairing residual vanishes off the axis too") {
    const model::StateSpaceModel g = model::realize(model::dpa(4.0, 1.0));
    for (Complex s : {Complex{0.5, 1.0}, Complex{2.0, -3.0}})
        CHECK(response::laplace_pairing_residual(g, s) < 1e-12);
}
