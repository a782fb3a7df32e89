// test_fields.cpp — pulse families, pulse-matrix layout and quadrature,
// covariance kernels, and the normalization integral against hand oracles.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qls/dmat.hpp"
#include "qls/fields.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace qls;
using testutil::max_abs;

TEST_CASE("exponential pulse: support, values, unit norm") {
    const double gamma = 1.5, t0 = 0.75;
    const auto nu = fields::exponential_pulse(gamma, t0);
    CHECK(std::abs(nu(t0 - 0.1)) == 0.0);
    CHECK(std::abs(nu(t0) - std::sqrt(2.0 * gamma)) < 1e-15);
    CHECK(std::abs(nu(t0 + 1.0) - std::sqrt(2.0 * gamma) * std::exp(-gamma)) < 1e-15);

    const TimeGrid grid = TimeGrid::from_range(-1.0, 12.0, 1e-3);
    // The support starts exactly on a grid node; the quadrature must not pick
    // up a phantom half-cell ahead of the jump.
    CHECK(std::abs(fields::pulse_norm_sq(nu, grid) - 1.0) < 1e-6);
}

TEST_CASE("rational pulse evaluates the pole sum and validates poles") {
    const std::vector<Complex> coeff{{1.0, 0.0}, {0.0, 2.0}};
    const std::vector<Complex> poles{{-1.0, 0.0}, {-2.0, 1.0}};
    const auto nu = fields::rational_pulse(coeff, poles);
    CHECK(std::abs(nu(-0.2)) == 0.0);
    const double t = 0.9;
    const Complex want = coeff[0] * std::exp(poles[0] * t) + coeff[1] * std::exp(poles[1] * t);
    CHECK(std::abs(nu(t) - want) < 1e-15);
    CHECK_THROWS_AS(fields::rational_pulse({{1.0, 0.0}}, {{0.1, 0.0}}), ValidationError);
}

TEST_CASE("sampled pulse interpolates linearly and vanishes outside") {
    const TimeGrid grid(0.0, 0.5, 3); // nodes 0, 0.5, 1
    const auto nu = fields::sampled_pulse(grid, {{0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}});
    CHECK(std::abs(nu(0.25) - Complex{0.5, 0.5}) < 1e-12);
    CHECK(std::abs(nu(0.5) - Complex{1.0, 1.0}) < 1e-12);
    CHECK(std::abs(nu(1.4)) == 0.0);
    CHECK(std::abs(nu(-0.3)) == 0.0);
}

TEST_CASE("pulse overlap: clipped trapezoid and conjugate symmetry") {
    const TimeGrid grid = TimeGrid::from_range(-2.0, 14.0, 1e-3);
    const auto nu1 = fields::exponential_pulse(1.0);
    const auto nu2 = fields::exponential_pulse(2.0);
    CHECK(std::abs(fields::pulse_overlap(nu1, nu1, grid) - 1.0) < 1e-6);
    // Closed form: ∫ √2 e^{−t} · 2 e^{−2t} dt = 2√2 / 3.
    const Complex o12 = fields::pulse_overlap(nu1, nu2, grid);
    CHECK(std::abs(o12 - 2.0 * std::sqrt(2.0) / 3.0) < 1e-6);
    CHECK(std::abs(o12 - std::conj(fields::pulse_overlap(nu2, nu1, grid))) < 1e-15);
}

TEST_CASE("photon pulse matrices: layout, norms, and validation") {
    const TimeGrid grid = TimeGrid::from_range(-1.0, 14.0, 2e-3);
    const auto nu1 = fields::exponential_pulse(1.0);
    const auto nu2 = fields::exponential_pulse(2.0);
    const fields::PulseMatrix xi = fields::photon_pulses(grid, {nu1, nu2});
    CHECK(xi.n_ch == 2);
    REQUIRE(xi.xi_minus.size() == grid.size);

    const std::size_t i = grid.index_of(1.0);
    const double t = grid.time(i);
    CHECK(std::abs(xi.xi_minus[i](0, 0) - nu1(t)) < 1e-12);
    CHECK(std::abs(xi.xi_minus[i](1, 1) - nu2(t)) < 1e-12);
    CHECK(std::abs(xi.xi_minus[i](0, 1)) == 0.0);
    CHECK(max_abs(xi.xi_plus[i]) == 0.0);

    // Doubled column layout: [ξ⁻ e_k ; conj(ξ⁺) e_k].
    const Vector col = xi.column(i, 1);
    REQUIRE(col.size() == 4);
    CHECK(std::abs(col(1) - nu2(t)) < 1e-12);
    CHECK(std::abs(col(0)) == 0.0);
    CHECK(std::abs(col(2)) == 0.0);
    CHECK(std::abs(col(3)) == 0.0);

    CHECK(std::abs(xi.column_norm_sq(0) - 1.0) < 1e-5);
    CHECK(std::abs(xi.column_norm_sq(1) - 1.0) < 1e-5);

    // A non-normalized shape is refused with the norms in the message.
    const auto half = [nu1](double s) { return 0.5 * nu1(s); };
    CHECK_THROWS_WITH_AS(fields::photon_pulses(grid, {half}),
                         doctest::Contains("squared norms"), ValidationError);
}

TEST_CASE("pulse matrix evaluation: exact off-grid values and phase gauge") {
    const TimeGrid grid = TimeGrid::from_range(0.0, 10.0, 1e-2);
    const auto nu = fields::exponential_pulse(1.0);
    const fields::PulseMatrix xi = fields::photon_pulses(grid, {nu});

    // Closed-form evaluator: exact at off-node times.
    CHECK(std::abs(xi.minus_at(0.5037)(0, 0) - nu(0.5037)) < 1e-13);
    CHECK(max_abs(xi.minus_at(-1.0)) == 0.0);
    CHECK(max_abs(xi.plus_at(3.3)) == 0.0);

    const double theta = 0.7;
    const fields::PulseMatrix rot = xi.phase_rotated(theta);
    CHECK(std::abs(rot.xi_minus[50](0, 0) - std::polar(1.0, theta) * xi.xi_minus[50](0, 0)) <
          1e-13);
    CHECK(std::abs(rot.column_norm_sq(0) - xi.column_norm_sq(0)) < 1e-12);
}

TEST_CASE("covariance kernels: vacuum, photon, coherent-drive") {
    const TimeGrid grid = TimeGrid::from_range(-1.0, 10.0, 1e-2);

    const fields::CovKernel vac = fields::vacuum_cov(2);
    CHECK(vac.is_stationary());
    Matrix vd = Matrix::Zero(4, 4);
    vd.topLeftCorner(2, 2) = Matrix::Identity(2, 2);
    CHECK(max_abs(vac.delta_coeff - vd) == 0.0);
    CHECK(max_abs(vac.smooth(1.0, 2.0)) == 0.0);

    // Photon kernel: smooth part is the doubled pulse outer product.
    const fields::PulseMatrix xi =
        fields::photon_pulses(grid, {fields::exponential_pulse(1.0)});
    const fields::CovKernel pk = fields::photon_input_cov(xi);
    CHECK(!pk.is_stationary());
    const double t = 0.8, r = 2.1;
    const Matrix full_t = dmat::delta(xi.minus_at(t), xi.plus_at(t));
    const Matrix full_r = dmat::delta(xi.minus_at(r), xi.plus_at(r));
    CHECK(max_abs(pk.smooth(t, r) - full_t * full_r.adjoint()) < 1e-12);
    CHECK(fields::kernel_hermitian_residual(pk, grid) < 1e-12);

    // Coherent drive on channel 2: smooth part is μ(t) μ(r)†, μ = [0,α,0,α*].
    const auto alpha = fields::rational_pulse({{1.0, 0.0}}, {{-1.0, 0.0}});
    const fields::CovKernel ck = fields::coherent_channel2_cov(alpha);
    Vector mu_t(4), mu_r(4);
    mu_t << Complex{0.0, 0.0}, alpha(t), Complex{0.0, 0.0}, std::conj(alpha(t));
    mu_r << Complex{0.0, 0.0}, alpha(r), Complex{0.0, 0.0}, std::conj(alpha(r));
    CHECK(max_abs(ck.smooth(t, r) - Matrix(mu_t * mu_r.adjoint())) < 1e-12);
}

TEST_CASE("normalization: single and two-photon states over vacuum") {
    const TimeGrid grid = TimeGrid::from_range(-1.0, 14.0, 2e-3);
    const auto nu1 = fields::exponential_pulse(1.0);
    const auto nu2 = fields::exponential_pulse(2.0);

    const fields::PulseMatrix one = fields::photon_pulses(grid, {nu1});
    const auto r1 = fields::normalization(one, fields::vacuum_cov(1), {0});
    CHECK(r1.matchings == 1);
    CHECK(std::abs(r1.value - 1.0) < 1e-5);
    CHECK(r1.imag_residual < 1e-12);

    const fields::PulseMatrix two = fields::photon_pulses(grid, {nu1, nu2});
    const auto r2 = fields::normalization(two, fields::vacuum_cov(2));
    CHECK(r2.matchings == 3);
    CHECK(std::abs(r2.value - 1.0) < 1e-5);

    CHECK_THROWS_AS(fields::normalization(one, fields::vacuum_cov(1), std::vector<Index>{}),
                    ValidationError);
}
