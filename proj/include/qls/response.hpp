// response.hpp — Impulse responses, transfer functions, and the stable inverse.
//
// The doubled-up input/output map of a model g is
//     y̆ = g_G * ŭ,   g_G(t) = δ(t)·S − C e^{At} C♭S   for t ≥ 0 (else 0),
// whose channel blocks are g_G = Δ(g⁻, g⁺). The transfer function is
//     Ξ_G[s] = S − C (sI − A)⁻¹ C♭ S,
// which on the imaginary axis satisfies Ξ[iω]♭ Ξ[iω] = Ξ[iω] Ξ[iω]♭ = I.
// The stable inverse of a stable model is anti-causal:
//     g_{G⁻¹}(t) = 0 for t > 0;  S♭δ(t) − S♭ C e^{−A♭ t} C♭ for t ≤ 0.

#pragma once

#include "qls/model.hpp"

namespace qls::response {

enum class Support { causal, anticausal };

// delta_coeff·δ(t) plus a one-sided smooth part  left · e^{gen·s} · right,
// where s = t on causal support (t ≥ 0) and s = −t on anti-causal support
// (t ≤ 0); gen is Hurwitz in both cases so the smooth part decays.
struct ImpulseResponse {
    Matrix delta_coeff; // 2m×2m
    Matrix left;        // 2m×2n
    Matrix gen;         // 2n×2n
    Matrix right;       // 2n×2m
    Support support = Support::causal;

    Index n_ch() const { return delta_coeff.rows() / 2; }

    // Smooth part at time t (zero outside the support side).
    Matrix smooth(double t) const;

    // Upper-left / upper-right m×m channel blocks of smooth(t).
    Matrix smooth_minus(double t) const;
    Matrix smooth_plus(double t) const;
};

// g_G of a model (causal).
ImpulseResponse impulse(const model::StateSpaceModel& g);

// g_{G⁻¹} of a stable (or static) model (anti-causal). The inverse in the
// convolution algebra: g_{G⁻¹} * g_G = δ·I.
ImpulseResponse stable_inverse(const model::StateSpaceModel& g);

// Smooth-part samples on k·dt, k = 0..count−1 along the support direction
// (k·dt for causal, −k·dt for anti-causal), built from a stepped propagator
// table. sample(k) = smooth(±k·dt).
std::vector<Matrix> sample_smooth(const ImpulseResponse& h, double dt, std::size_t count);

// Ξ_G[s]. Throws NumericalError if s is within pole_tol·scale of an
// eigenvalue of A (evaluation at a pole).
Matrix transfer(const model::StateSpaceModel& g, Complex s, double pole_tol = 1e-10);

// Deviation of Ξ[s] from the Laplace-domain doubled-up pairing: the lower
// blocks of Ξ[s] must equal the conjugated upper blocks of Ξ[s*]. (At s = iω
// this pairs ω with −ω; the plain time-domain block pattern holds only at
// ω = 0.)
double laplace_pairing_residual(const model::StateSpaceModel& g, Complex s);

struct FlatUnitaryReport {
    double max_residual = 0.0; // max over grid of ‖Ξ♭Ξ−I‖₂ and ‖ΞΞ♭−I‖₂
    double worst_omega = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// Check Ξ[iω]♭Ξ[iω] = Ξ[iω]Ξ[iω]♭ = I over a frequency grid.
FlatUnitaryReport check_flat_unitary(const model::StateSpaceModel& g,
                                     const std::vector<double>& omegas = frequency_grid(),
                                     double tol = 1e-9);

} // namespace qls::response
