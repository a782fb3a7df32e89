// synthesis.hpp — Pulse-shape synthesis: feasibility of an input/output pulse
// pair, realization of a given all-pass rational ratio as a passive system via
// a Lyapunov observability solve, series cascading, and the end-to-end shaper.

#pragma once

#include "qls/fields.hpp"
#include "qls/model.hpp"
#include "qls/types.hpp"

namespace qls::synthesis {

// Classical single-input single-output realization of the all-pass ratio
// Ξ_d[s] = D + C(sI − A)⁻¹B. Complex coefficients are accepted (first-order
// sections with complex poles arise naturally even for all-pass products).
struct RationalAllPass {
    Matrix A; // n_d×n_d
    Matrix B; // n_d×1
    Matrix C; // 1×n_d
    Complex D{1.0, 0.0};

    Index state_dim() const { return A.rows(); }
    Complex transfer(Complex s) const;
};

// First-order all-pass section (s + conj(a))/(s − a) for a pole a with
// Re a < 0, realized as A = a, C = √(−2 Re a), B = −C, D = 1.
RationalAllPass allpass_section(Complex pole);

// Series product d2∘d1 (apply d1 first), standard state-space composition.
RationalAllPass allpass_product(const RationalAllPass& d1, const RationalAllPass& d2);

// ------------------------------- Feasibility ----------------------------------

struct FeasibilityReport {
    bool feasible = false;
    double max_deviation = 0.0; // max over ω of ||ν̂_out|² − |ν̂|²|, relative to the peak
    double tol = 0.0;
};

// Fourier transform ν̂(ω) = ∫ ν(t) e^{−iωt} dt by trapezoid quadrature.
Complex fourier(const fields::PulseFn& nu, const TimeGrid& grid, double omega);

// A pulse pair is exactly shapeable iff the two magnitude spectra agree.
FeasibilityReport check_feasible(const fields::PulseFn& nu, const fields::PulseFn& nu_out,
                                 const TimeGrid& grid, const std::vector<double>& omegas,
                                 double tol = 1e-4);

// -------------------------------- Synthesis -----------------------------------

// Realize the all-pass ratio as a passive system: solve A†X + XA + C†C = 0,
// require X > 0 (minimality) and the all-pass identity D†C + B†X = 0, and
// return S₋ = I, C₋ = C, C₊ = 0, Ω₋ = (i/2)(XA − A†X), Ω₊ = 0. The realized
// transfer is verified against d on a frequency probe set.
model::SystemParams synthesize(const RationalAllPass& d);

// Series connection: the output of g1 feeds g2. The composite doubled-up
// model has block state (x₁; x₂) and transfer Ξ₂[s]·Ξ₁[s] (verified).
model::StateSpaceModel cascade(const model::SystemParams& g1, const model::SystemParams& g2);

// End-to-end shaper: verify feasibility of (ν, ν_out) and that d matches the
// spectral ratio ν̂_out/ν̂, synthesize, drive with ν, and return the output
// pulse matrix (single channel).
fields::PulseMatrix shape_pulse(const fields::PulseFn& nu, const fields::PulseFn& nu_out,
                                const RationalAllPass& d, const TimeGrid& grid,
                                const std::vector<double>& omegas, double tol = 1e-4);

} // namespace qls::synthesis
