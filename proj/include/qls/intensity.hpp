// intensity.hpp — Output statistics of a driven system: transient moment ODEs
// and output intensity, steady-state output pulses and intensity, and
// covariance/spectral transfer of stationary-plus-separable input kernels.

#pragma once

#include "qls/fields.hpp"
#include "qls/model.hpp"
#include "qls/types.hpp"

#include <functional>

namespace qls::intensity {

// ----------------------------- Transient moments ------------------------------

// Classical moment variables at one time sample: m∓ are m×2n cross moments
// between the photon state and its single-excitation components, Σ_ν is the
// 2n×2n internal second moment (Hermitian).
struct TransientState {
    double t = 0.0;
    Matrix m_minus;
    Matrix m_plus;
    Matrix sigma_nu;
};

// Integrate the coupled moment ODEs
//   ṁ∓ = m∓ A† + forcing(ξ⁻_in),   Σ̇_ν = AΣ + ΣA† + cross terms + BS diag(I_m,0) S†B†
// with m∓(t0) = 0 and Σ_ν(t0) = diag(I_n, 0_n), using the classic fixed-step
// 4th-order Runge–Kutta scheme on the given grid. Requires ξ⁺_in ≡ 0.
// Throws NumericalError if the Hermiticity of Σ_ν drifts beyond 1e-6.
std::vector<TransientState> integrate_transient(const model::StateSpaceModel& g,
                                                const fields::PulseMatrix& xi_in,
                                                const TimeGrid& grid);

// ----------------------------- Intensity traces -------------------------------

// Mean output photon-number matrix n̄(t) per sample (m×m Hermitian PSD) with
// its trace; min_eigenvalue records the most negative eigenvalue encountered
// across all samples (a positivity diagnostic).
struct IntensityTrace {
    TimeGrid grid;
    std::vector<Matrix> values;
    std::vector<double> total;
    double min_eigenvalue = 0.0;
};

// Pointwise output intensity from integrated transient moments:
//   n̄(t) = C⁻#Σ_ν(t)ᵀC⁻ᵀ − C⁻#J_nC⁻ᵀ + S₋#ξ†ξS₋ᵀ + S₋#ξ†m₋#C⁻ᵀ + C⁻#m₋ᵀξS₋ᵀ
// with C⁻ = [I_m 0]C and ξ = ξ⁻_in(t).
IntensityTrace transient_intensity(const model::StateSpaceModel& g,
                                   const std::vector<TransientState>& states,
                                   const fields::PulseMatrix& xi_in);

// ------------------------------- Steady state ---------------------------------

// Output pulse matrix of the settled system: the doubled-up convolution
// Ξ_out(t) = S·Ξ_in(t) + ∫ h(t−r)·Ξ_in(r) dr evaluated with an O(N) state
// recursion (h is the smooth impulse response). The input is assumed zero
// before the start of its grid. Requires a stable or static system.
fields::PulseMatrix steady_pulses(const model::StateSpaceModel& g,
                                  const fields::PulseMatrix& xi_in);

// W = ∫₀^∞ h⁺(r)# h⁺(r)ᵀ dr, the constant amplification noise floor, computed
// exactly from a Lyapunov solve on the smooth kernel factors (m×m PSD).
Matrix steady_gramian(const model::StateSpaceModel& g);

// n̄(t) = W + ξ⁺_out(t)#ξ⁺_out(t)ᵀ + ξ⁻_out(t)#ξ⁻_out(t)ᵀ on the pulse grid.
IntensityTrace steady_intensity(const model::StateSpaceModel& g,
                                const fields::PulseMatrix& xi_out);

// --------------------------- Covariance transfer ------------------------------

// Transfer a vector-valued time function through the full impulse response:
// f_out(t) = S f(t) + ∫ h(t−r) f(r) dr sampled on the grid (f assumed zero
// before grid start), returned as an interpolating function.
std::function<Vector(double)> transfer_vector_fn(const model::StateSpaceModel& g,
                                                 const std::function<Vector(double)>& f,
                                                 const TimeGrid& grid);

// Steady-state output covariance kernel: R_out = g ⋆ R_in ⋆ g† with the delta
// algebra resolved in closed form. Supported input structure: constant delta
// coefficient plus separable smooth terms (the delta part maps to a new delta
// plus a stationary exponential background; separable terms transfer through
// the full response). Inputs carrying their own stationary background or a
// general non-stationary part are refused.
fields::CovKernel covariance_transfer(const model::StateSpaceModel& g,
                                      const fields::CovKernel& R_in,
                                      const TimeGrid& grid);

// Stationary spectral transfer: R_out[iω] = Ξ[iω] R_in[iω] Ξ[iω]† pointwise.
std::vector<Matrix> spectral_transfer(const model::StateSpaceModel& g,
                                      const std::function<Matrix(double)>& R_in_spectrum,
                                      const std::vector<double>& omegas);

} // namespace qls::intensity
