// fields.hpp — Input field descriptions: pulse matrices, two-time covariance
// kernels, reference Gaussian states, and state normalization.
//
// A pulse matrix ξ = Δ(ξ⁻, ξ⁺) collects per-channel pulse shapes; column k of
// ξ is the doubled-up amplitude attached to the k-th creation factor of a
// photon–Gaussian state. A covariance kernel R(t,r) = E[b̆(t) b̆†(r)] is stored
// as a constant delta coefficient plus a smooth part split into a stationary
// background K(t−r) and separable outer-product terms L(t)R(r)†.
//
// Normalization of a state with creation columns k₁..k_j over a zero-mean
// Gaussian reference with kernel R is a 2j-fold integral evaluated by a
// Wick (perfect-matching) sum of pairwise double integrals; the j = 1 case
// reduces to ∬ [ξ⁻(t)*, −ξ⁺(t)] R(t,r) [ξ⁻(r); −ξ⁺(r)*] dt dr.

#pragma once

#include "qls/types.hpp"

#include <functional>
#include <optional>

namespace qls::fields {

// ------------------------------ Pulse shapes ---------------------------------

using PulseFn = std::function<Complex(double)>;

// √(2γ)·e^{−γ(t−t_start)} for t ≥ t_start, else 0; unit L² norm.
PulseFn exponential_pulse(double gamma, double t_start = 0.0);

// Σ_k c_k e^{p_k t} for t ≥ 0, else 0. Requires Re p_k < 0.
PulseFn rational_pulse(const std::vector<Complex>& coeff, const std::vector<Complex>& pole);

// Linear interpolation through samples on a grid (zero outside).
PulseFn sampled_pulse(const TimeGrid& grid, std::vector<Complex> values);

// ∫ |ν(t)|² dt over the grid (trapezoid).
double pulse_norm_sq(const PulseFn& nu, const TimeGrid& grid);

// ∫ ν₁*(t) ν₂(t) dt over the grid (trapezoid).
Complex pulse_overlap(const PulseFn& nu1, const PulseFn& nu2, const TimeGrid& grid);

// ------------------------------ Pulse matrix ---------------------------------

struct PulseMatrix {
    TimeGrid grid;
    Index n_ch = 0;
    std::vector<Matrix> xi_minus; // grid.size samples of ξ⁻(t), m×m
    std::vector<Matrix> xi_plus;  // grid.size samples of ξ⁺(t), m×m
    // Optional closed-form evaluators for off-grid times (exact quadrature
    // stage evaluation); when absent, evaluation interpolates the samples.
    std::function<Matrix(double)> eval_minus;
    std::function<Matrix(double)> eval_plus;

    Matrix minus_at(double t) const;
    Matrix plus_at(double t) const;

    // Doubled column k (0-based, k < m) at sample i:
    // [ξ⁻(t)·e_k ; conj(ξ⁺(t))·e_k].
    Vector column(std::size_t i, Index k) const;

    // ∫ ‖column k‖² dt (trapezoid over the grid).
    double column_norm_sq(Index k) const;

    // Right-multiply by the doubled phase gauge Δ(e^{iθ}I, 0):
    // ξ⁻ → e^{iθ} ξ⁻, ξ⁺ → e^{−iθ} ξ⁺.
    PulseMatrix phase_rotated(double theta) const;

    PulseMatrix scaled(Complex factor) const;
};

// ξ⁻ = diag(ν₁,…,ν_m), ξ⁺ = 0, sampled on grid. Each ν_k must have unit L²
// norm within norm_tol, otherwise a ValidationError lists the offending norms.
PulseMatrix photon_pulses(const TimeGrid& grid, const std::vector<PulseFn>& nu,
                          double norm_tol = 1e-3);

// Assemble from arbitrary block evaluators (no normalization requirement).
PulseMatrix make_pulse_matrix(const TimeGrid& grid, Index n_ch,
                              const std::function<Matrix(double)>& eval_minus,
                              const std::function<Matrix(double)>& eval_plus);

// --------------------------- Covariance kernels ------------------------------

// One separable smooth term L(t)·R(r)† (2m-component columns).
struct SeparableTerm {
    std::function<Vector(double)> left;
    std::function<Vector(double)> right;
};

struct CovKernel {
    Index n_ch = 0;
    Matrix delta_coeff;                        // D in D·δ(t−r), 2m×2m
    std::function<Matrix(double)> background;  // stationary K(τ); null if none
    std::vector<SeparableTerm> separable;      // Σ L(t) R(r)†
    std::function<Matrix(double, double)> general; // non-stationary extra; null if none

    Matrix background_at(double tau) const;
    // Full smooth part at (t, r).
    Matrix smooth(double t, double r) const;
    bool is_stationary() const { return separable.empty() && !general; }
};

// Vacuum: D = diag(I_m, 0), no smooth part.
CovKernel vacuum_cov(Index m);

// Photon state on top of a Gaussian background: adds the outer product
// Δξ(t)·Δξ(r)† (2m separable column terms) to the background kernel.
CovKernel photon_cov(const PulseMatrix& xi, CovKernel background);

// Photon over vacuum (the single-photon input kernel).
CovKernel photon_input_cov(const PulseMatrix& xi);

// Two-channel Gaussian reference |vacuum⟩⊗|α⟩: vacuum delta plus the coherent
// mean outer product μ(t)μ(r)† with μ(t) = [0, α(t), 0, α(t)*]ᵀ.
CovKernel coherent_channel2_cov(const PulseFn& alpha);

// Max-norm Hermitian-pairing deviation ‖R(t,r) − R(r,t)†‖ sampled on a grid
// (smooth part only); diagnostic for kernel construction.
double kernel_hermitian_residual(const CovKernel& R, const TimeGrid& grid,
                                 std::size_t stride = 16);

// ------------------------------ Normalization --------------------------------

struct NormalizationResult {
    double value = 0.0;          // the 2j-fold integral (real part; imag is a residual)
    double imag_residual = 0.0;  // |imaginary part| — should vanish
    double quad_error = 0.0;     // Richardson estimate from a 2× coarser grid
    int matchings = 0;           // number of Wick pairings summed
    bool coarse_warning = false; // quad_error exceeded the requested tolerance
};

// Normalization of the state with creation columns `photons` (0-based column
// indices into ξ; ascending). j = photons.size() must satisfy 1 ≤ j ≤ 4 —
// larger products are refused (the matching sum grows as (2j−1)!!).
// `tol` only controls the coarse-grid warning.
NormalizationResult normalization(const PulseMatrix& xi, const CovKernel& R,
                                  const std::vector<Index>& photons, double tol = 1e-3);

// All m columns are photon columns.
NormalizationResult normalization(const PulseMatrix& xi, const CovKernel& R, double tol = 1e-3);

// Brace-literal column lists ({0}, {0, 1}) must select the column overload,
// not convert to the tolerance scalar of the all-columns overload.
inline NormalizationResult normalization(const PulseMatrix& xi, const CovKernel& R,
                                         std::initializer_list<Index> photons,
                                         double tol = 1e-3) {
    return normalization(xi, R, std::vector<Index>(photons), tol);
}

// ------------------------- Photon–Gaussian state -----------------------------

struct PhotonGaussianState {
    PulseMatrix xi;
    std::vector<Index> photons; // active creation columns (ascending)
    CovKernel R;
    double norm = 0.0;
    double norm_tol = 0.0;
};

} // namespace qls::fields
