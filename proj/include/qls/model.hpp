// model.hpp — System parameterization and doubled-up state-space realization.
//
// A system with n internal oscillator modes and m input/output channels is
// given by (S₋, C₋, C₊, Ω₋, Ω₊): an m×m unitary scattering matrix, m×n
// annihilation/creation coupling blocks, and n×n Hermitian/symmetric
// energy blocks. Its doubled-up realization is
//     S = Δ(S₋, 0),  C = Δ(C₋, C₊),  B = −C♭,
//     A = −½·C♭C − i·J_n·Δ(Ω₋, Ω₊),
// driving  x̆' = A x̆ + B S ŭ,  y̆ = C x̆ + S ŭ  in the doubled-up picture.

#pragma once

#include "qls/dmat.hpp"
#include "qls/types.hpp"

namespace qls::model {

struct SystemParams {
    Matrix S_minus;     // m×m, unitary
    Matrix C_minus;     // m×n
    Matrix C_plus;      // m×n
    Matrix Omega_minus; // n×n, Hermitian
    Matrix Omega_plus;  // n×n, symmetric

    Index n_osc() const { return Omega_minus.rows(); }
    Index n_ch() const { return S_minus.rows(); }
};

// Shape and structure checks: dimensions consistent, S₋ unitary, Ω₋ Hermitian,
// Ω₊ symmetric. Throws ValidationError with the offending residual.
void validate(const SystemParams& p, double tol = 1e-10);

struct StateSpaceModel {
    Matrix A; // 2n×2n
    Matrix B; // 2n×2m
    Matrix C; // 2m×2n
    Matrix S; // 2m×2m

    Index n_osc() const { return A.rows() / 2; }
    Index n_ch() const { return S.rows() / 2; }
};

// Realize the doubled-up model from parameters (validates first).
StateSpaceModel realize(const SystemParams& p);

// Accept raw doubled-up matrices directly, bypassing the parameterization
// (useful when a model is specified at the matrix level). All four matrices
// must be doubled-up within tol and dimensionally consistent; S must be
// flat-unitary (S♭S = I).
StateSpaceModel from_matrices(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& S,
                              double tol = 1e-10);

// A Hurwitz (strictly stable dynamics).
bool is_stable(const StateSpaceModel& g);

// No creation-operator coupling or pumping: C₊ = 0 and Ω₊ = 0.
bool is_passive(const SystemParams& p, double tol = 1e-12);

// Pure scattering device: C = 0, so the smooth part of the impulse response
// vanishes identically and the map is ŭ ↦ S ŭ.
bool is_static(const StateSpaceModel& g, double tol = 1e-12);

// Stable or static — the precondition for steady-state input/output maps.
void require_settleable(const StateSpaceModel& g, const std::string& who);

// --------------------------- Built-in systems --------------------------------

// Single-mode cavity: detuning omega, decay kappa; passive.
SystemParams cavity(double kappa, double omega);

// Degenerate parametric amplifier via parameters (S₋=1, C₋=√κ, C₊=0, Ω₋=0,
// Ω₊=iε/2); realizes to A = −½[[κ,−ε],[−ε,κ]], B = −√κ·I₂, C = √κ·I₂, S = I₂.
SystemParams dpa(double kappa, double epsilon);

// The same amplifier assembled directly at the matrix level.
StateSpaceModel dpa_model(double kappa, double epsilon);

// Two-channel beamsplitter with transmissivity η ∈ [0,1] (static device,
// modeled with one uncoupled oscillator):
// S₋ = [[√η, √(1−η)], [−√(1−η), √η]].
SystemParams beamsplitter(double eta);

// Cavity on channel 1 with an uncoupled pass-through channel 2 (used for
// mixed photon + coherent-drive scenarios).
SystemParams cavity_with_passthrough(double kappa, double omega);

} // namespace qls::model
