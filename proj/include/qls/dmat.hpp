// dmat.hpp — Doubled-up block matrices: Δ(U,V) assembly, the ♭ involution,
// the J/Θ metric matrices, and Kronecker utilities.
//
// A doubled-up matrix is a 2j×2k complex matrix of the form
//     Δ(U, V) = [[U, V], [V#, U#]]        (# = entrywise conjugate)
// with U, V of size j×k. Dynamics, couplings, scattering matrices, pulse
// matrices and covariance kernels in this library all carry this block
// structure; products preserve it and the involution
//     X♭ = J_k X† J_j,   J_k = diag(I_k, −I_k)
// satisfies (XY)♭ = Y♭X♭ and flat(Δ(U,V)) = Δ(U†, −Vᵀ).
//
// The alias DoubledMatrix documents intent at API boundaries; structure
// validation is opt-in via require_doubled().

#pragma once

#include "qls/types.hpp"

namespace qls {

using DoubledMatrix = Matrix;

namespace dmat {

// J_k = diag(I_k, −I_k), size 2k×2k.
Matrix jmat(Index k);

// Θ_k = [[0, I_k], [−I_k, 0]], size 2k×2k (antisymmetric).
Matrix theta(Index k);

// Half-swap permutation P_k = [[0, I_k], [I_k, 0]]: P·x̆ conjugates the
// doubled vector ordering (swaps annihilation and creation halves).
Matrix swap_halves(Index k);

// Δ(U, V) = [[U, V], [V#, U#]]. U and V must share dimensions.
Matrix delta(const Matrix& U, const Matrix& V);

// Δ(U, 0).
Matrix delta(const Matrix& U);

// Upper-left block (the "minus" block U of Δ(U,V)); X must have even dims.
Matrix minus_block(const Matrix& X);

// Upper-right block (the "plus" block V of Δ(U,V)).
Matrix plus_block(const Matrix& X);

// Lower half reconstructed from the upper half: [[U,V]] → Δ(U,V). Used to
// re-symmetrize block assemblies that are doubled-up by construction.
Matrix from_upper(const Matrix& upper);

// The ♭ involution X♭ = J_k X† J_j for X of size 2j×2k.
Matrix flat(const Matrix& X);

// Max-norm deviation of X from the Δ(U,V) pattern, relative to max(1, ‖X‖∞).
double structure_residual(const Matrix& X);

bool is_doubled_up(const Matrix& X, double tol = 1e-10);

// Throws ValidationError mentioning `what` if X is not doubled-up within tol.
void require_doubled(const Matrix& X, double tol, const std::string& what);

// Kronecker product (plain; the result of kron on doubled-up factors is not
// doubled-up in general and is returned as an ordinary matrix).
Matrix kron(const Matrix& A, const Matrix& B);

// p-fold Kronecker power, p ≥ 1; kron_power(A, 1) = A.
Matrix kron_power(const Matrix& A, int p);

} // namespace dmat
} // namespace qls
