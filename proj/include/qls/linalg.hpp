// linalg.hpp — Dense numerical kernels: matrix exponential, Lyapunov solves,
// stepped propagator tables, spectral quantities, numerical rank.

#pragma once

#include "qls/types.hpp"

namespace qls::linalg {

// Matrix exponential e^A (scaling-and-squaring Padé).
Matrix expm(const Matrix& A);

// Solve A·X + X·A† + Q = 0 for Hurwitz A (Bartels–Stewart on the complex
// Schur form). Throws NumericalError if A has an eigenvalue pair with
// λ_i + conj(λ_j) ≈ 0 (the operator is singular there) or if the residual
// check fails.
Matrix lyapunov(const Matrix& A, const Matrix& Q);

// Relative residual ‖AX + XA† + Q‖ / max(1, ‖Q‖) in the max norm.
double lyapunov_residual(const Matrix& A, const Matrix& X, const Matrix& Q);

// Table of propagators e^{A·k·dt}, k = 0..count−1, built by repeated
// multiplication with an exact recompute every `refresh` steps to bound
// accumulated rounding drift.
std::vector<Matrix> propagator_table(const Matrix& A, double dt, std::size_t count,
                                     std::size_t refresh = 256);

// Largest singular value.
double spectral_norm(const Matrix& A);

// max Re λ(A).
double spectral_abscissa(const Matrix& A);

std::vector<Complex> eigenvalues(const Matrix& A);

bool is_hurwitz(const Matrix& A, double margin = 0.0);

// Rank with singular values thresholded at rel_tol·σ_max.
Index numerical_rank(const Matrix& A, double rel_tol = 1e-8);

// Smallest eigenvalue of a Hermitian matrix (input is Hermitized first).
double min_eigenvalue_hermitian(const Matrix& A);

} // namespace qls::linalg
