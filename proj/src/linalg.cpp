// linalg.cpp — Dense numerical kernels

#include "qls/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <limits>

namespace qls::linalg {

Matrix expm(const Matrix& A) {
    if (A.rows() != A.cols()) throw ValidationError("expm: matrix must be square");
    return A.exp();
}

Matrix lyapunov(const Matrix& A, const Matrix& Q) {
    if (A.rows() != A.cols() || Q.rows() != Q.cols() || A.rows() != Q.rows()) {
        throw ValidationError("lyapunov: A and Q must be square with matching size");
    }
    const Index n = A.rows();

    Eigen::ComplexSchur<Matrix> schur(A);
    if (schur.info() != Eigen::Success) throw NumericalError("lyapunov: Schur decomposition failed");
    const Matrix& U = schur.matrixU();
    const Matrix& T = schur.matrixT();

    // Transformed equation T·Y + Y·T† = −U†QU; T upper triangular, so solve
    // for the columns of Y from the last to the first, each via a triangular
    // solve with T shifted by conj(T_jj).
    const Matrix Qt = -(U.adjoint() * Q * U);
    Matrix Y = Matrix::Zero(n, n);
    const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
    for (Index j = n - 1; j >= 0; --j) {
        Vector rhs = Qt.col(j);
        for (Index k = j + 1; k < n; ++k) rhs -= std::conj(T(j, k)) * Y.col(k);
        Matrix M = T;
        const Complex shift = std::conj(T(j, j));
        M.diagonal().array() += shift;
        for (Index i = 0; i < n; ++i) {
            if (std::abs(M(i, i)) < 1e-14 * scale) {
                throw NumericalError(
                    "lyapunov: operator is singular (eigenvalue pair with lambda_i + conj(lambda_j) "
                    "~ 0); the equation has no unique solution");
            }
        }
        Y.col(j) = M.triangularView<Eigen::Upper>().solve(rhs);
    }
    Matrix X = U * Y * U.adjoint();

    const double res = lyapunov_residual(A, X, Q);
    if (res > 1e-9) {
        throw NumericalError("lyapunov: residual " + std::to_string(res) +
                             " exceeds 1e-9; equation is too ill-conditioned");
    }
    return X;
}

double lyapunov_residual(const Matrix& A, const Matrix& X, const Matrix& Q) {
    const Matrix R = A * X + X * A.adjoint() + Q;
    return R.cwiseAbs().maxCoeff() / std::max(1.0, Q.cwiseAbs().maxCoeff());
}

std::vector<Matrix> propagator_table(const Matrix& A, double dt, std::size_t count,
                                     std::size_t refresh) {
    if (A.rows() != A.cols()) throw ValidationError("propagator_table: matrix must be square");
    if (!(dt > 0.0)) throw ValidationError("propagator_table: dt must be positive");
    if (refresh == 0) refresh = 256;
    std::vector<Matrix> table;
    table.reserve(count);
    if (count == 0) return table;
    const Matrix step = expm(A * dt);
    table.push_back(Matrix::Identity(A.rows(), A.cols()));
    for (std::size_t k = 1; k < count; ++k) {
        if (k % refresh == 0) {
            table.push_back(expm(A * (dt * static_cast<double>(k))));
        } else {
            table.push_back(table.back() * step);
        }
    }
    return table;
}

double spectral_norm(const Matrix& A) {
    return Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
}

double spectral_abscissa(const Matrix& A) {
    const auto evs = eigenvalues(A);
    double a = -std::numeric_limits<double>::infinity();
    for (const auto& ev : evs) a = std::max(a, ev.real());
    return a;
}

std::vector<Complex> eigenvalues(const Matrix& A) {
    if (A.rows() != A.cols()) throw ValidationError("eigenvalues: matrix must be square");
    Eigen::ComplexEigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalError("eigenvalues: solver failed");
    std::vector<Complex> evs(static_cast<std::size_t>(A.rows()));
    for (Index i = 0; i < A.rows(); ++i) evs[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    return evs;
}

bool is_hurwitz(const Matrix& A, double margin) { return spectral_abscissa(A) < -margin; }

Index numerical_rank(const Matrix& A, double rel_tol) {
    Eigen::JacobiSVD<Matrix> svd(A);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = rel_tol * sv(0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) ++rank;
    }
    return rank;
}

double min_eigenvalue_hermitian(const Matrix& A) {
    const Matrix H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(H, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("min_eigenvalue_hermitian: solver failed");
    }
    return solver.eigenvalues()(0);
}

} // namespace qls::linalg
