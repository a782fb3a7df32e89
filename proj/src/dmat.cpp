// dmat.cpp — Doubled-up block matrix helpers

#include "qls/dmat.hpp"

namespace qls::dmat {

namespace {

void require_even(const Matrix& X, const char* who) {
    if (X.rows() % 2 != 0 || X.cols() % 2 != 0) {
        throw ValidationError(std::string(who) + ": matrix dimensions must be even, got " +
                              std::to_string(X.rows()) + "x" + std::to_string(X.cols()));
    }
    if (X.rows() == 0 || X.cols() == 0) {
        throw ValidationError(std::string(who) + ": matrix must be nonempty");
    }
}

} // namespace

Matrix jmat(Index k) {
    if (k <= 0) throw ValidationError("jmat: block size must be positive");
    Matrix J = Matrix::Identity(2 * k, 2 * k);
    J.bottomRightCorner(k, k) *= -1.0;
    return J;
}

Matrix theta(Index k) {
    if (k <= 0) throw ValidationError("theta: block size must be positive");
    Matrix T = Matrix::Zero(2 * k, 2 * k);
    T.topRightCorner(k, k) = Matrix::Identity(k, k);
    T.bottomLeftCorner(k, k) = -Matrix::Identity(k, k);
    return T;
}

Matrix swap_halves(Index k) {
    if (k <= 0) throw ValidationError("swap_halves: block size must be positive");
    Matrix P = Matrix::Zero(2 * k, 2 * k);
    P.topRightCorner(k, k) = Matrix::Identity(k, k);
    P.bottomLeftCorner(k, k) = Matrix::Identity(k, k);
    return P;
}

Matrix delta(const Matrix& U, const Matrix& V) {
    if (U.rows() != V.rows() || U.cols() != V.cols()) {
        throw ValidationError("delta: U and V must have identical dimensions");
    }
    if (U.rows() == 0 || U.cols() == 0) throw ValidationError("delta: blocks must be nonempty");
    Matrix X(2 * U.rows(), 2 * U.cols());
    X.topLeftCorner(U.rows(), U.cols()) = U;
    X.topRightCorner(U.rows(), U.cols()) = V;
    X.bottomLeftCorner(U.rows(), U.cols()) = V.conjugate();
    X.bottomRightCorner(U.rows(), U.cols()) = U.conjugate();
    return X;
}

Matrix delta(const Matrix& U) { return delta(U, Matrix::Zero(U.rows(), U.cols())); }

Matrix minus_block(const Matrix& X) {
    require_even(X, "minus_block");
    return X.topLeftCorner(X.rows() / 2, X.cols() / 2);
}

Matrix plus_block(const Matrix& X) {
    require_even(X, "plus_block");
    return X.topRightCorner(X.rows() / 2, X.cols() / 2);
}

Matrix from_upper(const Matrix& upper) {
    if (upper.cols() % 2 != 0) throw ValidationError("from_upper: column count must be even");
    const Index k = upper.cols() / 2;
    return delta(upper.leftCols(k), upper.rightCols(k));
}

Matrix flat(const Matrix& X) {
    require_even(X, "flat");
    const Index j = X.rows() / 2;
    const Index k = X.cols() / 2;
    return jmat(k) * X.adjoint() * jmat(j);
}

double structure_residual(const Matrix& X) {
    require_even(X, "structure_residual");
    const Index j = X.rows() / 2;
    const Index k = X.cols() / 2;
    const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
    const double dev_ll = (X.bottomLeftCorner(j, k) - X.topRightCorner(j, k).conjugate())
                              .cwiseAbs()
                              .maxCoeff();
    const double dev_lr = (X.bottomRightCorner(j, k) - X.topLeftCorner(j, k).conjugate())
                              .cwiseAbs()
                              .maxCoeff();
    return std::max(dev_ll, dev_lr) / scale;
}

bool is_doubled_up(const Matrix& X, double tol) { return structure_residual(X) <= tol; }

void require_doubled(const Matrix& X, double tol, const std::string& what) {
    const double res = structure_residual(X);
    if (res > tol) {
        throw ValidationError(what + ": matrix is not doubled-up (relative block deviation " +
                              std::to_string(res) + " exceeds tolerance " + std::to_string(tol) + ")");
    }
}

Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Index i = 0; i < A.rows(); ++i) {
        for (Index l = 0; l < A.cols(); ++l) {
            K.block(i * B.rows(), l * B.cols(), B.rows(), B.cols()) = A(i, l) * B;
        }
    }
    return K;
}

Matrix kron_power(const Matrix& A, int p) {
    if (p < 1) throw ValidationError("kron_power: exponent must be >= 1");
    Matrix K = A;
    for (int q = 1; q < p; ++q) K = kron(K, A);
    return K;
}

} // namespace qls::dmat
