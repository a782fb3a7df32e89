// model.cpp — Parameter validation and doubled-up realization

#include "qls/model.hpp"

#include "qls/linalg.hpp"

#include <cmath>

namespace qls::model {

namespace {

void require_shape(const Matrix& M, Index rows, Index cols, const char* name) {
    if (M.rows() != rows || M.cols() != cols) {
        throw ValidationError(std::string("SystemParams: ") + name + " must be " +
                              std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                              std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
    }
}

} // namespace

void validate(const SystemParams& p, double tol) {
    const Index m = p.S_minus.rows();
    const Index n = p.Omega_minus.rows();
    if (m < 1) throw ValidationError("SystemParams: need at least one channel");
    if (n < 1) throw ValidationError("SystemParams: need at least one oscillator mode");
    require_shape(p.S_minus, m, m, "S_minus");
    require_shape(p.C_minus, m, n, "C_minus");
    require_shape(p.C_plus, m, n, "C_plus");
    require_shape(p.Omega_minus, n, n, "Omega_minus");
    require_shape(p.Omega_plus, n, n, "Omega_plus");

    const double unit_res =
        (p.S_minus.adjoint() * p.S_minus - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
    if (unit_res > tol) {
        throw ValidationError("SystemParams: S_minus is not unitary (residual " +
                              std::to_string(unit_res) + ")");
    }
    const double herm_res = (p.Omega_minus - p.Omega_minus.adjoint()).cwiseAbs().maxCoeff();
    if (herm_res > tol) {
        throw ValidationError("SystemParams: Omega_minus is not Hermitian (residual " +
                              std::to_string(herm_res) + ")");
    }
    const double symm_res = (p.Omega_plus - p.Omega_plus.transpose()).cwiseAbs().maxCoeff();
    if (symm_res > tol) {
        throw ValidationError("SystemParams: Omega_plus is not symmetric (residual " +
                              std::to_string(symm_res) + ")");
    }
}

StateSpaceModel realize(const SystemParams& p) {
    validate(p);
    const Index n = p.n_osc();
    StateSpaceModel g;
    g.S = dmat::delta(p.S_minus);
    g.C = dmat::delta(p.C_minus, p.C_plus);
    g.B = -dmat::flat(g.C);
    g.A = -0.5 * dmat::flat(g.C) * g.C -
          kI * dmat::jmat(n) * dmat::delta(p.Omega_minus, p.Omega_plus);
    return g;
}

StateSpaceModel from_matrices(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& S,
                              double tol) {
    dmat::require_doubled(A, tol, "StateSpaceModel A");
    dmat::require_doubled(B, tol, "StateSpaceModel B");
    dmat::require_doubled(C, tol, "StateSpaceModel C");
    dmat::require_doubled(S, tol, "StateSpaceModel S");
    if (A.rows() != A.cols()) throw ValidationError("StateSpaceModel: A must be square");
    const Index two_n = A.rows();
    const Index two_m = S.rows();
    if (S.rows() != S.cols()) throw ValidationError("StateSpaceModel: S must be square");
    if (B.rows() != two_n || B.cols() != two_m) {
        throw ValidationError("StateSpaceModel: B must be 2n x 2m");
    }
    if (C.rows() != two_m || C.cols() != two_n) {
        throw ValidationError("StateSpaceModel: C must be 2m x 2n");
    }
    const double s_res =
        (dmat::flat(S) * S - Matrix::Identity(two_m, two_m)).cwiseAbs().maxCoeff();
    if (s_res > tol) {
        throw ValidationError("StateSpaceModel: S is not flat-unitary (residual " +
                              std::to_string(s_res) + ")");
    }
    return StateSpaceModel{A, B, C, S};
}

bool is_stable(const StateSpaceModel& g) { return linalg::is_hurwitz(g.A); }

bool is_passive(const SystemParams& p, double tol) {
    return p.C_plus.cwiseAbs().maxCoeff() <= tol && p.Omega_plus.cwiseAbs().maxCoeff() <= tol;
}

bool is_static(const StateSpaceModel& g, double tol) {
    return g.C.cwiseAbs().maxCoeff() <= tol;
}

void require_settleable(const StateSpaceModel& g, const std::string& who) {
    if (!is_stable(g) && !is_static(g)) {
        throw NumericalError(who + ": dynamics matrix is not Hurwitz (spectral abscissa " +
                             std::to_string(linalg::spectral_abscissa(g.A)) +
                             ") and the system is not a static scattering device");
    }
}

SystemParams cavity(double kappa, double omega) {
    if (!(kappa > 0.0)) throw ValidationError("cavity: kappa must be positive");
    SystemParams p;
    p.S_minus = Matrix::Identity(1, 1);
    p.C_minus = Matrix::Constant(1, 1, std::sqrt(kappa));
    p.C_plus = Matrix::Zero(1, 1);
    p.Omega_minus = Matrix::Constant(1, 1, omega);
    p.Omega_plus = Matrix::Zero(1, 1);
    return p;
}

SystemParams dpa(double kappa, double epsilon) {
    if (!(kappa > 0.0)) throw ValidationError("dpa: kappa must be positive");
    if (!(epsilon >= 0.0 && epsilon < kappa)) {
        throw ValidationError("dpa: need 0 <= epsilon < kappa for stable dynamics");
    }
    SystemParams p;
    p.S_minus = Matrix::Identity(1, 1);
    p.C_minus = Matrix::Constant(1, 1, std::sqrt(kappa));
    p.C_plus = Matrix::Zero(1, 1);
    p.Omega_minus = Matrix::Zero(1, 1);
    p.Omega_plus = Matrix::Constant(1, 1, Complex(0.0, 0.5 * epsilon));
    return p;
}

StateSpaceModel dpa_model(double kappa, double epsilon) {
    if (!(kappa > 0.0)) throw ValidationError("dpa_model: kappa must be positive");
    if (!(epsilon >= 0.0 && epsilon < kappa)) {
        throw ValidationError("dpa_model: need 0 <= epsilon < kappa for stable dynamics");
    }
    Matrix A(2, 2);
    A << -0.5 * kappa, 0.5 * epsilon, 0.5 * epsilon, -0.5 * kappa;
    const double rk = std::sqrt(kappa);
    const Matrix B = -rk * Matrix::Identity(2, 2);
    const Matrix C = rk * Matrix::Identity(2, 2);
    const Matrix S = Matrix::Identity(2, 2);
    return from_matrices(A, B, C, S);
}

SystemParams beamsplitter(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ValidationError("beamsplitter: eta must be in [0,1]");
    const double a = std::sqrt(eta);
    const double b = std::sqrt(1.0 - eta);
    Matrix S(2, 2);
    S << a, b, -b, a;
    SystemParams p;
    p.S_minus = S;
    p.C_minus = Matrix::Zero(2, 1);
    p.C_plus = Matrix::Zero(2, 1);
    p.Omega_minus = Matrix::Zero(1, 1);
    p.Omega_plus = Matrix::Zero(1, 1);
    return p;
}

SystemParams cavity_with_passthrough(double kappa, double omega) {
    if (!(kappa > 0.0)) throw ValidationError("cavity_with_passthrough: kappa must be positive");
    SystemParams p;
    p.S_minus = Matrix::Identity(2, 2);
    p.C_minus = Matrix::Zero(2, 1);
    p.C_minus(0, 0) = std::sqrt(kappa);
    p.C_plus = Matrix::Zero(2, 1);
    p.Omega_minus = Matrix::Constant(1, 1, omega);
    p.Omega_plus = Matrix::Zero(1, 1);
    return p;
}

} // namespace qls::model
