// response.cpp — Impulse responses, transfer functions, stable inverse

#include "qls/response.hpp"

#include "qls/linalg.hpp"

#include <Eigen/LU>

namespace qls::response {

Matrix ImpulseResponse::smooth(double t) const {
    const double s = (support == Support::causal) ? t : -t;
    if (s < 0.0) return Matrix::Zero(delta_coeff.rows(), delta_coeff.cols());
    return left * linalg::expm(gen * s) * right;
}

Matrix ImpulseResponse::smooth_minus(double t) const { return dmat::minus_block(smooth(t)); }

Matrix ImpulseResponse::smooth_plus(double t) const { return dmat::plus_block(smooth(t)); }

ImpulseResponse impulse(const model::StateSpaceModel& g) {
    ImpulseResponse h;
    h.delta_coeff = g.S;
    h.left = -g.C;
    h.gen = g.A;
    h.right = dmat::flat(g.C) * g.S;
    h.support = Support::causal;
    return h;
}

ImpulseResponse stable_inverse(const model::StateSpaceModel& g) {
    model::require_settleable(g, "stable_inverse");
    const Matrix S_flat = dmat::flat(g.S);
    ImpulseResponse h;
    h.delta_coeff = S_flat;
    h.left = -S_flat * g.C;
    h.gen = dmat::flat(g.A); // smooth(t) = left · e^{−A♭ t} · right for t ≤ 0
    h.right = dmat::flat(g.C);
    h.support = Support::anticausal;
    return h;
}

std::vector<Matrix> sample_smooth(const ImpulseResponse& h, double dt, std::size_t count) {
    const auto props = linalg::propagator_table(h.gen, dt, count);
    std::vector<Matrix> out;
    out.reserve(count);
    for (const auto& P : props) out.push_back(h.left * P * h.right);
    return out;
}

Matrix transfer(const model::StateSpaceModel& g, Complex s, double pole_tol) {
    const auto evs = linalg::eigenvalues(g.A);
    const double scale = std::max(1.0, g.A.cwiseAbs().maxCoeff());
    for (const auto& ev : evs) {
        if (std::abs(s - ev) < pole_tol * scale) {
            throw NumericalError("transfer: evaluation point is at (or numerically at) a pole, s = (" +
                                 std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")");
        }
    }
    const Index two_n = g.A.rows();
    const Matrix M = s * Matrix::Identity(two_n, two_n) - g.A;
    const Matrix X = M.partialPivLu().solve(dmat::flat(g.C) * g.S);
    return g.S - g.C * X;
}

double laplace_pairing_residual(const model::StateSpaceModel& g, Complex s) {
    const Matrix Xi_s = transfer(g, s);
    const Matrix Xi_conj = transfer(g, std::conj(s));
    const Index m = g.n_ch();
    const double scale = std::max(1.0, Xi_s.cwiseAbs().maxCoeff());
    const double dev_ll =
        (Xi_s.bottomLeftCorner(m, m) - Xi_conj.topRightCorner(m, m).conjugate()).cwiseAbs().maxCoeff();
    const double dev_lr =
        (Xi_s.bottomRightCorner(m, m) - Xi_conj.topLeftCorner(m, m).conjugate()).cwiseAbs().maxCoeff();
    return std::max(dev_ll, dev_lr) / scale;
}

FlatUnitaryReport check_flat_unitary(const model::StateSpaceModel& g,
                                     const std::vector<double>& omegas, double tol) {
    if (omegas.empty()) throw ValidationError("check_flat_unitary: empty frequency grid");
    const Index two_m = 2 * g.n_ch();
    const Matrix I = Matrix::Identity(two_m, two_m);
    FlatUnitaryReport report;
    report.tol = tol;
    for (const double w : omegas) {
        const Matrix Xi = transfer(g, Complex(0.0, w));
        const Matrix Xf = dmat::flat(Xi);
        const double r1 = linalg::spectral_norm(Xf * Xi - I);
        const double r2 = linalg::spectral_norm(Xi * Xf - I);
        const double r = std::max(r1, r2);
        if (r > report.max_residual) {
            report.max_residual = r;
            report.worst_omega = w;
        }
    }
    report.pass = report.max_residual <= tol;
    return report;
}

} // namespace qls::response
