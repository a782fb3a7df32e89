// synthesis.cpp — All-pass realization, cascading, and pulse shaping.

#include "qls/synthesis.hpp"
#include "qls/dmat.hpp"
#include "qls/intensity.hpp"
#include "qls/linalg.hpp"
#include "qls/response.hpp"

#include <cmath>
#include <sstream>

namespace qls::synthesis {

Complex RationalAllPass::transfer(Complex s) const {
    const Index n = state_dim();
    if (n == 0) return D;
    const Matrix M = s * Matrix::Identity(n, n) - A;
    const Matrix x = M.partialPivLu().solve(B);
    return D + (C * x).value();
}

RationalAllPass allpass_section(Complex pole) {
    if (pole.real() >= 0.0)
        throw ValidationError("All-pass section: pole must lie in the open left half plane");
    const double c = std::sqrt(-2.0 * pole.real());
    RationalAllPass d;
    d.A = Matrix::Constant(1, 1, pole);
    d.C = Matrix::Constant(1, 1, Complex{c, 0.0});
    d.B = Matrix::Constant(1, 1, Complex{-c, 0.0});
    d.D = Complex{1.0, 0.0};
    return d;
}

RationalAllPass allpass_product(const RationalAllPass& d1, const RationalAllPass& d2) {
    const Index n1 = d1.state_dim(), n2 = d2.state_dim();
    RationalAllPass d;
    d.A = Matrix::Zero(n1 + n2, n1 + n2);
    d.A.topLeftCorner(n1, n1) = d1.A;
    d.A.bottomLeftCorner(n2, n1) = d2.B * d1.C;
    d.A.bottomRightCorner(n2, n2) = d2.A;
    d.B = Matrix::Zero(n1 + n2, 1);
    d.B.topRows(n1) = d1.B;
    d.B.bottomRows(n2) = d2.B * d1.D;
    d.C = Matrix::Zero(1, n1 + n2);
    d.C.leftCols(n1) = d2.D * d1.C;
    d.C.rightCols(n2) = d2.C;
    d.D = d2.D * d1.D;
    return d;
}

// ------------------------------- Feasibility ----------------------------------

Complex fourier(const fields::PulseFn& nu, const TimeGrid& grid, double omega) {
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        acc += grid.weight(i) * nu(t) * std::exp(-kI * omega * t);
    }
    return acc;
}

FeasibilityReport check_feasible(const fields::PulseFn& nu, const fields::PulseFn& nu_out,
                                 const TimeGrid& grid, const std::vector<double>& omegas,
                                 double tol) {
    if (omegas.empty()) throw ValidationError("Feasibility: frequency grid is empty");
    double peak = 0.0, dev = 0.0;
    std::vector<double> mag_in(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        mag_in[k] = std::norm(fourier(nu, grid, omegas[k]));
        peak = std::max(peak, mag_in[k]);
    }
    if (peak <= 0.0) throw ValidationError("Feasibility: input pulse has an empty spectrum");
    for (std::size_t k = 0; k < omegas.size(); ++k)
        dev = std::max(dev, std::abs(std::norm(fourier(nu_out, grid, omegas[k])) - mag_in[k]));
    FeasibilityReport rep;
    rep.max_deviation = dev / peak;
    rep.tol = tol;
    rep.feasible = rep.max_deviation < tol;
    return rep;
}

// -------------------------------- Synthesis -----------------------------------

model::SystemParams synthesize(const RationalAllPass& d) {
    const Index n = d.state_dim();
    if (d.B.rows() != n || d.B.cols() != 1 || d.C.rows() != 1 || d.C.cols() != n)
        throw ValidationError("Synthesis: realization blocks have inconsistent shapes");
    if (std::abs(d.D - Complex{1.0, 0.0}) > 1e-12)
        throw ValidationError("Synthesis: the direct term must equal 1 for an all-pass ratio");

    model::SystemParams p;
    p.S_minus = Matrix::Identity(1, 1);
    p.C_plus = Matrix::Zero(1, n);
    p.Omega_plus = Matrix::Zero(n, n);

    if (n == 0) {
        p.C_minus = Matrix::Zero(1, 0);
        p.Omega_minus = Matrix::Zero(0, 0);
        return p;
    }

    if (!linalg::is_hurwitz(d.A))
        throw ValidationError("Synthesis: the realization matrix A is not Hurwitz stable");

    // Minimality via Krylov controllability/observability ranks.
    Matrix ctrb(n, n), obsv(n, n);
    Matrix bcol = d.B, crow = d.C;
    for (Index k = 0; k < n; ++k) {
        ctrb.col(k) = bcol;
        obsv.row(k) = crow;
        bcol = d.A * bcol;
        crow = crow * d.A;
    }
    if (linalg::numerical_rank(ctrb) < n || linalg::numerical_rank(obsv) < n)
        throw ValidationError("Synthesis: the realization is not minimal (rank-deficient "
                              "controllability or observability matrix)");

    // Observability Lyapunov solve A†X + XA + C†C = 0.
    const Matrix X = linalg::lyapunov(d.A.adjoint(), d.C.adjoint() * d.C);
    const double min_eig = linalg::min_eigenvalue_hermitian(X);
    if (min_eig <= 1e-10 * std::max(1.0, X.cwiseAbs().maxCoeff()))
        throw ValidationError("Synthesis: Lyapunov solution is not positive definite "
                              "(minimality violation); smallest eigenvalue " +
                              std::to_string(min_eig));

    // All-pass identity D†C + B†X = 0.
    const double allpass_residual =
        (std::conj(d.D) * d.C + d.B.adjoint() * X).cwiseAbs().maxCoeff();
    if (allpass_residual > 1e-8 * std::max(1.0, X.cwiseAbs().maxCoeff()))
        throw ValidationError("Synthesis: realization is not all-pass; ||D†C + B†X|| = " +
                              std::to_string(allpass_residual));

    p.C_minus = d.C;
    p.Omega_minus = 0.5 * kI * (X * d.A - d.A.adjoint() * X);
    p.Omega_minus = 0.5 * (p.Omega_minus + p.Omega_minus.adjoint()).eval();

    // The realized transfer must reproduce d on a probe set.
    const model::StateSpaceModel g = model::realize(p);
    for (double w : {0.0, 0.37, -1.4, 2.9, -7.3, 19.0}) {
        const Complex have = response::transfer(g, kI * w)(0, 0);
        const Complex want = d.transfer(kI * w);
        if (std::abs(have - want) > 1e-8)
            throw ConsistencyError("Synthesis: realized transfer deviates from the target ratio "
                                   "at omega = " + std::to_string(w));
    }
    return p;
}

model::StateSpaceModel cascade(const model::SystemParams& g1, const model::SystemParams& g2) {
    if (g1.n_ch() != g2.n_ch())
        throw ValidationError("Cascade: channel counts differ (" + std::to_string(g1.n_ch()) +
                              " vs " + std::to_string(g2.n_ch()) + ")");
    const model::StateSpaceModel m1 = model::realize(g1);
    const model::StateSpaceModel m2 = model::realize(g2);
    const Index n1 = m1.n_osc(), n2 = m2.n_osc(), m = m1.n_ch();

    // Assemble in (U, V) block components: plain block stacking does not
    // preserve the doubled-up interleaving.
    auto stack = [&](const Matrix& TL, const Matrix& BL, const Matrix& BR, Index rt, Index rb,
                     Index cl, Index cr) -> Matrix {
        // [[TL, 0], [BL, BR]] for one component.
        Matrix M = Matrix::Zero(rt + rb, cl + cr);
        M.topLeftCorner(rt, cl) = TL;
        M.bottomLeftCorner(rb, cl) = BL;
        M.bottomRightCorner(rb, cr) = BR;
        return M;
    };

    const Matrix A1u = dmat::minus_block(m1.A), A1v = dmat::plus_block(m1.A);
    const Matrix A2u = dmat::minus_block(m2.A), A2v = dmat::plus_block(m2.A);
    const Matrix K = m2.B * m2.S * m1.C; // doubled 2n2×2n1
    const Matrix Au = stack(A1u, dmat::minus_block(K), A2u, n1, n2, n1, n2);
    const Matrix Av = stack(A1v, dmat::plus_block(K), A2v, n1, n2, n1, n2);
    const Matrix A = dmat::delta(Au, Av);

    // C_c = [S₂C₁  C₂] as row blocks in component form.
    Matrix Cu(m, n1 + n2), Cv(m, n1 + n2);
    const Matrix SC = m2.S * m1.C;
    Cu << dmat::minus_block(SC), dmat::minus_block(m2.C);
    Cv << dmat::plus_block(SC), dmat::plus_block(m2.C);
    const Matrix C = dmat::delta(Cu, Cv);

    // B_c = [B₁·flat(S₂); B₂] as column blocks (flat(S₂) = S₂⁻¹ for
    // flat-unitary scattering).
    const Matrix BSf = m1.B * dmat::flat(m2.S);
    Matrix Bu(n1 + n2, m), Bv(n1 + n2, m);
    Bu << dmat::minus_block(BSf), dmat::minus_block(m2.B);
    Bv << dmat::plus_block(BSf), dmat::plus_block(m2.B);
    const Matrix B = dmat::delta(Bu, Bv);

    const Matrix S = m2.S * m1.S;
    const model::StateSpaceModel g = model::from_matrices(A, B, C, S);

    // Realization identity B = −C♭ must survive the composition.
    const double flat_residual = (g.B + dmat::flat(g.C)).cwiseAbs().maxCoeff();
    if (flat_residual > 1e-9)
        throw ConsistencyError("Cascade: composite input matrix deviates from -flat(C) by " +
                               std::to_string(flat_residual));

    // Composite transfer must factor as the product of the parts.
    for (double w : {0.0, 0.61, -2.2, 5.0}) {
        const Matrix want = response::transfer(m2, kI * w) * response::transfer(m1, kI * w);
        const Matrix have = response::transfer(g, kI * w);
        if ((have - want).cwiseAbs().maxCoeff() > 1e-9)
            throw ConsistencyError("Cascade: composite transfer does not factor through the "
                                   "series parts at omega = " + std::to_string(w));
    }
    return g;
}

fields::PulseMatrix shape_pulse(const fields::PulseFn& nu, const fields::PulseFn& nu_out,
                                const RationalAllPass& d, const TimeGrid& grid,
                                const std::vector<double>& omegas, double tol) {
    const FeasibilityReport rep = check_feasible(nu, nu_out, grid, omegas, tol);
    if (!rep.feasible) {
        std::ostringstream os;
        os << "Shaper: pulse pair is not feasible; magnitude spectra deviate by "
           << rep.max_deviation << " (tolerance " << tol << ")";
        throw ValidationError(os.str());
    }

    // d must reproduce the spectral ratio ν̂_out/ν̂ where the input spectrum
    // carries weight.
    double peak = 0.0;
    std::vector<Complex> hat_in(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        hat_in[k] = fourier(nu, grid, omegas[k]);
        peak = std::max(peak, std::abs(hat_in[k]));
    }
    double ratio_dev = 0.0;
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        if (std::abs(hat_in[k]) < 1e-3 * peak) continue;
        const Complex ratio = fourier(nu_out, grid, omegas[k]) / hat_in[k];
        ratio_dev = std::max(ratio_dev, std::abs(ratio - d.transfer(kI * omegas[k])));
    }
    if (ratio_dev > std::max(tol, 10.0 * rep.max_deviation)) {
        std::ostringstream os;
        os << "Shaper: supplied all-pass ratio deviates from the spectral ratio of the pulses "
           << "by " << ratio_dev;
        throw ValidationError(os.str());
    }

    const model::StateSpaceModel g = model::realize(synthesize(d));
    const fields::PulseMatrix xi = fields::photon_pulses(grid, {nu});
    return intensity::steady_pulses(g, xi);
}

} // namespace qls::synthesis
