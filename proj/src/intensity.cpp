// intensity.cpp — Transient moment integration, steady-state output pulses and
// intensity, and covariance/spectral transfer.

#include "qls/intensity.hpp"
#include "qls/dmat.hpp"
#include "qls/linalg.hpp"
#include "qls/response.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace qls::intensity {

namespace {

// Finalize a trace: totals, Hermiticity cleanup for the eigenvalue check, and
// the positivity diagnostic (throws if a sample is negative beyond tolerance).
IntensityTrace finalize_trace(TimeGrid grid, std::vector<Matrix> values) {
    IntensityTrace trace;
    trace.grid = grid;
    trace.values = std::move(values);
    trace.total.resize(trace.values.size());
    double min_eig = 0.0;
    for (std::size_t i = 0; i < trace.values.size(); ++i) {
        trace.total[i] = trace.values[i].trace().real();
        min_eig = std::min(min_eig, linalg::min_eigenvalue_hermitian(trace.values[i]));
    }
    trace.min_eigenvalue = min_eig;
    if (min_eig < -1e-8)
        throw ConsistencyError("Intensity: output intensity matrix has eigenvalue " +
                               std::to_string(min_eig) + " below -1e-8; positivity violated");
    return trace;
}

void require_zero_plus_part(const fields::PulseMatrix& xi, const char* who) {
    double worst = 0.0;
    for (const Matrix& xp : xi.xi_plus) worst = std::max(worst, xp.cwiseAbs().maxCoeff());
    if (worst > 1e-12)
        throw ValidationError(std::string(who) +
                              ": input pulse matrix must have a vanishing ξ⁺ block (max |entry| = " +
                              std::to_string(worst) + ")");
}

} // namespace

// ----------------------------- Transient moments ------------------------------

std::vector<TransientState> integrate_transient(const model::StateSpaceModel& g,
                                                const fields::PulseMatrix& xi_in,
                                                const TimeGrid& grid) {
    if (xi_in.n_ch != g.n_ch())
        throw ValidationError("Transient: pulse channel count does not match the system");
    require_zero_plus_part(xi_in, "Transient");
    if (grid.size < 2) throw ValidationError("Transient: grid needs at least two samples");

    const Index n = g.n_osc(), m = g.n_ch();
    const Matrix A = g.A;
    const Matrix Adag = g.A.adjoint();
    Matrix sel_minus = Matrix::Zero(2 * m, m), sel_plus = Matrix::Zero(2 * m, m);
    sel_minus.topRows(m) = Matrix::Identity(m, m);
    sel_plus.bottomRows(m) = Matrix::Identity(m, m);
    const Matrix Bm = g.B * g.S * sel_minus; // 2n×m
    const Matrix Bp = g.B * g.S * sel_plus;  // 2n×m
    const Matrix Bm_dag = Bm.adjoint();
    const Matrix Bp_dag = Bp.adjoint();
    const Matrix BS = g.B * g.S;
    Matrix vac = Matrix::Zero(2 * m, 2 * m); // diag(I_m, 0_m)
    vac.topLeftCorner(m, m) = Matrix::Identity(m, m);
    const Matrix Fconst = BS * vac * BS.adjoint();

    struct Deriv {
        Matrix mm, mp, sg;
    };
    auto rhs = [&](const Matrix& xi, const Matrix& mm, const Matrix& mp, const Matrix& sg) -> Deriv {
        const Matrix xid = xi.adjoint();
        Deriv d;
        d.mm = mm * Adag + xid * Bm_dag;
        d.mp = mp * Adag + xi * Bp_dag;
        d.sg = A * sg + sg * Adag + Bm * xi * mm + Bp * xid * mp +
               mm.adjoint() * xid * Bm_dag + mp.adjoint() * xi * Bp_dag + Fconst;
        return d;
    };
    auto is_off = [](const Matrix& xi) { return xi.cwiseAbs().maxCoeff() == 0.0; };

    std::vector<TransientState> out;
    out.reserve(grid.size);
    Matrix mm = Matrix::Zero(m, 2 * n);
    Matrix mp = Matrix::Zero(m, 2 * n);
    Matrix sg = Matrix::Zero(2 * n, 2 * n);
    sg.topLeftCorner(n, n) = Matrix::Identity(n, n);
    out.push_back({grid.t0, mm, mp, sg});

    const double dt = grid.dt;
    for (std::size_t i = 1; i < grid.size; ++i) {
        const double t = grid.time(i - 1);
        Matrix xi_a = xi_in.minus_at(t);
        Matrix xi_m = xi_in.minus_at(t + 0.5 * dt);
        Matrix xi_b = xi_in.minus_at(t + dt);
        // Pulse supports start and end on grid nodes. When a step straddles the
        // switch-on node (zero at the left node and midpoint, nonzero at the
        // right node) the pulse is off over the whole open step, so the stage
        // at the right node must not see the post-jump value; symmetrically at
        // switch-off.
        if (is_off(xi_a) && is_off(xi_m) && !is_off(xi_b))
            xi_b.setZero();
        else if (!is_off(xi_a) && is_off(xi_m) && is_off(xi_b))
            xi_a.setZero();
        const Deriv k1 = rhs(xi_a, mm, mp, sg);
        const Deriv k2 = rhs(xi_m, mm + 0.5 * dt * k1.mm, mp + 0.5 * dt * k1.mp,
                             sg + 0.5 * dt * k1.sg);
        const Deriv k3 = rhs(xi_m, mm + 0.5 * dt * k2.mm, mp + 0.5 * dt * k2.mp,
                             sg + 0.5 * dt * k2.sg);
        const Deriv k4 = rhs(xi_b, mm + dt * k3.mm, mp + dt * k3.mp, sg + dt * k3.sg);
        mm += (dt / 6.0) * (k1.mm + 2.0 * k2.mm + 2.0 * k3.mm + k4.mm);
        mp += (dt / 6.0) * (k1.mp + 2.0 * k2.mp + 2.0 * k3.mp + k4.mp);
        sg += (dt / 6.0) * (k1.sg + 2.0 * k2.sg + 2.0 * k3.sg + k4.sg);

        if (i % 64 == 0 || i + 1 == grid.size) {
            const double drift = (sg - sg.adjoint()).cwiseAbs().maxCoeff();
            if (drift > 1e-6)
                throw NumericalError("Transient: covariance Hermiticity drift " +
                                     std::to_string(drift) + " exceeds 1e-6; reduce the step");
        }
        out.push_back({grid.time(i), mm, mp, sg});
    }
    return out;
}

IntensityTrace transient_intensity(const model::StateSpaceModel& g,
                                   const std::vector<TransientState>& states,
                                   const fields::PulseMatrix& xi_in) {
    if (states.size() < 2) throw ValidationError("Intensity: need at least two transient samples");
    if (xi_in.n_ch != g.n_ch())
        throw ValidationError("Intensity: pulse channel count does not match the system");

    const Index n = g.n_osc(), m = g.n_ch();
    const Matrix Cm = g.C.topRows(m);          // C⁻ = [I_m 0]C, m×2n
    const Matrix CmConj = Cm.conjugate();
    const Matrix CmT = Cm.transpose();
    const Matrix Jn = dmat::jmat(n);
    const Matrix SmConj = g.S.topLeftCorner(m, m).conjugate();
    const Matrix SmT = g.S.topLeftCorner(m, m).transpose();
    const Matrix noise_floor = CmConj * Jn * CmT;

    const double dt = states[1].t - states[0].t;
    TimeGrid grid{states.front().t, dt, states.size()};

    std::vector<Matrix> values;
    values.reserve(states.size());
    for (const TransientState& st : states) {
        const Matrix xi = xi_in.minus_at(st.t);
        const Matrix xid = xi.adjoint();
        Matrix v = CmConj * st.sigma_nu.transpose() * CmT - noise_floor +
                   SmConj * xid * xi * SmT + SmConj * xid * st.m_minus.conjugate() * CmT +
                   CmConj * st.m_minus.transpose() * xi * SmT;
        values.push_back(0.5 * (v + v.adjoint()));
    }
    return finalize_trace(grid, std::move(values));
}

// ------------------------------- Steady state ---------------------------------

namespace {

// O(N) trapezoid state recursion for Y_out(t_i) = S·F_i + ∫ h(t_i−r) F(r) dr on
// a uniform grid, where h(u) = left·e^{gen·u}·right and F is a sampled matrix
// function assumed zero before the grid start.
std::vector<Matrix> convolve_response(const response::ImpulseResponse& h, const Matrix& S,
                                      const TimeGrid& grid,
                                      const std::function<Matrix(std::size_t)>& sample,
                                      bool skip_smooth) {
    std::vector<Matrix> out(grid.size);
    if (skip_smooth) {
        for (std::size_t i = 0; i < grid.size; ++i) out[i] = S * sample(i);
        return out;
    }
    const Matrix E = linalg::expm(h.gen * grid.dt);
    const Matrix y0 = h.right * sample(0);
    Matrix s = y0; // Σ_{l≤i} e^{gen(i−l)dt}·right·F_l
    // Trapezoid endpoint at the support start: q propagates the first nonzero
    // sample so a signal switching on mid-grid gets its half-weight there
    // instead of a phantom half-cell before the switch-on node.
    Matrix q = y0;
    bool started = y0.cwiseAbs().maxCoeff() != 0.0;
    out[0] = S * sample(0);
    for (std::size_t i = 1; i < grid.size; ++i) {
        const Matrix yi = h.right * sample(i);
        s = E * s + yi;
        if (started)
            q = E * q;
        else if (yi.cwiseAbs().maxCoeff() != 0.0) {
            started = true;
            q = yi;
        }
        out[i] = S * sample(i) + h.left * (grid.dt * (s - 0.5 * yi - 0.5 * q));
    }
    return out;
}

} // namespace

fields::PulseMatrix steady_pulses(const model::StateSpaceModel& g,
                                  const fields::PulseMatrix& xi_in) {
    if (xi_in.n_ch != g.n_ch())
        throw ValidationError("Steady pulses: pulse channel count does not match the system");
    model::require_settleable(g, "Steady pulses");

    const Index m = g.n_ch();
    const response::ImpulseResponse h = response::impulse(g);
    auto sample = [&](std::size_t i) -> Matrix {
        return dmat::delta(xi_in.xi_minus[i], xi_in.xi_plus[i]);
    };
    const std::vector<Matrix> doubled =
        convolve_response(h, g.S, xi_in.grid, sample, model::is_static(g));

    fields::PulseMatrix out;
    out.grid = xi_in.grid;
    out.n_ch = m;
    out.xi_minus.reserve(xi_in.grid.size);
    out.xi_plus.reserve(xi_in.grid.size);
    for (const Matrix& X : doubled) {
        out.xi_minus.push_back(X.topLeftCorner(m, m));
        out.xi_plus.push_back(X.topRightCorner(m, m));
    }
    return out;
}

Matrix steady_gramian(const model::StateSpaceModel& g) {
    const Index n = g.n_osc(), m = g.n_ch();
    if (model::is_static(g)) return Matrix::Zero(m, m);
    model::require_settleable(g, "Steady intensity");

    // Smooth up-conversion kernel h⁺(t) = C̃ e^{At} D̃ read off the response
    // blocks: C̃ = −[C₋ C₊], D̃ = [−C₊ᵀ; C₋ᵀ] S₋#.
    const Matrix Cmin = g.C.topLeftCorner(m, n);
    const Matrix Cplus = g.C.topRightCorner(m, n);
    Matrix Ctil(m, 2 * n);
    Ctil << -Cmin, -Cplus;
    Matrix Dtil(2 * n, m);
    Dtil.topRows(n) = -Cplus.transpose();
    Dtil.bottomRows(n) = Cmin.transpose();
    Dtil *= g.S.topLeftCorner(m, m).conjugate();

    if (Dtil.cwiseAbs().maxCoeff() < 1e-14) return Matrix::Zero(m, m); // passive: h⁺ ≡ 0

    const Matrix X = linalg::lyapunov(g.A, Dtil * Dtil.adjoint());
    const Matrix W = (Ctil * X * Ctil.adjoint()).conjugate();
    return 0.5 * (W + W.adjoint());
}

IntensityTrace steady_intensity(const model::StateSpaceModel& g,
                                const fields::PulseMatrix& xi_out) {
    if (xi_out.n_ch != g.n_ch())
        throw ValidationError("Steady intensity: pulse channel count does not match the system");
    const Matrix W = steady_gramian(g);

    std::vector<Matrix> values;
    values.reserve(xi_out.grid.size);
    for (std::size_t i = 0; i < xi_out.grid.size; ++i) {
        const Matrix& xm = xi_out.xi_minus[i];
        const Matrix& xp = xi_out.xi_plus[i];
        values.push_back(W + xp.conjugate() * xp.transpose() + xm.conjugate() * xm.transpose());
    }
    return finalize_trace(xi_out.grid, std::move(values));
}

// --------------------------- Covariance transfer ------------------------------

std::function<Vector(double)> transfer_vector_fn(const model::StateSpaceModel& g,
                                                 const std::function<Vector(double)>& f,
                                                 const TimeGrid& grid) {
    model::require_settleable(g, "Covariance transfer");
    const response::ImpulseResponse h = response::impulse(g);
    auto sample = [&](std::size_t i) -> Matrix { return f(grid.time(i)); };
    std::vector<Matrix> cols = convolve_response(h, g.S, grid, sample, model::is_static(g));

    auto samples = std::make_shared<std::vector<Vector>>();
    samples->reserve(cols.size());
    for (Matrix& c : cols) samples->push_back(Vector(std::move(c)));
    return [grid, samples](double t) -> Vector {
        const double x = (t - grid.t0) / grid.dt;
        const auto last = static_cast<double>(grid.size - 1);
        if (x < -1e-9 || x > last + 1e-9) return Vector::Zero((*samples)[0].size());
        const double xl = std::clamp(x, 0.0, last);
        const auto i0 = static_cast<std::size_t>(std::floor(xl));
        const std::size_t i1 = std::min(i0 + 1, samples->size() - 1);
        const double fr = xl - static_cast<double>(i0);
        return (1.0 - fr) * (*samples)[i0] + fr * (*samples)[i1];
    };
}

fields::CovKernel covariance_transfer(const model::StateSpaceModel& g,
                                      const fields::CovKernel& R_in, const TimeGrid& grid) {
    if (R_in.n_ch != g.n_ch())
        throw ValidationError("Covariance transfer: kernel channel count does not match the system");
    if (R_in.background)
        throw ValidationError("Covariance transfer: input kernels with a stationary background "
                              "part are not supported; only delta + separable structure transfers "
                              "in closed form");
    if (R_in.general)
        throw ValidationError("Covariance transfer: general non-stationary input kernels are not "
                              "supported");
    model::require_settleable(g, "Covariance transfer");

    const Index m = g.n_ch();
    fields::CovKernel out;
    out.n_ch = m;
    const Matrix D = R_in.delta_coeff;
    out.delta_coeff = g.S * D * g.S.adjoint();

    // Separable terms transfer through the full response on both sides.
    for (const fields::SeparableTerm& term : R_in.separable) {
        fields::SeparableTerm t_out;
        t_out.left = transfer_vector_fn(g, term.left, grid);
        t_out.right = transfer_vector_fn(g, term.right, grid);
        out.separable.push_back(std::move(t_out));
    }

    // The delta part scatters into a stationary two-sided exponential
    // background: for τ > 0
    //   K(τ) = left·e^{Aτ}·(right·D·S† + Y·left†),
    // mirrored by adjoint symmetry for τ < 0, where Y solves
    // AY + YA† + (right·D·right†) = 0 and left/right are the smooth impulse
    // factors. At τ = 0 the two one-sided delta-cross limits are averaged.
    const bool has_bg = !model::is_static(g) && D.cwiseAbs().maxCoeff() > 1e-14;
    if (has_bg) {
        const response::ImpulseResponse h = response::impulse(g);
        const Matrix Y = linalg::lyapunov(g.A, h.right * D * h.right.adjoint());
        const Matrix Mplus = h.right * D * g.S.adjoint() + Y * h.left.adjoint(); // 2n×2m
        const Matrix Mminus = g.S * D * h.right.adjoint() + h.left * Y;          // 2m×2n
        const Matrix K0 = 0.5 * (h.left * h.right * D * g.S.adjoint() +
                                 g.S * D * h.right.adjoint() * h.left.adjoint()) +
                          h.left * Y * h.left.adjoint();

        // Passive systems scatter vacuum to vacuum: all background factors
        // vanish identically and the kernel stays a pure delta.
        const double bg_mag = std::max({Mplus.cwiseAbs().maxCoeff(),
                                        Mminus.cwiseAbs().maxCoeff(),
                                        K0.cwiseAbs().maxCoeff()});
        if (bg_mag <= 1e-12 * std::max(1.0, D.cwiseAbs().maxCoeff())) return out;

        auto table = std::make_shared<std::vector<Matrix>>(
            linalg::propagator_table(g.A, grid.dt, grid.size));
        const Matrix A = g.A;
        const Matrix left = h.left;
        const double dt = grid.dt;
        out.background = [table, A, left, Mplus, Mminus, K0, dt](double tau) -> Matrix {
            if (std::abs(tau) < 1e-12 * std::max(1.0, dt)) return K0;
            const double ak = std::abs(tau) / dt;
            const auto k = static_cast<std::size_t>(std::llround(ak));
            Matrix P;
            if (std::abs(ak - static_cast<double>(k)) < 1e-6 && k < table->size())
                P = (*table)[k];
            else
                P = linalg::expm(A * std::abs(tau));
            return tau > 0.0 ? Matrix(left * P * Mplus) : Matrix(Mminus * P.adjoint() * left.adjoint());
        };
    }
    return out;
}

std::vector<Matrix> spectral_transfer(const model::StateSpaceModel& g,
                                      const std::function<Matrix(double)>& R_in_spectrum,
                                      const std::vector<double>& omegas) {
    if (!R_in_spectrum)
        throw ValidationError("Spectral transfer: input spectrum function is empty");
    std::vector<Matrix> out;
    out.reserve(omegas.size());
    for (double w : omegas) {
        const Matrix Xi = response::transfer(g, kI * w);
        out.push_back(Xi * R_in_spectrum(w) * Xi.adjoint());
    }
    return out;
}

} // namespace qls::intensity
