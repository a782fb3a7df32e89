// verify.cpp — self-check battery implementation.

#include "qls/verify.hpp"

#include "qls/dmat.hpp"
#include "qls/fields.hpp"
#include "qls/intensity.hpp"
#include "qls/linalg.hpp"
#include "qls/model.hpp"
#include "qls/pgstate.hpp"
#include "qls/response.hpp"
#include "qls/synthesis.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

namespace qls::verify {

namespace {

using model::StateSpaceModel;

VerifyCheck guarded(const std::string& name, const std::function<VerifyCheck()>& body) {
    try {
        VerifyCheck c = body();
        c.name = name;
        return c;
    } catch (const std::exception& e) {
        VerifyCheck c;
        c.name = name;
        c.pass = false;
        c.note = std::string("exception: ") + e.what();
        return c;
    }
}

// Random stable dynamics with a doubled-up structure, built from random
// parameters and rejected until the spectral abscissa is comfortably negative.
StateSpaceModel random_stable_model(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick_n(1, 3), pick_m(1, 2);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 500; ++attempt) {
        const Index n = pick_n(rng), m = pick_m(rng);
        auto rand_mat = [&](Index r, Index c) {
            Matrix M(r, c);
            for (Index i = 0; i < r; ++i)
                for (Index j = 0; j < c; ++j) M(i, j) = Complex{gauss(rng), gauss(rng)};
            return M;
        };
        model::SystemParams p;
        // Random unitary scattering via QR of a random matrix.
        Eigen::HouseholderQR<Matrix> qr(rand_mat(m, m));
        p.S_minus = qr.householderQ() * Matrix::Identity(m, m);
        p.C_minus = rand_mat(m, n);
        p.C_plus = 0.3 * rand_mat(m, n);
        Matrix H = rand_mat(n, n);
        p.Omega_minus = 0.5 * (H + H.adjoint().eval());
        Matrix G = rand_mat(n, n);
        p.Omega_plus = 0.5 * (G + G.transpose().eval());
        StateSpaceModel g = model::realize(p);
        const double a = linalg::spectral_abscissa(g.A);
        if (a < -0.35 && a > -3.5) return g;
    }
    throw NumericalError("verify: failed to sample a stable random system");
}

double rel_l2(const std::vector<Complex>& got, const std::vector<Complex>& want, double dt) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        num += std::norm(got[i] - want[i]) * dt;
        den += std::norm(want[i]) * dt;
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

// ------------------------------ individual checks -----------------------------

VerifyCheck check_flat_unitarity(const StateSpaceModel& g) {
    const auto rep = response::check_flat_unitary(g);
    VerifyCheck c;
    c.residual = rep.max_residual;
    c.threshold = 1e-9;
    c.pass = rep.max_residual < c.threshold;
    std::ostringstream ss;
    ss << "worst frequency " << rep.worst_omega;
    c.note = ss.str();
    return c;
}

VerifyCheck check_inversion_identity(const StateSpaceModel& g) {
    const Matrix r = dmat::flat(g.A) + g.A + dmat::flat(g.C) * g.C;
    VerifyCheck c;
    c.residual = r.cwiseAbs().maxCoeff();
    c.threshold = 1e-12;
    c.pass = c.residual < c.threshold;
    c.note = "adjoint-conjugation identity of the generator";
    return c;
}

VerifyCheck check_cavity_pulse() {
    // Single-mode cavity, detuned, driven by a unit-norm decaying exponential:
    // the outgoing pulse has a two-exponential closed form.
    const double kappa = 2.0, omega = 1.0, gamma = 1.0;
    const StateSpaceModel g = model::realize(model::cavity(kappa, omega));
    const TimeGrid grid = TimeGrid::from_range(-2.0, 14.0, 1e-3);
    const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(gamma)});
    const auto out = intensity::steady_pulses(g, xi);
    const Complex pole{kappa / 2.0 - gamma, omega};
    const double amp = std::sqrt(2.0 * gamma);
    std::vector<Complex> got(grid.size), want(grid.size);
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        got[i] = out.xi_minus[i](0, 0);
        if (t >= 0.0) {
            const Complex decay = std::exp(-gamma * t);
            const Complex cav = std::exp(-(kappa / 2.0 + kI * omega) * t);
            want[i] = amp * decay - (kappa * amp / (kappa / 2.0 + kI * omega - gamma)) *
                                        (decay - cav);
        }
    }
    VerifyCheck c;
    c.residual = rel_l2(got, want, grid.dt);
    c.threshold = 1e-3;
    c.pass = c.residual < c.threshold;
    c.note = "outgoing pulse vs two-exponential closed form";
    (void)pole;
    return c;
}

VerifyCheck check_dpa_gramian() {
    // Degenerate parametric amplifier: the steady added-noise constant has the
    // closed form k*e^2 / (2 (k^2 - e^2)) = 2/15 for k = 4, e = 1.
    const double kappa = 4.0, eps = 1.0;
    const StateSpaceModel g = model::realize(model::dpa(kappa, eps));
    const Matrix W = intensity::steady_gramian(g);
    const double closed = kappa * eps * eps / (2.0 * (kappa * kappa - eps * eps));

    // Independent quadrature of |g_plus(t)|^2.
    const TimeGrid grid = TimeGrid::from_range(0.0, 30.0, 1e-4);
    double quad = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        const double gp = -kappa * std::exp(-kappa * t / 2.0) * std::sinh(eps * t / 2.0);
        quad += gp * gp * grid.weight(i);
    }
    const double r1 = std::abs(W(0, 0).real() - closed);
    const double r2 = std::abs(W(0, 0).real() - quad);
    VerifyCheck c;
    c.residual = std::max(r1, r2);
    c.threshold = 1e-6;
    c.pass = c.residual < c.threshold;
    std::ostringstream ss;
    ss << "W=" << W(0, 0).real() << " closed=" << closed << " quadrature=" << quad;
    c.note = ss.str();
    return c;
}

VerifyCheck check_dpa_transient_golden() {
    // Transient output intensity of the amplifier against its closed form.
    const double kappa = 4.0, eps = 1.0, gamma = 1.0;
    const StateSpaceModel g = model::realize(model::dpa(kappa, eps));
    const TimeGrid grid = TimeGrid::from_range(0.0, 10.0, 1e-3);
    const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(gamma)});
    const auto states = intensity::integrate_transient(g, xi, grid);
    const auto trace = intensity::transient_intensity(g, states, xi);

    const double den = (kappa - 2.0 * gamma - eps) * (kappa - 2.0 * gamma + eps);
    const double a = std::sqrt(2.0 * gamma);
    auto pulse_pair = [&](double t, double& xm, double& xp) {
        const double e_g = std::exp(-gamma * t);
        const double e_k = std::exp(-kappa * t / 2.0);
        const double ch = std::cosh(eps * t / 2.0), sh = std::sinh(eps * t / 2.0);
        const double k2g = kappa - 2.0 * gamma;
        xm = a * e_g - (2.0 * a * kappa / den) * (k2g * (e_g - e_k * ch) - eps * e_k * sh);
        xp = -(2.0 * a * kappa / den) * (eps * (e_g - e_k * ch) - k2g * e_k * sh);
    };
    auto noise_integral = [&](double t) {
        // k^2 * Int_0^t e^{-k r} sinh^2(e r / 2) dr, closed form.
        const double num = kappa - std::exp(-kappa * t) * (kappa * std::cosh(eps * t) +
                                                           eps * std::sinh(eps * t));
        return kappa * kappa * 0.5 *
               (num / (kappa * kappa - eps * eps) - (1.0 - std::exp(-kappa * t)) / kappa);
    };
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        double xm, xp;
        pulse_pair(t, xm, xp);
        // The relaxation term k e^{-kt} sinh^2(et/2) carries the system's own
        // initial condition; it decays to zero and vanishes for passive systems.
        const double relax = kappa * std::exp(-kappa * t) * std::pow(std::sinh(eps * t / 2.0), 2);
        const double want = noise_integral(t) + relax + xm * xm + xp * xp;
        worst = std::max(worst, std::abs(trace.total[i] - want));
    }
    VerifyCheck c;
    c.residual = worst;
    c.threshold = 1e-4;
    c.pass = worst < c.threshold;
    c.note = "transient output intensity vs closed form (noise integral + initial relaxation + pulse pair)";
    return c;
}

VerifyCheck check_normalization_preserved() {
    const StateSpaceModel g = model::realize(model::cavity(2.0, 1.0));
    const TimeGrid grid = TimeGrid::from_range(-2.0, 20.0, 1e-3);
    const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(1.0)});
    const auto st = pgstate::make_state(xi, fields::vacuum_cov(1));
    const auto res = pgstate::transfer_state(g, st);
    VerifyCheck c;
    const double in_err = std::abs(st.norm - 1.0);
    const double out_err = std::abs(res.output.norm - 1.0);
    c.residual = std::max(in_err, out_err);
    c.threshold = 1e-3;
    c.pass = c.residual < c.threshold;
    std::ostringstream ss;
    ss << "norm in=" << st.norm << " out=" << res.output.norm;
    c.note = ss.str();
    return c;
}

VerifyCheck check_transient_vs_steady() {
    const StateSpaceModel g = model::realize(model::cavity(2.0, 1.0));
    const TimeGrid grid = TimeGrid::from_range(-2.0, 6.0, 1e-3);
    const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(1.0)});
    const auto states = intensity::integrate_transient(g, xi, grid);
    const auto tr = intensity::transient_intensity(g, states, xi);
    const auto out = intensity::steady_pulses(g, xi);
    const auto st = intensity::steady_intensity(g, out);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i)
        worst = std::max(worst, std::abs(tr.total[i] - st.total[i]));
    VerifyCheck c;
    c.residual = worst;
    c.threshold = 1e-4;
    c.pass = worst < c.threshold;
    c.note = "same photodetection curve from dynamic and settled routes";
    return c;
}

VerifyCheck check_step_halving() {
    // Undetuned matched cavity: the dynamic second moment has a confluent
    // closed form diag(1,0) + 4 t^2 e^{-2t} I. Halving the step must shrink
    // the worst-case error by at least 2x (the integrator is higher order).
    auto run_err = [](double dt) {
        const StateSpaceModel g = model::realize(model::cavity(2.0, 0.0));
        const TimeGrid grid = TimeGrid::from_range(0.0, 8.0, dt);
        const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(1.0)});
        const auto states = intensity::integrate_transient(g, xi, grid);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size; ++i) {
            const double t = grid.time(i);
            Matrix want = Matrix::Zero(2, 2);
            want(0, 0) = 1.0;
            want += 4.0 * t * t * std::exp(-2.0 * t) * Matrix::Identity(2, 2);
            worst = std::max(worst, (states[i].sigma_nu - want).cwiseAbs().maxCoeff());
        }
        return worst;
    };
    const double e1 = run_err(0.02);
    const double e2 = run_err(0.01);
    VerifyCheck c;
    c.residual = e2;
    c.threshold = e1 / 2.0 + 1e-12;
    c.pass = e2 <= c.threshold;
    std::ostringstream ss;
    ss << "err(dt)=" << e1 << " err(dt/2)=" << e2;
    c.note = ss.str();
    return c;
}

VerifyCheck check_fault_injection() {
    // Shift the generator off its consistency manifold; the frequency-domain
    // conservation check must notice loudly.
    const StateSpaceModel g = model::realize(model::cavity(2.0, 1.0));
    const Matrix A_bad = g.A + 0.1 * Matrix::Identity(g.A.rows(), g.A.cols());
    const StateSpaceModel bad = model::from_matrices(A_bad, g.B, g.C, g.S);
    const auto rep = response::check_flat_unitary(bad);
    VerifyCheck c;
    c.residual = rep.max_residual;
    c.threshold = 1e-3; // must EXCEED this
    c.pass = rep.max_residual > c.threshold;
    c.note = "corrupted generator must fail the conservation check";
    return c;
}

VerifyCheck check_shaper_roundtrip() {
    // Two-section all-pass cascade: the realized network must reproduce the
    // rational response on the imaginary axis and stay conservation-clean.
    const auto d1 = synthesis::allpass_section(Complex{-3.0, 0.0});
    const auto d2 = synthesis::allpass_section(Complex{-1.0, -1.0});
    const auto d = synthesis::allpass_product(d1, d2);
    const auto g = synthesis::cascade(synthesis::synthesize(d1), synthesis::synthesize(d2));
    double worst = response::check_flat_unitary(g).max_residual;
    for (int k = -40; k <= 40; ++k) {
        const Complex s = kI * (0.4 * k);
        const Matrix xi = response::transfer(g, s);
        worst = std::max(worst, std::abs(xi(0, 0) - d.transfer(s)));
    }
    VerifyCheck c;
    c.residual = worst;
    c.threshold = 1e-8;
    c.pass = worst < c.threshold;
    c.note = "cascade realization matches the rational response on the axis";
    return c;
}

} // namespace

bool VerifyReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

VerifyReport run_all() {
    VerifyReport rep;
    const StateSpaceModel cavity = model::realize(model::cavity(2.0, 1.0));
    const StateSpaceModel dpa = model::realize(model::dpa(4.0, 1.0));

    rep.checks.push_back(
        guarded("flat_unitarity_cavity", [&] { return check_flat_unitarity(cavity); }));
    rep.checks.push_back(guarded("flat_unitarity_dpa", [&] { return check_flat_unitarity(dpa); }));
    rep.checks.push_back(guarded("flat_unitarity_random", [] {
        std::mt19937_64 rng(0xC0FFEEULL);
        double worst = 0.0;
        for (int k = 0; k < 5; ++k) {
            const auto g = random_stable_model(rng);
            worst = std::max(worst,
                             response::check_flat_unitary(g).max_residual);
        }
        VerifyCheck c;
        c.residual = worst;
        c.threshold = 1e-9;
        c.pass = worst < c.threshold;
        c.note = "5 randomly sampled stable systems";
        return c;
    }));
    rep.checks.push_back(
        guarded("inversion_identity_cavity", [&] { return check_inversion_identity(cavity); }));
    rep.checks.push_back(
        guarded("inversion_identity_dpa", [&] { return check_inversion_identity(dpa); }));
    rep.checks.push_back(guarded("cavity_pulse_golden", [] { return check_cavity_pulse(); }));
    rep.checks.push_back(guarded("dpa_gramian_closed_form", [] { return check_dpa_gramian(); }));
    rep.checks.push_back(
        guarded("dpa_transient_golden", [] { return check_dpa_transient_golden(); }));
    rep.checks.push_back(
        guarded("normalization_preserved", [] { return check_normalization_preserved(); }));
    rep.checks.push_back(
        guarded("transient_vs_steady", [] { return check_transient_vs_steady(); }));
    rep.checks.push_back(guarded("step_halving", [] { return check_step_halving(); }));
    rep.checks.push_back(guarded("fault_injection", [] { return check_fault_injection(); }));
    rep.checks.push_back(guarded("shaper_feasibility", [] { return check_shaper_roundtrip(); }));
    return rep;
}

std::string format_report(const VerifyReport& report) {
    std::ostringstream out;
    for (const auto& c : report.checks) {
        char line[160];
        std::snprintf(line, sizeof(line), "[%s] %-28s residual=%.3e threshold=%.3e",
                      c.pass ? "PASS" : "FAIL", c.name.c_str(), c.residual, c.threshold);
        out << line;
        if (!c.note.empty()) out << "  (" << c.note << ")";
        out << "\n";
    }
    out << (report.all_pass() ? "all checks passed\n" : "CHECKS FAILED\n");
    return out.str();
}

} // namespace qls::verify
