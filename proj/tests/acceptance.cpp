// acceptance.cpp — end-to-end acceptance battery. Each criterion prints one
// PASS/FAIL line with its measured figure; the exit code is the number of
// failures. Every reference value is an independently derived closed form.

#include "qls/dmat.hpp"
#include "qls/fields.hpp"
#include "qls/intensity.hpp"
#include "qls/linalg.hpp"
#include "qls/model.hpp"
#include "qls/pgstate.hpp"
#include "qls/response.hpp"
#include "qls/synthesis.hpp"
#include "test_util.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

using namespace qls;
using testutil::max_abs;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

// ---------------------------- Closed-form references ----------------------------

// Output pulse of a settled one-oscillator passive cavity (decay κ, detuning ω)
// driven by the unit exponential pulse with decay γ arriving at t = 0.
std::function<Complex(double)> cavity_output_pulse(double kappa, double omega, double gamma) {
    return [=](double t) -> Complex {
        if (t < 0.0) return {0.0, 0.0};
        const double a = std::sqrt(2.0 * gamma);
        const Complex pole{kappa / 2.0 - gamma, omega}; // κ/2 + iω − γ
        const Complex eg{std::exp(-gamma * t), 0.0};
        const Complex ec = std::exp(-kappa * t / 2.0) *
                           std::exp(Complex{0.0, -omega * t});
        return a * eg - (kappa * a / pole) * (eg - ec);
    };
}

// Output pulse pair of the settled degenerate amplifier (decay κ, gain ε)
// driven by the unit exponential pulse with decay γ arriving at t = 0.
struct AmpPulses {
    std::function<double(double)> minus;
    std::function<double(double)> plus;
};

AmpPulses amplifier_output_pulses(double kappa, double eps, double gamma) {
    const double a = std::sqrt(2.0 * gamma);
    const double k2g = kappa - 2.0 * gamma;
    const double den = (kappa - 2.0 * gamma - eps) * (kappa - 2.0 * gamma + eps);
    const double pref = 2.0 * a * kappa / den;
    AmpPulses out;
    out.minus = [=](double t) -> double {
        if (t < 0.0) return 0.0;
        const double eg = std::exp(-gamma * t), ek = std::exp(-kappa * t / 2.0);
        const double ch = std::cosh(eps * t / 2.0), sh = std::sinh(eps * t / 2.0);
        return a * eg - pref * (k2g * (eg - ek * ch) - eps * ek * sh);
    };
    out.plus = [=](double t) -> double {
        if (t < 0.0) return 0.0;
        const double eg = std::exp(-gamma * t), ek = std::exp(-kappa * t / 2.0);
        const double ch = std::cosh(eps * t / 2.0), sh = std::sinh(eps * t / 2.0);
        return -pref * (eps * (eg - ek * ch) - k2g * ek * sh);
    };
    return out;
}

// Accumulated amplification noise κ²∫₀ᵗ e^{−κr} sinh²(εr/2) dr in closed form.
double amplifier_noise_ramp(double kappa, double eps, double t) {
    const double num =
        kappa - std::exp(-kappa * t) * (kappa * std::cosh(eps * t) + eps * std::sinh(eps * t));
    return kappa * kappa * 0.5 *
           (num / (kappa * kappa - eps * eps) - (1.0 - std::exp(-kappa * t)) / kappa);
}

// Relaxation of the system's own initial condition, κ e^{−κt} sinh²(εt/2).
double amplifier_relaxation(double kappa, double eps, double t) {
    return kappa * std::exp(-kappa * t) * std::pow(std::sinh(eps * t / 2.0), 2);
}

// Residue expansion of the two-section all-pass filter applied to 2e^{−2t}.
Complex filtered_exponential(double t) {
    if (t < 0.0) return {0.0, 0.0};
    const Complex r1 = Complex{108.0, 24.0} / 5.0 * std::exp(-3.0 * t);
    const Complex r2 = Complex{-20.0, -10.0} * std::exp(-2.0 * t);
    const Complex r3 =
        Complex{2.0, 26.0} / 5.0 * std::exp(-t) * std::exp(Complex{0.0, -1.0} * t);
    return r1 + r2 + r3;
}

std::vector<double> probe_omegas() {
    std::vector<double> w;
    for (int k = -60; k <= 60; ++k) w.push_back(0.25 * k);
    return w;
}

// --------------------------------- Criteria -------------------------------------

Outcome criterion_flat_unitarity() {
    double worst = 0.0;
    bool pass = true;
    auto probe = [&](const model::StateSpaceModel& g) {
        const auto rep = response::check_flat_unitary(g);
        worst = std::max(worst, rep.max_residual);
        pass = pass && rep.pass;
    };
    probe(model::realize(model::cavity(2.0, 1.0)));
    probe(model::realize(model::dpa(4.0, 1.0)));
    std::mt19937_64 rng(11u);
    for (int k = 0; k < 20; ++k) probe(testutil::random_stable_model(rng));
    return {pass && worst < 1e-9, fmt("max residual %.3e over 22 systems", worst)};
}

Outcome criterion_cavity_pulse() {
    const model::StateSpaceModel g = model::realize(model::cavity(2.0, 1.0));
    const TimeGrid grid = TimeGrid::from_range(-2.0, 20.0, 1e-3);
    const auto out =
        intensity::steady_pulses(g, fields::photon_pulses(grid, {fields::exponential_pulse(1.0)}));
    const auto want = cavity_output_pulse(2.0, 1.0, 1.0);

    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const Complex w = want(grid.time(i));
        err2 += std::norm(out.xi_minus[i](0, 0) - w) * grid.dt;
        ref2 += std::norm(w) * grid.dt;
    }
    const double rel = std::sqrt(err2 / ref2);
    const double norm_dev = std::abs(out.column_norm_sq(0) - 1.0);
    return {rel < 1e-3 && norm_dev < 1e-4,
            fmt("rel L2 %.3e, output norm deviation %.3e", rel, norm_dev)};
}

Outcome criterion_cavity_transient() {
    // Resonant cavity with coupling and pulse decay at the confluent point:
    // the internal second moment is diag(1,0) + 4t²e^{−2t}·I₂ exactly.
    const model::StateSpaceModel g = model::realize(model::cavity(2.0, 0.0));
    const TimeGrid grid = TimeGrid::from_range(0.0, 8.0, 1e-3);
    const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(1.0)});
    const auto states = intensity::integrate_transient(g, xi, grid);

    double worst = 0.0;
    for (const auto& st : states) {
        Matrix want = Matrix::Identity(2, 2);
        want *= 4.0 * st.t * st.t * std::exp(-2.0 * st.t);
        want(0, 0) += 1.0;
        worst = std::max(worst, max_abs(st.sigma_nu - want));
    }
    return {worst < 1e-5,
            fmt("max moment deviation %.3e (closed form at the confluent point "
                "of the displayed prefactor)",
                worst)};
}

Outcome criterion_amplifier_pulses() {
    const double kappa = 4.0, eps = 1.0;
    const model::StateSpaceModel g = model::realize(model::dpa(kappa, eps));
    const TimeGrid grid = TimeGrid::from_range(-2.0, 20.0, 1e-3);
    const auto out =
        intensity::steady_pulses(g, fields::photon_pulses(grid, {fields::exponential_pulse(1.0)}));
    const auto want = amplifier_output_pulses(kappa, eps, 1.0);

    double em2 = 0.0, rm2 = 0.0, ep2 = 0.0, rp2 = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        em2 += std::norm(out.xi_minus[i](0, 0) - want.minus(t)) * grid.dt;
        rm2 += want.minus(t) * want.minus(t) * grid.dt;
        ep2 += std::norm(out.xi_plus[i](0, 0) - want.plus(t)) * grid.dt;
        rp2 += want.plus(t) * want.plus(t) * grid.dt;
    }
    const double rel_minus = std::sqrt(em2 / rm2), rel_plus = std::sqrt(ep2 / rp2);

    // Noise floor: Lyapunov value against the rational closed form and
    // against direct quadrature of the up-conversion kernel.
    const double W = intensity::steady_gramian(g)(0, 0).real();
    const double closed = kappa * eps * eps / (2.0 * (kappa * kappa - eps * eps));
    const double dev_closed = std::abs(W - closed);

    const double qdt = 1e-4;
    const std::size_t count = 300001; // [0, 30]
    const auto h = response::impulse(g);
    const auto samples = response::sample_smooth(h, qdt, count);
    double Wq = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double w = (k == 0 || k + 1 == count) ? 0.5 : 1.0;
        Wq += w * std::norm(samples[k](0, 1)) * qdt;
    }
    const double dev_quad = std::abs(Wq - closed);

    const bool pass = rel_minus < 1e-3 && rel_plus < 1e-3 && dev_closed < 1e-12 &&
                      dev_quad < 1e-6;
    return {pass, fmt("rel L2 %.3e/%.3e, ", rel_minus, rel_plus) +
                      fmt("noise floor dev %.3e (quadrature cross-check %.3e)", dev_closed,
                          dev_quad)};
}

Outcome criterion_amplifier_transient() {
    const double kappa = 4.0, eps = 1.0;
    const model::StateSpaceModel g = model::realize(model::dpa(kappa, eps));
    const TimeGrid grid = TimeGrid::from_range(0.0, 10.0, 1e-3);
    const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(1.0)});
    const auto trace =
        intensity::transient_intensity(g, intensity::integrate_transient(g, xi, grid), xi);
    const auto pulses = amplifier_output_pulses(kappa, eps, 1.0);

    // Full reference: noise ramp + initial relaxation + output pulse pair.
    double worst = 0.0, literal_dev = 0.0, relax_peak = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const double t = grid.time(i);
        const double xm = pulses.minus(t), xp = pulses.plus(t);
        const double relax = amplifier_relaxation(kappa, eps, t);
        const double want = amplifier_noise_ramp(kappa, eps, t) + relax + xm * xm + xp * xp;
        worst = std::max(worst, std::abs(trace.total[i] - want));
        // The same reference with the relaxation term dropped misses by
        // exactly that term: its worst deviation must equal the term's peak.
        literal_dev = std::max(literal_dev, std::abs(trace.total[i] - (want - relax)));
        relax_peak = std::max(relax_peak, relax);
    }
    const bool pass = worst < 1e-4 && std::abs(literal_dev - relax_peak) < 1e-6;
    Outcome o{pass, fmt("max deviation %.3e; dropping the initial-relaxation term "
                        "would cost %.3e (the term's peak is %.3e)",
                        worst, literal_dev, relax_peak)};
    return o;
}

Outcome criterion_norm_preservation() {
    // Input normalization on a fine grid.
    const TimeGrid fine = TimeGrid::from_range(-2.0, 16.0, 1e-3);
    const double in_dev = std::abs(fields::pulse_norm_sq(fields::exponential_pulse(1.0), fine) - 1.0);

    // Amplifier output: full second-moment normalization over the transferred
    // kernel (background included).
    const TimeGrid grid_a = TimeGrid::from_range(-2.0, 16.0, 5e-3);
    const model::StateSpaceModel dpa = model::realize(model::dpa(4.0, 1.0));
    const auto xi_a = fields::photon_pulses(grid_a, {fields::exponential_pulse(1.0)});
    const auto out_a = intensity::steady_pulses(dpa, xi_a);
    const auto R_a = intensity::covariance_transfer(dpa, fields::vacuum_cov(1), grid_a);
    const double amp_dev =
        std::abs(fields::normalization(out_a, R_a, std::vector<Index>{0}).value - 1.0);

    // Random stable single-channel systems.
    const TimeGrid grid_r = TimeGrid::from_range(-2.0, 14.0, 5e-3);
    std::mt19937_64 rng(7u);
    double rand_dev = 0.0;
    for (int k = 0; k < 10; ++k) {
        const model::StateSpaceModel g = testutil::random_stable_model(rng, 3, 1);
        const auto xi = fields::photon_pulses(grid_r, {fields::exponential_pulse(1.0)});
        const auto out = intensity::steady_pulses(g, xi);
        const auto R = intensity::covariance_transfer(g, fields::vacuum_cov(1), grid_r);
        rand_dev = std::max(
            rand_dev, std::abs(fields::normalization(out, R, std::vector<Index>{0}).value - 1.0));
    }

    const bool pass = in_dev < 1e-6 && amp_dev < 1e-3 && rand_dev < 1e-2;
    return {pass, fmt("input dev %.3e, amplifier output dev %.3e, random-system max dev %.3e",
                      in_dev, amp_dev, rand_dev)};
}

Outcome criterion_hong_ou_mandel() {
    const TimeGrid grid = TimeGrid::from_range(-1.0, 16.0, 1e-3);
    const auto nu = fields::exponential_pulse(1.0);
    const auto dec = pgstate::beamsplitter_coefficients(0.5, nu, nu, grid);
    const double amp_dev = std::max(
        {std::abs(dec.identical_one_each), std::abs(dec.both_arm1 - 0.5),
         std::abs(dec.one_each_direct - 0.5), std::abs(dec.one_each_swapped + 0.5),
         std::abs(dec.both_arm2 + 0.5)});
    const double overlap_dev = std::abs(dec.overlap - Complex{1.0, 0.0});
    return {amp_dev < 1e-12 && overlap_dev < 1e-6,
            fmt("coincidence amplitude %.3e, overlap deviation %.3e",
                std::abs(dec.identical_one_each), overlap_dev)};
}

Outcome criterion_synthesis() {
    // Section realizations against hand-solved parameters.
    const auto p1 = synthesis::synthesize(synthesis::allpass_section(Complex{-3.0, 0.0}));
    const auto p2 = synthesis::synthesize(synthesis::allpass_section(Complex{-1.0, -1.0}));
    const double param_dev = std::max(
        {std::abs(p1.S_minus(0, 0) - Complex{1.0, 0.0}), std::abs(p1.C_minus(0, 0) - std::sqrt(6.0)),
         max_abs(p1.C_plus), std::abs(p1.Omega_minus(0, 0)), max_abs(p1.Omega_plus),
         std::abs(p2.C_minus(0, 0) - std::sqrt(2.0)),
         std::abs(p2.Omega_minus(0, 0) - Complex{1.0, 0.0})});

    // Cascade transfer equals the product of the section ratios.
    const model::StateSpaceModel g = synthesis::cascade(p1, p2);
    double cascade_dev = 0.0;
    for (double w : {0.0, 0.5, -0.5, 1.0, -1.0, 2.0}) {
        const Complex want = synthesis::allpass_section(Complex{-3.0, 0.0}).transfer({0.0, w}) *
                             synthesis::allpass_section(Complex{-1.0, -1.0}).transfer({0.0, w});
        cascade_dev =
            std::max(cascade_dev, std::abs(response::transfer(g, Complex{0.0, w})(0, 0) - want));
    }

    // Feasibility and the end-to-end shaper against the residue expansion.
    const TimeGrid grid = TimeGrid::from_range(0.0, 25.0, 2e-3);
    const auto nu = fields::exponential_pulse(2.0);
    const auto omegas = probe_omegas();
    const auto feas = synthesis::check_feasible(
        nu, [](double t) { return filtered_exponential(t); }, grid, omegas);

    const auto d = synthesis::allpass_product(synthesis::allpass_section(Complex{-3.0, 0.0}),
                                              synthesis::allpass_section(Complex{-1.0, -1.0}));
    const auto out = synthesis::shape_pulse(
        nu, [](double t) { return filtered_exponential(t); }, d, grid, omegas);
    double err2 = 0.0, ref2 = 0.0;
    for (std::size_t i = 0; i < grid.size; ++i) {
        const Complex w = filtered_exponential(grid.time(i));
        err2 += std::norm(out.xi_minus[i](0, 0) - w) * grid.dt;
        ref2 += std::norm(w) * grid.dt;
    }
    const double rel = std::sqrt(err2 / ref2);

    // A faster-decaying input has a different magnitude spectrum, so the same
    // target is out of reach for any all-pass network: the configuration is
    // only consistent with input decay rate 2.
    const auto infeas = synthesis::check_feasible(
        fields::exponential_pulse(3.0), [](double t) { return filtered_exponential(t); }, grid,
        omegas);

    const bool pass = param_dev < 1e-9 && cascade_dev < 1e-10 && feas.feasible &&
                      feas.max_deviation < 1e-4 && rel < 1e-3 && !infeas.feasible &&
                      infeas.max_deviation > 0.1;
    return {pass, fmt("params %.3e, shaper rel L2 %.3e; decay-3 variant infeasible "
                      "(spectral mismatch %.3f)",
                      param_dev, rel, infeas.max_deviation)};
}

Outcome criterion_covariance_transfer() {
    const model::StateSpaceModel g = model::realize(model::cavity(2.0, 1.0));
    const TimeGrid grid = TimeGrid::from_range(0.0, 10.0, 0.1);
    const auto out = intensity::covariance_transfer(g, fields::vacuum_cov(1), grid);

    Matrix want = Matrix::Zero(2, 2);
    want(0, 0) = 1.0;
    const double delta_dev = max_abs(out.delta_coeff - want);
    double smooth_dev = 0.0;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j)
            smooth_dev = std::max(smooth_dev, max_abs(out.smooth(0.1 * i, 0.1 * j)));
    return {delta_dev < 1e-8 && smooth_dev < 1e-8,
            fmt("delta deviation %.3e, max smooth magnitude %.3e on a 100x100 grid", delta_dev,
                smooth_dev)};
}

Outcome criterion_settled_start() {
    const model::StateSpaceModel g = model::realize(model::cavity(2.0, 1.0));
    const auto want = cavity_output_pulse(2.0, 1.0, 1.0);
    auto run = [&](double t0) {
        const TimeGrid grid = TimeGrid::from_range(t0, 10.0, 5e-4);
        const auto xi = fields::photon_pulses(grid, {fields::exponential_pulse(1.0)});
        const auto trace =
            intensity::transient_intensity(g, intensity::integrate_transient(g, xi, grid), xi);
        double worst = 0.0;
        for (std::size_t i = 0; i < grid.size; ++i) {
            const double t = grid.time(i);
            if (t < 0.0) continue;
            worst = std::max(worst, std::abs(trace.total[i] - std::norm(want(t))));
        }
        return worst;
    };
    const double err20 = run(-20.0);
    const double err40 = run(-40.0);
    return {err20 < 1e-2 && err40 <= err20 / 2.0 + 1e-9,
            fmt("deviation %.3e from twenty decay times of idling, %.3e from forty", err20,
                err40)};
}

Outcome criterion_inverse_convolution() {
    auto probe = [](const model::StateSpaceModel& g, double& delta_dev, double& l2) {
        const auto h = response::impulse(g);
        const auto inv = response::stable_inverse(g);
        const double dt = 1e-3;
        const std::size_t J = 25000; // covers [0, 25] / [-25, 0]

        delta_dev = max_abs(dmat::flat(g.S) * g.S - Matrix::Identity(g.S.rows(), g.S.cols()));

        // G0 = ∫₀^∞ e^{inv.gen·u} (inv.right·h.left) e^{h.gen·u} du by trapezoid
        // with exactly stepped propagators (both generators are Hurwitz).
        const Matrix Kstep = linalg::expm(inv.gen * dt);
        const Matrix Hstep = linalg::expm(h.gen * dt);
        Matrix Phi = inv.right * h.left;
        Matrix acc = 0.5 * Phi;
        for (std::size_t j = 1; j <= J; ++j) {
            Phi = Kstep * Phi * Hstep;
            acc += (j == J) ? 0.5 * Phi : Phi;
        }
        const Matrix G0 = dt * acc;

        // N(t>0) = (S♭·h.left + inv.left·G0) e^{h.gen t} h.right,
        // N(t<0) = inv.left e^{inv.gen|t|} (inv.right·S + G0·h.right);
        // both must vanish: the convolution of the inverse with the response
        // is a pure delta.
        const Matrix Lpos = dmat::flat(g.S) * h.left + inv.left * G0;
        const Matrix Rneg = inv.right * g.S + G0 * h.right;
        Matrix Epos = Matrix::Identity(h.gen.rows(), h.gen.cols());
        Matrix Eneg = Epos;
        double sum = 0.0;
        for (std::size_t j = 1; j <= J; ++j) {
            Epos = Epos * Hstep;
            Eneg = Eneg * Kstep;
            sum += ((Lpos * Epos * h.right).squaredNorm() +
                    (inv.left * Eneg * Rneg).squaredNorm()) *
                   dt;
        }
        l2 = std::sqrt(sum);
    };

    double d1 = 0.0, l1 = 0.0, d2 = 0.0, l2 = 0.0;
    probe(model::realize(model::cavity(2.0, 1.0)), d1, l1);
    probe(model::realize(model::dpa(4.0, 1.0)), d2, l2);
    const double delta_dev = std::max(d1, d2);
    const double off = std::max(l1, l2);
    return {delta_dev < 1e-12 && off < 1e-3,
            fmt("delta factor deviation %.3e, off-origin L2 %.3e", delta_dev, off)};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"frequency response is flat-unitary across the probe band", criterion_flat_unitarity},
        {"cavity output pulse matches the closed form and keeps unit norm", criterion_cavity_pulse},
        {"cavity transient moments match the confluent closed form", criterion_cavity_transient},
        {"amplifier output pulse pair and noise floor match closed forms",
         criterion_amplifier_pulses},
        {"amplifier transient intensity matches the full closed form",
         criterion_amplifier_transient},
        {"state normalization is preserved through stable systems", criterion_norm_preservation},
        {"balanced beamsplitter cancels identical-photon coincidences", criterion_hong_ou_mandel},
        {"all-pass synthesis, cascade, and pulse shaper hit their targets", criterion_synthesis},
        {"vacuum covariance passes unchanged through a passive system",
         criterion_covariance_transfer},
        {"transient answers are independent of extra settling time", criterion_settled_start},
        {"the stable inverse convolves with the response to a pure delta",
         criterion_inverse_convolution},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("unexpected exception: ") + e.what()};
        }
        std::printf("%s  %2zu  %s (%s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
                criteria.size());
    return failures;
}
