// pgstate.cpp — Photon–Gaussian state construction, transfer, and the worked
// beamsplitter / photon + coherent configurations.

#include "qls/pgstate.hpp"
#include "qls/intensity.hpp"

#include <cmath>
#include <sstream>

namespace qls::pgstate {

PhotonGaussianState make_state(const fields::PulseMatrix& xi, const fields::CovKernel& cov,
                               const std::vector<Index>& photons, double tol) {
    const fields::NormalizationResult norm = fields::normalization(xi, cov, photons, tol);
    if (std::abs(norm.value - 1.0) > tol) {
        std::ostringstream os;
        os << "State certification: normalization " << norm.value << " deviates from 1 beyond "
           << "tolerance " << tol << " (quadrature error estimate " << norm.quad_error << ")";
        throw ValidationError(os.str());
    }
    PhotonGaussianState st;
    st.xi = xi;
    st.photons = photons;
    st.R = cov;
    st.norm = norm.value;
    st.norm_tol = tol;
    return st;
}

PhotonGaussianState make_state(const fields::PulseMatrix& xi, const fields::CovKernel& cov,
                               double tol) {
    std::vector<Index> photons(static_cast<std::size_t>(xi.n_ch));
    for (Index k = 0; k < xi.n_ch; ++k) photons[static_cast<std::size_t>(k)] = k;
    return make_state(xi, cov, photons, tol);
}

TransferResult transfer_state(const model::StateSpaceModel& g, const PhotonGaussianState& state) {
    if (g.n_ch() != state.xi.n_ch)
        throw ValidationError("State transfer: channel counts of system and state differ");
    model::require_settleable(g, "State transfer");

    PhotonGaussianState out;
    out.xi = intensity::steady_pulses(g, state.xi);
    out.photons = state.photons;
    out.R = intensity::covariance_transfer(g, state.R, state.xi.grid);
    out.norm_tol = state.norm_tol;

    const fields::NormalizationResult norm =
        fields::normalization(out.xi, out.R, out.photons, state.norm_tol);
    out.norm = norm.value;
    if (std::abs(out.norm - 1.0) > 10.0 * state.norm_tol) {
        std::ostringstream os;
        os << "State transfer: output normalization " << out.norm
           << " deviates from 1 beyond 10x input tolerance " << state.norm_tol
           << "; preservation holds exactly in the continuum, so the quadrature broke down "
           << "(error estimate " << norm.quad_error << ")";
        throw ConsistencyError(os.str());
    }
    return TransferResult{state, std::move(out)};
}

BeamsplitterDecomposition beamsplitter_coefficients(double eta, const fields::PulseFn& nu1,
                                                    const fields::PulseFn& nu2,
                                                    const TimeGrid& grid) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ValidationError("Beamsplitter: transmissivity must lie in [0,1], got " +
                              std::to_string(eta));
    for (const auto* nu : {&nu1, &nu2}) {
        const double n2 = fields::pulse_norm_sq(*nu, grid);
        if (std::abs(n2 - 1.0) > 1e-3)
            throw ValidationError("Beamsplitter: pulse squared norm " + std::to_string(n2) +
                                  " is not 1 within 1e-3");
    }

    BeamsplitterDecomposition dec;
    dec.eta = eta;
    dec.overlap = fields::pulse_overlap(nu1, nu2, grid);
    const double root = std::sqrt(eta * (1.0 - eta));
    dec.both_arm1 = root;
    dec.one_each_direct = eta;
    dec.one_each_swapped = -(1.0 - eta);
    dec.both_arm2 = -root;
    dec.identical_one_each = 2.0 * eta - 1.0;
    return dec;
}

TransferResult photon_coherent_transfer(const model::StateSpaceModel& g,
                                        const fields::PulseFn& nu, const fields::PulseFn& alpha,
                                        const TimeGrid& grid) {
    if (g.n_ch() != 2)
        throw ValidationError("Photon+coherent: the system must have exactly two channels");
    if (!nu) throw ValidationError("Photon+coherent: photon pulse function is empty");

    // ξ⁻ = diag(ν, 0): the photon occupies channel 1; channel 2 is Gaussian.
    auto eval_minus = [nu](double t) {
        Matrix x = Matrix::Zero(2, 2);
        x(0, 0) = nu(t);
        return x;
    };
    const fields::PulseMatrix xi = fields::make_pulse_matrix(grid, 2, eval_minus, nullptr);
    const fields::CovKernel R =
        alpha ? fields::coherent_channel2_cov(alpha) : fields::vacuum_cov(2);

    const PhotonGaussianState state = make_state(xi, R, std::vector<Index>{0});
    return transfer_state(g, state);
}

} // namespace qls::pgstate
