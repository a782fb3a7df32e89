// pgstate.hpp — Photon–Gaussian field states: construction with normalization
// certification, steady-state transfer through a system, the two-photon
// beamsplitter amplitude decomposition, and the mixed photon + coherent drive.

#pragma once

#include "qls/fields.hpp"
#include "qls/model.hpp"
#include "qls/types.hpp"

namespace qls::pgstate {

using fields::PhotonGaussianState;

// Certify and build a state with the given photon creation columns over the
// Gaussian kernel `cov`. Throws ValidationError carrying the computed value
// when |normalization − 1| > tol.
PhotonGaussianState make_state(const fields::PulseMatrix& xi, const fields::CovKernel& cov,
                               const std::vector<Index>& photons, double tol = 1e-3);

// All columns of ξ are photon columns.
PhotonGaussianState make_state(const fields::PulseMatrix& xi, const fields::CovKernel& cov,
                               double tol = 1e-3);

// Brace-literal column lists must select the column overload, not convert to
// the tolerance scalar of the all-columns overload.
inline PhotonGaussianState make_state(const fields::PulseMatrix& xi, const fields::CovKernel& cov,
                                      std::initializer_list<Index> photons, double tol = 1e-3) {
    return make_state(xi, cov, std::vector<Index>(photons), tol);
}

struct TransferResult {
    PhotonGaussianState input;
    PhotonGaussianState output;
};

// Steady-state transfer: ξ_out is the full doubled-up convolution of ξ_in with
// the system response; R_out is the transferred kernel. The output is
// re-certified; a deviation beyond 10× the input tolerance signals quadrature
// breakdown (norm preservation holds exactly in the continuum) and throws
// ConsistencyError.
TransferResult transfer_state(const model::StateSpaceModel& g, const PhotonGaussianState& state);

// Four-term amplitude decomposition of two photons (pulses ν₁ into port 1,
// ν₂ into port 2) scattered by a beamsplitter with transmissivity η:
//   +√(η(1−η))  both photons exit arm 1          (pulses ν₁, ν₂)
//   +η          ν₁ exits arm 1, ν₂ exits arm 2
//   −(1−η)      ν₂ exits arm 1, ν₁ exits arm 2
//   −√(η(1−η))  both photons exit arm 2          (pulses ν₁, ν₂)
// For identical pulses the two one-in-each terms interfere to 2η − 1.
struct BeamsplitterDecomposition {
    double eta = 0.0;
    Complex overlap;              // ∫ ν₁(t)* ν₂(t) dt on the given grid
    double both_arm1 = 0.0;
    double one_each_direct = 0.0;
    double one_each_swapped = 0.0;
    double both_arm2 = 0.0;
    double identical_one_each = 0.0; // 2η − 1, the coincidence amplitude for ν₁ = ν₂
};

BeamsplitterDecomposition beamsplitter_coefficients(double eta, const fields::PulseFn& nu1,
                                                    const fields::PulseFn& nu2,
                                                    const TimeGrid& grid);

// Mixed drive of a two-channel system: a single photon with pulse ν enters
// channel 1 while channel 2 carries a coherent amplitude α(t). The reference
// Gaussian kernel is vacuum ⊕ coherent; the output pulses are read off the
// first doubled column of the transferred ξ.
TransferResult photon_coherent_transfer(const model::StateSpaceModel& g,
                                        const fields::PulseFn& nu, const fields::PulseFn& alpha,
                                        const TimeGrid& grid);

} // namespace qls::pgstate
