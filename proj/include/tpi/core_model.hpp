#pragma once

#include <complex>
#include <vector>

#include "tpi/types.hpp"

namespace tpi {

using cplx = std::complex<double>;

// Single-atom linear response.
cplx single_atom_transmission(const EmitterChainParams& params, double detuning);
cplx single_atom_reflection(const EmitterChainParams& params, double detuning);

// Coherent two-photon amplitude alpha^2/2 = t(Delta)^(2N); N = 0 gives exactly 1.
cplx coherent_pair_amplitude(const EmitterChainParams& params, const DriveConfig& drive);

// Single-atom incoherent pair amplitude, time and frequency domain.
cplx phi_atom_time(const EmitterChainParams& params, double detuning, double tau);
cplx phi_atom_freq(const EmitterChainParams& params, double detuning, double omega);

// Collective incoherent amplitude at sideband omega.
// Closed form (a^N - b^N)/(a - b), a = t(Delta)^2, b = t(Delta+w) t(Delta-w),
// degenerate branch N a^(N-1) when |a - b| < 1e-12; accepts real N >= 0.
cplx phi_ensemble_freq(const EmitterChainParams& params, const DriveConfig& drive,
                       double omega);
// Literal sum over emitters; integer-N oracle for the closed form.
cplx phi_ensemble_freq_direct(const EmitterChainParams& params, const DriveConfig& drive,
                              double omega);

// Precomputed evaluator for one (params, detuning, quadrature) triple.
// phi(tau) is assembled as a tail-split inverse transform:
//   phi(tau) = S_inf phi_atom(tau) + (1/2pi) Int phi_atom(w) [S(w) - S_inf] e^(-iw tau) dw
// with S_inf = (a^N - 1)/(a - 1) the w -> inf limit of the geometric sum.
// The remainder integrand decays ~ 1/w^4, so the +-40 gamma window keeps
// truncation below 1e-6; the split is exact at N = 1. The integral is folded
// onto w >= 0 (even integrand), which makes phi(tau) = phi(-tau) exact.
class EnsembleAmplitude {
  public:
    EnsembleAmplitude(const EmitterChainParams& params, double detuning,
                      const QuadratureSpec& quad = {});

    cplx coherent_amp(double n) const;          // t^(2N)
    cplx phi_at(double n, double tau) const;    // collective phi(tau)
    cplx ratio(double n, double tau) const;     // phi / (alpha^2/2)
    double eta(double n, double tau) const;     // |ratio|
    double g2(double n, double tau) const;      // |1 + ratio|^2

    // phi over a whole grid, reusing S(w) across tau points.
    std::vector<cplx> phi_grid(double n, const DelayGrid& grid) const;

    double detuning() const { return detuning_; }
    const EmitterChainParams& params() const { return params_; }

  private:
    // S(w_k) - S_inf for every node, plus S_inf; shared by phi_at/phi_grid.
    void geometric_terms(double n, std::vector<cplx>& s_minus_inf, cplx& s_inf) const;

    EmitterChainParams params_;
    double detuning_ = 0.0;
    QuadratureSpec quad_;
    cplx a_, log_a_;
    double h_ = 0.0;                     // omega step
    std::vector<double> omega_;          // nodes on [0, span]
    std::vector<cplx> b_;                // b(w_k)
    std::vector<cplx> log_b_;            // log b(w_k)
    std::vector<cplx> weight_phi_w_;     // trapezoid weight * phi_atom(w_k) / (2 pi), folded
    std::vector<char> degenerate_;       // |a - b(w_k)| < 1e-12
};

// phi(tau) on the grid plus the coherent amplitude. Errors if the grid
// would alias the quadrature (spacing > pi / omega_max).
TwoPhotonState phi_ensemble_time(const EmitterChainParams& params, const DriveConfig& drive,
                                 const DelayGrid& grid, const QuadratureSpec& quad = {});

// g2(tau) = |1 + phi/(alpha^2/2)|^2 over the state's grid.
std::vector<double> g2_of_tau(const TwoPhotonState& state);

// Principal-value phase arg(phi(tau)) - arg(alpha^2/2) in (-pi, pi].
double relative_phase(const TwoPhotonState& state, double tau);

// eta(tau) = |phi(tau)| / |alpha^2/2|.
double relative_amplitude_eta(const TwoPhotonState& state, double tau);

}  // namespace tpi
