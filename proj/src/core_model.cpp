#include "tpi/core_model.hpp"

#include <cmath>
#include <string>

#include "tpi/constants.hpp"
#include "tpi/errors.hpp"

namespace tpi {

namespace {

// Collapse of the geometric sum over emitter orderings,
//   S = (a^N - b^N)/(a - b),
// with the L'Hopital branch N a^(N-1) when the denominator degenerates.
// b(omega = 0) equals a identically, so the branch is always exercised.
constexpr double kDegenerateEps = 1e-12;

// Coherent arm below this magnitude cannot normalize the interferometer.
constexpr double kOpaqueEps = 1e-300;

// base^n through exp(n log base); n = 0 and n = 1 short-circuit so the
// single-emitter reduction stays exact to the bit, not just to rounding.
cplx pow_real(const cplx& base, const cplx& log_base, double n) {
    if (n == 0.0) return cplx(1.0, 0.0);
    if (n == 1.0) return base;
    return std::exp(n * log_base);
}

}  // namespace

cplx single_atom_transmission(const EmitterChainParams& params, double detuning) {
    const cplx denom(1.0, -2.0 * detuning / params.gamma_tot);
    return 1.0 - 2.0 * params.beta / denom;
}

cplx single_atom_reflection(const EmitterChainParams& params, double detuning) {
    return single_atom_transmission(params, detuning) - 1.0;
}

cplx coherent_pair_amplitude(const EmitterChainParams& params, const DriveConfig& drive) {
    const cplx t = single_atom_transmission(params, drive.detuning);
    return pow_real(t * t, std::log(t * t), drive.atom_number);
}

cplx phi_atom_time(const EmitterChainParams& params, double detuning, double tau) {
    const cplx r = single_atom_reflection(params, detuning);
    const double at = std::fabs(tau);
    const cplx rotate = std::exp(cplx(-0.5 * params.gamma_tot * at, detuning * at));
    return -r * r * rotate;
}

cplx phi_atom_freq(const EmitterChainParams& params, double detuning, double omega) {
    const cplx r = single_atom_reflection(params, detuning);
    const double hg = 0.5 * params.gamma_tot;
    const cplx pole_plus = 1.0 / cplx(hg, -(detuning + omega));
    const cplx pole_minus = 1.0 / cplx(hg, -(detuning - omega));
    return -r * r * (pole_plus + pole_minus);
}

cplx phi_ensemble_freq(const EmitterChainParams& params, const DriveConfig& drive,
                       double omega) {
    params.validate();
    drive.validate(params);
    const double n = drive.atom_number;
    if (n == 0.0) return cplx(0.0, 0.0);

    const cplx t0 = single_atom_transmission(params, drive.detuning);
    const cplx a = t0 * t0;
    const cplx b = single_atom_transmission(params, drive.detuning + omega) *
                   single_atom_transmission(params, drive.detuning - omega);
    cplx s;
    if (std::abs(a - b) < kDegenerateEps) {
        s = n * pow_real(a, std::log(a), n - 1.0);
    } else {
        s = (pow_real(a, std::log(a), n) - pow_real(b, std::log(b), n)) / (a - b);
    }
    return phi_atom_freq(params, drive.detuning, omega) * s;
}

cplx phi_ensemble_freq_direct(const EmitterChainParams& params, const DriveConfig& drive,
                              double omega) {
    params.validate();
    drive.validate(params);
    const double n_real = drive.atom_number;
    if (std::fabs(n_real - std::round(n_real)) > 1e-9 || n_real > 1e6) {
        throw NumericalError("direct emitter sum needs a small integer atom_number, got " +
                             std::to_string(n_real));
    }
    const long long n = std::llround(n_real);
    if (n == 0) return cplx(0.0, 0.0);

    const cplx t0 = single_atom_transmission(params, drive.detuning);
    const cplx a = t0 * t0;
    const cplx b = single_atom_transmission(params, drive.detuning + omega) *
                   single_atom_transmission(params, drive.detuning - omega);
    // sum_{m=1..N} a^(m-1) b^(N-m), evaluated with running powers.
    cplx s(0.0, 0.0);
    cplx a_pow(1.0, 0.0);
    std::vector<cplx> b_pow(static_cast<size_t>(n));
    b_pow[0] = cplx(1.0, 0.0);
    for (long long k = 1; k < n; ++k) b_pow[static_cast<size_t>(k)] = b_pow[k - 1] * b;
    for (long long m = 1; m <= n; ++m) {
        s += a_pow * b_pow[static_cast<size_t>(n - m)];
        a_pow *= a;
    }
    return phi_atom_freq(params, drive.detuning, omega) * s;
}

EnsembleAmplitude::EnsembleAmplitude(const EmitterChainParams& params, double detuning,
                                     const QuadratureSpec& quad)
    : params_(params), detuning_(detuning), quad_(quad) {
    params_.validate();
    quad_.validate();

    const cplx t0 = single_atom_transmission(params_, detuning_);
    a_ = t0 * t0;
    log_a_ = std::log(a_);

    const int half = quad_.num_samples / 2;
    const double omega_max = quad_.omega_span * params_.gamma_tot;
    h_ = omega_max / half;

    omega_.resize(half + 1);
    b_.resize(half + 1);
    log_b_.resize(half + 1);
    weight_phi_w_.resize(half + 1);
    degenerate_.resize(half + 1);
    for (int k = 0; k <= half; ++k) {
        const double w = k * h_;
        omega_[k] = w;
        b_[k] = single_atom_transmission(params_, detuning_ + w) *
                single_atom_transmission(params_, detuning_ - w);
        log_b_[k] = std::log(b_[k]);
        degenerate_[k] = std::abs(a_ - b_[k]) < kDegenerateEps ? 1 : 0;
        // Fold of the symmetric trapezoid onto w >= 0: both end nodes carry h,
        // interior pairs carry 2h; the pair phase collapses to cos(w tau).
        const double fold = (k == 0 || k == half) ? 1.0 : 2.0;
        weight_phi_w_[k] =
            phi_atom_freq(params_, detuning_, w) * (fold * h_ / (2.0 * kPi));
    }
}

cplx EnsembleAmplitude::coherent_amp(double n) const { return pow_real(a_, log_a_, n); }

void EnsembleAmplitude::geometric_terms(double n, std::vector<cplx>& s_minus_inf,
                                        cplx& s_inf) const {
    const cplx a_n = pow_real(a_, log_a_, n);
    s_inf = (a_n - 1.0) / (a_ - 1.0);
    s_minus_inf.resize(log_b_.size());
    for (size_t k = 0; k < log_b_.size(); ++k) {
        cplx s;
        if (degenerate_[k]) {
            s = n * pow_real(a_, log_a_, n - 1.0);
        } else {
            s = (a_n - pow_real(b_[k], log_b_[k], n)) / (a_ - b_[k]);
        }
        s_minus_inf[k] = s - s_inf;
    }
}

cplx EnsembleAmplitude::phi_at(double n, double tau) const {
    const cplx a_n = pow_real(a_, log_a_, n);
    const cplx s_inf = (a_n - 1.0) / (a_ - 1.0);
    cplx acc(0.0, 0.0);
    for (size_t k = 0; k < log_b_.size(); ++k) {
        cplx s;
        if (degenerate_[k]) {
            s = n * pow_real(a_, log_a_, n - 1.0);
        } else {
            s = (a_n - pow_real(b_[k], log_b_[k], n)) / (a_ - b_[k]);
        }
        acc += weight_phi_w_[k] * (s - s_inf) * std::cos(omega_[k] * tau);
    }
    return acc + s_inf * phi_atom_time(params_, detuning_, tau);
}

cplx EnsembleAmplitude::ratio(double n, double tau) const {
    const cplx amp = coherent_amp(n);
    if (std::abs(amp) < kOpaqueEps) {
        throw NumericalError("coherent arm fully attenuated; g2 normalization undefined");
    }
    return phi_at(n, tau) / amp;
}

double EnsembleAmplitude::eta(double n, double tau) const {
    // No opacity guard: |phi|/|amp| -> inf is a meaningful bracket signal for
    // the matcher, while ratio()/g2() must reject the division.
    return std::abs(phi_at(n, tau)) / std::abs(coherent_amp(n));
}

double EnsembleAmplitude::g2(double n, double tau) const {
    return std::norm(1.0 + ratio(n, tau));
}

std::vector<cplx> EnsembleAmplitude::phi_grid(double n, const DelayGrid& grid) const {
    std::vector<cplx> s_minus_inf;
    cplx s_inf;
    geometric_terms(n, s_minus_inf, s_inf);

    std::vector<cplx> out(static_cast<size_t>(grid.points()));
    const int mid = grid.num_samples / 2;
    for (int i = mid; i <= grid.num_samples; ++i) {
        const double tau = grid.tau(i);
        cplx acc(0.0, 0.0);
        for (size_t k = 0; k < s_minus_inf.size(); ++k) {
            acc += weight_phi_w_[k] * s_minus_inf[k] * std::cos(omega_[k] * tau);
        }
        acc += s_inf * phi_atom_time(params_, detuning_, tau);
        out[static_cast<size_t>(i)] = acc;
        out[static_cast<size_t>(grid.num_samples - i)] = acc;  // evenness, exact
    }
    return out;
}

TwoPhotonState phi_ensemble_time(const EmitterChainParams& params, const DriveConfig& drive,
                                 const DelayGrid& grid, const QuadratureSpec& quad) {
    params.validate();
    drive.validate(params);
    grid.validate(params.gamma_tot);
    quad.validate();
    const double omega_max = quad.omega_span * params.gamma_tot;
    if (grid.spacing() > kPi / omega_max) {
        throw NumericalError("delay grid spacing " + std::to_string(grid.spacing()) +
                             " s aliases the quadrature window; need <= " +
                             std::to_string(kPi / omega_max) + " s");
    }

    const EnsembleAmplitude ea(params, drive.detuning, quad);
    TwoPhotonState state;
    state.grid = grid;
    state.coherent_amp = ea.coherent_amp(drive.atom_number);
    state.phi_tau = ea.phi_grid(drive.atom_number, grid);
    return state;
}

std::vector<double> g2_of_tau(const TwoPhotonState& state) {
    if (std::abs(state.coherent_amp) < kOpaqueEps) {
        throw NumericalError("coherent arm fully attenuated; g2 normalization undefined");
    }
    std::vector<double> out(state.phi_tau.size());
    for (size_t i = 0; i < state.phi_tau.size(); ++i) {
        out[i] = std::norm(1.0 + state.phi_tau[i] / state.coherent_amp);
    }
    return out;
}

double relative_phase(const TwoPhotonState& state, double tau) {
    if (std::abs(state.coherent_amp) < kOpaqueEps) {
        throw NumericalError("coherent arm fully attenuated; phase undefined");
    }
    const cplx phi = state.phi_tau[static_cast<size_t>(state.grid.index_of(tau))];
    if (std::abs(phi) < kOpaqueEps) {
        throw NumericalError("phi(tau) vanishes; relative phase undefined");
    }
    double p = std::arg(phi / state.coherent_amp);
    if (p <= -kPi) p += 2.0 * kPi;  // principal value on (-pi, pi]
    return p;
}

double relative_amplitude_eta(const TwoPhotonState& state, double tau) {
    if (std::abs(state.coherent_amp) < kOpaqueEps) {
        throw NumericalError("coherent arm fully attenuated; eta undefined");
    }
    const cplx phi = state.phi_tau[static_cast<size_t>(state.grid.index_of(tau))];
    return std::abs(phi) / std::abs(state.coherent_amp);
}

}  // namespace tpi
