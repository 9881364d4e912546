#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "sapit/coding.hpp"
#include "sapit/constellation.hpp"
#include "sapit/posteriors.hpp"
#include "sapit/rng.hpp"

namespace sapit {

// Monotone decoder transfer curve tau = f(rho), tabulated at increasing rho
// with nonincreasing tau. Queries clamp to the endpoints; interpolation is
// linear in log(tau) vs log(rho) where both are positive.
struct DecoderCurve {
    std::vector<double> rho;  // ascending
    std::vector<double> tau;  // nonincreasing

    double tau_at(double r) const;  // f(rho)
    double rho_at(double t) const;  // f^{-1}(tau)
};

// Prior-information model for the decoder feedback inside the scalar
// recursion. Gaussian: the decoder is a side channel m = x + CN(0, tau);
// tau -> inf gives uniform priors, tau = 0 a point mass. Curve: tau follows
// f(rho) at the current detector SNR. Empirical: run the actual
// convolutional decoder over a synthesized scalar channel and harvest the
// extrinsic priors.
struct DecoderModel {
    enum class Kind { None, Genie, Gaussian, Curve, Empirical };
    Kind kind = Kind::None;
    double tau = std::numeric_limits<double>::infinity();  // Gaussian
    const DecoderCurve* curve = nullptr;                   // Curve
    ConvCode code;                                         // Empirical
    std::uint64_t interleaver_seed = 0x5EED;
};

struct SeConfig {
    int N = 0, M = 0, K = 0, N_P = 0, T = 1;
    double zeta = 1.0;
    double sigma2 = 1.0;  // normalized noise variance
    Constellation x_const;
    RisPhaseSet s_phases;
    bool direct_link = true;
    DecoderModel x_dec, s_dec;
    int mc_samples = 100000;
    int max_iters = 100;
    double stop_tol = 1e-5;
    double var_floor_rel = 1e-12;
    std::uint64_t seed = 1;
};

struct SeState {
    double v_x = 1.0, v_u = 0.0, v_c = 0.0, v_s = 1.0;
    double tau_d = 0.0, tau_r = 0.0, tau_p = 0.0, tau_o = 0.0;
    double se_x_stderr = 0.0, se_s_stderr = 0.0;
};

struct SeResult {
    std::vector<SeState> trace;
    int iterations = 0;
    bool converged = false;
    bool clamp_flag = false;
    double v_x = 1.0, v_s = 1.0;
    double rho_x = 0.0, rho_s = 0.0;  // detector SNRs at the final state
};

// tau_d = tau_r = (N/M) v_u + (K/M) v_x + sigma2; the v_x term and tau_r
// disappear when the direct link is absent.
void se_moduleA(double v_u, double v_x, const SeConfig& cfg, double* tau_d,
                double* tau_r);

// tau_p = zeta (K/N) v_x; tau_o = tau_p^2 / (zeta (tau_p - v_c)), denominator
// clamped (and flagged) at a relative floor.
void se_moduleB(double v_x, double v_c, const SeConfig& cfg, double* tau_p,
                double* tau_o, bool* clamped = nullptr);

// Monte Carlo E var(x | r, o, prior): x uniform over the unit-power alphabet,
// r = x + CN(0, tau_r), o = x + CN(0, tau_o). stream_salt decorrelates calls.
double se_vx(double tau_r, double tau_o, const SeConfig& cfg,
             std::uint64_t stream_salt, double* stderr_out = nullptr);

// Monte Carlo pass over the Rayleigh model: s uniform over the phase alphabet,
// p_t ~ CN(0, zeta K/N - tau_p), c_t = p_t + CN(0, tau_p),
// d_t = s c_t + CN(0, tau_d). v_u and v_c mix the data term (leave-one-out
// priors) with the analytic pilot term weighted by N_P/N.
void se_vucs(double tau_d, double tau_p, const SeConfig& cfg,
             std::uint64_t stream_salt, double* v_u, double* v_c, double* v_s,
             double* vs_stderr = nullptr);

// Iterate the scalar recursion from v_x = v_s = 1, v_u = v_c = zeta K/N.
SeResult run_se(const SeConfig& cfg);

// Convenience wrapper: same recursion with the direct link removed.
SeResult blocked_direct_se(SeConfig cfg);

// Sample a prior vector over `points` for a truth index, per the model.
// Curve models must be resolved to Gaussian(tau) by the caller.
void sample_decoder_prior(const DecoderModel& m, std::span<const cxd> points,
                          int truth_idx, RngStream& rng, double* prior);

}  // namespace sapit
