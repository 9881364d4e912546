#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sapit/state_evolution.hpp"

namespace sapit {

struct RateConfig {
    SeConfig se;            // system ratios and alphabets; decoder models ignored
    double tau_max = 1e6;   // no-information endpoint of the decoder parameter
    int path_points = 32;   // knots per monotonic path (excluding exact endpoints)
    int grid_points = 200;  // rho grid per psi integral
    int gh_points = 40;     // Gauss-Hermite order for psi_x_un
    int psi_s_mc = 100000;  // MC draws per psi_s_un evaluation
    bool bits = true;       // report bits per channel use (false: nats)
};

// MMSE of a uniform unit-power constellation draw through complex AWGN at SNR
// rho; deterministic 2-D Gauss-Hermite quadrature.
double psi_x_un(double rho, const Constellation& c, int gh_points = 40);

// Rayleigh-model estimation MSE of sum_t p_t s: with p_t ~ CN(0, 1) and
// d_t = p_t s + CN(0, 1/rho), returns E[ sum_t |p_t|^2 var(s | {d_t, p_t}) ].
// Equals T at rho = 0 and vanishes as rho -> inf.
double psi_s_un(double rho, const RisPhaseSet& phases, int T, int mc_samples,
                std::uint64_t seed, double* stderr_out = nullptr);

struct EtaResult {
    double rho_x = 0.0, rho_s = 0.0;
    bool converged = false;
};

// Detector transfer map: run the internal scalar recursion with Gaussian
// decoder models fixed at parameters (tau_x, tau_s) to its fixed point;
// return rho_x = 1/tau_r + 1/tau_o and rho_s = (zeta K/N - tau_p)/(tau_p + tau_d).
EtaResult eta(double tau_x, double tau_s, const RateConfig& cfg);

// Ordered (tau_x, tau_s) knots from (tau_x_max, tau_s_max) down to (0, 0),
// both coordinates nonincreasing.
struct MonotonicPath {
    std::vector<std::pair<double, double>> pts;
    bool monotone() const;
};

MonotonicPath straight_path(double tau_max, int n_points);
MonotonicPath random_staircase_path(double tau_max, int n_points, RngStream& rng);

struct DecoderCurves {
    DecoderCurve fx, fs;  // tau = f(rho)
};

// Convergence predicate: true iff (fx^{-1}(tau_x), fs^{-1}(tau_s)) is
// strictly component-wise below eta(tau_x, tau_s) at every path knot.
bool check_convergence(const MonotonicPath& path, const DecoderCurves& curves,
                       const RateConfig& cfg);

struct RateResult {
    double R_T = 0.0, R_R = 0.0, sum = 0.0;
    bool bits = true;
    int best_path = -1;               // index into path_values; -1 if unused
    std::vector<double> path_values;  // line-integral term per sampled path
    bool converged = true;
    std::vector<std::pair<double, double>> best_path_pts;
};

// Maximal achievable sum rate: the two uncoded leading integrals up to
// eta(tau_max, tau_max) plus the supremum over sampled monotonic paths
// (straight line + n_paths-1 random staircases) of the line integral of
// (K psi_x_un, ((N - N_P)/T) psi_s_un) . d eta.
RateResult sum_rate(const RateConfig& cfg, int n_paths, std::uint64_t seed);

// Separate detection / decoding bound: run the uncoded recursion to its fixed
// point (rho_x*, rho_s*) and integrate the uncoded psi curves to there.
RateResult separate_rate(const RateConfig& cfg);

// Constellation-constrained AWGN mutual information in nats at SNR rho
// (Gauss-Hermite), used with the I-MMSE identity.
double awgn_mutual_information(const Constellation& c, double rho,
                               int gh_points = 40);

}  // namespace sapit
