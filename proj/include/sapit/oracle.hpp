#pragma once

#include <complex>
#include <span>
#include <vector>

#include "sapit/channel.hpp"
#include "sapit/frame.hpp"

namespace sapit::oracle {

using cxd = std::complex<double>;

// Brute-force 2-D grid quadrature over the complex plane of the unnormalized
// scalar posterior behind the u/c estimators:
//   mode_u: prior sum_s pi(s) CN(z; p s, tau_p), likelihood CN(d; z, tau_d)
//   mode_c: prior CN(z; p, tau_p), likelihood sum_s pi(s) CN(d; z s, tau_d)
// Implemented independently of the production kernels (direct density grid).
void quadrature_mixture_moments(std::span<const double> pi, cxd p, double tau_p,
                                cxd d, double tau_d, std::span<const cxd> s_points,
                                bool mode_u, cxd* mean, double* var,
                                int grid = 600, double pad_sigmas = 8.0);

struct ExactMapResult {
    std::vector<int> map_x_idx;            // K*Q*T slots, column-major
    std::vector<int> map_s_idx;            // (N-N_P)*Q, column-major
    std::vector<double> marg_x;            // slot-major [slot][point]
    std::vector<double> marg_s;
    double map_log_likelihood = 0.0;
};

// Enumerate every (X, S_D) hypothesis, score by the Gaussian likelihood of
// Y = (G diag(s) F + H) X + W, and return exact marginals and the joint MAP.
// Refuses when the hypothesis count exceeds 2^20.
ExactMapResult exact_joint_map(const CMat& Y, const ChannelSet& ch,
                               const FrameConfig& cfg, const CMat& S_P);

// Deterministic grid-quadrature MMSE of a uniform constellation draw through
// complex AWGN at SNR rho (independent of the Gauss-Hermite path).
double scalar_mmse_quadrature(const Constellation& c, double rho, int grid = 800,
                              double pad_sigmas = 8.0);

// Constellation-constrained AWGN mutual information in nats by the same grid
// quadrature (independent I-MMSE cross-check).
double awgn_mi_quadrature(const Constellation& c, double rho, int grid = 800,
                          double pad_sigmas = 8.0);

// 1-D quadrature of 1 - int (pi tau_r)^(-1/2) tanh(2 Re(R)/tau_r)
//   exp(-(Re(R)-1)^2 / tau_r) dRe(R): the binary-alphabet MMSE identity.
double bpsk_tanh_integral(double tau_r, int grid = 20000, double span_sigmas = 10.0);

}  // namespace sapit::oracle
