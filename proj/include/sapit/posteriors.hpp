#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace sapit {

using cxd = std::complex<double>;

struct Moments {
    cxd mean{0.0, 0.0};
    double var = 0.0;
    bool underflow = false;  // all mixture weights vanished; uniform fallback used
};

// Mixture weights shared by the u- and c-posteriors:
// w_s proportional to pi(s) * CN(d; p*s, tau_p + tau_d). Returned normalized.
std::vector<double> mixture_weights(cxd d, double tau_d, cxd p, double tau_p,
                                    std::span<const double> pi,
                                    std::span<const cxd> s_points, bool* underflow = nullptr);

// Posterior of u with prior sum_s pi(s) CN(u; p*s, tau_p) and likelihood
// CN(u; d, tau_d).
Moments posterior_u(cxd d, double tau_d, cxd p, double tau_p,
                    std::span<const double> pi, std::span<const cxd> s_points);

// Posterior of c with prior CN(c; p, tau_p) and likelihood
// sum_s pi(s) CN(c; d/s, tau_d); all |s| = 1.
Moments posterior_c(cxd d, double tau_d, cxd p, double tau_p,
                    std::span<const double> pi, std::span<const cxd> s_points);

// Joint computation sharing the weights (the weights coincide for |s| = 1).
void posterior_uc(cxd d, double tau_d, cxd p, double tau_p,
                  std::span<const double> pi, std::span<const cxd> s_points,
                  Moments& u_out, Moments& c_out);

// Discrete posterior over points: P(i) proportional to
// prior[i] * exp(-|r - x_i|^2/tau_r) * exp(-|o - x_i|^2/tau_o).
// Either observation may be disabled with an infinite tau. Posterior
// probabilities are written to post when non-null.
Moments posterior_x(cxd r, double tau_r, cxd o, double tau_o,
                    std::span<const double> prior, std::span<const cxd> points,
                    double* post = nullptr);

// Discrete posterior over phases: P(s) proportional to
// alpha(s) * prod_t CN(d_t; p_t*s, tau_d + tau_p).
Moments posterior_s(std::span<const cxd> d, std::span<const cxd> p, double tau_d,
                    double tau_p, std::span<const double> alpha,
                    std::span<const cxd> s_points, double* post = nullptr);

// pi_t(s) proportional to alpha(s) * prod_{j != t} CN(d_j; p_j*s, tau_d+tau_p)
// for every t = 0..T-1; rows of pi_out are normalized, T x |S| row-major.
void compute_pi(std::span<const cxd> d, std::span<const cxd> p, double tau_d,
                double tau_p, std::span<const double> alpha,
                std::span<const cxd> s_points, double* pi_out);

}  // namespace sapit
