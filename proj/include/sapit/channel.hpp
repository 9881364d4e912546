#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "sapit/rng.hpp"

namespace sapit {

using CMat = Eigen::MatrixXcd;

struct Geometry {
    std::array<double, 3> tx{0.0, 0.0, 1.5};
    std::array<double, 3> rx{0.0, 500.0, 11.5};
    std::array<double, 3> ris{10.0, 490.0, 11.5};
};

struct PathLossParams {
    double d0 = 1.0;           // reference distance, m
    double beta0 = 1e-3;       // gain at d0 (-30 dB)
    double alpha_ris = 2.2;    // Tx-RIS and RIS-Rx exponent
    double alpha_direct = 3.5; // Tx-Rx exponent
};

enum class LinkKind { Ris, Direct };

struct Dims {
    int N = 0;  // RIS elements
    int M = 0;  // Rx antennas
    int K = 0;  // Tx antennas
};

// G: RIS->Rx (M x N), H: Tx->Rx (M x K), F: Tx->RIS (N x K).
struct ChannelSet {
    CMat G, H, F;
    Dims dims;
};

struct NormalizedChannels {
    CMat Gt, Ht, Ft;
    double zeta = 0.0;
    double scale_a = 1.0;  // received signal is divided by a in the scaled model
};

double distance(const std::array<double, 3>& a, const std::array<double, 3>& b);
double path_loss(double d, const PathLossParams& params, LinkKind link);

ChannelSet gen_channels(const Dims& dims, const Geometry& geo,
                        const PathLossParams& params, RngStream& rng);

// Rescale so that ||Gt||_F^2/N = 1, ||Ht||_F^2/K = 1, ||Ft||_F^2/K = zeta.
NormalizedChannels normalize(const ChannelSet& ch);

// Additive Gaussian estimation error with per-matrix normalized MSE
// 10^(nmse_db/10). -inf disables the perturbation.
ChannelSet perturb_csi(const ChannelSet& ch, double nmse_db, RngStream& rng);

void dump_channels(const ChannelSet& ch, std::uint64_t seed, const std::string& path);
ChannelSet load_channels(const std::string& path);

}  // namespace sapit
