#pragma once

#include <cstdint>
#include <vector>

#include "sapit/channel.hpp"
#include "sapit/coding.hpp"
#include "sapit/constellation.hpp"

namespace sapit {

struct FrameConfig {
    Dims dims;
    int N_P = 1;    // pilot rows of S
    int Q = 1;      // sub-blocks
    int T = 1;      // slots per sub-block
    Constellation tx_const;
    RisPhaseSet ris_phases;
    double tx_power_dbm = 12.0;
    double noise_var = 1e-12;  // sigma_w^2, W
    bool coded = true;
    ConvCode code;

    int tx_symbol_slots() const { return dims.K * Q * T; }
    int ris_symbol_slots() const { return (dims.N - N_P) * Q; }
    // Per-symbol power: total budget split across the K antennas.
    double symbol_power() const {
        return dbm_to_watts(tx_power_dbm) / static_cast<double>(dims.K);
    }
    int tx_coded_bits() const { return tx_symbol_slots() * tx_const.bits_per_symbol; }
    int ris_coded_bits() const {
        return ris_symbol_slots() * ris_phases.constellation.bits_per_symbol;
    }
    int tx_info_bits() const { return code.info_length(tx_coded_bits()); }
    int ris_info_bits() const { return code.info_length(ris_coded_bits()); }
};

struct FrameData {
    CMat X;   // K x QT, scaled symbols
    CMat S;   // N x Q, rows 1..N_P are pilots
    CMat Y;   // M x QT
    std::vector<std::uint8_t> tx_bits;   // info bits when coded, raw bits otherwise
    std::vector<std::uint8_t> ris_bits;
    std::vector<int> tx_symbol_idx;   // constellation index per slot, column-major
    std::vector<int> ris_symbol_idx;  // data rows only, column-major over (N-N_P) x Q
};

CMat gen_pilots(int N_P, int Q, const RisPhaseSet& phases, RngStream& rng);

// Assemble X and S from payload bits (Y left empty). Coded mode encodes and
// interleaves each stream; uncoded maps raw bits directly.
FrameData build_frames(const FrameConfig& cfg, const std::vector<std::uint8_t>& tx_payload,
                       const std::vector<std::uint8_t>& ris_payload,
                       const Interleaver& tx_pi, const Interleaver& ris_pi,
                       RngStream& pilot_rng);

// Random payloads + pilots + synthesis in one go.
FrameData random_frame(const FrameConfig& cfg, const ChannelSet& ch,
                       const Interleaver& tx_pi, const Interleaver& ris_pi,
                       RngStream& rng);

// y_qt = (G diag(s_q) F + H) x_qt + w_qt.
CMat synthesize(const ChannelSet& ch, const FrameData& frame, int T, double noise_var,
                RngStream& rng);

std::vector<std::uint8_t> random_bits(int n, RngStream& rng);

}  // namespace sapit
