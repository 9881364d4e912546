#include "sapit/frame.hpp"

#include <cmath>
#include <stdexcept>

namespace sapit {

std::vector<std::uint8_t> random_bits(int n, RngStream& rng) {
    std::vector<std::uint8_t> bits(n);
    for (int i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>(rng.next_u64() & 1u);
    return bits;
}

CMat gen_pilots(int N_P, int Q, const RisPhaseSet& phases, RngStream& rng) {
    if (N_P < 1) throw std::invalid_argument("gen_pilots: N_P must be >= 1");
    CMat S_P(N_P, Q);
    int order = phases.size();
    for (int q = 0; q < Q; ++q)
        for (int n = 0; n < N_P; ++n)
            S_P(n, q) = phases.points()[rng.uniform_int(order)];
    return S_P;
}

namespace {

// Map a bit stream onto constellation indices, bits_per_symbol bits each,
// MSB first; returns indices per slot.
std::vector<int> bits_to_indices(const std::vector<std::uint8_t>& bits,
                                 const Constellation& c, int slots) {
    int bps = c.bits_per_symbol;
    if (static_cast<int>(bits.size()) != slots * bps)
        throw std::invalid_argument("build_frames: bit count does not match symbol capacity");
    std::vector<int> idx(slots);
    for (int s = 0; s < slots; ++s) {
        std::uint32_t label = 0;
        for (int b = 0; b < bps; ++b)
            label = (label << 1) | bits[static_cast<std::size_t>(s) * bps + b];
        idx[s] = c.index_of_label(label);
    }
    return idx;
}

std::vector<std::uint8_t> coded_stream(const std::vector<std::uint8_t>& payload,
                                       const ConvCode& code, const Interleaver& pi) {
    return pi.apply_bits(conv_encode(payload, code));
}

}  // namespace

FrameData build_frames(const FrameConfig& cfg, const std::vector<std::uint8_t>& tx_payload,
                       const std::vector<std::uint8_t>& ris_payload,
                       const Interleaver& tx_pi, const Interleaver& ris_pi,
                       RngStream& pilot_rng) {
    const Dims& d = cfg.dims;
    if (cfg.N_P < 1 || cfg.N_P >= d.N)
        throw std::invalid_argument("build_frames: need 1 <= N_P < N");
    FrameData frame;
    frame.tx_bits = tx_payload;
    frame.ris_bits = ris_payload;

    std::vector<std::uint8_t> tx_stream =
        cfg.coded ? coded_stream(tx_payload, cfg.code, tx_pi) : tx_payload;
    std::vector<std::uint8_t> ris_stream =
        cfg.coded ? coded_stream(ris_payload, cfg.code, ris_pi) : ris_payload;

    frame.tx_symbol_idx = bits_to_indices(tx_stream, cfg.tx_const, cfg.tx_symbol_slots());
    frame.ris_symbol_idx =
        bits_to_indices(ris_stream, cfg.ris_phases.constellation, cfg.ris_symbol_slots());

    double amp = std::sqrt(cfg.symbol_power());
    frame.X.resize(d.K, cfg.Q * cfg.T);
    for (int col = 0; col < cfg.Q * cfg.T; ++col)
        for (int k = 0; k < d.K; ++k)
            frame.X(k, col) = amp * cfg.tx_const.points[frame.tx_symbol_idx[col * d.K + k]];

    frame.S.resize(d.N, cfg.Q);
    frame.S.topRows(cfg.N_P) = gen_pilots(cfg.N_P, cfg.Q, cfg.ris_phases, pilot_rng);
    int nd = d.N - cfg.N_P;
    for (int q = 0; q < cfg.Q; ++q)
        for (int n = 0; n < nd; ++n)
            frame.S(cfg.N_P + n, q) =
                cfg.ris_phases.points()[frame.ris_symbol_idx[q * nd + n]];
    return frame;
}

CMat synthesize(const ChannelSet& ch, const FrameData& frame, int T, double noise_var,
                RngStream& rng) {
    int QT = static_cast<int>(frame.X.cols());
    int Q = static_cast<int>(frame.S.cols());
    if (QT != Q * T) throw std::invalid_argument("synthesize: inconsistent Q*T");
    CMat Y(ch.dims.M, QT);
    for (int q = 0; q < Q; ++q) {
        CMat A = ch.G * frame.S.col(q).asDiagonal() * ch.F + ch.H;
        Y.middleCols(q * T, T) = A * frame.X.middleCols(q * T, T);
    }
    if (noise_var > 0.0)
        for (int c = 0; c < QT; ++c)
            for (int m = 0; m < ch.dims.M; ++m) Y(m, c) += rng.cgaussian(0.0, noise_var);
    return Y;
}

FrameData random_frame(const FrameConfig& cfg, const ChannelSet& ch,
                       const Interleaver& tx_pi, const Interleaver& ris_pi,
                       RngStream& rng) {
    int tx_bits = cfg.coded ? cfg.tx_info_bits() : cfg.tx_coded_bits();
    int ris_bits = cfg.coded ? cfg.ris_info_bits() : cfg.ris_coded_bits();
    auto tx_payload = random_bits(tx_bits, rng);
    auto ris_payload = random_bits(ris_bits, rng);
    FrameData frame = build_frames(cfg, tx_payload, ris_payload, tx_pi, ris_pi, rng);
    frame.Y = synthesize(ch, frame, cfg.T, cfg.noise_var, rng);
    return frame;
}

}  // namespace sapit
