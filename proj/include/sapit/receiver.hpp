#pragma once

#include <optional>
#include <vector>

#include "sapit/channel.hpp"
#include "sapit/frame.hpp"
#include "sapit/posteriors.hpp"

namespace sapit {

struct ReceiverConfig {
    enum class Mode { Joint, Separate, Uncoded };
    enum class Genie { None, KnownS, KnownX };

    Mode mode = Mode::Uncoded;
    Genie genie = Genie::None;
    bool direct_link = true;
    int max_iters = 50;
    double stop_tol = 1e-4;
    double damping = 1.0;          // 1.0 = off
    double var_floor_rel = 1e-12;  // relative to symbol power
};

struct IterationTrace {
    double v_x = 0.0;  // normalized by symbol power
    double v_s = 0.0;
    double tau_b = 0.0, tau_d = 0.0, tau_p = 0.0;
    double mse_x = 0.0;  // empirical, normalized by symbol power (truth supplied)
    double mse_s = 0.0;  // empirical per data entry
};

struct DetectionResult {
    CMat mu_X;  // K x QT posterior means
    CMat mu_S;  // (N - N_P) x Q posterior means (data rows)
    std::vector<int> hard_x_idx;   // constellation index, column-major K x QT
    std::vector<int> hard_s_idx;   // column-major (N - N_P) x Q
    std::vector<std::uint8_t> tx_bits_hat;   // decoded info bits (coded modes)
    std::vector<std::uint8_t> ris_bits_hat;
    std::vector<IterationTrace> trace;
    int iterations = 0;
    bool diverged = false;
    bool clamp_flag = false;      // tau_p - v_c denominator was clamped
    bool underflow_flag = false;  // posterior weight underflow fallback taken
};

// Algorithm state with per-block message arrays and scalar variances.
class Receiver {
public:
    Receiver(const ChannelSet& ch, const FrameConfig& fcfg, const ReceiverConfig& rcfg,
             const CMat& S_P, const Interleaver* tx_pi = nullptr,
             const Interleaver* ris_pi = nullptr);

    // Truth (when given) drives the per-iteration empirical MSE trace and the
    // genie modes.
    DetectionResult run(const CMat& Y, const FrameData* truth = nullptr);

private:
    struct State;
    void init_state(State& st, const CMat& Y) const;
    void update_beta(State& st, const FrameData* truth, bool decode);
    void update_alpha_pi(State& st, const FrameData* truth, bool decode);

    const ChannelSet& ch_;
    FrameConfig fcfg_;
    ReceiverConfig rcfg_;
    CMat S_P_;
    const Interleaver* tx_pi_;
    const Interleaver* ris_pi_;
    double g2_, h2_, f2_;
    double sym_power_;
};

}  // namespace sapit
