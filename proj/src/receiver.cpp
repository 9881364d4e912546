#include "sapit/receiver.hpp"

#include "small_buf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sapit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

struct Receiver::State {
    CMat MuX, MuU, MuC, P, B, D, R, O;
    double v_x = 0.0, v_u = 0.0, v_c = 0.0, v_s = 0.0;
    double tau_b = 0.0, tau_p = 0.0, tau_d = 0.0, tau_r = kInf, tau_o = kInf;
    std::vector<double> pi;     // (col*N + n)*|S| + i, col = q*T + t
    std::vector<double> alpha;  // (q*N_D + n)*|S| + i, data rows
    std::vector<double> beta;   // (col*K + k)*|X| + i
    std::vector<double> scratch_u, scratch_c, scratch_x, scratch_s;
    bool clamp_flag = false;
    bool underflow_flag = false;
};

Receiver::Receiver(const ChannelSet& ch, const FrameConfig& fcfg,
                   const ReceiverConfig& rcfg, const CMat& S_P,
                   const Interleaver* tx_pi, const Interleaver* ris_pi)
    : ch_(ch), fcfg_(fcfg), rcfg_(rcfg), S_P_(S_P), tx_pi_(tx_pi), ris_pi_(ris_pi) {
    g2_ = ch.G.squaredNorm();
    h2_ = ch.H.squaredNorm();
    f2_ = ch.F.squaredNorm();
    sym_power_ = fcfg.symbol_power();
    if (rcfg.mode != ReceiverConfig::Mode::Uncoded && (!tx_pi || !ris_pi))
        throw std::invalid_argument("receiver: coded modes need interleavers");
    if (rcfg.damping <= 0.0 || rcfg.damping > 1.0)
        throw std::invalid_argument("receiver: damping must be in (0, 1]");
}

void Receiver::init_state(State& st, const CMat& Y) const {
    const Dims& d = fcfg_.dims;
    int QT = fcfg_.Q * fcfg_.T;
    st.MuX = CMat::Zero(d.K, QT);
    st.MuU = CMat::Zero(d.N, QT);
    st.MuC = CMat::Zero(d.N, QT);
    st.P = CMat::Zero(d.N, QT);
    st.B = CMat::Zero(d.M, QT);
    st.D = CMat::Zero(d.N, QT);
    st.R = CMat::Zero(d.K, QT);
    st.O = CMat::Zero(d.K, QT);
    st.v_x = sym_power_;
    st.tau_p = st.v_u = st.v_c = f2_ * st.v_x / d.N;
    st.v_s = 1.0;
    st.tau_b = (g2_ * st.v_u + (rcfg_.direct_link ? h2_ * st.v_x : 0.0)) / d.M;

    int Sord = fcfg_.ris_phases.size();
    int Xord = fcfg_.tx_const.size();
    st.pi.assign(static_cast<std::size_t>(d.N) * QT * Sord, 1.0 / Sord);
    st.alpha.assign(static_cast<std::size_t>(d.N - fcfg_.N_P) * fcfg_.Q * Sord, 1.0 / Sord);
    st.beta.assign(static_cast<std::size_t>(d.K) * QT * Xord, 1.0 / Xord);
    st.scratch_u.resize(static_cast<std::size_t>(d.N) * QT);
    st.scratch_c.resize(static_cast<std::size_t>(d.N) * QT);
    st.scratch_x.resize(static_cast<std::size_t>(d.K) * QT);
    st.scratch_s.resize(static_cast<std::size_t>(d.N - fcfg_.N_P) * fcfg_.Q);

    // Pilot rows carry point-mass phase priors for every slot of the sub-block.
    const auto& spts = fcfg_.ris_phases.points();
    for (int q = 0; q < fcfg_.Q; ++q)
        for (int t = 0; t < fcfg_.T; ++t)
            for (int n = 0; n < fcfg_.N_P; ++n) {
                double* row = st.pi.data() +
                              (static_cast<std::size_t>(q * fcfg_.T + t) * d.N + n) * Sord;
                int best = 0;
                double bd = std::numeric_limits<double>::max();
                for (int i = 0; i < Sord; ++i) {
                    double dist = std::norm(S_P_(n, q) - spts[i]);
                    if (dist < bd) {
                        bd = dist;
                        best = i;
                    }
                }
                for (int i = 0; i < Sord; ++i) row[i] = (i == best) ? 1.0 : 0.0;
            }
}

void Receiver::update_beta(State& st, const FrameData* truth, bool decode) {
    const Dims& d = fcfg_.dims;
    int QT = fcfg_.Q * fcfg_.T;
    int Xord = fcfg_.tx_const.size();
    if (rcfg_.genie == ReceiverConfig::Genie::KnownX) {
        if (!truth) throw std::invalid_argument("receiver: genie KnownX needs truth");
        for (int slot = 0; slot < d.K * QT; ++slot) {
            double* row = st.beta.data() + static_cast<std::size_t>(slot) * Xord;
            for (int i = 0; i < Xord; ++i)
                row[i] = (i == truth->tx_symbol_idx[slot]) ? 1.0 : 0.0;
        }
        return;
    }
    if (!decode) return;  // uniform priors retained

    // Channel evidence per symbol slot (extrinsic of the decoder prior).
    double amp = std::sqrt(sym_power_);
    std::vector<cxd> pts(Xord);
    for (int i = 0; i < Xord; ++i) pts[i] = amp * fcfg_.tx_const.points[i];
    std::vector<double> uni(Xord, 1.0 / Xord);
    SymbolPriorTable ev;
    ev.order = Xord;
    ev.p.resize(static_cast<std::size_t>(d.K) * QT * Xord);
#pragma omp parallel for schedule(static)
    for (int slot = 0; slot < d.K * QT; ++slot) {
        int col = slot / d.K, k = slot % d.K;
        posterior_x(st.R(k, col), st.tau_r, st.O(k, col), st.tau_o, uni, pts,
                    ev.row(slot));
    }
    auto llrs = symbols_to_bit_llrs(ev, fcfg_.tx_const);
    BcjrResult res = bcjr_extrinsic(llrs, fcfg_.code, *tx_pi_);
    SymbolPriorTable priors = bit_llrs_to_symbol_priors(res.extrinsic, fcfg_.tx_const);
    st.beta = std::move(priors.p);
}

void Receiver::update_alpha_pi(State& st, const FrameData* truth, bool decode) {
    const Dims& d = fcfg_.dims;
    int Sord = fcfg_.ris_phases.size();
    int ND = d.N - fcfg_.N_P;
    const auto& spts = fcfg_.ris_phases.points();

    if (rcfg_.genie == ReceiverConfig::Genie::KnownS) {
        if (!truth) throw std::invalid_argument("receiver: genie KnownS needs truth");
        for (int q = 0; q < fcfg_.Q; ++q)
            for (int n = 0; n < ND; ++n) {
                int idx = truth->ris_symbol_idx[q * ND + n];
                double* arow = st.alpha.data() +
                               (static_cast<std::size_t>(q) * ND + n) * Sord;
                for (int i = 0; i < Sord; ++i) arow[i] = (i == idx) ? 1.0 : 0.0;
                for (int t = 0; t < fcfg_.T; ++t) {
                    double* prow =
                        st.pi.data() +
                        (static_cast<std::size_t>(q * fcfg_.T + t) * d.N + fcfg_.N_P + n) *
                            Sord;
                    for (int i = 0; i < Sord; ++i) prow[i] = (i == idx) ? 1.0 : 0.0;
                }
            }
        return;
    }

    if (decode) {
        // Evidence per (q, n): product over the T slots of the sub-block.
        SymbolPriorTable ev;
        ev.order = Sord;
        ev.p.resize(static_cast<std::size_t>(ND) * fcfg_.Q * Sord);
        const std::vector<double> uni(Sord, 1.0 / Sord);
#pragma omp parallel for schedule(static)
        for (int slot = 0; slot < ND * fcfg_.Q; ++slot) {
            int q = slot / ND, n = slot % ND;
            SmallBuf<cxd, 64> dv(fcfg_.T), pv(fcfg_.T);
            for (int t = 0; t < fcfg_.T; ++t) {
                dv[t] = st.D(fcfg_.N_P + n, q * fcfg_.T + t);
                pv[t] = st.P(fcfg_.N_P + n, q * fcfg_.T + t);
            }
            posterior_s(std::span<const cxd>(dv.data(), fcfg_.T),
                        std::span<const cxd>(pv.data(), fcfg_.T), st.tau_d, st.tau_p,
                        uni, spts, ev.row(slot));
        }
        auto llrs = symbols_to_bit_llrs(ev, fcfg_.ris_phases.constellation);
        BcjrResult res = bcjr_extrinsic(llrs, fcfg_.code, *ris_pi_);
        SymbolPriorTable priors =
            bit_llrs_to_symbol_priors(res.extrinsic, fcfg_.ris_phases.constellation);
        st.alpha = std::move(priors.p);
    }

    // pi_qtn(s) from alpha and the leave-one-slot-out likelihood product.
#pragma omp parallel for schedule(static)
    for (int slot = 0; slot < ND * fcfg_.Q; ++slot) {
        int q = slot / ND, n = slot % ND;
        SmallBuf<cxd, 64> dv(fcfg_.T), pv(fcfg_.T);
        for (int t = 0; t < fcfg_.T; ++t) {
            dv[t] = st.D(fcfg_.N_P + n, q * fcfg_.T + t);
            pv[t] = st.P(fcfg_.N_P + n, q * fcfg_.T + t);
        }
        const double* arow =
            st.alpha.data() + (static_cast<std::size_t>(q) * ND + n) * Sord;
        SmallBuf<double, 512> pi_rows(static_cast<std::size_t>(fcfg_.T) * Sord);
        compute_pi(std::span<const cxd>(dv.data(), fcfg_.T),
                   std::span<const cxd>(pv.data(), fcfg_.T), st.tau_d, st.tau_p,
                   std::span<const double>(arow, Sord), spts, pi_rows.data());
        for (int t = 0; t < fcfg_.T; ++t) {
            double* prow = st.pi.data() +
                           (static_cast<std::size_t>(q * fcfg_.T + t) * d.N + fcfg_.N_P + n) *
                               Sord;
            for (int i = 0; i < Sord; ++i) prow[i] = pi_rows[t * Sord + i];
        }
    }
}

DetectionResult Receiver::run(const CMat& Y, const FrameData* truth) {
    const Dims& d = fcfg_.dims;
    const int QT = fcfg_.Q * fcfg_.T;
    const int ND = d.N - fcfg_.N_P;
    const int Sord = fcfg_.ris_phases.size();
    const int Xord = fcfg_.tx_const.size();
    const double sigma2 = fcfg_.noise_var;
    const double damp = rcfg_.damping;
    const bool direct = rcfg_.direct_link;
    const bool joint_decode = rcfg_.mode == ReceiverConfig::Mode::Joint &&
                              rcfg_.genie == ReceiverConfig::Genie::None;

    State st;
    init_state(st, Y);
    const double tau_p_init = st.tau_p;
    const double tau_b_init = st.tau_b;
    const double floor_x = rcfg_.var_floor_rel * sym_power_;
    const double floor_p = rcfg_.var_floor_rel * tau_p_init;

    if (rcfg_.genie == ReceiverConfig::Genie::KnownX) update_beta(st, truth, false);
    if (rcfg_.genie == ReceiverConfig::Genie::KnownS) update_alpha_pi(st, truth, false);

    double amp = std::sqrt(sym_power_);
    std::vector<cxd> xpts(Xord);
    for (int i = 0; i < Xord; ++i) xpts[i] = amp * fcfg_.tx_const.points[i];
    const auto& spts = fcfg_.ris_phases.points();

    DetectionResult out;
    double prev_vx_n = 1.0, prev_vs = 1.0;
    int iter = 0;
    for (iter = 1; iter <= rcfg_.max_iters; ++iter) {
        // Step 1: module A -> {u}
        st.tau_d = d.N * (sigma2 + st.tau_b) / g2_;
        st.D = st.MuU + (d.N / g2_) * (ch_.G.adjoint() * (Y - st.B));

        // Step 2: module B -> {c}, Onsager-corrected
        double tau_p_new = std::max(f2_ * st.v_x / d.N, floor_p);
        CMat P_new = ch_.F * st.MuX -
                     (tau_p_new / std::max(st.tau_p, floor_p)) * (st.MuC - st.P);
        st.P = std::move(P_new);
        st.tau_p = tau_p_new;

        // Refresh the leave-one-out phase priors from the current observations
        // (decoder feedback alpha is still the previous iteration's).
        if (rcfg_.genie != ReceiverConfig::Genie::KnownS)
            update_alpha_pi(st, truth, false);

        // Steps 3-4: u and c posteriors
#pragma omp parallel for schedule(static)
        for (int idx = 0; idx < d.N * QT; ++idx) {
            int col = idx / d.N, n = idx % d.N;
            const double* pirow =
                st.pi.data() + (static_cast<std::size_t>(col) * d.N + n) * Sord;
            Moments mu, mc;
            posterior_uc(st.D(n, col), st.tau_d, st.P(n, col), st.tau_p,
                         std::span<const double>(pirow, Sord), spts, mu, mc);
            st.MuU(n, col) = damp * mu.mean + (1.0 - damp) * st.MuU(n, col);
            st.MuC(n, col) = damp * mc.mean + (1.0 - damp) * st.MuC(n, col);
            st.scratch_u[idx] = mu.var;
            st.scratch_c[idx] = mc.var;
            if (mu.underflow) st.underflow_flag = true;
        }
        double su = 0.0, sc = 0.0;
        for (int idx = 0; idx < d.N * QT; ++idx) {
            su += st.scratch_u[idx];
            sc += st.scratch_c[idx];
        }
        st.v_u = std::max(su / (d.N * QT), floor_p);
        st.v_c = std::max(sc / (d.N * QT), floor_p);

        // Step 5: module A -> {x}
        if (direct) {
            st.tau_r = d.K * (sigma2 + st.tau_b) / h2_;
            st.R = st.MuX + (d.K / h2_) * (ch_.H.adjoint() * (Y - st.B));
        }

        // Step 6: module B -> {x}
        double denom = st.tau_p - st.v_c;
        if (denom <= floor_p) {
            denom = floor_p;
            st.clamp_flag = true;
        }
        st.tau_o = d.K * st.tau_p * st.tau_p / (f2_ * denom);
        st.O = st.MuX + (d.K / f2_) * (st.tau_p / denom) *
                            (ch_.F.adjoint() * (st.MuC - st.P));

        // Step 7: X-decoder
        if (joint_decode) update_beta(st, truth, true);

        // Step 8: x posterior
#pragma omp parallel for schedule(static)
        for (int slot = 0; slot < d.K * QT; ++slot) {
            int col = slot / d.K, k = slot % d.K;
            const double* brow = st.beta.data() + static_cast<std::size_t>(slot) * Xord;
            Moments m = posterior_x(st.R(k, col), direct ? st.tau_r : kInf,
                                    st.O(k, col), st.tau_o,
                                    std::span<const double>(brow, Xord), xpts);
            st.MuX(k, col) = damp * m.mean + (1.0 - damp) * st.MuX(k, col);
            st.scratch_x[slot] = m.var;
            if (m.underflow) st.underflow_flag = true;
        }
        double sx = 0.0;
        for (int slot = 0; slot < d.K * QT; ++slot) sx += st.scratch_x[slot];
        st.v_x = std::max(sx / (d.K * QT), floor_x);

        // Step 9: S_D-decoder and pi
        if (rcfg_.genie != ReceiverConfig::Genie::KnownS)
            update_alpha_pi(st, truth, joint_decode);

        // Step 10: s posterior
#pragma omp parallel for schedule(static)
        for (int slot = 0; slot < ND * fcfg_.Q; ++slot) {
            int q = slot / ND, n = slot % ND;
            SmallBuf<cxd, 64> dv(fcfg_.T), pv(fcfg_.T);
            for (int t = 0; t < fcfg_.T; ++t) {
                dv[t] = st.D(fcfg_.N_P + n, q * fcfg_.T + t);
                pv[t] = st.P(fcfg_.N_P + n, q * fcfg_.T + t);
            }
            const double* arow =
                st.alpha.data() + (static_cast<std::size_t>(q) * ND + n) * Sord;
            Moments m = posterior_s(std::span<const cxd>(dv.data(), fcfg_.T),
                                    std::span<const cxd>(pv.data(), fcfg_.T), st.tau_d,
                                    st.tau_p, std::span<const double>(arow, Sord), spts);
            st.scratch_s[slot] = m.var;
        }
        double ss = 0.0;
        for (int slot = 0; slot < ND * fcfg_.Q; ++slot) ss += st.scratch_s[slot];
        st.v_s = std::max(ss / (ND * fcfg_.Q), rcfg_.var_floor_rel);

        // Step 11: quantities for the next iteration
        double tau_b_new = (g2_ * st.v_u + (direct ? h2_ * st.v_x : 0.0)) / d.M;
        CMat B_new = ch_.G * st.MuU - (tau_b_new / (sigma2 + st.tau_b)) * (Y - st.B);
        if (direct) B_new += ch_.H * st.MuX;
        st.B = std::move(B_new);
        st.tau_b = tau_b_new;

        // Trace and stopping
        IterationTrace tr;
        tr.v_x = st.v_x / sym_power_;
        tr.v_s = st.v_s;
        tr.tau_b = st.tau_b;
        tr.tau_d = st.tau_d;
        tr.tau_p = st.tau_p;
        if (truth) {
            tr.mse_x = (st.MuX - truth->X).squaredNorm() / (d.K * QT * sym_power_);
            double e = 0.0;
            for (int q = 0; q < fcfg_.Q; ++q)
                for (int n = 0; n < ND; ++n) {
                    // posterior mean of s under alpha and channel evidence
                    SmallBuf<cxd, 64> dv(fcfg_.T), pv(fcfg_.T);
                    for (int t = 0; t < fcfg_.T; ++t) {
                        dv[t] = st.D(fcfg_.N_P + n, q * fcfg_.T + t);
                        pv[t] = st.P(fcfg_.N_P + n, q * fcfg_.T + t);
                    }
                    const double* arow =
                        st.alpha.data() + (static_cast<std::size_t>(q) * ND + n) * Sord;
                    Moments m = posterior_s(std::span<const cxd>(dv.data(), fcfg_.T),
                                            std::span<const cxd>(pv.data(), fcfg_.T),
                                            st.tau_d, st.tau_p,
                                            std::span<const double>(arow, Sord), spts);
                    e += std::norm(m.mean - truth->S(fcfg_.N_P + n, q));
                }
            tr.mse_s = e / (ND * fcfg_.Q);
        }
        out.trace.push_back(tr);

        if (st.tau_b > 1e6 * tau_b_init && st.tau_b > sigma2) {
            out.diverged = true;
            break;
        }
        double vx_n = st.v_x / sym_power_;
        double delta = std::max(std::abs(vx_n - prev_vx_n), std::abs(st.v_s - prev_vs));
        if (iter > 1 && delta / std::max(std::max(vx_n, st.v_s), 1e-300) < rcfg_.stop_tol)
            break;
        prev_vx_n = vx_n;
        prev_vs = st.v_s;
    }
    out.iterations = std::min(iter, rcfg_.max_iters);
    out.clamp_flag = st.clamp_flag;
    out.underflow_flag = st.underflow_flag;

    // Final decisions.
    out.mu_X = st.MuX;
    out.mu_S.resize(ND, fcfg_.Q);
    out.hard_x_idx.resize(static_cast<std::size_t>(d.K) * QT);
    out.hard_s_idx.resize(static_cast<std::size_t>(ND) * fcfg_.Q);

    for (int slot = 0; slot < d.K * QT; ++slot) {
        int col = slot / d.K, k = slot % d.K;
        const double* brow = st.beta.data() + static_cast<std::size_t>(slot) * Xord;
        std::vector<double> post(Xord);
        posterior_x(st.R(k, col), direct ? st.tau_r : kInf, st.O(k, col), st.tau_o,
                    std::span<const double>(brow, Xord), xpts, post.data());
        out.hard_x_idx[slot] = static_cast<int>(
            std::max_element(post.begin(), post.end()) - post.begin());
    }
    for (int slot = 0; slot < ND * fcfg_.Q; ++slot) {
        int q = slot / ND, n = slot % ND;
        std::vector<cxd> dv(fcfg_.T), pv(fcfg_.T);
        for (int t = 0; t < fcfg_.T; ++t) {
            dv[t] = st.D(fcfg_.N_P + n, q * fcfg_.T + t);
            pv[t] = st.P(fcfg_.N_P + n, q * fcfg_.T + t);
        }
        const double* arow = st.alpha.data() + (static_cast<std::size_t>(q) * ND + n) * Sord;
        std::vector<double> post(Sord);
        Moments m = posterior_s(dv, pv, st.tau_d, st.tau_p,
                                std::span<const double>(arow, Sord), spts, post.data());
        out.mu_S(n, q) = m.mean;
        out.hard_s_idx[slot] = static_cast<int>(
            std::max_element(post.begin(), post.end()) - post.begin());
    }

    // Coded modes: one final decoder activation yields the payload bits.
    if (rcfg_.mode != ReceiverConfig::Mode::Uncoded) {
        std::vector<double> uni_x(Xord, 1.0 / Xord);
        SymbolPriorTable evx;
        evx.order = Xord;
        evx.p.resize(static_cast<std::size_t>(d.K) * QT * Xord);
        for (int slot = 0; slot < d.K * QT; ++slot) {
            int col = slot / d.K, k = slot % d.K;
            posterior_x(st.R(k, col), direct ? st.tau_r : kInf, st.O(k, col), st.tau_o,
                        uni_x, xpts, evx.row(slot));
        }
        BcjrResult resx =
            bcjr_extrinsic(symbols_to_bit_llrs(evx, fcfg_.tx_const), fcfg_.code, *tx_pi_);
        out.tx_bits_hat.resize(resx.info_app.size());
        for (std::size_t i = 0; i < resx.info_app.size(); ++i)
            out.tx_bits_hat[i] = resx.info_app[i] < 0.0 ? 1 : 0;

        std::vector<double> uni_s(Sord, 1.0 / Sord);
        SymbolPriorTable evs;
        evs.order = Sord;
        evs.p.resize(static_cast<std::size_t>(ND) * fcfg_.Q * Sord);
        for (int slot = 0; slot < ND * fcfg_.Q; ++slot) {
            int q = slot / ND, n = slot % ND;
            std::vector<cxd> dv(fcfg_.T), pv(fcfg_.T);
            for (int t = 0; t < fcfg_.T; ++t) {
                dv[t] = st.D(fcfg_.N_P + n, q * fcfg_.T + t);
                pv[t] = st.P(fcfg_.N_P + n, q * fcfg_.T + t);
            }
            posterior_s(dv, pv, st.tau_d, st.tau_p, uni_s, spts, evs.row(slot));
        }
        BcjrResult ress = bcjr_extrinsic(
            symbols_to_bit_llrs(evs, fcfg_.ris_phases.constellation), fcfg_.code, *ris_pi_);
        out.ris_bits_hat.resize(ress.info_app.size());
        for (std::size_t i = 0; i < ress.info_app.size(); ++i)
            out.ris_bits_hat[i] = ress.info_app[i] < 0.0 ? 1 : 0;
    }
    return out;
}

}  // namespace sapit
