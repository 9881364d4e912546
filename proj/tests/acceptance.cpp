// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, next to the checks that use them.

#include <algorithm>
#include <bit>
#include <chrono>
#include <memory>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sapit/experiment.hpp"
#include "sapit/frame.hpp"
#include "sapit/oracle.hpp"
#include "sapit/rate_analysis.hpp"
#include "sapit/receiver.hpp"
#include "sapit/reference.hpp"
#include "sapit/state_evolution.hpp"

using namespace sapit;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", idx,
                name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------- shared ----

struct TrialOut {
    std::vector<IterationTrace> trace;
    long x_bit_errors = 0, x_bits = 0;
    long s_bit_errors = 0, s_bits = 0;
    bool diverged = false;
};

// One end-to-end link-level trial: channels, frame, detector.
TrialOut run_trial(const ExperimentConfig& cfg, double power_dbm, std::uint64_t seed,
                   ReceiverConfig::Genie genie, bool coded, int iters,
                   double stop_tol) {
    FrameConfig fcfg;
    fcfg.dims = {cfg.N, cfg.M, cfg.K};
    fcfg.N_P = cfg.N_P;
    fcfg.Q = cfg.Q;
    fcfg.T = cfg.T;
    fcfg.tx_const = make_tx_constellation(cfg.tx_mod);
    fcfg.ris_phases = make_ris_phases(cfg.ris_order);
    fcfg.tx_power_dbm = power_dbm;
    fcfg.noise_var = cfg.noise_var;
    fcfg.coded = coded;

    RngStream crng(seed, 1);
    auto ch = gen_channels(fcfg.dims, Geometry{}, PathLossParams{}, crng);
    if (!cfg.direct_link) ch.H.setZero();

    Interleaver tx_pi = coded ? Interleaver::random(fcfg.tx_coded_bits(), cfg.seed ^ 0xA1)
                              : Interleaver::identity(0);
    Interleaver ris_pi = coded ? Interleaver::random(fcfg.ris_coded_bits(), cfg.seed ^ 0xB2)
                               : Interleaver::identity(0);
    RngStream frng(seed, 2);
    auto frame = random_frame(fcfg, ch, tx_pi, ris_pi, frng);

    ReceiverConfig rcfg;
    rcfg.mode = coded ? ReceiverConfig::Mode::Joint : ReceiverConfig::Mode::Uncoded;
    rcfg.genie = genie;
    rcfg.direct_link = cfg.direct_link;
    rcfg.max_iters = iters;
    rcfg.stop_tol = stop_tol;
    Receiver rx(ch, fcfg, rcfg, frame.S.topRows(fcfg.N_P), coded ? &tx_pi : nullptr,
                coded ? &ris_pi : nullptr);
    auto det = rx.run(frame.Y, &frame);

    TrialOut out;
    out.trace = det.trace;
    out.diverged = det.diverged;
    if (coded) {
        out.x_bits = static_cast<long>(frame.tx_bits.size());
        for (std::size_t i = 0; i < frame.tx_bits.size(); ++i)
            out.x_bit_errors += frame.tx_bits[i] != det.tx_bits_hat[i];
        out.s_bits = static_cast<long>(frame.ris_bits.size());
        for (std::size_t i = 0; i < frame.ris_bits.size(); ++i)
            out.s_bit_errors += frame.ris_bits[i] != det.ris_bits_hat[i];
    } else {
        const auto& xc = fcfg.tx_const;
        int bx = xc.bits_per_symbol;
        for (std::size_t i = 0; i < frame.tx_symbol_idx.size(); ++i) {
            std::uint32_t diff = xc.labels[frame.tx_symbol_idx[i]] ^
                                 xc.labels[det.hard_x_idx[i]];
            out.x_bit_errors += std::popcount(diff);
            out.x_bits += bx;
        }
        const auto& sc = fcfg.ris_phases.constellation;
        int bs = sc.bits_per_symbol;
        for (std::size_t i = 0; i < frame.ris_symbol_idx.size(); ++i) {
            std::uint32_t diff = sc.labels[frame.ris_symbol_idx[i]] ^
                                 sc.labels[det.hard_s_idx[i]];
            out.s_bit_errors += std::popcount(diff);
            out.s_bits += bs;
        }
    }
    return out;
}

ExperimentConfig desk_config() {
    ExperimentConfig cfg;
    cfg.N = 256;
    cfg.M = 256;
    cfg.K = 32;
    cfg.N_P = 20;
    cfg.Q = 64;
    cfg.T = 2;
    cfg.tx_mod = "qpsk";
    cfg.ris_order = 2;
    cfg.direct_link = false;
    cfg.noise_var = 1e-12;
    cfg.seed = 1;
    return cfg;
}

std::vector<double> random_simplex(RngStream& rng, int n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (double& v : w) {
        v = -std::log(1.0 - rng.uniform());
        s += v;
    }
    for (double& v : w) v /= s;
    return w;
}

// ------------------------------------------------------------ criterion 1 ----

void criterion_1() {
    // Desk twin, uncoded, blocked direct link. 40 dBm puts the first
    // SE iteration at v_x ~ 0.77, inside the required [0.3, 0.8] window.
    // Tolerance: per iteration, sim and SE agree within +/-20% relative or
    // +/-1 dB, or both sit below the converged floor 5e-3 where the waterfall
    // has already bottomed out.
    const double power = 40.0;
    const int iters = 10, seeds = 20;
    auto cfg = desk_config();

    auto se_cfg = make_se_config(cfg, power);
    se_cfg.mc_samples = 100000;
    se_cfg.max_iters = iters;
    se_cfg.stop_tol = 0.0;
    auto se = run_se(se_cfg);

    std::vector<double> mx(iters, 0.0), ms(iters, 0.0);
    for (int s = 0; s < seeds; ++s) {
        auto t = run_trial(cfg, power, 1000 + s, ReceiverConfig::Genie::None, false,
                           iters, 0.0);
        for (int i = 0; i < iters; ++i) {
            mx[i] += t.trace[i].mse_x / seeds;
            ms[i] += t.trace[i].mse_s / seeds;
        }
    }
    bool first_win = se.trace[0].v_x >= 0.3 && se.trace[0].v_x <= 0.8;
    bool ok = first_win;
    std::string detail = "se v_x(1)=" + fmt(se.trace[0].v_x);
    const double floor = 5e-3;
    auto agree = [&](double sim, double pred) {
        if (sim < floor && pred < floor) return true;
        double rel = std::abs(sim - pred) / std::max(pred, 1e-300);
        double db = std::abs(10.0 * std::log10(sim / pred));
        return rel <= 0.20 || db <= 1.0;
    };
    for (int i = 0; i < iters; ++i) {
        bool ax = agree(mx[i], se.trace[i].v_x);
        bool as = agree(ms[i], se.trace[i].v_s);
        if (!ax || !as) {
            ok = false;
            detail += "; it" + std::to_string(i + 1) + " x " + fmt(mx[i]) + "/" +
                      fmt(se.trace[i].v_x) + " s " + fmt(ms[i]) + "/" +
                      fmt(se.trace[i].v_s);
        }
    }
    report(1, "SE-simulation agreement, desk twin, 20 seeds", ok, detail);
}

// ------------------------------------------------------------ criterion 2 ----

void criterion_2() {
    bool ok = true;
    double worst_q = 0.0, worst_e = 0.0;
    RngStream rng(0xACCE55, 0);
    auto phases = make_ris_phases(4);
    for (int trial = 0; trial < 100; ++trial) {
        auto pi = random_simplex(rng, 4);
        cxd p = rng.cgaussian(0.0, 1.0);
        cxd d = rng.cgaussian(0.0, 2.0);
        double tau_p = 0.05 + rng.uniform();
        double tau_d = 0.05 + rng.uniform();
        auto u = posterior_u(d, tau_d, p, tau_p, pi, phases.points());
        auto c = posterior_c(d, tau_d, p, tau_p, pi, phases.points());
        cxd qum, qcm;
        double quv, qcv;
        oracle::quadrature_mixture_moments(pi, p, tau_p, d, tau_d, phases.points(),
                                           true, &qum, &quv);
        oracle::quadrature_mixture_moments(pi, p, tau_p, d, tau_d, phases.points(),
                                           false, &qcm, &qcv);
        worst_q = std::max({worst_q, std::abs(u.mean - qum), std::abs(u.var - quv),
                            std::abs(c.mean - qcm), std::abs(c.var - qcv)});
    }
    ok = ok && worst_q < 1e-6;

    auto xc = make_qam(16);
    for (int trial = 0; trial < 100; ++trial) {
        auto prior = random_simplex(rng, 16);
        cxd r = rng.cgaussian(0.0, 1.5), o = rng.cgaussian(0.0, 1.5);
        double tr = 0.1 + rng.uniform(), to = 0.1 + rng.uniform();
        auto m = posterior_x(r, tr, o, to, prior, xc.points);
        std::vector<double> w(16);
        double z = 0.0;
        for (int i = 0; i < 16; ++i) {
            w[i] = prior[i] * std::exp(-std::norm(r - xc.points[i]) / tr -
                                       std::norm(o - xc.points[i]) / to);
            z += w[i];
        }
        cxd mean = 0.0;
        double e2 = 0.0;
        for (int i = 0; i < 16; ++i) {
            mean += (w[i] / z) * xc.points[i];
            e2 += (w[i] / z) * std::norm(xc.points[i]);
        }
        worst_e = std::max({worst_e, std::abs(m.mean - mean),
                            std::abs(m.var - (e2 - std::norm(mean)))});
    }
    const int T = 2;
    for (int trial = 0; trial < 100; ++trial) {
        auto alpha = random_simplex(rng, 4);
        std::vector<cxd> d(T), p(T);
        for (int t = 0; t < T; ++t) {
            d[t] = rng.cgaussian(0.0, 1.0);
            p[t] = rng.cgaussian(0.0, 1.0);
        }
        double td = 0.2 + rng.uniform(), tp = 0.2 + rng.uniform();
        auto m = posterior_s(d, p, td, tp, alpha, phases.points());
        std::vector<double> w(4);
        double z = 0.0;
        for (int i = 0; i < 4; ++i) {
            double ll = 0.0;
            for (int t = 0; t < T; ++t)
                ll -= std::norm(d[t] - p[t] * phases.points()[i]) / (td + tp);
            w[i] = alpha[i] * std::exp(ll);
            z += w[i];
        }
        cxd mean = 0.0;
        for (int i = 0; i < 4; ++i) mean += (w[i] / z) * phases.points()[i];
        worst_e = std::max({worst_e, std::abs(m.mean - mean),
                            std::abs(m.var - (1.0 - std::norm(mean)))});
    }
    ok = ok && worst_e < 1e-12;
    report(2, "posterior oracles (quadrature 1e-6, enumeration 1e-12)", ok,
           "quad err " + fmt(worst_q) + ", enum err " + fmt(worst_e));
}

// ------------------------------------------------------------ criterion 3 ----

void criterion_3() {
    FrameConfig fcfg;
    fcfg.dims = {3, 4, 2};
    fcfg.N_P = 1;
    fcfg.Q = 1;
    fcfg.T = 1;
    fcfg.tx_const = make_psk(2);
    fcfg.ris_phases = make_ris_phases(2);
    fcfg.noise_var = 1e-12;
    fcfg.coded = false;

    const std::vector<double> powers = {45.0, 52.0, 55.0, 60.0, 65.0};
    const int trials = 500;
    bool ok = true;
    std::string detail;
    for (double pw : powers) {
        fcfg.tx_power_dbm = pw;
        long map_err = 0, alg_err = 0, slots = 0;
        for (int tr = 0; tr < trials; ++tr) {
            std::uint64_t seed = 50000 + tr;
            RngStream crng(seed, 1);
            auto ch = gen_channels(fcfg.dims, Geometry{}, PathLossParams{}, crng);
            RngStream frng(seed, 2);
            auto frame = random_frame(fcfg, ch, Interleaver::identity(0),
                                      Interleaver::identity(0), frng);

            auto map = oracle::exact_joint_map(frame.Y, ch, fcfg, frame.S.topRows(1));
            // Per-symbol decisions from the exact marginals (minimum SER rule).
            for (int slot = 0; slot < 2; ++slot) {
                int best = 0;
                for (int i = 1; i < 2; ++i)
                    if (map.marg_x[slot * 2 + i] > map.marg_x[slot * 2 + best]) best = i;
                map_err += best != frame.tx_symbol_idx[slot];
            }
            for (int slot = 0; slot < 2; ++slot) {
                int best = 0;
                for (int i = 1; i < 2; ++i)
                    if (map.marg_s[slot * 2 + i] > map.marg_s[slot * 2 + best]) best = i;
                map_err += best != frame.ris_symbol_idx[slot];
            }

            ReceiverConfig rcfg;
            rcfg.mode = ReceiverConfig::Mode::Uncoded;
            rcfg.max_iters = 30;
            rcfg.stop_tol = 1e-6;
            Receiver rx(ch, fcfg, rcfg, frame.S.topRows(1));
            auto det = rx.run(frame.Y, &frame);
            for (int slot = 0; slot < 2; ++slot)
                alg_err += det.hard_x_idx[slot] != frame.tx_symbol_idx[slot];
            for (int slot = 0; slot < 2; ++slot)
                alg_err += det.hard_s_idx[slot] != frame.ris_symbol_idx[slot];
            slots += 4;
        }
        double ser_map = double(map_err) / slots, ser_alg = double(alg_err) / slots;
        if (ser_map > ser_alg) ok = false;
        detail += fmt(pw) + "dBm " + fmt(ser_map) + "/" + fmt(ser_alg) + " ";
    }
    report(3, "tiny-system exact-MAP at or below message passing", ok, detail);
}

// ------------------------------------------------------------ criterion 4 ----

void criterion_4() {
    auto cfg = desk_config();
    cfg.Q = 8;  // desk-scale ratios, lighter frames for the sweep
    const std::vector<double> powers = {33.0, 34.5, 36.0, 38.0, 40.0};
    const int seeds = 20;
    bool ok = true, strict = false;
    std::string detail;
    for (double pw : powers) {
        long jx = 0, js = 0, gx = 0, gs = 0, bits_x = 0, bits_s = 0;
        for (int s = 0; s < seeds; ++s) {
            auto joint = run_trial(cfg, pw, 2000 + s, ReceiverConfig::Genie::None,
                                   false, 30, 1e-5);
            auto kns = run_trial(cfg, pw, 2000 + s, ReceiverConfig::Genie::KnownS,
                                 false, 30, 1e-5);
            auto knx = run_trial(cfg, pw, 2000 + s, ReceiverConfig::Genie::KnownX,
                                 false, 30, 1e-5);
            jx += joint.x_bit_errors;
            js += joint.s_bit_errors;
            gx += kns.x_bit_errors;  // BER(X | S known)
            gs += knx.s_bit_errors;  // BER(S | X known)
            bits_x += joint.x_bits;
            bits_s += joint.s_bits;
        }
        if (gx > jx || gs > js) ok = false;
        if (gx < jx || gs < js) strict = true;
        detail += fmt(pw) + "dBm x " + std::to_string(gx) + "<=" + std::to_string(jx) +
                  " s " + std::to_string(gs) + "<=" + std::to_string(js) + "; ";
    }
    report(4, "genie bounds dominate joint detection (strict somewhere)", ok && strict,
           detail);
}

// ------------------------------------------------------------ criterion 5 ----

void criterion_5() {
    auto cfg = desk_config();
    const std::vector<double> powers = {28.0, 29.0, 30.0, 31.0, 32.0};
    const int trials = 3;
    bool found = false;
    std::string detail;
    for (double pw : powers) {
        long ce = 0, cb = 0, ue = 0, ub = 0;
        for (int t = 0; t < trials; ++t) {
            auto coded = run_trial(cfg, pw, 3000 + t, ReceiverConfig::Genie::None,
                                   true, 30, 1e-5);
            auto unc = run_trial(cfg, pw, 3000 + t, ReceiverConfig::Genie::None,
                                 false, 30, 1e-5);
            ce += coded.x_bit_errors;
            cb += coded.x_bits;
            ue += unc.x_bit_errors;
            ub += unc.x_bits;
        }
        double cber = double(ce) / cb, uber = double(ue) / ub;
        detail += fmt(pw) + "dBm c=" + fmt(cber) + " u=" + fmt(uber) + "; ";
        if (cber < 1e-3 && uber > 1e-2) found = true;
    }
    report(5, "coded waterfall opens while uncoded still fails", found, detail);
}

// ------------------------------------------------------------ criterion 6 ----

void criterion_6() {
    bool ok = true;
    std::string detail;
    for (auto c : {make_psk(2), make_psk(4)}) {
        for (double rho : {1.0, 4.0, 10.0}) {
            // I(rho) = int_0^rho psi dx by composite Simpson on a fine grid.
            const int n = 400;  // even
            double h = rho / n, acc = psi_x_un(0.0, c) + psi_x_un(rho, c);
            for (int i = 1; i < n; ++i)
                acc += (i % 2 ? 4.0 : 2.0) * psi_x_un(i * h, c);
            double integral = acc * h / 3.0;
            double mi = oracle::awgn_mi_quadrature(c, rho);
            double err = std::abs(integral - mi);
            if (err > 1e-2) ok = false;
            detail += (c.size() == 2 ? "bpsk" : "qpsk") + std::string("@") + fmt(rho) +
                      " err " + fmt(err) + "; ";
        }
    }
    report(6, "I-MMSE identity within 1e-2 nats", ok, detail);
}

// ------------------------------------------------------------ criterion 7 ----

void criterion_7() {
    SeConfig cfg;
    cfg.N = 8;
    cfg.M = 8;
    cfg.K = 2;
    cfg.N_P = 2;
    cfg.x_const = make_psk(2);
    cfg.s_phases = make_ris_phases(2);
    cfg.mc_samples = 200000;
    cfg.seed = 17;
    const double inf = std::numeric_limits<double>::infinity();
    bool ok = true;
    std::string detail;
    for (double tau_r : {0.2, 0.5, 1.0, 2.0, 5.0}) {
        double se = 0.0;
        double mc = se_vx(tau_r, inf, cfg, 21, &se);
        double exact = oracle::bpsk_tanh_integral(tau_r);
        double err = std::abs(mc - exact);
        if (err > 3.0 * se) ok = false;
        detail += "tau " + fmt(tau_r) + " err " + fmt(err) + " (3se " + fmt(3 * se) +
                  "); ";
    }
    report(7, "BPSK tanh-integral MMSE matches se_vx", ok, detail);
}

// ------------------------------------------------------------ criterion 8 ----

void criterion_8() {
    ExperimentConfig cfg;
    cfg.M = 256;
    cfg.K = 32;
    cfg.N_P = 20;
    cfg.T = 2;
    cfg.direct_link = true;
    cfg.seed = 1;
    bool ok = true;
    std::string detail;
    double prev_sum = -1.0;
    for (int n : {64, 128, 192, 256}) {
        cfg.N = n;
        RateConfig rc;
        rc.se = make_se_config(cfg, 30.0);
        rc.se.mc_samples = 20000;
        rc.path_points = 12;
        rc.grid_points = 100;
        rc.psi_s_mc = 20000;
        auto sum = sum_rate(rc, 4, 77);
        auto sep = separate_rate(rc);
        detail += "N=" + std::to_string(n) + " sum " + fmt(sum.sum) + " sep " +
                  fmt(sep.sum) + "; ";
        if (sum.sum + 1e-9 < prev_sum) ok = false;
        if (sep.sum > sum.sum + 1e-6) ok = false;
        prev_sum = sum.sum;
    }
    report(8, "sum rate nondecreasing in N, separate below sum", ok, detail);
}

// ------------------------------------------------------------ criterion 9 ----

// Normalized desk-twin recursion at a power where the uncoded detector
// stalls on its own, so convergence hinges on the decoder curves.
SeConfig desk_se_for_predicate() {
    auto cfg = desk_config();
    auto se = make_se_config(cfg, 26.0);
    se.mc_samples = 20000;
    se.seed = 5;
    return se;
}

void criterion_9() {
    // Detector surface along the straight path, then decoder curves placed
    // 5% below (converges) or above (stalls) the surface.
    RateConfig rc;
    rc.se = desk_se_for_predicate();
    auto path = straight_path(rc.tau_max, 16);
    DecoderCurves minus, plus;
    const double delta = 0.05;
    // Walk from (tau_max, tau_max) toward the origin so rho increases and tau
    // decreases along the curve as the knots are appended.
    for (const auto& [tx, ts] : path.pts) {
        if (tx <= 0.0) continue;  // the exact origin has no finite SNR demand
        auto e = eta(tx, ts, rc);
        if (e.rho_x <= 0.0 || e.rho_s <= 0.0) continue;
        auto push = [&](DecoderCurve& f, double rho, double tau) {
            if (!f.rho.empty() && (rho <= f.rho.back() || tau >= f.tau.back())) return;
            f.rho.push_back(rho);
            f.tau.push_back(tau);
        };
        push(minus.fx, (1.0 - delta) * e.rho_x, tx);
        push(minus.fs, (1.0 - delta) * e.rho_s, ts);
        push(plus.fx, (1.0 + delta) * e.rho_x, tx);
        push(plus.fs, (1.0 + delta) * e.rho_s, ts);
    }
    bool pred_minus = check_convergence(path, minus, rc);
    bool pred_plus = check_convergence(path, plus, rc);

    auto run_with = [&](const DecoderCurves& cv) {
        SeConfig se = rc.se;
        se.x_dec.kind = DecoderModel::Kind::Curve;
        se.x_dec.curve = &cv.fx;
        se.s_dec.kind = DecoderModel::Kind::Curve;
        se.s_dec.curve = &cv.fs;
        se.max_iters = 200;
        return run_se(se);
    };
    auto rm = run_with(minus);
    auto rp = run_with(plus);
    bool ok = pred_minus && rm.v_x < 1e-3 && rm.v_s < 1e-3 && !pred_plus &&
              rp.v_x > 0.1;
    report(9, "matching-condition predicate mirrors SE convergence", ok,
           "minus: pred=" + std::to_string(pred_minus) + " v_x " + fmt(rm.v_x) +
               " v_s " + fmt(rm.v_s) + "; plus: pred=" + std::to_string(pred_plus) +
               " v_x " + fmt(rp.v_x));
}

// ----------------------------------------------------------- criterion 10 ----

void criterion_10() {
    // Determinism of the whole pipeline: every preset, shrunk to run in
    // seconds (trials/iters/MC sizes only; dimensions untouched), rerun with
    // the same seed must produce byte-identical CSVs.
    bool ok = true;
    std::string detail;
    auto tmp = fs::temp_directory_path() / "sapit-acc10";
    fs::remove_all(tmp);
    for (const auto& name : list_presets()) {
        std::vector<std::string> errors;
        auto cfg = parse_config_text(preset_text(name), errors);
        if (!errors.empty()) {
            ok = false;
            detail += name + ": parse error; ";
            continue;
        }
        cfg.trials = 2;
        cfg.iters = 3;
        cfg.se_samples = 2000;
        cfg.rate_paths = 2;
        cfg.rate_path_points = 6;
        cfg.rate_mc = 2000;
        cfg.Q = std::min(cfg.Q, 8);
        if (cfg.power_dbm.size() > 2) cfg.power_dbm.resize(2);
        if (cfg.sweep_n.size() > 2) cfg.sweep_n.resize(2);

        std::string runs[2];
        for (int r = 0; r < 2; ++r) {
            auto dir = tmp / (name + "-" + std::to_string(r));
            cfg.out = dir.string();
            int rc = run_experiment(cfg);
            if (rc != 0 && rc != 3) {
                ok = false;
                detail += name + ": exit " + std::to_string(rc) + "; ";
            }
            std::ostringstream all;
            std::vector<fs::path> files;
            for (auto& e : fs::directory_iterator(dir))
                if (e.path().extension() == ".csv") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (auto& f : files) {
                std::ifstream in(f, std::ios::binary);
                all << f.filename().string() << "\n" << in.rdbuf();
            }
            runs[r] = all.str();
        }
        if (runs[0].empty() || runs[0] != runs[1]) {
            ok = false;
            detail += name + ": csv mismatch; ";
        }
    }
    fs::remove_all(tmp);
    report(10, "presets rerun byte-identical", ok, detail.empty() ? "12 presets" : detail);
}

// ----------------------------------------------------------- criterion 11 ----

// One receiver instance pinned to a problem size, timed one full run at a
// time so repetitions of different sizes can be interleaved.
class IterationTimer {
public:
    IterationTimer(int N, int M, int K, int Q, int T) {
        fcfg_.dims = {N, M, K};
        fcfg_.N_P = std::max(2, N / 16);
        fcfg_.Q = Q;
        fcfg_.T = T;
        fcfg_.tx_const = make_psk(4);
        fcfg_.ris_phases = make_ris_phases(2);
        fcfg_.tx_power_dbm = 30.0;
        fcfg_.noise_var = 1e-12;
        fcfg_.coded = false;
        RngStream crng(4242, 1);
        ch_ = gen_channels(fcfg_.dims, Geometry{}, PathLossParams{}, crng);
        RngStream frng(4242, 2);
        frame_ = random_frame(fcfg_, ch_, Interleaver::identity(0),
                              Interleaver::identity(0), frng);
        rcfg_.mode = ReceiverConfig::Mode::Uncoded;
        rcfg_.max_iters = 6;
        rcfg_.stop_tol = 0.0;
        rx_ = std::make_unique<Receiver>(ch_, fcfg_, rcfg_,
                                         CMat(frame_.S.topRows(fcfg_.N_P)));
    }
    double time_once() {
        auto t0 = std::chrono::steady_clock::now();
        auto det = rx_->run(frame_.Y);
        auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(t1 - t0).count() / det.iterations;
    }

private:
    FrameConfig fcfg_;
    ChannelSet ch_;
    FrameData frame_;
    ReceiverConfig rcfg_;
    std::unique_ptr<Receiver> rx_;
};

void criterion_11() {
    // Single-thread timing keeps the scaling measurement free of scheduling
    // noise; the base is large enough that the matrix products dominate.
    // Repetitions of the six sizes are interleaved and the per-size minimum is
    // kept, so a transient load burst cannot bias one size's estimate.
    int saved_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    const int N = 512, M = 512, K = 512, Q = 8, T = 2;
    struct V {
        const char* name;
        IterationTimer timer;
        double t = 1e300;
    } vs[] = {
        {"base", IterationTimer(N, M, K, Q, T)},
        {"2N", IterationTimer(2 * N, M, K, Q, T)},
        {"2M", IterationTimer(N, 2 * M, K, Q, T)},
        {"2K", IterationTimer(N, M, 2 * K, Q, T)},
        {"2Q", IterationTimer(N, M, K, 2 * Q, T)},
        {"2T", IterationTimer(N, M, K, Q, 2 * T)},
    };
    for (int round = 0; round < 10; ++round)
        for (auto& v : vs) v.t = std::min(v.t, v.timer.time_once());
    double base = vs[0].t;
    bool ok = true;
    std::string detail = "base " + fmt(base * 1e3) + "ms; ";
    for (std::size_t i = 1; i < std::size(vs); ++i) {
        double r = vs[i].t / base;
        if (r < 1.6 || r > 2.6) ok = false;
        detail += std::string(vs[i].name) + " x" + fmt(r) + "; ";
    }
    omp_set_num_threads(saved_threads);
    report(11, "per-iteration cost scales linearly in each dimension", ok, detail);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 11 criteria passed\n");
    return 0;
}
