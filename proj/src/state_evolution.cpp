#include "sapit/state_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sapit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUniformTauCap = 1e12;  // Gaussian model beyond this = uniform

double interp_loglog(const std::vector<double>& xs, const std::vector<double>& ys,
                     double x, bool xs_ascending) {
    // Piecewise linear in log-log where possible; clamped at the ends.
    const int n = static_cast<int>(xs.size());
    if (n == 0) throw std::invalid_argument("decoder curve: empty table");
    if (n == 1) return ys[0];
    auto at = [&](int i) { return xs_ascending ? i : n - 1 - i; };
    if (x <= xs[at(0)]) return ys[at(0)];
    if (x >= xs[at(n - 1)]) return ys[at(n - 1)];
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        int mid = (lo + hi) / 2;
        if (xs[at(mid)] <= x) lo = mid; else hi = mid;
    }
    double x0 = xs[at(lo)], x1 = xs[at(hi)];
    double y0 = ys[at(lo)], y1 = ys[at(hi)];
    double t;
    if (x0 > 0.0 && x1 > 0.0)
        t = (std::log(x) - std::log(x0)) / (std::log(x1) - std::log(x0));
    else
        t = (x - x0) / (x1 - x0);
    if (y0 > 0.0 && y1 > 0.0)
        return std::exp((1.0 - t) * std::log(y0) + t * std::log(y1));
    return (1.0 - t) * y0 + t * y1;
}

std::uint64_t mix_stream(std::uint64_t salt, std::uint64_t i) {
    std::uint64_t z = salt * 0x9E3779B97F4A7C15ull + i + 1;
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27; z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

struct SamplesX {
    std::vector<int> truth;
    std::vector<cxd> r, o;
    std::vector<double> prior;  // n x |X| row-major
};

struct SamplesS {
    std::vector<int> truth;          // per element
    std::vector<cxd> p, d;           // n x T row-major
    std::vector<double> alpha;       // n x |S| row-major
};

// Map payload bits (MSB first per symbol) to constellation indices.
std::vector<int> bits_to_indices(const std::vector<std::uint8_t>& bits,
                                 const Constellation& c) {
    int bps = c.bits_per_symbol;
    int n = static_cast<int>(bits.size()) / bps;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) {
        std::uint32_t label = 0;
        for (int b = 0; b < bps; ++b) label = (label << 1) | bits[i * bps + b];
        idx[i] = c.index_of_label(label);
    }
    return idx;
}

SamplesX gather_samples_x(const DecoderModel& model, double tau_r, double tau_o,
                          const SeConfig& cfg, std::uint64_t salt) {
    const auto& pts = cfg.x_const.points;
    const int ord = cfg.x_const.size();
    const int n = cfg.mc_samples;
    SamplesX s;
    s.truth.resize(n);
    s.r.resize(n);
    s.o.resize(n);
    s.prior.resize(static_cast<std::size_t>(n) * ord);

    if (model.kind != DecoderModel::Kind::Empirical) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            RngStream rng(cfg.seed, mix_stream(salt, i));
            int t = static_cast<int>(rng.uniform_int(ord));
            s.truth[i] = t;
            s.r[i] = rng.cgaussian(pts[t], std::isfinite(tau_r) ? tau_r : 0.0);
            if (!std::isfinite(tau_r)) s.r[i] = cxd(0.0, 0.0);
            s.o[i] = rng.cgaussian(pts[t], std::isfinite(tau_o) ? tau_o : 0.0);
            if (!std::isfinite(tau_o)) s.o[i] = cxd(0.0, 0.0);
            sample_decoder_prior(model, pts, t, rng,
                                 s.prior.data() + static_cast<std::size_t>(i) * ord);
        }
        return s;
    }

    // Empirical: synthesize coded frames through the scalar channel and run
    // the actual decoder; extrinsics become the priors.
    const int bps = cfg.x_const.bits_per_symbol;
    const int frame_syms = std::max(512, (model.code.memory() + 1 + bps) / bps);
    int done = 0, frame_no = 0;
    while (done < n) {
        int m = std::min(frame_syms, n - done);
        // round coded bits to full symbols
        int coded_bits = m * bps;
        int info_bits = model.code.info_length(coded_bits);
        if (info_bits < 1) { m = n - done; coded_bits = m * bps; info_bits = std::max(1, model.code.info_length(coded_bits)); }
        coded_bits = model.code.coded_length(info_bits);
        m = coded_bits / bps;
        if (coded_bits % bps) {  // pad by growing info bits until divisible
            while (model.code.coded_length(info_bits) % bps) ++info_bits;
            coded_bits = model.code.coded_length(info_bits);
            m = coded_bits / bps;
        }
        RngStream frng(cfg.seed, mix_stream(salt ^ 0xE3u, frame_no));
        std::vector<std::uint8_t> info(info_bits);
        for (auto& b : info) b = static_cast<std::uint8_t>(frng.uniform_int(2));
        Interleaver pi = Interleaver::random(coded_bits,
                                             model.interleaver_seed + frame_no);
        auto coded = pi.apply_bits(conv_encode(info, model.code));
        auto idx = bits_to_indices(coded, cfg.x_const);

        SymbolPriorTable ev;
        ev.order = ord;
        ev.p.resize(static_cast<std::size_t>(m) * ord);
        std::vector<double> uni(ord, 1.0 / ord);
        std::vector<cxd> rr(m), oo(m);
        for (int i = 0; i < m; ++i) {
            RngStream rng(cfg.seed, mix_stream(salt ^ 0xF7u, static_cast<std::uint64_t>(frame_no) * frame_syms + i));
            rr[i] = std::isfinite(tau_r) ? rng.cgaussian(pts[idx[i]], tau_r) : cxd(0, 0);
            oo[i] = std::isfinite(tau_o) ? rng.cgaussian(pts[idx[i]], tau_o) : cxd(0, 0);
            posterior_x(rr[i], tau_r, oo[i], tau_o, uni, pts, ev.row(i));
        }
        BcjrResult res = bcjr_extrinsic(symbols_to_bit_llrs(ev, cfg.x_const),
                                        model.code, pi);
        SymbolPriorTable pri = bit_llrs_to_symbol_priors(res.extrinsic, cfg.x_const);
        int take = std::min(m, n - done);
        for (int i = 0; i < take; ++i) {
            s.truth[done + i] = idx[i];
            s.r[done + i] = rr[i];
            s.o[done + i] = oo[i];
            std::copy(pri.row(i), pri.row(i) + ord,
                      s.prior.data() + static_cast<std::size_t>(done + i) * ord);
        }
        done += take;
        ++frame_no;
    }
    return s;
}

SamplesS gather_samples_s(const DecoderModel& model, double tau_d, double tau_p,
                          const SeConfig& cfg, std::uint64_t salt) {
    const auto& pts = cfg.s_phases.points();
    const int ord = cfg.s_phases.size();
    const int T = cfg.T;
    const int n = cfg.mc_samples;
    const double chi = cfg.zeta * cfg.K / cfg.N;
    const double pvar = std::max(chi - tau_p, 0.0);
    SamplesS s;
    s.truth.resize(n);
    s.p.resize(static_cast<std::size_t>(n) * T);
    s.d.resize(static_cast<std::size_t>(n) * T);
    s.alpha.resize(static_cast<std::size_t>(n) * ord);

    auto draw_obs = [&](RngStream& rng, int truth, int i) {
        for (int t = 0; t < T; ++t) {
            cxd p = rng.cgaussian(cxd(0, 0), pvar);
            cxd c = rng.cgaussian(p, tau_p);
            s.p[static_cast<std::size_t>(i) * T + t] = p;
            s.d[static_cast<std::size_t>(i) * T + t] =
                rng.cgaussian(pts[truth] * c, tau_d);
        }
    };

    if (model.kind != DecoderModel::Kind::Empirical) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            RngStream rng(cfg.seed, mix_stream(salt ^ 0x51u, i));
            int t = static_cast<int>(rng.uniform_int(ord));
            s.truth[i] = t;
            draw_obs(rng, t, i);
            sample_decoder_prior(model, pts, t, rng,
                                 s.alpha.data() + static_cast<std::size_t>(i) * ord);
        }
        return s;
    }

    const int bps = cfg.s_phases.constellation.bits_per_symbol;
    const int frame_syms = 512;
    int done = 0, frame_no = 0;
    while (done < n) {
        int info_bits = std::max(1, model.code.info_length(frame_syms * bps));
        while (model.code.coded_length(info_bits) % bps) ++info_bits;
        int coded_bits = model.code.coded_length(info_bits);
        int m = coded_bits / bps;
        RngStream frng(cfg.seed, mix_stream(salt ^ 0xB3u, frame_no));
        std::vector<std::uint8_t> info(info_bits);
        for (auto& b : info) b = static_cast<std::uint8_t>(frng.uniform_int(2));
        Interleaver pi = Interleaver::random(coded_bits,
                                             model.interleaver_seed + 77 + frame_no);
        auto coded = pi.apply_bits(conv_encode(info, model.code));
        auto idx = bits_to_indices(coded, cfg.s_phases.constellation);

        SymbolPriorTable ev;
        ev.order = ord;
        ev.p.resize(static_cast<std::size_t>(m) * ord);
        std::vector<double> uni(ord, 1.0 / ord);
        std::vector<cxd> pp(static_cast<std::size_t>(m) * T),
            dd(static_cast<std::size_t>(m) * T);
        for (int i = 0; i < m; ++i) {
            RngStream rng(cfg.seed, mix_stream(salt ^ 0xC9u, static_cast<std::uint64_t>(frame_no) * frame_syms + i));
            for (int t = 0; t < T; ++t) {
                cxd p = rng.cgaussian(cxd(0, 0), pvar);
                cxd c = rng.cgaussian(p, tau_p);
                pp[static_cast<std::size_t>(i) * T + t] = p;
                dd[static_cast<std::size_t>(i) * T + t] =
                    rng.cgaussian(pts[idx[i]] * c, tau_d);
            }
            posterior_s(std::span<const cxd>(dd.data() + static_cast<std::size_t>(i) * T, T),
                        std::span<const cxd>(pp.data() + static_cast<std::size_t>(i) * T, T),
                        tau_d, tau_p, uni, pts, ev.row(i));
        }
        BcjrResult res = bcjr_extrinsic(
            symbols_to_bit_llrs(ev, cfg.s_phases.constellation), model.code, pi);
        SymbolPriorTable pri =
            bit_llrs_to_symbol_priors(res.extrinsic, cfg.s_phases.constellation);
        int take = std::min(m, n - done);
        for (int i = 0; i < take; ++i) {
            s.truth[done + i] = idx[i];
            for (int t = 0; t < T; ++t) {
                s.p[static_cast<std::size_t>(done + i) * T + t] =
                    pp[static_cast<std::size_t>(i) * T + t];
                s.d[static_cast<std::size_t>(done + i) * T + t] =
                    dd[static_cast<std::size_t>(i) * T + t];
            }
            std::copy(pri.row(i), pri.row(i) + ord,
                      s.alpha.data() + static_cast<std::size_t>(done + i) * ord);
        }
        done += take;
        ++frame_no;
    }
    return s;
}

DecoderModel resolve_curve(const DecoderModel& m, double rho) {
    if (m.kind != DecoderModel::Kind::Curve) return m;
    DecoderModel g;
    g.kind = DecoderModel::Kind::Gaussian;
    g.tau = m.curve->tau_at(rho);
    return g;
}

}  // namespace

double DecoderCurve::tau_at(double r) const { return interp_loglog(rho, tau, r, true); }
double DecoderCurve::rho_at(double t) const { return interp_loglog(tau, rho, t, false); }

void sample_decoder_prior(const DecoderModel& m, std::span<const cxd> points,
                          int truth_idx, RngStream& rng, double* prior) {
    const int ord = static_cast<int>(points.size());
    switch (m.kind) {
        case DecoderModel::Kind::None:
            for (int i = 0; i < ord; ++i) prior[i] = 1.0 / ord;
            return;
        case DecoderModel::Kind::Genie:
            for (int i = 0; i < ord; ++i) prior[i] = (i == truth_idx) ? 1.0 : 0.0;
            return;
        case DecoderModel::Kind::Gaussian: {
            if (!(m.tau >= 0.0))
                throw std::invalid_argument("decoder model: tau must be >= 0");
            if (!std::isfinite(m.tau) || m.tau > kUniformTauCap) {
                for (int i = 0; i < ord; ++i) prior[i] = 1.0 / ord;
                return;
            }
            if (m.tau == 0.0) {
                for (int i = 0; i < ord; ++i) prior[i] = (i == truth_idx) ? 1.0 : 0.0;
                return;
            }
            cxd obs = rng.cgaussian(points[truth_idx], m.tau);
            double mx = -kInf;
            std::vector<double> lp(ord);
            for (int i = 0; i < ord; ++i) {
                lp[i] = -std::norm(obs - points[i]) / m.tau;
                mx = std::max(mx, lp[i]);
            }
            double sum = 0.0;
            for (int i = 0; i < ord; ++i) sum += (prior[i] = std::exp(lp[i] - mx));
            for (int i = 0; i < ord; ++i) prior[i] /= sum;
            return;
        }
        default:
            throw std::invalid_argument(
                "decoder model: curve/empirical must be resolved by the caller");
    }
}

void se_moduleA(double v_u, double v_x, const SeConfig& cfg, double* tau_d,
                double* tau_r) {
    if (v_u < 0.0 || v_x < 0.0)
        throw std::invalid_argument("se_moduleA: negative variance");
    double nm = static_cast<double>(cfg.N) / cfg.M;
    double km = static_cast<double>(cfg.K) / cfg.M;
    if (cfg.direct_link) {
        *tau_d = nm * v_u + km * v_x + cfg.sigma2;
        *tau_r = *tau_d;
    } else {
        *tau_d = nm * v_u + cfg.sigma2;
        *tau_r = kInf;
    }
}

void se_moduleB(double v_x, double v_c, const SeConfig& cfg, double* tau_p,
                double* tau_o, bool* clamped) {
    double chi_rate = cfg.zeta * cfg.K / static_cast<double>(cfg.N);
    double tp = chi_rate * v_x;
    double floor = cfg.var_floor_rel * std::max(tp, chi_rate);
    tp = std::max(tp, floor);
    double denom = tp - v_c;
    bool cl = false;
    if (denom <= floor) {
        denom = floor;
        cl = true;
    }
    *tau_p = tp;
    *tau_o = tp * tp / (cfg.zeta * denom);
    if (clamped) *clamped = cl;
}

double se_vx(double tau_r, double tau_o, const SeConfig& cfg,
             std::uint64_t stream_salt, double* stderr_out) {
    DecoderModel model = resolve_curve(cfg.x_dec,
        (std::isfinite(tau_r) ? 1.0 / tau_r : 0.0) + (std::isfinite(tau_o) ? 1.0 / tau_o : 0.0));
    SamplesX s = gather_samples_x(model, tau_r, tau_o, cfg, stream_salt);
    const int n = cfg.mc_samples;
    const int ord = cfg.x_const.size();
    std::vector<double> vars(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        Moments m = posterior_x(
            s.r[i], tau_r, s.o[i], tau_o,
            std::span<const double>(s.prior.data() + static_cast<std::size_t>(i) * ord,
                                    ord),
            cfg.x_const.points);
        vars[i] = m.var;
    }
    double mean = 0.0;
    for (double v : vars) mean += v;
    mean /= n;
    if (stderr_out) {
        double ss = 0.0;
        for (double v : vars) ss += (v - mean) * (v - mean);
        *stderr_out = std::sqrt(ss / (static_cast<double>(n) - 1.0) / n);
    }
    return mean;
}

void se_vucs(double tau_d, double tau_p, const SeConfig& cfg,
             std::uint64_t stream_salt, double* v_u, double* v_c, double* v_s,
             double* vs_stderr) {
    const double rho_s =
        (cfg.zeta * cfg.K / cfg.N - tau_p) / std::max(tau_p + tau_d, 1e-300);
    DecoderModel model = resolve_curve(cfg.s_dec, std::max(rho_s, 0.0));
    SamplesS s = gather_samples_s(model, tau_d, tau_p, cfg, stream_salt);
    const double wp = static_cast<double>(cfg.N_P) / cfg.N;
    const double pilot_var = tau_p * tau_d / (tau_p + tau_d);
    if (cfg.N_P == cfg.N) {  // all pilots: no data term, v_s undefined
        *v_u = *v_c = pilot_var;
        *v_s = 0.0;
        if (vs_stderr) *vs_stderr = 0.0;
        return;
    }
    const int n = cfg.mc_samples;
    const int ord = cfg.s_phases.size();
    const int T = cfg.T;
    const auto& pts = cfg.s_phases.points();
    std::vector<double> vu(n), vc(n), vs(n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        std::span<const cxd> dv(s.d.data() + static_cast<std::size_t>(i) * T, T);
        std::span<const cxd> pv(s.p.data() + static_cast<std::size_t>(i) * T, T);
        std::span<const double> alpha(
            s.alpha.data() + static_cast<std::size_t>(i) * ord, ord);
        std::vector<double> pi_rows(static_cast<std::size_t>(T) * ord);
        compute_pi(dv, pv, tau_d, tau_p, alpha, pts, pi_rows.data());
        double su = 0.0, sc = 0.0;
        for (int t = 0; t < T; ++t) {
            Moments mu, mc;
            posterior_uc(dv[t], tau_d, pv[t], tau_p,
                         std::span<const double>(pi_rows.data() + static_cast<std::size_t>(t) * ord, ord),
                         pts, mu, mc);
            su += mu.var;
            sc += mc.var;
        }
        vu[i] = su / T;
        vc[i] = sc / T;
        vs[i] = posterior_s(dv, pv, tau_d, tau_p, alpha, pts).var;
    }
    double mu = 0.0, mc = 0.0, ms = 0.0;
    for (int i = 0; i < n; ++i) {
        mu += vu[i];
        mc += vc[i];
        ms += vs[i];
    }
    mu /= n; mc /= n; ms /= n;
    *v_u = wp * pilot_var + (1.0 - wp) * mu;
    *v_c = wp * pilot_var + (1.0 - wp) * mc;
    *v_s = ms;
    if (vs_stderr) {
        double ss = 0.0;
        for (int i = 0; i < n; ++i) ss += (vs[i] - ms) * (vs[i] - ms);
        *vs_stderr = std::sqrt(ss / (static_cast<double>(n) - 1.0) / n);
    }
}

SeResult run_se(const SeConfig& cfg) {
    if (cfg.N <= 0 || cfg.M <= 0 || cfg.K <= 0 || cfg.T <= 0)
        throw std::invalid_argument("run_se: dimensions must be positive");
    if (cfg.N_P < 0 || cfg.N_P > cfg.N)
        throw std::invalid_argument("run_se: need 0 <= N_P <= N");

    SeResult out;
    double chi = cfg.zeta * cfg.K / cfg.N;
    double v_x = 1.0, v_s = 1.0, v_u = chi, v_c = chi;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        SeState st;
        se_moduleA(v_u, v_x, cfg, &st.tau_d, &st.tau_r);
        double tau_p = std::max(chi * v_x, cfg.var_floor_rel * chi);
        double vs_err = 0.0;
        se_vucs(st.tau_d, tau_p, cfg, static_cast<std::uint64_t>(it), &v_u, &v_c,
                &v_s, &vs_err);
        bool clamped = false;
        se_moduleB(v_x, v_c, cfg, &st.tau_p, &st.tau_o, &clamped);
        if (clamped) out.clamp_flag = true;
        double vx_err = 0.0;
        v_x = se_vx(st.tau_r, st.tau_o, cfg, static_cast<std::uint64_t>(it) + 1000,
                    &vx_err);
        st.v_x = v_x; st.v_u = v_u; st.v_c = v_c; st.v_s = v_s;
        st.se_x_stderr = vx_err; st.se_s_stderr = vs_err;
        out.trace.push_back(st);
        out.iterations = it;
        if (it > 1) {
            const SeState& pr = out.trace[it - 2];
            double num = std::max({std::abs(st.v_x - pr.v_x), std::abs(st.v_s - pr.v_s),
                                   std::abs(st.v_u - pr.v_u), std::abs(st.v_c - pr.v_c)});
            double den = std::max({st.v_x, st.v_s, st.v_u, st.v_c, 1e-300});
            if (num / den < cfg.stop_tol) {
                out.converged = true;
                break;
            }
        }
    }
    const SeState& last = out.trace.back();
    out.v_x = last.v_x;
    out.v_s = last.v_s;
    out.rho_x = (std::isfinite(last.tau_r) ? 1.0 / last.tau_r : 0.0) +
                (last.tau_o > 0.0 ? 1.0 / last.tau_o : 0.0);
    out.rho_s = std::max(chi - last.tau_p, 0.0) / (last.tau_p + last.tau_d);
    return out;
}

SeResult blocked_direct_se(SeConfig cfg) {
    cfg.direct_link = false;
    return run_se(cfg);
}

}  // namespace sapit
