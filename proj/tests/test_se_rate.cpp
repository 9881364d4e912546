#include <doctest.h>

#include <cmath>

#include "sapit/oracle.hpp"
#include "sapit/rate_analysis.hpp"
#include "sapit/state_evolution.hpp"

using namespace sapit;

namespace {

SeConfig base_cfg() {
    SeConfig cfg;
    cfg.N = 64;
    cfg.M = 64;
    cfg.K = 16;
    cfg.N_P = 8;
    cfg.T = 2;
    cfg.zeta = 0.5;
    cfg.sigma2 = 0.01;
    cfg.x_const = make_psk(4);
    cfg.s_phases = make_ris_phases(2);
    cfg.mc_samples = 20000;
    cfg.seed = 99;
    return cfg;
}

}  // namespace

TEST_CASE("module A variances follow the closed form") {
    auto cfg = base_cfg();
    double tau_d = 0.0, tau_r = 0.0;
    se_moduleA(0.3, 0.7, cfg, &tau_d, &tau_r);
    double expect = (64.0 / 64.0) * 0.3 + (16.0 / 64.0) * 0.7 + cfg.sigma2;
    CHECK(tau_d == doctest::Approx(expect).epsilon(1e-12));
    CHECK(tau_r == doctest::Approx(expect).epsilon(1e-12));

    cfg.direct_link = false;
    se_moduleA(0.3, 0.7, cfg, &tau_d, &tau_r);
    CHECK(tau_d == doctest::Approx((64.0 / 64.0) * 0.3 + cfg.sigma2).epsilon(1e-12));
    CHECK(std::isinf(tau_r));
}

TEST_CASE("module B variances and denominator clamp") {
    auto cfg = base_cfg();
    double tau_p = 0.0, tau_o = 0.0;
    bool clamped = false;
    se_moduleB(0.8, 0.05, cfg, &tau_p, &tau_o, &clamped);
    double tp = cfg.zeta * (16.0 / 64.0) * 0.8;
    CHECK(tau_p == doctest::Approx(tp).epsilon(1e-12));
    CHECK(tau_o == doctest::Approx(tp * tp / (cfg.zeta * (tp - 0.05))).epsilon(1e-12));
    CHECK(!clamped);

    // v_c >= tau_p triggers the clamp and flags it.
    se_moduleB(0.8, tp * 2.0, cfg, &tau_p, &tau_o, &clamped);
    CHECK(clamped);
    CHECK(std::isfinite(tau_o));
    CHECK(tau_o > 0.0);
}

TEST_CASE("se_vx endpoints and determinism") {
    auto cfg = base_cfg();
    double inf = std::numeric_limits<double>::infinity();
    // No observations: variance of the unit-power prior.
    CHECK(se_vx(inf, inf, cfg, 1) == doctest::Approx(1.0).epsilon(1e-10));
    // Perfect observation: zero.
    CHECK(se_vx(1e-8, inf, cfg, 1) < 1e-6);
    // Bit-exact reproducibility for identical seed and salt.
    double a = se_vx(0.5, 2.0, cfg, 3);
    double b = se_vx(0.5, 2.0, cfg, 3);
    CHECK(a == b);
}

TEST_CASE("se_vx matches the scalar MMSE quadrature oracle") {
    auto cfg = base_cfg();
    cfg.mc_samples = 200000;
    double inf = std::numeric_limits<double>::infinity();
    for (double rho : {0.5, 2.0, 8.0}) {
        double se = 0.0;
        double v = se_vx(1.0 / rho, inf, cfg, 11, &se);
        double oracle_v = oracle::scalar_mmse_quadrature(cfg.x_const, rho);
        CHECK(std::abs(v - oracle_v) < std::max(4.0 * se, 2e-3));
    }
}

TEST_CASE("se_vucs: all-pilot frame reduces to the analytic Gaussian case") {
    auto cfg = base_cfg();
    cfg.N_P = cfg.N;  // every row is a pilot
    double tau_d = 0.35, tau_p = 0.12;
    double v_u = 0.0, v_c = 0.0, v_s = 0.0;
    se_vucs(tau_d, tau_p, cfg, 5, &v_u, &v_c, &v_s);
    double expect = tau_p * tau_d / (tau_p + tau_d);
    CHECK(v_u == doctest::Approx(expect).epsilon(1e-10));
    CHECK(v_c == doctest::Approx(expect).epsilon(1e-10));
    CHECK(v_s == 0.0);
}

TEST_CASE("se_vucs data term lies between the genie and the uninformed case") {
    auto cfg = base_cfg();
    cfg.N_P = 0;
    double tau_d = 0.3, tau_p = 0.1;
    double v_u = 0.0, v_c = 0.0, v_s = 0.0;
    se_vucs(tau_d, tau_p, cfg, 6, &v_u, &v_c, &v_s);
    double genie = tau_p * tau_d / (tau_p + tau_d);
    double chi = cfg.zeta * cfg.K / double(cfg.N);  // prior variance of c
    CHECK(v_c >= genie * 0.99);
    CHECK(v_c <= chi);
    CHECK(v_u >= genie * 0.99);
    CHECK(v_s > 0.0);
    CHECK(v_s <= 1.0);
}

TEST_CASE("run_se converges at low noise and reports a sane trace") {
    auto cfg = base_cfg();
    cfg.sigma2 = 1e-4;
    auto res = run_se(cfg);
    CHECK(res.iterations >= 2);
    CHECK(res.v_x < 0.05);
    CHECK(res.v_x >= 0.0);
    CHECK(res.trace.front().v_x <= 1.0 + 1e-9);
    // Initial variances: v_u = v_c = zeta K / N.
    CHECK(res.rho_x > 0.0);
}

TEST_CASE("run_se with genie decoders collapses the data variances") {
    auto cfg = base_cfg();
    cfg.sigma2 = 1e-4;
    cfg.x_dec.kind = DecoderModel::Kind::Genie;
    cfg.s_dec.kind = DecoderModel::Kind::Genie;
    auto res = run_se(cfg);
    CHECK(res.v_x < 1e-6);
    CHECK(res.v_s < 1e-6);
}

TEST_CASE("decoder curve interpolation clamps and is monotone") {
    DecoderCurve f;
    f.rho = {0.1, 1.0, 10.0};
    f.tau = {100.0, 1.0, 0.01};
    CHECK(f.tau_at(0.01) == doctest::Approx(100.0));
    CHECK(f.tau_at(100.0) == doctest::Approx(0.01));
    CHECK(f.tau_at(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    // Log-log interpolation midpoint: rho = sqrt(0.1*1.0) -> tau = sqrt(100*1).
    CHECK(f.tau_at(std::sqrt(0.1)) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(f.rho_at(10.0) == doctest::Approx(std::sqrt(0.1)).epsilon(1e-9));
    CHECK(f.rho_at(1.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("psi_x_un: unit value at rho=0, decreasing, matches the oracle") {
    auto qpsk = make_psk(4);
    CHECK(psi_x_un(0.0, qpsk) == doctest::Approx(1.0).epsilon(1e-9));
    double prev = 1.0;
    for (double rho : {0.3, 1.0, 3.0, 10.0}) {
        double v = psi_x_un(rho, qpsk);
        CHECK(v < prev);
        CHECK(v >= 0.0);
        prev = v;
        CHECK(std::abs(v - oracle::scalar_mmse_quadrature(qpsk, rho)) < 1e-5);
    }
}

TEST_CASE("awgn mutual information endpoints") {
    auto bpsk = make_psk(2);
    CHECK(awgn_mutual_information(bpsk, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
    // Saturates at log(2) nats for a binary alphabet.
    CHECK(awgn_mutual_information(bpsk, 100.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-3));
    CHECK(awgn_mutual_information(bpsk, 1.0) <
          awgn_mutual_information(bpsk, 4.0));
    // Grid-quadrature oracle cross check.
    CHECK(std::abs(awgn_mutual_information(bpsk, 2.0) -
                   oracle::awgn_mi_quadrature(bpsk, 2.0)) < 1e-5);
}

TEST_CASE("psi_s_un: equals T at rho=0 and vanishes at high snr") {
    auto phases = make_ris_phases(2);
    double se = 0.0;
    double v0 = psi_s_un(0.0, phases, 2, 20000, 123, &se);
    CHECK(v0 == doctest::Approx(2.0).epsilon(0.05));
    double vhi = psi_s_un(1000.0, phases, 2, 20000, 123);
    CHECK(vhi < 0.02);
    CHECK(psi_s_un(1.0, phases, 2, 20000, 7) == psi_s_un(1.0, phases, 2, 20000, 7));
}

TEST_CASE("monotonic paths have ordered knots and exact endpoints") {
    auto sp = straight_path(1e6, 16);
    CHECK(sp.monotone());
    CHECK(sp.pts.front().first == doctest::Approx(1e6));
    CHECK(sp.pts.back().first == 0.0);
    CHECK(sp.pts.back().second == 0.0);

    RngStream rng(4, 0);
    for (int i = 0; i < 5; ++i) {
        auto rp = random_staircase_path(1e6, 16, rng);
        CHECK(rp.monotone());
        CHECK(rp.pts.front().first == doctest::Approx(1e6));
        CHECK(rp.pts.front().second == doctest::Approx(1e6));
        CHECK(rp.pts.back().first == 0.0);
        CHECK(rp.pts.back().second == 0.0);
    }
}

TEST_CASE("eta improves when the decoders provide information") {
    RateConfig rc;
    rc.se = base_cfg();
    rc.se.sigma2 = 0.05;
    rc.se.mc_samples = 20000;
    auto weak = eta(rc.tau_max, rc.tau_max, rc);
    auto strong = eta(1e-3, 1e-3, rc);
    CHECK(strong.rho_x >= weak.rho_x);
    CHECK(strong.rho_s >= weak.rho_s);
    CHECK(strong.rho_x > 0.0);
}
