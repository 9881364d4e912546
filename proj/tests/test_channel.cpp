#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "sapit/channel.hpp"

using namespace sapit;

TEST_CASE("geometry distances") {
    Geometry geo;
    CHECK(distance(geo.tx, geo.rx) == doctest::Approx(std::sqrt(500.0 * 500.0 + 100.0)));
    // Tx-RIS: dx=10, dy=490, dz=10 -> sqrt(100 + 240100 + 100)
    CHECK(distance(geo.tx, geo.ris) == doctest::Approx(std::sqrt(240300.0)));
    // RIS-Rx: dx=10, dy=10, dz=0
    CHECK(distance(geo.ris, geo.rx) == doctest::Approx(std::sqrt(200.0)));
}

TEST_CASE("path loss model") {
    PathLossParams pl;
    CHECK(path_loss(1.0, pl, LinkKind::Ris) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(path_loss(1.0, pl, LinkKind::Direct) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(path_loss(10.0, pl, LinkKind::Ris) ==
          doctest::Approx(1e-3 * std::pow(10.0, -2.2)).epsilon(1e-12));
    CHECK(path_loss(10.0, pl, LinkKind::Direct) ==
          doctest::Approx(1e-3 * std::pow(10.0, -3.5)).epsilon(1e-12));
}

TEST_CASE("gen_channels: dimensions and per-entry variance") {
    Dims dims{64, 32, 8};
    Geometry geo;
    PathLossParams pl;
    RngStream rng(9, 0);
    auto ch = gen_channels(dims, geo, pl, rng);
    CHECK(ch.G.rows() == 32);
    CHECK(ch.G.cols() == 64);
    CHECK(ch.H.rows() == 32);
    CHECK(ch.H.cols() == 8);
    CHECK(ch.F.rows() == 64);
    CHECK(ch.F.cols() == 8);

    const double bg = path_loss(distance(geo.ris, geo.rx), pl, LinkKind::Ris);
    const double bh = path_loss(distance(geo.tx, geo.rx), pl, LinkKind::Direct);
    const double bf = path_loss(distance(geo.tx, geo.ris), pl, LinkKind::Ris);
    CHECK(ch.G.squaredNorm() / (32.0 * 64.0) == doctest::Approx(bg).epsilon(0.1));
    CHECK(ch.H.squaredNorm() / (32.0 * 8.0) == doctest::Approx(bh).epsilon(0.25));
    CHECK(ch.F.squaredNorm() / (64.0 * 8.0) == doctest::Approx(bf).epsilon(0.15));
}

TEST_CASE("normalize invariants") {
    Dims dims{48, 24, 6};
    RngStream rng(11, 0);
    auto ch = gen_channels(dims, Geometry{}, PathLossParams{}, rng);
    auto nc = normalize(ch);
    CHECK(nc.Gt.squaredNorm() / dims.N == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(nc.Ht.squaredNorm() / dims.K == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(nc.Ft.squaredNorm() / dims.K == doctest::Approx(nc.zeta).epsilon(1e-10));
    CHECK(nc.zeta > 0.0);
    CHECK(nc.scale_a > 0.0);
}

TEST_CASE("perturb_csi: -inf is a no-op, finite nmse adds matching error power") {
    Dims dims{32, 16, 4};
    RngStream rng(5, 0);
    auto ch = gen_channels(dims, Geometry{}, PathLossParams{}, rng);

    RngStream noop_rng(6, 0);
    auto same = perturb_csi(ch, -std::numeric_limits<double>::infinity(), noop_rng);
    CHECK((same.G - ch.G).norm() == 0.0);
    CHECK((same.H - ch.H).norm() == 0.0);
    CHECK((same.F - ch.F).norm() == 0.0);

    RngStream prng(7, 0);
    auto pert = perturb_csi(ch, -10.0, prng);
    double nmse = (pert.G - ch.G).squaredNorm() / ch.G.squaredNorm();
    CHECK(nmse == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("dump/load round trip") {
    Dims dims{12, 8, 3};
    RngStream rng(77, 0);
    auto ch = gen_channels(dims, Geometry{}, PathLossParams{}, rng);
    auto path = (std::filesystem::temp_directory_path() / "sapit_ch_test.bin").string();
    dump_channels(ch, 77, path);
    auto back = load_channels(path);
    CHECK((back.G - ch.G).norm() == 0.0);
    CHECK((back.H - ch.H).norm() == 0.0);
    CHECK((back.F - ch.F).norm() == 0.0);
    CHECK(back.dims.N == dims.N);
    CHECK(back.dims.M == dims.M);
    CHECK(back.dims.K == dims.K);
    std::remove(path.c_str());
}
