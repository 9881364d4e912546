#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>

#include "sapit/constellation.hpp"
#include "sapit/rng.hpp"

using namespace sapit;

namespace {
int popcount32(std::uint32_t v) { return std::popcount(v); }
}  // namespace

TEST_CASE("psk constellations: unit modulus, unit power, gray labels") {
    for (int order : {2, 4, 8}) {
        auto c = make_psk(order);
        REQUIRE(c.size() == order);
        CHECK(c.bits_per_symbol == static_cast<int>(std::log2(order)));
        CHECK(c.avg_power() == doctest::Approx(1.0).epsilon(1e-12));
        for (const auto& p : c.points) CHECK(std::abs(p) == doctest::Approx(1.0).epsilon(1e-12));
        // Adjacent points around the circle differ in exactly one label bit.
        for (int i = 0; i < order; ++i)
            CHECK(popcount32(c.labels[i] ^ c.labels[(i + 1) % order]) == 1);
        // Labels are a permutation of 0..order-1.
        std::set<std::uint32_t> labs(c.labels.begin(), c.labels.end());
        CHECK(static_cast<int>(labs.size()) == order);
        for (std::uint32_t l : labs) CHECK(l < static_cast<std::uint32_t>(order));
    }
}

TEST_CASE("bpsk points are +/-1") {
    auto c = make_psk(2);
    double re0 = c.points[0].real(), re1 = c.points[1].real();
    CHECK(std::abs(re0 * re1 + 1.0) < 1e-12);  // opposite signs, product -1
    CHECK(std::abs(c.points[0].imag()) < 1e-12);
    CHECK(std::abs(c.points[1].imag()) < 1e-12);
}

TEST_CASE("qam constellations: scale factors 1/sqrt(10) and 1/sqrt(42)") {
    // 16-QAM on the +/-1, +/-3 grid has average power 10 before scaling;
    // 64-QAM (levels +/-1..+/-7) has 42. The corners pin the scale exactly.
    auto q16 = make_qam(16);
    REQUIRE(q16.size() == 16);
    CHECK(q16.avg_power() == doctest::Approx(1.0).epsilon(1e-12));
    double max16 = 0.0;
    for (const auto& p : q16.points) max16 = std::max(max16, std::abs(p));
    CHECK(max16 == doctest::Approx(std::sqrt(18.0 / 10.0)).epsilon(1e-12));

    auto q64 = make_qam(64);
    REQUIRE(q64.size() == 64);
    CHECK(q64.avg_power() == doctest::Approx(1.0).epsilon(1e-12));
    double max64 = 0.0;
    for (const auto& p : q64.points) max64 = std::max(max64, std::abs(p));
    CHECK(max64 == doctest::Approx(std::sqrt(98.0 / 42.0)).epsilon(1e-12));

    // Per-axis Gray labels: nearest horizontal/vertical neighbors differ in
    // exactly one bit.
    for (const auto& c : {q16, q64}) {
        int n = c.size();
        double step = 2.0 * std::abs(c.points[0].real() < 0 ? c.points[0] : c.points[0]);
        (void)step;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                double d = std::abs(c.points[i] - c.points[j]);
                double dmin = 2.0 / std::sqrt(c.size() == 16 ? 10.0 : 42.0);
                if (d < dmin * 1.001)
                    CHECK(popcount32(c.labels[i] ^ c.labels[j]) == 1);
            }
    }
}

TEST_CASE("index_of_label inverts labels") {
    for (auto c : {make_psk(8), make_qam(16)}) {
        for (int i = 0; i < c.size(); ++i)
            CHECK(c.index_of_label(c.labels[i]) == i);
    }
}

TEST_CASE("ris phase sets are unit modulus and match angles") {
    auto r = make_ris_phases(4);
    REQUIRE(r.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(r.points()[i]) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(r.points()[i] - std::polar(1.0, r.angles[i])) < 1e-12);
    }
}

TEST_CASE("unit conversions") {
    CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(db_to_linear(0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rng: streams are deterministic and independent of draw interleaving") {
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(42, 8);
    bool differs = false;
    RngStream a2(42, 7);
    for (int i = 0; i < 10; ++i) differs |= (a2.next_u64() != c.next_u64());
    CHECK(differs);

    // Different seeds give different streams.
    RngStream d(43, 7), e(42, 7);
    bool seed_differs = false;
    for (int i = 0; i < 10; ++i) seed_differs |= (d.next_u64() != e.next_u64());
    CHECK(seed_differs);
}

TEST_CASE("rng: uniform in [0,1), gaussian moments") {
    RngStream r(123, 0);
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        sum2 += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(5e-3));
    CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(5e-3));

    RngStream g(321, 0);
    cxd mean_acc = 0.0;
    double var_acc = 0.0;
    for (int i = 0; i < n; ++i) {
        cxd z = g.cgaussian(cxd(1.0, -2.0), 3.0);
        mean_acc += z;
        var_acc += std::norm(z - cxd(1.0, -2.0));
    }
    CHECK(std::abs(mean_acc / double(n) - cxd(1.0, -2.0)) < 0.02);
    CHECK(var_acc / n == doctest::Approx(3.0).epsilon(0.02));
}
