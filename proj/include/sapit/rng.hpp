#pragma once

#include <complex>
#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace sapit {

using cxd = std::complex<double>;

// Counter-based Philox 4x32-10 generator. A stream is identified by
// (seed, stream_id); draws depend only on the stream key and the draw
// counter, so per-trial streams reproduce bit-exactly regardless of
// thread scheduling.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          ctr2_(static_cast<std::uint32_t>(stream_id)),
          ctr3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        ++counter_;
        std::uint32_t x[4] = {c0, c1, ctr2_, ctr3_};
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            std::uint64_t p0 = 0xD2511F53ull * x[0];
            std::uint64_t p1 = 0xCD9E8D57ull * x[2];
            std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            std::uint32_t y0 = hi1 ^ x[1] ^ k0;
            std::uint32_t y1 = lo1;
            std::uint32_t y2 = hi0 ^ x[3] ^ k1;
            std::uint32_t y3 = lo0;
            x[0] = y0; x[1] = y1; x[2] = y2; x[3] = y3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        spare_ = (static_cast<std::uint64_t>(x[2]) << 32) | x[3];
        have_spare_ = true;
        return (static_cast<std::uint64_t>(x[0]) << 32) | x[1];
    }

    std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

    // Standard real normal via Box-Muller (deterministic across platforms).
    double normal() {
        if (have_normal_) {
            have_normal_ = false;
            return spare_normal_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_normal_ = r * std::sin(a);
        have_normal_ = true;
        return r * std::cos(a);
    }

    // Circularly symmetric complex Gaussian CN(mean, var).
    cxd cgaussian(cxd mean = 0.0, double var = 1.0) {
        if (var < 0.0) throw std::invalid_argument("cgaussian: negative variance");
        if (var == 0.0) return mean;
        double s = std::sqrt(var / 2.0);
        return mean + cxd(s * normal(), s * normal());
    }

private:
    std::uint32_t key0_, key1_;
    std::uint32_t ctr2_, ctr3_;
    std::uint64_t counter_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
    double spare_normal_ = 0.0;
    bool have_normal_ = false;
};

inline cxd sample_cgaussian(RngStream& rng, cxd mean, double var) {
    return rng.cgaussian(mean, var);
}

}  // namespace sapit
