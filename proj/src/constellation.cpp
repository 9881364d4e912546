#include "sapit/constellation.hpp"

#include <cmath>
#include <stdexcept>

namespace sapit {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::uint32_t gray(std::uint32_t i) { return i ^ (i >> 1); }

int ilog2(int n) {
    int b = 0;
    while ((1 << b) < n) ++b;
    return b;
}

}  // namespace

int Constellation::index_of_label(std::uint32_t label) const {
    for (int i = 0; i < size(); ++i)
        if (labels[i] == label) return i;
    throw std::invalid_argument("constellation: no point with requested label");
}

double Constellation::avg_power() const {
    double p = 0.0;
    for (const auto& x : points) p += std::norm(x);
    return p / static_cast<double>(points.size());
}

Constellation make_psk(int order) {
    if (!is_power_of_two(order))
        throw std::invalid_argument("make_psk: order must be a power of two");
    Constellation c;
    c.kind = ConstKind::PSK;
    c.bits_per_symbol = ilog2(order);
    c.points.resize(order);
    c.labels.resize(order);
    for (int i = 0; i < order; ++i) {
        double theta = 2.0 * M_PI * i / order;
        c.points[i] = cxd(std::cos(theta), std::sin(theta));
        c.labels[i] = gray(static_cast<std::uint32_t>(i));
    }
    // Exact values at the axes to keep BPSK/QPSK free of rounding dust.
    for (int i = 0; i < order; ++i) {
        if (std::abs(c.points[i].real()) < 1e-15) c.points[i].real(0.0);
        if (std::abs(c.points[i].imag()) < 1e-15) c.points[i].imag(0.0);
    }
    return c;
}

Constellation make_qam(int order) {
    if (!is_power_of_two(order))
        throw std::invalid_argument("make_qam: order must be a power of two");
    int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (side * side != order)
        throw std::invalid_argument("make_qam: order must be a perfect square (16, 64, 256)");
    Constellation c;
    c.kind = ConstKind::QAM;
    c.bits_per_symbol = ilog2(order);
    int axis_bits = c.bits_per_symbol / 2;

    // Mean power of the unscaled {+-1, +-3, ...}^2 grid.
    double p = 0.0;
    for (int a = 0; a < side; ++a)
        for (int b = 0; b < side; ++b) {
            double re = 2.0 * a - (side - 1);
            double im = 2.0 * b - (side - 1);
            p += re * re + im * im;
        }
    double scale = 1.0 / std::sqrt(p / order);

    c.points.resize(order);
    c.labels.resize(order);
    int idx = 0;
    for (int a = 0; a < side; ++a) {
        for (int b = 0; b < side; ++b) {
            double re = (2.0 * a - (side - 1)) * scale;
            double im = (2.0 * b - (side - 1)) * scale;
            c.points[idx] = cxd(re, im);
            c.labels[idx] = (gray(static_cast<std::uint32_t>(a)) << axis_bits) |
                            gray(static_cast<std::uint32_t>(b));
            ++idx;
        }
    }
    return c;
}

RisPhaseSet make_ris_phases(int order) {
    RisPhaseSet s;
    s.constellation = make_psk(order);
    s.angles.resize(order);
    for (int i = 0; i < order; ++i) s.angles[i] = 2.0 * M_PI * i / order;
    return s;
}

double dbm_to_watts(double p_dbm) { return std::pow(10.0, (p_dbm - 30.0) / 10.0); }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace sapit
