#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace sapit {

using cxd = std::complex<double>;

enum class ConstKind { PSK, QAM };

// Finite symbol alphabet with unit average power and Gray bit labels.
struct Constellation {
    std::vector<cxd> points;
    std::vector<std::uint32_t> labels;  // labels[i] = bit pattern of points[i]
    int bits_per_symbol = 0;
    ConstKind kind = ConstKind::PSK;

    int size() const { return static_cast<int>(points.size()); }
    // Index of the point carrying a given bit pattern.
    int index_of_label(std::uint32_t label) const;
    double avg_power() const;
};

// RIS phase alphabet {e^{j theta_i}}; every point has unit modulus.
struct RisPhaseSet {
    std::vector<double> angles;
    Constellation constellation;  // points e^{j theta_i}, Gray labels

    int size() const { return constellation.size(); }
    const std::vector<cxd>& points() const { return constellation.points; }
};

Constellation make_psk(int order);
Constellation make_qam(int order);
RisPhaseSet make_ris_phases(int order);

double dbm_to_watts(double p_dbm);
double db_to_linear(double db);

}  // namespace sapit
