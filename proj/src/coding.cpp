#include "sapit/coding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sapit {

namespace {

constexpr double kProbFloor = 1e-30;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int parity(unsigned v) { return __builtin_popcount(v) & 1; }

double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace

std::vector<std::uint8_t> conv_encode(const std::vector<std::uint8_t>& info,
                                      const ConvCode& code) {
    if (info.empty()) throw std::invalid_argument("conv_encode: empty payload");
    int mem = code.memory();
    std::vector<std::uint8_t> out;
    out.reserve(code.coded_length(static_cast<int>(info.size())));
    unsigned reg = 0;  // last `mem` input bits, most recent in MSB of window
    auto push = [&](unsigned bit) {
        unsigned window = (bit << mem) | reg;
        out.push_back(static_cast<std::uint8_t>(parity(window & code.g0)));
        out.push_back(static_cast<std::uint8_t>(parity(window & code.g1)));
        reg = window >> 1;
    };
    for (std::uint8_t b : info) push(b & 1u);
    for (int i = 0; i < mem; ++i) push(0);  // zero tail
    return out;
}

Interleaver Interleaver::random(int length, std::uint64_t seed) {
    Interleaver pi;
    pi.perm.resize(length);
    for (int i = 0; i < length; ++i) pi.perm[i] = i;
    RngStream rng(seed, 0xA11CE);
    for (int i = length - 1; i > 0; --i) {
        int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(pi.perm[i], pi.perm[j]);
    }
    return pi;
}

Interleaver Interleaver::identity(int length) {
    Interleaver pi;
    pi.perm.resize(length);
    for (int i = 0; i < length; ++i) pi.perm[i] = i;
    return pi;
}

std::vector<double> Interleaver::apply(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != size())
        throw std::invalid_argument("interleave: length mismatch");
    std::vector<double> out(v.size());
    for (int i = 0; i < size(); ++i) out[i] = v[perm[i]];
    return out;
}

std::vector<double> Interleaver::invert(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != size())
        throw std::invalid_argument("deinterleave: length mismatch");
    std::vector<double> out(v.size());
    for (int i = 0; i < size(); ++i) out[perm[i]] = v[i];
    return out;
}

std::vector<std::uint8_t> Interleaver::apply_bits(const std::vector<std::uint8_t>& v) const {
    if (static_cast<int>(v.size()) != size())
        throw std::invalid_argument("interleave: length mismatch");
    std::vector<std::uint8_t> out(v.size());
    for (int i = 0; i < size(); ++i) out[i] = v[perm[i]];
    return out;
}

void SymbolPriorTable::normalize_rows() {
    int n = slots();
    for (int s = 0; s < n; ++s) {
        double* r = row(s);
        double sum = 0.0;
        for (int i = 0; i < order; ++i) {
            r[i] = std::max(r[i], kProbFloor);
            sum += r[i];
        }
        for (int i = 0; i < order; ++i) r[i] /= sum;
    }
}

SymbolPriorTable uniform_priors(int slots, int order) {
    SymbolPriorTable t;
    t.order = order;
    t.p.assign(static_cast<std::size_t>(slots) * order, 1.0 / order);
    return t;
}

std::vector<double> symbols_to_bit_llrs(const SymbolPriorTable& table,
                                        const Constellation& c) {
    int bps = c.bits_per_symbol;
    int n = table.slots();
    std::vector<double> llrs(static_cast<std::size_t>(n) * bps);
    for (int s = 0; s < n; ++s) {
        const double* r = table.row(s);
        for (int b = 0; b < bps; ++b) {
            unsigned mask = 1u << (bps - 1 - b);  // MSB first
            double p0 = 0.0, p1 = 0.0;
            for (int i = 0; i < c.size(); ++i) {
                if (c.labels[i] & mask)
                    p1 += r[i];
                else
                    p0 += r[i];
            }
            p0 = std::max(p0, kProbFloor);
            p1 = std::max(p1, kProbFloor);
            llrs[static_cast<std::size_t>(s) * bps + b] = std::log(p0 / p1);
        }
    }
    return llrs;
}

SymbolPriorTable bit_llrs_to_symbol_priors(const std::vector<double>& llrs,
                                           const Constellation& c) {
    int bps = c.bits_per_symbol;
    if (llrs.size() % bps != 0)
        throw std::invalid_argument("bit_llrs_to_symbol_priors: length not a multiple of bits per symbol");
    int n = static_cast<int>(llrs.size()) / bps;
    SymbolPriorTable t;
    t.order = c.size();
    t.p.resize(static_cast<std::size_t>(n) * c.size());
    for (int s = 0; s < n; ++s) {
        double* r = t.row(s);
        for (int i = 0; i < c.size(); ++i) {
            double lp = 0.0;
            for (int b = 0; b < bps; ++b) {
                double L = llrs[static_cast<std::size_t>(s) * bps + b];
                bool one = (c.labels[i] >> (bps - 1 - b)) & 1u;
                // log P(bit) with P(0) = sigmoid(L)
                lp += one ? -log_sum_exp(0.0, L) : -log_sum_exp(0.0, -L);
            }
            r[i] = std::exp(lp);
        }
    }
    t.normalize_rows();
    return t;
}

BcjrResult bcjr_decode(const std::vector<double>& coded_llrs, const ConvCode& code) {
    if (coded_llrs.size() % 2 != 0)
        throw std::invalid_argument("bcjr_decode: odd coded length");
    int steps = static_cast<int>(coded_llrs.size()) / 2;
    int mem = code.memory();
    int ns = code.num_states();
    int info_len = steps - mem;
    if (info_len < 1) throw std::invalid_argument("bcjr_decode: codeword too short");

    // Trellis: from state s with input u, window = (u<<mem)|s, next = window>>1.
    std::vector<int> next(ns * 2), out0(ns * 2), out1(ns * 2);
    for (int s = 0; s < ns; ++s)
        for (int u = 0; u < 2; ++u) {
            unsigned window = (static_cast<unsigned>(u) << mem) | static_cast<unsigned>(s);
            next[s * 2 + u] = static_cast<int>(window >> 1);
            out0[s * 2 + u] = parity(window & code.g0);
            out1[s * 2 + u] = parity(window & code.g1);
        }

    // log p(coded bit = v) up to a per-bit constant: 0 for v=0, -L for v=1.
    auto bit_lp = [&](int pos, int v) { return v ? -coded_llrs[pos] : 0.0; };

    std::vector<double> alpha(static_cast<std::size_t>(steps + 1) * ns, kNegInf);
    std::vector<double> beta(static_cast<std::size_t>(steps + 1) * ns, kNegInf);
    alpha[0] = 0.0;       // start in the zero state
    beta[static_cast<std::size_t>(steps) * ns + 0] = 0.0;  // zero tail ends there

    for (int t = 0; t < steps; ++t) {
        bool tail = t >= info_len;
        double* a = alpha.data() + static_cast<std::size_t>(t) * ns;
        double* an = alpha.data() + static_cast<std::size_t>(t + 1) * ns;
        for (int s = 0; s < ns; ++s) {
            if (a[s] == kNegInf) continue;
            for (int u = 0; u < 2; ++u) {
                if (tail && u != 0) continue;
                double g = bit_lp(2 * t, out0[s * 2 + u]) + bit_lp(2 * t + 1, out1[s * 2 + u]);
                int nx = next[s * 2 + u];
                an[nx] = log_sum_exp(an[nx], a[s] + g);
            }
        }
        // Rescale to keep magnitudes bounded on long frames.
        double m = *std::max_element(an, an + ns);
        if (m != kNegInf)
            for (int s = 0; s < ns; ++s) an[s] -= m;
    }
    for (int t = steps - 1; t >= 0; --t) {
        bool tail = t >= info_len;
        double* b = beta.data() + static_cast<std::size_t>(t + 1) * ns;
        double* bp = beta.data() + static_cast<std::size_t>(t) * ns;
        for (int s = 0; s < ns; ++s) {
            for (int u = 0; u < 2; ++u) {
                if (tail && u != 0) continue;
                double g = bit_lp(2 * t, out0[s * 2 + u]) + bit_lp(2 * t + 1, out1[s * 2 + u]);
                int nx = next[s * 2 + u];
                if (b[nx] == kNegInf) continue;
                bp[s] = log_sum_exp(bp[s], b[nx] + g);
            }
        }
        double m = *std::max_element(bp, bp + ns);
        if (m != kNegInf)
            for (int s = 0; s < ns; ++s) bp[s] -= m;
    }

    BcjrResult res;
    res.extrinsic.resize(coded_llrs.size());
    res.info_app.resize(info_len);
    for (int t = 0; t < steps; ++t) {
        bool tail = t >= info_len;
        const double* a = alpha.data() + static_cast<std::size_t>(t) * ns;
        const double* b = beta.data() + static_cast<std::size_t>(t + 1) * ns;
        double c0[2] = {kNegInf, kNegInf};  // coded bit 0 of the step, values 0/1
        double c1[2] = {kNegInf, kNegInf};
        double ui[2] = {kNegInf, kNegInf};  // input bit
        for (int s = 0; s < ns; ++s) {
            if (a[s] == kNegInf) continue;
            for (int u = 0; u < 2; ++u) {
                if (tail && u != 0) continue;
                int v0 = out0[s * 2 + u], v1 = out1[s * 2 + u];
                double g = bit_lp(2 * t, v0) + bit_lp(2 * t + 1, v1);
                double w = a[s] + g + b[next[s * 2 + u]];
                c0[v0] = log_sum_exp(c0[v0], w);
                c1[v1] = log_sum_exp(c1[v1], w);
                ui[u] = log_sum_exp(ui[u], w);
            }
        }
        res.extrinsic[2 * t] = (c0[0] - c0[1]) - coded_llrs[2 * t];
        res.extrinsic[2 * t + 1] = (c1[0] - c1[1]) - coded_llrs[2 * t + 1];
        if (!tail) res.info_app[t] = ui[0] - ui[1];
    }
    return res;
}

BcjrResult bcjr_extrinsic(const std::vector<double>& interleaved_llrs,
                          const ConvCode& code, const Interleaver& pi) {
    BcjrResult res = bcjr_decode(pi.invert(interleaved_llrs), code);
    res.extrinsic = pi.apply(res.extrinsic);
    return res;
}

}  // namespace sapit
