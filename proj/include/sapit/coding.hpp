#pragma once

#include <cstdint>
#include <vector>

#include "sapit/constellation.hpp"
#include "sapit/rng.hpp"

namespace sapit {

// Rate-1/2 feedforward convolutional code, zero-tail terminated.
struct ConvCode {
    unsigned g0 = 0171;  // octal taps, MSB = current input bit
    unsigned g1 = 0133;
    int constraint_length = 7;

    int memory() const { return constraint_length - 1; }
    int num_states() const { return 1 << memory(); }
    // Coded length for a given payload (tail included).
    int coded_length(int info_bits) const { return 2 * (info_bits + memory()); }
    int info_length(int coded_bits) const { return coded_bits / 2 - memory(); }
};

std::vector<std::uint8_t> conv_encode(const std::vector<std::uint8_t>& info,
                                      const ConvCode& code);

struct Interleaver {
    std::vector<int> perm;  // output[i] = input[perm[i]]

    static Interleaver random(int length, std::uint64_t seed);
    static Interleaver identity(int length);

    std::vector<double> apply(const std::vector<double>& v) const;
    std::vector<double> invert(const std::vector<double>& v) const;
    std::vector<std::uint8_t> apply_bits(const std::vector<std::uint8_t>& v) const;
    int size() const { return static_cast<int>(perm.size()); }
};

// Per-slot probability vectors over a constellation, row-major
// [slot * order + point]. Rows are kept normalized.
struct SymbolPriorTable {
    std::vector<double> p;
    int order = 0;

    int slots() const { return order ? static_cast<int>(p.size()) / order : 0; }
    double* row(int slot) { return p.data() + static_cast<std::size_t>(slot) * order; }
    const double* row(int slot) const {
        return p.data() + static_cast<std::size_t>(slot) * order;
    }
    void normalize_rows();
};

SymbolPriorTable uniform_priors(int slots, int order);

// LLR convention: L = log P(bit = 0) - log P(bit = 1), MSB of the label first.
std::vector<double> symbols_to_bit_llrs(const SymbolPriorTable& table,
                                        const Constellation& c);
SymbolPriorTable bit_llrs_to_symbol_priors(const std::vector<double>& llrs,
                                           const Constellation& c);

struct BcjrResult {
    std::vector<double> extrinsic;  // coded-bit extrinsic LLRs, codeword order
    std::vector<double> info_app;   // info-bit a-posteriori LLRs (tail excluded)
};

// Exact log-domain forward-backward over the code trellis. Input LLRs are on
// coded bits in codeword order (deinterleaved).
BcjrResult bcjr_decode(const std::vector<double>& coded_llrs, const ConvCode& code);

// Channel-evidence LLRs -> deinterleave -> BCJR -> reinterleaved extrinsic.
BcjrResult bcjr_extrinsic(const std::vector<double>& interleaved_llrs,
                          const ConvCode& code, const Interleaver& pi);

}  // namespace sapit
