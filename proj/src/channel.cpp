#include "sapit/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sapit {

double distance(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double path_loss(double d, const PathLossParams& params, LinkKind link) {
    if (d <= 0.0) throw std::invalid_argument("path_loss: distance must be positive");
    double alpha = (link == LinkKind::Ris) ? params.alpha_ris : params.alpha_direct;
    return params.beta0 * std::pow(d / params.d0, -alpha);
}

namespace {

CMat iid_cgaussian(int rows, int cols, double var, RngStream& rng) {
    CMat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.cgaussian(0.0, var);
    return m;
}

}  // namespace

ChannelSet gen_channels(const Dims& dims, const Geometry& geo,
                        const PathLossParams& params, RngStream& rng) {
    if (dims.N <= 0 || dims.M <= 0 || dims.K <= 0)
        throw std::invalid_argument("gen_channels: dims must be positive");
    double beta_ris_rx = path_loss(distance(geo.ris, geo.rx), params, LinkKind::Ris);
    double beta_tx_ris = path_loss(distance(geo.tx, geo.ris), params, LinkKind::Ris);
    double beta_tx_rx = path_loss(distance(geo.tx, geo.rx), params, LinkKind::Direct);
    ChannelSet ch;
    ch.dims = dims;
    ch.G = iid_cgaussian(dims.M, dims.N, beta_ris_rx, rng);
    ch.F = iid_cgaussian(dims.N, dims.K, beta_tx_ris, rng);
    ch.H = iid_cgaussian(dims.M, dims.K, beta_tx_rx, rng);
    return ch;
}

NormalizedChannels normalize(const ChannelSet& ch) {
    double g2 = ch.G.squaredNorm();
    double h2 = ch.H.squaredNorm();
    double f2 = ch.F.squaredNorm();
    if (g2 <= 0.0 || h2 <= 0.0)
        throw std::runtime_error("normalize: degenerate channel (zero Frobenius norm)");
    double a = std::sqrt(h2 / ch.dims.K);
    double b = std::sqrt(g2 / ch.dims.N);
    NormalizedChannels out;
    out.Gt = ch.G / b;
    out.Ht = ch.H / a;
    out.Ft = (b / a) * ch.F;
    out.zeta = g2 * f2 / (ch.dims.N * h2);
    out.scale_a = a;
    return out;
}

ChannelSet perturb_csi(const ChannelSet& ch, double nmse_db, RngStream& rng) {
    ChannelSet out = ch;
    if (std::isinf(nmse_db) && nmse_db < 0) return out;
    double nmse = std::pow(10.0, nmse_db / 10.0);
    auto perturb = [&](CMat& m) {
        double per_entry = nmse * m.squaredNorm() / static_cast<double>(m.size());
        for (int j = 0; j < m.cols(); ++j)
            for (int i = 0; i < m.rows(); ++i) m(i, j) += rng.cgaussian(0.0, per_entry);
    };
    perturb(out.G);
    perturb(out.H);
    perturb(out.F);
    return out;
}

namespace {

void write_mat(std::ofstream& f, const CMat& m) {
    for (int j = 0; j < m.cols(); ++j)
        for (int i = 0; i < m.rows(); ++i) {
            double re = m(i, j).real(), im = m(i, j).imag();
            f.write(reinterpret_cast<const char*>(&re), sizeof(double));
            f.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
}

CMat read_mat(std::ifstream& f, int rows, int cols) {
    CMat m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            double re, im;
            f.read(reinterpret_cast<char*>(&re), sizeof(double));
            f.read(reinterpret_cast<char*>(&im), sizeof(double));
            m(i, j) = cxd(re, im);
        }
    return m;
}

constexpr std::uint64_t kMagic = 0x53415049544348ull;  // file tag

}  // namespace

void dump_channels(const ChannelSet& ch, std::uint64_t seed, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("dump_channels: cannot open " + path);
    std::uint64_t hdr[5] = {kMagic, seed, static_cast<std::uint64_t>(ch.dims.N),
                            static_cast<std::uint64_t>(ch.dims.M),
                            static_cast<std::uint64_t>(ch.dims.K)};
    f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    write_mat(f, ch.G);
    write_mat(f, ch.H);
    write_mat(f, ch.F);
}

ChannelSet load_channels(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("load_channels: cannot open " + path);
    std::uint64_t hdr[5];
    f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    if (hdr[0] != kMagic) throw std::runtime_error("load_channels: bad file header");
    ChannelSet ch;
    ch.dims = {static_cast<int>(hdr[2]), static_cast<int>(hdr[3]), static_cast<int>(hdr[4])};
    ch.G = read_mat(f, ch.dims.M, ch.dims.N);
    ch.H = read_mat(f, ch.dims.M, ch.dims.K);
    ch.F = read_mat(f, ch.dims.N, ch.dims.K);
    return ch;
}

}  // namespace sapit
