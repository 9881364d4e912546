#include "sapit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sapit::oracle {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

struct Box {
    double re_lo, re_hi, im_lo, im_hi;
};

Box bounding_box(std::span<const cxd> centers, double pad) {
    Box b{1e300, -1e300, 1e300, -1e300};
    for (cxd c : centers) {
        b.re_lo = std::min(b.re_lo, c.real());
        b.re_hi = std::max(b.re_hi, c.real());
        b.im_lo = std::min(b.im_lo, c.imag());
        b.im_hi = std::max(b.im_hi, c.imag());
    }
    b.re_lo -= pad; b.re_hi += pad;
    b.im_lo -= pad; b.im_hi += pad;
    return b;
}

}  // namespace

void quadrature_mixture_moments(std::span<const double> pi, cxd p, double tau_p,
                                cxd d, double tau_d, std::span<const cxd> s_points,
                                bool mode_u, cxd* mean, double* var, int grid,
                                double pad_sigmas) {
    if (tau_p <= 0.0 || tau_d <= 0.0)
        throw std::invalid_argument("quadrature: variances must be positive");
    std::vector<cxd> centers;
    for (cxd s : s_points) {
        if (mode_u)
            centers.push_back(p * s);
        else
            centers.push_back(d * std::conj(s) / std::norm(s));
    }
    centers.push_back(mode_u ? d : p);
    double pad = pad_sigmas * std::sqrt(std::max(tau_p, tau_d));
    Box box = bounding_box(centers, pad);
    double hx = (box.re_hi - box.re_lo) / grid;
    double hy = (box.im_hi - box.im_lo) / grid;

    std::vector<double> logf(static_cast<std::size_t>(grid) * grid);
    double mx = -1e300;
#pragma omp parallel for reduction(max : mx) schedule(static)
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            cxd z(box.re_lo + (i + 0.5) * hx, box.im_lo + (j + 0.5) * hy);
            double lp;
            if (mode_u) {
                // prior mixture x likelihood CN(d; z, tau_d)
                double mmx = -1e300;
                std::vector<double> comp(s_points.size());
                for (std::size_t k = 0; k < s_points.size(); ++k) {
                    comp[k] = std::log(std::max(pi[k], 1e-300)) -
                              std::norm(z - p * s_points[k]) / tau_p;
                    mmx = std::max(mmx, comp[k]);
                }
                double acc = 0.0;
                for (double c : comp) acc += std::exp(c - mmx);
                lp = mmx + std::log(acc) - std::norm(d - z) / tau_d;
            } else {
                double mmx = -1e300;
                std::vector<double> comp(s_points.size());
                for (std::size_t k = 0; k < s_points.size(); ++k) {
                    comp[k] = std::log(std::max(pi[k], 1e-300)) -
                              std::norm(d - z * s_points[k]) / tau_d;
                    mmx = std::max(mmx, comp[k]);
                }
                double acc = 0.0;
                for (double c : comp) acc += std::exp(c - mmx);
                lp = mmx + std::log(acc) - std::norm(z - p) / tau_p;
            }
            logf[static_cast<std::size_t>(i) * grid + j] = lp;
            mx = std::max(mx, lp);
        }
    }
    double z0 = 0.0, e2 = 0.0;
    cxd m(0.0, 0.0);
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            double f = std::exp(logf[static_cast<std::size_t>(i) * grid + j] - mx);
            cxd z(box.re_lo + (i + 0.5) * hx, box.im_lo + (j + 0.5) * hy);
            z0 += f;
            m += f * z;
            e2 += f * std::norm(z);
        }
    *mean = m / z0;
    *var = e2 / z0 - std::norm(*mean);
}

ExactMapResult exact_joint_map(const CMat& Y, const ChannelSet& ch,
                               const FrameConfig& cfg, const CMat& S_P) {
    const Dims& dm = cfg.dims;
    const int ND = dm.N - cfg.N_P;
    const int Xord = cfg.tx_const.size();
    const int Sord = cfg.ris_phases.size();
    const int QT = cfg.Q * cfg.T;

    double log_hyp = (static_cast<double>(ND) * cfg.Q) * std::log2(double(Sord)) +
                     (static_cast<double>(dm.K) * QT) * std::log2(double(Xord));
    if (log_hyp > 20.0)
        throw std::invalid_argument("exact_joint_map: hypothesis budget exceeded");

    const double amp = std::sqrt(cfg.symbol_power());
    const auto& spts = cfg.ris_phases.points();

    std::int64_t n_s = 1;
    for (int i = 0; i < ND * cfg.Q; ++i) n_s *= Sord;
    std::int64_t n_xcol = 1;
    for (int i = 0; i < dm.K; ++i) n_xcol *= Xord;

    ExactMapResult out;
    out.marg_x.assign(static_cast<std::size_t>(dm.K) * QT * Xord, 0.0);
    out.marg_s.assign(static_cast<std::size_t>(ND) * cfg.Q * Sord, 0.0);
    out.map_x_idx.assign(static_cast<std::size_t>(dm.K) * QT, 0);
    out.map_s_idx.assign(static_cast<std::size_t>(ND) * cfg.Q, 0);

    // Per s-hypothesis: column likelihood tables over x-column hypotheses.
    std::vector<double> log_evidence(n_s);
    std::vector<std::vector<double>> col_ll(n_s);  // [s][col * n_xcol + h]
    double global_mx = -1e300;

#pragma omp parallel for schedule(dynamic) reduction(max : global_mx)
    for (std::int64_t si = 0; si < n_s; ++si) {
        Eigen::VectorXcd s(dm.N);
        std::int64_t rem = si;
        std::vector<int> sidx(static_cast<std::size_t>(ND) * cfg.Q);
        for (int q = 0; q < cfg.Q; ++q)
            for (int n = 0; n < ND; ++n) {
                int v = static_cast<int>(rem % Sord);
                rem /= Sord;
                sidx[static_cast<std::size_t>(q) * ND + n] = v;
            }
        std::vector<double> ll(static_cast<std::size_t>(QT) * n_xcol);
        double lev = 0.0;
        for (int q = 0; q < cfg.Q; ++q) {
            for (int n = 0; n < cfg.N_P; ++n) s(n) = S_P(n, q);
            for (int n = 0; n < ND; ++n)
                s(cfg.N_P + n) = spts[sidx[static_cast<std::size_t>(q) * ND + n]];
            CMat A = ch.G * s.asDiagonal() * ch.F + ch.H;
            for (int t = 0; t < cfg.T; ++t) {
                int col = q * cfg.T + t;
                double cmx = -1e300;
                for (std::int64_t h = 0; h < n_xcol; ++h) {
                    Eigen::VectorXcd x(dm.K);
                    std::int64_t hr = h;
                    for (int k = 0; k < dm.K; ++k) {
                        x(k) = amp * cfg.tx_const.points[hr % Xord];
                        hr /= Xord;
                    }
                    double lp = -(Y.col(col) - A * x).squaredNorm() / cfg.noise_var;
                    ll[static_cast<std::size_t>(col) * n_xcol + h] = lp;
                    cmx = std::max(cmx, lp);
                }
                double acc = 0.0;
                for (std::int64_t h = 0; h < n_xcol; ++h)
                    acc += std::exp(ll[static_cast<std::size_t>(col) * n_xcol + h] - cmx);
                lev += cmx + std::log(acc / n_xcol);
            }
        }
        log_evidence[si] = lev;
        col_ll[si] = std::move(ll);
        global_mx = std::max(global_mx, lev);
    }

    // Posterior over s hypotheses and slot marginals.
    double zs = 0.0;
    for (std::int64_t si = 0; si < n_s; ++si)
        zs += std::exp(log_evidence[si] - global_mx);

    double best_joint = -1e300;
    for (std::int64_t si = 0; si < n_s; ++si) {
        double w = std::exp(log_evidence[si] - global_mx) / zs;
        std::int64_t rem = si;
        std::vector<int> sidx(static_cast<std::size_t>(ND) * cfg.Q);
        for (int q = 0; q < cfg.Q; ++q)
            for (int n = 0; n < ND; ++n) {
                int v = static_cast<int>(rem % Sord);
                rem /= Sord;
                sidx[static_cast<std::size_t>(q) * ND + n] = v;
                out.marg_s[(static_cast<std::size_t>(q) * ND + n) * Sord + v] += w;
            }
        const auto& ll = col_ll[si];
        double joint = 0.0;
        std::vector<int> best_h(QT);
        for (int col = 0; col < QT; ++col) {
            double cmx = -1e300, acc = 0.0;
            std::int64_t hb = 0;
            for (std::int64_t h = 0; h < n_xcol; ++h) {
                double lp = ll[static_cast<std::size_t>(col) * n_xcol + h];
                if (lp > cmx) { cmx = lp; hb = h; }
            }
            for (std::int64_t h = 0; h < n_xcol; ++h)
                acc += std::exp(ll[static_cast<std::size_t>(col) * n_xcol + h] - cmx);
            // slot marginals: P(x_col = h | s) weighted by posterior of s
            for (std::int64_t h = 0; h < n_xcol; ++h) {
                double ph = std::exp(ll[static_cast<std::size_t>(col) * n_xcol + h] - cmx) / acc;
                std::int64_t hr = h;
                for (int k = 0; k < dm.K; ++k) {
                    int v = static_cast<int>(hr % Xord);
                    hr /= Xord;
                    out.marg_x[(static_cast<std::size_t>(col) * dm.K + k) * Xord + v] +=
                        w * ph;
                }
            }
            joint += cmx;
            best_h[col] = static_cast<int>(hb);
        }
        if (joint + 0.0 > best_joint) {
            // joint MAP over (s, X): per column max given s
            double total = joint;
            if (total > best_joint) {
                best_joint = total;
                out.map_log_likelihood = log_evidence[si];
                for (int q = 0; q < cfg.Q; ++q)
                    for (int n = 0; n < ND; ++n)
                        out.map_s_idx[static_cast<std::size_t>(q) * ND + n] =
                            sidx[static_cast<std::size_t>(q) * ND + n];
                for (int col = 0; col < QT; ++col) {
                    std::int64_t hr = best_h[col];
                    for (int k = 0; k < dm.K; ++k) {
                        out.map_x_idx[static_cast<std::size_t>(col) * dm.K + k] =
                            static_cast<int>(hr % Xord);
                        hr /= Xord;
                    }
                }
            }
        }
    }
    return out;
}

double scalar_mmse_quadrature(const Constellation& c, double rho, int grid,
                              double pad_sigmas) {
    if (rho < 0.0) throw std::invalid_argument("scalar_mmse_quadrature: rho >= 0");
    if (rho == 0.0) return c.avg_power();
    const int ord = c.size();
    double sigma = std::sqrt(1.0 / rho);
    Box box = bounding_box(c.points, pad_sigmas * sigma);
    double hx = (box.re_hi - box.re_lo) / grid;
    double hy = (box.im_hi - box.im_lo) / grid;
    double acc = 0.0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            cxd y(box.re_lo + (i + 0.5) * hx, box.im_lo + (j + 0.5) * hy);
            double mx = -1e300;
            std::vector<double> lp(ord);
            for (int k = 0; k < ord; ++k) {
                lp[k] = -rho * std::norm(y - c.points[k]);
                mx = std::max(mx, lp[k]);
            }
            double z = 0.0, e2 = 0.0;
            cxd m(0.0, 0.0);
            for (int k = 0; k < ord; ++k) {
                double p = std::exp(lp[k] - mx);
                z += p;
                m += p * c.points[k];
                e2 += p * std::norm(c.points[k]);
            }
            // p(y) = (1/ord) sum_k CN(y; x_k, 1/rho) = (rho/pi) exp(mx) z / ord
            double py = rho / kPi * std::exp(mx) * z / ord;
            acc += py * (e2 / z - std::norm(m / z)) * hx * hy;
        }
    return acc;
}

double awgn_mi_quadrature(const Constellation& c, double rho, int grid,
                          double pad_sigmas) {
    if (rho <= 0.0) return 0.0;
    const int ord = c.size();
    double sigma = std::sqrt(1.0 / rho);
    Box box = bounding_box(c.points, pad_sigmas * sigma);
    double hx = (box.re_hi - box.re_lo) / grid;
    double hy = (box.im_hi - box.im_lo) / grid;
    double hy_neg = 0.0;  // -H(Y) accumulator
#pragma omp parallel for reduction(+ : hy_neg) schedule(static)
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            cxd y(box.re_lo + (i + 0.5) * hx, box.im_lo + (j + 0.5) * hy);
            double mx = -1e300;
            std::vector<double> lp(ord);
            for (int k = 0; k < ord; ++k) {
                lp[k] = -rho * std::norm(y - c.points[k]);
                mx = std::max(mx, lp[k]);
            }
            double z = 0.0;
            for (int k = 0; k < ord; ++k) z += std::exp(lp[k] - mx);
            double log_py = std::log(rho / kPi) + mx + std::log(z / ord);
            double py = std::exp(log_py);
            if (py > 0.0) hy_neg += py * log_py * hx * hy;
        }
    double H_y = -hy_neg;
    double H_y_given_x = std::log(kPi * std::exp(1.0) / rho);
    return H_y - H_y_given_x;  // nats
}

double bpsk_tanh_integral(double tau_r, int grid, double span_sigmas) {
    if (!(tau_r > 0.0)) throw std::invalid_argument("bpsk_tanh_integral: tau_r > 0");
    double sd = std::sqrt(tau_r);
    double lo = 1.0 - span_sigmas * sd, hi = 1.0 + span_sigmas * sd;
    double h = (hi - lo) / grid;
    double acc = 0.0;
    for (int i = 0; i <= grid; ++i) {
        double R = lo + i * h;
        double f = std::pow(kPi * tau_r, -0.5) * std::tanh(2.0 * R / tau_r) *
                   std::exp(-(R - 1.0) * (R - 1.0) / tau_r);
        acc += (i == 0 || i == grid) ? 0.5 * f : f;
    }
    return 1.0 - acc * h;
}

}  // namespace sapit::oracle
