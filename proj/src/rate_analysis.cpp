#include "sapit/rate_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sapit {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Gauss-Hermite nodes/weights (physicists' weight e^{-t^2}) via Golub-Welsch.
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        double b = std::sqrt(i / 2.0);
        J(i, i - 1) = J(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        weights[i] = std::sqrt(kPi) * v0 * v0;
    }
}

double log_mean_exp(const std::vector<double>& lp) {
    double mx = *std::max_element(lp.begin(), lp.end());
    double s = 0.0;
    for (double v : lp) s += std::exp(v - mx);
    return mx + std::log(s / lp.size());
}

// Cumulative integral of a decaying MMSE curve on a dense log grid. Path
// segments take differences of this curve, so a segment spanning many
// decades of SNR (the fixed point jumping across a phase transition) is
// still integrated on the fine grid instead of one giant trapezoid.
class CumCurve {
public:
    template <typename F>
    CumCurve(F&& f, double rho_hi, int grid_points) {
        const double lo = 1e-8;
        const int n = std::max(grid_points, 64);
        rho_.reserve(n + 1);
        cum_.reserve(n + 1);
        rho_.push_back(0.0);
        cum_.push_back(0.0);
        double acc = 0.0, prev_r = 0.0, prev_f = f(0.0, 0);
        for (int i = 0; i < n; ++i) {
            double r = lo * std::pow(rho_hi / lo, static_cast<double>(i) / (n - 1));
            double fi = f(r, i + 1);
            acc += 0.5 * (prev_f + fi) * (r - prev_r);
            rho_.push_back(r);
            cum_.push_back(acc);
            prev_r = r;
            prev_f = fi;
        }
    }

    // Integral of f over [0, rho]; clamps beyond the grid where f has decayed.
    double at(double rho) const {
        if (!(rho > 0.0)) return 0.0;
        if (rho >= rho_.back()) return cum_.back();
        auto it = std::upper_bound(rho_.begin(), rho_.end(), rho);
        std::size_t j = static_cast<std::size_t>(it - rho_.begin());
        double t = (rho - rho_[j - 1]) / (rho_[j] - rho_[j - 1]);
        return cum_[j - 1] + t * (cum_[j] - cum_[j - 1]);
    }

private:
    std::vector<double> rho_, cum_;
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a * 0x9E3779B97F4A7C15ull + b + 1;
    z ^= z >> 30; z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    return z ^ (z >> 31);
}

}  // namespace

double psi_x_un(double rho, const Constellation& c, int gh_points) {
    if (rho < 0.0) throw std::invalid_argument("psi_x_un: rho must be >= 0");
    if (rho == 0.0) return c.avg_power();
    std::vector<double> t, w;
    gauss_hermite(gh_points, t, w);
    const int ord = c.size();
    const double inv_sqrt_rho = 1.0 / std::sqrt(rho);
    double acc = 0.0;
    // y = x + (t1 + i t2)/sqrt(rho), noise CN(0, 1/rho)
#pragma omp parallel for collapse(2) reduction(+ : acc) schedule(static)
    for (int a = 0; a < gh_points; ++a)
        for (int b = 0; b < gh_points; ++b) {
            double wab = w[a] * w[b] / kPi;
            double local = 0.0;
            for (int xi = 0; xi < ord; ++xi) {
                cxd y = c.points[xi] + cxd(t[a], t[b]) * inv_sqrt_rho;
                double mx = -1e300;
                std::vector<double> lp(ord);
                for (int j = 0; j < ord; ++j) {
                    lp[j] = -rho * std::norm(y - c.points[j]);
                    mx = std::max(mx, lp[j]);
                }
                double z = 0.0, e2 = 0.0;
                cxd m(0.0, 0.0);
                for (int j = 0; j < ord; ++j) {
                    double p = std::exp(lp[j] - mx);
                    z += p;
                    m += p * c.points[j];
                    e2 += p * std::norm(c.points[j]);
                }
                local += e2 / z - std::norm(m / z);
            }
            acc += wab * local / ord;
        }
    return acc;
}

double awgn_mutual_information(const Constellation& c, double rho, int gh_points) {
    if (rho <= 0.0) return 0.0;
    std::vector<double> t, w;
    gauss_hermite(gh_points, t, w);
    const int ord = c.size();
    const double inv_sqrt_rho = 1.0 / std::sqrt(rho);
    double acc = 0.0;
#pragma omp parallel for collapse(2) reduction(+ : acc) schedule(static)
    for (int a = 0; a < gh_points; ++a)
        for (int b = 0; b < gh_points; ++b) {
            double wab = w[a] * w[b] / kPi;
            double local = 0.0;
            for (int xi = 0; xi < ord; ++xi) {
                cxd y = c.points[xi] + cxd(t[a], t[b]) * inv_sqrt_rho;
                std::vector<double> lp(ord);
                for (int j = 0; j < ord; ++j)
                    lp[j] = -rho * (std::norm(y - c.points[j]) -
                                    std::norm(y - c.points[xi]));
                local -= log_mean_exp(lp);
            }
            acc += wab * local / ord;
        }
    return acc;  // nats
}

double psi_s_un(double rho, const RisPhaseSet& phases, int T, int mc_samples,
                std::uint64_t seed, double* stderr_out) {
    if (rho < 0.0) throw std::invalid_argument("psi_s_un: rho must be >= 0");
    const auto& pts = phases.points();
    const int ord = phases.size();
    std::vector<double> vals(mc_samples);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < mc_samples; ++i) {
        RngStream rng(seed, mix(0xAB5u, i));
        int truth = static_cast<int>(rng.uniform_int(ord));
        std::vector<cxd> p(T), d(T);
        double wsum = 0.0;
        for (int t = 0; t < T; ++t) {
            p[t] = rng.cgaussian(cxd(0, 0), 1.0);
            d[t] = rho > 0.0 ? rng.cgaussian(p[t] * pts[truth], 1.0 / rho)
                             : cxd(0.0, 0.0);
            wsum += std::norm(p[t]);
        }
        std::vector<double> lp(ord, 0.0);
        if (rho > 0.0)
            for (int j = 0; j < ord; ++j)
                for (int t = 0; t < T; ++t)
                    lp[j] -= rho * std::norm(d[t] - p[t] * pts[j]);
        double mx = *std::max_element(lp.begin(), lp.end());
        double z = 0.0;
        cxd m(0.0, 0.0);
        for (int j = 0; j < ord; ++j) {
            double q = std::exp(lp[j] - mx);
            z += q;
            m += q * pts[j];
        }
        double var = 1.0 - std::norm(m / z);  // unit-modulus alphabet
        vals[i] = wsum * var;
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= mc_samples;
    if (stderr_out) {
        double ss = 0.0;
        for (double v : vals) ss += (v - mean) * (v - mean);
        *stderr_out =
            std::sqrt(ss / (static_cast<double>(mc_samples) - 1.0) / mc_samples);
    }
    return mean;
}

EtaResult eta(double tau_x, double tau_s, const RateConfig& cfg) {
    SeConfig se = cfg.se;
    se.x_dec = DecoderModel{DecoderModel::Kind::Gaussian, tau_x, nullptr, {}, 0};
    se.s_dec = DecoderModel{DecoderModel::Kind::Gaussian, tau_s, nullptr, {}, 0};
    SeResult r = run_se(se);
    return {r.rho_x, r.rho_s, r.converged};
}

bool MonotonicPath::monotone() const {
    for (std::size_t i = 1; i < pts.size(); ++i)
        if (pts[i].first > pts[i - 1].first || pts[i].second > pts[i - 1].second)
            return false;
    return true;
}

MonotonicPath straight_path(double tau_max, int n_points) {
    MonotonicPath p;
    double lo = tau_max * 1e-12;
    for (int i = 0; i < n_points; ++i) {
        double t = tau_max * std::pow(lo / tau_max,
                                      static_cast<double>(i) / (n_points - 1));
        p.pts.emplace_back(t, t);
    }
    p.pts.emplace_back(0.0, 0.0);
    return p;
}

MonotonicPath random_staircase_path(double tau_max, int n_points, RngStream& rng) {
    double lo = tau_max * 1e-12;
    auto map = [&](double u) { return lo * std::pow(tau_max / lo, u); };
    std::vector<double> ux(n_points), us(n_points);
    for (int i = 0; i < n_points; ++i) {
        ux[i] = rng.uniform();
        us[i] = rng.uniform();
    }
    std::sort(ux.rbegin(), ux.rend());
    std::sort(us.rbegin(), us.rend());
    MonotonicPath p;
    p.pts.emplace_back(tau_max, tau_max);
    for (int i = 0; i < n_points; ++i) p.pts.emplace_back(map(ux[i]), map(us[i]));
    p.pts.emplace_back(0.0, 0.0);
    return p;
}

bool check_convergence(const MonotonicPath& path, const DecoderCurves& curves,
                       const RateConfig& cfg) {
    if (!path.monotone())
        throw std::invalid_argument("check_convergence: path is not monotone");
    for (const auto& [tx, ts] : path.pts) {
        EtaResult e = eta(tx, ts, cfg);
        if (!(curves.fx.rho_at(tx) < e.rho_x) || !(curves.fs.rho_at(ts) < e.rho_s))
            return false;
    }
    return true;
}

namespace {

struct IntegralSplit {
    double rx = 0.0, rs = 0.0;
};

// Line integral of (K psi_x_un(rho_x), c_s psi_s_un(rho_s)) . d(rho_x, rho_s)
// along the eta image of the path. Each segment integrates psi on the dense
// cumulative grid between its endpoints.
IntegralSplit line_integral(const std::vector<EtaResult>& etas, double cK, double cS,
                            const CumCurve& cum_x, const CumCurve& cum_s) {
    IntegralSplit out;
    const int n = static_cast<int>(etas.size());
    for (int i = 1; i < n; ++i) {
        out.rx += cK * (cum_x.at(etas[i].rho_x) - cum_x.at(etas[i - 1].rho_x));
        out.rs += cS * (cum_s.at(etas[i].rho_s) - cum_s.at(etas[i - 1].rho_s));
    }
    return out;
}

}  // namespace

RateResult sum_rate(const RateConfig& cfg, int n_paths, std::uint64_t seed) {
    RateResult out;
    out.bits = cfg.bits;
    const double cK = static_cast<double>(cfg.se.K);
    const double cS =
        static_cast<double>(cfg.se.N - cfg.se.N_P) / static_cast<double>(cfg.se.T);
    if (cfg.se.K == 0) return out;

    EtaResult e0 = eta(cfg.tau_max, cfg.tau_max, cfg);
    out.converged = e0.converged;
    const double rho_hi = 1e13;  // past any variance-floor-clamped SNR
    CumCurve cum_x(
        [&](double r, int) { return psi_x_un(r, cfg.se.x_const, cfg.gh_points); },
        rho_hi, 3 * cfg.grid_points);
    CumCurve cum_s(
        [&](double r, int i) {
            return psi_s_un(r, cfg.se.s_phases, cfg.se.T, cfg.psi_s_mc,
                            mix(seed, 0xCAFEull + i));
        },
        rho_hi, 3 * cfg.grid_points);
    double lead_x = cK * cum_x.at(e0.rho_x);
    double lead_s = cS * cum_s.at(e0.rho_s);

    std::vector<MonotonicPath> paths;
    paths.push_back(straight_path(cfg.tau_max, cfg.path_points));
    RngStream prng(seed, 0x9A7Bull);
    while (static_cast<int>(paths.size()) < n_paths) {
        MonotonicPath p = random_staircase_path(cfg.tau_max, cfg.path_points, prng);
        if (p.monotone()) paths.push_back(std::move(p));
    }

    double best = -1e300;
    IntegralSplit best_split;
    for (std::size_t pi = 0; pi < paths.size(); ++pi) {
        const auto& path = paths[pi];
        std::vector<EtaResult> etas(path.pts.size());
        for (std::size_t i = 0; i < path.pts.size(); ++i) {
            etas[i] = eta(path.pts[i].first, path.pts[i].second, cfg);
            if (!etas[i].converged) out.converged = false;
        }
        IntegralSplit s = line_integral(etas, cK, cS, cum_x, cum_s);
        double val = s.rx + s.rs;
        out.path_values.push_back(val);
        if (val > best) {
            best = val;
            best_split = s;
            out.best_path = static_cast<int>(pi);
            out.best_path_pts = path.pts;
        }
    }

    out.R_T = lead_x + best_split.rx;
    out.R_R = lead_s + best_split.rs;
    if (cfg.bits) {
        out.R_T /= std::log(2.0);
        out.R_R /= std::log(2.0);
    }
    out.sum = out.R_T + out.R_R;
    return out;
}

RateResult separate_rate(const RateConfig& cfg) {
    RateResult out;
    out.bits = cfg.bits;
    if (cfg.se.K == 0) return out;
    SeConfig se = cfg.se;
    se.x_dec = DecoderModel{};  // uniform priors
    se.s_dec = DecoderModel{};
    SeResult r = run_se(se);
    out.converged = r.converged;
    const double cK = static_cast<double>(cfg.se.K);
    const double cS =
        static_cast<double>(cfg.se.N - cfg.se.N_P) / static_cast<double>(cfg.se.T);
    const double rho_hi = 1e13;
    CumCurve cum_x(
        [&](double rho, int) { return psi_x_un(rho, cfg.se.x_const, cfg.gh_points); },
        rho_hi, 3 * cfg.grid_points);
    CumCurve cum_s(
        [&](double rho, int i) {
            return psi_s_un(rho, cfg.se.s_phases, cfg.se.T, cfg.psi_s_mc,
                            mix(cfg.se.seed, 0x5E9ull + i));
        },
        rho_hi, 3 * cfg.grid_points);
    out.R_T = cK * cum_x.at(r.rho_x);
    out.R_R = cS * cum_s.at(r.rho_s);
    if (cfg.bits) {
        out.R_T /= std::log(2.0);
        out.R_R /= std::log(2.0);
    }
    out.sum = out.R_T + out.R_R;
    return out;
}

}  // namespace sapit
