#include "sapit/posteriors.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "small_buf.hpp"

namespace sapit {

namespace {

constexpr double kTiny = 1e-300;
constexpr std::size_t kStackPts = 64;

// Writes the normalized mixture weights into w (caller-provided, size n).
void mixture_weights_into(cxd d, double tau_d, cxd p, double tau_p,
                          std::span<const double> pi, std::span<const cxd> s_points,
                          double* w, bool* underflow) {
    const std::size_t n = s_points.size();
    double tau = tau_d + tau_p;
    double maxlog = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double ll = -std::norm(d - p * s_points[i]) / tau;
        w[i] = (pi[i] > 0.0 ? std::log(pi[i]) : -745.0) + ll;
        maxlog = std::max(maxlog, w[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(w[i] - maxlog);
        sum += w[i];
    }
    if (!(sum > kTiny) || !std::isfinite(sum)) {
        if (underflow) *underflow = true;
        std::fill(w, w + n, 1.0 / static_cast<double>(n));
        return;
    }
    for (std::size_t i = 0; i < n; ++i) w[i] /= sum;
}

}  // namespace

std::vector<double> mixture_weights(cxd d, double tau_d, cxd p, double tau_p,
                                    std::span<const double> pi,
                                    std::span<const cxd> s_points, bool* underflow) {
    std::vector<double> w(s_points.size());
    mixture_weights_into(d, tau_d, p, tau_p, pi, s_points, w.data(), underflow);
    return w;
}

void posterior_uc(cxd d, double tau_d, cxd p, double tau_p,
                  std::span<const double> pi, std::span<const cxd> s_points,
                  Moments& u_out, Moments& c_out) {
    bool uf = false;
    SmallBuf<double, kStackPts> w(s_points.size());
    mixture_weights_into(d, tau_d, p, tau_p, pi, s_points, w.data(), &uf);
    double tbar = tau_p * tau_d / (tau_p + tau_d);
    cxd u_mean = 0.0, c_mean = 0.0;
    double u_m2 = 0.0, c_m2 = 0.0;
    for (std::size_t i = 0; i < s_points.size(); ++i) {
        cxd s = s_points[i];
        cxd mu = tbar * (p * s / tau_p + d / tau_d);
        cxd mc = tbar * (p / tau_p + d / (s * tau_d));
        u_mean += w[i] * mu;
        c_mean += w[i] * mc;
        u_m2 += w[i] * (tbar + std::norm(mu));
        c_m2 += w[i] * (tbar + std::norm(mc));
    }
    u_out.mean = u_mean;
    u_out.var = std::max(u_m2 - std::norm(u_mean), 0.0);
    u_out.underflow = uf;
    c_out.mean = c_mean;
    c_out.var = std::max(c_m2 - std::norm(c_mean), 0.0);
    c_out.underflow = uf;
}

Moments posterior_u(cxd d, double tau_d, cxd p, double tau_p,
                    std::span<const double> pi, std::span<const cxd> s_points) {
    Moments u, c;
    posterior_uc(d, tau_d, p, tau_p, pi, s_points, u, c);
    return u;
}

Moments posterior_c(cxd d, double tau_d, cxd p, double tau_p,
                    std::span<const double> pi, std::span<const cxd> s_points) {
    Moments u, c;
    posterior_uc(d, tau_d, p, tau_p, pi, s_points, u, c);
    return c;
}

Moments posterior_x(cxd r, double tau_r, cxd o, double tau_o,
                    std::span<const double> prior, std::span<const cxd> points,
                    double* post) {
    const std::size_t n = points.size();
    SmallBuf<double, kStackPts> logp(n);
    double maxlog = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double lp = prior[i] > 0.0 ? std::log(prior[i]) : -745.0;
        if (std::isfinite(tau_r)) lp -= std::norm(r - points[i]) / tau_r;
        if (std::isfinite(tau_o)) lp -= std::norm(o - points[i]) / tau_o;
        logp[i] = lp;
        maxlog = std::max(maxlog, lp);
    }
    Moments m;
    double sum = 0.0;
    cxd mean = 0.0;
    double m2 = 0.0;
    SmallBuf<double, kStackPts> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(logp[i] - maxlog);
        sum += w[i];
    }
    if (!(sum > kTiny)) {
        m.underflow = true;
        std::fill(w.data(), w.data() + n, 1.0);
        sum = static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        w[i] /= sum;
        mean += w[i] * points[i];
        m2 += w[i] * std::norm(points[i]);
        if (post) post[i] = w[i];
    }
    m.mean = mean;
    m.var = std::max(m2 - std::norm(mean), 0.0);
    return m;
}

Moments posterior_s(std::span<const cxd> d, std::span<const cxd> p, double tau_d,
                    double tau_p, std::span<const double> alpha,
                    std::span<const cxd> s_points, double* post) {
    if (d.size() != p.size()) throw std::invalid_argument("posterior_s: size mismatch");
    const std::size_t n = s_points.size();
    double tau = tau_d + tau_p;
    SmallBuf<double, kStackPts> logp(n);
    double maxlog = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double lp = alpha[i] > 0.0 ? std::log(alpha[i]) : -745.0;
        for (std::size_t t = 0; t < d.size(); ++t)
            lp -= std::norm(d[t] - p[t] * s_points[i]) / tau;
        logp[i] = lp;
        maxlog = std::max(maxlog, lp);
    }
    Moments m;
    double sum = 0.0;
    cxd mean = 0.0;
    double m2 = 0.0;
    SmallBuf<double, kStackPts> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(logp[i] - maxlog);
        sum += w[i];
    }
    if (!(sum > kTiny)) {
        m.underflow = true;
        std::fill(w.data(), w.data() + n, 1.0);
        sum = static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        w[i] /= sum;
        mean += w[i] * s_points[i];
        m2 += w[i] * std::norm(s_points[i]);
        if (post) post[i] = w[i];
    }
    m.mean = mean;
    m.var = std::max(m2 - std::norm(mean), 0.0);
    return m;
}

void compute_pi(std::span<const cxd> d, std::span<const cxd> p, double tau_d,
                double tau_p, std::span<const double> alpha,
                std::span<const cxd> s_points, double* pi_out) {
    const std::size_t T = d.size();
    const std::size_t n = s_points.size();
    double tau = tau_d + tau_p;
    // Per-slot log-likelihoods; pi_t excludes slot t from the product.
    SmallBuf<double, 512> slot_ll(T * n);
    SmallBuf<double, kStackPts> total(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = alpha[i] > 0.0 ? std::log(alpha[i]) : -745.0;
        for (std::size_t t = 0; t < T; ++t) {
            double ll = -std::norm(d[t] - p[t] * s_points[i]) / tau;
            slot_ll[t * n + i] = ll;
            acc += ll;
        }
        total[i] = acc;
    }
    for (std::size_t t = 0; t < T; ++t) {
        double maxlog = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            maxlog = std::max(maxlog, total[i] - slot_ll[t * n + i]);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double w = std::exp(total[i] - slot_ll[t * n + i] - maxlog);
            pi_out[t * n + i] = w;
            sum += w;
        }
        if (!(sum > kTiny)) {
            for (std::size_t i = 0; i < n; ++i) pi_out[t * n + i] = 1.0 / n;
        } else {
            for (std::size_t i = 0; i < n; ++i) pi_out[t * n + i] /= sum;
        }
    }
}

}  // namespace sapit
