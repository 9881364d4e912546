// Compares the serial reference kernels against the parallel Eigen/OpenMP
// implementations used by the detector: correctness first, then wall time.

#include <chrono>
#include <cstdio>
#include <functional>

#include "sapit/reference.hpp"
#include "sapit/rng.hpp"

using namespace sapit;

namespace {

CMat random_cmat(int r, int c, RngStream& rng) {
    CMat m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = rng.cgaussian(0.0, 1.0);
    return m;
}

double time_best(const std::function<void()>& fn, int reps = 5) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int N = 512, M = 512, K = 64, L = 128;
    if (argc == 5) {
        N = std::atoi(argv[1]);
        M = std::atoi(argv[2]);
        K = std::atoi(argv[3]);
        L = std::atoi(argv[4]);
    }
    std::printf("kernel benchmark: N=%d M=%d K=%d columns=%d\n", N, M, K, L);

    RngStream rng(1, 0);
    CMat G = random_cmat(M, N, rng);
    CMat H = random_cmat(M, K, rng);
    CMat F = random_cmat(N, K, rng);
    CMat Y = random_cmat(M, L, rng);
    CMat B = random_cmat(M, L, rng);
    CMat MuU = random_cmat(N, L, rng);
    CMat MuC = random_cmat(N, L, rng);
    CMat MuX = random_cmat(K, L, rng);
    CMat Pprev = random_cmat(N, L, rng);
    CMat P = random_cmat(N, L, rng);

    struct Row {
        const char* name;
        std::function<CMat()> serial;
        std::function<CMat()> parallel;
    } rows[] = {
        {"step_d",
         [&] { return reference::step_d(G, Y, B, MuU); },
         [&] { return CMat(MuU + (N / G.squaredNorm()) * (G.adjoint() * (Y - B))); }},
        {"step_p",
         [&] { return reference::step_p(F, MuX, MuC, Pprev, 0.4); },
         [&] { return CMat(F * MuX - 0.4 * (MuC - Pprev)); }},
        {"step_r",
         [&] { return reference::step_r(H, Y, B, MuX); },
         [&] { return CMat(MuX + (K / H.squaredNorm()) * (H.adjoint() * (Y - B))); }},
        {"step_o",
         [&] { return reference::step_o(F, MuC, P, MuX, 1.3); },
         [&] {
             return CMat(MuX + (K / F.squaredNorm()) * 1.3 * (F.adjoint() * (MuC - P)));
         }},
        {"step_b",
         [&] { return reference::step_b(G, H, MuU, MuX, Y, B, 0.7); },
         [&] { return CMat(G * MuU + H * MuX - 0.7 * (Y - B)); }},
    };

    std::printf("%-8s %12s %12s %9s %11s\n", "kernel", "serial [ms]", "parallel [ms]",
                "speedup", "max |diff|");
    bool all_match = true;
    for (auto& row : rows) {
        CMat a = row.serial();
        CMat b = row.parallel();
        double diff = (a - b).cwiseAbs().maxCoeff();
        all_match = all_match && diff < 1e-9;
        double ts = time_best([&] { volatile auto r = row.serial()(0, 0); (void)r; });
        double tp = time_best([&] { volatile auto r = row.parallel()(0, 0); (void)r; });
        std::printf("%-8s %12.3f %12.3f %8.2fx %11.2e\n", row.name, ts * 1e3, tp * 1e3,
                    ts / tp, diff);
    }
    if (!all_match) {
        std::printf("MISMATCH between serial and parallel kernels\n");
        return 1;
    }
    return 0;
}
