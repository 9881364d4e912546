#include <doctest.h>

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

}  // namespace

TEST_CASE("serial reference kernels agree with the parallel linear algebra") {
    const int M = 17, N = 23, K = 5, L = 7;  // deliberately non-round sizes
    RngStream rng(31337, 0);
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

    SUBCASE("step_d") {
        CMat ref = reference::step_d(G, Y, B, MuU);
        CMat fast = MuU + (N / G.squaredNorm()) * (G.adjoint() * (Y - B));
        CHECK((ref - fast).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("step_p") {
        const double onsager = 0.37;
        CMat ref = reference::step_p(F, MuX, MuC, Pprev, onsager);
        CMat fast = F * MuX - onsager * (MuC - Pprev);
        CHECK((ref - fast).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("step_r") {
        CMat ref = reference::step_r(H, Y, B, MuX);
        CMat fast = MuX + (K / H.squaredNorm()) * (H.adjoint() * (Y - B));
        CHECK((ref - fast).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("step_o") {
        const double ratio = 1.42;
        CMat ref = reference::step_o(F, MuC, P, MuX, ratio);
        CMat fast = MuX + (K / F.squaredNorm()) * ratio * (F.adjoint() * (MuC - P));
        CHECK((ref - fast).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("step_b with direct link") {
        const double onsager = 0.81;
        CMat ref = reference::step_b(G, H, MuU, MuX, Y, B, onsager);
        CMat fast = G * MuU + H * MuX - onsager * (Y - B);
        CHECK((ref - fast).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("step_b blocked direct link") {
        const double onsager = 0.81;
        CMat empty;
        CMat ref = reference::step_b(G, empty, MuU, MuX, Y, B, onsager);
        CMat fast = G * MuU - onsager * (Y - B);
        CHECK((ref - fast).cwiseAbs().maxCoeff() < 1e-10);
    }
}
