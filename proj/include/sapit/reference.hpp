#pragma once

#include "sapit/channel.hpp"

// Naive serial implementations of the dense linear-algebra steps of the
// detector (plain triple loops, no Eigen products, no OpenMP). They exist as
// an independent reference for the parallel kernels: unit tests compare
// results entry-wise and the benchmark target compares wall time.
namespace sapit::reference {

// D = MuU + (N / ||G||_F^2) G^H (Y - B)
CMat step_d(const CMat& G, const CMat& Y, const CMat& B, const CMat& MuU);

// P = F MuX - onsager * (MuC - Pprev)
CMat step_p(const CMat& F, const CMat& MuX, const CMat& MuC, const CMat& Pprev,
            double onsager);

// R = MuX + (K / ||H||_F^2) H^H (Y - B)
CMat step_r(const CMat& H, const CMat& Y, const CMat& B, const CMat& MuX);

// O = MuX + (K / ||F||_F^2) * ratio * F^H (MuC - P)
CMat step_o(const CMat& F, const CMat& MuC, const CMat& P, const CMat& MuX,
            double ratio);

// B = G MuU + H MuX - onsager * (Y - Bprev); H may be empty (blocked link)
CMat step_b(const CMat& G, const CMat& H, const CMat& MuU, const CMat& MuX,
            const CMat& Y, const CMat& Bprev, double onsager);

}  // namespace sapit::reference
