#include "sapit/reference.hpp"

#include <complex>

namespace sapit::reference {

namespace {

using cxd = std::complex<double>;

double frob2(const CMat& A) {
    double s = 0.0;
    for (int j = 0; j < A.cols(); ++j)
        for (int i = 0; i < A.rows(); ++i) s += std::norm(A(i, j));
    return s;
}

// out = alpha * A^H * (X - Y), plain loops
CMat adj_mul_diff(const CMat& A, const CMat& X, const CMat& Y, double alpha) {
    CMat out(A.cols(), X.cols());
    for (int c = 0; c < X.cols(); ++c)
        for (int n = 0; n < A.cols(); ++n) {
            cxd acc(0.0, 0.0);
            for (int m = 0; m < A.rows(); ++m)
                acc += std::conj(A(m, n)) * (X(m, c) - Y(m, c));
            out(n, c) = alpha * acc;
        }
    return out;
}

CMat mul(const CMat& A, const CMat& X) {
    CMat out(A.rows(), X.cols());
    for (int c = 0; c < X.cols(); ++c)
        for (int m = 0; m < A.rows(); ++m) {
            cxd acc(0.0, 0.0);
            for (int k = 0; k < A.cols(); ++k) acc += A(m, k) * X(k, c);
            out(m, c) = acc;
        }
    return out;
}

}  // namespace

CMat step_d(const CMat& G, const CMat& Y, const CMat& B, const CMat& MuU) {
    CMat t = adj_mul_diff(G, Y, B, static_cast<double>(G.cols()) / frob2(G));
    for (int c = 0; c < t.cols(); ++c)
        for (int n = 0; n < t.rows(); ++n) t(n, c) += MuU(n, c);
    return t;
}

CMat step_p(const CMat& F, const CMat& MuX, const CMat& MuC, const CMat& Pprev,
            double onsager) {
    CMat t = mul(F, MuX);
    for (int c = 0; c < t.cols(); ++c)
        for (int n = 0; n < t.rows(); ++n)
            t(n, c) -= onsager * (MuC(n, c) - Pprev(n, c));
    return t;
}

CMat step_r(const CMat& H, const CMat& Y, const CMat& B, const CMat& MuX) {
    CMat t = adj_mul_diff(H, Y, B, static_cast<double>(H.cols()) / frob2(H));
    for (int c = 0; c < t.cols(); ++c)
        for (int k = 0; k < t.rows(); ++k) t(k, c) += MuX(k, c);
    return t;
}

CMat step_o(const CMat& F, const CMat& MuC, const CMat& P, const CMat& MuX,
            double ratio) {
    CMat t = adj_mul_diff(F, MuC, P,
                          static_cast<double>(F.cols()) / frob2(F) * ratio);
    for (int c = 0; c < t.cols(); ++c)
        for (int k = 0; k < t.rows(); ++k) t(k, c) += MuX(k, c);
    return t;
}

CMat step_b(const CMat& G, const CMat& H, const CMat& MuU, const CMat& MuX,
            const CMat& Y, const CMat& Bprev, double onsager) {
    CMat t = mul(G, MuU);
    if (H.size() > 0) {
        CMat hx = mul(H, MuX);
        for (int c = 0; c < t.cols(); ++c)
            for (int m = 0; m < t.rows(); ++m) t(m, c) += hx(m, c);
    }
    for (int c = 0; c < t.cols(); ++c)
        for (int m = 0; m < t.rows(); ++m)
            t(m, c) -= onsager * (Y(m, c) - Bprev(m, c));
    return t;
}

}  // namespace sapit::reference
