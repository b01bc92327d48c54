#pragma once

#include <vector>

#include "twistlat/decomp.hpp"
#include "twistlat/specfun.hpp"

namespace twistlat {

// Scalar data attached to a single vector lambda.
struct TwistConstants {
    cplx b = 0.0;                // (|lam0|^2 - |lam|^2)/2
    std::vector<cplx> a_poly;    // coefficient j multiplies zeta^j
    cplx c = 0.0;                // a(2 pi i) + b
    Vec tau_arg;                 // ((1 - phi)/N) pi0 lam
};

struct PairConstants {
    cplx B = 1.0;
    cplx C = 1.0;
};

cplx b_lambda(const JordanData& jd, const Vec& lam);
std::vector<cplx> a_lambda(const JordanData& jd, const Vec& lam);
cplx c_lambda(const JordanData& jd, const Vec& lam);
Vec tau_argument(const JordanData& jd, const Vec& lam);
TwistConstants twist_constants(const JordanData& jd, const Vec& lam);

cplx B_constant(const JordanData& jd, const Vec& lam, const Vec& mu);

// Independent slow-series evaluation of B (per-mode sums with
// Euler-Maclaurin tails); `terms` explicit terms per sum, >= 1000.
cplx B_oracle(const JordanData& jd, const Vec& lam, const Vec& mu,
              long terms = 10000);

cplx C_constant(const JordanData& jd, const Lattice& lattice, const IVec& lam,
                const IVec& mu);

PairConstants pair_constants(const JordanData& jd, const Lattice& lattice,
                             const IVec& lam, const IVec& mu);

inline cplx evaluate_poly(const std::vector<cplx>& coeffs, const cplx& x) {
    cplx v = 0.0;
    for (int i = int(coeffs.size()) - 1; i >= 0; --i) v = v * x + coeffs[size_t(i)];
    return v;
}

}  // namespace twistlat
