#pragma once

#include <string>
#include <vector>

#include "twistlat/types.hpp"

namespace twistlat {

struct SpecFunConfig {
    int series_cutoff = 2000;  // >= 100
    double abs_tol = 1e-12;
    int richardson_levels = 6;

    void validate() const {
        if (series_cutoff < 100) throw BadInput("series_cutoff must be >= 100");
        if (abs_tol <= 0) throw BadInput("abs_tol must be positive");
    }
};

cplx gamma_fn(const cplx& z);  // Lanczos

cplx digamma(const cplx& a);
cplx polygamma(int j, const cplx& a);  // j >= 1

// Hurwitz-type sum  sum_{m>=0} (m+a)^{-s},  Re s > 1.
cplx hurwitz_sum(const cplx& s, const cplx& a);

cplx lerch_phi(const cplx& z, const cplx& s, const cplx& a,
               const SpecFunConfig& cfg = {});

// Transported evaluation of Phi(z,1,a) for |z| > 1 off the real axis.
cplx lerch_reflect(const cplx& z, const cplx& a);

cplx zeta(const cplx& s);
cplx polylog(const cplx& s, const cplx& z);

struct IdentityCheck {
    std::string name;
    std::string identity;  // which relation was exercised
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

std::vector<IdentityCheck> specfun_selftest(Rng& rng,
                                            const SpecFunConfig& cfg = {});

}  // namespace twistlat
