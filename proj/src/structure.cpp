#include "twistlat/structure.hpp"

#include <cmath>

namespace twistlat {

namespace {

cplx form(const JordanData& jd, const Vec& x, const Vec& y) {
    return jd.form(x, y);
}

}  // namespace

cplx b_lambda(const JordanData& jd, const Vec& lam) {
    Vec lam0 = jd.pi0() * lam;
    return 0.5 * (form(jd, lam0, lam0) - form(jd, lam, lam));
}

std::vector<cplx> a_lambda(const JordanData& jd, const Vec& lam) {
    Vec lam0 = jd.pi0() * lam;
    auto p = apply_P(jd, -1, lam0);
    std::vector<cplx> coeffs(p.size());
    for (size_t j = 0; j < p.size(); ++j) coeffs[j] = 0.5 * form(jd, p[j], lam);
    coeffs[0] -= 0.5 * form(jd, lam0, lam0);
    return coeffs;
}

cplx c_lambda(const JordanData& jd, const Vec& lam) {
    // a(2 pi i) + b; equivalently ((P^-_{2 pi i} lam0 | lam) - |lam|^2)/2.
    return evaluate_poly(a_lambda(jd, lam), kTwoPiI) + b_lambda(jd, lam);
}

Vec tau_argument(const JordanData& jd, const Vec& lam) {
    return one_minus_phiu_over_n(jd) * (jd.pi0() * lam);
}

TwistConstants twist_constants(const JordanData& jd, const Vec& lam) {
    TwistConstants tc;
    tc.b = b_lambda(jd, lam);
    tc.a_poly = a_lambda(jd, lam);
    tc.c = evaluate_poly(tc.a_poly, kTwoPiI) + tc.b;
    tc.tau_arg = tau_argument(jd, lam);
    return tc;
}

cplx B_constant(const JordanData& jd, const Vec& lam, const Vec& mu) {
    cplx expo = 0.0;
    auto npow = jd.nilp_powers();
    for (const auto& blk : jd.blocks) {
        Vec pl = blk.projector * lam;
        double jfact = 1.0;
        for (int j = 0; j < jd.nilpotency_index; ++j) {
            if (j > 0) jfact *= double(j);
            Vec term = npow[size_t(j)] * pl;
            cplx pairing = form(jd, term, mu);
            if (std::abs(pairing) < 1e-300) continue;
            cplx cj = (j == 0 ? digamma(blk.alpha0_prime) + kEulerGamma
                              : polygamma(j, blk.alpha0_prime) / jfact);
            expo += cj * pairing;
        }
    }
    return std::exp(expo);
}

namespace {

// Euler-Maclaurin tail of sum_{k >= K} f(k) for f(k) = 1/(k+a)^s, integer s>=1.
cplx em_tail_power(const cplx& a, int s, long K) {
    const cplx x = a + double(K);
    if (s == 1) throw OutOfDomain("divergent tail");
    // integral + half term + first corrections
    cplx integral = std::pow(x, cplx(1.0 - s)) / double(s - 1);
    cplx half = 0.5 * std::pow(x, cplx(-double(s)));
    cplx d1 = double(s) * std::pow(x, cplx(-double(s) - 1.0)) / 12.0;
    cplx d3 = double(s) * double(s + 1) * double(s + 2) *
              std::pow(x, cplx(-double(s) - 3.0)) / 720.0;
    return integral + half + d1 - d3;
}

}  // namespace

cplx B_oracle(const JordanData& jd, const Vec& lam, const Vec& mu, long terms) {
    if (terms < 1000) throw BadInput("B_oracle needs at least 1000 terms");
    cplx expo = 0.0;
    auto npow = jd.nilp_powers();
    for (const auto& blk : jd.blocks) {
        const cplx a = blk.alpha0_prime;
        Vec pl = blk.projector * lam;

        // j = 0: telescoped pair sum_{k>=0} (t/(k+1) - t/(k+a)).
        const cplx t = form(jd, pl, mu);
        if (std::abs(t) > 1e-300) {
            cplx partial = 0.0;
            for (long k = 0; k < terms; ++k)
                partial += 1.0 / (double(k) + 1.0) - 1.0 / (double(k) + a);
            // tail of the difference: integrate log ratio + EM corrections
            const double K = double(terms);
            cplx tail = std::log((K + a) / (K + 1.0));
            tail += 0.5 * (1.0 / (K + 1.0) - 1.0 / (K + a));
            tail += (1.0 / ((K + 1.0) * (K + 1.0)) - 1.0 / ((K + a) * (K + a))) / 12.0;
            expo += t * (partial + tail);
        }

        // j >= 1: (-1)^{j+1} (N^j pi lam | mu) sum_{m in alpha+} m^{-(j+1)}.
        for (int j = 1; j < jd.nilpotency_index; ++j) {
            Vec term = npow[size_t(j)] * pl;
            cplx pairing = form(jd, term, mu);
            if (std::abs(pairing) < 1e-300) continue;
            cplx s = 0.0;
            for (long k = 0; k < terms; ++k)
                s += std::pow(double(k) + a, cplx(-double(j + 1)));
            s += em_tail_power(a, j + 1, terms);
            expo += std::pow(-1.0, j + 1) * pairing * s;
        }
    }
    return std::exp(expo);
}

cplx C_constant(const JordanData& jd, const Lattice& lattice, const IVec& lam,
                const IVec& mu) {
    if (lam.size() != lattice.rank || mu.size() != lattice.rank)
        throw NotLatticeVector("coordinate count does not match rank");

    const long long n2l = lattice.norm2(lam);
    const long long n2m = lattice.norm2(mu);
    const double parity_sign = ((n2l * n2m) % 2 + 2) % 2 == 0 ? 1.0 : -1.0;

    Vec lamc = to_complex(lam);
    Vec muc = to_complex(mu);
    Vec lam0 = jd.pi0() * lamc;

    cplx expo = cplx(0, kPi) * form(jd, lam0, muc);

    StarSplit split = star_split(jd, lamc);
    if (split.lambda_star.cwiseAbs().maxCoeff() > 1e-300) {
        Vec inv = solve_one_minus_phi_perp(jd, split.lambda_star);
        Vec v = (Mat::Identity(jd.dim, jd.dim) - jd.sigma) * inv;
        expo += kTwoPiI * form(jd, v, muc);
    }

    // (1/N)(pi i N (1+phi)/(1-phi) - 1) lam0 as -2 sum_j zeta(2j+2) N^{2j+1}.
    {
        Vec v = Vec::Zero(jd.dim);
        Vec npl = jd.nilp * lam0;  // N^{2j+1} lam0, j = 0 start
        int power = 1;
        while (power < jd.nilpotency_index &&
               npl.cwiseAbs().maxCoeff() > 1e-300) {
            v += -2.0 * zeta(cplx(double(power + 1), 0.0)) * npl;
            npl = jd.nilp * (jd.nilp * npl);
            power += 2;
        }
        expo += form(jd, v, muc);
    }

    return parity_sign * std::exp(expo);
}

PairConstants pair_constants(const JordanData& jd, const Lattice& lattice,
                             const IVec& lam, const IVec& mu) {
    PairConstants pc;
    pc.B = B_constant(jd, to_complex(lam), to_complex(mu));
    pc.C = C_constant(jd, lattice, lam, mu);
    return pc;
}

}  // namespace twistlat
