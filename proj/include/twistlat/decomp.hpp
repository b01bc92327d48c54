#pragma once

#include <vector>

#include "twistlat/lattice.hpp"
#include "twistlat/types.hpp"

namespace twistlat {

enum class SignClass { Zero, Plus, Minus };

// One semisimple eigenvalue of sigma together with its spectral projector.
struct EigenBlock {
    cplx eigenvalue;    // lambda_sigma
    cplx alpha0;        // -1 < Re alpha0 <= 0, exp(-2 pi i alpha0) = eigenvalue
    cplx alpha0_prime;  // shifted representative
    Mat projector;      // pi_alpha, d x d
    SignClass sign_class = SignClass::Zero;
};

struct DecompConfig {
    double tol = 1e-10;
};

// Multiplicative decomposition phi = sigma exp(-2 pi i N) on h = C (x) Q.
struct JordanData {
    int dim = 0;
    Mat phi;     // complexified automorphism
    Mat sigma;   // semisimple part
    Mat nilp;    // N with phi = sigma exp(-2 pi i N)
    std::vector<EigenBlock> blocks;
    int nilpotency_index = 1;  // smallest k with N^k = 0
    double tol = 1e-10;

    Mat gram;  // complexified bilinear form (kept by value: no back-pointers)

    cplx form(const Vec& a, const Vec& b) const { return a.transpose() * gram * b; }

    // Projection onto the sigma-fixed subspace (zero matrix if absent).
    Mat pi0() const;
    bool has_fixed_block() const;
    int fixed_block_index() const;  // -1 if none

    const EigenBlock& block(int idx) const;
    int block_of_alpha0(const cplx& alpha0, double tol = 1e-8) const;

    Vec project(const Vec& a, int block_idx) const;

    // S and S' act as alpha0 (resp. alpha0') on each block.
    Mat s_matrix() const;
    Mat s_prime_matrix() const;

    // Powers of N, cached nowhere: dims are tiny.
    std::vector<Mat> nilp_powers() const;  // N^0 .. N^{nu-1}
};

struct StarSplit {
    Vec lambda0;
    Vec lambda_star;
};

cplx alpha0_of(const cplx& eigenvalue);
cplx alpha0_prime_of(const cplx& alpha0);
SignClass sign_class_of(const cplx& alpha0);

JordanData jordan_chevalley(const Lattice& lattice,
                            const LatticeAutomorphism& phi,
                            const DecompConfig& config = {});

StarSplit star_split(const JordanData& jd, const Vec& lam);

// P^{+-} as a polynomial in zeta: coefficient j of the result multiplies
// zeta^j.  apply_P_at evaluates at a concrete zeta.
std::vector<Vec> apply_P(const JordanData& jd, int sign, const Vec& a);
Vec apply_P_at(const JordanData& jd, int sign, const cplx& zeta, const Vec& a);
std::vector<Vec> apply_P_skew(const JordanData& jd, const Vec& a);  // (P+ - P-)/2

// f(S'+N) a with derivatives[b][j] = f^(j)(alpha0'_b) for block b.
Vec nilpotent_calculus(const JordanData& jd,
                       const std::vector<std::vector<cplx>>& derivatives,
                       const Vec& a);

// (1 - e^{-2 pi i N})/N as a matrix (finite series).
Mat one_minus_phiu_over_n(const JordanData& jd);

// Restricted solve of (1 - sigma) x = v on the complement of the fixed
// subspace; v must lie there.
Vec solve_one_minus_sigma(const JordanData& jd, const Vec& v);
// Same for (1 - phi) on the complement of the fixed subspace.
Vec solve_one_minus_phi_perp(const JordanData& jd, const Vec& v);

}  // namespace twistlat
