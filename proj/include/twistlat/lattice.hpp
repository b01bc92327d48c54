#pragma once

#include <map>
#include <string>
#include <vector>

#include "twistlat/types.hpp"

namespace twistlat {

// Integral lattice Q of rank d with nondegenerate symmetric Gram matrix.
struct Lattice {
    int rank = 0;
    IMat gram;                        // d x d, symmetric, det != 0
    std::vector<std::string> labels;  // basis labels, size d

    void validate() const;

    long long pair(const IVec& a, const IVec& b) const;  // (a|b), exact
    long long norm2(const IVec& a) const { return pair(a, a); }

    cplx pair(const Vec& a, const Vec& b) const;  // bilinear (no conjugation)
    Mat gram_c() const;
};

// Form-preserving lattice automorphism, column action on basis coordinates.
struct LatticeAutomorphism {
    IMat matrix;

    void validate(const Lattice& lattice) const;
    IVec apply(const IVec& v) const { return matrix * v; }
};

// Bimultiplicative sign 2-cocycle stored on ordered basis pairs.
struct Cocycle {
    IMat table;  // entries +-1; table(i,j) = eps(e_i, e_j)

    int eval(const IVec& lam, const IVec& mu) const;
};

struct CocycleFailure {
    std::string condition;
    IVec lam, mu;
};

struct CocycleReport {
    int trials = 0;
    std::vector<CocycleFailure> failures;
    bool pass() const { return failures.empty(); }
};

// Upper-triangular normalization: +1 above the diagonal, the diagonal from
// the self-pairing condition, below the diagonal whatever the symmetrized
// product rule forces.
Cocycle build_epsilon(const Lattice& lattice);

CocycleReport verify_epsilon(const Cocycle& c, const Lattice& lattice,
                             int trials, Rng& rng);

// Sign map eta compatible with eps(phi.,phi.) via the recursion
// eta(l+m) = eta(l)eta(m)eps(l,m)/eps(phi l,phi m).  Owns copies of its
// inputs so it can be moved around freely.
class EtaMap {
public:
    EtaMap() = default;
    EtaMap(Lattice lattice, LatticeAutomorphism phi, Cocycle eps,
           IVec basis_signs);

    int eval(const IVec& lam) const;

private:
    Lattice lattice_;
    LatticeAutomorphism phi_;
    Cocycle eps_;
    IVec basis_signs_;
    mutable std::map<std::vector<int>, int> cache_;
};

// Basis values default to +1; falls back to searching the 2^d sign
// assignments if the sampled consistency check fails.
EtaMap build_eta(const Lattice& lattice, const LatticeAutomorphism& phi,
                 const Cocycle& eps, Rng& rng, int trials = 200);

// Same with prescribed basis signs (the compatible solutions form a torsor
// over sign characters; a module pins one of them).
EtaMap build_eta_with_signs(const Lattice& lattice,
                            const LatticeAutomorphism& phi, const Cocycle& eps,
                            const IVec& basis_signs, Rng& rng,
                            int trials = 200);

}  // namespace twistlat
