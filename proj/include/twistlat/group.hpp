#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "twistlat/decomp.hpp"
#include "twistlat/lattice.hpp"
#include "twistlat/structure.hpp"

namespace twistlat {

// Element c U_lam e^h with c != 0, lam integral, h in the sigma-fixed
// subspace.
struct GroupElement {
    cplx c{1.0, 0.0};
    IVec lam;
    Vec h;
};

struct GNormalForm {
    GroupElement rep;  // U-index reduced to the canonical coset representative
    IVec shift;        // mu with rep = x * g_mu^{-1}
};

struct SmithForm {
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> u, v, d;
};

SmithForm smith_normal_form(const IMat& m);

class GroupContext {
public:
    GroupContext(const Lattice& lattice, const LatticeAutomorphism& phi,
                 const JordanData& jd, const Cocycle& eps, const EtaMap& eta);

    const Lattice& lattice() const { return *lattice_; }
    const JordanData& jordan() const { return *jd_; }
    const Cocycle& epsilon() const { return *eps_; }
    const EtaMap& eta() const { return *eta_; }

    GroupElement identity() const;
    GroupElement u_element(const IVec& lam) const;
    GroupElement scalar_element(const cplx& c) const;
    GroupElement exp_element(const Vec& h0) const;

    GroupElement multiply(const GroupElement& x, const GroupElement& y) const;
    GroupElement inverse(const GroupElement& x) const;

    GroupElement tau_element(const IVec& lam) const;
    GroupElement tau_element_h(const Vec& h) const;  // tau of an h-vector
    GroupElement g_element(const IVec& lam) const;

    // Max residual between two elements: infinity when the U-indices differ.
    double distance(const GroupElement& x, const GroupElement& y) const;
    bool is_identity(const GroupElement& x, double tol) const;

    // K-coefficient shift of the mode (a, m) under conjugation by x.
    cplx adjoint_mode_shift(const GroupElement& x, const Vec& a,
                            const cplx& m) const;

    // Randomized commutator test against generator-built elements.
    struct CentralityReport {
        int trials = 0;
        double max_residual = 0.0;
        bool central = false;
    };
    CentralityReport check_central(const GroupElement& x, int trials, Rng& rng,
                                   double tol = 1e-9) const;

    GNormalForm reduce_mod_Nphi(const GroupElement& x) const;

    cplx B_cached(const IVec& lam, const IVec& mu) const;
    size_t cache_size() const;

    GroupElement random_element(Rng& rng, int coord_bound = 2) const;

private:
    const Lattice* lattice_;
    const JordanData* jd_;
    const Cocycle* eps_;
    const EtaMap* eta_;

    IMat phi_int_;
    Mat pi0_;
    Mat tau_matrix_;  // (1 - phi)/N restricted through pi0
    SmithForm snf_;   // of (1 - phi) over the integers
    std::vector<IVec> kernel_basis_;  // integer kernel of (1 - phi)
    Mat kernel_tau_;                  // tau arguments of the kernel basis
    Mat kernel_solver_;
    bool unimodular_b_ = true;

    mutable std::map<std::vector<int>, cplx> bcache_;
    mutable std::mutex cache_mutex_;
};

}  // namespace twistlat
