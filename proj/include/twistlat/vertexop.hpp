#pragma once

#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "twistlat/fock.hpp"
#include "twistlat/group.hpp"
#include "twistlat/jet.hpp"
#include "twistlat/structure.hpp"

namespace twistlat {

// Logarithmic field in canonical form: finitely many coefficients indexed by
// (exponent sector, integer offset, zeta degree).  The field is
// sum_{e,j} z^e zeta^j Op_{e,j} with e = base[sector] + offset.
struct FieldKey {
    int sector = 0;
    int offset = 0;
    int zeta = 0;
    bool operator<(const FieldKey& o) const {
        return std::tie(sector, offset, zeta) < std::tie(o.sector, o.offset, o.zeta);
    }
};

class FieldAlgebra;

struct LogField {
    const FieldAlgebra* alg = nullptr;
    std::map<FieldKey, SparseOp> coeffs;

    bool empty() const;
};

struct FieldBounds {
    double exp_bound = 6.0;  // keep coefficients with |Re e| <= exp_bound
    int zeta_order = 4;
};

struct FieldCheck {
    std::string name;
    std::string identity;
    double residual = 0.0;
    double tolerance = 0.0;
    long compared_columns = 0;
    bool pass = false;
};

class FieldAlgebra {
public:
    FieldAlgebra(const FockModule& fm, const Lattice& lattice,
                 const Cocycle& eps, const EtaMap& eta, FieldBounds bounds);

    const FockModule& fock() const { return *fm_; }
    const JordanData& jordan() const { return fm_->jordan(); }
    const FieldBounds& bounds() const { return bounds_; }

    // exponent registry
    int sector_of(const cplx& base) const;
    cplx key_exponent(const FieldKey& k) const;
    FieldKey make_key(const cplx& e, int zeta) const;

    LogField zero_field() const;
    LogField identity_field() const;

    enum ModeParts { AllModes, CreationModes, AnnihilationAndZeroModes };
    LogField current(const Vec& a, ModeParts parts = AllModes) const;

    LogField e_factor(const IVec& lam, int sign) const;
    // theta as a field at exponent zero (or absorbed into sector shifts when
    // the zero mode is diagonal and N kills pi0 lam).
    LogField theta_field(const IVec& lam, bool absorb_diagonal) const;
    LogField vertex_operator(const IVec& lam, bool absorb_diagonal = true) const;

    LogField multiply(const LogField& a, const LogField& b) const;
    LogField add(const LogField& a, const LogField& b) const;
    LogField scale(const LogField& a, const cplx& s) const;
    LogField shift_exponent(const LogField& a, const cplx& de) const;
    LogField mul_zeta_poly(const LogField& a, const std::vector<cplx>& poly) const;
    LogField d_z(const LogField& a) const;
    LogField exp_field(const LogField& x) const;

    // max |A - B| over coefficients in the window, exact columns only
    double compare(const LogField& a, const LogField& b, double exp_window,
                   int zeta_window) const;

    // U operator for an integral vector (canonical word).
    SparseOp u_matrix(const IVec& lam) const;

    // ---- identity checks ----
    FieldCheck check_heisenberg_commutators(int mode_bound) const;
    FieldCheck check_aUcomm(const IVec& lam, int mode_bound) const;
    FieldCheck check_emodes(const IVec& lam, int mode_bound) const;
    FieldCheck check_hvobrext(const IVec& lam, int mode_bound) const;
    FieldCheck check_phi_equivariance(const IVec& lam) const;
    FieldCheck check_theta_group_law(const IVec& lam, const IVec& mu) const;
    FieldCheck check_theta_derivative_lemma(const IVec& lam) const;
    FieldCheck check_dz_lemma(const IVec& lam) const;
    FieldCheck check_current_delta_commutator(const Vec& a, const IVec& lam,
                                              int mode_bound) const;
    FieldCheck check_exp_product(const IVec& lam, const IVec& mu) const;

    // n-th product of two exponential-type vertex operators.
    LogField nth_product_exponentials(const IVec& lam, const IVec& mu, int n,
                                      int locality) const;
    FieldCheck check_nth_product_identity(const IVec& lam, const IVec& mu) const;
    // same with the locality bound raised by one
    FieldCheck check_nth_product_stability(const IVec& lam, const IVec& mu) const;

    // n-th products of two currents.
    LogField nth_product_currents(const Vec& a, const Vec& b, int n) const;
    FieldCheck check_current_products(const Vec& a, const Vec& b) const;

    // coincident-limit product check through the slow B oracle
    FieldCheck product_limit_check(const IVec& lam, const IVec& mu,
                                   long oracle_terms = 20000) const;

private:
    const FockModule* fm_;
    const Lattice* lattice_;
    const Cocycle* eps_;
    const EtaMap* eta_;
    FieldBounds bounds_;

    mutable std::vector<cplx> bases_;

    LogField e_factor_exponent(const IVec& lam, int sign) const;
    void trim(LogField& f) const;
};

// Scalar two-sided locality transport check (no Fock module needed).
struct LocalityPoint {
    cplx ratio;      // z2 / z1
    double residual; // |lhs - rhs| / max(1, |lhs|)
};

std::vector<LocalityPoint> scalar_locality_check(const JordanData& jd,
                                                 const Lattice& lattice,
                                                 const IVec& lam,
                                                 const IVec& mu,
                                                 const std::vector<cplx>& ratios);

}  // namespace twistlat
