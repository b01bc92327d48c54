#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "twistlat/decomp.hpp"
#include "twistlat/lattice.hpp"

namespace twistlat {

// ---------------------------------------------------------------------------
// Sparse operators on the truncated basis, with per-column exactness flags.
// A column is marked inexact when producing it dropped a state that fell
// outside the truncation windows; identity checks skip such columns.
// ---------------------------------------------------------------------------
struct SparseOp {
    int dim = 0;
    std::vector<std::vector<std::pair<int, cplx>>> cols;
    std::vector<char> inexact;

    explicit SparseOp(int d = 0) : dim(d), cols(size_t(d)), inexact(size_t(d), 0) {}

    static SparseOp identity(int d);
    static SparseOp zero(int d) { return SparseOp(d); }

    void add_entry(int col, int row, const cplx& v);
    void compress();

    SparseOp& operator+=(const SparseOp& other);
    SparseOp& operator*=(const cplx& s);
    friend SparseOp operator*(const SparseOp& a, const SparseOp& b);  // a after b
    friend SparseOp operator+(SparseOp a, const SparseOp& b) { a += b; return a; }
    friend SparseOp operator-(const SparseOp& a, const SparseOp& b);

    Vec apply(const Vec& v) const;  // dense apply, ignores flags

    bool column_exact(int col) const { return !inexact[size_t(col)]; }
    // max |a-b| over columns exact in both; entries compared sparsely
    static double max_diff_exact(const SparseOp& a, const SparseOp& b);
    double max_abs_exact() const;
    int exact_column_count() const;
};

// Operator-valued polynomial in zeta.
struct ZetaOp {
    std::vector<SparseOp> deg;  // deg[j] multiplies zeta^j

    int order() const { return int(deg.size()) - 1; }
};

// ---------------------------------------------------------------------------
// Zero-mode representation descriptors.
// ---------------------------------------------------------------------------
struct PolyVar {
    std::string name;
    int max_degree = 4;
    int exp_window = 1;   // exponential índex s ranges in [-exp_window, exp_window]
    cplx exp_unit = 1.0;  // basis factor e^{s * exp_unit * x}
};

struct QVar {
    std::string name;
    int charge_window = 2;
};

struct ZeroModeTerm {
    enum Kind { MultX, DerivX, Euler } kind = MultX;
    int var = 0;
    cplx coeff = 0.0;
};

struct ZeroModeDescriptor {
    std::vector<ZeroModeTerm> terms;
    cplx constant = 0.0;
};

struct UStep {
    enum Kind { Scalar, MultQ, PhaseEuler, ShiftX, ExpMultX } kind = Scalar;
    int var = 0;
    int power = 0;   // MultQ / ExpMultX
    cplx value = 0;  // Scalar / PhaseEuler / ShiftX
};

using UDescriptor = std::vector<UStep>;

struct ZeroModeRep {
    std::vector<PolyVar> poly_vars;
    std::vector<QVar> q_vars;
    Mat h0_basis;                              // columns span the fixed subspace
    std::vector<ZeroModeDescriptor> h0_ops;    // one per column
    std::vector<std::optional<UDescriptor>> u_gen;  // one per lattice generator
    // Optional per-block creation-variable dictionary (columns = vectors whose
    // negative modes are plain multiplication operators).
    std::map<int, Mat> osc_basis;
};

// Lagrangian-pair zero-mode rep for the Heisenberg part of h0 (no U data).
ZeroModeRep polarization_rep(const JordanData& jd);

// ---------------------------------------------------------------------------
// Canonical orthogonal blocks for the Virasoro construction.
// ---------------------------------------------------------------------------
struct CanonicalBlock {
    int type = 1;  // 1: paired 2l-dimensional, 2: odd-dimensional
    cplx alpha0 = 0.0;
    std::vector<Vec> v;  // canonical basis vectors in lattice coordinates
};

// Hyperbolic pairing for semisimple sigma = id (N = 0).
std::vector<CanonicalBlock> canonical_blocks_semisimple(const Lattice& lattice);

// ---------------------------------------------------------------------------
// Truncated generalized Verma module.
// ---------------------------------------------------------------------------
struct FockConfig {
    double cutoff = 3.0;
    long max_states = 200000;
    int zeta_order = 4;
};

struct BasisState {
    std::vector<std::pair<int, int>> osc;  // (creation var, power), sorted
    std::vector<int> xdeg, xexp;           // per poly var
    std::vector<int> qcharge;              // per q var
};

struct OscVar {
    int block = 0;
    int vec = 0;   // index into the block basis
    int t = 0;     // mode m = alpha0 + t
    cplx m = 0.0;
    double weight = 0.0;
};

class FockModule {
public:
    FockModule(const JordanData& jd, const Cocycle& eps, ZeroModeRep rep,
               FockConfig config);

    int dim() const { return int(states_.size()); }
    const FockConfig& config() const { return config_; }
    const JordanData& jordan() const { return *jd_; }
    const ZeroModeRep& rep() const { return rep_; }
    const std::vector<OscVar>& osc_vars() const { return osc_vars_; }
    const BasisState& state(int idx) const { return states_[size_t(idx)]; }
    double weight(int idx) const { return weights_[size_t(idx)]; }
    int vacuum_index() const { return vacuum_; }
    int find_state(const BasisState& s) const;  // -1 if absent

    std::map<double, int> weight_histogram() const;

    // Mode operators.  act_mode targets a block coset member m = alpha0 + t.
    SparseOp mode_op(const Vec& a, int block, int t) const;
    SparseOp zero_mode_op(const Vec& h) const;  // pi0 applied internally
    SparseOp k_op() const { return SparseOp::identity(dim()); }

    // Applies a mode strictly: throws TruncationExceeded when the image
    // leaves the window.
    Vec act_mode_strict(const Vec& a, int block, int t, const Vec& v) const;

    // U operators: canonical generator word with product-rule scalars.
    SparseOp u_op(const IVec& lam) const;

    // theta as an operator-valued polynomial in zeta (degree <= zeta_order).
    ZetaOp theta_op(const Vec& lam) const;
    // theta evaluated at zeta = 2 pi i through the exact primitive split.
    SparseOp tau_op(const Vec& lam) const;

    SparseOp virasoro(const std::vector<CanonicalBlock>& blocks, int k) const;

    // Structural data used by the field layer.
    int block_count() const { return int(jd_->blocks.size()); }
    cplx block_alpha0(int b) const { return jd_->blocks[size_t(b)].alpha0; }
    // Pairs (block index, offset) present among creation variables.
    std::vector<std::pair<int, int>> creation_modes() const;

private:
    const JordanData* jd_;
    const Cocycle* eps_;
    ZeroModeRep rep_;
    FockConfig config_;

    std::vector<OscVar> osc_vars_;
    std::map<std::array<int, 3>, int> osc_index_;  // (block, vec, t) -> var
    std::vector<Mat> block_basis_;       // per block: d x dim_b columns
    std::vector<Mat> block_solver_;      // pseudo-inverse for coefficient solve
    Mat h0_solver_;

    std::vector<BasisState> states_;
    std::vector<double> weights_;
    std::unordered_map<std::string, int> index_;
    int vacuum_ = 0;

    std::string encode(const BasisState& s) const;
    void enumerate_basis();
    void check_rep() const;

    // primitive applications; return false when the target leaves the window
    struct Emission {
        int idx = -1;
        cplx coeff = 0.0;
    };
    void apply_create(int var, int idx, std::vector<Emission>& out,
                      bool& overflow) const;
    void apply_annihilate(int var, const cplx& scale, int idx,
                          std::vector<Emission>& out, bool& overflow) const;
    void apply_zero_term(const ZeroModeTerm& term, int idx,
                         std::vector<Emission>& out, bool& overflow) const;
    SparseOp from_action(
        const std::function<void(int, std::vector<Emission>&, bool&)>& fn) const;

    SparseOp u_generator_op(int gen, bool inverse) const;
    friend class FockBuilderAccess;
};

}  // namespace twistlat
