#include "twistlat/fock.hpp"

#include <algorithm>
#include <cmath>

#include "twistlat/structure.hpp"

namespace twistlat {

// ---------------------------------------------------------------------------
// SparseOp
// ---------------------------------------------------------------------------

SparseOp SparseOp::identity(int d) {
    SparseOp op(d);
    for (int j = 0; j < d; ++j) op.cols[size_t(j)].push_back({j, cplx(1.0, 0.0)});
    return op;
}

void SparseOp::add_entry(int col, int row, const cplx& v) {
    cols[size_t(col)].push_back({row, v});
}

void SparseOp::compress() {
    for (auto& col : cols) {
        if (col.size() < 2) continue;
        std::sort(col.begin(), col.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::pair<int, cplx>> merged;
        for (const auto& [r, v] : col) {
            if (!merged.empty() && merged.back().first == r)
                merged.back().second += v;
            else
                merged.push_back({r, v});
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const auto& e) {
                                        return std::abs(e.second) < 1e-300;
                                    }),
                     merged.end());
        col = std::move(merged);
    }
}

SparseOp& SparseOp::operator+=(const SparseOp& other) {
    for (int j = 0; j < dim; ++j) {
        auto& col = cols[size_t(j)];
        const auto& oc = other.cols[size_t(j)];
        col.insert(col.end(), oc.begin(), oc.end());
        inexact[size_t(j)] = inexact[size_t(j)] || other.inexact[size_t(j)];
    }
    compress();
    return *this;
}

SparseOp& SparseOp::operator*=(const cplx& s) {
    for (auto& col : cols)
        for (auto& e : col) e.second *= s;
    return *this;
}

SparseOp operator*(const SparseOp& a, const SparseOp& b) {
    SparseOp c(b.dim);
    for (int j = 0; j < b.dim; ++j) {
        bool flag = b.inexact[size_t(j)] != 0;
        auto& col = c.cols[size_t(j)];
        for (const auto& [r, v] : b.cols[size_t(j)]) {
            flag = flag || a.inexact[size_t(r)] != 0;
            for (const auto& [r2, v2] : a.cols[size_t(r)])
                col.push_back({r2, v2 * v});
        }
        c.inexact[size_t(j)] = flag ? 1 : 0;
    }
    c.compress();
    return c;
}

SparseOp operator-(const SparseOp& a, const SparseOp& b) {
    SparseOp c = a;
    SparseOp nb = b;
    nb *= cplx(-1.0, 0.0);
    c += nb;
    return c;
}

Vec SparseOp::apply(const Vec& v) const {
    Vec out = Vec::Zero(dim);
    for (int j = 0; j < dim; ++j) {
        if (std::abs(v[j]) < 1e-300) continue;
        for (const auto& [r, val] : cols[size_t(j)]) out[r] += val * v[j];
    }
    return out;
}

double SparseOp::max_diff_exact(const SparseOp& a, const SparseOp& b) {
    double worst = 0.0;
    for (int j = 0; j < a.dim; ++j) {
        if (a.inexact[size_t(j)] || b.inexact[size_t(j)]) continue;
        // merge-compare the two sparse columns
        std::map<int, cplx> acc;
        for (const auto& [r, v] : a.cols[size_t(j)]) acc[r] += v;
        for (const auto& [r, v] : b.cols[size_t(j)]) acc[r] -= v;
        for (const auto& [r, v] : acc) worst = std::max(worst, std::abs(v));
    }
    return worst;
}

double SparseOp::max_abs_exact() const {
    double worst = 0.0;
    for (int j = 0; j < dim; ++j) {
        if (inexact[size_t(j)]) continue;
        for (const auto& [r, v] : cols[size_t(j)])
            worst = std::max(worst, std::abs(v));
    }
    return worst;
}

int SparseOp::exact_column_count() const {
    int n = 0;
    for (char f : inexact)
        if (!f) ++n;
    return n;
}

// ---------------------------------------------------------------------------
// Canonical blocks and the polarization rep
// ---------------------------------------------------------------------------

std::vector<CanonicalBlock> canonical_blocks_semisimple(const Lattice& lattice) {
    const int d = lattice.rank;
    const Mat G = lattice.gram_c();
    // Complex Gram-Schmidt to an orthonormal basis, then hyperbolic pairing.
    std::vector<Vec> ortho;
    for (int i = 0; i < d; ++i) {
        Vec v = Vec::Unit(d, i);
        for (const auto& u : ortho) v -= lattice.pair(u, v) * u;
        cplx n2 = lattice.pair(v, v);
        if (std::abs(n2) < 1e-10) {
            // mix with a later vector to escape the isotropic direction
            for (int j = i + 1; j < d && std::abs(n2) < 1e-10; ++j) {
                Vec w = Vec::Unit(d, j);
                for (const auto& u : ortho) w -= lattice.pair(u, w) * u;
                v += w;
                n2 = lattice.pair(v, v);
            }
        }
        if (std::abs(n2) < 1e-10)
            throw UnsupportedBlockStructure("cannot orthonormalize the form");
        v /= std::sqrt(n2);
        ortho.push_back(v);
    }
    std::vector<CanonicalBlock> blocks;
    int i = 0;
    const double s2 = std::sqrt(2.0);
    while (i + 1 < d) {
        CanonicalBlock blk;
        blk.type = 1;
        blk.alpha0 = 0.0;
        Vec u = (ortho[size_t(i)] + cplx(0, 1) * ortho[size_t(i + 1)]) / s2;
        Vec w = (ortho[size_t(i)] - cplx(0, 1) * ortho[size_t(i + 1)]) / s2;
        blk.v = {u, w};
        blocks.push_back(std::move(blk));
        i += 2;
    }
    if (i < d) {
        CanonicalBlock blk;
        blk.type = 2;
        blk.alpha0 = 0.0;
        blk.v = {ortho[size_t(i)]};
        blocks.push_back(std::move(blk));
    }
    return blocks;
}

ZeroModeRep polarization_rep(const JordanData& jd) {
    ZeroModeRep rep;
    const int d = jd.dim;
    const Mat pi0 = jd.pi0();
    // Basis of the fixed subspace.
    Eigen::ColPivHouseholderQR<Mat> qr(pi0);
    const int r = int(qr.rank());
    rep.h0_basis = Mat(d, r);
    {
        Mat q = qr.householderQ();
        for (int k = 0; k < r; ++k) rep.h0_basis.col(k) = q.col(k);
    }
    if (r == 0) return rep;

    // Symplectic-style pairing omega(h, h') = (N h | h') on h0, then a
    // greedy symplectic Gram-Schmidt.
    std::vector<Vec> pool;
    for (int i = 0; i < r; ++i) pool.push_back(rep.h0_basis.col(i));
    auto pair_omega = [&](const Vec& a, const Vec& b) {
        return jd.form(Vec(jd.nilp * a), b);
    };
    std::vector<std::pair<Vec, Vec>> pairs;
    std::vector<Vec> radical;
    while (!pool.empty()) {
        Vec a = pool.front();
        pool.erase(pool.begin());
        int partner = -1;
        for (size_t j = 0; j < pool.size(); ++j)
            if (std::abs(pair_omega(a, pool[j])) > 1e-9) { partner = int(j); break; }
        if (partner < 0) {
            radical.push_back(a);
            continue;
        }
        Vec b = pool[size_t(partner)];
        pool.erase(pool.begin() + partner);
        b /= pair_omega(a, b);
        std::vector<Vec> next;
        for (auto& v : pool) {
            Vec w = v - pair_omega(a, v) / pair_omega(a, b) * b +
                    pair_omega(b, v) / pair_omega(a, b) * a;
            next.push_back(w);
        }
        pool = std::move(next);
        pairs.push_back({a, b});
    }

    // x/d pair per symplectic pair, Euler variable per radical direction.
    std::vector<Vec> columns;
    for (size_t p = 0; p < pairs.size(); ++p) {
        PolyVar pv;
        pv.name = "x" + std::to_string(p + 1) + "0";
        rep.poly_vars.push_back(pv);
        ZeroModeDescriptor mult;
        mult.terms.push_back({ZeroModeTerm::MultX, int(p), cplx(1.0, 0.0)});
        ZeroModeDescriptor deriv;
        // [x, c d/dx] pairing: choose c so that [zm(a), zm(b)] = (N a | b) = 1
        deriv.terms.push_back({ZeroModeTerm::DerivX, int(p), cplx(-1.0, 0.0)});
        rep.h0_ops.push_back(mult);
        rep.h0_ops.push_back(deriv);
        columns.push_back(pairs[p].first);
        columns.push_back(pairs[p].second);
    }
    for (size_t k = 0; k < radical.size(); ++k) {
        QVar qv;
        qv.name = "q" + std::to_string(k + 1);
        rep.q_vars.push_back(qv);
        ZeroModeDescriptor eul;
        eul.terms.push_back({ZeroModeTerm::Euler, int(k), cplx(1.0, 0.0)});
        rep.h0_ops.push_back(eul);
        columns.push_back(radical[k]);
    }
    rep.h0_basis = Mat(d, int(columns.size()));
    for (size_t k = 0; k < columns.size(); ++k)
        rep.h0_basis.col(int(k)) = columns[k];
    return rep;
}

// ---------------------------------------------------------------------------
// FockModule
// ---------------------------------------------------------------------------

namespace {

bool in_c_minus(const cplx& m) {
    if (m.real() < -1e-12) return true;
    if (std::abs(m.real()) <= 1e-12) return m.imag() < -1e-12;
    return false;
}

bool is_zero_mode(const cplx& m) { return std::abs(m) <= 1e-12; }

double creation_weight(const cplx& m) {
    double w = -m.real();
    if (w > 1e-12) return w;
    return std::abs(m.imag());
}

}  // namespace

FockModule::FockModule(const JordanData& jd, const Cocycle& eps,
                       ZeroModeRep rep, FockConfig config)
    : jd_(&jd), eps_(&eps), rep_(std::move(rep)), config_(config) {
    // Block bases for the creation-variable dictionary.
    const int d = jd.dim;
    for (size_t b = 0; b < jd.blocks.size(); ++b) {
        auto it = rep_.osc_basis.find(int(b));
        if (it != rep_.osc_basis.end()) {
            block_basis_.push_back(it->second);
        } else {
            Eigen::ColPivHouseholderQR<Mat> qr(jd.blocks[b].projector);
            const int r = int(qr.rank());
            Mat basis(d, r);
            Mat q = qr.householderQ();
            for (int k = 0; k < r; ++k) basis.col(k) = q.col(k);
            block_basis_.push_back(basis);
        }
        const Mat& w = block_basis_.back();
        block_solver_.push_back((w.adjoint() * w).inverse() * w.adjoint());
    }
    if (rep_.h0_basis.cols() > 0)
        h0_solver_ = (rep_.h0_basis.adjoint() * rep_.h0_basis).inverse() *
                     rep_.h0_basis.adjoint();

    // Creation variables.
    const int trange = int(std::ceil(config_.cutoff)) + 2;
    for (size_t b = 0; b < jd.blocks.size(); ++b) {
        const int nb = int(block_basis_[b].cols());
        for (int t = -trange; t <= trange; ++t) {
            cplx m = jd.blocks[b].alpha0 + double(t);
            if (!in_c_minus(m)) continue;
            double w = creation_weight(m);
            if (w > config_.cutoff + 1e-9) continue;
            for (int i = 0; i < nb; ++i) {
                OscVar var{int(b), i, t, m, w};
                osc_index_[{int(b), i, t}] = int(osc_vars_.size());
                osc_vars_.push_back(var);
            }
        }
    }

    check_rep();
    enumerate_basis();
}

std::string FockModule::encode(const BasisState& s) const {
    std::string key;
    key.reserve(2 * s.osc.size() + s.xdeg.size() + s.xexp.size() +
                s.qcharge.size() + 1);
    key.push_back(char(s.osc.size()));
    for (const auto& [v, p] : s.osc) {
        key.push_back(char(v));
        key.push_back(char(p));
    }
    for (int x : s.xdeg) key.push_back(char(x + 64));
    for (int x : s.xexp) key.push_back(char(x + 64));
    for (int x : s.qcharge) key.push_back(char(x + 64));
    return key;
}

void FockModule::enumerate_basis() {
    // Oscillator monomials within the weight cutoff.
    std::vector<std::pair<std::vector<std::pair<int, int>>, double>> monomials;
    std::vector<std::pair<int, int>> current;
    std::function<void(int, double)> dfs = [&](int var, double used) {
        if (var == int(osc_vars_.size())) {
            monomials.push_back({current, used});
            return;
        }
        dfs(var + 1, used);
        double w = osc_vars_[size_t(var)].weight;
        int p = 0;
        double u = used;
        while (u + w <= config_.cutoff + 1e-9) {
            u += w;
            ++p;
            current.push_back({var, p});
            dfs(var + 1, u);
            current.pop_back();
        }
    };
    dfs(0, 0.0);

    // Zero-mode windows.
    std::vector<BasisState> zstates;
    BasisState z;
    z.xdeg.assign(rep_.poly_vars.size(), 0);
    z.xexp.assign(rep_.poly_vars.size(), 0);
    z.qcharge.assign(rep_.q_vars.size(), 0);
    std::function<void(size_t)> zdfs_q = [&](size_t qi) {
        if (qi == rep_.q_vars.size()) {
            zstates.push_back(z);
            return;
        }
        for (int c = -rep_.q_vars[qi].charge_window;
             c <= rep_.q_vars[qi].charge_window; ++c) {
            z.qcharge[qi] = c;
            zdfs_q(qi + 1);
        }
        z.qcharge[qi] = 0;
    };
    std::function<void(size_t)> zdfs_x = [&](size_t xi) {
        if (xi == rep_.poly_vars.size()) {
            zdfs_q(0);
            return;
        }
        for (int deg = 0; deg <= rep_.poly_vars[xi].max_degree; ++deg)
            for (int s = -rep_.poly_vars[xi].exp_window;
                 s <= rep_.poly_vars[xi].exp_window; ++s) {
                z.xdeg[xi] = deg;
                z.xexp[xi] = s;
                zdfs_x(xi + 1);
            }
        z.xdeg[xi] = 0;
        z.xexp[xi] = 0;
    };
    zdfs_x(0);

    if (long(monomials.size()) * long(zstates.size()) > config_.max_states)
        throw BasisTooLarge(
            "basis would have " +
            std::to_string(monomials.size() * zstates.size()) + " states");

    for (const auto& [osc, w] : monomials)
        for (const auto& zs : zstates) {
            BasisState s = zs;
            s.osc = osc;
            // canonical order: descending in var id keeps keys unique
            std::sort(s.osc.begin(), s.osc.end());
            index_[encode(s)] = int(states_.size());
            states_.push_back(s);
            weights_.push_back(w);
        }

    BasisState vac;
    vac.xdeg.assign(rep_.poly_vars.size(), 0);
    vac.xexp.assign(rep_.poly_vars.size(), 0);
    vac.qcharge.assign(rep_.q_vars.size(), 0);
    vacuum_ = find_state(vac);
}

int FockModule::find_state(const BasisState& s) const {
    auto it = index_.find(encode(s));
    return it == index_.end() ? -1 : it->second;
}

std::map<double, int> FockModule::weight_histogram() const {
    std::map<double, int> h;
    for (double w : weights_) h[w]++;
    return h;
}

void FockModule::check_rep() const {
    const int d = jd_->dim;
    const Mat pi0 = jd_->pi0();
    const int r = int(rep_.h0_basis.cols());
    if (r != int(rep_.h0_ops.size()))
        throw RepInconsistent("descriptor count does not match h0 basis");
    // columns must lie in the fixed subspace and be independent
    if (r > 0) {
        if ((pi0 * rep_.h0_basis - rep_.h0_basis).cwiseAbs().maxCoeff() > 1e-9)
            throw RepInconsistent("h0 basis not inside the fixed subspace");
        Eigen::ColPivHouseholderQR<Mat> qr(rep_.h0_basis);
        if (int(qr.rank()) != r)
            throw RepInconsistent("h0 basis columns are dependent");
        if (int(Eigen::ColPivHouseholderQR<Mat>(pi0).rank()) != r)
            throw RepInconsistent("h0 basis does not span the fixed subspace");
    }
    // Heisenberg relation on descriptors: [zm(u), zm(u')] = (N u | u').
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
            cplx comm = 0.0;
            for (const auto& t1 : rep_.h0_ops[size_t(a)].terms)
                for (const auto& t2 : rep_.h0_ops[size_t(b)].terms) {
                    if (t1.var != t2.var) continue;
                    if (t1.kind == ZeroModeTerm::DerivX &&
                        t2.kind == ZeroModeTerm::MultX)
                        comm += t1.coeff * t2.coeff;
                    if (t1.kind == ZeroModeTerm::MultX &&
                        t2.kind == ZeroModeTerm::DerivX)
                        comm -= t1.coeff * t2.coeff;
                }
            cplx want = jd_->form(Vec(jd_->nilp * rep_.h0_basis.col(a)),
                                  Vec(rep_.h0_basis.col(b)));
            if (std::abs(comm - want) > 1e-9)
                throw RepInconsistent(
                    "zero-mode commutator mismatches (N h | h')");
        }
    (void)d;
}

// ---- primitive emissions ----

void FockModule::apply_create(int var, int idx, std::vector<Emission>& out,
                              bool& overflow) const {
    BasisState s = states_[size_t(idx)];
    auto it = std::lower_bound(
        s.osc.begin(), s.osc.end(), std::make_pair(var, 0),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    if (it != s.osc.end() && it->first == var)
        it->second += 1;
    else
        s.osc.insert(it, {var, 1});
    int target = find_state(s);
    if (target < 0) {
        overflow = true;
        return;
    }
    out.push_back({target, cplx(1.0, 0.0)});
}

void FockModule::apply_annihilate(int var, const cplx& scale, int idx,
                                  std::vector<Emission>& out,
                                  bool& overflow) const {
    (void)overflow;  // annihilation never leaves the window
    const BasisState& s0 = states_[size_t(idx)];
    auto it = std::find_if(s0.osc.begin(), s0.osc.end(),
                           [&](const auto& e) { return e.first == var; });
    if (it == s0.osc.end()) return;
    BasisState s = s0;
    auto jt = s.osc.begin() + (it - s0.osc.begin());
    int p = jt->second;
    if (p == 1)
        s.osc.erase(jt);
    else
        jt->second -= 1;
    int target = find_state(s);
    if (target < 0) return;  // cannot happen
    out.push_back({target, scale * double(p)});
}

void FockModule::apply_zero_term(const ZeroModeTerm& term, int idx,
                                 std::vector<Emission>& out,
                                 bool& overflow) const {
    const BasisState& s0 = states_[size_t(idx)];
    switch (term.kind) {
        case ZeroModeTerm::MultX: {
            if (s0.xdeg[size_t(term.var)] + 1 >
                rep_.poly_vars[size_t(term.var)].max_degree) {
                overflow = true;
                return;
            }
            BasisState s = s0;
            s.xdeg[size_t(term.var)] += 1;
            out.push_back({find_state(s), term.coeff});
            break;
        }
        case ZeroModeTerm::DerivX: {
            const int deg = s0.xdeg[size_t(term.var)];
            if (deg > 0) {
                BasisState s = s0;
                s.xdeg[size_t(term.var)] -= 1;
                out.push_back({find_state(s), term.coeff * double(deg)});
            }
            const int sexp = s0.xexp[size_t(term.var)];
            if (sexp != 0) {
                cplx factor = double(sexp) *
                              rep_.poly_vars[size_t(term.var)].exp_unit;
                out.push_back({idx, term.coeff * factor});
            }
            break;
        }
        case ZeroModeTerm::Euler: {
            const int charge = s0.qcharge[size_t(term.var)];
            if (charge != 0)
                out.push_back({idx, term.coeff * double(charge)});
            break;
        }
    }
}

SparseOp FockModule::from_action(
    const std::function<void(int, std::vector<Emission>&, bool&)>& fn) const {
    SparseOp op(dim());
    std::vector<Emission> out;
    for (int j = 0; j < dim(); ++j) {
        out.clear();
        bool overflow = false;
        fn(j, out, overflow);
        for (const auto& e : out)
            if (e.idx >= 0) op.add_entry(j, e.idx, e.coeff);
        op.inexact[size_t(j)] = overflow ? 1 : 0;
    }
    op.compress();
    return op;
}

SparseOp FockModule::zero_mode_op(const Vec& h) const {
    Vec h0 = jd_->pi0() * h;
    if (h0.cwiseAbs().maxCoeff() < 1e-300) return SparseOp::zero(dim());
    if (rep_.h0_basis.cols() == 0)
        throw RepInconsistent("zero mode requested but rep has no h0 data");
    Vec coeff = h0_solver_ * h0;
    if ((rep_.h0_basis * coeff - h0).cwiseAbs().maxCoeff() > 1e-8)
        throw RepInconsistent("zero-mode vector outside the descriptor span");
    // collect terms and constant
    std::vector<ZeroModeTerm> terms;
    cplx constant = 0.0;
    for (int k = 0; k < int(rep_.h0_ops.size()); ++k) {
        if (std::abs(coeff[k]) < 1e-300) continue;
        for (auto t : rep_.h0_ops[size_t(k)].terms) {
            t.coeff *= coeff[k];
            terms.push_back(t);
        }
        constant += coeff[k] * rep_.h0_ops[size_t(k)].constant;
    }
    SparseOp op = from_action([&](int idx, std::vector<Emission>& out,
                                  bool& overflow) {
        for (const auto& t : terms) apply_zero_term(t, idx, out, overflow);
        if (std::abs(constant) > 1e-300) out.push_back({idx, constant});
    });
    return op;
}

SparseOp FockModule::mode_op(const Vec& a, int block, int t) const {
    const auto& blk = jd_->blocks[size_t(block)];
    const cplx m = blk.alpha0 + double(t);
    Vec pa = blk.projector * a;
    if (pa.cwiseAbs().maxCoeff() < 1e-300) return SparseOp::zero(dim());

    if (is_zero_mode(m)) return zero_mode_op(pa);

    if (in_c_minus(m)) {
        // creation: solve into the block dictionary
        Vec coeff = block_solver_[size_t(block)] * pa;
        const int nb = int(block_basis_[size_t(block)].cols());
        bool var_missing = false;
        std::vector<std::pair<int, cplx>> createops;
        for (int i = 0; i < nb; ++i) {
            if (std::abs(coeff[i]) < 1e-300) continue;
            auto it = osc_index_.find({block, i, t});
            if (it == osc_index_.end()) {
                var_missing = true;
                continue;
            }
            createops.push_back({it->second, coeff[i]});
        }
        SparseOp op = from_action([&](int idx, std::vector<Emission>& out,
                                      bool& overflow) {
            if (var_missing) overflow = true;
            for (const auto& [var, c] : createops) {
                std::vector<Emission> one;
                apply_create(var, idx, one, overflow);
                for (auto e : one) {
                    e.coeff *= c;
                    out.push_back(e);
                }
            }
        });
        return op;
    }

    // annihilation: pair against the dual block's creation variables
    int partner = -1;
    int tprime = 0;
    for (size_t b2 = 0; b2 < jd_->blocks.size(); ++b2) {
        cplx diff = -m - jd_->blocks[b2].alpha0;
        if (std::abs(diff.imag()) < 1e-9 &&
            std::abs(diff.real() - std::round(diff.real())) < 1e-9) {
            partner = int(b2);
            tprime = int(std::lround(diff.real()));
            break;
        }
    }
    if (partner < 0) return SparseOp::zero(dim());

    Vec ma = m * pa + jd_->nilp * pa;  // (m + N) pi a
    const Mat& wb = block_basis_[size_t(partner)];
    std::vector<std::pair<int, cplx>> annops;
    for (int jv = 0; jv < int(wb.cols()); ++jv) {
        cplx kappa = jd_->form(ma, Vec(wb.col(jv)));
        if (std::abs(kappa) < 1e-300) continue;
        auto it = osc_index_.find({partner, jv, tprime});
        if (it == osc_index_.end()) continue;  // variable absent: acts as zero
        annops.push_back({it->second, kappa});
    }
    return from_action([&](int idx, std::vector<Emission>& out, bool& overflow) {
        for (const auto& [var, kappa] : annops)
            apply_annihilate(var, kappa, idx, out, overflow);
    });
}

Vec FockModule::act_mode_strict(const Vec& a, int block, int t,
                                const Vec& v) const {
    SparseOp op = mode_op(a, block, t);
    for (int j = 0; j < dim(); ++j)
        if (std::abs(v[j]) > 1e-300 && op.inexact[size_t(j)])
            throw TruncationExceeded("mode image leaves the truncation window");
    return op.apply(v);
}

// ---- U operators ----

SparseOp FockModule::u_generator_op(int gen, bool inverse) const {
    if (gen < 0 || gen >= int(rep_.u_gen.size()) || !rep_.u_gen[size_t(gen)])
        throw NoUDescriptor("no U descriptor for generator " +
                            std::to_string(gen));
    UDescriptor steps = *rep_.u_gen[size_t(gen)];
    if (inverse) {
        std::reverse(steps.begin(), steps.end());
        for (auto& s : steps) {
            switch (s.kind) {
                case UStep::Scalar: s.value = 1.0 / s.value; break;
                case UStep::MultQ: s.power = -s.power; break;
                case UStep::PhaseEuler: s.value = -s.value; break;
                case UStep::ShiftX: s.value = -s.value; break;
                case UStep::ExpMultX: s.power = -s.power; break;
            }
        }
    }
    SparseOp op = SparseOp::identity(dim());
    for (const auto& step : steps) {
        SparseOp stepop = from_action([&](int idx, std::vector<Emission>& out,
                                          bool& overflow) {
            const BasisState& s0 = states_[size_t(idx)];
            switch (step.kind) {
                case UStep::Scalar:
                    out.push_back({idx, step.value});
                    break;
                case UStep::MultQ: {
                    int c = s0.qcharge[size_t(step.var)] + step.power;
                    if (std::abs(c) >
                        rep_.q_vars[size_t(step.var)].charge_window) {
                        overflow = true;
                        return;
                    }
                    BasisState s = s0;
                    s.qcharge[size_t(step.var)] = c;
                    out.push_back({find_state(s), cplx(1.0, 0.0)});
                    break;
                }
                case UStep::PhaseEuler: {
                    int c = s0.qcharge[size_t(step.var)];
                    out.push_back({idx, std::exp(step.value * double(c))});
                    break;
                }
                case UStep::ShiftX: {
                    const int deg = s0.xdeg[size_t(step.var)];
                    const int sexp = s0.xexp[size_t(step.var)];
                    const cplx c = step.value;
                    cplx expfactor = std::exp(
                        double(sexp) * rep_.poly_vars[size_t(step.var)].exp_unit *
                        c);
                    // (x + c)^deg expansion
                    double binom = 1.0;
                    cplx cpow = 1.0;
                    for (int j = deg; j >= 0; --j) {
                        BasisState s = s0;
                        s.xdeg[size_t(step.var)] = j;
                        out.push_back({find_state(s), binom * cpow * expfactor});
                        binom *= double(j) / double(deg - j + 1);
                        cpow *= c;
                    }
                    break;
                }
                case UStep::ExpMultX: {
                    int s1 = s0.xexp[size_t(step.var)] + step.power;
                    if (std::abs(s1) >
                        rep_.poly_vars[size_t(step.var)].exp_window) {
                        overflow = true;
                        return;
                    }
                    BasisState s = s0;
                    s.xexp[size_t(step.var)] = s1;
                    out.push_back({find_state(s), cplx(1.0, 0.0)});
                    break;
                }
            }
        });
        op = stepop * op;
    }
    if (inverse) {
        // scalar correction: U_{-e} = eps(e,e) B(e,e) U_e^{-1}
        IVec e = IVec::Unit(jd_->dim, gen);
        cplx scale = double(eps_->eval(e, e)) *
                     B_constant(*jd_, to_complex(e), to_complex(e));
        op *= scale;
    }
    return op;
}

SparseOp FockModule::u_op(const IVec& lam) const {
    const int d = jd_->dim;
    SparseOp op = SparseOp::identity(dim());
    IVec nu = IVec::Zero(d);
    for (int i = 0; i < d; ++i) {
        if (lam[i] == 0) continue;
        const int s = lam[i] > 0 ? 1 : -1;
        SparseOp gop = u_generator_op(i, s < 0);
        for (int k = 0; k < std::abs(lam[i]); ++k) {
            IVec se = s * IVec::Unit(d, i);
            if (nu.isZero()) {
                op = gop;  // first factor
            } else {
                cplx scale = double(eps_->eval(nu, se)) *
                             B_constant(*jd_, to_complex(nu), to_complex(se));
                op = op * gop;
                op *= scale;
            }
            nu += se;
        }
    }
    return op;
}

// ---- theta and tau ----

namespace {

std::vector<SparseOp> zeta_mul(const std::vector<SparseOp>& a,
                               const std::vector<SparseOp>& b, int maxdeg,
                               int dim) {
    std::vector<SparseOp> c(size_t(maxdeg + 1), SparseOp::zero(dim));
    for (int i = 0; i < int(a.size()); ++i)
        for (int j = 0; j < int(b.size()); ++j) {
            if (i + j > maxdeg) continue;
            c[size_t(i + j)] += a[size_t(i)] * b[size_t(j)];
        }
    return c;
}

}  // namespace

ZetaOp FockModule::theta_op(const Vec& lam) const {
    const int J = config_.zeta_order;
    // exponent vector F(z) lam = sum_{k>=1} z^k (-1)^{k+1} N^{k-1} lam / k!
    std::vector<SparseOp> A(size_t(J + 1), SparseOp::zero(dim()));
    Vec term = jd_->pi0() * lam;
    double kfact = 1.0;
    for (int k = 1; k <= std::min(J, jd_->nilpotency_index); ++k) {
        kfact *= double(k);
        Vec coeffvec = (std::pow(-1.0, k + 1) / kfact) * term;
        A[size_t(k)] = zero_mode_op(coeffvec);
        term = jd_->nilp * term;
    }
    std::vector<SparseOp> sum(size_t(J + 1), SparseOp::zero(dim()));
    sum[0] = SparseOp::identity(dim());
    std::vector<SparseOp> power = A;
    double pfact = 1.0;
    for (int p = 1; p <= J; ++p) {
        if (p > 1) {
            power = zeta_mul(power, A, J, dim());
            pfact *= double(p);
        }
        for (int k = 0; k <= J; ++k) {
            SparseOp scaled = power[size_t(k)];
            scaled *= cplx(1.0 / pfact, 0.0);
            sum[size_t(k)] += scaled;
        }
    }
    ZetaOp out;
    out.deg = std::move(sum);
    return out;
}

SparseOp FockModule::tau_op(const Vec& lam) const {
    // exact split of exp(zm(v)) with v = ((1 - phi)/N) pi0 lam
    Vec v = one_minus_phiu_over_n(*jd_) * (jd_->pi0() * lam);
    if (v.cwiseAbs().maxCoeff() < 1e-300) return SparseOp::identity(dim());
    Vec coeff = h0_solver_ * v;
    if ((rep_.h0_basis * coeff - v).cwiseAbs().maxCoeff() > 1e-8)
        throw RepInconsistent("tau argument outside the descriptor span");

    std::vector<cplx> xpart(rep_.poly_vars.size(), 0.0);
    std::vector<cplx> dpart(rep_.poly_vars.size(), 0.0);
    std::vector<cplx> epart(rep_.q_vars.size(), 0.0);
    cplx constant = 0.0;
    for (int k = 0; k < int(rep_.h0_ops.size()); ++k) {
        if (std::abs(coeff[k]) < 1e-300) continue;
        constant += coeff[k] * rep_.h0_ops[size_t(k)].constant;
        for (const auto& t : rep_.h0_ops[size_t(k)].terms) {
            cplx c = coeff[k] * t.coeff;
            if (t.kind == ZeroModeTerm::MultX) xpart[size_t(t.var)] += c;
            if (t.kind == ZeroModeTerm::DerivX) dpart[size_t(t.var)] += c;
            if (t.kind == ZeroModeTerm::Euler) epart[size_t(t.var)] += c;
        }
    }
    // central commutator [X, D] = - sum_v x_v d_v
    cplx comm = 0.0;
    for (size_t vi = 0; vi < xpart.size(); ++vi) comm -= xpart[vi] * dpart[vi];

    UDescriptor steps;
    for (size_t vi = 0; vi < xpart.size(); ++vi) {
        if (std::abs(xpart[vi]) < 1e-300) continue;
        const cplx unit = rep_.poly_vars[vi].exp_unit;
        cplx ratio = xpart[vi] / unit;
        long n = std::lround(ratio.real());
        if (std::abs(ratio - cplx(double(n), 0.0)) > 1e-9)
            throw ThetaWindowOverflow(
                "tau multiplication exponent is not an integer unit");
        if (n != 0)
            steps.push_back({UStep::ExpMultX, int(vi), int(n), 0.0});
    }
    for (size_t vi = 0; vi < dpart.size(); ++vi)
        if (std::abs(dpart[vi]) > 1e-300)
            steps.push_back({UStep::ShiftX, int(vi), 0, dpart[vi]});
    for (size_t qi = 0; qi < epart.size(); ++qi)
        if (std::abs(epart[qi]) > 1e-300)
            steps.push_back({UStep::PhaseEuler, int(qi), 0, epart[qi]});
    cplx scale = std::exp(constant - 0.5 * comm);

    // reuse the U machinery: build a temporary descriptor chain
    SparseOp op = SparseOp::identity(dim());
    for (const auto& step : steps) {
        SparseOp stepop = from_action([&](int idx, std::vector<Emission>& out,
                                          bool& overflow) {
            const BasisState& s0 = states_[size_t(idx)];
            switch (step.kind) {
                case UStep::ExpMultX: {
                    int s1 = s0.xexp[size_t(step.var)] + step.power;
                    if (std::abs(s1) >
                        rep_.poly_vars[size_t(step.var)].exp_window) {
                        overflow = true;
                        return;
                    }
                    BasisState s = s0;
                    s.xexp[size_t(step.var)] = s1;
                    out.push_back({find_state(s), cplx(1.0, 0.0)});
                    break;
                }
                case UStep::ShiftX: {
                    const int deg = s0.xdeg[size_t(step.var)];
                    const int sexp = s0.xexp[size_t(step.var)];
                    const cplx c = step.value;
                    cplx expfactor = std::exp(
                        double(sexp) *
                        rep_.poly_vars[size_t(step.var)].exp_unit * c);
                    double binom = 1.0;
                    cplx cpow = 1.0;
                    for (int j = deg; j >= 0; --j) {
                        BasisState s = s0;
                        s.xdeg[size_t(step.var)] = j;
                        out.push_back({find_state(s), binom * cpow * expfactor});
                        binom *= double(j) / double(deg - j + 1);
                        cpow *= c;
                    }
                    break;
                }
                case UStep::PhaseEuler: {
                    int c = s0.qcharge[size_t(step.var)];
                    out.push_back({idx, std::exp(step.value * double(c))});
                    break;
                }
                default: break;
            }
        });
        op = stepop * op;
    }
    op *= scale;
    return op;
}

// ---- Virasoro ----

SparseOp FockModule::virasoro(const std::vector<CanonicalBlock>& blocks,
                              int k) const {
    SparseOp L = SparseOp::zero(dim());
    const int trange = int(std::ceil(config_.cutoff)) + std::abs(k) + 2;

    auto mode_for = [&](const Vec& a, const cplx& m) -> SparseOp {
        // dispatch on the block containing m
        for (size_t b = 0; b < jd_->blocks.size(); ++b) {
            cplx diff = m - jd_->blocks[b].alpha0;
            if (std::abs(diff.imag()) < 1e-9 &&
                std::abs(diff.real() - std::round(diff.real())) < 1e-9) {
                Vec pa = jd_->blocks[b].projector * a;
                if (pa.cwiseAbs().maxCoeff() < 1e-300) continue;
                return mode_op(a, int(b), int(std::lround(diff.real())));
            }
        }
        return SparseOp::zero(dim());
    };

    for (const auto& blk : blocks) {
        const int dblk = int(blk.v.size());
        const int ell = blk.type == 1 ? dblk / 2 : dblk;
        const double front = blk.type == 1 ? 1.0 : 0.5;
        for (int i = 1; i <= ell; ++i) {
            const Vec& vi = blk.v[size_t(i - 1)];
            const Vec& vdual = blk.v[size_t(dblk - i)];
            for (int t = -trange; t <= trange; ++t) {
                cplx m = blk.alpha0 + double(t);
                cplx first_mode = -m;
                cplx second_mode = m + double(k);
                SparseOp a = mode_for(vdual, first_mode);
                SparseOp b = mode_for(vi, second_mode);
                SparseOp prod = in_c_minus(first_mode) ? a * b : b * a;
                prod *= cplx(front, 0.0);
                L += prod;
            }
        }
        if (k == 0) {
            cplx c0 = blk.type == 1
                          ? -0.5 * double(ell) * blk.alpha0 * (blk.alpha0 + 1.0)
                          : -0.25 * double(dblk) * blk.alpha0 *
                                (blk.alpha0 + 1.0);
            if (std::abs(c0) > 1e-300) {
                SparseOp id = SparseOp::identity(dim());
                id *= c0;
                L += id;
            }
        }
    }
    return L;
}

std::vector<std::pair<int, int>> FockModule::creation_modes() const {
    std::vector<std::pair<int, int>> modes;
    for (const auto& v : osc_vars_) {
        std::pair<int, int> key{v.block, v.t};
        if (std::find(modes.begin(), modes.end(), key) == modes.end())
            modes.push_back(key);
    }
    return modes;
}

}  // namespace twistlat
