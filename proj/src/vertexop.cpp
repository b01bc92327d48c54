#include "twistlat/vertexop.hpp"

#include <algorithm>
#include <cmath>

#include "twistlat/specfun.hpp"

namespace twistlat {

namespace {

bool in_c_minus_v(const cplx& m) {
    if (m.real() < -1e-12) return true;
    if (std::abs(m.real()) <= 1e-12) return m.imag() < -1e-12;
    return false;
}

bool in_c_plus_v(const cplx& m) {
    if (m.real() > 1e-12) return true;
    if (std::abs(m.real()) <= 1e-12) return m.imag() > 1e-12;
    return false;
}

// exp of a polynomial with zero constant term, truncated
std::vector<cplx> exp_poly(const std::vector<cplx>& p, int maxdeg) {
    std::vector<cplx> out(size_t(maxdeg + 1), 0.0);
    out[0] = 1.0;
    std::vector<cplx> power(size_t(maxdeg + 1), 0.0);
    power[0] = 1.0;
    double kfact = 1.0;
    for (int k = 1; k <= maxdeg; ++k) {
        // power <- power * p
        std::vector<cplx> next(size_t(maxdeg + 1), 0.0);
        for (int i = 0; i <= maxdeg; ++i) {
            if (std::abs(power[size_t(i)]) < 1e-300) continue;
            for (int j = 1; j + i <= maxdeg && j < int(p.size()); ++j)
                next[size_t(i + j)] += power[size_t(i)] * p[size_t(j)];
        }
        power = std::move(next);
        kfact *= double(k);
        bool any = false;
        for (int i = 0; i <= maxdeg; ++i) {
            out[size_t(i)] += power[size_t(i)] / kfact;
            any = any || std::abs(power[size_t(i)]) > 1e-300;
        }
        if (!any) break;
    }
    return out;
}

}  // namespace

bool LogField::empty() const {
    for (const auto& [k, op] : coeffs)
        for (const auto& col : op.cols)
            if (!col.empty()) return false;
    return true;
}

FieldAlgebra::FieldAlgebra(const FockModule& fm, const Lattice& lattice,
                           const Cocycle& eps, const EtaMap& eta,
                           FieldBounds bounds)
    : fm_(&fm), lattice_(&lattice), eps_(&eps), eta_(&eta), bounds_(bounds) {
    bases_.push_back(cplx(0.0, 0.0));  // sector 0: integer exponents
}

int FieldAlgebra::sector_of(const cplx& base) const {
    for (size_t s = 0; s < bases_.size(); ++s) {
        cplx diff = base - bases_[s];
        if (std::abs(diff.imag()) < 1e-9 &&
            std::abs(diff.real() - std::round(diff.real())) < 1e-9)
            return int(s);
    }
    bases_.push_back(base);
    return int(bases_.size()) - 1;
}

cplx FieldAlgebra::key_exponent(const FieldKey& k) const {
    return bases_[size_t(k.sector)] + double(k.offset);
}

FieldKey FieldAlgebra::make_key(const cplx& e, int zeta) const {
    int s = sector_of(e);
    cplx diff = e - bases_[size_t(s)];
    return FieldKey{s, int(std::lround(diff.real())), zeta};
}

LogField FieldAlgebra::zero_field() const {
    LogField f;
    f.alg = this;
    return f;
}

LogField FieldAlgebra::identity_field() const {
    LogField f = zero_field();
    f.coeffs[make_key(0.0, 0)] = SparseOp::identity(fm_->dim());
    return f;
}

void FieldAlgebra::trim(LogField& f) const {
    for (auto it = f.coeffs.begin(); it != f.coeffs.end();) {
        bool keep = false;
        for (const auto& col : it->second.cols)
            if (!col.empty()) { keep = true; break; }
        if (!keep)
            for (char flag : it->second.inexact)
                if (flag) { keep = true; break; }
        it = keep ? std::next(it) : f.coeffs.erase(it);
    }
}

LogField FieldAlgebra::current(const Vec& a, ModeParts parts) const {
    LogField f = zero_field();
    const auto& jd = fm_->jordan();
    const int T = int(std::ceil(bounds_.exp_bound)) + 1;
    auto npow = jd.nilp_powers();
    for (int b = 0; b < int(jd.blocks.size()); ++b) {
        Vec pa = jd.blocks[size_t(b)].projector * a;
        if (pa.cwiseAbs().maxCoeff() < 1e-300) continue;
        for (int t = -T; t <= T; ++t) {
            cplx m = jd.blocks[size_t(b)].alpha0 + double(t);
            if (std::abs(m.real()) > bounds_.exp_bound + 1e-9) continue;
            bool minus = in_c_minus_v(m);
            if (parts == CreationModes && !minus) continue;
            if (parts == AnnihilationAndZeroModes && minus) continue;
            double jfact = 1.0;
            for (int j = 0; j < jd.nilpotency_index && j <= bounds_.zeta_order;
                 ++j) {
                if (j > 0) jfact *= double(j);
                Vec vj = (std::pow(-1.0, j) / jfact) * (npow[size_t(j)] * a);
                SparseOp op = fm_->mode_op(vj, b, t);
                bool any = false;
                for (const auto& col : op.cols)
                    if (!col.empty()) { any = true; break; }
                for (char fl : op.inexact) any = any || fl;
                if (!any) continue;
                FieldKey key = make_key(-m - 1.0, j);
                auto it = f.coeffs.find(key);
                if (it == f.coeffs.end())
                    f.coeffs.emplace(key, std::move(op));
                else
                    it->second += op;
            }
        }
    }
    return f;
}

LogField FieldAlgebra::e_factor_exponent(const IVec& lam, int sign) const {
    LogField x = zero_field();
    const auto& jd = fm_->jordan();
    const Vec lamc = to_complex(lam);
    const int T = int(std::ceil(bounds_.exp_bound)) + 1;
    auto npow = jd.nilp_powers();
    for (int b = 0; b < int(jd.blocks.size()); ++b) {
        Vec pl = jd.blocks[size_t(b)].projector * lamc;
        if (pl.cwiseAbs().maxCoeff() < 1e-300) continue;
        for (int t = -T; t <= T; ++t) {
            cplx m = jd.blocks[size_t(b)].alpha0 + double(t);
            if (std::abs(m.real()) > bounds_.exp_bound + 1e-9) continue;
            bool pick = (sign > 0) ? in_c_minus_v(m) : in_c_plus_v(m);
            if (!pick) continue;
            // u = (m+N)^{-1} lam
            Vec u = Vec::Zero(jd.dim);
            cplx mp = 1.0 / m;
            for (int k = 0; k < jd.nilpotency_index; ++k) {
                u += std::pow(-1.0, k) * mp * (npow[size_t(k)] * lamc);
                mp /= m;
            }
            double jfact = 1.0;
            for (int j = 0; j < jd.nilpotency_index && j <= bounds_.zeta_order;
                 ++j) {
                if (j > 0) jfact *= double(j);
                Vec wj = -(std::pow(-1.0, j) / jfact) * (npow[size_t(j)] * u);
                SparseOp op = fm_->mode_op(wj, b, t);
                bool any = false;
                for (const auto& col : op.cols)
                    if (!col.empty()) { any = true; break; }
                for (char fl : op.inexact) any = any || fl;
                if (!any) continue;
                FieldKey key = make_key(-m, j);
                auto it = x.coeffs.find(key);
                if (it == x.coeffs.end())
                    x.coeffs.emplace(key, std::move(op));
                else
                    it->second += op;
            }
        }
    }
    return x;
}

LogField FieldAlgebra::e_factor(const IVec& lam, int sign) const {
    return exp_field(e_factor_exponent(lam, sign));
}

LogField FieldAlgebra::exp_field(const LogField& x) const {
    LogField sum = identity_field();
    LogField term = identity_field();
    for (int k = 1; k <= 64; ++k) {
        term = multiply(term, x);
        LogField scaled = scale(term, cplx(1.0 / double(k), 0.0));
        // rescale the running term to keep factorials incremental
        term = scaled;
        sum = add(sum, term);
        if (term.empty()) break;
    }
    return sum;
}

LogField FieldAlgebra::theta_field(const IVec& lam, bool absorb_diagonal) const {
    const auto& jd = fm_->jordan();
    Vec pl = jd.pi0() * to_complex(lam);
    if (pl.cwiseAbs().maxCoeff() < 1e-300) return identity_field();

    bool nilp_trivial = (jd.nilp * pl).cwiseAbs().maxCoeff() < 1e-12;
    if (absorb_diagonal && nilp_trivial) {
        // zero mode may be purely diagonal (Euler-type): absorb e^{zeta k}
        // into per-sector exponent shifts z^k.
        SparseOp zm = fm_->zero_mode_op(pl);
        bool diagonal = true;
        for (int j = 0; j < zm.dim && diagonal; ++j) {
            for (const auto& [r, v] : zm.cols[size_t(j)])
                if (r != j) { diagonal = false; break; }
            if (zm.inexact[size_t(j)]) diagonal = false;
        }
        if (diagonal) {
            // group states by eigenvalue
            std::vector<std::pair<cplx, SparseOp>> sectors;
            for (int j = 0; j < zm.dim; ++j) {
                cplx ev = 0.0;
                for (const auto& [r, v] : zm.cols[size_t(j)]) ev = v;
                int found = -1;
                for (size_t s = 0; s < sectors.size(); ++s)
                    if (std::abs(sectors[s].first - ev) < 1e-12) {
                        found = int(s);
                        break;
                    }
                if (found < 0) {
                    sectors.push_back({ev, SparseOp::zero(fm_->dim())});
                    found = int(sectors.size()) - 1;
                }
                sectors[size_t(found)].second.add_entry(j, j, 1.0);
            }
            LogField f = zero_field();
            for (auto& [ev, proj] : sectors) {
                proj.compress();
                f.coeffs[make_key(ev, 0)] = std::move(proj);
            }
            return f;
        }
    }
    ZetaOp th = fm_->theta_op(to_complex(lam));
    LogField f = zero_field();
    for (int j = 0; j <= th.order() && j <= bounds_.zeta_order; ++j)
        f.coeffs[make_key(0.0, j)] = th.deg[size_t(j)];
    trim(f);
    return f;
}

SparseOp FieldAlgebra::u_matrix(const IVec& lam) const { return fm_->u_op(lam); }

LogField FieldAlgebra::vertex_operator(const IVec& lam,
                                       bool absorb_diagonal) const {
    const auto& jd = fm_->jordan();
    const Vec lamc = to_complex(lam);

    LogField u = zero_field();
    u.coeffs[make_key(0.0, 0)] = fm_->u_op(lam);
    LogField core = multiply(u, theta_field(lam, absorb_diagonal));

    // e^{zeta a_lam(zeta)}
    auto apoly = a_lambda(jd, lamc);
    std::vector<cplx> zeta_arg(apoly.size() + 1, 0.0);
    for (size_t j = 0; j < apoly.size(); ++j) zeta_arg[j + 1] = apoly[j];
    core = mul_zeta_poly(core, exp_poly(zeta_arg, bounds_.zeta_order));

    core = shift_exponent(core, b_lambda(jd, lamc));
    core = multiply(core, e_factor(lam, +1));
    core = multiply(core, e_factor(lam, -1));
    return core;
}

LogField FieldAlgebra::multiply(const LogField& a, const LogField& b) const {
    LogField out = zero_field();
    for (const auto& [ka, opa] : a.coeffs)
        for (const auto& [kb, opb] : b.coeffs) {
            int j = ka.zeta + kb.zeta;
            if (j > bounds_.zeta_order) continue;
            cplx e = key_exponent(ka) + key_exponent(kb);
            if (std::abs(e.real()) > bounds_.exp_bound + 1e-9) continue;
            FieldKey key = make_key(e, j);
            SparseOp prod = opa * opb;
            auto it = out.coeffs.find(key);
            if (it == out.coeffs.end())
                out.coeffs.emplace(key, std::move(prod));
            else
                it->second += prod;
        }
    trim(out);
    return out;
}

LogField FieldAlgebra::add(const LogField& a, const LogField& b) const {
    LogField out = a;
    out.alg = this;
    for (const auto& [k, op] : b.coeffs) {
        auto it = out.coeffs.find(k);
        if (it == out.coeffs.end())
            out.coeffs.emplace(k, op);
        else
            it->second += op;
    }
    trim(out);
    return out;
}

LogField FieldAlgebra::scale(const LogField& a, const cplx& s) const {
    LogField out = a;
    for (auto& [k, op] : out.coeffs) op *= s;
    return out;
}

LogField FieldAlgebra::shift_exponent(const LogField& a, const cplx& de) const {
    if (std::abs(de) < 1e-300) return a;
    LogField out = zero_field();
    for (const auto& [k, op] : a.coeffs)
        out.coeffs[make_key(key_exponent(k) + de, k.zeta)] = op;
    return out;
}

LogField FieldAlgebra::mul_zeta_poly(const LogField& a,
                                     const std::vector<cplx>& poly) const {
    LogField out = zero_field();
    for (const auto& [k, op] : a.coeffs)
        for (int j = 0; j < int(poly.size()); ++j) {
            if (std::abs(poly[size_t(j)]) < 1e-300) continue;
            if (k.zeta + j > bounds_.zeta_order) continue;
            FieldKey key{k.sector, k.offset, k.zeta + j};
            SparseOp scaled = op;
            scaled *= poly[size_t(j)];
            auto it = out.coeffs.find(key);
            if (it == out.coeffs.end())
                out.coeffs.emplace(key, std::move(scaled));
            else
                it->second += scaled;
        }
    trim(out);
    return out;
}

LogField FieldAlgebra::d_z(const LogField& a) const {
    LogField out = zero_field();
    auto accumulate = [&](const FieldKey& key, const SparseOp& op, const cplx& s) {
        if (std::abs(s) < 1e-300) return;
        SparseOp scaled = op;
        scaled *= s;
        auto it = out.coeffs.find(key);
        if (it == out.coeffs.end())
            out.coeffs.emplace(key, std::move(scaled));
        else
            it->second += scaled;
    };
    for (const auto& [k, op] : a.coeffs) {
        cplx e = key_exponent(k);
        accumulate(make_key(e - 1.0, k.zeta), op, e);
        if (k.zeta > 0)
            accumulate(make_key(e - 1.0, k.zeta - 1), op, double(k.zeta));
    }
    trim(out);
    return out;
}

double FieldAlgebra::compare(const LogField& a, const LogField& b,
                             double exp_window, int zeta_window) const {
    // residual relative to the largest coefficient entry inside the window
    std::vector<FieldKey> keys;
    for (const auto& [k, op] : a.coeffs) keys.push_back(k);
    for (const auto& [k, op] : b.coeffs)
        if (!a.coeffs.count(k)) keys.push_back(k);
    double worst = 0.0;
    double scale = 1.0;
    SparseOp zero = SparseOp::zero(fm_->dim());
    for (const auto& k : keys) {
        cplx e = key_exponent(k);
        if (std::abs(e.real()) > exp_window + 1e-9) continue;
        if (k.zeta > zeta_window) continue;
        auto ia = a.coeffs.find(k);
        auto ib = b.coeffs.find(k);
        const SparseOp& oa = ia == a.coeffs.end() ? zero : ia->second;
        const SparseOp& ob = ib == b.coeffs.end() ? zero : ib->second;
        worst = std::max(worst, SparseOp::max_diff_exact(oa, ob));
        scale = std::max({scale, oa.max_abs_exact(), ob.max_abs_exact()});
    }
    return worst / scale;
}

// ---------------------------------------------------------------------------
// identity checks
// ---------------------------------------------------------------------------

namespace {

FieldCheck make_check(const std::string& name, const std::string& identity,
                      double residual, double tol, long cols = 0) {
    return {name, identity, residual, tol, cols, residual <= tol};
}

}  // namespace

FieldCheck FieldAlgebra::check_heisenberg_commutators(int mode_bound) const {
    const auto& jd = fm_->jordan();
    const int d = jd.dim;
    double worst = 0.0;
    long cols = 0;
    for (int b1 = 0; b1 < int(jd.blocks.size()); ++b1)
        for (int b2 = 0; b2 < int(jd.blocks.size()); ++b2)
            for (int t1 = -mode_bound; t1 <= mode_bound; ++t1)
                for (int t2 = -mode_bound; t2 <= mode_bound; ++t2) {
                    cplx m1 = jd.blocks[size_t(b1)].alpha0 + double(t1);
                    cplx m2 = jd.blocks[size_t(b2)].alpha0 + double(t2);
                    for (int i = 0; i < d; ++i)
                        for (int j = 0; j < d; ++j) {
                            Vec a = Vec::Unit(d, i), bb = Vec::Unit(d, j);
                            SparseOp A = fm_->mode_op(a, b1, t1);
                            SparseOp B = fm_->mode_op(bb, b2, t2);
                            SparseOp lhs = A * B - B * A;
                            cplx want = 0.0;
                            if (std::abs(m1 + m2) < 1e-9) {
                                Vec pa = jd.blocks[size_t(b1)].projector * a;
                                want = lattice_->pair(
                                    Vec(m1 * pa + jd.nilp * pa), bb);
                            }
                            SparseOp rhs = SparseOp::identity(fm_->dim());
                            rhs *= want;
                            worst = std::max(
                                worst, SparseOp::max_diff_exact(lhs, rhs));
                            cols += lhs.exact_column_count();
                        }
                }
    return make_check("heisenberg-commutators",
                      "[a_(m+N), b_(n+N)] = delta ((m+N) pi a | b)", worst,
                      1e-10, cols);
}

FieldCheck FieldAlgebra::check_aUcomm(const IVec& lam, int mode_bound) const {
    const auto& jd = fm_->jordan();
    const int d = jd.dim;
    SparseOp U = fm_->u_op(lam);
    double worst = 0.0;
    long cols = 0;
    for (int b = 0; b < int(jd.blocks.size()); ++b)
        for (int t = -mode_bound; t <= mode_bound; ++t) {
            cplx m = jd.blocks[size_t(b)].alpha0 + double(t);
            if (std::abs(m.real()) > mode_bound + 1e-9) continue;
            for (int i = 0; i < d; ++i) {
                Vec a = Vec::Unit(d, i);
                SparseOp A = fm_->mode_op(a, b, t);
                SparseOp lhs = A * U - U * A;
                SparseOp rhs = U;
                cplx delta = 0.0;
                if (std::abs(m) < 1e-12)
                    delta = lattice_->pair(Vec(jd.pi0() * a), to_complex(lam));
                rhs *= delta;
                worst = std::max(worst, SparseOp::max_diff_exact(lhs, rhs));
                cols += lhs.exact_column_count();
            }
        }
    return make_check("mode-U-commutator",
                      "[a_(m+N), U_lam] = delta_{m,0} (pi0 a | lam) U_lam",
                      worst, 1e-10, cols);
}

namespace {

// [A, F] over the union of F's keys and the shifted keys the identity needs;
// absent coefficients enter as exact-zero operators so that A's overflow
// flags still propagate into the result.
LogField mode_commutator(const FieldAlgebra& alg, int dim, const SparseOp& A,
                         const LogField& F, const cplx& shift) {
    LogField out;
    out.alg = &alg;
    std::vector<FieldKey> keys;
    for (const auto& [k, op] : F.coeffs) keys.push_back(k);
    for (const auto& [k, op] : F.coeffs) {
        FieldKey moved = alg.make_key(alg.key_exponent(k) + shift, k.zeta);
        if (!F.coeffs.count(moved)) keys.push_back(moved);
    }
    SparseOp zero = SparseOp::zero(dim);
    for (const auto& k : keys) {
        auto it = F.coeffs.find(k);
        const SparseOp& op = it == F.coeffs.end() ? zero : it->second;
        out.coeffs[k] = A * op - op * A;
    }
    return out;
}

// RHS multiplier (z^{m+N} pi_alpha a | lam) as an exponent shift by m plus a
// zeta polynomial.
std::vector<cplx> pairing_zeta_poly(const JordanData& jd,
                                    const Lattice& lattice, const Vec& a,
                                    int block, const Vec& lam, int maxdeg) {
    std::vector<cplx> poly(size_t(maxdeg + 1), 0.0);
    Vec term = jd.blocks[size_t(block)].projector * a;
    double jfact = 1.0;
    for (int j = 0; j < jd.nilpotency_index && j <= maxdeg; ++j) {
        if (j > 0) jfact *= double(j);
        poly[size_t(j)] = lattice.pair(term, lam) / jfact;
        term = jd.nilp * term;
    }
    return poly;
}

}  // namespace

FieldCheck FieldAlgebra::check_emodes(const IVec& lam, int mode_bound) const {
    const auto& jd = fm_->jordan();
    const int d = jd.dim;
    LogField E = multiply(e_factor(lam, +1), e_factor(lam, -1));
    double worst = 0.0;
    for (int b = 0; b < int(jd.blocks.size()); ++b)
        for (int t = -mode_bound; t <= mode_bound; ++t) {
            cplx m = jd.blocks[size_t(b)].alpha0 + double(t);
            if (std::abs(m.real()) > mode_bound + 1e-9) continue;
            for (int i = 0; i < d; ++i) {
                Vec a = Vec::Unit(d, i);
                if ((jd.blocks[size_t(b)].projector * a).cwiseAbs().maxCoeff() <
                    1e-300)
                    continue;
                SparseOp A = fm_->mode_op(a, b, t);
                LogField lhs = mode_commutator(*this, fm_->dim(), A, E, m);
                LogField rhs = zero_field();
                if (std::abs(m) > 1e-12) {
                    rhs = shift_exponent(
                        mul_zeta_poly(E, pairing_zeta_poly(jd, *lattice_, a, b,
                                                           to_complex(lam),
                                                           bounds_.zeta_order)),
                        m);
                }
                worst = std::max(
                    worst, compare(lhs, rhs,
                                   bounds_.exp_bound - std::abs(m.real()) - 0.5,
                                   bounds_.zeta_order));
            }
        }
    return make_check("exponential-mode-commutator",
                      "[a_(m+N), E_lam(z)] = (z^{m+N} pi a | lam) E_lam(z)",
                      worst, 1e-10);
}

FieldCheck FieldAlgebra::check_hvobrext(const IVec& lam, int mode_bound) const {
    const auto& jd = fm_->jordan();
    const int d = jd.dim;
    LogField Y = vertex_operator(lam, false);
    double worst = 0.0;
    for (int b = 0; b < int(jd.blocks.size()); ++b)
        for (int t = -mode_bound; t <= mode_bound; ++t) {
            cplx m = jd.blocks[size_t(b)].alpha0 + double(t);
            if (std::abs(m.real()) > mode_bound + 1e-9) continue;
            for (int i = 0; i < d; ++i) {
                Vec a = Vec::Unit(d, i);
                if ((jd.blocks[size_t(b)].projector * a).cwiseAbs().maxCoeff() <
                    1e-300)
                    continue;
                SparseOp A = fm_->mode_op(a, b, t);
                LogField lhs = mode_commutator(*this, fm_->dim(), A, Y, m);
                LogField rhs = shift_exponent(
                    mul_zeta_poly(Y, pairing_zeta_poly(jd, *lattice_, a, b,
                                                       to_complex(lam),
                                                       bounds_.zeta_order)),
                    m);
                worst = std::max(
                    worst, compare(lhs, rhs,
                                   bounds_.exp_bound - std::abs(m.real()) - 0.5,
                                   bounds_.zeta_order));
            }
        }
    return make_check("mode-vertex-commutator",
                      "[a_(m+N), Y(e^lam,z)] = (z^{m+N} pi a | lam) Y(e^lam,z)",
                      worst, 1e-9);
}

FieldCheck FieldAlgebra::check_phi_equivariance(const IVec& lam) const {
    const auto& jd = fm_->jordan();
    // integer phi action
    IMat phi_int(jd.dim, jd.dim);
    for (int i = 0; i < jd.dim; ++i)
        for (int j = 0; j < jd.dim; ++j)
            phi_int(i, j) = int(std::lround(jd.phi(i, j).real()));
    IVec phil = phi_int * lam;
    SparseOp lhs = fm_->u_op(phil);
    SparseOp rhs = fm_->u_op(lam) * fm_->tau_op(to_complex(lam));
    cplx scalar = double(eta_->eval(lam)) *
                  std::exp(kTwoPiI * c_lambda(jd, to_complex(lam)));
    rhs *= scalar;
    double worst = SparseOp::max_diff_exact(lhs, rhs);
    return make_check("phi-equivariance",
                      "U_{phi lam} = eta e^{2 pi i c} U_lam tau_lam", worst,
                      1e-9, lhs.exact_column_count());
}

FieldCheck FieldAlgebra::check_theta_group_law(const IVec& lam,
                                               const IVec& mu) const {
    const auto& jd = fm_->jordan();
    LogField tl = theta_field(lam, false);
    LogField tm = theta_field(mu, false);
    LogField lhs = multiply(tl, tm);
    // scalar exp((zeta P lam0 | mu))
    Vec lam0 = jd.pi0() * to_complex(lam);
    auto pskew = apply_P_skew(jd, lam0);
    std::vector<cplx> arg(size_t(bounds_.zeta_order + 1), 0.0);
    for (size_t j = 0; j < pskew.size(); ++j) {
        if (int(j) + 1 > bounds_.zeta_order) break;
        arg[j + 1] = lattice_->pair(pskew[j], to_complex(mu));
    }
    LogField rhs = mul_zeta_poly(theta_field(IVec(lam + mu), false),
                                 exp_poly(arg, bounds_.zeta_order));
    double worst = compare(lhs, rhs, bounds_.exp_bound, bounds_.zeta_order);
    // inverse law
    LogField inv = multiply(theta_field(lam, false), theta_field(IVec(-lam), false));
    worst = std::max(worst, compare(inv, identity_field(), bounds_.exp_bound,
                                    bounds_.zeta_order));
    return make_check("theta-group-law",
                      "theta_h theta_h' = e^{(zeta P h0|h')} theta_{h+h'}",
                      worst, 1e-10);
}

FieldCheck FieldAlgebra::check_theta_derivative_lemma(const IVec& lam) const {
    // For X the zero-mode exponent of theta and D = D_z:
    // D(e^X) = e^X (D(X) - C/2) with C = [X, D(X)] central.
    const auto& jd = fm_->jordan();
    const Vec lamc = to_complex(lam);
    LogField theta = theta_field(lam, false);
    LogField lhs = d_z(theta);

    // D(X) = (z^{-N-1} lam)_{(0+N)}: exponent -1, zeta degrees from z^{-N}
    LogField dx = zero_field();
    auto npow = jd.nilp_powers();
    double jfact = 1.0;
    for (int j = 0; j < jd.nilpotency_index && j <= bounds_.zeta_order; ++j) {
        if (j > 0) jfact *= double(j);
        Vec vj = (std::pow(-1.0, j) / jfact) * (npow[size_t(j)] * lamc);
        SparseOp op = fm_->zero_mode_op(vj);
        bool any = false;
        for (const auto& col : op.cols)
            if (!col.empty()) { any = true; break; }
        if (any) dx.coeffs[make_key(cplx(-1, 0), j)] = std::move(op);
    }

    // C = z^{-1} ((z^{-N} - 1) lam0 | lam): scalar zeta-polynomial at z^{-1}
    std::vector<cplx> cpoly(size_t(bounds_.zeta_order + 1), 0.0);
    Vec lam0 = jd.pi0() * lamc;
    Vec term = jd.nilp * lam0;
    jfact = 1.0;
    for (int j = 1; j < jd.nilpotency_index && j <= bounds_.zeta_order; ++j) {
        jfact *= double(j);
        cpoly[size_t(j)] = std::pow(-1.0, j) / jfact * jd.form(term, lamc);
        term = jd.nilp * term;
    }
    LogField half_c = zero_field();
    for (int j = 0; j <= bounds_.zeta_order; ++j) {
        if (std::abs(cpoly[size_t(j)]) < 1e-300) continue;
        SparseOp op = SparseOp::identity(fm_->dim());
        op *= -0.5 * cpoly[size_t(j)];
        half_c.coeffs[make_key(cplx(-1, 0), j)] = std::move(op);
    }

    LogField rhs = add(multiply(theta, dx), multiply(theta, half_c));
    double worst = compare(lhs, rhs, bounds_.exp_bound - 1.5,
                           bounds_.zeta_order - jd.nilpotency_index);
    return make_check("theta-derivative-lemma",
                      "D(e^X) = e^X (D(X) - C/2) per zeta degree", worst, 1e-10);
}

FieldCheck FieldAlgebra::check_dz_lemma(const IVec& lam) const {
    const auto& jd = fm_->jordan();
    const Vec lamc = to_complex(lam);
    LogField Y = vertex_operator(lam, false);
    LogField lhs = d_z(Y);
    LogField nop = add(multiply(current(lamc, CreationModes), Y),
                       multiply(Y, current(lamc, AnnihilationAndZeroModes)));
    LogField rhs = add(nop, shift_exponent(scale(Y, b_lambda(jd, lamc)), -1.0));
    double worst = compare(lhs, rhs, bounds_.exp_bound - 1.5,
                           bounds_.zeta_order - 1);
    return make_check("derivative-lemma",
                      "D_z Y(e^lam,z) = :Y(lam,z)Y(e^lam,z): + b z^{-1} Y",
                      worst, 1e-9);
}

FieldCheck FieldAlgebra::check_current_delta_commutator(const Vec& a,
                                                        const IVec& lam,
                                                        int mode_bound) const {
    // [Y(a,z1), Y(e^lam,z2)] collapses onto the delta-function structure;
    // coefficientwise this is the mode-vertex commutator at every m.
    const auto& jd = fm_->jordan();
    LogField Y = vertex_operator(lam, false);
    double worst = 0.0;
    for (int b = 0; b < int(jd.blocks.size()); ++b)
        for (int t = -mode_bound; t <= mode_bound; ++t) {
            cplx m = jd.blocks[size_t(b)].alpha0 + double(t);
            if (std::abs(m.real()) > mode_bound + 1e-9) continue;
            if ((jd.blocks[size_t(b)].projector * a).cwiseAbs().maxCoeff() <
                1e-300)
                continue;
            SparseOp A = fm_->mode_op(a, b, t);
            LogField lhs = mode_commutator(*this, fm_->dim(), A, Y, m);
            LogField rhs = shift_exponent(
                mul_zeta_poly(Y, pairing_zeta_poly(jd, *lattice_, a, b,
                                                   to_complex(lam),
                                                   bounds_.zeta_order)),
                m);
            worst = std::max(
                worst, compare(lhs, rhs,
                               bounds_.exp_bound - std::abs(m.real()) - 0.5,
                               bounds_.zeta_order));
        }
    return make_check("current-vertex-delta",
                      "[Y(a,z1), Y(e^lam,z2)] = delta(z1,z2)-paired structure",
                      worst, 1e-9);
}

FieldCheck FieldAlgebra::check_exp_product(const IVec& lam, const IVec& mu) const {
    LogField lhs = multiply(e_factor(lam, +1), e_factor(mu, +1));
    LogField rhs = e_factor(IVec(lam + mu), +1);
    double worst = compare(lhs, rhs, bounds_.exp_bound, bounds_.zeta_order);
    LogField lhsm = multiply(e_factor(lam, -1), e_factor(mu, -1));
    LogField rhsm = e_factor(IVec(lam + mu), -1);
    worst = std::max(worst,
                     compare(lhsm, rhsm, bounds_.exp_bound, bounds_.zeta_order));
    return make_check("exponential-additivity",
                      "E_lam(z)_+- E_mu(z)_+- = E_{lam+mu}(z)_+-", worst, 1e-10);
}

}  // namespace twistlat

// ---------------------------------------------------------------------------
// n-th products through derivative jets at coincident points
// ---------------------------------------------------------------------------

namespace twistlat {

namespace {

using InnerJet = Jet<cplx>;
using WJet = Jet<InnerJet>;

InnerJet inner_constant(int order, const cplx& v) { return InnerJet(order, v); }

InnerJet inner_variable(int order, const cplx& v) {
    return InnerJet::variable(order, v);
}

// Taylor coefficients of psi(a0 + da).
InnerJet psi_inner_jet(int order, const cplx& a0) {
    InnerJet j(order, digamma(a0));
    double kfact = 1.0;
    for (int k = 1; k <= order; ++k) {
        kfact *= double(k);
        j[k] = polygamma(k, a0) / kfact;
    }
    return j;
}

Jet<cplx> jet_derivative(const Jet<cplx>& f) {
    Jet<cplx> d(f.order());
    for (int i = 0; i < f.order(); ++i) d[i] = double(i + 1) * f[i + 1];
    d[f.order()] = 0.0;
    return d;
}

// H_a(w) with H(0) = -(psi(a)+gamma), H'(w) = -((1-w)^{a-1} - 1)/w,
// as a w-jet with inner jets in the spectral direction.
WJet h_function_jet(int worder, int inorder, const cplx& a0) {
    InnerJet a = inner_variable(inorder, a0);
    InnerJet zero = inner_constant(inorder, 0.0);
    InnerJet one = inner_constant(inorder, 1.0);
    WJet w = WJet(worder, zero);
    if (worder >= 1) w[1] = one;
    WJet one_minus_w = -w + 1.0;
    WJet numer = jexp(jlog(one_minus_w) * (a - 1.0)) - 1.0;
    WJet dh = -numer.shift_down();
    InnerJet constant = -(psi_inner_jet(inorder, a0) + kEulerGamma);
    return dh.antiderivative(constant);
}

struct ScalarJet {
    // component k multiplies z^{base_exponent - k} at coincidence
    std::vector<cplx> comp;
    cplx base_exponent = 0.0;
};

// translate a w-jet (Taylor coefficients) into D_{z1}-components
ScalarJet translate_wjet(Jet<cplx> f, int p, const cplx& base_exponent) {
    ScalarJet out;
    out.base_exponent = base_exponent;
    out.comp.resize(size_t(p + 1), 0.0);
    Jet<cplx> one_minus_w(f.order(), cplx(1.0, 0.0));
    if (f.order() >= 1) one_minus_w[1] = cplx(-1.0, 0.0);
    Jet<cplx> sq = one_minus_w * one_minus_w;
    double kfact = 1.0;
    out.comp[0] = f[0];
    Jet<cplx> cur = f;
    for (int k = 1; k <= p; ++k) {
        cur = sq * jet_derivative(cur);
        kfact *= double(k);
        out.comp[size_t(k)] = cur[0] / kfact;
    }
    return out;
}

}  // namespace

namespace {

// Multiply by the unit z^c e^{-c zeta} (a representative of 1): moves the
// coincident zero-mode scalar into the exponent map, matching the canonical
// form used when assembling a single vertex operator.
LogField canonical_unit(const FieldAlgebra& alg, const LogField& f,
                        const cplx& c, int zeta_order) {
    if (std::abs(c) < 1e-300) return f;
    std::vector<cplx> expseries(size_t(zeta_order + 1));
    cplx term = 1.0;
    for (int k = 0; k <= zeta_order; ++k) {
        expseries[size_t(k)] = term;
        term *= -c / double(k + 1);
    }
    return alg.shift_exponent(alg.mul_zeta_poly(f, expseries), c);
}

}  // namespace

LogField FieldAlgebra::nth_product_exponentials(const IVec& lam, const IVec& mu,
                                                int n, int locality) const {
    const auto& jd = fm_->jordan();
    const int p = locality - 1 - n;
    if (p < 0) return zero_field();
    const long long n0 = lattice_->pair(lam, mu);
    const long long L = locality + n0;
    if (L < 0)
        throw BadInput("locality bound below the pairing requirement");

    const int nin = jd.nilpotency_index - 1;
    const int worder = p + int(L) + 1;

    // scalar (z1-z2)^K e^C as a w-jet
    Jet<cplx> creg(worder, cplx(0.0, 0.0));
    auto npow = jd.nilp_powers();
    for (const auto& blk : jd.blocks) {
        WJet h = h_function_jet(worder, nin, blk.alpha0_prime);
        Vec pl = blk.projector * to_complex(lam);
        for (int j = 0; j <= nin; ++j) {
            cplx pairing = lattice_->pair(Vec(npow[size_t(j)] * pl),
                                          to_complex(mu));
            if (std::abs(pairing) < 1e-300) continue;
            for (int k = 0; k <= worder; ++k) creg[k] -= h[k][j] * pairing;
        }
    }
    Jet<cplx> s_w = jexp(creg);
    // times (1-w)^{-K}
    Jet<cplx> one_minus_w(worder, cplx(1.0, 0.0));
    if (worder >= 1) one_minus_w[1] = cplx(-1.0, 0.0);
    Jet<cplx> g = s_w * jpow(one_minus_w, cplx(-double(locality), 0.0));
    // f = w^L g (as Taylor coefficients)
    Jet<cplx> f(worder, cplx(0.0, 0.0));
    for (int k = int(L); k <= worder; ++k) f[k] = g[k - int(L)];
    ScalarJet sj = translate_wjet(f, p, cplx(double(locality), 0.0));

    // operator factor jets
    auto jet_of_field = [&](const LogField& F) {
        std::vector<LogField> out;
        out.push_back(F);
        for (int k = 1; k <= p; ++k)
            out.push_back(scale(d_z(out.back()), cplx(1.0 / double(k), 0.0)));
        return out;
    };
    auto plain_jet = [&](const LogField& F) {
        std::vector<LogField> out(size_t(p + 1), zero_field());
        out[0] = F;
        return out;
    };
    auto jet_mul = [&](const std::vector<LogField>& A,
                       const std::vector<LogField>& B) {
        std::vector<LogField> C(size_t(p + 1), zero_field());
        for (int i = 0; i <= p; ++i)
            for (int j = 0; i + j <= p; ++j)
                C[size_t(i + j)] =
                    add(C[size_t(i + j)], multiply(A[size_t(i)], B[size_t(j)]));
        return C;
    };

    auto ab_field = [&](const IVec& v) {
        const Vec vc = to_complex(v);
        auto apoly = a_lambda(jd, vc);
        std::vector<cplx> zeta_arg(apoly.size() + 1, 0.0);
        for (size_t j = 0; j < apoly.size(); ++j) zeta_arg[j + 1] = apoly[j];
        auto poly = exp_poly(zeta_arg, bounds_.zeta_order);
        LogField f = zero_field();
        cplx b = b_lambda(jd, vc);
        for (int j = 0; j < int(poly.size()); ++j) {
            if (std::abs(poly[size_t(j)]) < 1e-300) continue;
            SparseOp op = SparseOp::identity(fm_->dim());
            op *= poly[size_t(j)];
            f.coeffs[make_key(b, j)] = std::move(op);
        }
        return f;
    };

    LogField ulam = zero_field();
    ulam.coeffs[make_key(0.0, 0)] = fm_->u_op(lam);
    LogField umu = zero_field();
    umu.coeffs[make_key(0.0, 0)] = fm_->u_op(mu);

    std::vector<LogField> sjet(size_t(p + 1), zero_field());
    for (int k = 0; k <= p; ++k) {
        if (std::abs(sj.comp[size_t(k)]) < 1e-300) continue;
        SparseOp op = SparseOp::identity(fm_->dim());
        op *= sj.comp[size_t(k)];
        sjet[size_t(k)].coeffs[make_key(sj.base_exponent - double(k), 0)] =
            std::move(op);
    }

    std::vector<LogField> total = sjet;
    total = jet_mul(total, plain_jet(ulam));
    total = jet_mul(total, jet_of_field(theta_field(lam, false)));
    total = jet_mul(total, plain_jet(umu));
    total = jet_mul(total, plain_jet(theta_field(mu, false)));
    total = jet_mul(total, jet_of_field(ab_field(lam)));
    total = jet_mul(total, plain_jet(ab_field(mu)));
    total = jet_mul(total, jet_of_field(e_factor(lam, +1)));
    total = jet_mul(total, plain_jet(e_factor(mu, +1)));
    total = jet_mul(total, jet_of_field(e_factor(lam, -1)));
    total = jet_mul(total, plain_jet(e_factor(mu, -1)));
    // normalize the coincident zero-mode scalar into the exponent map
    cplx c = jd.form(Vec(jd.pi0() * to_complex(lam)), to_complex(mu));
    return canonical_unit(*this, total[size_t(p)], c, bounds_.zeta_order);
}

FieldCheck FieldAlgebra::check_nth_product_identity(const IVec& lam,
                                                    const IVec& mu) const {
    const long long n0 = lattice_->pair(lam, mu);
    const int n = int(-1 - n0);
    const int K = int(std::max(0LL, -n0));
    LogField lhs = nth_product_exponentials(lam, mu, n, K);
    LogField rhs = scale(vertex_operator(IVec(lam + mu), false),
                         double(eps_->eval(lam, mu)));
    const int p = K - 1 - n;
    double worst = compare(lhs, rhs, bounds_.exp_bound - p - K - 1.0,
                           bounds_.zeta_order - p);
    return make_check("vertex-product-identity",
                      "Y(e^lam,z)_{(-1-(lam|mu))} Y(e^mu,z) = eps Y(e^{lam+mu},z)",
                      worst, 1e-8);
}

FieldCheck FieldAlgebra::check_nth_product_stability(const IVec& lam,
                                                     const IVec& mu) const {
    const long long n0 = lattice_->pair(lam, mu);
    const int n = int(-1 - n0);
    const int K = int(std::max(0LL, -n0));
    LogField a = nth_product_exponentials(lam, mu, n, K);
    LogField b = nth_product_exponentials(lam, mu, n, K + 1);
    const int p = K - n;  // derivative order of the larger computation
    double worst = compare(a, b, bounds_.exp_bound - p - K - 2.0,
                           bounds_.zeta_order - p);
    return make_check("vertex-product-stability",
                      "n-th product unchanged when the locality bound grows",
                      worst, 1e-8);
}

LogField FieldAlgebra::nth_product_currents(const Vec& a, const Vec& b,
                                            int n) const {
    const auto& jd = fm_->jordan();
    const int K = 2;
    const int p = K - 1 - n;
    if (p < 0) return zero_field();
    const int nin = jd.nilpotency_index - 1;
    const int worder = p + K + 1;

    auto npow = jd.nilp_powers();
    InnerJet zero_inner = inner_constant(nin, 0.0);
    WJet w = WJet(worder, zero_inner);
    if (worder >= 1) w[1] = inner_constant(nin, 1.0);
    WJet rho = -w + 1.0;

    // (z1-z2)^2 kappa as a w-jet with base exponent K - 2 = 0
    Jet<cplx> scalar(worder, cplx(0.0, 0.0));
    for (const auto& blk : jd.blocks) {
        Vec pa = blk.projector * a;
        if (pa.cwiseAbs().maxCoeff() < 1e-300) continue;
        InnerJet x = inner_variable(nin, blk.alpha0_prime);
        // w^2 * sum_{m in alpha+} r^{m+1} (m+N) r^N = rho^{x+1} (x w + rho)
        WJet g = jexp(jlog(rho) * (x + 1.0)) * (w * x + rho);
        for (int j = 0; j <= nin; ++j) {
            cplx pairing = lattice_->pair(Vec(npow[size_t(j)] * pa), b);
            if (std::abs(pairing) < 1e-300) continue;
            for (int k = 0; k <= worder; ++k) scalar[k] += g[k][j] * pairing;
        }
        if (blk.sign_class == SignClass::Zero && jd.nilpotency_index > 1) {
            // zero-zero cross term: w^2 r (N r^N pi0 a | b)
            WJet lr = jlog(rho);
            Jet<cplx> base(worder, cplx(0.0, 0.0));
            double jm1fact = 1.0;
            Vec term = jd.nilp * pa;
            for (int j = 1; j <= nin; ++j) {
                if (j >= 2) jm1fact *= double(j - 1);
                cplx pairing = lattice_->pair(term, b);
                term = jd.nilp * term;
                if (std::abs(pairing) < 1e-300) continue;
                // rho (ln rho)^{j-1} / (j-1)! * w^2, paired with N^j
                WJet piece = rho;
                for (int rpt = 0; rpt < j - 1; ++rpt) piece = piece * lr;
                for (int k = 0; k + 2 <= worder; ++k)
                    base[k + 2] += piece[k][0] / jm1fact * pairing;
            }
            for (int k = 0; k <= worder; ++k) scalar[k] += base[k];
        }
    }
    // multiply by (1-w)^{-K} from (z1-z2)^K = z2^K w^K (1-w)^{-K}
    Jet<cplx> one_minus_w(worder, cplx(1.0, 0.0));
    if (worder >= 1) one_minus_w[1] = cplx(-1.0, 0.0);
    scalar = scalar * jpow(one_minus_w, cplx(-double(K), 0.0));
    ScalarJet sj = translate_wjet(scalar, p, cplx(0.0, 0.0));

    // (z1-z2)^K alone for the normal-ordered part
    Jet<cplx> plainK(worder, cplx(0.0, 0.0));
    {
        Jet<cplx> gk = jpow(one_minus_w, cplx(-double(K), 0.0));
        for (int k = K; k <= worder; ++k) plainK[k] = gk[k - K];
    }
    ScalarJet sk = translate_wjet(plainK, p, cplx(double(K), 0.0));

    auto jet_of_field = [&](const LogField& F) {
        std::vector<LogField> out;
        out.push_back(F);
        for (int k = 1; k <= p; ++k)
            out.push_back(scale(d_z(out.back()), cplx(1.0 / double(k), 0.0)));
        return out;
    };
    auto plain_jet = [&](const LogField& F) {
        std::vector<LogField> out(size_t(p + 1), zero_field());
        out[0] = F;
        return out;
    };
    auto jet_mul = [&](const std::vector<LogField>& A,
                       const std::vector<LogField>& B) {
        std::vector<LogField> C(size_t(p + 1), zero_field());
        for (int i = 0; i <= p; ++i)
            for (int j = 0; i + j <= p; ++j)
                C[size_t(i + j)] =
                    add(C[size_t(i + j)], multiply(A[size_t(i)], B[size_t(j)]));
        return C;
    };
    auto scalar_jet_fields = [&](const ScalarJet& s) {
        std::vector<LogField> out(size_t(p + 1), zero_field());
        for (int k = 0; k <= p; ++k) {
            if (std::abs(s.comp[size_t(k)]) < 1e-300) continue;
            SparseOp op = SparseOp::identity(fm_->dim());
            op *= s.comp[size_t(k)];
            out[size_t(k)].coeffs[make_key(s.base_exponent - double(k), 0)] =
                std::move(op);
        }
        return out;
    };

    LogField B = current(b, AllModes);
    std::vector<LogField> colon =
        jet_mul(jet_of_field(current(a, CreationModes)), plain_jet(B));
    {
        std::vector<LogField> second =
            jet_mul(plain_jet(B),
                    jet_of_field(current(a, AnnihilationAndZeroModes)));
        for (int k = 0; k <= p; ++k)
            colon[size_t(k)] = add(colon[size_t(k)], second[size_t(k)]);
    }
    std::vector<LogField> total = jet_mul(scalar_jet_fields(sk), colon);
    {
        std::vector<LogField> contraction = scalar_jet_fields(sj);
        for (int k = 0; k <= p; ++k)
            total[size_t(k)] = add(total[size_t(k)], contraction[size_t(k)]);
    }
    return total[size_t(p)];
}

FieldCheck FieldAlgebra::check_current_products(const Vec& a, const Vec& b) const {
    double worst = 0.0;
    {  // (1)-product: (a|b) Id
        LogField got = nth_product_currents(a, b, 1);
        LogField want = scale(identity_field(), lattice_->pair(a, b));
        worst = std::max(worst, compare(got, want, bounds_.exp_bound - 4.0,
                                        bounds_.zeta_order - 1));
    }
    {  // (0)-product vanishes for currents
        LogField got = nth_product_currents(a, b, 0);
        worst = std::max(worst,
                         compare(got, zero_field(), bounds_.exp_bound - 5.0,
                                 bounds_.zeta_order - 2));
    }
    {  // n >= locality bound: zero by definition
        LogField got = nth_product_currents(a, b, 2);
        worst = std::max(worst, compare(got, zero_field(), bounds_.exp_bound,
                                        bounds_.zeta_order));
    }
    return make_check("current-products",
                      "a(z)_(1) b(z) = (a|b) Id, a(z)_(0) b(z) = 0", worst,
                      1e-9);
}

FieldCheck FieldAlgebra::product_limit_check(const IVec& lam, const IVec& mu,
                                             long oracle_terms) const {
    const auto& jd = fm_->jordan();
    const Vec lamc = to_complex(lam), muc = to_complex(mu);
    const long long n0 = lattice_->pair(lam, mu);

    LogField ulam = zero_field();
    ulam.coeffs[make_key(0.0, 0)] = fm_->u_op(lam);
    LogField umu = zero_field();
    umu.coeffs[make_key(0.0, 0)] = fm_->u_op(mu);

    LogField core = multiply(multiply(ulam, theta_field(lam, false)),
                             multiply(umu, theta_field(mu, false)));

    auto apl = a_lambda(jd, lamc);
    auto apm = a_lambda(jd, muc);
    std::vector<cplx> zeta_arg(std::max(apl.size(), apm.size()) + 1, 0.0);
    for (size_t j = 0; j < apl.size(); ++j) zeta_arg[j + 1] += apl[j];
    for (size_t j = 0; j < apm.size(); ++j) zeta_arg[j + 1] += apm[j];
    core = mul_zeta_poly(core, exp_poly(zeta_arg, bounds_.zeta_order));

    cplx shift = b_lambda(jd, lamc) + b_lambda(jd, muc) - double(n0);
    core = shift_exponent(core, shift);
    core = multiply(core, e_factor(IVec(lam + mu), +1));
    core = multiply(core, e_factor(IVec(lam + mu), -1));
    core = scale(core, B_oracle(jd, lamc, muc, oracle_terms));
    core = canonical_unit(*this, core, jd.form(Vec(jd.pi0() * lamc), muc),
                          bounds_.zeta_order);

    LogField rhs = scale(vertex_operator(IVec(lam + mu), false),
                         double(eps_->eval(lam, mu)));
    double worst = compare(core, rhs, bounds_.exp_bound - 1.0,
                           bounds_.zeta_order);
    return make_check("product-coincident-limit",
                      "(z1-z2)^{-(lam|mu)} Y Y at z1=z2 = eps Y(e^{lam+mu},z)",
                      worst, 1e-6);
}

// ---------------------------------------------------------------------------
// scalar locality transport
// ---------------------------------------------------------------------------

namespace {

// r^a Phi(r,1,a) as an inner jet; |r| < 1 via the series.
InnerJet g_series_jet(int order, const cplx& r, const cplx& a0) {
    InnerJet a = inner_variable(order, a0);
    InnerJet sum = inner_constant(order, 0.0);
    cplx rp = 1.0;
    for (int k = 0; k < 20000; ++k) {
        InnerJet denom = a + double(k);
        InnerJet term = inner_constant(order, rp) / denom;
        sum = sum + term;
        rp *= r;
        if (k > 8 && std::abs(rp) < 1e-18) break;
    }
    return jexp(a * std::log(r)) * sum;
}

// r^a Phi(r,1,a) = -Log(1-r) + H_a(r) with H along the ray from 0 to r.
// Valid on the cut plane for any a; used near integer spectral points where
// the reflected form degenerates.
InnerJet g_ray_integral_jet(int order, const cplx& r, const cplx& a0) {
    InnerJet a = inner_variable(order, a0);
    const cplx logr = std::log(r);
    const double h = 0.05;
    InnerJet sum = inner_constant(order, 0.0);
    for (int k = -130; k <= 130; ++k) {
        double t = h * k;
        double sh = 0.5 * kPi * std::sinh(t);
        double em = std::exp(-2.0 * sh);
        if (!(em > 1e-300 && em < 1e300)) continue;
        double s = 1.0 / (1.0 + em);
        double logs = -std::log1p(em);
        double w = kPi * std::cosh(t) * em * s * s;
        if (s <= 0.0 || s >= 1.0 || w < 1e-300) continue;
        InnerJet numer = jexp((a - 1.0) * (logs + logr)) - 1.0;
        sum = sum + numer * (w * r / (1.0 - s * r));
    }
    InnerJet g = sum * h;
    g[0] -= std::log(1.0 - r);
    return g;
}

// r^a Phi(r,1,a) for |r| > 1 off the real axis, via the transported form.
InnerJet g_reflect_jet(int order, const cplx& r, const cplx& a0) {
    InnerJet a = inner_variable(order, a0);
    const cplx logr = std::log(r);
    const double sgn = std::arg(logr) > 0 ? 1.0 : -1.0;
    InnerJet cotj = jcot(a * kPi);
    // Phi(1/r, 1, 1-a) by its series
    InnerJet inner_sum = inner_constant(order, 0.0);
    const cplx ri = 1.0 / r;
    cplx rp = 1.0;
    for (int k = 0; k < 20000; ++k) {
        InnerJet denom = -a + double(k + 1);
        inner_sum = inner_sum + inner_constant(order, rp) / denom;
        rp *= ri;
        if (k > 8 && std::abs(rp) < 1e-18) break;
    }
    // r^a Phi(r,1,a) = pi i sgn + pi cot(pi a) + r^{a-1} Phi(1/r,1,1-a)
    return inner_constant(order, cplx(0, kPi) * sgn) + cotj * kPi +
           jexp((a - 1.0) * logr) * inner_sum;
}

}  // namespace

std::vector<LocalityPoint> scalar_locality_check(
    const JordanData& jd, const Lattice& lattice, const IVec& lam,
    const IVec& mu, const std::vector<cplx>& ratios) {
    std::vector<LocalityPoint> points;
    const int nin = jd.nilpotency_index - 1;
    const long long n0 = lattice.pair(lam, mu);
    const Vec lamc = to_complex(lam), muc = to_complex(mu);
    auto npow = jd.nilp_powers();

    const long long par =
        (lattice.norm2(lam) * lattice.norm2(mu) + n0) % 2;
    const double sign = (par % 2 + 2) % 2 == 0 ? 1.0 : -1.0;
    const cplx C = C_constant(jd, lattice, lam, mu);

    for (const cplx& r : ratios) {
        // --- LHS: the coincidence-regular function at z1 = 1, z2 = r ---
        cplx expo = std::log(1.0 - r) * double(n0);
        for (const auto& blk : jd.blocks) {
            const double dist_to_int =
                std::abs(blk.alpha0_prime.real() -
                         std::round(blk.alpha0_prime.real())) +
                std::abs(blk.alpha0_prime.imag());
            InnerJet g = dist_to_int < 0.1
                             ? g_ray_integral_jet(nin, r, blk.alpha0_prime)
                             : g_reflect_jet(nin, r, blk.alpha0_prime);
            Vec pl = blk.projector * lamc;
            for (int j = 0; j <= nin; ++j) {
                cplx pairing = lattice.pair(Vec(npow[size_t(j)] * pl), muc);
                if (std::abs(pairing) < 1e-300) continue;
                expo += g[j] * pairing;
            }
        }
        cplx lhs = std::exp(-expo);

        // --- RHS: transported expansion in |z2| > |z1| ---
        cplx expo2 = std::log(1.0 - 1.0 / r) * double(n0);
        for (const auto& blk : jd.blocks) {
            InnerJet g = g_series_jet(nin, 1.0 / r, blk.alpha0_prime);
            Vec pm = blk.projector * muc;
            for (int j = 0; j <= nin; ++j) {
                cplx pairing = lattice.pair(Vec(npow[size_t(j)] * pm), lamc);
                if (std::abs(pairing) < 1e-300) continue;
                expo2 += g[j] * pairing;
            }
        }
        cplx rmu = std::pow(r, cplx(-double(n0), 0.0)) * std::exp(-expo2);

        // exp((1/N)(r^N - 1) lam0 | mu)
        cplx middle = 0.0;
        Vec lam0 = jd.pi0() * lamc;
        const cplx logr = std::log(r);
        double kfact = 1.0;
        Vec term = lam0;
        for (int k = 1; k <= nin + 1; ++k) {
            kfact *= double(k);
            middle += std::pow(logr, k) / kfact * lattice.pair(term, muc);
            term = jd.nilp * term;
        }
        cplx rhs = sign / C * std::exp(middle) * rmu;

        points.push_back({r, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs))});
    }
    return points;
}

}  // namespace twistlat
