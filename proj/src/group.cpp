#include "twistlat/group.hpp"

#include <cmath>
#include <limits>

namespace twistlat {

namespace {

using LMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

void swap_rows(LMat& m, LMat& u, int a, int b) {
    m.row(a).swap(m.row(b));
    u.row(a).swap(u.row(b));
}
void swap_cols(LMat& m, LMat& v, int a, int b) {
    m.col(a).swap(m.col(b));
    v.col(a).swap(v.col(b));
}

}  // namespace

SmithForm smith_normal_form(const IMat& input) {
    const int n = int(input.rows());
    SmithForm s;
    s.d = input.cast<long long>();
    s.u = LMat::Identity(n, n);
    s.v = LMat::Identity(n, n);
    LMat& m = s.d;

    for (int k = 0; k < n; ++k) {
        // Find a pivot with minimal nonzero absolute value in the submatrix.
        while (true) {
            int pi = -1, pj = -1;
            long long best = 0;
            for (int i = k; i < n; ++i)
                for (int j = k; j < n; ++j)
                    if (m(i, j) != 0 &&
                        (pi < 0 || std::llabs(m(i, j)) < best)) {
                        best = std::llabs(m(i, j));
                        pi = i;
                        pj = j;
                    }
            if (pi < 0) break;  // all zero, done with this corner
            if (pi != k) swap_rows(m, s.u, pi, k);
            if (pj != k) swap_cols(m, s.v, pj, k);

            bool clean = true;
            for (int i = k + 1; i < n; ++i) {
                long long q = m(i, k) / m(k, k);
                if (q != 0) {
                    m.row(i) -= q * m.row(k);
                    s.u.row(i) -= q * s.u.row(k);
                }
                if (m(i, k) != 0) clean = false;
            }
            for (int j = k + 1; j < n; ++j) {
                long long q = m(k, j) / m(k, k);
                if (q != 0) {
                    m.col(j) -= q * m.col(k);
                    s.v.col(j) -= q * s.v.col(k);
                }
                if (m(k, j) != 0) clean = false;
            }
            if (clean) break;
        }
        if (m(k, k) < 0) {
            m.row(k) = -m.row(k);
            s.u.row(k) = -s.u.row(k);
        }
    }
    return s;
}

GroupContext::GroupContext(const Lattice& lattice,
                           const LatticeAutomorphism& phi,
                           const JordanData& jd, const Cocycle& eps,
                           const EtaMap& eta)
    : lattice_(&lattice), jd_(&jd), eps_(&eps), eta_(&eta) {
    phi_int_ = phi.matrix;
    pi0_ = jd.pi0();
    tau_matrix_ = one_minus_phiu_over_n(jd) * pi0_;
    IMat one_minus_phi =
        IMat::Identity(lattice.rank, lattice.rank) - phi.matrix;
    snf_ = smith_normal_form(one_minus_phi);
    for (int i = 0; i < lattice.rank; ++i) {
        if (snf_.d(i, i) != 0) continue;
        kernel_basis_.push_back(snf_.v.col(i).cast<int>());
    }
    if (!kernel_basis_.empty()) {
        kernel_tau_ = Mat(lattice.rank, int(kernel_basis_.size()));
        for (size_t k = 0; k < kernel_basis_.size(); ++k)
            kernel_tau_.col(int(k)) =
                tau_matrix_ * to_complex(kernel_basis_[k]);
        kernel_solver_ = (kernel_tau_.adjoint() * kernel_tau_).inverse() *
                         kernel_tau_.adjoint();
    }
    for (int i = 0; i < lattice.rank && unimodular_b_; ++i)
        for (int j = 0; j < lattice.rank; ++j) {
            cplx b = B_constant(jd, to_complex(IVec::Unit(lattice.rank, i)),
                                to_complex(IVec::Unit(lattice.rank, j)));
            if (std::abs(std::abs(b) - 1.0) > 1e-9) {
                unimodular_b_ = false;
                break;
            }
        }
}

cplx GroupContext::B_cached(const IVec& lam, const IVec& mu) const {
    std::vector<int> key(size_t(2 * lattice_->rank));
    for (int i = 0; i < lattice_->rank; ++i) {
        key[size_t(i)] = lam[i];
        key[size_t(lattice_->rank + i)] = mu[i];
    }
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = bcache_.find(key);
        if (it != bcache_.end()) return it->second;
    }
    cplx value = B_constant(*jd_, to_complex(lam), to_complex(mu));
    std::lock_guard<std::mutex> lock(cache_mutex_);
    bcache_.emplace(std::move(key), value);  // idempotent on collision
    return value;
}

size_t GroupContext::cache_size() const {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    return bcache_.size();
}

GroupElement GroupContext::identity() const {
    return {cplx(1.0, 0.0), IVec::Zero(lattice_->rank),
            Vec::Zero(lattice_->rank)};
}

GroupElement GroupContext::u_element(const IVec& lam) const {
    return {cplx(1.0, 0.0), lam, Vec::Zero(lattice_->rank)};
}

GroupElement GroupContext::scalar_element(const cplx& c) const {
    if (std::abs(c) == 0.0) throw BadInput("group scalar must be nonzero");
    return {c, IVec::Zero(lattice_->rank), Vec::Zero(lattice_->rank)};
}

GroupElement GroupContext::exp_element(const Vec& h0) const {
    Vec h = pi0_ * h0;
    if ((h - h0).cwiseAbs().maxCoeff() > 1e-9)
        throw BadInput("exp_element argument must lie in the fixed subspace");
    return {cplx(1.0, 0.0), IVec::Zero(lattice_->rank), h};
}

GroupElement GroupContext::multiply(const GroupElement& x,
                                    const GroupElement& y) const {
    GroupElement out;
    out.lam = x.lam + y.lam;
    out.h = x.h + y.h;
    cplx pairing = lattice_->pair(x.h, to_complex(y.lam)) -
                   0.5 * lattice_->pair(x.h, jd_->nilp * y.h);
    cplx eps = double(eps_->eval(x.lam, y.lam));
    out.c = x.c * y.c * std::exp(pairing) * eps / B_cached(x.lam, y.lam);
    // drift snap: keep exactly-unimodular chains on the unit circle
    if (unimodular_b_) {
        double m = std::abs(out.c);
        if (std::abs(m - 1.0) < 1e-13 && m != 1.0) out.c /= m;
    }
    return out;
}

GroupElement GroupContext::inverse(const GroupElement& x) const {
    GroupElement out;
    out.lam = -x.lam;
    out.h = -x.h;
    cplx eps = double(eps_->eval(x.lam, x.lam));
    out.c = eps / (x.c * B_cached(x.lam, x.lam)) *
            std::exp(lattice_->pair(x.h, to_complex(x.lam)));
    return out;
}

GroupElement GroupContext::tau_element(const IVec& lam) const {
    return tau_element_h(to_complex(lam));
}

GroupElement GroupContext::tau_element_h(const Vec& h) const {
    GroupElement out;
    out.c = 1.0;
    out.lam = IVec::Zero(lattice_->rank);
    out.h = tau_matrix_ * h;
    return out;
}

GroupElement GroupContext::g_element(const IVec& lam) const {
    IVec phil = phi_int_ * lam;
    GroupElement out = inverse(u_element(phil));
    out = multiply(out, u_element(lam));
    out = multiply(out, tau_element(lam));
    cplx scale = double(eta_->eval(lam)) *
                 std::exp(kTwoPiI * c_lambda(*jd_, to_complex(lam)));
    out.c *= scale;
    return out;
}

double GroupContext::distance(const GroupElement& x,
                              const GroupElement& y) const {
    if (x.lam != y.lam) return std::numeric_limits<double>::infinity();
    double dh = (x.h - y.h).cwiseAbs().maxCoeff();
    double dc = std::abs(x.c - y.c) / std::max(1.0, std::abs(y.c));
    return std::max(dh, dc);
}

bool GroupContext::is_identity(const GroupElement& x, double tol) const {
    return distance(x, identity()) <= tol;
}

cplx GroupContext::adjoint_mode_shift(const GroupElement& x, const Vec& a,
                                      const cplx& m) const {
    if (std::abs(m) > 1e-12) return cplx(0.0, 0.0);
    Vec target = jd_->nilp * x.h - to_complex(x.lam);
    return lattice_->pair(pi0_ * a, target);
}

GroupContext::CentralityReport GroupContext::check_central(
    const GroupElement& x, int trials, Rng& rng, double tol) const {
    CentralityReport report;
    report.trials = trials;
    for (int t = 0; t < trials; ++t) {
        GroupElement y = random_element(rng);
        GroupElement comm =
            multiply(multiply(x, y), multiply(inverse(x), inverse(y)));
        report.max_residual =
            std::max(report.max_residual, distance(comm, identity()));
    }
    report.central = report.max_residual <= tol;
    return report;
}

GNormalForm GroupContext::reduce_mod_Nphi(const GroupElement& x) const {
    const int n = lattice_->rank;
    Eigen::Matrix<long long, Eigen::Dynamic, 1> y =
        snf_.u * x.lam.cast<long long>();
    Eigen::Matrix<long long, Eigen::Dynamic, 1> q(n);
    for (int i = 0; i < n; ++i) {
        long long d = snf_.d(i, i);
        if (d > 0) {
            long long r = ((y[i] % d) + d) % d;  // minimal nonnegative residue
            q[i] = (y[i] - r) / d;
        } else {
            q[i] = 0;
        }
    }
    IVec mu = (snf_.v * q).cast<int>();
    // second stage: reduce the exponential part along ker(1 - phi), whose
    // coboundary elements are pure tau shifts
    if (!kernel_basis_.empty()) {
        Vec resid = x.h - tau_matrix_ * to_complex(mu);
        Vec coeff = kernel_solver_ * resid;
        for (size_t k = 0; k < kernel_basis_.size(); ++k) {
            long nk = (long)std::floor(coeff[int(k)].real() + 1e-7);
            if (nk != 0) mu += int(nk) * kernel_basis_[k];
        }
    }
    GNormalForm nf;
    nf.shift = mu;
    nf.rep = multiply(x, inverse(g_element(mu)));
    return nf;
}

GroupElement GroupContext::random_element(Rng& rng, int coord_bound) const {
    const int d = lattice_->rank;
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    GroupElement x = scalar_element(std::exp(cplx(0.0, angle(rng))));
    x = multiply(x, u_element(random_ivec(rng, d, -coord_bound, coord_bound)));
    x = multiply(x, tau_element(random_ivec(rng, d, -coord_bound, coord_bound)));
    return x;
}

}  // namespace twistlat
