#include "twistlat/lattice.hpp"

#include <algorithm>

namespace twistlat {

namespace {

// Exact determinant of an integer matrix (Bareiss fraction-free elimination).
long long integer_det(const IMat& m) {
    const int n = int(m.rows());
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> a =
        m.cast<long long>();
    long long prev = 1;
    int sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (a(k, k) == 0) {
            int p = -1;
            for (int r = k + 1; r < n; ++r)
                if (a(r, k) != 0) { p = r; break; }
            if (p < 0) return 0;
            a.row(k).swap(a.row(p));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
        prev = a(k, k);
    }
    return sign * a(n - 1, n - 1);
}

}  // namespace

void Lattice::validate() const {
    if (rank <= 0) throw BadInput("lattice rank must be positive");
    if (gram.rows() != rank || gram.cols() != rank)
        throw BadInput("gram matrix has wrong shape");
    if (gram != gram.transpose().eval())
        throw BadInput("gram matrix must be symmetric");
    if (integer_det(gram) == 0)
        throw BadInput("gram matrix must be nondegenerate");
    if (!labels.empty() && int(labels.size()) != rank)
        throw BadInput("label count does not match rank");
}

long long Lattice::pair(const IVec& a, const IVec& b) const {
    long long s = 0;
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j)
            s += (long long)(a[i]) * gram(i, j) * b[j];
    return s;
}

cplx Lattice::pair(const Vec& a, const Vec& b) const {
    cplx s = 0.0;
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < rank; ++j)
            s += a[i] * double(gram(i, j)) * b[j];
    return s;
}

Mat Lattice::gram_c() const { return gram.cast<double>().cast<cplx>(); }

void LatticeAutomorphism::validate(const Lattice& lattice) const {
    const int d = lattice.rank;
    if (matrix.rows() != d || matrix.cols() != d)
        throw BadInput("automorphism matrix has wrong shape");
    const long long det = integer_det(matrix);
    if (det != 1 && det != -1)
        throw BadInput("automorphism must have determinant +-1");
    IMat lhs = matrix.transpose() * lattice.gram * matrix;
    if (lhs != lattice.gram)
        throw BadInput("automorphism does not preserve the bilinear form");
}

int Cocycle::eval(const IVec& lam, const IVec& mu) const {
    const int d = int(table.rows());
    long long parity = 0;
    for (int i = 0; i < d; ++i) {
        if (lam[i] == 0) continue;
        for (int j = 0; j < d; ++j) {
            if (table(i, j) == -1) parity += (long long)(lam[i]) * mu[j];
        }
    }
    return (parity % 2 == 0) ? 1 : -1;
}

Cocycle build_epsilon(const Lattice& lattice) {
    const int d = lattice.rank;
    Cocycle c;
    c.table = IMat::Ones(d, d);
    for (int i = 0; i < d; ++i) {
        const long long q = lattice.gram(i, i);
        if (((q * (q + 1) / 2) % 2 + 2) % 2 == 1) c.table(i, i) = -1;
        for (int j = 0; j < i; ++j) {
            const long long e = lattice.gram(i, j) +
                                (long long)lattice.gram(i, i) * lattice.gram(j, j);
            if (((e % 2) + 2) % 2 == 1) c.table(i, j) = -1;
        }
    }
    return c;
}

CocycleReport verify_epsilon(const Cocycle& c, const Lattice& lattice,
                             int trials, Rng& rng) {
    CocycleReport report;
    report.trials = trials;
    const int d = lattice.rank;
    auto check_pair = [&](const IVec& lam, const IVec& mu) {
        const long long n2l = lattice.norm2(lam);
        long long diag = (n2l * (n2l + 1) / 2) % 2;
        int want = (diag + 2) % 2 == 0 ? 1 : -1;
        if (c.eval(lam, lam) != want)
            report.failures.push_back({"self-pairing sign", lam, lam});
        long long e = (lattice.pair(lam, mu) +
                       n2l * lattice.norm2(mu)) % 2;
        int want2 = ((e + 2) % 2 == 0) ? 1 : -1;
        if (c.eval(lam, mu) * c.eval(mu, lam) != want2)
            report.failures.push_back({"symmetrized product sign", lam, mu});
    };
    // Basis pairs first, then random vectors with coordinates in [-5,5].
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            check_pair(IVec::Unit(d, i), IVec::Unit(d, j));
    for (int t = 0; t < trials; ++t)
        check_pair(random_ivec(rng, d, -5, 5), random_ivec(rng, d, -5, 5));
    return report;
}

EtaMap::EtaMap(Lattice lattice, LatticeAutomorphism phi, Cocycle eps,
               IVec basis_signs)
    : lattice_(std::move(lattice)), phi_(std::move(phi)), eps_(std::move(eps)),
      basis_signs_(std::move(basis_signs)) {}

int EtaMap::eval(const IVec& lam) const {
    std::vector<int> key(lam.data(), lam.data() + lam.size());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    int result;
    if (lam.isZero()) {
        result = 1;
    } else {
        int i = 0;
        while (lam[i] == 0) ++i;
        // Peel one basis step: lam = rest + step, then
        // eta(lam) = eta(rest)eta(step)eps(rest,step)eps(phi rest,phi step).
        const int s = lam[i] > 0 ? 1 : -1;
        IVec step = s * IVec::Unit(lam.size(), i);
        IVec rest = lam - step;
        int eta_step;
        if (s == 1) {
            eta_step = basis_signs_[i];
        } else {
            // eta(e)eta(-e)eps(e,-e) = eta(0)eps(phi e,-phi e)
            IVec e = IVec::Unit(lam.size(), i);
            eta_step = basis_signs_[i] * eps_.eval(e, -e) *
                       eps_.eval(phi_.apply(e), -phi_.apply(e));
        }
        if (rest.isZero()) {
            result = eta_step;
        } else {
            result = eval(rest) * eta_step * eps_.eval(rest, step) *
                     eps_.eval(phi_.apply(rest), phi_.apply(step));
        }
    }
    cache_[key] = result;
    return result;
}

namespace {

bool eta_consistent(const EtaMap& eta, const Lattice& lattice,
                    const LatticeAutomorphism& phi, const Cocycle& eps,
                    Rng& rng, int trials) {
    const int d = lattice.rank;
    for (int t = 0; t < trials; ++t) {
        IVec lam = random_ivec(rng, d, -4, 4);
        IVec mu = random_ivec(rng, d, -4, 4);
        int lhs = eta.eval(lam) * eta.eval(mu) * eps.eval(lam, mu);
        int rhs = eta.eval(lam + mu) *
                  eps.eval(phi.apply(lam), phi.apply(mu));
        if (lhs != rhs) return false;
    }
    return true;
}

}  // namespace

EtaMap build_eta(const Lattice& lattice, const LatticeAutomorphism& phi,
                 const Cocycle& eps, Rng& rng, int trials) {
    const int d = lattice.rank;
    {
        EtaMap eta(lattice, phi, eps, IVec::Ones(d));
        if (eta_consistent(eta, lattice, phi, eps, rng, trials)) return eta;
    }
    for (unsigned mask = 1; mask < (1u << d); ++mask) {
        IVec signs = IVec::Ones(d);
        for (int i = 0; i < d; ++i)
            if (mask & (1u << i)) signs[i] = -1;
        EtaMap eta(lattice, phi, eps, signs);
        if (eta_consistent(eta, lattice, phi, eps, rng, trials)) return eta;
    }
    throw EtaInconsistent("no sign assignment satisfies the compatibility recursion");
}

EtaMap build_eta_with_signs(const Lattice& lattice,
                            const LatticeAutomorphism& phi, const Cocycle& eps,
                            const IVec& basis_signs, Rng& rng, int trials) {
    EtaMap eta(lattice, phi, eps, basis_signs);
    if (!eta_consistent(eta, lattice, phi, eps, rng, trials))
        throw EtaInconsistent("prescribed basis signs break the recursion");
    return eta;
}

}  // namespace twistlat
