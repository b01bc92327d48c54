#include "twistlat/decomp.hpp"

#include <algorithm>
#include <cmath>

#include <gmpxx.h>

namespace twistlat {

namespace {

using QPoly = std::vector<mpq_class>;  // coefficient i multiplies x^i

int degree(const QPoly& p) {
    for (int i = int(p.size()) - 1; i >= 0; --i)
        if (p[i] != 0) return i;
    return -1;
}

void trim(QPoly& p) { p.resize(size_t(std::max(0, degree(p)) + 1)); }

QPoly derivative(const QPoly& p) {
    if (p.size() <= 1) return {mpq_class(0)};
    QPoly d(p.size() - 1);
    for (size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * mpq_class(long(i));
    return d;
}

// Exact division with remainder over Q.
void divmod(const QPoly& a, const QPoly& b, QPoly& q, QPoly& r) {
    const int db = degree(b);
    r = a;
    trim(r);
    q.assign(size_t(std::max(0, degree(a) - db) + 1), mpq_class(0));
    while (degree(r) >= db && degree(r) >= 0) {
        const int dr = degree(r);
        mpq_class c = r[dr] / b[db];
        q[dr - db] = c;
        for (int i = 0; i <= db; ++i) r[dr - db + i] -= c * b[i];
        trim(r);
        if (degree(r) < 0) break;
    }
}

QPoly monic(const QPoly& p) {
    QPoly m = p;
    trim(m);
    const int d = degree(m);
    if (d < 0) return m;
    mpq_class lead = m[d];
    for (auto& c : m) c /= lead;
    return m;
}

QPoly gcd(QPoly a, QPoly b) {
    a = monic(a);
    b = monic(b);
    while (degree(b) >= 0) {
        QPoly q, r;
        divmod(a, b, q, r);
        a = b;
        b = monic(r);
    }
    return monic(a);
}

QPoly divide_exact(const QPoly& a, const QPoly& b) {
    QPoly q, r;
    divmod(a, b, q, r);
    return q;
}

QPoly subtract(const QPoly& a, const QPoly& b) {
    QPoly r = a;
    if (r.size() < b.size()) r.resize(b.size(), mpq_class(0));
    for (size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    trim(r);
    return r;
}

// Yun's squarefree decomposition; returns (factor, multiplicity) pairs.
std::vector<std::pair<QPoly, int>> squarefree_decomposition(const QPoly& f) {
    std::vector<std::pair<QPoly, int>> out;
    QPoly fp = derivative(f);
    QPoly g = gcd(f, fp);
    QPoly w = divide_exact(monic(f), g);
    QPoly y = divide_exact(fp, g);
    QPoly z = subtract(y, derivative(w));
    int i = 1;
    while (degree(w) > 0) {
        QPoly gi = gcd(w, z);
        if (degree(gi) > 0) out.emplace_back(monic(gi), i);
        w = divide_exact(w, gi);
        QPoly q, r;
        divmod(z, gi, q, r);
        y = q;
        z = subtract(y, derivative(w));
        ++i;
    }
    return out;
}

// Faddeev-LeVerrier characteristic polynomial of an integer matrix, exact.
QPoly integer_charpoly(const IMat& a) {
    const int n = int(a.rows());
    std::vector<std::vector<mpq_class>> A(n, std::vector<mpq_class>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A[i][j] = mpq_class(a(i, j));

    auto matmul = [&](const std::vector<std::vector<mpq_class>>& x,
                      const std::vector<std::vector<mpq_class>>& y) {
        std::vector<std::vector<mpq_class>> r(n, std::vector<mpq_class>(n, 0));
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int j = 0; j < n; ++j) r[i][j] += x[i][k] * y[k][j];
        return r;
    };
    auto trace = [&](const std::vector<std::vector<mpq_class>>& x) {
        mpq_class t = 0;
        for (int i = 0; i < n; ++i) t += x[i][i];
        return t;
    };

    QPoly p(size_t(n + 1), mpq_class(0));
    p[n] = 1;
    std::vector<std::vector<mpq_class>> M(n, std::vector<mpq_class>(n, 0));
    for (int i = 0; i < n; ++i) M[i][i] = 1;  // M_0 = I
    mpq_class c = 1;
    for (int k = 1; k <= n; ++k) {
        // M_k = A M_{k-1} + c_{n-k+1} I  (with previous coefficient applied)
        auto AM = matmul(A, M);
        c = -trace(AM) / k;
        p[n - k] = c;
        M = AM;
        for (int i = 0; i < n; ++i) M[i][i] += c;
    }
    return p;
}

std::vector<cplx> to_complex_coeffs(const QPoly& p) {
    std::vector<cplx> c(p.size());
    for (size_t i = 0; i < p.size(); ++i) c[i] = cplx(p[i].get_d(), 0.0);
    return c;
}

cplx poly_eval(const std::vector<cplx>& c, const cplx& x) {
    cplx v = 0.0;
    for (int i = int(c.size()) - 1; i >= 0; --i) v = v * x + c[size_t(i)];
    return v;
}

// Aberth-Ehrlich root finder for a squarefree polynomial.
std::vector<cplx> aberth_roots(const std::vector<cplx>& coeffs) {
    const int n = int(coeffs.size()) - 1;
    if (n <= 0) return {};
    std::vector<cplx> dcoeffs(static_cast<size_t>(n));
    for (int i = 1; i <= n; ++i) dcoeffs[size_t(i - 1)] = double(i) * coeffs[size_t(i)];

    std::vector<cplx> z(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double angle = 2.0 * kPi * (i + 0.25) / n;
        z[size_t(i)] = 1.3 * cplx(std::cos(angle), std::sin(angle));
    }
    for (int iter = 0; iter < 300; ++iter) {
        double moved = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx p = poly_eval(coeffs, z[size_t(i)]);
            cplx dp = poly_eval(dcoeffs, z[size_t(i)]);
            if (std::abs(dp) < 1e-300) continue;
            cplx ratio = p / dp;
            cplx s = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) s += 1.0 / (z[size_t(i)] - z[size_t(j)]);
            cplx delta = ratio / (1.0 - ratio * s);
            z[size_t(i)] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-15) break;
    }
    // Newton polish.
    for (auto& root : z)
        for (int it = 0; it < 8; ++it) {
            cplx dp = poly_eval(dcoeffs, root);
            if (std::abs(dp) < 1e-300) break;
            root -= poly_eval(coeffs, root) / dp;
        }
    return z;
}

Mat matrix_exponent_nilpotent(const Mat& x, double tol) {
    // exp(x) for (numerically) nilpotent x via the terminating series.
    const int d = int(x.rows());
    Mat sum = Mat::Identity(d, d);
    Mat term = Mat::Identity(d, d);
    for (int k = 1; k <= d + 2; ++k) {
        term = (term * x) / double(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < tol * 1e-4) break;
    }
    return sum;
}

}  // namespace

cplx alpha0_of(const cplx& eigenvalue) {
    if (std::abs(eigenvalue) == 0.0)
        throw ZeroEigenvalue("alpha0 undefined at eigenvalue 0");
    const double y = std::log(std::abs(eigenvalue)) / (2.0 * kPi);
    double x = -std::arg(eigenvalue) / (2.0 * kPi);
    if (x > 0.0) x -= 1.0;  // arg in (-pi, pi] puts x in [-1/2, 1/2)
    // snap tiny numerical dust so the window -1 < x <= 0 is honored exactly
    if (std::abs(x) < 1e-14) x = 0.0;
    return cplx(x, std::abs(y) < 1e-14 ? 0.0 : y);
}

SignClass sign_class_of(const cplx& alpha0) {
    const double re = alpha0.real(), im = alpha0.imag();
    if (std::abs(re) < 1e-12 && std::abs(im) < 1e-12) return SignClass::Zero;
    if (std::abs(re) < 1e-12) return im > 0 ? SignClass::Plus : SignClass::Minus;
    return SignClass::Minus;  // -1 < re < 0
}

cplx alpha0_prime_of(const cplx& alpha0) {
    switch (sign_class_of(alpha0)) {
        case SignClass::Plus: return alpha0;
        default: return alpha0 + 1.0;
    }
}

Mat JordanData::pi0() const {
    const int idx = fixed_block_index();
    if (idx < 0) return Mat::Zero(dim, dim);
    return blocks[size_t(idx)].projector;
}

bool JordanData::has_fixed_block() const { return fixed_block_index() >= 0; }

int JordanData::fixed_block_index() const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (blocks[i].sign_class == SignClass::Zero) return int(i);
    return -1;
}

const EigenBlock& JordanData::block(int idx) const {
    if (idx < 0 || idx >= int(blocks.size()))
        throw UnknownBlock("block index out of range");
    return blocks[size_t(idx)];
}

int JordanData::block_of_alpha0(const cplx& alpha0, double eps) const {
    for (size_t i = 0; i < blocks.size(); ++i)
        if (std::abs(blocks[i].alpha0 - alpha0) < eps) return int(i);
    return -1;
}

Vec JordanData::project(const Vec& a, int block_idx) const {
    return block(block_idx).projector * a;
}

Mat JordanData::s_matrix() const {
    Mat s = Mat::Zero(dim, dim);
    for (const auto& b : blocks) s += b.alpha0 * b.projector;
    return s;
}

Mat JordanData::s_prime_matrix() const {
    Mat s = Mat::Zero(dim, dim);
    for (const auto& b : blocks) s += b.alpha0_prime * b.projector;
    return s;
}

std::vector<Mat> JordanData::nilp_powers() const {
    std::vector<Mat> p;
    p.push_back(Mat::Identity(dim, dim));
    for (int k = 1; k < nilpotency_index; ++k) p.push_back(p.back() * nilp);
    return p;
}

JordanData jordan_chevalley(const Lattice& lattice,
                            const LatticeAutomorphism& phi,
                            const DecompConfig& config) {
    phi.validate(lattice);
    const int d = lattice.rank;

    QPoly charpoly = integer_charpoly(phi.matrix);
    if (charpoly[0] == 0) throw NotInvertible("det phi = 0");

    // Exact squarefree structure first, then numeric roots of each
    // (simple-rooted) factor.  Multiplicities stay exact this way.
    auto factors = squarefree_decomposition(charpoly);

    struct RootInfo { cplx value; int multiplicity; };
    std::vector<RootInfo> roots;
    for (const auto& [factor, mult] : factors) {
        for (const cplx& r : aberth_roots(to_complex_coeffs(factor)))
            roots.push_back({r, mult});
    }
    int total = 0;
    for (const auto& r : roots) total += r.multiplicity;
    if (total != d)
        throw DecompositionResidual("root multiplicities do not sum to rank");

    JordanData jd;
    jd.dim = d;
    jd.tol = config.tol;
    jd.gram = lattice.gram_c();
    jd.phi = phi.matrix.cast<double>().cast<cplx>();

    // Generalized eigenspaces via exact-degree kernels of (phi - mu)^mult.
    Mat V(d, d);
    std::vector<std::pair<cplx, int>> column_eigs;  // (eigenvalue, count)
    int col = 0;
    for (const auto& root : roots) {
        Mat shifted = jd.phi - root.value * Mat::Identity(d, d);
        Mat power = Mat::Identity(d, d);
        for (int k = 0; k < root.multiplicity; ++k) power = power * shifted;
        Eigen::JacobiSVD<Mat> svd(power, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        if (root.multiplicity < d &&
            sv[d - root.multiplicity - 1] < 1e-7)
            throw DecompositionResidual(
                "ambiguous generalized eigenspace dimension");
        for (int k = 0; k < root.multiplicity; ++k)
            V.col(col + k) = svd.matrixV().col(d - root.multiplicity + k);
        column_eigs.emplace_back(root.value, root.multiplicity);
        col += root.multiplicity;
    }

    Eigen::PartialPivLU<Mat> vlu(V);
    Mat D = Mat::Zero(d, d);
    col = 0;
    for (const auto& [mu, count] : column_eigs) {
        for (int k = 0; k < count; ++k) D(col + k, col + k) = mu;
        col += count;
    }
    jd.sigma = V * D * vlu.inverse();

    // Unipotent part and its logarithm (terminating series).
    Mat phi_u = jd.sigma.partialPivLu().solve(jd.phi);
    Mat X = phi_u - Mat::Identity(d, d);
    Mat logu = Mat::Zero(d, d);
    Mat xpow = Mat::Identity(d, d);
    for (int k = 1; k <= d; ++k) {
        xpow = xpow * X;
        logu += (k % 2 == 1 ? 1.0 : -1.0) / double(k) * xpow;
    }
    jd.nilp = -logu / kTwoPiI;

    jd.nilpotency_index = 1;
    {
        Mat npow = jd.nilp;
        int k = 1;
        while (k <= d && npow.cwiseAbs().maxCoeff() > config.tol) {
            ++k;
            npow = npow * jd.nilp;
        }
        jd.nilpotency_index = k;
    }

    // Blocks: merge roots with equal eigenvalue (cannot happen after the
    // squarefree split, but keep the invariant explicit).
    col = 0;
    for (const auto& [mu, count] : column_eigs) {
        EigenBlock blk;
        blk.eigenvalue = mu;
        blk.alpha0 = alpha0_of(mu);
        blk.alpha0_prime = alpha0_prime_of(blk.alpha0);
        blk.sign_class = sign_class_of(blk.alpha0);
        Mat E = Mat::Zero(d, d);
        for (int k = 0; k < count; ++k) E(col + k, col + k) = 1.0;
        blk.projector = V * E * vlu.inverse();
        jd.blocks.push_back(std::move(blk));
        col += count;
    }

    // Invariant battery.
    const double tol = config.tol;
    auto maxabs = [](const Mat& m) { return m.cwiseAbs().maxCoeff(); };
    Mat expN = matrix_exponent_nilpotent(-kTwoPiI * jd.nilp, tol);
    if (maxabs(jd.sigma * expN - jd.phi) > tol)
        throw DecompositionResidual("sigma exp(-2 pi i N) != phi");
    if (maxabs(jd.sigma * jd.nilp - jd.nilp * jd.sigma) > tol)
        throw DecompositionResidual("sigma and N do not commute");
    {
        Mat npow = Mat::Identity(d, d);
        for (int k = 0; k < d; ++k) npow = npow * jd.nilp;
        if (maxabs(npow) > tol)
            throw DecompositionResidual("N is not nilpotent");
    }
    {
        Mat sum = Mat::Zero(d, d);
        for (const auto& b : jd.blocks) {
            sum += b.projector;
            if (maxabs(b.projector * b.projector - b.projector) > 1e-8)
                throw DecompositionResidual("projector not idempotent");
            if (maxabs(jd.sigma * b.projector - b.eigenvalue * b.projector) >
                1e-8)
                throw DecompositionResidual("projector misses eigenvalue");
        }
        if (maxabs(sum - Mat::Identity(d, d)) > 1e-8)
            throw DecompositionResidual("projectors do not resolve identity");
    }
    {
        const Mat G = lattice.gram_c();
        if (maxabs(jd.sigma.transpose() * G * jd.sigma - G) > tol)
            throw DecompositionResidual("sigma does not preserve the form");
        if (maxabs(jd.nilp.transpose() * G + G * jd.nilp) > tol)
            throw DecompositionResidual("N not skew for the form");
    }

    return jd;
}

StarSplit star_split(const JordanData& jd, const Vec& lam) {
    StarSplit s;
    s.lambda0 = jd.pi0() * lam;
    Vec rest = lam - s.lambda0;
    s.lambda_star = solve_one_minus_sigma(jd, rest);
    Vec back = s.lambda0 +
               (Mat::Identity(jd.dim, jd.dim) - jd.sigma) * s.lambda_star;
    if ((back - lam).cwiseAbs().maxCoeff() > 1e3 * jd.tol)
        throw SingularRestriction("star split roundtrip failed");
    return s;
}

std::vector<Vec> apply_P(const JordanData& jd, int sign, const Vec& a) {
    std::vector<Vec> coeffs;
    Vec term = a;
    double factorial = 1.0;
    for (int j = 0; j < jd.nilpotency_index; ++j) {
        factorial *= double(j + 1);
        Vec c = term / factorial;
        if (sign < 0 && (j % 2 == 1)) c = -c;
        coeffs.push_back(c);
        term = jd.nilp * term;
    }
    return coeffs;
}

Vec apply_P_at(const JordanData& jd, int sign, const cplx& zeta, const Vec& a) {
    auto coeffs = apply_P(jd, sign, a);
    Vec v = Vec::Zero(jd.dim);
    cplx zp = 1.0;
    for (const auto& c : coeffs) {
        v += zp * c;
        zp *= zeta;
    }
    return v;
}

std::vector<Vec> apply_P_skew(const JordanData& jd, const Vec& a) {
    auto plus = apply_P(jd, +1, a);
    auto minus = apply_P(jd, -1, a);
    std::vector<Vec> coeffs(plus.size());
    for (size_t j = 0; j < plus.size(); ++j)
        coeffs[j] = 0.5 * (plus[j] - minus[j]);
    return coeffs;
}

Vec nilpotent_calculus(const JordanData& jd,
                       const std::vector<std::vector<cplx>>& derivatives,
                       const Vec& a) {
    if (derivatives.size() != jd.blocks.size())
        throw InsufficientDerivatives("need one derivative list per block");
    Vec out = Vec::Zero(jd.dim);
    auto npow = jd.nilp_powers();
    for (size_t b = 0; b < jd.blocks.size(); ++b) {
        Vec pa = jd.blocks[b].projector * a;
        double factorial = 1.0;
        for (int j = 0; j < jd.nilpotency_index; ++j) {
            if (j > 0) factorial *= double(j);
            Vec term = npow[size_t(j)] * pa;
            if (term.cwiseAbs().maxCoeff() < 1e-300) continue;
            if (j >= int(derivatives[b].size()))
                throw InsufficientDerivatives(
                    "derivative order exceeds supplied values");
            out += derivatives[b][size_t(j)] / factorial * term;
        }
    }
    return out;
}

Mat one_minus_phiu_over_n(const JordanData& jd) {
    // (1 - e^{-2 pi i N})/N = sum_j (-1)^j (2 pi i)^{j+1} N^j / (j+1)!
    Mat out = Mat::Zero(jd.dim, jd.dim);
    Mat npow = Mat::Identity(jd.dim, jd.dim);
    double factorial = 1.0;
    for (int j = 0; j < jd.nilpotency_index; ++j) {
        factorial *= double(j + 1);
        out += (std::pow(-1.0, j) * std::pow(kTwoPiI, j + 1) / factorial) * npow;
        npow = npow * jd.nilp;
    }
    return out;
}

Vec solve_one_minus_sigma(const JordanData& jd, const Vec& v) {
    Mat M = Mat::Identity(jd.dim, jd.dim) - jd.sigma + jd.pi0();
    Eigen::PartialPivLU<Mat> lu(M);
    Vec x = lu.solve(v);
    x -= jd.pi0() * x;
    Vec residual = (Mat::Identity(jd.dim, jd.dim) - jd.sigma) * x - v;
    if (residual.cwiseAbs().maxCoeff() > 1e-6 * (1.0 + v.norm()))
        throw SingularRestriction("restricted (1-sigma) solve failed");
    return x;
}

Vec solve_one_minus_phi_perp(const JordanData& jd, const Vec& v) {
    Mat M = Mat::Identity(jd.dim, jd.dim) - jd.phi + jd.pi0();
    Eigen::PartialPivLU<Mat> lu(M);
    Vec x = lu.solve(v);
    x -= jd.pi0() * x;
    return x;
}

}  // namespace twistlat
