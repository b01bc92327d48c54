#include "twistlat/specfun.hpp"

#include <algorithm>
#include <cmath>

namespace twistlat {

namespace {

const double kBernoulli2k[] = {1.0 / 6,     -1.0 / 30,   1.0 / 42,
                               -1.0 / 30,   5.0 / 66,    -691.0 / 2730,
                               7.0 / 6,     -3617.0 / 510};

bool near_nonpositive_integer(const cplx& a, double tol = 1e-12) {
    if (a.real() > 0.5) return false;
    double r = std::round(a.real());
    return r <= 0.0 && std::abs(a.real() - r) < tol && std::abs(a.imag()) < tol;
}

bool near_integer(const cplx& a, double tol = 1e-12) {
    return std::abs(a.imag()) < tol &&
           std::abs(a.real() - std::round(a.real())) < tol;
}

cplx cpow(const cplx& base, const cplx& expo) {
    return std::exp(expo * std::log(base));  // principal branch
}

}  // namespace

cplx gamma_fn(const cplx& z) {
    // Lanczos approximation, g = 7.
    static const double coeffs[] = {
        0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
        771.32342877765313,   -176.61502916214059, 12.507343278686905,
        -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // reflection
        return kPi / (std::sin(kPi * z) * gamma_fn(1.0 - z));
    }
    cplx x = z - 1.0;
    cplx a = coeffs[0];
    cplx t = x + 7.5;
    for (int i = 1; i < 9; ++i) a += coeffs[i] / (x + double(i));
    return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

cplx digamma(const cplx& a_in) {
    if (near_nonpositive_integer(a_in))
        throw AtPole("digamma pole at nonpositive integer");
    cplx a = a_in;
    cplx shift = 0.0;
    while (a.real() < 16.0) {
        shift -= 1.0 / a;
        a += 1.0;
    }
    cplx inv = 1.0 / a;
    cplx inv2 = inv * inv;
    cplx out = std::log(a) - 0.5 * inv;
    cplx p = inv2;
    int k = 1;
    for (double b2k : kBernoulli2k) {
        out -= b2k / (2.0 * k) * p;
        p *= inv2;
        ++k;
    }
    return out + shift;
}

cplx hurwitz_sum(const cplx& s, const cplx& a_in) {
    if (near_nonpositive_integer(a_in))
        throw AtPole("Hurwitz sum pole at nonpositive integer");
    if (s.real() <= 1.0)
        throw OutOfDomain("Hurwitz sum requires Re s > 1");
    cplx a = a_in;
    cplx head = 0.0;
    while (a.real() < 24.0) {
        head += cpow(a, -s);
        a += 1.0;
    }
    // Euler-Maclaurin tail from a.
    cplx tail = cpow(a, 1.0 - s) / (s - 1.0) + 0.5 * cpow(a, -s);
    cplx rising = s;  // (s)_1
    cplx apow = cpow(a, -s - 1.0);
    double fact2k = 1.0;  // (2k)!
    for (int k = 1; k <= 8; ++k) {
        fact2k *= (2.0 * k - 1.0) * (2.0 * k);
        // (s)_{2k-1} built incrementally: after k-th step rising = (s)_{2k-1}
        tail += kBernoulli2k[k - 1] / fact2k * rising * apow;
        rising *= (s + double(2 * k - 1)) * (s + double(2 * k));
        apow *= 1.0 / (a * a);
    }
    return head + tail;
}

cplx polygamma(int j, const cplx& a) {
    if (j < 1) throw BadInput("polygamma order must be >= 1");
    if (near_nonpositive_integer(a))
        throw AtPole("polygamma pole at nonpositive integer");
    double jfact = 1.0;
    for (int i = 2; i <= j; ++i) jfact *= i;
    double sign = (j % 2 == 0) ? -1.0 : 1.0;  // (-1)^{j+1}
    return sign * jfact * hurwitz_sum(cplx(double(j + 1), 0.0), a);
}

namespace {

// tanh-sinh quadrature on (0, 1).  The callback receives the node x and
// -log(x) computed in a cancellation-free form, so integrands with endpoint
// singularities keep full relative precision near x = 0.
template <typename F>
cplx tanh_sinh_01(F&& f) {
    const double h = 0.05;
    cplx sum = 0.0;
    for (int k = -130; k <= 130; ++k) {
        double t = h * k;
        double sh = 0.5 * kPi * std::sinh(t);
        double em = std::exp(-2.0 * sh);
        if (!(em > 1e-300 && em < 1e300)) continue;
        double x = 1.0 / (1.0 + em);       // = (1 + tanh(sh)) / 2
        double neglogx = std::log1p(em);   // = -log x
        double w = kPi * std::cosh(t) * em * x * x;
        if (x <= 0.0 || x >= 1.0 || w < 1e-300) continue;
        sum += w * f(x, neglogx);
    }
    return h * sum;
}

cplx lerch_series(const cplx& z, const cplx& s, const cplx& a,
                  const SpecFunConfig& cfg) {
    cplx sum = 0.0;
    cplx zp = 1.0;
    for (int m = 0; m < cfg.series_cutoff * 4; ++m) {
        cplx term = zp * cpow(a + double(m), -s);
        sum += term;
        zp *= z;
        if (m > 8 && std::abs(term) < cfg.abs_tol * 1e-3 &&
            std::abs(zp) < 1.0)
            break;
    }
    return sum;
}

// Iterated Aitken acceleration of a partial-sum sequence.
cplx aitken_limit(std::vector<cplx> s, int levels) {
    for (int l = 0; l < levels; ++l) {
        if (s.size() < 3) break;
        std::vector<cplx> t(s.size() - 2);
        for (size_t i = 0; i + 2 < s.size(); ++i) {
            cplx d1 = s[i + 2] - s[i + 1];
            cplx d2 = s[i + 2] - 2.0 * s[i + 1] + s[i];
            t[i] = (std::abs(d2) < 1e-300) ? s[i + 2]
                                           : s[i + 2] - (d1 * d1) / d2;
        }
        s = std::move(t);
    }
    return s.back();
}

}  // namespace

cplx lerch_phi(const cplx& z, const cplx& s, const cplx& a,
               const SpecFunConfig& cfg) {
    cfg.validate();
    if (near_nonpositive_integer(a))
        throw OutOfDomain("lerch_phi: a at a nonpositive integer");
    const double az = std::abs(z);

    if (az == 0.0) return cpow(a, -s);

    if (az < 1.0 - 1e-9) {
        if (az <= 0.75) return lerch_series(z, s, a, cfg);
        // Slowly decaying geometric factor: head + quadrature remainder when
        // admissible, else accelerated partial sums.
        if (a.real() > 0.0 && s.real() > 0.0 &&
            !(std::abs(z.imag()) < 1e-14 && z.real() >= 1.0)) {
            cplx integrand_value = tanh_sinh_01([&](double u, double neglog) {
                return cpow(cplx(neglog, 0.0), s - 1.0) *
                       std::exp(-(a - 1.0) * neglog) / (1.0 - z * u);
            });
            return integrand_value / gamma_fn(s);
        }
        return lerch_series(z, s, a, cfg);
    }

    if (std::abs(az - 1.0) < 1e-9) {
        if (std::abs(z - 1.0) < 1e-12) {
            if (s.real() <= 1.0)
                throw OutOfDomain("lerch_phi at z=1 needs Re s > 1");
            if (a.real() <= 0.0)
                throw OutOfDomain("lerch_phi at z=1 needs Re a > 0");
            return hurwitz_sum(s, a);
        }
        if (a.real() > 0.0 && s.real() > 0.0) {
            // integral representation is valid on |z| = 1, z != 1
            cplx integrand_value = tanh_sinh_01([&](double u, double neglog) {
                return cpow(cplx(neglog, 0.0), s - 1.0) *
                       std::exp(-(a - 1.0) * neglog) / (1.0 - z * u);
            });
            return integrand_value / gamma_fn(s);
        }
        // boundary series with Aitken/Richardson acceleration
        std::vector<cplx> partials;
        cplx sum = 0.0;
        cplx zp = 1.0;
        int n = std::max(cfg.series_cutoff, 400);
        for (int m = 0; m < n; ++m) {
            sum += zp * cpow(a + double(m), -s);
            zp *= z;
            if (m > n - 40) partials.push_back(sum);
        }
        return aitken_limit(partials, cfg.richardson_levels);
    }

    throw OutOfDomain("lerch_phi: |z| > 1 is outside the stated domains");
}

cplx lerch_reflect(const cplx& z, const cplx& a) {
    if (std::abs(z) <= 1.0)
        throw OutOfDomain("lerch_reflect requires |z| > 1");
    // the cut sits on [1, oo); negative real z is a limit of both half planes
    if (std::abs(z.imag()) < 1e-14 && z.real() > 0)
        throw OutOfDomain("lerch_reflect excludes real z > 1");
    if (near_integer(a)) throw OutOfDomain("lerch_reflect requires a outside Z");

    const cplx logz = std::log(z);  // -pi < arg z < pi
    const double omega = std::arg(logz);
    const double sgn = omega > 0 ? 1.0 : -1.0;
    const cplx za = cpow(z, -a);

    cplx inner = 0.0;  // Phi(1/z, 1, 1-a) by its convergent series
    const cplx zi = 1.0 / z;
    cplx zp = 1.0;
    for (int m = 0; m < 4000; ++m) {
        cplx term = zp / (double(m) + 1.0 - a);
        inner += term;
        zp *= zi;
        if (m > 8 && std::abs(term) < 1e-17) break;
    }

    return cplx(0, kPi) * za * sgn + za * kPi / std::tan(kPi * a) +
           inner / z;
}

cplx zeta(const cplx& s) {
    if (std::abs(s) < 1e-14) return cplx(-0.5, 0.0);  // generating-function value
    if (s.real() <= 1.0) throw OutOfDomain("zeta requires Re s > 1 (or s = 0)");
    return hurwitz_sum(s, cplx(1.0, 0.0));
}

namespace {

// Stirling numbers of the second kind, small table on demand.
double stirling2(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (n == 0) return k == 0 ? 1.0 : 0.0;
    std::vector<std::vector<double>> S(size_t(n + 1),
                                       std::vector<double>(size_t(n + 1), 0.0));
    S[0][0] = 1.0;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= i; ++j)
            S[size_t(i)][size_t(j)] =
                double(j) * S[size_t(i - 1)][size_t(j)] + S[size_t(i - 1)][size_t(j - 1)];
    return S[size_t(n)][size_t(k)];
}

}  // namespace

cplx polylog(const cplx& s, const cplx& z) {
    if (near_integer(s) && s.real() <= 0.5) {
        // rational closed form at nonpositive integer order
        int n = int(std::llround(s.real()));
        if (n > 0) throw OutOfDomain("polylog closed form needs s <= 0");
        if (std::abs(z - 1.0) < 1e-14)
            throw OutOfDomain("polylog pole at z = 1");
        const cplx w = z / (1.0 - z);
        cplx out = 0.0;
        double kfact = 1.0;
        cplx wp = w;
        for (int k = 0; k <= -n; ++k) {
            if (k > 0) kfact *= k;
            out += kfact * stirling2(-n + 1, k + 1) * wp;
            wp *= w;
        }
        return out;
    }
    if (std::abs(z) >= 1.0)
        throw OutOfDomain("polylog series requires |z| < 1");
    cplx sum = 0.0;
    cplx zp = z;
    for (int n = 1; n < 20000; ++n) {
        cplx term = zp * cpow(cplx(double(n), 0.0), -s);
        sum += term;
        zp *= z;
        if (n > 8 && std::abs(term) < 1e-17) break;
    }
    return sum;
}

std::vector<IdentityCheck> specfun_selftest(Rng& rng, const SpecFunConfig& cfg) {
    std::vector<IdentityCheck> checks;
    auto push = [&](const std::string& name, const std::string& identity,
                    double residual, double tol) {
        checks.push_back({name, identity, residual, tol, residual <= tol});
    };
    std::uniform_real_distribution<double> unif(0.1, 0.9);

    {  // digamma reflection on sampled points off the integers
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            cplx a(unif(rng) - 0.5 + (t % 7) - 3, 0.35 * unif(rng));
            if (near_integer(a)) a += cplx(0.13, 0.0);
            cplx lhs = digamma(-a) - digamma(a + 1.0);
            cplx rhs = kPi / std::tan(kPi * a);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        push("digamma-reflection", "psi(-a) - psi(a+1) = pi cot(pi a)", worst,
             1e-10);
    }
    {  // polygamma reflection, orders 1..4
        double worst = 0.0;
        for (int j = 1; j <= 4; ++j) {
            for (int t = 0; t < 20; ++t) {
                cplx a(unif(rng) + (t % 5) - 2, 0.0);
                if (near_integer(a)) a += cplx(0.21, 0.0);
                cplx lhs = std::pow(-1.0, j) * polygamma(j, -a) -
                           polygamma(j, a + 1.0);
                cplx rhs = -std::pow(-kTwoPiI, j + 1) *
                           polylog(cplx(double(-j), 0.0),
                                   std::exp(-kTwoPiI * a));
                double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
                worst = std::max(worst, std::abs(lhs - rhs) / scale);
            }
        }
        push("polygamma-reflection",
             "order 1..4 vs polylog form (scale-relative)", worst, 1e-8);
    }
    {  // lerch shift identity, n = 1..5
        double worst = 0.0;
        for (int n = 1; n <= 5; ++n) {
            for (int t = 0; t < 8; ++t) {
                cplx z(0.8 * unif(rng), 0.4 * unif(rng));
                cplx s(1.0 + 2.0 * unif(rng), 0.0);
                cplx a(0.2 + unif(rng), 0.1 * unif(rng));
                cplx lhs = lerch_phi(z, s, a, cfg);
                cplx rhs = cpow(z, cplx(double(n), 0)) *
                           lerch_phi(z, s, a + double(n), cfg);
                for (int k = 0; k < n; ++k)
                    rhs += cpow(z, cplx(double(k), 0)) * cpow(a + double(k), -s);
                double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
                worst = std::max(worst, std::abs(lhs - rhs) / scale);
            }
        }
        push("lerch-shift", "Phi(z,s,a) = z^n Phi(z,s,a+n) + head", worst,
             1e-10);
    }
    {  // derivative in a vs central finite difference
        double worst = 0.0;
        const double h = 1e-5;
        for (int t = 0; t < 10; ++t) {
            cplx z(0.3 * unif(rng), 0.2 * unif(rng));
            cplx s(1.0 + unif(rng), 0.0);
            cplx a(0.5 + unif(rng), 0.0);
            cplx fd = (lerch_phi(z, s, a + h, cfg) - lerch_phi(z, s, a - h, cfg)) /
                      (2.0 * h);
            cplx an = -s * lerch_phi(z, s + 1.0, a, cfg);
            worst = std::max(worst, std::abs(fd - an));
        }
        push("lerch-derivative", "d/da Phi = -s Phi(z,s+1,a) vs finite diff",
             worst, 1e-6);
    }
    {  // polygamma(j,1) against zeta, orders 1..5
        double worst = 0.0;
        for (int j = 1; j <= 5; ++j) {
            cplx lhs = zeta(cplx(double(j + 1), 0.0));
            cplx rhs = std::pow(-1.0, j + 1) * polygamma(j, cplx(1.0, 0.0));
            double jfact = 1.0;
            for (int i = 2; i <= j; ++i) jfact *= i;
            rhs /= jfact;
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        push("polygamma-zeta", "zeta(j+1) = (-1)^{j+1} psi^(j)(1)/j!", worst,
             1e-10);
    }
    {  // even-zeta generating function at x = 0.1, J = 12
        const double x = 0.1;
        cplx lhs = -0.5;  // j = 0 term, zeta(0) x^0
        for (int j = 1; j <= 12; ++j)
            lhs += zeta(cplx(2.0 * j, 0.0)) * std::pow(x, 2 * j);
        cplx rhs = -0.5 * kPi * x / std::tan(kPi * x);
        push("zeta-generating-function",
             "sum zeta(2j) x^{2j} = -(pi x/2) cot(pi x)", std::abs(lhs - rhs),
             1e-12);
    }
    return checks;
}

}  // namespace twistlat
