#pragma once

#include <vector>
#include <cmath>

#include "twistlat/types.hpp"

namespace twistlat {

// Truncated Taylor expansions ("jets") in one formal variable.  Used for
// derivatives of scalar prefactors with respect to z-ratio and spectral
// parameters; nests as Jet<Jet<cplx>> for mixed partials.

inline cplx jexp(const cplx& x) { return std::exp(x); }
inline cplx jlog(const cplx& x) { return std::log(x); }
inline cplx jsin(const cplx& x) { return std::sin(x); }
inline cplx jcos(const cplx& x) { return std::cos(x); }
inline cplx jzero(const cplx&) { return cplx(0.0, 0.0); }

template <typename T>
class Jet {
public:
    Jet() = default;
    explicit Jet(int order) : c_(order + 1) {}
    Jet(int order, const T& value) : c_(order + 1) {
        for (auto& x : c_) x = jzero(value);
        c_[0] = value;
    }

    static Jet variable(int order, const T& value) {
        Jet j(order, value);
        if (order >= 1) {
            T one = jzero(value);
            one = one + 1.0;
            j.c_[1] = one;
        }
        return j;
    }

    int order() const { return int(c_.size()) - 1; }
    const T& operator[](int k) const { return c_[k]; }
    T& operator[](int k) { return c_[k]; }

    Jet operator-() const {
        Jet r = *this;
        for (auto& x : r.c_) x = -x;
        return r;
    }

    friend Jet operator+(const Jet& a, const Jet& b) {
        Jet r = a;
        for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = r.c_[k] + b.c_[k];
        return r;
    }
    friend Jet operator-(const Jet& a, const Jet& b) {
        Jet r = a;
        for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = r.c_[k] - b.c_[k];
        return r;
    }
    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r(a.order());
        for (size_t k = 0; k < r.c_.size(); ++k) r.c_[k] = jzero(a.c_[0]);
        for (int i = 0; i <= a.order(); ++i)
            for (int j = 0; i + j <= a.order(); ++j)
                r.c_[i + j] = r.c_[i + j] + a.c_[i] * b.c_[j];
        return r;
    }
    friend Jet operator/(const Jet& a, const Jet& b) {
        // Standard recursive quotient; requires b[0] invertible.
        Jet r(a.order());
        for (int k = 0; k <= a.order(); ++k) {
            T s = a.c_[k];
            for (int j = 0; j < k; ++j) s = s - r.c_[j] * b.c_[k - j];
            r.c_[k] = s / b.c_[0];
        }
        return r;
    }

    friend Jet operator+(const Jet& a, double s) { Jet r = a; r.c_[0] = r.c_[0] + s; return r; }
    friend Jet operator-(const Jet& a, double s) { Jet r = a; r.c_[0] = r.c_[0] - s; return r; }
    friend Jet operator*(const Jet& a, double s) {
        Jet r = a;
        for (auto& x : r.c_) x = x * s;
        return r;
    }
    friend Jet operator*(double s, const Jet& a) { return a * s; }
    friend Jet operator*(const Jet& a, const T& s) {
        Jet r = a;
        for (auto& x : r.c_) x = x * s;
        return r;
    }
    friend Jet operator*(const T& s, const Jet& a) { return a * s; }

    // Divide by the formal variable; requires c_[0] == 0.  Top coefficient
    // information is lost (shifted out).
    Jet shift_down() const {
        Jet r(order());
        for (int k = 0; k < order(); ++k) r.c_[k] = c_[k + 1];
        r.c_[order()] = jzero(c_[0]);
        return r;
    }

    // Antiderivative with given constant term.
    Jet antiderivative(const T& constant) const {
        Jet r(order());
        r.c_[0] = constant;
        for (int k = 1; k <= order(); ++k) r.c_[k] = c_[k - 1] * (1.0 / double(k));
        return r;
    }

private:
    std::vector<T> c_;
};

template <typename T>
Jet<T> jzero(const Jet<T>& proto) {
    Jet<T> r(proto.order());
    for (int k = 0; k <= proto.order(); ++k) r[k] = jzero(proto[0]);
    return r;
}

// exp via the ODE f' = f u': f_k = (1/k) sum_{j=1..k} j*u_j*f_{k-j}.
template <typename T>
Jet<T> jexp(const Jet<T>& u) {
    Jet<T> f(u.order());
    f[0] = jexp(u[0]);
    for (int k = 1; k <= u.order(); ++k) {
        T s = jzero(u[0]);
        for (int j = 1; j <= k; ++j) s = s + double(j) * (u[j] * f[k - j]);
        f[k] = s * (1.0 / double(k));
    }
    return f;
}

// log via f' = u'/u.
template <typename T>
Jet<T> jlog(const Jet<T>& u) {
    Jet<T> f(u.order());
    f[0] = jlog(u[0]);
    for (int k = 1; k <= u.order(); ++k) {
        T s = double(k) * u[k];
        for (int j = 1; j < k; ++j) s = s - double(j) * (f[j] * u[k - j]);
        f[k] = (s / u[0]) * (1.0 / double(k));
    }
    return f;
}

template <typename T>
Jet<T> jsin(const Jet<T>& u);
template <typename T>
Jet<T> jcos(const Jet<T>& u);

// sin/cos by the coupled ODEs s' = c u', c' = -s u'.
template <typename T>
Jet<T> jsin(const Jet<T>& u) {
    Jet<T> s(u.order()), c(u.order());
    s[0] = jsin(u[0]);
    c[0] = jcos(u[0]);
    for (int k = 1; k <= u.order(); ++k) {
        T as = jzero(u[0]);
        T ac = jzero(u[0]);
        for (int j = 1; j <= k; ++j) {
            as = as + double(j) * (u[j] * c[k - j]);
            ac = ac - double(j) * (u[j] * s[k - j]);
        }
        s[k] = as * (1.0 / double(k));
        c[k] = ac * (1.0 / double(k));
    }
    return s;
}

template <typename T>
Jet<T> jcos(const Jet<T>& u) {
    Jet<T> s(u.order()), c(u.order());
    s[0] = jsin(u[0]);
    c[0] = jcos(u[0]);
    for (int k = 1; k <= u.order(); ++k) {
        T as = jzero(u[0]);
        T ac = jzero(u[0]);
        for (int j = 1; j <= k; ++j) {
            as = as + double(j) * (u[j] * c[k - j]);
            ac = ac - double(j) * (u[j] * s[k - j]);
        }
        s[k] = as * (1.0 / double(k));
        c[k] = ac * (1.0 / double(k));
    }
    return c;
}

template <typename T>
Jet<T> jcot(const Jet<T>& u) { return jcos(u) / jsin(u); }

// base^expo = exp(expo * log(base)).
template <typename T, typename E>
Jet<T> jpow(const Jet<T>& base, const E& expo) {
    return jexp(jlog(base) * expo);
}

}  // namespace twistlat
