#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <random>

#include <Eigen/Dense>

namespace twistlat {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using IMat = Eigen::MatrixXi;
using IVec = Eigen::VectorXi;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline const cplx kTwoPiI{0.0, 2.0 * kPi};
inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Error taxonomy. Each condition named by the contract that raises it.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define TWISTLAT_ERROR(Name)                                            \
    struct Name : Error {                                               \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

TWISTLAT_ERROR(BadInput);
TWISTLAT_ERROR(EtaInconsistent);
TWISTLAT_ERROR(NotInvertible);
TWISTLAT_ERROR(DecompositionResidual);
TWISTLAT_ERROR(ZeroEigenvalue);
TWISTLAT_ERROR(UnknownBlock);
TWISTLAT_ERROR(SingularRestriction);
TWISTLAT_ERROR(InsufficientDerivatives);
TWISTLAT_ERROR(AtPole);
TWISTLAT_ERROR(OutOfDomain);
TWISTLAT_ERROR(NotLatticeVector);
TWISTLAT_ERROR(RepInconsistent);
TWISTLAT_ERROR(BasisTooLarge);
TWISTLAT_ERROR(TruncationExceeded);
TWISTLAT_ERROR(ThetaWindowOverflow);
TWISTLAT_ERROR(NoUDescriptor);
TWISTLAT_ERROR(UnsupportedBlockStructure);

#undef TWISTLAT_ERROR

using Rng = std::mt19937_64;

// Uniform integer coordinate vector with entries in [lo, hi].
inline IVec random_ivec(Rng& rng, int d, int lo, int hi) {
    std::uniform_int_distribution<int> dist(lo, hi);
    IVec v(d);
    for (int i = 0; i < d; ++i) v[i] = dist(rng);
    return v;
}

inline Vec to_complex(const IVec& v) {
    Vec w(v.size());
    for (int i = 0; i < v.size(); ++i) w[i] = cplx(double(v[i]), 0.0);
    return w;
}

}  // namespace twistlat
