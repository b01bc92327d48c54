#include <doctest.h>

#include "twistlat/decomp.hpp"
#include "twistlat/io.hpp"
#include "twistlat/specfun.hpp"

using namespace twistlat;

namespace {

Session session_for(const std::string& text, unsigned seed = 11) {
    Rng rng(seed);
    return build_session(parse_input(text), rng);
}

Session session_minus_id() {
    InputDocument doc;
    doc.lattice.rank = 2;
    doc.lattice.gram = IMat::Zero(2, 2);
    doc.lattice.gram(0, 0) = 2;
    doc.lattice.gram(1, 1) = 2;
    doc.phi.matrix = -IMat::Identity(2, 2);
    Rng rng(12);
    return build_session(doc, rng);
}

double maxabs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("alpha0 normalization") {
    CHECK(std::abs(alpha0_of(cplx(1, 0))) < 1e-14);
    CHECK(std::abs(alpha0_of(cplx(-1, 0)) - cplx(-0.5, 0)) < 1e-14);
    // real eigenvalue off the unit circle
    CHECK(std::abs(alpha0_of(std::exp(cplx(2 * kPi, 0))) - cplx(0, 1)) < 1e-12);
    CHECK_THROWS_AS(alpha0_of(cplx(0, 0)), ZeroEigenvalue);
}

TEST_CASE("alpha0 prime branches") {
    CHECK(std::abs(alpha0_prime_of(cplx(0, 0)) - cplx(1, 0)) < 1e-14);
    CHECK(std::abs(alpha0_prime_of(cplx(-0.5, 0)) - cplx(0.5, 0)) < 1e-14);
    CHECK(std::abs(alpha0_prime_of(cplx(0, 1.0 / 3)) - cplx(0, 1.0 / 3)) < 1e-14);
    CHECK(std::abs(alpha0_prime_of(cplx(0, -0.25)) - cplx(1, -0.25)) < 1e-14);
}

TEST_CASE("rank-4 unipotent example decomposes as the displayed N") {
    Session s = session_for(example_61_json());
    const auto& jd = s.jd;
    CHECK(maxabs(jd.sigma - Mat::Identity(4, 4)) < 1e-10);
    Vec l1 = Vec::Unit(4, 0), l2 = Vec::Unit(4, 1);
    Vec l3 = Vec::Unit(4, 2), l4 = Vec::Unit(4, 3);
    CHECK((jd.nilp * l1 - l2 / kTwoPiI).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((jd.nilp * l2).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((jd.nilp * l3 + l4 / kTwoPiI).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((jd.nilp * l4).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(maxabs(jd.nilp * jd.nilp) < 1e-12);
    CHECK(jd.nilpotency_index == 2);
}

TEST_CASE("rank-3 translation example has a single 3-step Jordan block") {
    Session s = session_for(example_62_json());
    const auto& jd = s.jd;
    CHECK(maxabs(jd.sigma - Mat::Identity(3, 3)) < 1e-10);
    Vec a1 = Vec::Unit(3, 0), de = Vec::Unit(3, 1), L0 = Vec::Unit(3, 2);
    CHECK((jd.nilp * a1 - de / (cplx(0, kPi))).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((jd.nilp * de).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((jd.nilp * L0 + a1 / kTwoPiI).cwiseAbs().maxCoeff() < 1e-10);
    Vec n2 = jd.nilp * (jd.nilp * L0);
    CHECK((n2 - de / (2.0 * kPi * kPi)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(jd.nilpotency_index == 3);
}

TEST_CASE("negation is already semisimple") {
    Session s = session_minus_id();
    const auto& jd = s.jd;
    CHECK(maxabs(jd.sigma + Mat::Identity(2, 2)) < 1e-12);
    CHECK(maxabs(jd.nilp) < 1e-12);
    REQUIRE(jd.blocks.size() == 1);
    CHECK(std::abs(jd.blocks[0].alpha0 - cplx(-0.5, 0)) < 1e-12);
    CHECK(jd.blocks[0].sign_class == SignClass::Minus);
    CHECK(!jd.has_fixed_block());
}

TEST_CASE("projection conventions") {
    Session id = session_for(hyperbolic_rank2_json());
    CHECK(maxabs(id.jd.pi0() - Mat::Identity(2, 2)) < 1e-12);

    Session neg = session_minus_id();
    CHECK(maxabs(neg.jd.pi0()) < 1e-12);

    // block orthogonality: (pi_alpha a | b) = (pi_alpha a | pi_{-alpha} b)
    Session s = session_minus_id();
    Rng rng(13);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int t = 0; t < 20; ++t) {
        Vec a(2), b(2);
        for (int i = 0; i < 2; ++i) {
            a[i] = cplx(unif(rng), unif(rng));
            b[i] = cplx(unif(rng), unif(rng));
        }
        for (size_t blk = 0; blk < s.jd.blocks.size(); ++blk) {
            Vec pa = s.jd.blocks[blk].projector * a;
            // find the dual block
            for (const auto& other : s.jd.blocks) {
                cplx sum = s.jd.blocks[blk].alpha0 + other.alpha0;
                if (std::abs(sum.imag()) < 1e-9 &&
                    std::abs(sum.real() - std::round(sum.real())) < 1e-9) {
                    Vec pb = other.projector * b;
                    CHECK(std::abs(s.lattice.pair(pa, b) -
                                   s.lattice.pair(pa, pb)) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("star split cases") {
    Session id = session_for(example_62_json());
    Rng rng(14);
    for (int t = 0; t < 10; ++t) {
        Vec lam = to_complex(random_ivec(rng, 3, -3, 3));
        StarSplit sp = star_split(id.jd, lam);
        CHECK((sp.lambda0 - lam).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(sp.lambda_star.cwiseAbs().maxCoeff() < 1e-12);
    }
    Session neg = session_minus_id();
    for (int t = 0; t < 10; ++t) {
        Vec lam = to_complex(random_ivec(rng, 2, -3, 3));
        StarSplit sp = star_split(neg.jd, lam);
        CHECK(sp.lambda0.cwiseAbs().maxCoeff() < 1e-12);
        CHECK((sp.lambda_star - 0.5 * lam).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("P operators") {
    Session neg = session_minus_id();  // N = 0
    Vec a = to_complex(IVec(IVec::Unit(2, 0)));
    auto p = apply_P(neg.jd, +1, a);
    REQUIRE(p.size() == 1);
    CHECK((p[0] - a).cwiseAbs().maxCoeff() < 1e-14);

    Session s = session_for(example_62_json());
    Rng rng(15);
    std::uniform_real_distribution<double> unif(-1, 1);
    for (int t = 0; t < 20; ++t) {
        Vec x(3), y(3);
        for (int i = 0; i < 3; ++i) {
            x[i] = cplx(unif(rng), unif(rng));
            y[i] = cplx(unif(rng), unif(rng));
        }
        auto px = apply_P(s.jd, +1, x);
        auto my = apply_P(s.jd, -1, y);
        for (size_t j = 0; j < px.size(); ++j)
            CHECK(std::abs(s.lattice.pair(px[j], y) -
                           s.lattice.pair(x, my[j])) < 1e-12);
        auto sx = apply_P_skew(s.jd, x);
        auto sy = apply_P_skew(s.jd, y);
        for (size_t j = 0; j < sx.size(); ++j)
            CHECK(std::abs(s.lattice.pair(sx[j], y) +
                           s.lattice.pair(x, sy[j])) < 1e-12);
    }
}

TEST_CASE("nilpotent functional calculus") {
    Session s = session_for(example_62_json());
    const auto& jd = s.jd;
    Rng rng(16);
    Vec a = to_complex(random_ivec(rng, 3, -3, 3));

    // f = identity: f(S'+N) a = (S'+N) a
    std::vector<std::vector<cplx>> derivs;
    for (const auto& blk : jd.blocks)
        derivs.push_back({blk.alpha0_prime, cplx(1, 0), cplx(0, 0)});
    Vec got = nilpotent_calculus(jd, derivs, a);
    Vec want = jd.s_prime_matrix() * a + jd.nilp * a;
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);

    // f constant
    std::vector<std::vector<cplx>> cderivs;
    for (size_t b = 0; b < jd.blocks.size(); ++b)
        cderivs.push_back({cplx(3, 1), cplx(0, 0), cplx(0, 0)});
    got = nilpotent_calculus(jd, cderivs, a);
    CHECK((got - cplx(3, 1) * a).cwiseAbs().maxCoeff() < 1e-12);

    // f = psi against the explicit three-term expansion
    std::vector<std::vector<cplx>> pderivs;
    for (const auto& blk : jd.blocks)
        pderivs.push_back({digamma(blk.alpha0_prime),
                           polygamma(1, blk.alpha0_prime),
                           polygamma(2, blk.alpha0_prime)});
    got = nilpotent_calculus(jd, pderivs, a);
    const cplx ap = jd.blocks[0].alpha0_prime;  // single block here
    Vec hand = digamma(ap) * a + polygamma(1, ap) * (jd.nilp * a) +
               0.5 * polygamma(2, ap) * (jd.nilp * (jd.nilp * a));
    CHECK((got - hand).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<std::vector<cplx>> tooshort(jd.blocks.size(), {cplx(1, 0)});
    CHECK_THROWS_AS(nilpotent_calculus(jd, tooshort, a), InsufficientDerivatives);
}

TEST_CASE("reconstruction for a rank-8 composite automorphism") {
    // direct sum of the rank-4 lattice (negated twist) with a rotation block
    InputDocument d61 = parse_input(example_61_json());
    InputDocument doc;
    doc.lattice.rank = 8;
    doc.lattice.gram = IMat::Zero(8, 8);
    doc.lattice.gram.topLeftCorner(4, 4) = d61.lattice.gram;
    doc.lattice.gram.bottomRightCorner(4, 4) = d61.lattice.gram;
    doc.phi.matrix = IMat::Zero(8, 8);
    doc.phi.matrix.topLeftCorner(4, 4) = -d61.phi.matrix;
    doc.phi.matrix.bottomRightCorner(4, 4) = d61.phi.matrix;
    Rng rng(17);
    Session s = build_session(doc, rng);
    Mat expN = Mat::Identity(8, 8);
    Mat term = Mat::Identity(8, 8);
    for (int k = 1; k < 11; ++k) {
        term = term * (-kTwoPiI * s.jd.nilp) / double(k);
        expN += term;
    }
    CHECK(maxabs(s.jd.sigma * expN - s.jd.phi) < 1e-10);
    CHECK(s.jd.blocks.size() == 2);  // eigenvalues -1 and +1
}

TEST_CASE("order-four rotation splits into conjugate quarter blocks") {
    InputDocument doc;
    doc.lattice.rank = 2;
    doc.lattice.gram = IMat::Identity(2, 2);
    doc.phi.matrix = IMat::Zero(2, 2);
    doc.phi.matrix(0, 1) = -1;
    doc.phi.matrix(1, 0) = 1;
    Rng rng(18);
    Session s = build_session(doc, rng);
    CHECK(maxabs(s.jd.nilp) < 1e-12);
    REQUIRE(s.jd.blocks.size() == 2);
    std::vector<double> re;
    for (const auto& b : s.jd.blocks) {
        CHECK(std::abs(std::exp(-kTwoPiI * b.alpha0) - b.eigenvalue) < 1e-12);
        CHECK(std::abs(b.alpha0.imag()) < 1e-12);
        re.push_back(b.alpha0.real());
    }
    std::sort(re.begin(), re.end());
    CHECK(std::abs(re[0] + 0.75) < 1e-12);
    CHECK(std::abs(re[1] + 0.25) < 1e-12);
}
