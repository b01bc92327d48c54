#include "twistlat/verify.hpp"

#include <cmath>

namespace twistlat {

CheckRecord to_record(const IdentityCheck& c) {
    return {c.name, c.identity, c.residual, c.tolerance, c.pass};
}

CheckRecord to_record(const FieldCheck& c) {
    return {c.name, c.identity, c.residual, c.tolerance, c.pass};
}

SuiteReport run_specfun_suite(Rng& rng) {
    SuiteReport rep;
    rep.suite = "specfun";
    for (const auto& c : specfun_selftest(rng)) rep.records.push_back(to_record(c));
    return rep;
}

SuiteReport run_lattice_suite(const Session& s, Rng& rng, int trials) {
    SuiteReport rep;
    rep.suite = "lattice";
    {
        CocycleReport cr = verify_epsilon(s.eps, s.lattice, trials, rng);
        rep.records.push_back({"cocycle-signs",
                               "self-pairing and symmetrized product conditions",
                               double(cr.failures.size()), 0.0,
                               cr.failures.empty()});
    }
    {
        int bad = 0;
        for (int t = 0; t < trials; ++t) {
            IVec lam = random_ivec(rng, s.lattice.rank, -5, 5);
            IVec mu = random_ivec(rng, s.lattice.rank, -5, 5);
            int lhs = s.eta.eval(lam) * s.eta.eval(mu) * s.eps.eval(lam, mu);
            int rhs = s.eta.eval(lam + mu) *
                      s.eps.eval(s.phi.apply(lam), s.phi.apply(mu));
            if (lhs != rhs) ++bad;
        }
        rep.records.push_back({"eta-compatibility",
                               "eta(l)eta(m)eps(l,m) = eta(l+m)eps(phi l, phi m)",
                               double(bad), 0.0, bad == 0});
    }
    {
        int bad = 0;
        for (int t = 0; t < trials; ++t) {
            IVec lam = random_ivec(rng, s.lattice.rank, -5, 5);
            IVec mu = random_ivec(rng, s.lattice.rank, -5, 5);
            if (s.lattice.pair(s.phi.apply(lam), s.phi.apply(mu)) !=
                s.lattice.pair(lam, mu))
                ++bad;
        }
        rep.records.push_back({"form-preservation",
                               "(phi l | phi m) = (l | m) exactly", double(bad),
                               0.0, bad == 0});
    }
    return rep;
}

namespace {

Mat exp_nilpotent(const Mat& x, int terms) {
    Mat sum = Mat::Identity(x.rows(), x.cols());
    Mat t = sum;
    for (int k = 1; k <= terms; ++k) {
        t = (t * x) / double(k);
        sum += t;
    }
    return sum;
}

}  // namespace

SuiteReport run_decomp_suite(const Session& s, Rng& rng) {
    SuiteReport rep;
    rep.suite = "decomp";
    const auto& jd = s.jd;
    const int d = jd.dim;
    auto push = [&](const std::string& n, const std::string& id, double r,
                    double tol) { rep.records.push_back({n, id, r, tol, r <= tol}); };

    Mat expN = exp_nilpotent(-kTwoPiI * jd.nilp, d + 4);
    push("reconstruction", "sigma exp(-2 pi i N) = phi",
         (jd.sigma * expN - jd.phi).cwiseAbs().maxCoeff(), 1e-10);

    Mat total = jd.s_matrix() + jd.nilp;
    // exp(-2 pi i (S+N)) via scaling and squaring on the small matrix
    {
        Mat x = -kTwoPiI * total;
        int squarings = 8;
        Mat y = exp_nilpotent(x / std::pow(2.0, squarings), 24);
        for (int i = 0; i < squarings; ++i) y = y * y;
        push("exponent-split", "exp(-2 pi i (S+N)) = phi",
             (y - jd.phi).cwiseAbs().maxCoeff(), 1e-10);
    }

    push("commuting", "sigma N = N sigma",
         (jd.sigma * jd.nilp - jd.nilp * jd.sigma).cwiseAbs().maxCoeff(), 1e-10);
    {
        Mat npow = Mat::Identity(d, d);
        for (int k = 0; k < d; ++k) npow = npow * jd.nilp;
        push("nilpotency", "N^d = 0", npow.cwiseAbs().maxCoeff(), 1e-10);
    }
    {
        Mat sum = Mat::Zero(d, d);
        double worst = 0.0;
        for (const auto& b : jd.blocks) {
            sum += b.projector;
            worst = std::max(worst, (b.projector * b.projector - b.projector)
                                        .cwiseAbs()
                                        .maxCoeff());
        }
        push("projector-idempotence", "pi^2 = pi", worst, 1e-10);
        push("projector-completeness", "sum pi = id",
             (sum - Mat::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-10);
    }
    {
        const Mat G = s.lattice.gram_c();
        push("form-sigma", "(sigma a | sigma b) = (a|b)",
             (jd.sigma.transpose() * G * jd.sigma - G).cwiseAbs().maxCoeff(),
             1e-10);
        push("form-nilp", "(N a | b) + (a | N b) = 0",
             (jd.nilp.transpose() * G + G * jd.nilp).cwiseAbs().maxCoeff(),
             1e-10);
    }
    {
        double worst = 0.0;
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int t = 0; t < 50; ++t) {
            Vec v(d);
            for (int i = 0; i < d; ++i) v[i] = cplx(unif(rng), unif(rng));
            StarSplit sp = star_split(jd, v);
            Vec back = sp.lambda0 +
                       (Mat::Identity(d, d) - jd.sigma) * sp.lambda_star;
            worst = std::max(worst, (back - v).cwiseAbs().maxCoeff());
            worst = std::max(
                worst, (jd.pi0() * sp.lambda_star).cwiseAbs().maxCoeff());
        }
        push("star-split", "lam = lam0 + (1-sigma) lam*", worst, 1e-10);
    }
    {
        double worst = 0.0;
        for (const auto& b : jd.blocks)
            worst = std::max(worst, std::abs(std::exp(-kTwoPiI * b.alpha0) -
                                             b.eigenvalue));
        push("alpha0-window", "exp(-2 pi i alpha0) = eigenvalue", worst, 1e-10);
    }
    {
        // (P^+ a | b) = (a | P^- b) and skew property of P, per zeta degree
        double worst = 0.0;
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            Vec a(d), b(d);
            for (int i = 0; i < d; ++i) {
                a[i] = cplx(unif(rng), unif(rng));
                b[i] = cplx(unif(rng), unif(rng));
            }
            auto pa = apply_P(jd, +1, a);
            auto pb = apply_P(jd, -1, b);
            for (size_t j = 0; j < pa.size(); ++j)
                worst = std::max(worst, std::abs(s.lattice.pair(pa[j], b) -
                                                 s.lattice.pair(a, pb[j])));
            auto sa = apply_P_skew(jd, a);
            auto sb = apply_P_skew(jd, b);
            for (size_t j = 0; j < sa.size(); ++j)
                worst = std::max(worst, std::abs(s.lattice.pair(sa[j], b) +
                                                 s.lattice.pair(a, sb[j])));
        }
        push("P-adjoint", "(P+ a|b) = (a|P- b), (P a|b) = -(a|P b)", worst,
             1e-10);
    }
    return rep;
}

SuiteReport run_structure_suite(const Session& s, Rng& rng) {
    SuiteReport rep;
    rep.suite = "structure";
    const auto& jd = s.jd;
    const int d = jd.dim;
    auto push = [&](const std::string& n, const std::string& id, double r,
                    double tol) { rep.records.push_back({n, id, r, tol, r <= tol}); };

    {
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            Vec lam = to_complex(random_ivec(rng, d, -3, 3));
            cplx via_a = c_lambda(jd, lam);
            Vec lam0 = jd.pi0() * lam;
            cplx direct = 0.5 * (s.lattice.pair(apply_P_at(jd, -1, kTwoPiI, lam0),
                                                lam) -
                                 s.lattice.pair(lam, lam));
            worst = std::max(worst, std::abs(via_a - direct));
        }
        push("c-consistency", "c = a(2 pi i) + b both routes", worst, 1e-12);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < 30; ++t) {
            IVec l1 = random_ivec(rng, d, -2, 2);
            IVec l2 = random_ivec(rng, d, -2, 2);
            IVec mu = random_ivec(rng, d, -2, 2);
            cplx lhs = B_constant(jd, to_complex(IVec(l1 + l2)), to_complex(mu));
            cplx rhs = B_constant(jd, to_complex(l1), to_complex(mu)) *
                       B_constant(jd, to_complex(l2), to_complex(mu));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        push("B-bimultiplicative", "B_{l+l',m} = B_{l,m} B_{l',m}", worst, 1e-9);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            IVec lam = random_ivec(rng, d, -3, 3);
            IVec mu = random_ivec(rng, d, -3, 3);
            cplx C = C_constant(jd, s.lattice, lam, mu);
            cplx Bml = B_constant(jd, to_complex(mu), to_complex(lam));
            cplx Blm = B_constant(jd, to_complex(lam), to_complex(mu));
            long long p1 = s.lattice.norm2(lam) * s.lattice.norm2(mu);
            long long p2 = s.lattice.pair(lam, mu);
            double s1 = (p1 % 2 + 2) % 2 == 0 ? 1.0 : -1.0;
            double s2 = (p2 % 2 + 2) % 2 == 0 ? 1.0 : -1.0;
            worst = std::max(worst, std::abs(s1 * C - s2 * Bml / Blm));
        }
        push("B-C-compatibility",
             "(-1)^{|l|^2|m|^2} C = (-1)^{(l|m)} B_{m,l}/B_{l,m}", worst, 1e-9);
    }
    {
        double worst = 0.0;
        int found = 0;
        for (int t = 0; t < 400 && found < 40; ++t) {
            IVec lam = random_ivec(rng, d, -3, 3);
            IVec mu = random_ivec(rng, d, -3, 3);
            if (s.lattice.norm2(lam) % 2 != 0 || s.lattice.norm2(mu) % 2 != 0)
                continue;
            ++found;
            cplx prod = C_constant(jd, s.lattice, lam, mu) *
                        C_constant(jd, s.lattice, mu, lam);
            worst = std::max(worst, std::abs(prod - 1.0));
        }
        push("C-antisymmetry", "C_{l,m} C_{m,l} = 1 on even-norm pairs", worst,
             1e-9);
    }
    {
        double worst = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                Vec li = to_complex(IVec(IVec::Unit(d, i)));
                Vec lj = to_complex(IVec(IVec::Unit(d, j)));
                cplx closed = B_constant(jd, li, lj);
                cplx oracle = B_oracle(jd, li, lj, 10000);
                worst = std::max(worst,
                                 std::abs(closed - oracle) /
                                     std::max(1.0, std::abs(closed)));
            }
        push("B-oracle", "closed form vs per-mode series with tails", worst,
             1e-6);
    }
    if (jd.nilpotency_index == 1) {
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            Vec lam = to_complex(random_ivec(rng, d, -3, 3));
            auto ap = a_lambda(jd, lam);
            for (const auto& c : ap) worst = std::max(worst, std::abs(c));
            worst = std::max(worst,
                             std::abs(c_lambda(jd, lam) - b_lambda(jd, lam)));
            Vec ta = tau_argument(jd, lam);
            worst = std::max(
                worst,
                (ta - kTwoPiI * (jd.pi0() * lam)).cwiseAbs().maxCoeff());
        }
        push("semisimple-degeneration", "N = 0: a = 0, c = b, tau arg = 2 pi i lam0",
             worst, 1e-12);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            Vec lam = to_complex(random_ivec(rng, d, -3, 3));
            Vec v = tau_argument(jd, lam);
            Vec lhs = jd.nilp * v;
            Vec rhs = (Mat::Identity(d, d) - jd.phi) * (jd.pi0() * lam);
            worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
        push("tau-argument", "N tau_arg = (1 - phi) lam0 (series route)", worst,
             1e-10);
    }
    return rep;
}

SuiteReport run_group_suite(const Session& s, Rng& rng, int assoc_trials,
                            int pair_trials) {
    SuiteReport rep;
    rep.suite = "group";
    GroupContext ctx(s.lattice, s.phi, s.jd, s.eps, s.eta);
    const int d = s.lattice.rank;
    auto push = [&](const std::string& n, const std::string& id, double r,
                    double tol) { rep.records.push_back({n, id, r, tol, r <= tol}); };

    {
        double worst = 0.0;
        for (int t = 0; t < assoc_trials; ++t) {
            GroupElement x = ctx.random_element(rng);
            GroupElement y = ctx.random_element(rng);
            GroupElement z = ctx.random_element(rng);
            worst = std::max(worst, ctx.distance(ctx.multiply(ctx.multiply(x, y), z),
                                                 ctx.multiply(x, ctx.multiply(y, z))));
        }
        push("associativity", "(xy)z = x(yz)", worst, 1e-10);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < pair_trials; ++t) {
            GroupElement x = ctx.random_element(rng);
            worst = std::max(worst, ctx.distance(ctx.multiply(x, ctx.identity()), x));
            worst = std::max(worst, ctx.distance(ctx.multiply(ctx.identity(), x), x));
            worst = std::max(
                worst, ctx.distance(ctx.multiply(x, ctx.inverse(x)), ctx.identity()));
        }
        push("neutral-inverse", "x 1 = x, x x^{-1} = 1", worst, 1e-12);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < pair_trials; ++t) {
            IVec lam = random_ivec(rng, d, -2, 2);
            IVec mu = random_ivec(rng, d, -2, 2);
            worst = std::max(
                worst, ctx.distance(ctx.multiply(ctx.g_element(lam), ctx.g_element(mu)),
                                    ctx.g_element(IVec(lam + mu))));
        }
        push("g-closure", "g_l g_m = g_{l+m}", worst, 1e-9);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < pair_trials; ++t) {
            GroupElement g = ctx.g_element(random_ivec(rng, d, -2, 2));
            GroupElement y = ctx.random_element(rng);
            GroupElement comm = ctx.multiply(
                ctx.multiply(g, y), ctx.multiply(ctx.inverse(g), ctx.inverse(y)));
            worst = std::max(worst, ctx.distance(comm, ctx.identity()));
        }
        push("g-centrality", "g_l y g_l^{-1} y^{-1} = 1", worst, 1e-9);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < pair_trials; ++t) {
            GroupElement x = ctx.random_element(rng);
            IVec lam = random_ivec(rng, d, -2, 2);
            GNormalForm a = ctx.reduce_mod_Nphi(x);
            GNormalForm b = ctx.reduce_mod_Nphi(
                ctx.multiply(x, ctx.g_element(lam)));
            double dist = ctx.distance(a.rep, b.rep);
            worst = std::max(worst, dist);
            GNormalForm c = ctx.reduce_mod_Nphi(a.rep);
            worst = std::max(worst, ctx.distance(c.rep, a.rep));
        }
        push("quotient-soundness", "reduce(x g_l) = reduce(x), idempotent",
             worst, 1e-9);
    }
    {
        double worst = 0.0;
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int t = 0; t < pair_trials; ++t) {
            GroupElement x = ctx.random_element(rng);
            GroupElement y = ctx.random_element(rng);
            Vec a(d);
            for (int i = 0; i < d; ++i) a[i] = cplx(unif(rng), unif(rng));
            cplx lhs = ctx.adjoint_mode_shift(ctx.multiply(x, y), a, 0.0);
            cplx rhs = ctx.adjoint_mode_shift(x, a, 0.0) +
                       ctx.adjoint_mode_shift(y, a, 0.0);
            worst = std::max(worst, std::abs(lhs - rhs));
            worst = std::max(worst,
                             std::abs(ctx.adjoint_mode_shift(x, a, cplx(1.0, 0))));
            GroupElement g = ctx.g_element(random_ivec(rng, d, -2, 2));
            worst = std::max(worst, std::abs(ctx.adjoint_mode_shift(g, a, 0.0)));
        }
        push("adjoint-homomorphism",
             "mode shift additive under products; trivial for g_l and m != 0",
             worst, 1e-9);
    }
    {
        double worst = 0.0;
        for (int t = 0; t < pair_trials; ++t) {
            GroupElement a = ctx.tau_element(random_ivec(rng, d, -2, 2));
            GroupElement b = ctx.tau_element(random_ivec(rng, d, -2, 2));
            GroupElement comm = ctx.multiply(
                ctx.multiply(a, b), ctx.multiply(ctx.inverse(a), ctx.inverse(b)));
            if (!comm.lam.isZero()) worst = std::max(worst, 1.0);
            worst = std::max(worst, comm.h.cwiseAbs().maxCoeff());
        }
        push("tau-heisenberg", "tau commutators are central scalars", worst,
             1e-10);
    }
    {
        // tau relations against the multiplication law
        double worst = 0.0;
        const auto& jd = s.jd;
        for (int t = 0; t < pair_trials; ++t) {
            IVec lam = random_ivec(rng, d, -2, 2);
            IVec mu = random_ivec(rng, d, -2, 2);
            GroupElement lhs = ctx.multiply(ctx.tau_element(lam), ctx.tau_element(mu));
            GroupElement rhs = ctx.tau_element(IVec(lam + mu));
            // scalar exp(((phi + phi^{-1} - 2)/(2N)) lam0 | mu)
            Vec lam0 = jd.pi0() * to_complex(lam);
            Mat op = Mat::Zero(d, d);
            Mat npow = Mat::Identity(d, d);
            double kfact = 1.0;
            for (int k = 2; k <= 2 * jd.nilpotency_index; k += 2) {
                kfact = 1.0;
                for (int i = 1; i <= k; ++i) kfact *= i;
                op += 2.0 * std::pow(kTwoPiI, k) / kfact * npow * jd.nilp;
                npow = npow * jd.nilp * jd.nilp;
            }
            cplx scal = std::exp(0.5 * s.lattice.pair(Vec(op * lam0), to_complex(mu)));
            rhs.c *= scal;
            worst = std::max(worst, ctx.distance(lhs, rhs));

            GroupElement conj = ctx.multiply(
                ctx.multiply(ctx.tau_element(lam), ctx.u_element(mu)),
                ctx.inverse(ctx.tau_element(lam)));
            GroupElement want = ctx.u_element(mu);
            want.c *= std::exp(
                s.lattice.pair(Vec(one_minus_phiu_over_n(jd) * lam0), to_complex(mu)));
            worst = std::max(worst, ctx.distance(conj, want));
        }
        push("tau-relations",
             "tau products and tau-U conjugation match the closed scalars",
             worst, 1e-9);
    }
    return rep;
}

namespace {

ModuleSpec lean_spec(const ModuleSpec& spec) {
    ModuleSpec lean = spec;
    lean.cutoff = std::min(spec.cutoff, 3.0);
    lean.max_degree = std::min(spec.max_degree, 3);
    lean.exp_window = std::min(spec.exp_window, 2);
    lean.charge_window = std::min(spec.charge_window, 1);
    return lean;
}

}  // namespace

SuiteReport run_fock_suite(const Session& s, Rng& rng) {
    (void)rng;
    SuiteReport rep;
    rep.suite = "fock";
    ModuleSpec spec = lean_spec(s.module);
    FockModule fm = make_fock(s, spec);
    FieldBounds fb{spec.cutoff + 2.0, spec.zeta_order};
    FieldAlgebra alg(fm, s.lattice, s.eps, s.eta, fb);
    const int d = s.lattice.rank;

    rep.records.push_back(to_record(alg.check_heisenberg_commutators(2)));
    {
        double worst = 0.0;
        // restrictedness: annihilation modes strictly lower the weight
        for (int b = 0; b < fm.block_count(); ++b)
            for (int t = 1; t <= int(spec.cutoff) + 1; ++t) {
                cplx m = fm.block_alpha0(b) + double(t);
                if (!(m.real() > 1e-12)) continue;
                for (int i = 0; i < d; ++i) {
                    SparseOp op = fm.mode_op(Vec(Vec::Unit(d, i)), b, t);
                    for (int col = 0; col < op.dim; ++col)
                        for (const auto& [row, v] : op.cols[size_t(col)])
                            if (fm.weight(row) >= fm.weight(col) - 1e-9)
                                worst = std::max(worst, std::abs(v));
                }
            }
        rep.records.push_back({"restrictedness",
                               "positive modes strictly lower the weight", worst,
                               0.0, worst == 0.0});
    }
    {
        // K acts as the identity
        SparseOp k = fm.k_op();
        double worst =
            SparseOp::max_diff_exact(k, SparseOp::identity(fm.dim()));
        rep.records.push_back(
            {"level-one", "K acts as the identity", worst, 0.0, worst == 0.0});
    }
    bool has_u = int(fm.rep().u_gen.size()) == d;
    for (const auto& u : fm.rep().u_gen)
        if (!u) has_u = false;
    if (has_u) {
        for (int i = 0; i < d; ++i)
            rep.records.push_back(
                to_record(alg.check_aUcomm(IVec(IVec::Unit(d, i)), 2)));
        {
            // tau operators vs the group relations, module side
            double worst = 0.0;
            const auto& jd = s.jd;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Vec li = to_complex(IVec(IVec::Unit(d, i)));
                    Vec lj = to_complex(IVec(IVec::Unit(d, j)));
                    SparseOp lhs = fm.tau_op(li) * fm.tau_op(lj);
                    SparseOp rhs = fm.tau_op(Vec(li + lj));
                    Mat op = Mat::Zero(d, d);
                    Mat npow = jd.nilp;
                    for (int k = 2; k <= 2 * jd.nilpotency_index; k += 2) {
                        double kfact = 1.0;
                        for (int q = 1; q <= k; ++q) kfact *= q;
                        op += 2.0 * std::pow(kTwoPiI, k) / kfact * npow;
                        npow = npow * jd.nilp * jd.nilp;
                    }
                    cplx scal = std::exp(
                        0.5 * s.lattice.pair(Vec(op * (jd.pi0() * li)), lj));
                    rhs *= scal;
                    worst = std::max(worst, SparseOp::max_diff_exact(lhs, rhs));
                }
            rep.records.push_back({"tau-module-relations",
                                   "tau_l tau_m = scalar tau_{l+m} as operators",
                                   worst, 1e-9, worst <= 1e-9});
        }
    }
    {
        double worst = 0.0;
        for (int i = 0; i < d && i < 2; ++i)
            for (int j = 0; j < d && j < 2; ++j) {
                FieldCheck c = alg.check_theta_group_law(IVec(IVec::Unit(d, i)),
                                                         IVec(IVec::Unit(d, j)));
                worst = std::max(worst, c.residual);
            }
        rep.records.push_back({"theta-group-law",
                               "theta_h theta_h' = e^{(zeta P h0|h')} theta_{h+h'}",
                               worst, 1e-10, worst <= 1e-10});
    }
    return rep;
}

SuiteReport run_vertexop_suite(const Session& s, Rng& rng) {
    (void)rng;
    SuiteReport rep;
    rep.suite = "vertexop";
    ModuleSpec spec = lean_spec(s.module);
    FockModule fm = make_fock(s, spec);
    FieldBounds fb{spec.cutoff + 2.0, spec.zeta_order};
    FieldAlgebra alg(fm, s.lattice, s.eps, s.eta, fb);
    const int d = s.lattice.rank;

    bool has_u = int(fm.rep().u_gen.size()) == d;
    for (const auto& u : fm.rep().u_gen)
        if (!u) has_u = false;

    for (int i = 0; i < d; ++i) {
        IVec e = IVec::Unit(d, i);
        rep.records.push_back(to_record(alg.check_emodes(e, 2)));
        if (has_u) {
            rep.records.push_back(to_record(alg.check_hvobrext(e, 2)));
            rep.records.push_back(to_record(alg.check_phi_equivariance(e)));
            rep.records.push_back(to_record(alg.check_dz_lemma(e)));
        }
    }
    if (has_u && d >= 2) {
        IVec sum = IVec::Unit(d, 0) + IVec::Unit(d, 1);
        rep.records.push_back(to_record(alg.check_phi_equivariance(sum)));
    }
    rep.records.push_back(to_record(
        alg.check_exp_product(IVec(IVec::Unit(d, 0)), IVec(IVec::Unit(d, d - 1)))));
    rep.records.push_back(
        to_record(alg.check_theta_derivative_lemma(IVec(IVec::Unit(d, d - 1)))));
    rep.records.push_back(to_record(alg.check_current_products(
        Vec(Vec::Unit(d, 0)), Vec(Vec::Unit(d, d - 1)))));
    if (has_u)
        rep.records.push_back(to_record(alg.check_current_delta_commutator(
            Vec(Vec::Unit(d, 0)), IVec(IVec::Unit(d, d - 1)), 2)));
    if (has_u) {
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                rep.records.push_back(to_record(alg.check_nth_product_identity(
                    IVec(IVec::Unit(d, i)), IVec(IVec::Unit(d, j)))));
            }
        rep.records.push_back(to_record(alg.check_nth_product_stability(
            IVec(IVec::Unit(d, 0)), IVec(IVec::Unit(d, d - 1)))));
        rep.records.push_back(to_record(alg.product_limit_check(
            IVec(IVec::Unit(d, 0)), IVec(IVec::Unit(d, d - 1)))));
        if (d >= 2)
            rep.records.push_back(to_record(alg.product_limit_check(
                IVec(IVec::Unit(d, 1)), IVec(IVec::Unit(d, 0)))));
    }
    {
        std::vector<cplx> ratios = {cplx(0, 2), cplx(1, 1), cplx(-1, 2)};
        double worst = 0.0;
        auto run_pair = [&](const IVec& a, const IVec& b) {
            for (const auto& p :
                 scalar_locality_check(s.jd, s.lattice, a, b, ratios))
                worst = std::max(worst, p.residual);
        };
        run_pair(IVec(IVec::Unit(d, 0)), IVec(IVec::Unit(d, d - 1)));
        if (d >= 2) run_pair(IVec(IVec::Unit(d, 1)), IVec(IVec::Unit(d, 0)));
        rep.records.push_back({"scalar-locality",
                               "two-domain expansions of the product scalar agree",
                               worst, 1e-6, worst <= 1e-6});
    }
    return rep;
}

std::vector<SuiteReport> run_all_suites(const Session& s, Rng& rng) {
    std::vector<SuiteReport> out;
    out.push_back(run_lattice_suite(s, rng));
    out.push_back(run_decomp_suite(s, rng));
    out.push_back(run_specfun_suite(rng));
    out.push_back(run_structure_suite(s, rng));
    out.push_back(run_group_suite(s, rng));
    out.push_back(run_fock_suite(s, rng));
    out.push_back(run_vertexop_suite(s, rng));
    return out;
}

}  // namespace twistlat
