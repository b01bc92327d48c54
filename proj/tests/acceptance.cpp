// Acceptance suite: one line per criterion, exit code 0 only if all pass.

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "twistlat/io.hpp"
#include "twistlat/verify.hpp"
#include "twistlat/vertexop.hpp"

using namespace twistlat;

namespace {

struct Criterion {
    std::string name;
    double residual = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    double time_limit = 0.0;
    bool pass = false;
    std::string note;
};

std::vector<Criterion> results;

void run(const std::string& name, double tol, double time_limit,
         const std::function<double(std::string&)>& body) {
    Criterion c;
    c.name = name;
    c.tolerance = tol;
    c.time_limit = time_limit;
    auto t0 = std::chrono::steady_clock::now();
    try {
        c.residual = body(c.note);
        c.pass = c.residual <= tol;
    } catch (const std::exception& e) {
        c.pass = false;
        c.note = e.what();
        c.residual = std::numeric_limits<double>::infinity();
    }
    auto t1 = std::chrono::steady_clock::now();
    c.seconds = std::chrono::duration<double>(t1 - t0).count();
    if (c.time_limit > 0 && c.seconds > c.time_limit) {
        c.pass = false;
        c.note += " [time limit exceeded]";
    }
    results.push_back(c);
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << std::left
              << std::setw(34) << c.name << " residual " << std::scientific
              << std::setprecision(2) << c.residual << " (tol " << tol
              << ")  " << std::fixed << std::setprecision(2) << c.seconds
              << "s";
    if (!c.note.empty()) std::cout << "  -- " << c.note;
    std::cout << std::endl;
}

Session load_session(const std::string& dir, const std::string& file,
                     unsigned seed) {
    Rng rng(seed);
    return build_session(load_input(dir + "/" + file), rng);
}

ModuleSpec lean(const Session& s, int max_degree = 3, int expw = 2,
                int chargew = 1) {
    ModuleSpec spec = s.module;
    spec.cutoff = 3.0;
    spec.max_degree = max_degree;
    spec.exp_window = expw;
    spec.charge_window = chargew;
    return spec;
}

// hand-coded closed-form L0 for the rank-4 example
SparseOp closed_form_L0_61(const FockModule& fm) {
    SparseOp op(fm.dim());
    const auto& vars = fm.osc_vars();
    for (int col = 0; col < fm.dim(); ++col) {
        const BasisState& st = fm.state(col);
        bool overflow = false;
        // sum_i sum_n n x_{i,n} d_{i,n}: diagonal
        cplx diag = 0.0;
        for (const auto& [v, p] : st.osc) diag += double(-vars[size_t(v)].t) * double(p);
        // x_{1,0} q2 d_{q2}
        {
            int k2 = st.qcharge[1];
            if (k2 != 0) {
                BasisState up = st;
                up.xdeg[0] += 1;
                if (up.xdeg[0] > fm.rep().poly_vars[0].max_degree) {
                    overflow = true;
                } else {
                    op.add_entry(col, fm.find_state(up), cplx(double(k2), 0));
                }
            }
        }
        // -(1/2 pi i) q1 d_{q1} d_{x_{1,0}} -- including the window factor
        {
            int k1 = st.qcharge[0];
            if (k1 != 0) {
                const cplx coeff = -double(k1) / kTwoPiI;
                if (st.xdeg[0] > 0) {
                    BasisState dn = st;
                    dn.xdeg[0] -= 1;
                    op.add_entry(col, fm.find_state(dn),
                                 coeff * double(st.xdeg[0]));
                }
                if (st.xexp[0] != 0)
                    op.add_entry(col, col,
                                 coeff * double(st.xexp[0]) *
                                     fm.rep().poly_vars[0].exp_unit);
            }
        }
        // sum_n (x_{4,n} d_{x_{3,n}} - x_{2,n} d_{x_{1,n}})
        for (const auto& [v, p] : st.osc) {
            const auto& var = vars[size_t(v)];
            int target = -1;
            double sign = 1.0;
            if (var.vec == 2) {  // x_{3,n} -> x_{4,n}
                sign = 1.0;
                target = 3;
            } else if (var.vec == 0) {  // x_{1,n} -> x_{2,n}, minus sign
                sign = -1.0;
                target = 1;
            } else {
                continue;
            }
            BasisState next = st;
            for (auto& e : next.osc)
                if (e.first == v) e.second -= 1;
            next.osc.erase(std::remove_if(next.osc.begin(), next.osc.end(),
                                          [](const auto& e) { return e.second == 0; }),
                           next.osc.end());
            // add the partner variable at the same mode
            int pv = -1;
            for (int i = 0; i < int(vars.size()); ++i)
                if (vars[size_t(i)].block == 0 && vars[size_t(i)].vec == target &&
                    vars[size_t(i)].t == var.t)
                    pv = i;
            if (pv < 0) {
                overflow = true;
                continue;
            }
            bool present = false;
            for (auto& e : next.osc)
                if (e.first == pv) {
                    e.second += 1;
                    present = true;
                }
            if (!present) next.osc.push_back({pv, 1});
            std::sort(next.osc.begin(), next.osc.end());
            int idx = fm.find_state(next);
            if (idx < 0) {
                overflow = true;
                continue;
            }
            op.add_entry(col, idx, cplx(sign * double(p), 0));
        }
        if (std::abs(diag) > 1e-300) op.add_entry(col, col, diag);
        op.inexact[size_t(col)] = overflow ? 1 : 0;
    }
    op.compress();
    return op;
}

// hand-coded closed-form L0 for the rank-3 example
SparseOp closed_form_L0_62(const FockModule& fm) {
    SparseOp op(fm.dim());
    const auto& vars = fm.osc_vars();
    const double s2 = std::sqrt(2.0);
    const cplx unit = fm.rep().poly_vars[0].exp_unit;
    for (int col = 0; col < fm.dim(); ++col) {
        const BasisState& st = fm.state(col);
        bool overflow = false;
        cplx diag = 0.0;
        for (const auto& [v, p] : st.osc) diag += double(-vars[size_t(v)].t) * double(p);
        // -(sqrt2 / 2 pi i) x_{1,0} q d_q
        {
            int k = st.qcharge[0];
            if (k != 0) {
                BasisState up = st;
                up.xdeg[0] += 1;
                if (up.xdeg[0] > fm.rep().poly_vars[0].max_degree)
                    overflow = true;
                else
                    op.add_entry(col, fm.find_state(up),
                                 -s2 / kTwoPiI * double(k));
            }
        }
        // (1/2) d^2_{x_{1,0}} with the window exponent factor
        {
            const int dgr = st.xdeg[0];
            const cplx su = double(st.xexp[0]) * unit;
            if (dgr >= 2) {
                BasisState dn = st;
                dn.xdeg[0] -= 2;
                op.add_entry(col, fm.find_state(dn),
                             0.5 * double(dgr) * double(dgr - 1));
            }
            if (dgr >= 1 && std::abs(su) > 1e-300) {
                BasisState dn = st;
                dn.xdeg[0] -= 1;
                op.add_entry(col, fm.find_state(dn), double(dgr) * su);
            }
            if (std::abs(su) > 1e-300) op.add_entry(col, col, 0.5 * su * su);
        }
        // sum_n (x_{3,n} d_{x_{2,n}} - x_{2,n} d_{x_{1,n}})
        for (const auto& [v, p] : st.osc) {
            const auto& var = vars[size_t(v)];
            int target = -1;
            double sign = 1.0;
            if (var.vec == 1) {  // x_{2,n} -> x_{3,n}
                sign = 1.0;
                target = 2;
            } else if (var.vec == 0) {  // x_{1,n} -> x_{2,n}, minus sign
                sign = -1.0;
                target = 1;
            } else {
                continue;
            }
            BasisState next = st;
            for (auto& e : next.osc)
                if (e.first == v) e.second -= 1;
            next.osc.erase(std::remove_if(next.osc.begin(), next.osc.end(),
                                          [](const auto& e) { return e.second == 0; }),
                           next.osc.end());
            int pv = -1;
            for (int i = 0; i < int(vars.size()); ++i)
                if (vars[size_t(i)].block == 0 && vars[size_t(i)].vec == target &&
                    vars[size_t(i)].t == var.t)
                    pv = i;
            if (pv < 0) {
                overflow = true;
                continue;
            }
            bool present = false;
            for (auto& e : next.osc)
                if (e.first == pv) {
                    e.second += 1;
                    present = true;
                }
            if (!present) next.osc.push_back({pv, 1});
            std::sort(next.osc.begin(), next.osc.end());
            int idx = fm.find_state(next);
            if (idx < 0) {
                overflow = true;
                continue;
            }
            op.add_entry(col, idx, cplx(sign * double(p), 0));
        }
        if (std::abs(diag) > 1e-300) op.add_entry(col, col, diag);
        op.inexact[size_t(col)] = overflow ? 1 : 0;
    }
    op.compress();
    return op;
}

}  // namespace

int main(int argc, char** argv) {
    std::string configs = "configs";
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--configs") == 0) configs = argv[i + 1];

    Session s61 = load_session(configs, "example-6.1.json", 101);
    Session s62 = load_session(configs, "example-6.2.json", 102);
    Session sid = load_session(configs, "hyperbolic-rank2.json", 103);

    run("1: rank-4 commutation scalars", 1e-10, 1.0, [&](std::string&) {
        auto C = [&](int i, int j) {
            return C_constant(s61.jd, s61.lattice, IVec(IVec::Unit(4, i)),
                              IVec(IVec::Unit(4, j)));
        };
        double worst = 0.0;
        worst = std::max(worst, std::abs(C(0, 1) - 1.0));
        worst = std::max(worst, std::abs(C(0, 2) - std::exp(cplx(0, kPi / 6))));
        worst = std::max(worst, std::abs(C(0, 3) + 1.0));
        worst = std::max(worst, std::abs(C(1, 2) + 1.0));
        worst = std::max(worst, std::abs(C(1, 3) - 1.0));
        worst = std::max(worst, std::abs(C(2, 3) - 1.0));
        return worst;
    });

    run("2: rank-3 commutation scalars", 1e-10, 1.0, [&](std::string&) {
        auto C = [&](int i, int j) {
            return C_constant(s62.jd, s62.lattice, IVec(IVec::Unit(3, i)),
                              IVec(IVec::Unit(3, j)));
        };
        double worst = 0.0;
        worst = std::max(worst, std::abs(C(2, 0) - std::exp(cplx(0, -kPi / 3))));
        worst = std::max(worst, std::abs(C(2, 1) + 1.0));
        worst = std::max(worst, std::abs(C(0, 1) - 1.0));
        return worst;
    });

    run("3: B closed form vs series oracle", 1e-6, 30.0, [&](std::string&) {
        double worst = 0.0;
        for (const Session* s : {&s61, &s62}) {
            const int d = s->lattice.rank;
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Vec li = to_complex(IVec(IVec::Unit(d, i)));
                    Vec lj = to_complex(IVec(IVec::Unit(d, j)));
                    cplx closed = B_constant(s->jd, li, lj);
                    cplx oracle = B_oracle(s->jd, li, lj, 10000);
                    worst = std::max(worst, std::abs(closed - oracle) /
                                                std::max(1.0, std::abs(closed)));
                }
        }
        return worst;
    });

    run("4: special function identity suite", 1e-8, 10.0, [&](std::string&) {
        Rng rng(404);
        double worst = 0.0;
        for (const auto& c : specfun_selftest(rng))
            worst = std::max(worst, c.residual);
        return worst;
    });

    run("5: group battery", 1e-9, 60.0, [&](std::string& note) {
        double worst = 0.0;
        double assoc = 0.0;
        for (const Session* s : {&s61, &s62}) {
            Rng rng(505);
            SuiteReport rep = run_group_suite(*s, rng, 500, 100);
            for (const auto& r : rep.records) {
                if (r.name == "associativity")
                    assoc = std::max(assoc, r.residual);
                else
                    worst = std::max(worst, r.residual);
            }
        }
        note = "associativity " + std::to_string(assoc);
        if (assoc > 1e-10) worst = std::max(worst, 1.0);
        return worst;
    });

    run("6: module-level identity battery", 1e-8, 300.0, [&](std::string& note) {
        double worst = 0.0;
        long basis = 0;
        for (const Session* s : {&s61, &s62}) {
            ModuleSpec spec = lean(*s);
            FockModule fm = make_fock(*s, spec);
            basis = std::max(basis, long(fm.dim()));
            FieldBounds fb{spec.cutoff + 2.0, spec.zeta_order};
            FieldAlgebra alg(fm, s->lattice, s->eps, s->eta, fb);
            const int d = s->lattice.rank;
            worst = std::max(worst,
                             alg.check_heisenberg_commutators(2).residual);
            for (int i = 0; i < d; ++i) {
                IVec e = IVec::Unit(d, i);
                worst = std::max(worst, alg.check_aUcomm(e, 2).residual);
                worst = std::max(worst, alg.check_emodes(e, 2).residual);
                worst = std::max(worst, alg.check_hvobrext(e, 2).residual);
                worst = std::max(worst,
                                 alg.check_phi_equivariance(e).residual);
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    if (i == j && s == &s61) continue;  // zero pairing twice
                    worst = std::max(
                        worst, alg.check_nth_product_identity(
                                       IVec(IVec::Unit(d, i)),
                                       IVec(IVec::Unit(d, j)))
                                   .residual);
                }
        }
        note = "largest basis " + std::to_string(basis);
        return worst;
    });

    run("7: L0 against closed forms", 1e-10, 120.0, [&](std::string& note) {
        double worst = 0.0;
        long compared = 0;
        {
            ModuleSpec spec = lean(s61);
            FockModule fm = make_fock(s61, spec);
            SparseOp L0 = fm.virasoro(canonical_blocks_for(s61, spec), 0);
            SparseOp hand = closed_form_L0_61(fm);
            worst = std::max(worst, SparseOp::max_diff_exact(L0, hand));
            compared += std::min(L0.exact_column_count(),
                                 hand.exact_column_count());
        }
        {
            ModuleSpec spec = lean(s62);
            FockModule fm = make_fock(s62, spec);
            SparseOp L0 = fm.virasoro(canonical_blocks_for(s62, spec), 0);
            SparseOp hand = closed_form_L0_62(fm);
            worst = std::max(worst, SparseOp::max_diff_exact(L0, hand));
            compared += std::min(L0.exact_column_count(),
                                 hand.exact_column_count());
        }
        note = "compared columns " + std::to_string(compared);
        if (compared < 1000) worst = std::max(worst, 1.0);
        return worst;
    });

    run("8: trivial-twist degeneration", 1e-12, 60.0, [&](std::string&) {
        double worst = 0.0;
        Rng rng(808);
        for (int t = 0; t < 50; ++t) {
            IVec lam = random_ivec(rng, 2, -3, 3);
            IVec mu = random_ivec(rng, 2, -3, 3);
            worst = std::max(worst, std::abs(B_constant(sid.jd, to_complex(lam),
                                                        to_complex(mu)) -
                                             1.0));
            long long e = sid.lattice.pair(lam, mu) +
                          sid.lattice.norm2(lam) * sid.lattice.norm2(mu);
            double want = (e % 2 + 2) % 2 == 0 ? 1.0 : -1.0;
            worst = std::max(worst, std::abs(C_constant(sid.jd, sid.lattice,
                                                        lam, mu) -
                                             want));
            for (const auto& c : a_lambda(sid.jd, to_complex(lam)))
                worst = std::max(worst, std::abs(c));
            worst = std::max(worst, std::abs(c_lambda(sid.jd, to_complex(lam)) -
                                             b_lambda(sid.jd, to_complex(lam))));
        }
        ModuleSpec spec = lean(sid, 3, 2, 2);
        FockModule fm = make_fock(sid, spec);
        FieldBounds fb{spec.cutoff + 2.0, spec.zeta_order};
        FieldAlgebra alg(fm, sid.lattice, sid.eps, sid.eta, fb);
        for (int i = 0; i < 2; ++i) {
            LogField y = alg.vertex_operator(IVec(IVec::Unit(2, i)), true);
            for (const auto& [k, op] : y.coeffs)
                if (k.zeta != 0) worst = std::max(worst, op.max_abs_exact());
        }
        return worst;
    });

    run("9: scalar locality transport", 1e-6, 60.0, [&](std::string&) {
        std::vector<cplx> ratios = {cplx(0, 2), cplx(1, 1), cplx(-1, 2)};
        double worst = 0.0;
        auto probe = [&](const Session& s, int i, int j) {
            const int d = s.lattice.rank;
            for (const auto& p :
                 scalar_locality_check(s.jd, s.lattice, IVec(IVec::Unit(d, i)),
                                       IVec(IVec::Unit(d, j)), ratios))
                worst = std::max(worst, p.residual);
        };
        probe(s61, 0, 2);
        probe(s61, 1, 3);
        probe(s62, 2, 0);
        probe(s62, 2, 1);
        return worst;
    });

    bool all = true;
    for (const auto& c : results) all = all && c.pass;
    std::cout << (all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAILED")
              << std::endl;
    return all ? 0 : 1;
}
