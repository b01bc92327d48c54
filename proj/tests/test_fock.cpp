#include <doctest.h>

#include "twistlat/fock.hpp"
#include "twistlat/io.hpp"
#include "twistlat/vertexop.hpp"

using namespace twistlat;

namespace {

Session session_for(const std::string& text, unsigned seed = 41) {
    Rng rng(seed);
    return build_session(parse_input(text), rng);
}

// expected sparse action comparison helper
void check_column(const FockModule& fm, const SparseOp& op, int col,
                  const std::vector<std::pair<int, cplx>>& want,
                  double tol = 1e-12) {
    std::map<int, cplx> acc;
    for (const auto& [r, v] : op.cols[size_t(col)]) acc[r] += v;
    for (const auto& [r, v] : want) acc[r] -= v;
    for (const auto& [r, v] : acc) {
        INFO("row ", r);
        CHECK(std::abs(v) < tol);
    }
}

}  // namespace

TEST_CASE("rank-4 preset reproduces the displayed mode actions") {
    Session s = session_for(example_61_json());
    ModuleSpec spec = s.module;
    spec.cutoff = 3;
    FockModule fm = make_fock(s, spec);

    const int vac = fm.vacuum_index();
    REQUIRE(vac >= 0);

    // creation dictionary: lam1 at mode -1 multiplies by x_{1,1}
    Vec l1 = Vec::Unit(4, 0), l2 = Vec::Unit(4, 1);
    Vec l3 = Vec::Unit(4, 2), l4 = Vec::Unit(4, 3);
    SparseOp create1 = fm.mode_op(l1, 0, -1);
    BasisState x11 = fm.state(vac);
    // locate the variable (block 0, vec 0, t = -1)
    int var = -1;
    for (int i = 0; i < int(fm.osc_vars().size()); ++i) {
        const auto& v = fm.osc_vars()[size_t(i)];
        if (v.block == 0 && v.vec == 0 && v.t == -1) var = i;
    }
    REQUIRE(var >= 0);
    x11.osc = {{var, 1}};
    int x11_idx = fm.find_state(x11);
    REQUIRE(x11_idx >= 0);
    check_column(fm, create1, vac, {{x11_idx, cplx(1, 0)}});

    // lam2 creation carries the scaling 2 pi i
    SparseOp create2 = fm.mode_op(l2, 0, -1);
    int var2 = -1;
    for (int i = 0; i < int(fm.osc_vars().size()); ++i) {
        const auto& v = fm.osc_vars()[size_t(i)];
        if (v.block == 0 && v.vec == 1 && v.t == -1) var2 = i;
    }
    BasisState x21 = fm.state(vac);
    x21.osc = {{var2, 1}};
    check_column(fm, create2, vac, {{fm.find_state(x21), kTwoPiI}});

    // positive modes annihilate the vacuum
    for (int t = 1; t <= 3; ++t)
        for (const Vec& a : {l1, l2, l3, l4})
            check_column(fm, fm.mode_op(a, 0, t), vac, {});

    // lam3 at mode +1 acts as (1/2 pi i)(1 d/dx_{2,1} - d/dx_{1,1})
    SparseOp ann3 = fm.mode_op(l3, 0, 1);
    check_column(fm, ann3, x11_idx, {{vac, -1.0 / kTwoPiI}});
    check_column(fm, ann3, fm.find_state(x21), {{vac, 1.0 / kTwoPiI}});

    // lam1 at mode +1: 1*d/dx_{4,1} + d/dx_{3,1}
    int var3 = -1, var4 = -1;
    for (int i = 0; i < int(fm.osc_vars().size()); ++i) {
        const auto& v = fm.osc_vars()[size_t(i)];
        if (v.block == 0 && v.vec == 2 && v.t == -1) var3 = i;
        if (v.block == 0 && v.vec == 3 && v.t == -1) var4 = i;
    }
    BasisState x31 = fm.state(vac);
    x31.osc = {{var3, 1}};
    BasisState x41 = fm.state(vac);
    x41.osc = {{var4, 1}};
    SparseOp ann1 = fm.mode_op(l1, 0, 1);
    check_column(fm, ann1, fm.find_state(x41), {{vac, cplx(1, 0)}});
    check_column(fm, ann1, fm.find_state(x31), {{vac, cplx(1, 0)}});
}

TEST_CASE("rank-3 preset matches the displayed annihilation scalars") {
    Session s = session_for(example_62_json());
    FockModule fm = make_fock(s, s.module);
    const int vac = fm.vacuum_index();
    Vec a1 = Vec::Unit(3, 0);
    // alpha1 at mode +1 pairs with x_{1,1} as -sqrt(2) and x_{2,1} as sqrt(2)
    int var1 = -1, var2 = -1;
    for (int i = 0; i < int(fm.osc_vars().size()); ++i) {
        const auto& v = fm.osc_vars()[size_t(i)];
        if (v.block == 0 && v.vec == 0 && v.t == -1) var1 = i;
        if (v.block == 0 && v.vec == 1 && v.t == -1) var2 = i;
    }
    BasisState x11 = fm.state(vac);
    x11.osc = {{var1, 1}};
    BasisState x21 = fm.state(vac);
    x21.osc = {{var2, 1}};
    SparseOp op = fm.mode_op(a1, 0, 1);
    const double s2 = std::sqrt(2.0);
    check_column(fm, op, fm.find_state(x11), {{vac, cplx(-s2, 0)}});
    check_column(fm, op, fm.find_state(x21), {{vac, cplx(s2, 0)}});
}

TEST_CASE("zero modes and U descriptors act as displayed") {
    Session s = session_for(example_61_json());
    FockModule fm = make_fock(s, s.module);
    const int vac = fm.vacuum_index();

    // lam1 zero mode multiplies by x_{1,0}
    BasisState xstate = fm.state(vac);
    xstate.xdeg[0] = 1;
    SparseOp zm = fm.zero_mode_op(Vec(Vec::Unit(4, 0)));
    check_column(fm, zm, vac, {{fm.find_state(xstate), cplx(1, 0)}});

    // U_{lam1} = q2 multiplication
    SparseOp u1 = fm.u_op(IVec(IVec::Unit(4, 0)));
    BasisState q2state = fm.state(vac);
    q2state.qcharge[1] = 1;
    check_column(fm, u1, vac, {{fm.find_state(q2state), cplx(1, 0)}});

    // U_{lam2} = (-1)^{q1 d/dq1} e^{-2 pi i x_{1,0}} lowers the window index
    SparseOp u2 = fm.u_op(IVec(IVec::Unit(4, 1)));
    BasisState estate = fm.state(vac);
    estate.xexp[0] = -1;
    check_column(fm, u2, vac, {{fm.find_state(estate), cplx(1, 0)}});
    // on a q1-charged state the parity sign appears
    BasisState q1state = fm.state(vac);
    q1state.qcharge[0] = 1;
    BasisState q1e = q1state;
    q1e.xexp[0] = -1;
    check_column(fm, u2, fm.find_state(q1state),
                 {{fm.find_state(q1e), cplx(-1, 0)}});

    // U_{lam4} shifts the polynomial variable: x -> x - 1
    SparseOp u4 = fm.u_op(IVec(IVec::Unit(4, 3)));
    check_column(fm, u4, fm.find_state(xstate),
                 {{fm.find_state(xstate), cplx(1, 0)}, {vac, cplx(-1, 0)}});

    // K acts as the identity
    SparseOp k = fm.k_op();
    CHECK(SparseOp::max_diff_exact(k, SparseOp::identity(fm.dim())) == 0.0);
}

TEST_CASE("inconsistent zero-mode data is rejected") {
    Session s = session_for(example_61_json());
    ZeroModeRep rep = make_zero_mode_rep(s, s.module);
    rep.h0_ops[2].terms[0].coeff = cplx(1.0, 0.0);  // breaks the bracket
    FockConfig cfg;
    cfg.cutoff = 1;
    CHECK_THROWS_AS(FockModule(s.jd, s.eps, std::move(rep), cfg),
                    RepInconsistent);
}

TEST_CASE("hard basis cap raises") {
    Session s = session_for(example_61_json());
    ModuleSpec spec = s.module;
    spec.max_states = 10;
    CHECK_THROWS_AS(make_fock(s, spec), BasisTooLarge);
}

TEST_CASE("no zero-mode directions leaves the coefficient space alone") {
    // negation on a rank-2 lattice: no fixed subspace, half-integer modes
    InputDocument doc;
    doc.lattice.rank = 2;
    doc.lattice.gram = IMat::Zero(2, 2);
    doc.lattice.gram(0, 0) = 2;
    doc.lattice.gram(1, 1) = 2;
    doc.phi.matrix = -IMat::Identity(2, 2);
    Rng rng(42);
    Session s = build_session(doc, rng);
    ZeroModeRep rep = polarization_rep(s.jd);
    CHECK(rep.h0_basis.cols() == 0);
    FockConfig cfg;
    cfg.cutoff = 0.4;  // below the lightest creation weight 1/2
    FockModule fm(s.jd, s.eps, std::move(rep), cfg);
    CHECK(fm.dim() == 1);

    FockConfig cfg2;
    cfg2.cutoff = 0.6;  // admits exactly the two half-modes
    FockModule fm2(s.jd, s.eps, polarization_rep(s.jd), cfg2);
    CHECK(fm2.dim() == 3);
}

TEST_CASE("ground energy of the negation orbifold block") {
    // rank-1 lattice, phi = -1: L0 constant is d/16 on the vacuum
    InputDocument doc;
    doc.lattice.rank = 1;
    doc.lattice.gram = IMat::Constant(1, 1, 1);
    doc.phi.matrix = -IMat::Identity(1, 1);
    Rng rng(43);
    Session s = build_session(doc, rng);
    FockConfig cfg;
    cfg.cutoff = 1.6;
    FockModule fm(s.jd, s.eps, polarization_rep(s.jd), cfg);
    CanonicalBlock blk;
    blk.type = 2;
    blk.alpha0 = cplx(-0.5, 0.0);
    blk.v = {Vec(Vec::Unit(1, 0))};
    SparseOp L0 = fm.virasoro({blk}, 0);
    const int vac = fm.vacuum_index();
    check_column(fm, L0, vac, {{vac, cplx(1.0 / 16.0, 0)}}, 1e-11);
    // first excited state at weight 1/2 has energy 1/16 + 1/2
    int var = -1;
    for (int i = 0; i < int(fm.osc_vars().size()); ++i)
        if (std::abs(fm.osc_vars()[size_t(i)].m - cplx(-0.5, 0)) < 1e-12)
            var = i;
    REQUIRE(var >= 0);
    BasisState st = fm.state(vac);
    st.osc = {{var, 1}};
    int idx = fm.find_state(st);
    check_column(fm, L0, idx, {{idx, cplx(1.0 / 16.0 + 0.5, 0)}}, 1e-11);
}

TEST_CASE("weight histogram and strict mode application") {
    Session s = session_for(example_62_json());
    ModuleSpec spec = s.module;
    spec.cutoff = 2;
    FockModule fm = make_fock(s, spec);
    auto hist = fm.weight_histogram();
    CHECK(hist.count(0.0) == 1);
    CHECK(hist[0.0] > 0);

    // strict application throws when a creation overflows the cutoff
    Vec a1 = Vec::Unit(3, 0);
    Vec v = Vec::Zero(fm.dim());
    // find a state at top weight
    int top = -1;
    for (int i = 0; i < fm.dim(); ++i)
        if (fm.weight(i) > 2.0 - 1e-9) top = i;
    REQUIRE(top >= 0);
    v[top] = 1.0;
    CHECK_THROWS_AS(fm.act_mode_strict(a1, 0, -1, v), TruncationExceeded);
}

TEST_CASE("custom rep descriptor through the input document") {
    // hyperbolic rank-2 lattice with an explicit group-algebra realization
    std::string text = R"({
      "rank": 2,
      "gram": [[0,1],[1,0]],
      "phi":  [[1,0],[0,1]],
      "module": {
        "cutoff": 2,
        "rep": {
          "q_vars": [{"name":"q1","charge_window":2},{"name":"q2","charge_window":2}],
          "h0_basis": [[1,0],[0,1]],
          "h0_ops": [[{"kind":"euler","var":1,"coeff":1}],
                     [{"kind":"euler","var":0,"coeff":1}]],
          "u_gen": [[{"kind":"mult_q","var":0,"power":1}],
                    [{"kind":"mult_q","var":1,"power":1}]]
        }
      }
    })";
    Rng rng(61);
    Session s = build_session(parse_input(text), rng);
    REQUIRE(s.module.custom_rep.has_value());
    FockModule fm = make_fock(s, s.module);
    CHECK(fm.dim() > 0);
    // the mode-U commutator holds for the supplied data
    FieldBounds fb{4.0, 2};
    FieldAlgebra alg(fm, s.lattice, s.eps, s.eta, fb);
    for (int i = 0; i < 2; ++i) {
        FieldCheck c = alg.check_aUcomm(IVec(IVec::Unit(2, i)), 2);
        INFO(c.residual);
        CHECK(c.pass);
    }
}
