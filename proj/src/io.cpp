#include "twistlat/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace twistlat {

using nlohmann::json;

namespace {

IMat parse_imat(const json& j, int rank, const std::string& what) {
    if (!j.is_array() || int(j.size()) != rank)
        throw BadInput(what + " must be a " + std::to_string(rank) + "-row matrix");
    IMat m(rank, rank);
    for (int i = 0; i < rank; ++i) {
        if (!j[size_t(i)].is_array() || int(j[size_t(i)].size()) != rank)
            throw BadInput(what + " row " + std::to_string(i) + " has wrong length");
        for (int k = 0; k < rank; ++k) {
            const auto& cell = j[size_t(i)][size_t(k)];
            if (!cell.is_number_integer())
                throw BadInput(what + " entries must be integers");
            m(i, k) = cell.get<int>();
        }
    }
    return m;
}

cplx parse_cplx(const json& j, const std::string& what) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2)
        return cplx(j[0].get<double>(), j[1].get<double>());
    throw BadInput(what + " must be a number or an [re, im] pair");
}

// Explicit zero-mode representation descriptor, mirroring the preset data.
ZeroModeRep parse_rep(const json& j, int rank) {
    ZeroModeRep rep;
    if (j.contains("poly_vars"))
        for (const auto& v : j["poly_vars"]) {
            PolyVar pv;
            if (v.contains("name")) pv.name = v["name"].get<std::string>();
            if (v.contains("max_degree")) pv.max_degree = v["max_degree"].get<int>();
            if (v.contains("exp_window")) pv.exp_window = v["exp_window"].get<int>();
            if (v.contains("exp_unit"))
                pv.exp_unit = parse_cplx(v["exp_unit"], "exp_unit");
            rep.poly_vars.push_back(pv);
        }
    if (j.contains("q_vars"))
        for (const auto& v : j["q_vars"]) {
            QVar qv;
            if (v.contains("name")) qv.name = v["name"].get<std::string>();
            if (v.contains("charge_window"))
                qv.charge_window = v["charge_window"].get<int>();
            rep.q_vars.push_back(qv);
        }
    if (!j.contains("h0_basis") || !j.contains("h0_ops"))
        throw BadInput("custom rep needs h0_basis and h0_ops");
    const auto& basis = j["h0_basis"];
    rep.h0_basis = Mat(rank, int(basis.size()));
    for (int c = 0; c < int(basis.size()); ++c) {
        if (int(basis[size_t(c)].size()) != rank)
            throw BadInput("h0_basis column has wrong length");
        for (int r = 0; r < rank; ++r)
            rep.h0_basis(r, c) = parse_cplx(basis[size_t(c)][size_t(r)], "h0_basis");
    }
    for (const auto& fops : j["h0_ops"]) {
        ZeroModeDescriptor desc;
        for (const auto& t : fops) {
            ZeroModeTerm term;
            const std::string kind = t.at("kind").get<std::string>();
            if (kind == "mult") term.kind = ZeroModeTerm::MultX;
            else if (kind == "deriv") term.kind = ZeroModeTerm::DerivX;
            else if (kind == "euler") term.kind = ZeroModeTerm::Euler;
            else throw BadInput("unknown zero-mode term kind '" + kind + "'");
            term.var = t.at("var").get<int>();
            term.coeff = parse_cplx(t.at("coeff"), "coeff");
            desc.terms.push_back(term);
        }
        rep.h0_ops.push_back(desc);
    }
    rep.u_gen.assign(size_t(rank), std::nullopt);
    if (j.contains("u_gen")) {
        const auto& gens = j["u_gen"];
        for (int i = 0; i < rank && i < int(gens.size()); ++i) {
            if (gens[size_t(i)].is_null()) continue;
            UDescriptor steps;
            for (const auto& st : gens[size_t(i)]) {
                UStep step;
                const std::string kind = st.at("kind").get<std::string>();
                if (kind == "scalar") { step.kind = UStep::Scalar; step.value = parse_cplx(st.at("value"), "value"); }
                else if (kind == "mult_q") { step.kind = UStep::MultQ; step.var = st.at("var").get<int>(); step.power = st.at("power").get<int>(); }
                else if (kind == "phase_euler") { step.kind = UStep::PhaseEuler; step.var = st.at("var").get<int>(); step.value = parse_cplx(st.at("value"), "value"); }
                else if (kind == "shift_x") { step.kind = UStep::ShiftX; step.var = st.at("var").get<int>(); step.value = parse_cplx(st.at("value"), "value"); }
                else if (kind == "exp_mult_x") { step.kind = UStep::ExpMultX; step.var = st.at("var").get<int>(); step.power = st.at("power").get<int>(); }
                else throw BadInput("unknown U step kind '" + kind + "'");
                steps.push_back(step);
            }
            rep.u_gen[size_t(i)] = steps;
        }
    }
    if (j.contains("osc_basis"))
        for (auto it = j["osc_basis"].begin(); it != j["osc_basis"].end(); ++it) {
            int block = std::stoi(it.key());
            const auto& cols = it.value();
            Mat m(rank, int(cols.size()));
            for (int c = 0; c < int(cols.size()); ++c)
                for (int r = 0; r < rank; ++r)
                    m(r, c) = parse_cplx(cols[size_t(c)][size_t(r)], "osc_basis");
            rep.osc_basis[block] = m;
        }
    return rep;
}

}  // namespace

InputDocument parse_input(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw BadInput(std::string("invalid JSON: ") + e.what());
    }
    InputDocument doc;
    if (!j.contains("rank") || !j["rank"].is_number_integer())
        throw BadInput("missing integer field 'rank'");
    doc.lattice.rank = j["rank"].get<int>();
    if (!j.contains("gram")) throw BadInput("missing field 'gram'");
    doc.lattice.gram = parse_imat(j["gram"], doc.lattice.rank, "gram");
    if (!j.contains("phi")) throw BadInput("missing field 'phi'");
    doc.phi.matrix = parse_imat(j["phi"], doc.lattice.rank, "phi");
    if (j.contains("labels")) {
        for (const auto& l : j["labels"])
            doc.lattice.labels.push_back(l.get<std::string>());
    }
    if (j.contains("epsilon"))
        doc.epsilon_table = parse_imat(j["epsilon"], doc.lattice.rank, "epsilon");
    if (j.contains("eta")) {
        const auto& e = j["eta"];
        if (!e.is_array() || int(e.size()) != doc.lattice.rank)
            throw BadInput("eta must list one sign per basis vector");
        IVec signs(doc.lattice.rank);
        for (int i = 0; i < doc.lattice.rank; ++i) {
            int v = e[size_t(i)].get<int>();
            if (v != 1 && v != -1) throw BadInput("eta signs must be +-1");
            signs[i] = v;
        }
        doc.eta_signs = signs;
    }
    if (j.contains("module")) {
        const auto& m = j["module"];
        if (m.contains("preset")) doc.module.preset = m["preset"].get<std::string>();
        if (m.contains("cutoff")) doc.module.cutoff = m["cutoff"].get<double>();
        if (m.contains("windows")) {
            const auto& w = m["windows"];
            if (w.contains("max_degree"))
                doc.module.max_degree = w["max_degree"].get<int>();
            if (w.contains("exp_window"))
                doc.module.exp_window = w["exp_window"].get<int>();
            if (w.contains("charge_window"))
                doc.module.charge_window = w["charge_window"].get<int>();
        }
        if (m.contains("zeta_order"))
            doc.module.zeta_order = m["zeta_order"].get<int>();
        if (m.contains("max_states"))
            doc.module.max_states = m["max_states"].get<long>();
        if (m.contains("rep"))
            doc.module.custom_rep = parse_rep(m["rep"], doc.lattice.rank);
    }
    doc.lattice.validate();
    doc.phi.validate(doc.lattice);
    return doc;
}

InputDocument load_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw BadInput("cannot open input file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_input(ss.str());
}

Session build_session(const InputDocument& doc, Rng& rng) {
    Session s;
    s.lattice = doc.lattice;
    s.phi = doc.phi;
    s.module = doc.module;
    if (doc.epsilon_table) {
        s.eps.table = *doc.epsilon_table;
        CocycleReport rep = verify_epsilon(s.eps, s.lattice, 50, rng);
        if (!rep.pass())
            throw BadInput("supplied epsilon table fails the sign conditions");
    } else {
        s.eps = build_epsilon(s.lattice);
    }
    if (doc.eta_signs)
        s.eta = build_eta_with_signs(s.lattice, s.phi, s.eps, *doc.eta_signs, rng);
    else
        s.eta = build_eta(s.lattice, s.phi, s.eps, rng);
    s.jd = jordan_chevalley(s.lattice, s.phi);
    return s;
}

namespace {

ZeroModeRep rep_example_61(const ModuleSpec& spec) {
    ZeroModeRep rep;
    rep.poly_vars.push_back({"x_{1,0}", spec.max_degree, spec.exp_window, kTwoPiI});
    rep.q_vars.push_back({"q1", spec.charge_window});
    rep.q_vars.push_back({"q2", spec.charge_window});
    rep.h0_basis = Mat::Identity(4, 4);
    ZeroModeDescriptor d1, d2, d3, d4;
    d1.terms.push_back({ZeroModeTerm::MultX, 0, cplx(1.0, 0.0)});
    d2.terms.push_back({ZeroModeTerm::Euler, 0, cplx(1.0, 0.0)});
    d3.terms.push_back({ZeroModeTerm::DerivX, 0, -1.0 / kTwoPiI});
    d4.terms.push_back({ZeroModeTerm::Euler, 1, cplx(1.0, 0.0)});
    rep.h0_ops = {d1, d2, d3, d4};
    rep.u_gen.resize(4);
    rep.u_gen[0] = UDescriptor{{UStep::MultQ, 1, 1, 0.0}};
    rep.u_gen[1] = UDescriptor{{UStep::PhaseEuler, 0, 0, cplx(0, kPi)},
                               {UStep::ExpMultX, 0, -1, 0.0}};
    rep.u_gen[2] = UDescriptor{{UStep::MultQ, 0, 1, 0.0},
                               {UStep::PhaseEuler, 1, 0, cplx(0, -kPi / 6.0)}};
    rep.u_gen[3] = UDescriptor{{UStep::PhaseEuler, 1, 0, cplx(0, kPi)},
                               {UStep::ShiftX, 0, 0, cplx(-1.0, 0.0)}};
    Mat basis(4, 4);
    basis.col(0) = Vec::Unit(4, 0);                 // lam1
    basis.col(1) = Vec::Unit(4, 1) / kTwoPiI;       // lam2 / 2 pi i
    basis.col(2) = kTwoPiI * Vec::Unit(4, 2);       // 2 pi i lam3
    basis.col(3) = Vec::Unit(4, 3);                 // lam4
    rep.osc_basis[0] = basis;
    return rep;
}

ZeroModeRep rep_example_62(const ModuleSpec& spec) {
    // basis order: alpha1, delta, Lambda0
    const double s2 = std::sqrt(2.0);
    ZeroModeRep rep;
    rep.poly_vars.push_back({"x_{1,0}", spec.max_degree, spec.exp_window, cplx(s2, 0.0)});
    rep.q_vars.push_back({"q", spec.charge_window});
    rep.h0_basis = Mat::Identity(3, 3);
    ZeroModeDescriptor da, dd, dl;
    da.terms.push_back({ZeroModeTerm::DerivX, 0, cplx(-s2, 0.0)});
    dd.terms.push_back({ZeroModeTerm::Euler, 0, cplx(1.0, 0.0)});
    dl.terms.push_back({ZeroModeTerm::MultX, 0, -s2 / kTwoPiI});
    rep.h0_ops = {da, dd, dl};
    rep.u_gen.resize(3);
    rep.u_gen[0] = UDescriptor{{UStep::Scalar, 0, 0, cplx(0.0, -1.0)},
                               {UStep::PhaseEuler, 0, 0, cplx(0, kPi / 3.0)},
                               {UStep::ExpMultX, 0, -1, 0.0}};
    rep.u_gen[1] = UDescriptor{{UStep::PhaseEuler, 0, 0, cplx(0, kPi)},
                               {UStep::ShiftX, 0, 0, kTwoPiI / s2}};
    rep.u_gen[2] = UDescriptor{{UStep::MultQ, 0, 1, 0.0}};
    Mat basis(3, 3);
    basis.col(0) = -kTwoPiI / s2 * Vec::Unit(3, 2);  // -(2 pi i / sqrt2) Lambda0
    basis.col(1) = Vec::Unit(3, 0) / s2;             // alpha1 / sqrt2
    basis.col(2) = -s2 / kTwoPiI * Vec::Unit(3, 1);  // -(sqrt2 / 2 pi i) delta
    rep.osc_basis[0] = basis;
    return rep;
}

ZeroModeRep rep_untwisted(const Session& session, const ModuleSpec& spec) {
    const int d = session.lattice.rank;
    ZeroModeRep rep;
    rep.h0_basis = Mat::Identity(d, d);
    for (int i = 0; i < d; ++i)
        rep.q_vars.push_back({"q" + std::to_string(i + 1), spec.charge_window});
    for (int i = 0; i < d; ++i) {
        ZeroModeDescriptor desc;
        for (int j = 0; j < d; ++j) {
            if (session.lattice.gram(i, j) == 0) continue;
            desc.terms.push_back({ZeroModeTerm::Euler, j,
                                  cplx(double(session.lattice.gram(i, j)), 0.0)});
        }
        rep.h0_ops.push_back(desc);
    }
    rep.u_gen.resize(size_t(d));
    for (int i = 0; i < d; ++i) {
        UDescriptor steps;
        for (int j = 0; j < d; ++j)
            if (session.eps.table(i, j) == -1)
                steps.push_back({UStep::PhaseEuler, j, 0, cplx(0, kPi)});
        steps.push_back({UStep::MultQ, i, 1, 0.0});
        rep.u_gen[size_t(i)] = steps;
    }
    return rep;
}

}  // namespace

ZeroModeRep make_zero_mode_rep(const Session& session, const ModuleSpec& spec) {
    if (spec.custom_rep) return *spec.custom_rep;
    std::string preset = spec.preset;
    if (preset.empty()) {
        bool phi_trivial =
            session.phi.matrix ==
            IMat(IMat::Identity(session.lattice.rank, session.lattice.rank));
        preset = phi_trivial ? "untwisted" : "polarization";
    }
    if (preset == "example-6.1") {
        if (session.lattice.rank != 4)
            throw BadInput("example-6.1 preset needs a rank-4 lattice");
        return rep_example_61(spec);
    }
    if (preset == "example-6.2") {
        if (session.lattice.rank != 3)
            throw BadInput("example-6.2 preset needs a rank-3 lattice");
        return rep_example_62(spec);
    }
    if (preset == "untwisted") return rep_untwisted(session, spec);
    if (preset == "polarization") return polarization_rep(session.jd);
    throw BadInput("unknown module preset '" + preset + "'");
}

FockModule make_fock(const Session& session, const ModuleSpec& spec) {
    FockConfig cfg;
    cfg.cutoff = spec.cutoff;
    cfg.max_states = spec.max_states;
    cfg.zeta_order = spec.zeta_order;
    return FockModule(session.jd, session.eps, make_zero_mode_rep(session, spec),
                      cfg);
}

std::vector<CanonicalBlock> canonical_blocks_for(const Session& session,
                                                 const ModuleSpec& spec) {
    std::string preset = spec.preset;
    if (preset == "example-6.1") {
        CanonicalBlock blk;
        blk.type = 1;
        blk.alpha0 = 0.0;
        blk.v = {Vec(Vec::Unit(4, 0)), Vec(Vec::Unit(4, 1) / kTwoPiI),
                 Vec(kTwoPiI * Vec::Unit(4, 2)), Vec(Vec::Unit(4, 3))};
        return {blk};
    }
    if (preset == "example-6.2") {
        const double s2 = std::sqrt(2.0);
        CanonicalBlock blk;
        blk.type = 2;
        blk.alpha0 = 0.0;
        blk.v = {Vec(-kTwoPiI / s2 * Vec::Unit(3, 2)),
                 Vec(Vec::Unit(3, 0) / s2),
                 Vec(-s2 / kTwoPiI * Vec::Unit(3, 1))};
        return {blk};
    }
    bool phi_trivial =
        session.phi.matrix ==
        IMat(IMat::Identity(session.lattice.rank, session.lattice.rank));
    if (preset == "untwisted" || (preset.empty() && phi_trivial))
        return canonical_blocks_semisimple(session.lattice);
    throw UnsupportedBlockStructure(
        "no canonical block data for preset '" + preset + "'");
}

std::string example_61_json() {
    return R"({
  "rank": 4,
  "gram": [[0,0,0,1],[0,0,1,0],[0,1,0,0],[1,0,0,0]],
  "phi":  [[1,0,0,0],[-1,1,0,0],[0,0,1,0],[0,0,1,1]],
  "labels": ["lam1","lam2","lam3","lam4"],
  "epsilon": [[1,1,1,1],[1,1,1,1],[1,-1,1,1],[-1,1,1,1]],
  "module": { "preset": "example-6.1", "cutoff": 3,
              "windows": { "max_degree": 4, "exp_window": 2, "charge_window": 2 } }
})";
}

std::string example_62_json() {
    return R"({
  "rank": 3,
  "gram": [[2,0,0],[0,0,1],[0,1,0]],
  "phi":  [[1,0,1],[-2,1,-1],[0,0,1]],
  "labels": ["alpha1","delta","Lambda0"],
  "epsilon": [[-1,1,1],[1,1,-1],[1,1,1]],
  "eta": [1,1,-1],
  "module": { "preset": "example-6.2", "cutoff": 3,
              "windows": { "max_degree": 4, "exp_window": 2, "charge_window": 2 } }
})";
}

std::string hyperbolic_rank2_json() {
    return R"({
  "rank": 2,
  "gram": [[0,1],[1,0]],
  "phi":  [[1,0],[0,1]],
  "labels": ["e1","e2"],
  "module": { "preset": "untwisted", "cutoff": 3,
              "windows": { "charge_window": 2 } }
})";
}

}  // namespace twistlat
