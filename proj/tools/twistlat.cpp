#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "twistlat/io.hpp"
#include "twistlat/verify.hpp"

using namespace twistlat;
using nlohmann::json;

namespace {

json cplx_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

json mat_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(cplx_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json record_json(const CheckRecord& r) {
    return json{{"name", r.name},
                {"identity", r.identity},
                {"max_residual", r.residual},
                {"tolerance", r.tolerance},
                {"pass", r.pass}};
}

json suite_json(const SuiteReport& s) {
    json recs = json::array();
    for (const auto& r : s.records) recs.push_back(record_json(r));
    return json{{"suite", s.suite}, {"records", recs}, {"pass", s.pass()}};
}

IVec parse_coords(const std::string& text, int rank) {
    IVec v = IVec::Zero(rank);
    std::stringstream ss(text);
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= rank) throw BadInput("too many coordinates in '" + text + "'");
        v[i++] = std::stoi(tok);
    }
    if (i != rank) throw BadInput("expected " + std::to_string(rank) +
                                  " coordinates in '" + text + "'");
    return v;
}

void emit(const json& out, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << out.dump(2) << std::endl;
    } else {
        std::ofstream f(out_path);
        f << out.dump(2) << std::endl;
    }
}

int thread_cap() {
    const char* env = std::getenv("TWISTLAT_THREADS");
    if (!env) return 0;
    return std::atoi(env);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"twisted logarithmic modules of lattice vertex algebras"};
    app.require_subcommand(0, 1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string input_path, out_path, suite = "all";
    std::string lambda_text, mu_text;
    double cutoff = 0.0, tol = 0.0;
    unsigned long long seed = 12345;
    int order = 3;

    app.add_option("--input", input_path, "input lattice document (JSON)");
    app.add_option("--out", out_path, "write the JSON report here");
    app.add_option("--seed", seed, "seed for randomized sampling");
    app.add_option("--tol", tol, "tolerance override (reported only)");

    auto* cmd_decompose = app.add_subcommand("decompose", "multiplicative decomposition of phi");
    auto* cmd_cocycle = app.add_subcommand("cocycle", "construct and verify the sign cocycle");
    auto* cmd_constants = app.add_subcommand("constants", "structure constants for a vector pair");
    cmd_constants->add_option("--lambda", lambda_text, "comma-separated integer coordinates")->required();
    cmd_constants->add_option("--mu", mu_text, "comma-separated integer coordinates")->required();
    auto* cmd_group = app.add_subcommand("group-check", "group invariant battery");
    auto* cmd_fock = app.add_subcommand("fock-build", "build the truncated module");
    cmd_fock->add_option("--cutoff", cutoff, "weight cutoff override");
    auto* cmd_vertexop = app.add_subcommand("vertexop", "dump a vertex operator's coefficient table");
    cmd_vertexop->add_option("--lambda", lambda_text, "comma-separated integer coordinates")->required();
    cmd_vertexop->add_option("--order", order, "exponent bound for the dump");
    auto* cmd_verify = app.add_subcommand("verify", "run identity suites");
    cmd_verify->add_option("--suite", suite,
                           "one of specfun|lattice|decomp|structure|group|fock|vertexop|all");
    auto* cmd_selftest = app.add_subcommand("specfun-selftest", "special-function identity suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help() << std::endl;
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    json out;
    out["seed"] = seed;
    out["environment"] = {{"thread_cap", thread_cap()}};
    bool pass = true;

    try {
        Rng rng(seed);

        if (cmd_selftest->parsed()) {
            out["command"] = "specfun-selftest";
            SuiteReport rep = run_specfun_suite(rng);
            out["suites"] = json::array({suite_json(rep)});
            pass = rep.pass();
        } else {
            if (input_path.empty())
                throw BadInput("--input is required for this command");
            InputDocument doc = load_input(input_path);
            Session session = build_session(doc, rng);
            if (cutoff > 0) session.module.cutoff = cutoff;

            if (cmd_decompose->parsed()) {
                out["command"] = "decompose";
                const auto& jd = session.jd;
                out["sigma"] = mat_json(jd.sigma);
                out["nilpotent"] = mat_json(jd.nilp);
                out["nilpotency_index"] = jd.nilpotency_index;
                json blocks = json::array();
                for (const auto& b : jd.blocks)
                    blocks.push_back(json{
                        {"eigenvalue", cplx_json(b.eigenvalue)},
                        {"alpha0", cplx_json(b.alpha0)},
                        {"alpha0_prime", cplx_json(b.alpha0_prime)},
                        {"sign_class", b.sign_class == SignClass::Zero
                                           ? "zero"
                                           : (b.sign_class == SignClass::Plus
                                                  ? "plus"
                                                  : "minus")}});
                out["blocks"] = blocks;
            } else if (cmd_cocycle->parsed()) {
                out["command"] = "cocycle";
                json table = json::array();
                for (int i = 0; i < session.lattice.rank; ++i) {
                    json row = json::array();
                    for (int j = 0; j < session.lattice.rank; ++j)
                        row.push_back(session.eps.table(i, j));
                    table.push_back(row);
                }
                out["epsilon"] = table;
                CocycleReport cr = verify_epsilon(session.eps, session.lattice,
                                                  200, rng);
                out["trials"] = cr.trials;
                out["failures"] = cr.failures.size();
                pass = cr.pass();
            } else if (cmd_constants->parsed()) {
                out["command"] = "constants";
                IVec lam = parse_coords(lambda_text, session.lattice.rank);
                IVec mu = parse_coords(mu_text, session.lattice.rank);
                TwistConstants tc = twist_constants(session.jd, to_complex(lam));
                out["b"] = cplx_json(tc.b);
                json apoly = json::array();
                for (const auto& c : tc.a_poly) apoly.push_back(cplx_json(c));
                out["a_poly"] = apoly;
                out["c"] = cplx_json(tc.c);
                json targ = json::array();
                for (int i = 0; i < tc.tau_arg.size(); ++i)
                    targ.push_back(cplx_json(tc.tau_arg[i]));
                out["tau_argument"] = targ;
                PairConstants pc =
                    pair_constants(session.jd, session.lattice, lam, mu);
                out["B"] = cplx_json(pc.B);
                out["C"] = cplx_json(pc.C);
                cplx oracle = B_oracle(session.jd, to_complex(lam),
                                       to_complex(mu), 10000);
                out["B_oracle_residual"] =
                    std::abs(pc.B - oracle) / std::max(1.0, std::abs(pc.B));
            } else if (cmd_group->parsed()) {
                out["command"] = "group-check";
                SuiteReport rep = run_group_suite(session, rng);
                out["suites"] = json::array({suite_json(rep)});
                pass = rep.pass();
            } else if (cmd_fock->parsed()) {
                out["command"] = "fock-build";
                FockModule fm = make_fock(session, session.module);
                out["basis_size"] = fm.dim();
                json hist = json::object();
                for (const auto& [w, n] : fm.weight_histogram())
                    hist[std::to_string(w)] = n;
                out["weight_histogram"] = hist;
            } else if (cmd_vertexop->parsed()) {
                out["command"] = "vertexop";
                IVec lam = parse_coords(lambda_text, session.lattice.rank);
                ModuleSpec spec = session.module;
                FockModule fm = make_fock(session, spec);
                FieldBounds fb{double(order), spec.zeta_order};
                FieldAlgebra alg(fm, session.lattice, session.eps, session.eta,
                                 fb);
                LogField y = alg.vertex_operator(lam);
                json table = json::array();
                for (const auto& [k, op] : y.coeffs) {
                    double norm = 0.0;
                    long entries = 0;
                    for (const auto& col : op.cols)
                        for (const auto& [r, v] : col) {
                            norm = std::max(norm, std::abs(v));
                            ++entries;
                        }
                    table.push_back(json{
                        {"exponent", cplx_json(alg.key_exponent(k))},
                        {"zeta_degree", k.zeta},
                        {"max_entry", norm},
                        {"entries", entries}});
                }
                out["coefficients"] = table;
                out["basis_size"] = fm.dim();
            } else if (cmd_verify->parsed()) {
                out["command"] = "verify";
                out["suite"] = suite;
                std::vector<SuiteReport> reports;
                if (suite == "all") {
                    reports = run_all_suites(session, rng);
                } else if (suite == "specfun") {
                    reports.push_back(run_specfun_suite(rng));
                } else if (suite == "lattice") {
                    reports.push_back(run_lattice_suite(session, rng));
                } else if (suite == "decomp") {
                    reports.push_back(run_decomp_suite(session, rng));
                } else if (suite == "structure") {
                    reports.push_back(run_structure_suite(session, rng));
                } else if (suite == "group") {
                    reports.push_back(run_group_suite(session, rng));
                } else if (suite == "fock") {
                    reports.push_back(run_fock_suite(session, rng));
                } else if (suite == "vertexop") {
                    reports.push_back(run_vertexop_suite(session, rng));
                } else {
                    throw BadInput("unknown suite '" + suite + "'");
                }
                json suites = json::array();
                for (const auto& r : reports) {
                    suites.push_back(suite_json(r));
                    pass = pass && r.pass();
                }
                out["suites"] = suites;
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    }

    out["pass"] = pass;
    const auto t1 = std::chrono::steady_clock::now();
    out["timing_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    emit(out, out_path);
    return pass ? 0 : 1;
}
