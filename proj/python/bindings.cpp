#include <fstream>
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twistlat/io.hpp"
#include "twistlat/verify.hpp"
#include "twistlat/vertexop.hpp"

namespace py = pybind11;
using namespace twistlat;

namespace {

IVec to_ivec(const std::vector<int>& v) {
    IVec out(int(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out[int(i)] = v[i];
    return out;
}

py::dict record_dict(const CheckRecord& r) {
    py::dict d;
    d["name"] = r.name;
    d["identity"] = r.identity;
    d["max_residual"] = r.residual;
    d["tolerance"] = r.tolerance;
    d["pass"] = r.pass;
    return d;
}

py::dict suite_dict(const SuiteReport& s) {
    py::dict d;
    d["suite"] = s.suite;
    py::list recs;
    for (const auto& r : s.records) recs.append(record_dict(r));
    d["records"] = recs;
    d["pass"] = s.pass();
    return d;
}

class PySession {
public:
    PySession(const std::string& json_text, unsigned long long seed)
        : rng_(seed), session_(build_session(parse_input(json_text), rng_)) {}

    static PySession from_file(const std::string& path,
                               unsigned long long seed) {
        std::ifstream in(path);
        if (!in) throw BadInput("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return PySession(ss.str(), seed);
    }

    int rank() const { return session_.lattice.rank; }
    int nilpotency_index() const { return session_.jd.nilpotency_index; }

    std::vector<std::vector<cplx>> sigma() const { return mat(session_.jd.sigma); }
    std::vector<std::vector<cplx>> nilpotent() const { return mat(session_.jd.nilp); }

    std::vector<cplx> alpha0s() const {
        std::vector<cplx> out;
        for (const auto& b : session_.jd.blocks) out.push_back(b.alpha0);
        return out;
    }

    int epsilon(const std::vector<int>& lam, const std::vector<int>& mu) const {
        return session_.eps.eval(to_ivec(lam), to_ivec(mu));
    }
    int eta(const std::vector<int>& lam) const {
        return session_.eta.eval(to_ivec(lam));
    }

    py::dict constants(const std::vector<int>& lam,
                       const std::vector<int>& mu) const {
        IVec l = to_ivec(lam), m = to_ivec(mu);
        TwistConstants tc = twist_constants(session_.jd, to_complex(l));
        PairConstants pc = pair_constants(session_.jd, session_.lattice, l, m);
        py::dict d;
        d["b"] = tc.b;
        d["a_poly"] = tc.a_poly;
        d["c"] = tc.c;
        d["B"] = pc.B;
        d["C"] = pc.C;
        d["B_oracle_residual"] =
            std::abs(pc.B - B_oracle(session_.jd, to_complex(l), to_complex(m),
                                     10000)) /
            std::max(1.0, std::abs(pc.B));
        return d;
    }

    py::dict verify(const std::string& suite) {
        std::vector<SuiteReport> reports;
        if (suite == "all") {
            reports = run_all_suites(session_, rng_);
        } else if (suite == "specfun") {
            reports.push_back(run_specfun_suite(rng_));
        } else if (suite == "lattice") {
            reports.push_back(run_lattice_suite(session_, rng_));
        } else if (suite == "decomp") {
            reports.push_back(run_decomp_suite(session_, rng_));
        } else if (suite == "structure") {
            reports.push_back(run_structure_suite(session_, rng_));
        } else if (suite == "group") {
            reports.push_back(run_group_suite(session_, rng_));
        } else if (suite == "fock") {
            reports.push_back(run_fock_suite(session_, rng_));
        } else if (suite == "vertexop") {
            reports.push_back(run_vertexop_suite(session_, rng_));
        } else {
            throw BadInput("unknown suite '" + suite + "'");
        }
        py::dict out;
        py::list suites;
        bool pass = true;
        for (const auto& r : reports) {
            suites.append(suite_dict(r));
            pass = pass && r.pass();
        }
        out["suites"] = suites;
        out["pass"] = pass;
        return out;
    }

    py::dict fock_summary() const {
        FockModule fm = make_fock(session_, session_.module);
        py::dict d;
        d["basis_size"] = fm.dim();
        py::dict hist;
        for (const auto& [w, n] : fm.weight_histogram())
            hist[py::str(std::to_string(w))] = n;
        d["weight_histogram"] = hist;
        return d;
    }

private:
    static std::vector<std::vector<cplx>> mat(const Mat& m) {
        std::vector<std::vector<cplx>> out(size_t(m.rows()));
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) out[size_t(i)].push_back(m(i, j));
        return out;
    }

    Rng rng_;
    Session session_;
};

}  // namespace

PYBIND11_MODULE(_twistlat, m) {
    m.doc() = "twisted logarithmic modules of lattice vertex algebras";

    m.def("digamma", [](cplx a) { return digamma(a); });
    m.def("polygamma", [](int j, cplx a) { return polygamma(j, a); });
    m.def("lerch_phi",
          [](cplx z, cplx s, cplx a) { return lerch_phi(z, s, a); });
    m.def("lerch_reflect", [](cplx z, cplx a) { return lerch_reflect(z, a); });
    m.def("zeta", [](cplx s) { return zeta(s); });
    m.def("polylog", [](cplx s, cplx z) { return polylog(s, z); });

    m.def("example_61_json", &example_61_json);
    m.def("example_62_json", &example_62_json);
    m.def("hyperbolic_rank2_json", &hyperbolic_rank2_json);

    py::class_<PySession>(m, "Session")
        .def(py::init<const std::string&, unsigned long long>(),
             py::arg("json_text"), py::arg("seed") = 12345)
        .def_static("from_file", &PySession::from_file, py::arg("path"),
                    py::arg("seed") = 12345)
        .def_property_readonly("rank", &PySession::rank)
        .def_property_readonly("nilpotency_index", &PySession::nilpotency_index)
        .def("sigma", &PySession::sigma)
        .def("nilpotent", &PySession::nilpotent)
        .def("alpha0s", &PySession::alpha0s)
        .def("epsilon", &PySession::epsilon)
        .def("eta", &PySession::eta)
        .def("constants", &PySession::constants)
        .def("verify", &PySession::verify, py::arg("suite") = "all")
        .def("fock_summary", &PySession::fock_summary);

    py::register_exception<Error>(m, "TwistlatError");
}
