#pragma once

#include <string>
#include <vector>

#include "twistlat/io.hpp"
#include "twistlat/specfun.hpp"
#include "twistlat/vertexop.hpp"

namespace twistlat {

struct CheckRecord {
    std::string name;
    std::string identity;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckRecord> records;
    bool pass() const {
        for (const auto& r : records)
            if (!r.pass) return false;
        return true;
    }
};

CheckRecord to_record(const IdentityCheck& c);
CheckRecord to_record(const FieldCheck& c);

SuiteReport run_specfun_suite(Rng& rng);
SuiteReport run_lattice_suite(const Session& session, Rng& rng, int trials = 200);
SuiteReport run_decomp_suite(const Session& session, Rng& rng);
SuiteReport run_structure_suite(const Session& session, Rng& rng);
SuiteReport run_group_suite(const Session& session, Rng& rng,
                            int assoc_trials = 500, int pair_trials = 100);
SuiteReport run_fock_suite(const Session& session, Rng& rng);
SuiteReport run_vertexop_suite(const Session& session, Rng& rng);

std::vector<SuiteReport> run_all_suites(const Session& session, Rng& rng);

}  // namespace twistlat
