#pragma once

#include <optional>
#include <string>

#include "twistlat/fock.hpp"
#include "twistlat/group.hpp"
#include "twistlat/lattice.hpp"

namespace twistlat {

struct ModuleSpec {
    std::string preset;  // example-6.1 | example-6.2 | untwisted | polarization
    double cutoff = 3.0;
    int max_degree = 4;
    int exp_window = 2;
    int charge_window = 2;
    int zeta_order = 4;
    long max_states = 400000;
    std::optional<ZeroModeRep> custom_rep;  // explicit descriptor
};

struct InputDocument {
    Lattice lattice;
    LatticeAutomorphism phi;
    std::optional<IMat> epsilon_table;  // alternative cocycle representative
    std::optional<IVec> eta_signs;      // pins the compatible sign map
    ModuleSpec module;
};

InputDocument parse_input(const std::string& json_text);
InputDocument load_input(const std::string& path);

// Everything derived from the lattice data.
struct Session {
    Lattice lattice;
    LatticeAutomorphism phi;
    Cocycle eps;
    EtaMap eta;
    JordanData jd;
    ModuleSpec module;
};

Session build_session(const InputDocument& doc, Rng& rng);

ZeroModeRep make_zero_mode_rep(const Session& session, const ModuleSpec& spec);
FockModule make_fock(const Session& session, const ModuleSpec& spec);
std::vector<CanonicalBlock> canonical_blocks_for(const Session& session,
                                                 const ModuleSpec& spec);

// Fixed example documents (the two worked lattices and a degeneration case).
std::string example_61_json();
std::string example_62_json();
std::string hyperbolic_rank2_json();

}  // namespace twistlat
