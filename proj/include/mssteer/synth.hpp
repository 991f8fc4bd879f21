// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mssteer/constraints.hpp"
#include "mssteer/geometry.hpp"

namespace mssteer {

struct NoiseConfig {
    int n_false_constraints = 0;
    /// Extra slack added to the 10 A violation margin of injected pairs.
    double perturbation = 0.0;
};

struct SynthConfig {
    std::vector<std::string> xl_residue_types = {"LYS"};
    double xl_threshold = 30.0;         // Angstrom, CA-CA
    double hdx_protection_floor = 0.05; // minimum delta RSA that counts as protected
    bool include_intra_chain = false;
    double sasa_probe = 1.4;
    int sasa_points = 960;
    NoiseConfig noise;

    void validate() const;
};

/// All residue pairs of the configured types within the distance threshold
/// (inter-chain only unless include_intra_chain). Every emitted constraint is
/// satisfied by `truth` by construction.
std::vector<XlPositive> simulate_crosslinks(const Structure& truth, const SynthConfig& cfg);

/// Pairs linked in state b but beyond the threshold in state a: lower-bound
/// constraints for state a. Residue numbering must match between the states.
std::vector<XlNegative> simulate_negative_links(const Structure& truth_state_a,
                                                const Structure& truth_state_b,
                                                const SynthConfig& cfg);

/// Residues whose relative SASA drops by at least hdx_protection_floor from
/// the isolated chains to the complex, as burial + partner-contact
/// constraints with delta = min(1, delta RSA). The partner chain is the
/// nearest other chain by CA contact in the complex.
ConstraintSet simulate_hdx(const std::vector<Structure>& mono, const Structure& complex_state,
                           const SynthConfig& cfg);

struct InjectReport {
    ConstraintSet constraints;
    int requested = 0;
    int added = 0;  // may fall short when too few violating pairs exist
};

/// Appends n_false_constraints upper-bound constraints that `truth` violates
/// by at least 10 A (plus noise.perturbation). Existing constraints are
/// labeled "planted", injected ones "false", in the provenance field.
InjectReport inject_noise(const ConstraintSet& constraints, const Structure& truth,
                          const SynthConfig& cfg, std::uint64_t seed);

/// One constraint set with "planted" provenance on every item.
ConstraintSet combine_simulated(const std::vector<XlPositive>& xl_pos,
                                const std::vector<XlNegative>& xl_neg,
                                const ConstraintSet& hdx);

}  // namespace mssteer
