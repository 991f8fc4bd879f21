// SPDX-License-Identifier: Apache-2.0

#include "mssteer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "mssteer/errors.hpp"
#include "mssteer/rng.hpp"

namespace mssteer {

void SynthConfig::validate() const {
    if (!(xl_threshold > 0.0)) throw config_error("xl_threshold must be > 0");
    if (!(hdx_protection_floor > 0.0)) throw config_error("hdx_protection_floor must be > 0");
    if (xl_residue_types.empty()) throw config_error("xl_residue_types must be non-empty");
    if (noise.n_false_constraints < 0)
        throw config_error("n_false_constraints must be >= 0");
    if (noise.perturbation < 0.0) throw config_error("perturbation must be >= 0");
    if (!(sasa_probe >= 0.0)) throw config_error("sasa_probe must be >= 0");
    if (sasa_points < 92) throw config_error("sasa_points must be >= 92");
}

namespace {

struct CandidateSite {
    ResidueRef ref;
    Vec3 ca;
    std::size_t chain_ordinal;
};

std::vector<CandidateSite> candidate_sites(const Structure& s, const SynthConfig& cfg) {
    std::vector<CandidateSite> out;
    for (std::size_t c = 0; c < s.chains.size(); ++c) {
        for (const Residue& r : s.chains[c].residues) {
            if (std::find(cfg.xl_residue_types.begin(), cfg.xl_residue_types.end(),
                          r.amino_acid) == cfg.xl_residue_types.end())
                continue;
            const Atom* ca = r.find_atom("CA");
            if (!ca) continue;
            out.push_back({{s.chains[c].chain_id, r.seq_number}, ca->position, c});
        }
    }
    return out;
}

}  // namespace

std::vector<XlPositive> simulate_crosslinks(const Structure& truth, const SynthConfig& cfg) {
    cfg.validate();
    const std::vector<CandidateSite> sites = candidate_sites(truth, cfg);
    std::vector<XlPositive> out;
    for (std::size_t a = 0; a < sites.size(); ++a) {
        for (std::size_t b = a + 1; b < sites.size(); ++b) {
            if (!cfg.include_intra_chain && sites[a].chain_ordinal == sites[b].chain_ordinal)
                continue;
            if (distance(sites[a].ca, sites[b].ca) <= cfg.xl_threshold)
                out.push_back(XlPositive{sites[a].ref, sites[b].ref, 0.0, cfg.xl_threshold});
        }
    }
    return out;
}

std::vector<XlNegative> simulate_negative_links(const Structure& truth_state_a,
                                                const Structure& truth_state_b,
                                                const SynthConfig& cfg) {
    cfg.validate();
    StructureIndex idx_a(truth_state_a);
    const std::vector<CandidateSite> sites = candidate_sites(truth_state_b, cfg);
    const std::vector<Vec3> coords_a = truth_state_a.coordinates();

    auto ca_in_a = [&](const ResidueRef& ref) -> Vec3 {
        try {
            return coords_a[static_cast<std::size_t>(idx_a.ca_flat_index(ref))];
        } catch (const resolution_error&) {
            throw correspondence_error("residue numbering mismatch between states: " +
                                       to_string(ref) + " is missing from state a");
        }
    };

    std::vector<XlNegative> out;
    for (std::size_t a = 0; a < sites.size(); ++a) {
        for (std::size_t b = a + 1; b < sites.size(); ++b) {
            if (!cfg.include_intra_chain && sites[a].chain_ordinal == sites[b].chain_ordinal)
                continue;
            if (distance(sites[a].ca, sites[b].ca) > cfg.xl_threshold) continue;
            // Linked in b; only a differential absence in a makes it a bound.
            const double d_a = distance(ca_in_a(sites[a].ref), ca_in_a(sites[b].ref));
            if (d_a > cfg.xl_threshold)
                out.push_back(XlNegative{sites[a].ref, sites[b].ref, cfg.xl_threshold});
        }
    }
    return out;
}

namespace {

std::string nearest_other_chain(const Structure& complex_state, const StructureIndex& idx,
                                const ResidueRef& ref) {
    const Residue& res = idx.residue(ref);
    const Atom* ca = res.find_atom("CA");
    if (!ca) throw resolution_error("residue " + to_string(ref) + " has no CA atom");
    std::string best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Chain& chain : complex_state.chains) {
        if (chain.chain_id == ref.chain_id) continue;
        for (const Residue& r : chain.residues) {
            const Atom* other = r.find_atom("CA");
            if (!other) continue;
            const double d = distance(ca->position, other->position);
            if (d < best_d) {
                best_d = d;
                best = chain.chain_id;
            }
        }
    }
    if (best.empty())
        throw config_error("complex must contain a second chain with CA atoms for contact "
                           "constraints");
    return best;
}

}  // namespace

ConstraintSet simulate_hdx(const std::vector<Structure>& mono, const Structure& complex_state,
                           const SynthConfig& cfg) {
    cfg.validate();
    const DeltaRsaReport report = delta_rsa(mono, complex_state, cfg.sasa_probe, cfg.sasa_points);
    StructureIndex idx(complex_state);
    ConstraintSet out;
    for (const DeltaRsaRow& row : report.rows) {
        if (!(row.delta >= cfg.hdx_protection_floor)) continue;
        const double delta = std::min(1.0, row.delta);
        const std::string partner = nearest_other_chain(complex_state, idx, row.ref);
        out.items.push_back(HdxProxy{row.ref, partner, delta});
        out.items.push_back(HdxBurial{row.ref, delta});
    }
    return out;
}

InjectReport inject_noise(const ConstraintSet& constraints, const Structure& truth,
                          const SynthConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    InjectReport report;
    report.requested = cfg.noise.n_false_constraints;
    report.constraints = constraints;
    if (report.constraints.provenance.empty())
        report.constraints.provenance.assign(report.constraints.items.size(), "planted");

    if (cfg.noise.n_false_constraints == 0) return report;

    // Pairs the truth breaks by a comfortable margin, so a model that matches
    // the truth can never satisfy them by accident.
    const double min_distance = cfg.xl_threshold + 10.0 + cfg.noise.perturbation;
    const std::vector<CandidateSite> sites = candidate_sites(truth, cfg);
    std::vector<std::pair<ResidueRef, ResidueRef>> violating;
    for (std::size_t a = 0; a < sites.size(); ++a) {
        for (std::size_t b = a + 1; b < sites.size(); ++b) {
            if (!cfg.include_intra_chain && sites[a].chain_ordinal == sites[b].chain_ordinal)
                continue;
            if (distance(sites[a].ca, sites[b].ca) >= min_distance)
                violating.emplace_back(sites[a].ref, sites[b].ref);
        }
    }

    std::mt19937_64 rng(seed);
    const std::size_t n_add =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.noise.n_false_constraints),
                              violating.size());
    for (std::size_t k = 0; k < n_add; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng() % (violating.size() - k));
        std::swap(violating[k], violating[j]);
    }
    for (std::size_t k = 0; k < n_add; ++k) {
        report.constraints.items.push_back(
            XlPositive{violating[k].first, violating[k].second, 0.0, cfg.xl_threshold});
        report.constraints.provenance.push_back("false");
        ++report.added;
    }
    return report;
}

ConstraintSet combine_simulated(const std::vector<XlPositive>& xl_pos,
                                const std::vector<XlNegative>& xl_neg,
                                const ConstraintSet& hdx) {
    ConstraintSet out;
    for (const XlPositive& c : xl_pos) out.items.push_back(c);
    for (const XlNegative& c : xl_neg) out.items.push_back(c);
    for (const Constraint& c : hdx.items) out.items.push_back(c);
    out.provenance.assign(out.items.size(), "planted");
    return out;
}

}  // namespace mssteer
