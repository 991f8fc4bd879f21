// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mssteer/constraints.hpp"
#include "mssteer/geometry.hpp"

namespace mssteer {

/// One normalized cross-link intensity observation under one condition.
struct XlMeasurement {
    ResidueRef residue_i;
    ResidueRef residue_j;
    std::string condition;
    double intensity = 0.0;  // normalized, >= 0
    double linker_max = 30.0;
};

/// One peptide-level uptake observation.
struct HdxPeptide {
    std::string chain;
    int start = 0;  // inclusive residue numbers
    int end = 0;
    std::string state;   // e.g. apo / binary / ternary
    double uptake = 0.0; // fractional, in [0,1]
    double sd = 0.0;
};

struct XlDeriveOptions {
    double enrich_ratio = 3.0;  // must be > 1
    /// Overrides the per-measurement linker length when > 0.
    double linker_max = 0.0;
};

/// Compares intensities between two conditions and emits distance bounds:
/// enriched in state_a -> upper bound (link present), enriched in state_b ->
/// lower bound (link lost in a). Pairs without signal are dropped. Missing
/// observations count as intensity 0; zero denominators read as infinite
/// enrichment.
ConstraintSet derive_xl_constraints(const std::vector<XlMeasurement>& measurements,
                                    const std::string& state_a, const std::string& state_b,
                                    const XlDeriveOptions& opts = {});

/// Splits peptides into (kept, excluded): excluded iff sd > 2.5 x mean sd of
/// the peptide's own state group (strict). Order is preserved.
std::pair<std::vector<HdxPeptide>, std::vector<HdxPeptide>> filter_peptides(
    const std::vector<HdxPeptide>& peptides);

using ResidueKey = std::pair<std::string, int>;  // chain id, seq number

struct UptakeEntry {
    double uptake = 0.0;
    int coverage = 0;  // number of contributing peptides
};

/// Per-residue uptake, weighted mean over covering peptides with weight
/// 1/length. Residues without coverage are absent.
struct ResidueUptake {
    std::map<ResidueKey, UptakeEntry> residues;

    const UptakeEntry* find(const std::string& chain, int seq) const;
};

ResidueUptake residue_uptake(const std::vector<HdxPeptide>& kept);

/// Same, grouped by state label.
std::map<std::string, ResidueUptake> residue_uptake_by_state(
    const std::vector<HdxPeptide>& kept);

struct ProtectionOptions {
    double threshold = 0.05;  // protection must exceed this (strict)
    /// Chain of the protected residue -> partner chain for the contact proxy.
    std::map<std::string, std::string> partner_of;
};

/// Builds the partner mapping when it is unambiguous (exactly two chains);
/// throws config_error otherwise.
std::map<std::string, std::string> infer_partners(const std::vector<std::string>& chain_ids);

/// protection(r) = uptake_reference(r) - uptake_complex(r) over residues
/// covered in both states; protected residues (> threshold) become one
/// HdxProxy and one HdxBurial constraint with delta = min(1, protection).
ConstraintSet classify_protection(const ResidueUptake& uptake_complex,
                                  const ResidueUptake& uptake_reference,
                                  const ProtectionOptions& opts);

/// Raw per-residue protection values over shared coverage (for logs/tests).
std::map<ResidueKey, double> protection_map(const ResidueUptake& uptake_complex,
                                            const ResidueUptake& uptake_reference);

// ---------------------------------------------------------------------------
// Iterative constraint subsetting.

struct SubsetSearchConfig {
    int n_subsets = 8;
    int subset_size = 0;  // 0 -> ceil(pool_size / 3)
    double keep_fraction = 0.25;
    int n_rounds = 3;
    std::uint64_t seed = 0;
    int n_workers = 1;  // concurrent generate/evaluate dispatch within a round

    void validate() const;
    int effective_subset_size(std::size_t pool_size) const;
    int keep_count() const;
};

/// Result of scoring one generated model against its subset.
struct SubsetOutcome {
    double satisfaction = 0.0;  // fraction in [0,1]
    /// Parallel to the subset's constraint list: which constraints the
    /// generated model actually satisfied. May be empty on failure.
    std::vector<char> satisfied;
};

/// Runs guided generation restricted to `subset`; must be deterministic in
/// `seed`.
using GenerateFn = std::function<Structure(const ConstraintSet& subset, std::uint64_t seed)>;
/// Scores a generated model against the subset it was steered with.
using EvaluateFn = std::function<SubsetOutcome(const Structure& model, const ConstraintSet& subset)>;

struct SubsetRoundLog {
    int round = 0;
    std::vector<std::vector<int>> subsets;  // pool indices per subset
    std::vector<double> scores;             // parallel to subsets
    std::vector<char> failed;               // callback failure per subset
    std::vector<int> kept;                  // kept subset positions
    std::vector<int> union_after;           // surviving union after the round
};

struct SubsetSearchState {
    std::vector<SubsetRoundLog> rounds;
    std::vector<int> surviving_union;  // final pool indices, sorted
};

/// Generate-evaluate-recombine search over constraint subsets. Each round
/// samples n_subsets subsets (round 1 from the whole pool, later rounds from
/// the surviving union plus fresh pool draws), keeps the top keep_fraction by
/// satisfaction, and accumulates into the union the constraints that kept
/// subsets' models actually satisfied. A throwing callback scores its subset
/// 0 and the search continues.
std::pair<ConstraintSet, SubsetSearchState> subset_search(const ConstraintSet& pool,
                                                          const GenerateFn& generate,
                                                          const EvaluateFn& evaluate,
                                                          const SubsetSearchConfig& cfg);

std::string search_log_to_json(const SubsetSearchState& state, const SubsetSearchConfig& cfg);

// ---------------------------------------------------------------------------
// CSV input tables.

/// Header: chain_i,res_i,chain_j,res_j,condition,intensity,linker_max
std::vector<XlMeasurement> read_xl_csv(std::istream& in);
std::vector<XlMeasurement> read_xl_csv_file(const std::string& path);

/// Header: chain,start,end,state,uptake,sd
std::vector<HdxPeptide> read_hdx_csv(std::istream& in);
std::vector<HdxPeptide> read_hdx_csv_file(const std::string& path);

}  // namespace mssteer
