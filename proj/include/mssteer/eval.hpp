// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mssteer/constraints.hpp"
#include "mssteer/geometry.hpp"

namespace mssteer {

struct EvalOptions {
    double hdx_delta_threshold = 0.05;  // delta RSA that counts as protected
    double sasa_probe = 1.4;
    int sasa_points = 960;
};

struct ConstraintCheck {
    int constraint_index = 0;  // position in the evaluated set
    ConstraintFamily family = ConstraintFamily::xl_pos;
    bool pass = false;
    /// CA-CA distance for cross-links, delta RSA for protection constraints.
    double measured = 0.0;
};

struct SatisfactionReport {
    std::vector<ConstraintCheck> checks;
    std::optional<double> xl_pct;   // percent over all cross-link constraints
    std::optional<double> hdx_pct;  // percent over all protection constraints
    /// Mean of the family percentages that exist; absent families are not 0.
    std::optional<double> overall;

    /// Per-constraint pass flags aligned to a set of `set_size` constraints.
    std::vector<char> satisfied_flags(std::size_t set_size) const;
};

/// Cross-link satisfaction: upper bounds pass at distance <= d_max, lower
/// bounds pass strictly above d_min. Unresolvable references raise one
/// resolution_error naming every offending constraint.
SatisfactionReport xl_satisfaction(const Structure& model, const ConstraintSet& constraints);

/// Protection satisfaction: delta RSA between the model's isolated chains and
/// the intact model, pass at delta >= threshold.
SatisfactionReport hdx_satisfaction(const Structure& model, const ConstraintSet& constraints,
                                    const EvalOptions& opts = {});

/// Both families combined into one report over the full set.
SatisfactionReport satisfaction(const Structure& model, const ConstraintSet& constraints,
                                const EvalOptions& opts = {});

// ---------------------------------------------------------------------------
// Reference-based accuracy.

struct AccuracyReport {
    double lrmsd = 0.0;
    double irmsd = 0.0;
    std::optional<double> external_dockq;  // supplied, never computed here
};

/// RMSD over the reference-defined interface (any CA within interface_cutoff
/// of a CA in another chain) after superposing on those same CAs.
double interface_rmsd(const Structure& model, const Structure& reference,
                      double interface_cutoff = 10.0);

/// RMSD over ligand-chain CAs after superposing on receptor-chain CAs only.
double ligand_rmsd(const Structure& model, const Structure& reference,
                   const std::string& receptor_chain, const std::string& ligand_chain);

AccuracyReport accuracy(const Structure& model, const Structure& reference,
                        const std::string& receptor_chain, const std::string& ligand_chain,
                        double interface_cutoff = 10.0);

// ---------------------------------------------------------------------------
// Ranking.

struct RankedModel {
    int input_index = 0;
    SatisfactionReport report;
    std::optional<double> external_score;
};

struct FamilyStats {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation; 0 for a single model
};

struct RankingResult {
    std::vector<RankedModel> ordered;  // best first
    int best_input_index = 0;
    std::optional<FamilyStats> xl;
    std::optional<FamilyStats> hdx;
    std::optional<FamilyStats> overall;
};

/// Sorts by overall satisfaction descending; ties fall to the external score
/// (when given), then to input order. external_scores must be empty or
/// parallel to models.
RankingResult rank_models(const std::vector<Structure>& models, const ConstraintSet& constraints,
                          const std::vector<double>& external_scores = {},
                          const EvalOptions& opts = {});

// ---------------------------------------------------------------------------
// Guided vs unguided comparison.

struct CompareRow {
    std::string origin;  // "guided" or "unguided"
    int index_within_origin = 0;
    SatisfactionReport report;
};

struct CompareTable {
    std::vector<CompareRow> rows;  // sorted by overall satisfaction, best first
};

/// Merged satisfaction ranking of two model sets; ties keep the interleaved
/// input order. Throws config_error when the constraint set is empty.
CompareTable posthoc_compare(const std::vector<Structure>& guided,
                             const std::vector<Structure>& unguided,
                             const ConstraintSet& constraints, const EvalOptions& opts = {});

}  // namespace mssteer
