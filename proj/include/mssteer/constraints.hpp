// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <variant>
#include <vector>

#include "mssteer/geometry.hpp"

namespace mssteer {

/// Distance upper bound between two residues (cross-link present).
struct XlPositive {
    ResidueRef i;
    ResidueRef j;
    double d_min = 0.0;
    double d_max = 30.0;
};

/// Distance lower bound (cross-link differentially absent).
struct XlNegative {
    ResidueRef i;
    ResidueRef j;
    double d_min = 30.0;
};

/// Protected residue must contact the partner chain within a protection-scaled
/// distance.
struct HdxProxy {
    ResidueRef residue;
    std::string partner_chain;
    double delta = 0.0;  // |protection| in [0,1]
};

/// Protected residue must be buried (low pseudo-SASA).
struct HdxBurial {
    ResidueRef residue;
    double delta = 0.0;
};

using Constraint = std::variant<XlPositive, XlNegative, HdxProxy, HdxBurial>;

enum class ConstraintFamily { xl_pos, xl_neg, hdx_proxy, hdx_burial };

inline constexpr std::size_t kFamilyCount = 4;

inline constexpr ConstraintFamily kAllFamilies[kFamilyCount] = {
    ConstraintFamily::xl_pos, ConstraintFamily::xl_neg, ConstraintFamily::hdx_proxy,
    ConstraintFamily::hdx_burial};

ConstraintFamily family_of(const Constraint& c);
const char* family_name(ConstraintFamily f);

struct ConstraintSet {
    std::vector<Constraint> items;
    /// Empty, or parallel to items; synthetic-data labels ("planted"/"false").
    std::vector<std::string> provenance;

    std::size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }
    bool has_family(ConstraintFamily f) const;
    std::size_t family_count(ConstraintFamily f) const;
    ConstraintSet subset(const std::vector<int>& indices) const;
    void append(const ConstraintSet& other);
    void validate() const;  // thresholds, delta range, d_min <= d_max
};

/// Versioned JSON document: {"format": "ms-steer/constraints/1", "constraints": [...]}.
std::string constraints_to_json(const ConstraintSet& set);
ConstraintSet constraints_from_json(const std::string& text);
ConstraintSet read_constraints_file(const std::string& path);
void write_constraints_file(const ConstraintSet& set, const std::string& path);

/// Provenance sidecar: {"format": "ms-steer/provenance/1", "labels": [...]}.
std::string provenance_to_json(const ConstraintSet& set);
void apply_provenance_json(ConstraintSet& set, const std::string& text);

}  // namespace mssteer
