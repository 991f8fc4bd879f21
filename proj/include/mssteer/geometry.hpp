// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mssteer/errors.hpp"
#include "mssteer/vec3.hpp"

namespace mssteer {

struct Atom {
    std::string name;     // PDB atom name, e.g. "CA"
    std::string element;  // e.g. "C"
    Vec3 position;        // Angstrom
};

struct Residue {
    int seq_number = 0;
    std::string amino_acid;  // 3-letter code, "UNK" when unknown
    std::vector<Atom> atoms;

    const Atom* find_atom(const std::string& name) const;
    bool has_ca() const { return find_atom("CA") != nullptr; }
};

struct Chain {
    std::string chain_id;  // single token
    std::vector<Residue> residues;
};

/// Immutable-by-convention container for one model: chains -> residues -> atoms.
/// Residue seq numbers are strictly increasing within a chain and all
/// coordinates are finite (enforced by validate()).
struct Structure {
    std::vector<Chain> chains;

    std::size_t atom_count() const;
    std::size_t residue_count() const;
    const Chain* find_chain(const std::string& chain_id) const;

    /// Flattened coordinates in chain/residue/atom order.
    std::vector<Vec3> coordinates() const;
    /// Copy of this structure with coordinates replaced (same order as coordinates()).
    Structure with_coordinates(std::span<const Vec3> coords) const;

    /// One single-chain Structure per chain, in chain order.
    std::vector<Structure> split_chains() const;

    /// Throws parse_error on invariant violations (non-increasing seq numbers,
    /// non-finite coordinates).
    void validate() const;
};

struct ResidueRef {
    std::string chain_id;
    int seq_number = 0;
};

inline bool operator==(const ResidueRef& a, const ResidueRef& b) {
    return a.chain_id == b.chain_id && a.seq_number == b.seq_number;
}
std::string to_string(const ResidueRef& ref);

/// Resolves ResidueRefs and CA atoms against a fixed Structure. Flat atom
/// indices refer to Structure::coordinates() order.
class StructureIndex {
  public:
    explicit StructureIndex(const Structure& s);

    const Structure& structure() const { return *structure_; }
    const Residue& residue(const ResidueRef& ref) const;  // throws resolution_error
    int ca_flat_index(const ResidueRef& ref) const;       // throws resolution_error
    /// Flat CA indices of every CA-bearing residue, optionally restricted to one
    /// chain; each entry pairs the residue's global ordinal with its atom index.
    struct CaEntry {
        int residue_ordinal;
        int atom_index;
        ResidueRef ref;
    };
    const std::vector<CaEntry>& ca_entries() const { return ca_entries_; }
    std::vector<CaEntry> ca_entries_of_chain(const std::string& chain_id) const;

  private:
    const Structure* structure_;
    std::unordered_map<std::string, int> key_to_residue_;  // "chain:seq" -> ordinal
    std::vector<const Residue*> residues_;
    std::vector<int> ca_index_;  // per residue ordinal, -1 when absent
    std::vector<CaEntry> ca_entries_;
};

// ---------------------------------------------------------------------------
// PDB fixed-column subset: ATOM records, first model, single altloc.

Structure parse_structure(const std::string& text);
Structure read_pdb_file(const std::string& path);
void write_pdb(const Structure& s, std::ostream& out);
std::string to_pdb(const Structure& s);
void write_pdb_file(const Structure& s, const std::string& path);

// ---------------------------------------------------------------------------
// Distances and superposition.

double ca_distance(const Structure& s, const ResidueRef& a, const ResidueRef& b);

struct Superposition {
    std::array<std::array<double, 3>, 3> rotation;  // proper rotation, det +1
    Vec3 translation;
    double rmsd = 0.0;

    Vec3 apply(const Vec3& p) const;
};

/// Least-squares rigid superposition of `moving` onto `target` (paired points).
/// Throws degeneracy_error for fewer than 3 points or collinear input.
Superposition kabsch_superpose(std::span<const Vec3> moving, std::span<const Vec3> target);

// ---------------------------------------------------------------------------
// Solvent accessibility.

struct SasaProfile {
    std::vector<double> residue_sasa;  // Angstrom^2, Structure residue order
    std::vector<ResidueRef> refs;      // parallel to residue_sasa
    std::vector<std::string> amino_acids;
    double probe_radius = 1.4;
    int n_sphere_points = 960;
};

/// Per-residue solvent accessible surface area by sphere-point quadrature over
/// a deterministic Fibonacci lattice. Throws unknown_element_error when an
/// atom's element has no van der Waals radius.
SasaProfile shrake_rupley_sasa(const Structure& s, double probe_radius = 1.4,
                               int n_points = 960);

/// Van der Waals radius table backing shrake_rupley_sasa.
std::optional<double> vdw_radius(const std::string& element);

/// Absolute SASA divided by the residue type's theoretical maximum
/// (fixed 20-entry table). Unknown amino acids fall back to the table mean and
/// set *unknown_aa when provided. Never clamped; may exceed 1.
double relative_sasa(double sasa, const std::string& amino_acid, bool* unknown_aa = nullptr);

struct DeltaRsaRow {
    ResidueRef ref;
    std::string amino_acid;
    double rsa_mono = 0.0;
    double rsa_complex = 0.0;
    double delta = 0.0;  // rsa_mono - rsa_complex; positive = protected on binding
};

struct DeltaRsaReport {
    std::vector<DeltaRsaRow> rows;
    std::vector<ResidueRef> skipped;  // present in only one state
};

/// RSA difference between isolated-chain and complex states, matched by
/// chain id + seq number.
DeltaRsaReport delta_rsa(const std::vector<Structure>& mono, const Structure& complex_state,
                         double probe_radius = 1.4, int n_points = 960);

/// CSV report `chain,seq,aa,sasa,rsa` for one structure.
void write_sasa_csv(const SasaProfile& profile, std::ostream& out);

}  // namespace mssteer
