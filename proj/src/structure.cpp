// SPDX-License-Identifier: Apache-2.0

#include "mssteer/geometry.hpp"

#include <sstream>

namespace mssteer {

const Atom* Residue::find_atom(const std::string& name) const {
    for (const auto& a : atoms) {
        if (a.name == name) return &a;
    }
    return nullptr;
}

std::size_t Structure::atom_count() const {
    std::size_t n = 0;
    for (const auto& c : chains)
        for (const auto& r : c.residues) n += r.atoms.size();
    return n;
}

std::size_t Structure::residue_count() const {
    std::size_t n = 0;
    for (const auto& c : chains) n += c.residues.size();
    return n;
}

const Chain* Structure::find_chain(const std::string& chain_id) const {
    for (const auto& c : chains) {
        if (c.chain_id == chain_id) return &c;
    }
    return nullptr;
}

std::vector<Vec3> Structure::coordinates() const {
    std::vector<Vec3> out;
    out.reserve(atom_count());
    for (const auto& c : chains)
        for (const auto& r : c.residues)
            for (const auto& a : r.atoms) out.push_back(a.position);
    return out;
}

Structure Structure::with_coordinates(std::span<const Vec3> coords) const {
    if (coords.size() != atom_count())
        throw config_error("coordinate count mismatch: structure has " +
                           std::to_string(atom_count()) + " atoms, got " +
                           std::to_string(coords.size()));
    Structure out = *this;
    std::size_t i = 0;
    for (auto& c : out.chains)
        for (auto& r : c.residues)
            for (auto& a : r.atoms) a.position = coords[i++];
    return out;
}

std::vector<Structure> Structure::split_chains() const {
    std::vector<Structure> out;
    out.reserve(chains.size());
    for (const auto& c : chains) {
        Structure s;
        s.chains.push_back(c);
        out.push_back(std::move(s));
    }
    return out;
}

void Structure::validate() const {
    for (const auto& c : chains) {
        int prev_seq = 0;
        bool first = true;
        for (const auto& r : c.residues) {
            if (!first && r.seq_number <= prev_seq)
                throw parse_error("chain " + c.chain_id + ": residue seq numbers not strictly increasing at " +
                                  std::to_string(r.seq_number));
            prev_seq = r.seq_number;
            first = false;
            for (const auto& a : r.atoms) {
                if (!is_finite(a.position))
                    throw parse_error("non-finite coordinate in chain " + c.chain_id + " residue " +
                                      std::to_string(r.seq_number) + " atom " + a.name);
            }
        }
    }
}

std::string to_string(const ResidueRef& ref) {
    return ref.chain_id + ":" + std::to_string(ref.seq_number);
}

namespace {
std::string residue_key(const std::string& chain_id, int seq) {
    return chain_id + ":" + std::to_string(seq);
}
}  // namespace

StructureIndex::StructureIndex(const Structure& s) : structure_(&s) {
    int ordinal = 0;
    int flat_atom = 0;
    for (const auto& c : s.chains) {
        for (const auto& r : c.residues) {
            key_to_residue_[residue_key(c.chain_id, r.seq_number)] = ordinal;
            residues_.push_back(&r);
            int ca = -1;
            for (std::size_t k = 0; k < r.atoms.size(); ++k) {
                if (r.atoms[k].name == "CA" && ca < 0) ca = flat_atom + static_cast<int>(k);
            }
            ca_index_.push_back(ca);
            if (ca >= 0)
                ca_entries_.push_back({ordinal, ca, ResidueRef{c.chain_id, r.seq_number}});
            flat_atom += static_cast<int>(r.atoms.size());
            ++ordinal;
        }
    }
}

const Residue& StructureIndex::residue(const ResidueRef& ref) const {
    auto it = key_to_residue_.find(residue_key(ref.chain_id, ref.seq_number));
    if (it == key_to_residue_.end())
        throw resolution_error("residue " + to_string(ref) + " not found in structure");
    return *residues_[static_cast<std::size_t>(it->second)];
}

int StructureIndex::ca_flat_index(const ResidueRef& ref) const {
    auto it = key_to_residue_.find(residue_key(ref.chain_id, ref.seq_number));
    if (it == key_to_residue_.end())
        throw resolution_error("residue " + to_string(ref) + " not found in structure");
    int ca = ca_index_[static_cast<std::size_t>(it->second)];
    if (ca < 0) throw resolution_error("residue " + to_string(ref) + " has no CA atom");
    return ca;
}

std::vector<StructureIndex::CaEntry> StructureIndex::ca_entries_of_chain(
    const std::string& chain_id) const {
    std::vector<CaEntry> out;
    for (const auto& e : ca_entries_) {
        if (e.ref.chain_id == chain_id) out.push_back(e);
    }
    return out;
}

double ca_distance(const Structure& s, const ResidueRef& a, const ResidueRef& b) {
    StructureIndex idx(s);
    const Atom* ca_a = idx.residue(a).find_atom("CA");
    const Atom* ca_b = idx.residue(b).find_atom("CA");
    if (!ca_a) throw resolution_error("residue " + to_string(a) + " has no CA atom");
    if (!ca_b) throw resolution_error("residue " + to_string(b) + " has no CA atom");
    return distance(ca_a->position, ca_b->position);
}

}  // namespace mssteer
