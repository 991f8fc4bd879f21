// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mssteer/geometry.hpp"

namespace fixtures {

using mssteer::Atom;
using mssteer::Chain;
using mssteer::Residue;
using mssteer::Structure;
using mssteer::Vec3;

inline Chain make_ca_chain(const std::string& chain_id, const std::vector<Vec3>& positions,
                           const std::string& amino_acid = "LYS", int start_seq = 1) {
    Chain chain;
    chain.chain_id = chain_id;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        Residue r;
        r.seq_number = start_seq + static_cast<int>(k);
        r.amino_acid = amino_acid;
        r.atoms.push_back(Atom{"CA", "C", positions[k]});
        chain.residues.push_back(std::move(r));
    }
    return chain;
}

/// Idealized CA helix: 1.5 A rise, 100 degree turn, 2.3 A radius.
inline std::vector<Vec3> helix_points(int n) {
    std::vector<Vec3> pts;
    const double turn = 100.0 * M_PI / 180.0;
    for (int k = 0; k < n; ++k) {
        const double a = turn * k;
        pts.push_back(Vec3{1.5 * k, 2.3 * std::cos(a), 2.3 * std::sin(a)});
    }
    return pts;
}

inline Vec3 centroid(const std::vector<Vec3>& pts) {
    Vec3 c{};
    for (const Vec3& p : pts) c += p;
    return c * (1.0 / static_cast<double>(pts.size()));
}

inline std::vector<Vec3> recenter(std::vector<Vec3> pts, const Vec3& target) {
    const Vec3 c = centroid(pts);
    for (Vec3& p : pts) p = p - c + target;
    return pts;
}

inline std::vector<Vec3> rotate_z90_about_centroid(std::vector<Vec3> pts) {
    const Vec3 c = centroid(pts);
    for (Vec3& p : pts) {
        const Vec3 q = p - c;
        p = Vec3{-q.y, q.x, q.z} + c;
    }
    return pts;
}

/// Two-chain, two-state fixture. Both states share chain A (centroid at the
/// origin). Chain B sits 20 A away in both states, but the placements differ
/// by a rigid 20 A displacement plus a 90 degree rotation, giving a bimodal
/// prior with exactly equal reference norms (no state is closer to the noise
/// distribution than the other).
struct TwoBasin {
    Structure basin_a;
    Structure basin_b;

    std::vector<std::vector<Vec3>> references() const {
        return {basin_a.coordinates(), basin_b.coordinates()};
    }
};

inline TwoBasin two_basin(int n_per_chain = 20) {
    const std::vector<Vec3> helix = helix_points(n_per_chain);
    const std::vector<Vec3> chain_a = recenter(helix, Vec3{0, 0, 0});
    const std::vector<Vec3> b_state_a = recenter(helix, Vec3{0, 20, 0});
    const std::vector<Vec3> b_state_b =
        recenter(rotate_z90_about_centroid(helix), Vec3{10 * std::sqrt(3.0), 10, 0});

    TwoBasin out;
    out.basin_a.chains = {make_ca_chain("A", chain_a), make_ca_chain("B", b_state_a)};
    out.basin_b.chains = {make_ca_chain("A", chain_a), make_ca_chain("B", b_state_b)};
    return out;
}

/// One-state fixture whose chains sit exactly 40 A apart (matched residues),
/// so an upper bound of 30 A between matched residues starts violated by 10 A.
inline Structure single_basin(int n_per_chain = 10) {
    const std::vector<Vec3> helix = helix_points(n_per_chain);
    Structure s;
    s.chains = {make_ca_chain("A", recenter(helix, Vec3{0, 0, 0})),
                make_ca_chain("B", recenter(helix, Vec3{0, 40, 0}))};
    return s;
}

/// Two parallel strands 4.5 A apart: close enough that CA occlusion spheres
/// overlap, so complex formation visibly buries the interface residues.
inline Structure contact_complex(int n_per_chain = 8, double separation = 4.5) {
    std::vector<Vec3> a, b;
    for (int k = 0; k < n_per_chain; ++k) {
        a.push_back(Vec3{3.8 * k, 0, 0});
        b.push_back(Vec3{3.8 * k, separation, 0});
    }
    Structure s;
    s.chains = {make_ca_chain("A", a), make_ca_chain("B", b)};
    return s;
}

/// Same chains pulled far apart (the unbound state of contact_complex).
inline Structure contact_apart(int n_per_chain = 8, double separation = 40.0) {
    return contact_complex(n_per_chain, separation);
}

/// Single 50-residue helical chain, mixed residue types.
inline Structure helix50() {
    const std::vector<std::string> types = {"ALA", "LYS", "GLU", "LEU", "SER"};
    const std::vector<Vec3> pts = helix_points(50);
    Chain chain;
    chain.chain_id = "A";
    for (int k = 0; k < 50; ++k) {
        Residue r;
        r.seq_number = k + 1;
        r.amino_acid = types[static_cast<std::size_t>(k) % types.size()];
        r.atoms.push_back(Atom{"CA", "C", pts[static_cast<std::size_t>(k)]});
        chain.residues.push_back(std::move(r));
    }
    Structure s;
    s.chains = {std::move(chain)};
    return s;
}

inline Structure translated(const Structure& s, const std::string& chain_id, const Vec3& shift) {
    Structure out = s;
    for (Chain& chain : out.chains)
        if (chain.chain_id == chain_id)
            for (Residue& r : chain.residues)
                for (Atom& a : r.atoms) a.position += shift;
    return out;
}

}  // namespace fixtures
