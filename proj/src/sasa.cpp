// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <ostream>

#include "mssteer/geometry.hpp"

namespace mssteer {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Surface points on the unit sphere via the golden-angle lattice. Deterministic
// for a given count, near-uniform coverage.
std::vector<Vec3> fibonacci_sphere(int n) {
    std::vector<Vec3> pts;
    pts.reserve(static_cast<std::size_t>(n));
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
        double z = 1.0 - 2.0 * (k + 0.5) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * k;
        pts.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return pts;
}

struct AtomSite {
    Vec3 center;
    double radius;  // vdw + probe
    int residue;    // structure residue ordinal
};

// Theoretical per-residue maxima (Angstrom^2), Gly-X-Gly context.
const std::unordered_map<std::string, double>& max_sasa_table() {
    static const std::unordered_map<std::string, double> table = {
        {"ALA", 129.0}, {"ARG", 274.0}, {"ASN", 195.0}, {"ASP", 193.0}, {"CYS", 167.0},
        {"GLN", 225.0}, {"GLU", 223.0}, {"GLY", 104.0}, {"HIS", 224.0}, {"ILE", 197.0},
        {"LEU", 201.0}, {"LYS", 236.0}, {"MET", 224.0}, {"PHE", 240.0}, {"PRO", 159.0},
        {"SER", 155.0}, {"THR", 172.0}, {"TRP", 285.0}, {"TYR", 263.0}, {"VAL", 174.0},
    };
    return table;
}

constexpr double kMaxSasaFallback = 202.0;  // table mean

}  // namespace

std::optional<double> vdw_radius(const std::string& element) {
    static const std::unordered_map<std::string, double> table = {
        {"C", 1.70}, {"N", 1.55}, {"O", 1.52}, {"S", 1.80}, {"H", 1.20}, {"P", 1.80},
    };
    auto it = table.find(element);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

SasaProfile shrake_rupley_sasa(const Structure& s, double probe_radius, int n_points) {
    if (n_points <= 0) throw config_error("sphere point count must be positive");
    if (probe_radius < 0.0) throw config_error("probe radius must be non-negative");

    SasaProfile profile;
    profile.probe_radius = probe_radius;
    profile.n_sphere_points = n_points;

    std::vector<AtomSite> sites;
    sites.reserve(s.atom_count());
    int residue_ordinal = 0;
    for (const auto& c : s.chains) {
        for (const auto& r : c.residues) {
            for (const auto& a : r.atoms) {
                auto rad = vdw_radius(a.element);
                if (!rad)
                    throw unknown_element_error("no van der Waals radius for element '" + a.element +
                                                "' (atom " + a.name + ", residue " + c.chain_id +
                                                ":" + std::to_string(r.seq_number) + ")");
                sites.push_back({a.position, *rad + probe_radius, residue_ordinal});
            }
            profile.refs.push_back(ResidueRef{c.chain_id, r.seq_number});
            profile.amino_acids.push_back(r.amino_acid);
            ++residue_ordinal;
        }
    }
    profile.residue_sasa.assign(static_cast<std::size_t>(residue_ordinal), 0.0);

    const std::vector<Vec3> lattice = fibonacci_sphere(n_points);
    const int n_atoms = static_cast<int>(sites.size());

    std::vector<int> neighbors;
    for (int i = 0; i < n_atoms; ++i) {
        const AtomSite& ai = sites[static_cast<std::size_t>(i)];

        neighbors.clear();
        for (int j = 0; j < n_atoms; ++j) {
            if (j == i) continue;
            const AtomSite& aj = sites[static_cast<std::size_t>(j)];
            double reach = ai.radius + aj.radius;
            if (norm_sq(ai.center - aj.center) < reach * reach) neighbors.push_back(j);
        }

        int accessible = 0;
        for (const Vec3& dir : lattice) {
            Vec3 p = ai.center + dir * ai.radius;
            bool occluded = false;
            for (int j : neighbors) {
                const AtomSite& aj = sites[static_cast<std::size_t>(j)];
                double d2 = norm_sq(p - aj.center);
                double r2 = aj.radius * aj.radius;
                // Points exactly on a neighbor sphere (coincident atoms) belong
                // to the lower-index atom, so duplicates contribute no area.
                if (d2 < r2 * (1.0 - 1e-9) || (d2 <= r2 * (1.0 + 1e-9) && j < i)) {
                    occluded = true;
                    break;
                }
            }
            if (!occluded) ++accessible;
        }

        double area = 4.0 * kPi * ai.radius * ai.radius * accessible / n_points;
        profile.residue_sasa[static_cast<std::size_t>(ai.residue)] += area;
    }

    return profile;
}

double relative_sasa(double sasa, const std::string& amino_acid, bool* unknown_aa) {
    const auto& table = max_sasa_table();
    auto it = table.find(amino_acid);
    double max = kMaxSasaFallback;
    if (it != table.end()) {
        max = it->second;
        if (unknown_aa) *unknown_aa = false;
    } else if (unknown_aa) {
        *unknown_aa = true;
    }
    return sasa / max;
}

DeltaRsaReport delta_rsa(const std::vector<Structure>& mono, const Structure& complex_state,
                         double probe_radius, int n_points) {
    SasaProfile complex_profile = shrake_rupley_sasa(complex_state, probe_radius, n_points);

    struct MonoRow {
        double rsa;
    };
    std::unordered_map<std::string, MonoRow> mono_rows;
    std::vector<ResidueRef> mono_refs_in_order;
    for (const auto& m : mono) {
        SasaProfile p = shrake_rupley_sasa(m, probe_radius, n_points);
        for (std::size_t k = 0; k < p.refs.size(); ++k) {
            std::string key = to_string(p.refs[k]);
            mono_rows[key] = MonoRow{relative_sasa(p.residue_sasa[k], p.amino_acids[k])};
            mono_refs_in_order.push_back(p.refs[k]);
        }
    }

    DeltaRsaReport report;
    std::unordered_map<std::string, bool> matched;
    for (std::size_t k = 0; k < complex_profile.refs.size(); ++k) {
        std::string key = to_string(complex_profile.refs[k]);
        auto it = mono_rows.find(key);
        if (it == mono_rows.end()) {
            report.skipped.push_back(complex_profile.refs[k]);
            continue;
        }
        matched[key] = true;
        DeltaRsaRow row;
        row.ref = complex_profile.refs[k];
        row.amino_acid = complex_profile.amino_acids[k];
        row.rsa_complex = relative_sasa(complex_profile.residue_sasa[k], row.amino_acid);
        row.rsa_mono = it->second.rsa;
        row.delta = row.rsa_mono - row.rsa_complex;
        report.rows.push_back(std::move(row));
    }
    for (const auto& ref : mono_refs_in_order) {
        if (!matched.count(to_string(ref))) report.skipped.push_back(ref);
    }
    return report;
}

void write_sasa_csv(const SasaProfile& profile, std::ostream& out) {
    out << "chain,seq,aa,sasa,rsa\n";
    char buf[64];
    for (std::size_t k = 0; k < profile.refs.size(); ++k) {
        double sasa = profile.residue_sasa[k];
        double rsa = relative_sasa(sasa, profile.amino_acids[k]);
        std::snprintf(buf, sizeof(buf), "%.4f,%.6f", sasa, rsa);
        out << profile.refs[k].chain_id << ',' << profile.refs[k].seq_number << ','
            << profile.amino_acids[k] << ',' << buf << '\n';
    }
}

}  // namespace mssteer
