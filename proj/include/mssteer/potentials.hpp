// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "mssteer/constraints.hpp"
#include "mssteer/geometry.hpp"

namespace mssteer {

struct PotentialParams {
    double k = 20.0;          // burial-loss penalty scalar
    double sigma = 5.0;       // Gaussian kernel width, Angstrom
    double burial_ref = 5.0;  // reference burial for pseudo-SASA decay
    double tau = 0.0;         // pseudo-SASA protection threshold
    double d_base = 8.0;      // baseline interaction distance, Angstrom
    double w_s = 0.5;         // protection scaling weight
    double softmin_beta = 2.0;  // log-sum-exp sharpness, 1/Angstrom

    void validate() const;
};

struct FamilyWeights {
    double xl_pos = 1.0;
    double xl_neg = 1.0;
    double hdx_proxy = 1.0;
    double hdx_burial = 1.0;

    double of(ConstraintFamily f) const;
    void validate() const;
};

struct EnergyReport {
    double total_energy = 0.0;
    std::vector<Vec3> gradient;  // per atom, Structure::coordinates() order
    std::vector<double> per_constraint_energy;
    /// Upper bound on |softmin - hard min| for hdx_proxy terms: ln(n)/beta.
    double softmin_slack = 0.0;
};

/// Constraints resolved to flat atom indices against a fixed topology, so the
/// sampler never re-resolves refs inside the step loop. Resolution failures
/// surface here, before any sampling starts.
class CompiledConstraints {
  public:
    CompiledConstraints() = default;
    CompiledConstraints(const StructureIndex& idx, const ConstraintSet& set);

    struct DistPair {
        int a = 0, b = 0;
        double d_min = 0.0, d_max = 0.0;
        int constraint_index = 0;
    };
    struct Proxy {
        int ca = 0;
        std::vector<int> partner_cas;
        double delta = 0.0;
        int constraint_index = 0;
    };
    struct Burial {
        int ca = 0;
        double delta = 0.0;
        int constraint_index = 0;
    };

    const std::vector<DistPair>& xl_pos() const { return xl_pos_; }
    const std::vector<DistPair>& xl_neg() const { return xl_neg_; }
    const std::vector<Proxy>& hdx_proxy() const { return proxy_; }
    const std::vector<Burial>& hdx_burial() const { return burial_; }
    const std::vector<int>& all_cas() const { return all_cas_; }  // burial neighbor set
    std::size_t n_atoms() const { return n_atoms_; }
    std::size_t n_constraints() const { return n_constraints_; }
    std::size_t family_count(ConstraintFamily f) const;

  private:
    std::vector<DistPair> xl_pos_;
    std::vector<DistPair> xl_neg_;
    std::vector<Proxy> proxy_;
    std::vector<Burial> burial_;
    std::vector<int> all_cas_;
    std::size_t n_atoms_ = 0;
    std::size_t n_constraints_ = 0;
};

// Coordinate-space evaluators used inside the sampler. The gradient vector in
// each report spans all n_atoms() positions.
EnergyReport eval_xl_pos(const CompiledConstraints& cc, std::span<const Vec3> coords);
EnergyReport eval_xl_neg(const CompiledConstraints& cc, std::span<const Vec3> coords);
EnergyReport eval_hdx_proxy(const CompiledConstraints& cc, std::span<const Vec3> coords,
                            const PotentialParams& params);
EnergyReport eval_hdx_burial(const CompiledConstraints& cc, std::span<const Vec3> coords,
                             const PotentialParams& params);
EnergyReport eval_family(const CompiledConstraints& cc, ConstraintFamily f,
                         std::span<const Vec3> coords, const PotentialParams& params);

// Structure-level entry points.
EnergyReport u_dist(const Structure& s, const std::vector<XlPositive>& pairs);
EnergyReport u_neg(const Structure& s, const std::vector<XlNegative>& pairs);
EnergyReport hdx_proxy_potential(const Structure& s, const std::vector<HdxProxy>& constraints,
                                 const PotentialParams& params);
EnergyReport burial_loss(const Structure& s, const std::vector<HdxBurial>& constraints,
                         const PotentialParams& params);
EnergyReport total_potential(const Structure& s, const ConstraintSet& set,
                             const PotentialParams& params, const FamilyWeights& weights);
EnergyReport total_potential(const CompiledConstraints& cc, std::span<const Vec3> coords,
                             const PotentialParams& params, const FamilyWeights& weights);

/// Protection-scaled contact bound: max(3, d_base * (1 - delta * w_s)).
double hdx_dmax(double delta, const PotentialParams& params);

/// Gaussian-weighted CA neighbor count of residue i.
double burial(const Structure& s, const ResidueRef& i, double sigma);

/// exp(-burial / burial_ref).
double pseudo_sasa(double burial_value, double burial_ref);

}  // namespace mssteer
