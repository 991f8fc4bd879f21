// SPDX-License-Identifier: Apache-2.0

#include "mssteer/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mssteer {

void PotentialParams::validate() const {
    if (!(sigma > 0.0)) throw config_error("sigma must be > 0");
    if (!(burial_ref > 0.0)) throw config_error("burial_ref must be > 0");
    if (!(k >= 0.0)) throw config_error("k must be >= 0");
    if (!(tau >= 0.0 && tau <= 1.0)) throw config_error("tau must lie in [0,1]");
    if (!(d_base >= 3.0)) throw config_error("d_base must be >= 3");
    if (!(softmin_beta > 0.0)) throw config_error("softmin_beta must be > 0");
}

double FamilyWeights::of(ConstraintFamily f) const {
    switch (f) {
        case ConstraintFamily::xl_pos: return xl_pos;
        case ConstraintFamily::xl_neg: return xl_neg;
        case ConstraintFamily::hdx_proxy: return hdx_proxy;
        default: return hdx_burial;
    }
}

void FamilyWeights::validate() const {
    if (!(xl_pos >= 0.0 && xl_neg >= 0.0 && hdx_proxy >= 0.0 && hdx_burial >= 0.0))
        throw config_error("family weights must be >= 0");
}

CompiledConstraints::CompiledConstraints(const StructureIndex& idx, const ConstraintSet& set) {
    set.validate();
    n_atoms_ = idx.structure().atom_count();
    n_constraints_ = set.items.size();
    for (const auto& e : idx.ca_entries()) all_cas_.push_back(e.atom_index);

    for (std::size_t k = 0; k < set.items.size(); ++k) {
        const Constraint& c = set.items[k];
        const int ci = static_cast<int>(k);
        if (const auto* p = std::get_if<XlPositive>(&c)) {
            xl_pos_.push_back({idx.ca_flat_index(p->i), idx.ca_flat_index(p->j), p->d_min,
                               p->d_max, ci});
        } else if (const auto* n = std::get_if<XlNegative>(&c)) {
            xl_neg_.push_back({idx.ca_flat_index(n->i), idx.ca_flat_index(n->j), n->d_min, 0.0, ci});
        } else if (const auto* h = std::get_if<HdxProxy>(&c)) {
            Proxy pr;
            pr.ca = idx.ca_flat_index(h->residue);
            for (const auto& e : idx.ca_entries_of_chain(h->partner_chain))
                pr.partner_cas.push_back(e.atom_index);
            if (pr.partner_cas.empty())
                throw resolution_error("hdx_proxy constraint " + std::to_string(k) +
                                       ": partner chain '" + h->partner_chain +
                                       "' has no CA atoms");
            pr.delta = h->delta;
            pr.constraint_index = ci;
            proxy_.push_back(std::move(pr));
        } else if (const auto* b = std::get_if<HdxBurial>(&c)) {
            burial_.push_back({idx.ca_flat_index(b->residue), b->delta, ci});
        }
    }
}

std::size_t CompiledConstraints::family_count(ConstraintFamily f) const {
    switch (f) {
        case ConstraintFamily::xl_pos: return xl_pos_.size();
        case ConstraintFamily::xl_neg: return xl_neg_.size();
        case ConstraintFamily::hdx_proxy: return proxy_.size();
        default: return burial_.size();
    }
}

double hdx_dmax(double delta, const PotentialParams& params) {
    return std::max(3.0, params.d_base * (1.0 - delta * params.w_s));
}

double pseudo_sasa(double burial_value, double burial_ref) {
    return std::exp(-burial_value / burial_ref);
}

namespace {

EnergyReport make_report(std::size_t n_atoms, std::size_t n_terms) {
    EnergyReport r;
    r.gradient.assign(n_atoms, Vec3{});
    r.per_constraint_energy.assign(n_terms, 0.0);
    return r;
}

// Adds the gradient of max(0, d - d_max)^2 + max(0, d_min - d)^2 for one pair.
void add_interval_term(std::span<const Vec3> coords, int a, int b, double d_min, double d_max,
                       double& energy, std::vector<Vec3>& grad) {
    const Vec3 diff = coords[static_cast<std::size_t>(a)] - coords[static_cast<std::size_t>(b)];
    const double d = norm(diff);
    double coeff = 0.0;  // dE/dd
    if (d > d_max) {
        const double v = d - d_max;
        energy += v * v;
        coeff = 2.0 * v;
    } else if (d < d_min) {
        const double v = d_min - d;
        energy += v * v;
        coeff = -2.0 * v;
    }
    if (coeff != 0.0 && d > 1e-12) {
        const Vec3 g = diff * (coeff / d);
        grad[static_cast<std::size_t>(a)] += g;
        grad[static_cast<std::size_t>(b)] -= g;
    }
}

}  // namespace

EnergyReport eval_xl_pos(const CompiledConstraints& cc, std::span<const Vec3> coords) {
    EnergyReport r = make_report(cc.n_atoms(), cc.xl_pos().size());
    std::size_t term = 0;
    for (const auto& p : cc.xl_pos()) {
        double e = 0.0;
        add_interval_term(coords, p.a, p.b, p.d_min, p.d_max, e, r.gradient);
        r.per_constraint_energy[term++] = e;
        r.total_energy += e;
    }
    return r;
}

EnergyReport eval_xl_neg(const CompiledConstraints& cc, std::span<const Vec3> coords) {
    EnergyReport r = make_report(cc.n_atoms(), cc.xl_neg().size());
    std::size_t term = 0;
    for (const auto& p : cc.xl_neg()) {
        double e = 0.0;
        add_interval_term(coords, p.a, p.b, p.d_min, std::numeric_limits<double>::infinity(), e,
                          r.gradient);
        r.per_constraint_energy[term++] = e;
        r.total_energy += e;
    }
    return r;
}

EnergyReport eval_hdx_proxy(const CompiledConstraints& cc, std::span<const Vec3> coords,
                            const PotentialParams& params) {
    params.validate();
    EnergyReport r = make_report(cc.n_atoms(), cc.hdx_proxy().size());
    const double beta = params.softmin_beta;
    std::size_t term = 0;
    std::size_t max_partners = 0;
    for (const auto& pr : cc.hdx_proxy()) {
        max_partners = std::max(max_partners, pr.partner_cas.size());
        const Vec3 p = coords[static_cast<std::size_t>(pr.ca)];

        double d_hard_min = std::numeric_limits<double>::infinity();
        std::vector<double> dist(pr.partner_cas.size());
        for (std::size_t j = 0; j < pr.partner_cas.size(); ++j) {
            dist[j] = distance(p, coords[static_cast<std::size_t>(pr.partner_cas[j])]);
            d_hard_min = std::min(d_hard_min, dist[j]);
        }
        double z = 0.0;  // sum of exp(-beta (d_j - d_hard_min))
        for (double d : dist) z += std::exp(-beta * (d - d_hard_min));
        const double softmin = d_hard_min - std::log(z) / beta;

        const double bound = hdx_dmax(pr.delta, params);
        const double v = softmin - bound;
        double e = 0.0;
        if (v > 0.0) {
            e = v * v;
            const double de_dm = 2.0 * v;
            for (std::size_t j = 0; j < pr.partner_cas.size(); ++j) {
                if (dist[j] <= 1e-12) continue;
                const double w = std::exp(-beta * (dist[j] - d_hard_min)) / z;  // softmax weight
                const Vec3 q = coords[static_cast<std::size_t>(pr.partner_cas[j])];
                const Vec3 g = (p - q) * (de_dm * w / dist[j]);
                r.gradient[static_cast<std::size_t>(pr.ca)] += g;
                r.gradient[static_cast<std::size_t>(pr.partner_cas[j])] -= g;
            }
        }
        r.per_constraint_energy[term++] = e;
        r.total_energy += e;
    }
    if (max_partners > 0) r.softmin_slack = std::log(static_cast<double>(max_partners)) / beta;
    return r;
}

EnergyReport eval_hdx_burial(const CompiledConstraints& cc, std::span<const Vec3> coords,
                             const PotentialParams& params) {
    params.validate();
    EnergyReport r = make_report(cc.n_atoms(), cc.hdx_burial().size());
    const double inv_two_sigma_sq = 1.0 / (2.0 * params.sigma * params.sigma);
    const double inv_sigma_sq = 1.0 / (params.sigma * params.sigma);
    std::size_t term = 0;
    for (const auto& bc : cc.hdx_burial()) {
        const Vec3 p = coords[static_cast<std::size_t>(bc.ca)];

        double b = 0.0;
        for (int j : cc.all_cas()) {
            if (j == bc.ca) continue;
            b += std::exp(-norm_sq(p - coords[static_cast<std::size_t>(j)]) * inv_two_sigma_sq);
        }
        const double s = pseudo_sasa(b, params.burial_ref);
        const double over = s - params.tau;
        double e = 0.0;
        if (over > 0.0 && params.k > 0.0) {
            e = params.k * over * over;
            // d(loss)/db through s = exp(-b/ref)
            const double dl_db = 2.0 * params.k * over * (-s / params.burial_ref);
            for (int j : cc.all_cas()) {
                if (j == bc.ca) continue;
                const Vec3 q = coords[static_cast<std::size_t>(j)];
                const Vec3 diff = p - q;
                const double ej = std::exp(-norm_sq(diff) * inv_two_sigma_sq);
                const Vec3 g = diff * (dl_db * (-inv_sigma_sq) * ej);
                r.gradient[static_cast<std::size_t>(bc.ca)] += g;
                r.gradient[static_cast<std::size_t>(j)] -= g;
            }
        }
        r.per_constraint_energy[term++] = e;
        r.total_energy += e;
    }
    return r;
}

EnergyReport eval_family(const CompiledConstraints& cc, ConstraintFamily f,
                         std::span<const Vec3> coords, const PotentialParams& params) {
    switch (f) {
        case ConstraintFamily::xl_pos: return eval_xl_pos(cc, coords);
        case ConstraintFamily::xl_neg: return eval_xl_neg(cc, coords);
        case ConstraintFamily::hdx_proxy: return eval_hdx_proxy(cc, coords, params);
        default: return eval_hdx_burial(cc, coords, params);
    }
}

EnergyReport total_potential(const CompiledConstraints& cc, std::span<const Vec3> coords,
                             const PotentialParams& params, const FamilyWeights& weights) {
    weights.validate();
    EnergyReport total = make_report(cc.n_atoms(), cc.n_constraints());
    double max_slack = 0.0;
    for (ConstraintFamily f : {ConstraintFamily::xl_pos, ConstraintFamily::xl_neg,
                               ConstraintFamily::hdx_proxy, ConstraintFamily::hdx_burial}) {
        const double w = weights.of(f);
        if (w == 0.0 || cc.family_count(f) == 0) continue;
        EnergyReport fam = eval_family(cc, f, coords, params);
        total.total_energy += w * fam.total_energy;
        for (std::size_t i = 0; i < fam.gradient.size(); ++i)
            total.gradient[i] += fam.gradient[i] * w;
        max_slack = std::max(max_slack, fam.softmin_slack);
        // Map family-local terms back to original constraint positions.
        std::size_t local = 0;
        switch (f) {
            case ConstraintFamily::xl_pos:
                for (const auto& p : cc.xl_pos())
                    total.per_constraint_energy[static_cast<std::size_t>(p.constraint_index)] =
                        w * fam.per_constraint_energy[local++];
                break;
            case ConstraintFamily::xl_neg:
                for (const auto& p : cc.xl_neg())
                    total.per_constraint_energy[static_cast<std::size_t>(p.constraint_index)] =
                        w * fam.per_constraint_energy[local++];
                break;
            case ConstraintFamily::hdx_proxy:
                for (const auto& p : cc.hdx_proxy())
                    total.per_constraint_energy[static_cast<std::size_t>(p.constraint_index)] =
                        w * fam.per_constraint_energy[local++];
                break;
            default:
                for (const auto& p : cc.hdx_burial())
                    total.per_constraint_energy[static_cast<std::size_t>(p.constraint_index)] =
                        w * fam.per_constraint_energy[local++];
                break;
        }
    }
    total.softmin_slack = max_slack;
    return total;
}

namespace {

template <typename T>
ConstraintSet wrap_constraints(const std::vector<T>& list) {
    ConstraintSet set;
    for (const auto& c : list) set.items.push_back(c);
    return set;
}

}  // namespace

EnergyReport u_dist(const Structure& s, const std::vector<XlPositive>& pairs) {
    StructureIndex idx(s);
    CompiledConstraints cc(idx, wrap_constraints(pairs));
    const auto coords = s.coordinates();
    return eval_xl_pos(cc, coords);
}

EnergyReport u_neg(const Structure& s, const std::vector<XlNegative>& pairs) {
    StructureIndex idx(s);
    CompiledConstraints cc(idx, wrap_constraints(pairs));
    const auto coords = s.coordinates();
    return eval_xl_neg(cc, coords);
}

EnergyReport hdx_proxy_potential(const Structure& s, const std::vector<HdxProxy>& constraints,
                                 const PotentialParams& params) {
    StructureIndex idx(s);
    CompiledConstraints cc(idx, wrap_constraints(constraints));
    const auto coords = s.coordinates();
    return eval_hdx_proxy(cc, coords, params);
}

EnergyReport burial_loss(const Structure& s, const std::vector<HdxBurial>& constraints,
                         const PotentialParams& params) {
    StructureIndex idx(s);
    CompiledConstraints cc(idx, wrap_constraints(constraints));
    const auto coords = s.coordinates();
    return eval_hdx_burial(cc, coords, params);
}

EnergyReport total_potential(const Structure& s, const ConstraintSet& set,
                             const PotentialParams& params, const FamilyWeights& weights) {
    StructureIndex idx(s);
    CompiledConstraints cc(idx, set);
    const auto coords = s.coordinates();
    return total_potential(cc, coords, params, weights);
}

double burial(const Structure& s, const ResidueRef& i, double sigma) {
    if (!(sigma > 0.0)) throw config_error("sigma must be > 0");
    StructureIndex idx(s);
    const Residue& res = idx.residue(i);
    const Atom* ca = res.find_atom("CA");
    if (!ca) throw resolution_error("residue " + to_string(i) + " has no CA atom");
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
    double b = 0.0;
    const auto coords = s.coordinates();
    const int self = idx.ca_flat_index(i);
    for (const auto& e : idx.ca_entries()) {
        if (e.atom_index == self) continue;
        b += std::exp(-norm_sq(ca->position - coords[static_cast<std::size_t>(e.atom_index)]) *
                      inv_two_sigma_sq);
    }
    return b;
}

}  // namespace mssteer
