// SPDX-License-Identifier: Apache-2.0

#include "mssteer/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mssteer/errors.hpp"

namespace mssteer {

std::vector<char> SatisfactionReport::satisfied_flags(std::size_t set_size) const {
    std::vector<char> flags(set_size, 0);
    for (const ConstraintCheck& c : checks)
        if (c.pass && static_cast<std::size_t>(c.constraint_index) < set_size)
            flags[static_cast<std::size_t>(c.constraint_index)] = 1;
    return flags;
}

namespace {

bool is_xl(ConstraintFamily f) {
    return f == ConstraintFamily::xl_pos || f == ConstraintFamily::xl_neg;
}

void finish_percentages(SatisfactionReport& report) {
    int xl_total = 0, xl_pass = 0, hdx_total = 0, hdx_pass = 0;
    for (const ConstraintCheck& c : report.checks) {
        if (is_xl(c.family)) {
            ++xl_total;
            xl_pass += c.pass ? 1 : 0;
        } else {
            ++hdx_total;
            hdx_pass += c.pass ? 1 : 0;
        }
    }
    if (xl_total > 0) report.xl_pct = 100.0 * xl_pass / xl_total;
    if (hdx_total > 0) report.hdx_pct = 100.0 * hdx_pass / hdx_total;
    double sum = 0.0;
    int n = 0;
    if (report.xl_pct) {
        sum += *report.xl_pct;
        ++n;
    }
    if (report.hdx_pct) {
        sum += *report.hdx_pct;
        ++n;
    }
    if (n > 0) report.overall = sum / n;
}

[[noreturn]] void throw_unresolved(const std::vector<std::string>& problems) {
    std::string msg = "constraints reference residues missing from the model:";
    for (const std::string& p : problems) msg += "\n  " + p;
    throw resolution_error(msg);
}

}  // namespace

SatisfactionReport xl_satisfaction(const Structure& model, const ConstraintSet& constraints) {
    StructureIndex idx(model);
    const std::vector<Vec3> coords = model.coordinates();
    SatisfactionReport report;
    std::vector<std::string> problems;

    for (std::size_t k = 0; k < constraints.items.size(); ++k) {
        const Constraint& c = constraints.items[k];
        const ConstraintFamily fam = family_of(c);
        if (!is_xl(fam)) continue;
        const ResidueRef& i = fam == ConstraintFamily::xl_pos
                                  ? std::get<XlPositive>(c).i
                                  : std::get<XlNegative>(c).i;
        const ResidueRef& j = fam == ConstraintFamily::xl_pos
                                  ? std::get<XlPositive>(c).j
                                  : std::get<XlNegative>(c).j;
        double d = 0.0;
        try {
            const Vec3 a = coords[static_cast<std::size_t>(idx.ca_flat_index(i))];
            const Vec3 b = coords[static_cast<std::size_t>(idx.ca_flat_index(j))];
            d = distance(a, b);
        } catch (const resolution_error& e) {
            problems.push_back("constraint " + std::to_string(k) + ": " + e.what());
            continue;
        }
        ConstraintCheck check;
        check.constraint_index = static_cast<int>(k);
        check.family = fam;
        check.measured = d;
        check.pass = fam == ConstraintFamily::xl_pos
                         ? d <= std::get<XlPositive>(c).d_max
                         : d > std::get<XlNegative>(c).d_min;
        report.checks.push_back(check);
    }
    if (!problems.empty()) throw_unresolved(problems);
    finish_percentages(report);
    return report;
}

SatisfactionReport hdx_satisfaction(const Structure& model, const ConstraintSet& constraints,
                                    const EvalOptions& opts) {
    SatisfactionReport report;
    bool any_hdx = false;
    for (const Constraint& c : constraints.items)
        if (!is_xl(family_of(c))) any_hdx = true;
    if (!any_hdx) return report;

    // Monomeric states are the model's own chains taken apart; delta RSA then
    // measures how much the assembly buries each residue.
    const DeltaRsaReport rsa =
        delta_rsa(model.split_chains(), model, opts.sasa_probe, opts.sasa_points);
    std::map<std::string, double> delta_by_residue;
    for (const DeltaRsaRow& row : rsa.rows) delta_by_residue[to_string(row.ref)] = row.delta;

    std::vector<std::string> problems;
    for (std::size_t k = 0; k < constraints.items.size(); ++k) {
        const Constraint& c = constraints.items[k];
        const ConstraintFamily fam = family_of(c);
        if (is_xl(fam)) continue;
        const ResidueRef& ref = fam == ConstraintFamily::hdx_proxy
                                    ? std::get<HdxProxy>(c).residue
                                    : std::get<HdxBurial>(c).residue;
        auto it = delta_by_residue.find(to_string(ref));
        if (it == delta_by_residue.end()) {
            problems.push_back("constraint " + std::to_string(k) + ": residue " +
                               to_string(ref) + " not found");
            continue;
        }
        ConstraintCheck check;
        check.constraint_index = static_cast<int>(k);
        check.family = fam;
        check.measured = it->second;
        check.pass = it->second >= opts.hdx_delta_threshold;
        report.checks.push_back(check);
    }
    if (!problems.empty()) throw_unresolved(problems);
    finish_percentages(report);
    return report;
}

SatisfactionReport satisfaction(const Structure& model, const ConstraintSet& constraints,
                                const EvalOptions& opts) {
    SatisfactionReport xl = xl_satisfaction(model, constraints);
    const SatisfactionReport hdx = hdx_satisfaction(model, constraints, opts);
    SatisfactionReport merged;
    merged.checks = std::move(xl.checks);
    merged.checks.insert(merged.checks.end(), hdx.checks.begin(), hdx.checks.end());
    std::sort(merged.checks.begin(), merged.checks.end(),
              [](const ConstraintCheck& a, const ConstraintCheck& b) {
                  return a.constraint_index < b.constraint_index;
              });
    finish_percentages(merged);
    return merged;
}

// ---------------------------------------------------------------------------
// Accuracy.

namespace {

struct CaMap {
    std::map<std::string, Vec3> by_residue;  // "chain:seq" -> CA position
};

CaMap ca_map(const Structure& s) {
    CaMap out;
    for (const Chain& chain : s.chains)
        for (const Residue& r : chain.residues)
            if (const Atom* ca = r.find_atom("CA"))
                out.by_residue[chain.chain_id + ":" + std::to_string(r.seq_number)] =
                    ca->position;
    return out;
}

double paired_rmsd_after(const Superposition& sup, const std::vector<Vec3>& moving,
                         const std::vector<Vec3>& target) {
    double sq = 0.0;
    for (std::size_t i = 0; i < moving.size(); ++i)
        sq += norm_sq(sup.apply(moving[i]) - target[i]);
    return std::sqrt(sq / static_cast<double>(moving.size()));
}

}  // namespace

double interface_rmsd(const Structure& model, const Structure& reference,
                      double interface_cutoff) {
    if (!(interface_cutoff > 0.0)) throw config_error("interface_cutoff must be > 0");

    struct InterfaceCa {
        std::string key;
        Vec3 position;
    };
    // The reference defines the interface.
    std::vector<InterfaceCa> all;
    std::vector<std::string> chain_of;
    for (const Chain& chain : reference.chains)
        for (const Residue& r : chain.residues)
            if (const Atom* ca = r.find_atom("CA")) {
                all.push_back({chain.chain_id + ":" + std::to_string(r.seq_number),
                               ca->position});
                chain_of.push_back(chain.chain_id);
            }
    std::vector<std::size_t> interface_idx;
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = 0; j < all.size(); ++j) {
            if (chain_of[i] == chain_of[j]) continue;
            if (distance(all[i].position, all[j].position) <= interface_cutoff) {
                interface_idx.push_back(i);
                break;
            }
        }
    }
    if (interface_idx.empty())
        throw no_interface_error("no inter-chain CA pair within " +
                                 std::to_string(interface_cutoff) + " A in the reference");

    const CaMap model_cas = ca_map(model);
    std::vector<Vec3> moving, target;
    for (std::size_t i : interface_idx) {
        auto it = model_cas.by_residue.find(all[i].key);
        if (it == model_cas.by_residue.end())
            throw correspondence_error("model is missing interface residue " + all[i].key);
        moving.push_back(it->second);
        target.push_back(all[i].position);
    }
    return kabsch_superpose(moving, target).rmsd;
}

double ligand_rmsd(const Structure& model, const Structure& reference,
                   const std::string& receptor_chain, const std::string& ligand_chain) {
    for (const Structure* s : {&model, &reference}) {
        if (!s->find_chain(receptor_chain))
            throw resolution_error("chain '" + receptor_chain + "' not found");
        if (!s->find_chain(ligand_chain))
            throw resolution_error("chain '" + ligand_chain + "' not found");
    }
    auto paired_cas = [&](const std::string& chain_id, std::vector<Vec3>& from_model,
                          std::vector<Vec3>& from_reference) {
        const Chain* mc = model.find_chain(chain_id);
        const Chain* rc = reference.find_chain(chain_id);
        std::map<int, Vec3> model_ca;
        for (const Residue& r : mc->residues)
            if (const Atom* ca = r.find_atom("CA")) model_ca[r.seq_number] = ca->position;
        for (const Residue& r : rc->residues) {
            const Atom* ca = r.find_atom("CA");
            if (!ca) continue;
            auto it = model_ca.find(r.seq_number);
            if (it == model_ca.end())
                throw correspondence_error("chain '" + chain_id + "' residue " +
                                           std::to_string(r.seq_number) +
                                           " has no CA in the model");
            from_model.push_back(it->second);
            from_reference.push_back(ca->position);
        }
    };
    std::vector<Vec3> rec_model, rec_ref, lig_model, lig_ref;
    paired_cas(receptor_chain, rec_model, rec_ref);
    paired_cas(ligand_chain, lig_model, lig_ref);
    if (lig_model.empty())
        throw correspondence_error("ligand chain '" + ligand_chain + "' has no paired CAs");

    const Superposition sup = kabsch_superpose(rec_model, rec_ref);
    return paired_rmsd_after(sup, lig_model, lig_ref);
}

AccuracyReport accuracy(const Structure& model, const Structure& reference,
                        const std::string& receptor_chain, const std::string& ligand_chain,
                        double interface_cutoff) {
    AccuracyReport report;
    report.lrmsd = ligand_rmsd(model, reference, receptor_chain, ligand_chain);
    report.irmsd = interface_rmsd(model, reference, interface_cutoff);
    return report;
}

// ---------------------------------------------------------------------------
// Ranking.

namespace {

std::optional<FamilyStats> stats_over(const std::vector<std::optional<double>>& values) {
    std::vector<double> present;
    for (const auto& v : values)
        if (v) present.push_back(*v);
    if (present.empty()) return std::nullopt;
    double mean = 0.0;
    for (double v : present) mean += v;
    mean /= static_cast<double>(present.size());
    double sq = 0.0;
    for (double v : present) sq += (v - mean) * (v - mean);
    FamilyStats stats;
    stats.mean = mean;
    stats.sd = present.size() > 1 ? std::sqrt(sq / static_cast<double>(present.size() - 1)) : 0.0;
    return stats;
}

bool ranks_before(const RankedModel& a, const RankedModel& b) {
    const double oa = a.report.overall.value_or(-1.0);
    const double ob = b.report.overall.value_or(-1.0);
    if (oa != ob) return oa > ob;
    const double ea = a.external_score.value_or(-std::numeric_limits<double>::infinity());
    const double eb = b.external_score.value_or(-std::numeric_limits<double>::infinity());
    if (ea != eb) return ea > eb;
    return a.input_index < b.input_index;
}

}  // namespace

RankingResult rank_models(const std::vector<Structure>& models, const ConstraintSet& constraints,
                          const std::vector<double>& external_scores, const EvalOptions& opts) {
    if (models.empty()) throw config_error("rank_models requires at least one model");
    if (!external_scores.empty() && external_scores.size() != models.size())
        throw config_error("external_scores must be empty or match the model count");

    RankingResult result;
    std::vector<std::optional<double>> xl_vals, hdx_vals, overall_vals;
    for (std::size_t i = 0; i < models.size(); ++i) {
        RankedModel entry;
        entry.input_index = static_cast<int>(i);
        entry.report = satisfaction(models[i], constraints, opts);
        if (!external_scores.empty()) entry.external_score = external_scores[i];
        xl_vals.push_back(entry.report.xl_pct);
        hdx_vals.push_back(entry.report.hdx_pct);
        overall_vals.push_back(entry.report.overall);
        result.ordered.push_back(std::move(entry));
    }
    std::stable_sort(result.ordered.begin(), result.ordered.end(), &ranks_before);
    result.best_input_index = result.ordered.front().input_index;
    result.xl = stats_over(xl_vals);
    result.hdx = stats_over(hdx_vals);
    result.overall = stats_over(overall_vals);
    return result;
}

CompareTable posthoc_compare(const std::vector<Structure>& guided,
                             const std::vector<Structure>& unguided,
                             const ConstraintSet& constraints, const EvalOptions& opts) {
    if (constraints.empty())
        throw config_error("comparison requires at least one constraint family");
    if (guided.empty() || unguided.empty())
        throw config_error("both model sets must be non-empty");

    CompareTable table;
    // Interleave so equal scores keep side-by-side input order.
    const std::size_t rounds = std::max(guided.size(), unguided.size());
    for (std::size_t i = 0; i < rounds; ++i) {
        if (i < guided.size())
            table.rows.push_back(
                {"guided", static_cast<int>(i), satisfaction(guided[i], constraints, opts)});
        if (i < unguided.size())
            table.rows.push_back(
                {"unguided", static_cast<int>(i), satisfaction(unguided[i], constraints, opts)});
    }
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const CompareRow& a, const CompareRow& b) {
                         return a.report.overall.value_or(-1.0) >
                                b.report.overall.value_or(-1.0);
                     });
    return table;
}

}  // namespace mssteer
