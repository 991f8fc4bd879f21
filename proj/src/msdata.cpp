// SPDX-License-Identifier: Apache-2.0

#include "mssteer/msdata.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "mssteer/errors.hpp"
#include "mssteer/rng.hpp"

namespace mssteer {

using nlohmann::json;

namespace {

void validate_measurement(const XlMeasurement& m, std::size_t idx) {
    if (m.intensity < 0.0)
        throw config_error("measurement " + std::to_string(idx) + ": intensity must be >= 0");
    if (!(m.linker_max > 0.0))
        throw config_error("measurement " + std::to_string(idx) + ": linker_max must be > 0");
}

void validate_peptide(const HdxPeptide& p, std::size_t idx) {
    const std::string where = "peptide " + std::to_string(idx) + ": ";
    if (p.chain.empty()) throw config_error(where + "chain id must be non-empty");
    if (p.start > p.end) throw config_error(where + "start must be <= end");
    if (!(p.uptake >= 0.0 && p.uptake <= 1.0))
        throw config_error(where + "uptake must lie in [0,1]");
    if (!(p.sd >= 0.0)) throw config_error(where + "sd must be >= 0");
}

using PairKey = std::tuple<std::string, int, std::string, int>;

PairKey canonical_pair(const ResidueRef& a, const ResidueRef& b) {
    if (std::tie(a.chain_id, a.seq_number) <= std::tie(b.chain_id, b.seq_number))
        return {a.chain_id, a.seq_number, b.chain_id, b.seq_number};
    return {b.chain_id, b.seq_number, a.chain_id, a.seq_number};
}

}  // namespace

ConstraintSet derive_xl_constraints(const std::vector<XlMeasurement>& measurements,
                                    const std::string& state_a, const std::string& state_b,
                                    const XlDeriveOptions& opts) {
    if (!(opts.enrich_ratio > 1.0)) throw config_error("enrich_ratio must be > 1");
    if (state_a == state_b) throw config_error("states to compare must differ");

    struct PairSignal {
        double a = 0.0;
        double b = 0.0;
        double linker = 0.0;
    };
    std::map<PairKey, PairSignal> signal;
    std::vector<PairKey> order;  // first-seen pair order
    bool seen_a = false;
    bool seen_b = false;

    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const XlMeasurement& m = measurements[i];
        validate_measurement(m, i);
        if (m.condition == state_a) seen_a = true;
        if (m.condition == state_b) seen_b = true;
        if (m.condition != state_a && m.condition != state_b) continue;
        const PairKey key = canonical_pair(m.residue_i, m.residue_j);
        auto [it, fresh] = signal.try_emplace(key);
        if (fresh) order.push_back(key);
        if (m.condition == state_a)
            it->second.a += m.intensity;
        else
            it->second.b += m.intensity;
        it->second.linker = std::max(it->second.linker, m.linker_max);
    }
    if (!seen_a) throw config_error("state '" + state_a + "' not present in the measurements");
    if (!seen_b) throw config_error("state '" + state_b + "' not present in the measurements");

    ConstraintSet out;
    for (const PairKey& key : order) {
        const PairSignal& sig = signal.at(key);
        if (sig.a == 0.0 && sig.b == 0.0) continue;
        const ResidueRef i{std::get<0>(key), std::get<1>(key)};
        const ResidueRef j{std::get<2>(key), std::get<3>(key)};
        const double linker = opts.linker_max > 0.0 ? opts.linker_max : sig.linker;
        // a/b >= ratio as a*1 >= ratio*b keeps the zero-denominator case
        // (infinite enrichment) exact.
        if (sig.a > 0.0 && sig.a >= opts.enrich_ratio * sig.b) {
            out.items.push_back(XlPositive{i, j, 0.0, linker});
        } else if (sig.b > 0.0 && sig.b >= opts.enrich_ratio * sig.a) {
            out.items.push_back(XlNegative{i, j, linker});
        }
    }
    return out;
}

std::pair<std::vector<HdxPeptide>, std::vector<HdxPeptide>> filter_peptides(
    const std::vector<HdxPeptide>& peptides) {
    std::map<std::string, std::pair<double, int>> per_state;  // state -> (sd sum, count)
    for (std::size_t i = 0; i < peptides.size(); ++i) {
        validate_peptide(peptides[i], i);
        auto& acc = per_state[peptides[i].state];
        acc.first += peptides[i].sd;
        acc.second += 1;
    }
    std::map<std::string, double> threshold;
    for (const auto& [state, acc] : per_state)
        threshold[state] = 2.5 * acc.first / static_cast<double>(acc.second);

    std::pair<std::vector<HdxPeptide>, std::vector<HdxPeptide>> result;
    for (const HdxPeptide& p : peptides) {
        if (p.sd > threshold.at(p.state))
            result.second.push_back(p);
        else
            result.first.push_back(p);
    }
    return result;
}

const UptakeEntry* ResidueUptake::find(const std::string& chain, int seq) const {
    auto it = residues.find({chain, seq});
    return it == residues.end() ? nullptr : &it->second;
}

ResidueUptake residue_uptake(const std::vector<HdxPeptide>& kept) {
    struct Acc {
        double weighted = 0.0;
        double weight = 0.0;
        int coverage = 0;
    };
    std::map<ResidueKey, Acc> acc;
    for (std::size_t i = 0; i < kept.size(); ++i) {
        const HdxPeptide& p = kept[i];
        validate_peptide(p, i);
        const double w = 1.0 / static_cast<double>(p.end - p.start + 1);
        for (int r = p.start; r <= p.end; ++r) {
            Acc& a = acc[{p.chain, r}];
            a.weighted += w * p.uptake;
            a.weight += w;
            a.coverage += 1;
        }
    }
    ResidueUptake out;
    for (const auto& [key, a] : acc)
        out.residues[key] = UptakeEntry{a.weighted / a.weight, a.coverage};
    return out;
}

std::map<std::string, ResidueUptake> residue_uptake_by_state(
    const std::vector<HdxPeptide>& kept) {
    std::map<std::string, std::vector<HdxPeptide>> grouped;
    for (const HdxPeptide& p : kept) grouped[p.state].push_back(p);
    std::map<std::string, ResidueUptake> out;
    for (const auto& [state, list] : grouped) out[state] = residue_uptake(list);
    return out;
}

std::map<std::string, std::string> infer_partners(const std::vector<std::string>& chain_ids) {
    std::set<std::string> unique(chain_ids.begin(), chain_ids.end());
    if (unique.size() != 2)
        throw config_error("partner mapping is ambiguous with " + std::to_string(unique.size()) +
                           " chain(s); supply an explicit mapping");
    auto it = unique.begin();
    const std::string first = *it++;
    const std::string second = *it;
    return {{first, second}, {second, first}};
}

std::map<ResidueKey, double> protection_map(const ResidueUptake& uptake_complex,
                                            const ResidueUptake& uptake_reference) {
    std::map<ResidueKey, double> out;
    for (const auto& [key, ref_entry] : uptake_reference.residues) {
        auto it = uptake_complex.residues.find(key);
        if (it == uptake_complex.residues.end()) continue;
        out[key] = ref_entry.uptake - it->second.uptake;
    }
    return out;
}

ConstraintSet classify_protection(const ResidueUptake& uptake_complex,
                                  const ResidueUptake& uptake_reference,
                                  const ProtectionOptions& opts) {
    if (!(opts.threshold >= 0.0)) throw config_error("protection threshold must be >= 0");
    ConstraintSet out;
    for (const auto& [key, protection] : protection_map(uptake_complex, uptake_reference)) {
        if (!(protection > opts.threshold)) continue;
        auto partner = opts.partner_of.find(key.first);
        if (partner == opts.partner_of.end())
            throw config_error("no partner chain configured for chain '" + key.first + "'");
        const double delta = std::min(1.0, protection);
        const ResidueRef ref{key.first, key.second};
        out.items.push_back(HdxProxy{ref, partner->second, delta});
        out.items.push_back(HdxBurial{ref, delta});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subset search.

void SubsetSearchConfig::validate() const {
    if (n_subsets < 1) throw config_error("n_subsets must be >= 1");
    if (subset_size < 0) throw config_error("subset_size must be >= 0");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw config_error("keep_fraction must lie in (0,1]");
    if (n_rounds < 1) throw config_error("n_rounds must be >= 1");
    if (n_workers < 1) throw config_error("n_workers must be >= 1");
}

int SubsetSearchConfig::effective_subset_size(std::size_t pool_size) const {
    if (subset_size > 0) return subset_size;
    return static_cast<int>((pool_size + 2) / 3);  // ceil(pool/3)
}

int SubsetSearchConfig::keep_count() const {
    const int k = static_cast<int>(std::lround(keep_fraction * n_subsets));
    return std::clamp(k, 1, n_subsets);
}

namespace {

// Draws `count` distinct elements from `candidates` (uniform, order-canonical).
std::vector<int> draw_subset(std::vector<int> candidates, std::size_t count,
                             std::mt19937_64& rng) {
    count = std::min(count, candidates.size());
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng() % (candidates.size() - k));
        std::swap(candidates[k], candidates[j]);
    }
    candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());
    return candidates;
}

}  // namespace

std::pair<ConstraintSet, SubsetSearchState> subset_search(const ConstraintSet& pool,
                                                          const GenerateFn& generate,
                                                          const EvaluateFn& evaluate,
                                                          const SubsetSearchConfig& cfg) {
    cfg.validate();
    if (pool.empty()) throw config_error("subset search pool must be non-empty");
    pool.validate();
    if (!generate || !evaluate) throw config_error("subset search callbacks must be set");

    const int pool_size = static_cast<int>(pool.size());
    const int subset_size = cfg.effective_subset_size(pool.size());
    const int keep = cfg.keep_count();

    SubsetSearchState state;
    std::set<int> union_set;

    for (int round = 1; round <= cfg.n_rounds; ++round) {
        const std::uint64_t round_stream = static_cast<std::uint64_t>(round) * 4096;
        std::mt19937_64 sample_rng(mix_seed(cfg.seed, round_stream));

        // Candidate pool: everything in round 1, afterwards the surviving
        // union refreshed with unseen draws from the rest of the pool.
        std::vector<int> candidates;
        if (round == 1 || union_set.empty()) {
            candidates.resize(static_cast<std::size_t>(pool_size));
            for (int i = 0; i < pool_size; ++i) candidates[static_cast<std::size_t>(i)] = i;
        } else {
            candidates.assign(union_set.begin(), union_set.end());
            std::vector<int> complement;
            for (int i = 0; i < pool_size; ++i)
                if (!union_set.count(i)) complement.push_back(i);
            const std::size_t fresh_n =
                std::min<std::size_t>(2 * static_cast<std::size_t>(subset_size),
                                      complement.size());
            const std::vector<int> fresh = draw_subset(std::move(complement), fresh_n, sample_rng);
            candidates.insert(candidates.end(), fresh.begin(), fresh.end());
            std::sort(candidates.begin(), candidates.end());
        }

        SubsetRoundLog log;
        log.round = round;
        for (int j = 0; j < cfg.n_subsets; ++j)
            log.subsets.push_back(
                draw_subset(candidates, static_cast<std::size_t>(subset_size), sample_rng));
        log.scores.assign(log.subsets.size(), 0.0);
        log.failed.assign(log.subsets.size(), 0);

        std::vector<SubsetOutcome> outcomes(log.subsets.size());
        std::atomic<int> next{0};
        std::atomic<bool> bad_flags{false};
        auto run_subset = [&](int j) {
            const ConstraintSet sub = pool.subset(log.subsets[static_cast<std::size_t>(j)]);
            const std::uint64_t seed =
                mix_seed(cfg.seed, round_stream + static_cast<std::uint64_t>(j) + 1);
            try {
                const Structure model = generate(sub, seed);
                SubsetOutcome res = evaluate(model, sub);
                if (res.satisfied.size() != sub.size()) {
                    bad_flags = true;
                    return;
                }
                res.satisfaction = std::clamp(res.satisfaction, 0.0, 1.0);
                outcomes[static_cast<std::size_t>(j)] = std::move(res);
                log.scores[static_cast<std::size_t>(j)] =
                    outcomes[static_cast<std::size_t>(j)].satisfaction;
            } catch (const std::exception&) {
                log.failed[static_cast<std::size_t>(j)] = 1;
            }
        };

        if (cfg.n_workers <= 1 || log.subsets.size() <= 1) {
            for (int j = 0; j < static_cast<int>(log.subsets.size()); ++j) run_subset(j);
        } else {
            std::vector<std::thread> workers;
            const int n_workers =
                std::min<int>(cfg.n_workers, static_cast<int>(log.subsets.size()));
            for (int w = 0; w < n_workers; ++w)
                workers.emplace_back([&] {
                    for (int j = next.fetch_add(1); j < static_cast<int>(log.subsets.size());
                         j = next.fetch_add(1))
                        run_subset(j);
                });
            for (std::thread& t : workers) t.join();
        }
        if (bad_flags)
            throw config_error("evaluate callback must flag each constraint of its subset");

        std::vector<int> by_score(log.subsets.size());
        for (std::size_t j = 0; j < by_score.size(); ++j) by_score[j] = static_cast<int>(j);
        std::stable_sort(by_score.begin(), by_score.end(), [&](int a, int b) {
            return log.scores[static_cast<std::size_t>(a)] >
                   log.scores[static_cast<std::size_t>(b)];
        });
        by_score.resize(std::min<std::size_t>(static_cast<std::size_t>(keep), by_score.size()));
        std::sort(by_score.begin(), by_score.end());
        log.kept = by_score;

        // Recombination: carry forward the constraints that kept subsets'
        // models actually satisfied, not the raw subsets; a constraint that
        // failed its own experiment does not survive the round.
        for (int j : log.kept) {
            if (log.failed[static_cast<std::size_t>(j)]) continue;
            const auto& subset = log.subsets[static_cast<std::size_t>(j)];
            const auto& flags = outcomes[static_cast<std::size_t>(j)].satisfied;
            for (std::size_t t = 0; t < subset.size(); ++t)
                if (flags[t]) union_set.insert(subset[t]);
        }
        log.union_after.assign(union_set.begin(), union_set.end());
        state.rounds.push_back(std::move(log));
    }

    state.surviving_union.assign(union_set.begin(), union_set.end());
    return {pool.subset(state.surviving_union), state};
}

std::string search_log_to_json(const SubsetSearchState& state, const SubsetSearchConfig& cfg) {
    json doc;
    doc["format"] = "ms-steer/search-log/1";
    doc["config"] = {{"n_subsets", cfg.n_subsets},     {"subset_size", cfg.subset_size},
                     {"keep_fraction", cfg.keep_fraction}, {"n_rounds", cfg.n_rounds},
                     {"seed", cfg.seed},               {"n_workers", cfg.n_workers}};
    json rounds = json::array();
    for (const SubsetRoundLog& r : state.rounds) {
        json jr;
        jr["round"] = r.round;
        jr["subsets"] = r.subsets;
        jr["scores"] = r.scores;
        json failed = json::array();
        for (char f : r.failed) failed.push_back(static_cast<bool>(f));
        jr["failed"] = std::move(failed);
        jr["kept"] = r.kept;
        jr["union_after"] = r.union_after;
        rounds.push_back(std::move(jr));
    }
    doc["rounds"] = std::move(rounds);
    doc["surviving_union"] = state.surviving_union;
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// CSV tables.

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

int to_int(const std::string& s, int row, const char* col) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error("row " + std::to_string(row) + ": '" + s + "' is not an integer (" +
                          col + ")");
    }
}

double to_double(const std::string& s, int row, const char* col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw parse_error("row " + std::to_string(row) + ": '" + s + "' is not a number (" + col +
                          ")");
    }
}

void expect_header(const std::vector<std::string>& fields, const std::vector<std::string>& want,
                   const char* what) {
    if (fields != want) {
        std::string expected;
        for (std::size_t i = 0; i < want.size(); ++i)
            expected += (i ? "," : "") + want[i];
        throw parse_error(std::string(what) + " table must start with header '" + expected + "'");
    }
}

}  // namespace

std::vector<XlMeasurement> read_xl_csv(std::istream& in) {
    std::string line;
    int row = 0;
    bool have_header = false;
    std::vector<XlMeasurement> out;
    while (std::getline(in, line)) {
        ++row;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::vector<std::string> f = split_csv(stripped);
        if (!have_header) {
            expect_header(f, {"chain_i", "res_i", "chain_j", "res_j", "condition", "intensity",
                              "linker_max"},
                          "cross-link");
            have_header = true;
            continue;
        }
        if (f.size() != 7)
            throw parse_error("row " + std::to_string(row) + ": expected 7 fields, got " +
                              std::to_string(f.size()));
        XlMeasurement m;
        m.residue_i = {f[0], to_int(f[1], row, "res_i")};
        m.residue_j = {f[2], to_int(f[3], row, "res_j")};
        m.condition = f[4];
        m.intensity = to_double(f[5], row, "intensity");
        m.linker_max = to_double(f[6], row, "linker_max");
        if (m.intensity < 0.0)
            throw parse_error("row " + std::to_string(row) + ": intensity must be >= 0");
        if (!(m.linker_max > 0.0))
            throw parse_error("row " + std::to_string(row) + ": linker_max must be > 0");
        if (m.residue_i.chain_id.empty() || m.residue_j.chain_id.empty())
            throw parse_error("row " + std::to_string(row) + ": chain ids must be non-empty");
        out.push_back(std::move(m));
    }
    if (!have_header) throw parse_error("cross-link table is empty");
    return out;
}

std::vector<HdxPeptide> read_hdx_csv(std::istream& in) {
    std::string line;
    int row = 0;
    bool have_header = false;
    std::vector<HdxPeptide> out;
    while (std::getline(in, line)) {
        ++row;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::vector<std::string> f = split_csv(stripped);
        if (!have_header) {
            expect_header(f, {"chain", "start", "end", "state", "uptake", "sd"}, "uptake");
            have_header = true;
            continue;
        }
        if (f.size() != 6)
            throw parse_error("row " + std::to_string(row) + ": expected 6 fields, got " +
                              std::to_string(f.size()));
        HdxPeptide p;
        p.chain = f[0];
        p.start = to_int(f[1], row, "start");
        p.end = to_int(f[2], row, "end");
        p.state = f[3];
        p.uptake = to_double(f[4], row, "uptake");
        p.sd = to_double(f[5], row, "sd");
        try {
            validate_peptide(p, out.size());
        } catch (const config_error& e) {
            throw parse_error("row " + std::to_string(row) + ": " + e.what());
        }
        out.push_back(std::move(p));
    }
    if (!have_header) throw parse_error("uptake table is empty");
    return out;
}

namespace {

template <typename T>
T read_table_file(const std::string& path, T (*reader)(std::istream&)) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open '" + path + "'");
    try {
        return reader(in);
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

}  // namespace

std::vector<XlMeasurement> read_xl_csv_file(const std::string& path) {
    return read_table_file<std::vector<XlMeasurement>>(path, &read_xl_csv);
}

std::vector<HdxPeptide> read_hdx_csv_file(const std::string& path) {
    return read_table_file<std::vector<HdxPeptide>>(path, &read_hdx_csv);
}

}  // namespace mssteer
