// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mssteer/engine.hpp"
#include "mssteer/errors.hpp"
#include "mssteer/eval.hpp"
#include "mssteer/msdata.hpp"
#include "mssteer/runconfig.hpp"
#include "mssteer/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mssteer;

namespace {

void write_text_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw config_error("cannot write '" + path.string() + "'");
}

json manifest_skeleton(const std::string& command, const RunConfig& cfg,
                       const std::vector<std::string>& input_paths) {
    json m;
    m["format"] = "ms-steer/manifest/1";
    m["tool_version"] = kToolVersion;
    m["command"] = command;
    m["config"] = json::parse(config_to_json(cfg));
    json inputs = json::object();
    for (const std::string& p : input_paths) inputs[p] = fnv1a_file(p);
    m["inputs"] = std::move(inputs);
    return m;
}

std::string pct_or_dash(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *v);
    return buf;
}

json report_to_json(const SatisfactionReport& rep) {
    json j;
    if (rep.xl_pct) j["xl_pct"] = *rep.xl_pct;
    if (rep.hdx_pct) j["hdx_pct"] = *rep.hdx_pct;
    if (rep.overall) j["overall_pct"] = *rep.overall;
    json checks = json::array();
    for (const ConstraintCheck& c : rep.checks)
        checks.push_back({{"constraint", c.constraint_index},
                          {"family", family_name(c.family)},
                          {"pass", c.pass},
                          {"measured", c.measured}});
    j["checks"] = std::move(checks);
    return j;
}

// -----------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string truth;
    std::string truth_b;
    std::string config_path;
    std::string out_dir = ".";
    std::optional<double> xl_threshold;
    std::optional<double> protection_floor;
    std::vector<std::string> residue_types;
    bool include_intra = false;
    std::optional<int> n_false;
    std::optional<double> perturbation;
    std::uint64_t noise_seed = 0;
};

void cmd_simulate(const SimulateArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig::defaults()
                                             : load_config_file(args.config_path);
    if (args.xl_threshold) cfg.synth.xl_threshold = *args.xl_threshold;
    if (args.protection_floor) cfg.synth.hdx_protection_floor = *args.protection_floor;
    if (!args.residue_types.empty()) cfg.synth.xl_residue_types = args.residue_types;
    if (args.include_intra) cfg.synth.include_intra_chain = true;
    if (args.n_false) cfg.synth.noise.n_false_constraints = *args.n_false;
    if (args.perturbation) cfg.synth.noise.perturbation = *args.perturbation;
    cfg.validate();

    const Structure truth = read_pdb_file(args.truth);
    const std::vector<XlPositive> xl_pos = simulate_crosslinks(truth, cfg.synth);
    std::vector<XlNegative> xl_neg;
    if (!args.truth_b.empty())
        xl_neg = simulate_negative_links(truth, read_pdb_file(args.truth_b), cfg.synth);
    const ConstraintSet hdx = simulate_hdx(truth.split_chains(), truth, cfg.synth);
    const ConstraintSet combined = combine_simulated(xl_pos, xl_neg, hdx);
    const InjectReport injected = inject_noise(combined, truth, cfg.synth, args.noise_seed);

    const fs::path out(args.out_dir);
    write_text_file(out / "constraints.json", constraints_to_json(injected.constraints));
    write_text_file(out / "provenance.json", provenance_to_json(injected.constraints));

    std::vector<std::string> inputs{args.truth};
    if (!args.truth_b.empty()) inputs.push_back(args.truth_b);
    if (!args.config_path.empty()) inputs.push_back(args.config_path);
    json manifest = manifest_skeleton("simulate", cfg, inputs);
    manifest["noise_seed"] = args.noise_seed;
    manifest["counts"] = {{"xl_positive", xl_pos.size()},
                          {"xl_negative", xl_neg.size()},
                          {"hdx", hdx.size()},
                          {"false_requested", injected.requested},
                          {"false_added", injected.added}};
    write_text_file(out / "simulate_manifest.json", manifest.dump(2));

    std::cout << "constraints: " << injected.constraints.size() << " (" << xl_pos.size()
              << " upper bounds, " << xl_neg.size() << " lower bounds, " << hdx.size()
              << " protection, " << injected.added << " injected false)\n"
              << "wrote " << (out / "constraints.json").string() << "\n";
    if (injected.added < injected.requested)
        std::cout << "note: only " << injected.added << " of " << injected.requested
                  << " requested false constraints had room\n";
}

// -----------------------------------------------------------------------
// derive

struct DeriveArgs {
    std::string xl_csv;
    std::string hdx_csv;
    std::string state_a;
    std::string state_b;
    std::string hdx_complex = "ternary";
    std::string hdx_reference = "apo";
    std::vector<std::string> partners;  // chain=partner
    std::string config_path;
    std::string out_dir = ".";
    std::optional<double> enrich_ratio;
    std::optional<double> linker_max;
    std::optional<double> protection_threshold;
};

void cmd_derive(const DeriveArgs& args) {
    if (args.xl_csv.empty() && args.hdx_csv.empty())
        throw config_error("provide --xl and/or --hdx input tables");
    RunConfig cfg = args.config_path.empty() ? RunConfig::defaults()
                                             : load_config_file(args.config_path);
    if (args.enrich_ratio) cfg.derive.enrich_ratio = *args.enrich_ratio;
    if (args.linker_max) cfg.derive.linker_max = *args.linker_max;
    if (args.protection_threshold) cfg.protection_threshold = *args.protection_threshold;
    cfg.validate();

    ConstraintSet all;
    json log;
    log["format"] = "ms-steer/derivation-log/1";

    if (!args.xl_csv.empty()) {
        if (args.state_a.empty() || args.state_b.empty())
            throw config_error("--xl requires --state-a and --state-b condition labels");
        const std::vector<XlMeasurement> measurements = read_xl_csv_file(args.xl_csv);
        const ConstraintSet xl =
            derive_xl_constraints(measurements, args.state_a, args.state_b, cfg.derive);
        log["xl"] = {{"measurements", measurements.size()},
                     {"state_a", args.state_a},
                     {"state_b", args.state_b},
                     {"constraints", xl.size()}};
        all.append(xl);
    }

    if (!args.hdx_csv.empty()) {
        const std::vector<HdxPeptide> peptides = read_hdx_csv_file(args.hdx_csv);
        const auto [kept, excluded] = filter_peptides(peptides);
        const std::map<std::string, ResidueUptake> by_state = residue_uptake_by_state(kept);
        auto state_of = [&](const std::string& name) -> const ResidueUptake& {
            auto it = by_state.find(name);
            if (it == by_state.end())
                throw config_error("state '" + name + "' not present in the uptake table");
            return it->second;
        };

        ProtectionOptions popts;
        popts.threshold = cfg.protection_threshold;
        if (!args.partners.empty()) {
            for (const std::string& spec : args.partners) {
                const std::size_t eq = spec.find('=');
                if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
                    throw config_error("--partner expects CHAIN=PARTNER, got '" + spec + "'");
                popts.partner_of[spec.substr(0, eq)] = spec.substr(eq + 1);
            }
        } else {
            std::vector<std::string> chains;
            for (const HdxPeptide& p : kept) chains.push_back(p.chain);
            popts.partner_of = infer_partners(chains);
        }

        const ConstraintSet hdx =
            classify_protection(state_of(args.hdx_complex), state_of(args.hdx_reference), popts);

        json excluded_rows = json::array();
        for (const HdxPeptide& p : excluded)
            excluded_rows.push_back({{"chain", p.chain},
                                     {"start", p.start},
                                     {"end", p.end},
                                     {"state", p.state},
                                     {"sd", p.sd}});
        json protections = json::array();
        for (const auto& [key, value] :
             protection_map(state_of(args.hdx_complex), state_of(args.hdx_reference)))
            protections.push_back(
                {{"chain", key.first}, {"seq", key.second}, {"protection", value}});
        log["hdx"] = {{"peptides", peptides.size()},
                      {"kept", kept.size()},
                      {"excluded", std::move(excluded_rows)},
                      {"complex_state", args.hdx_complex},
                      {"reference_state", args.hdx_reference},
                      {"protection", std::move(protections)},
                      {"constraints", hdx.size()}};
        all.append(hdx);
    }

    const fs::path out(args.out_dir);
    write_text_file(out / "constraints.json", constraints_to_json(all));
    write_text_file(out / "derivation_log.json", log.dump(2));

    std::vector<std::string> inputs;
    if (!args.xl_csv.empty()) inputs.push_back(args.xl_csv);
    if (!args.hdx_csv.empty()) inputs.push_back(args.hdx_csv);
    if (!args.config_path.empty()) inputs.push_back(args.config_path);
    write_text_file(out / "derive_manifest.json",
                    manifest_skeleton("derive", cfg, inputs).dump(2));

    std::cout << "derived " << all.size() << " constraints -> "
              << (out / "constraints.json").string() << "\n";
}

// -----------------------------------------------------------------------
// steer

struct SteerArgs {
    std::string template_pdb;
    std::string constraints_path;
    std::vector<std::string> mixture_refs;
    std::vector<double> mixture_weights;
    double tau_sq = 0.01;
    std::string denoiser_cmd;
    int seeds = 1;
    std::optional<std::uint64_t> seed;
    std::optional<double> churn;
    std::optional<int> steps;
    std::optional<std::string> union_mode;
    std::optional<double> w_xl_pos, w_xl_neg, w_hdx_proxy, w_hdx_burial;
    std::optional<int> workers;
    bool run_subset_search = false;
    std::string config_path;
    std::string out_dir = ".";
};

json trajectory_to_json(const SampleResult& result) {
    json steps = json::array();
    for (const StepLog& s : result.trajectory) {
        json e;
        e["step"] = s.step;
        e["sigma"] = s.sigma;
        e["t"] = s.t;
        e["lambda"] = s.lambda;
        e["union_factor"] = s.union_factor;
        e["weights"] = s.applied_weight;
        json energies = json::object();
        for (std::size_t f = 0; f < kFamilyCount; ++f)
            if (s.family_energy[f])
                energies[family_name(static_cast<ConstraintFamily>(f))] = *s.family_energy[f];
        if (!energies.empty()) e["energies"] = std::move(energies);
        steps.push_back(std::move(e));
    }
    json j;
    j["steps"] = std::move(steps);
    json final_energies = json::object();
    for (std::size_t f = 0; f < kFamilyCount; ++f)
        if (result.final_family_energy[f])
            final_energies[family_name(static_cast<ConstraintFamily>(f))] =
                *result.final_family_energy[f];
    j["final_energies"] = std::move(final_energies);
    j["final_total_energy"] = result.final_total_energy;
    return j;
}

void cmd_steer(const SteerArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig::defaults()
                                             : load_config_file(args.config_path);
    if (args.seed) cfg.sampler.seed = *args.seed;
    if (args.churn) cfg.sampler.churn = *args.churn;
    if (args.steps) cfg.noise.n_steps = *args.steps;
    if (args.union_mode) cfg.sampler.union_mode = union_mode_from_name(*args.union_mode);
    if (args.w_xl_pos) cfg.sampler.weights.xl_pos = *args.w_xl_pos;
    if (args.w_xl_neg) cfg.sampler.weights.xl_neg = *args.w_xl_neg;
    if (args.w_hdx_proxy) cfg.sampler.weights.hdx_proxy = *args.w_hdx_proxy;
    if (args.w_hdx_burial) cfg.sampler.weights.hdx_burial = *args.w_hdx_burial;
    if (args.workers) cfg.workers = *args.workers;
    cfg.validate();
    if (args.seeds < 1) throw config_error("--seeds must be >= 1");

    const Structure tmpl = read_pdb_file(args.template_pdb);
    ConstraintSet constraints = read_constraints_file(args.constraints_path);

    std::unique_ptr<Denoiser> denoiser;
    if (!args.denoiser_cmd.empty()) {
        denoiser = std::make_unique<ExternalDenoiser>(args.denoiser_cmd);
    } else if (!args.mixture_refs.empty()) {
        std::vector<std::vector<Vec3>> refs;
        for (const std::string& path : args.mixture_refs) {
            const Structure ref = read_pdb_file(path);
            if (ref.atom_count() != tmpl.atom_count())
                throw config_error("reference '" + path + "' has " +
                                   std::to_string(ref.atom_count()) +
                                   " atoms, template has " + std::to_string(tmpl.atom_count()));
            refs.push_back(ref.coordinates());
        }
        std::vector<double> weights = args.mixture_weights;
        if (weights.empty())
            weights.assign(refs.size(), 1.0 / static_cast<double>(refs.size()));
        denoiser = std::make_unique<MixtureDenoiser>(std::move(refs), std::move(weights),
                                                     args.tau_sq);
    } else {
        throw config_error("configure a denoiser: --mixture references or --denoiser-cmd");
    }

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    std::vector<std::string> inputs{args.template_pdb, args.constraints_path};
    for (const std::string& p : args.mixture_refs) inputs.push_back(p);
    if (!args.config_path.empty()) inputs.push_back(args.config_path);

    if (args.run_subset_search) {
        const GenerateFn generate = [&](const ConstraintSet& subset, std::uint64_t seed) {
            SamplerConfig sc = cfg.sampler;
            sc.seed = seed;
            return reverse_sample(*denoiser, cfg.noise, tmpl, subset, cfg.potentials,
                                  cfg.schedules, sc)
                .structure;
        };
        const EvaluateFn evaluate = [&](const Structure& model, const ConstraintSet& subset) {
            const SatisfactionReport rep = satisfaction(model, subset, cfg.eval);
            SubsetOutcome outcome;
            outcome.satisfaction = rep.overall.value_or(0.0) / 100.0;
            outcome.satisfied = rep.satisfied_flags(subset.size());
            return outcome;
        };
        auto [selected, state] = subset_search(constraints, generate, evaluate, cfg.subsetting);
        write_text_file(out / "search_log.json", search_log_to_json(state, cfg.subsetting));
        write_text_file(out / "selected_constraints.json", constraints_to_json(selected));
        std::cout << "subset search kept " << selected.size() << " of " << constraints.size()
                  << " constraints\n";
        constraints = std::move(selected);
    }

    struct TrajectoryOutput {
        std::string pdb;
        std::string manifest;
    };
    std::vector<TrajectoryOutput> outputs(static_cast<std::size_t>(args.seeds));
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto run_one = [&](int i) {
        SamplerConfig sc = cfg.sampler;
        sc.seed = cfg.sampler.seed + static_cast<std::uint64_t>(i);
        const SampleResult result = reverse_sample(*denoiser, cfg.noise, tmpl, constraints,
                                                   cfg.potentials, cfg.schedules, sc);
        const SatisfactionReport rep = satisfaction(result.structure, constraints, cfg.eval);

        json manifest = manifest_skeleton("steer", cfg, inputs);
        manifest["trajectory_seed"] = sc.seed;
        manifest["trajectory_index"] = i;
        manifest["trajectory"] = trajectory_to_json(result);
        manifest["satisfaction"] = report_to_json(rep);

        outputs[static_cast<std::size_t>(i)] = {to_pdb(result.structure), manifest.dump(2)};
        std::ostringstream line;
        line << "model_" << std::setw(3) << std::setfill('0') << (i + 1)
             << ".pdb seed=" << sc.seed << " xl=" << pct_or_dash(rep.xl_pct)
             << "% hdx=" << pct_or_dash(rep.hdx_pct)
             << "% overall=" << pct_or_dash(rep.overall) << "%\n";
        std::cout << line.str();
    };

    const int pool = std::clamp(cfg.workers, 1, args.seeds);
    if (pool == 1) {
        for (int i = 0; i < args.seeds; ++i) run_one(i);
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < pool; ++w)
            threads.emplace_back([&] {
                for (int i = next.fetch_add(1); i < args.seeds; i = next.fetch_add(1)) {
                    try {
                        run_one(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        return;
                    }
                }
            });
        for (std::thread& t : threads) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    for (int i = 0; i < args.seeds; ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "%03d", i + 1);
        write_text_file(out / ("model_" + std::string(stem) + ".pdb"),
                        outputs[static_cast<std::size_t>(i)].pdb);
        write_text_file(out / ("manifest_" + std::string(stem) + ".json"),
                        outputs[static_cast<std::size_t>(i)].manifest);
    }
}

// -----------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::vector<std::string> models;
    std::string constraints_path;
    std::string reference;
    std::string receptor_chain;
    std::string ligand_chain;
    std::string scores_path;
    std::optional<double> interface_cutoff;
    std::string config_path;
    std::string out_dir = ".";
};

std::vector<double> read_score_lines(const std::string& path, std::size_t expected) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open '" + path + "'");
    std::vector<double> out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::string s = line;
        s.erase(0, s.find_first_not_of(" \t\r"));
        if (!s.empty()) s.erase(s.find_last_not_of(" \t\r") + 1);
        if (s.empty() || s[0] == '#') continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(s, &pos));
            if (pos != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw parse_error(path + ": row " + std::to_string(row) + ": '" + s +
                              "' is not a number");
        }
    }
    if (out.size() != expected)
        throw config_error(path + ": " + std::to_string(out.size()) + " scores for " +
                           std::to_string(expected) + " models");
    return out;
}

void cmd_evaluate(const EvaluateArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig::defaults()
                                             : load_config_file(args.config_path);
    if (args.interface_cutoff) cfg.interface_cutoff = *args.interface_cutoff;
    cfg.validate();

    const ConstraintSet constraints = read_constraints_file(args.constraints_path);
    std::vector<Structure> models;
    std::vector<std::string> names;
    for (const std::string& path : args.models) {
        models.push_back(read_pdb_file(path));
        names.push_back(fs::path(path).filename().string());
    }
    std::vector<double> scores;
    if (!args.scores_path.empty()) scores = read_score_lines(args.scores_path, models.size());

    const RankingResult ranking = rank_models(models, constraints, scores, cfg.eval);

    std::optional<Structure> reference;
    std::string receptor = args.receptor_chain, ligand = args.ligand_chain;
    std::vector<AccuracyReport> acc(models.size());
    if (!args.reference.empty()) {
        reference = read_pdb_file(args.reference);
        if (receptor.empty() || ligand.empty()) {
            if (reference->chains.size() < 2)
                throw config_error("reference needs two chains or explicit --receptor-chain/"
                                   "--ligand-chain");
            receptor = reference->chains[0].chain_id;
            ligand = reference->chains[1].chain_id;
        }
        for (std::size_t i = 0; i < models.size(); ++i)
            acc[i] = accuracy(models[i], *reference, receptor, ligand, cfg.interface_cutoff);
    }

    std::ostringstream csv;
    csv << "rank,model,xl_pct,hdx_pct,overall_pct";
    if (reference) csv << ",lrmsd,irmsd";
    if (!scores.empty()) csv << ",external_score";
    csv << "\n";
    json jmodels = json::array();
    std::cout << "rank  model                        xl%     hdx%    overall\n";
    for (std::size_t rank = 0; rank < ranking.ordered.size(); ++rank) {
        const RankedModel& rm = ranking.ordered[rank];
        const std::size_t i = static_cast<std::size_t>(rm.input_index);
        csv << (rank + 1) << "," << names[i] << "," << pct_or_dash(rm.report.xl_pct) << ","
            << pct_or_dash(rm.report.hdx_pct) << "," << pct_or_dash(rm.report.overall);
        if (reference) {
            char buf[64];
            std::snprintf(buf, sizeof buf, ",%.4f,%.4f", acc[i].lrmsd, acc[i].irmsd);
            csv << buf;
        }
        if (!scores.empty()) csv << "," << scores[i];
        csv << "\n";

        json jm = report_to_json(rm.report);
        jm["model"] = names[i];
        jm["rank"] = rank + 1;
        if (reference) {
            jm["lrmsd"] = acc[i].lrmsd;
            jm["irmsd"] = acc[i].irmsd;
        }
        if (!scores.empty()) jm["external_score"] = scores[i];
        jmodels.push_back(std::move(jm));

        char line[160];
        std::snprintf(line, sizeof line, "%4zu  %-26s %7s %7s %9s\n", rank + 1,
                      names[i].c_str(), pct_or_dash(rm.report.xl_pct).c_str(),
                      pct_or_dash(rm.report.hdx_pct).c_str(),
                      pct_or_dash(rm.report.overall).c_str());
        std::cout << line;
    }
    std::cout << "selected: " << names[static_cast<std::size_t>(ranking.best_input_index)]
              << "\n";
    auto stats_line = [](const char* label, const std::optional<FamilyStats>& s) {
        if (!s) return;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s: %.1f +/- %.1f\n", label, s->mean, s->sd);
        std::cout << buf;
    };
    stats_line("xl mean", ranking.xl);
    stats_line("hdx mean", ranking.hdx);
    stats_line("overall mean", ranking.overall);

    json doc;
    doc["format"] = "ms-steer/evaluation/1";
    doc["models"] = std::move(jmodels);
    doc["selected"] = names[static_cast<std::size_t>(ranking.best_input_index)];
    auto stats_json = [](const std::optional<FamilyStats>& s) -> json {
        if (!s) return nullptr;
        return {{"mean", s->mean}, {"sd", s->sd}};
    };
    doc["stats"] = {{"xl", stats_json(ranking.xl)},
                    {"hdx", stats_json(ranking.hdx)},
                    {"overall", stats_json(ranking.overall)}};

    const fs::path out(args.out_dir);
    write_text_file(out / "evaluation.json", doc.dump(2));
    write_text_file(out / "evaluation.csv", csv.str());

    std::vector<std::string> inputs = args.models;
    inputs.push_back(args.constraints_path);
    if (!args.reference.empty()) inputs.push_back(args.reference);
    if (!args.scores_path.empty()) inputs.push_back(args.scores_path);
    if (!args.config_path.empty()) inputs.push_back(args.config_path);
    write_text_file(out / "evaluate_manifest.json",
                    manifest_skeleton("evaluate", cfg, inputs).dump(2));
}

// -----------------------------------------------------------------------
// compare

struct CompareArgs {
    std::string guided_dir;
    std::string unguided_dir;
    std::string constraints_path;
    std::string config_path;
    std::string out_dir = ".";
};

std::pair<std::vector<Structure>, std::vector<std::string>> load_pdb_dir(
    const std::string& dir) {
    if (!fs::is_directory(dir)) throw config_error("'" + dir + "' is not a directory");
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pdb")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw config_error("no .pdb files in '" + dir + "'");
    std::pair<std::vector<Structure>, std::vector<std::string>> out;
    for (const std::string& p : paths) {
        out.first.push_back(read_pdb_file(p));
        out.second.push_back(fs::path(p).filename().string());
    }
    return out;
}

void cmd_compare(const CompareArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig::defaults()
                                             : load_config_file(args.config_path);
    cfg.validate();
    const ConstraintSet constraints = read_constraints_file(args.constraints_path);
    auto [guided, guided_names] = load_pdb_dir(args.guided_dir);
    auto [unguided, unguided_names] = load_pdb_dir(args.unguided_dir);

    const CompareTable table = posthoc_compare(guided, unguided, constraints, cfg.eval);

    std::ostringstream csv;
    csv << "rank,origin,model,xl_pct,hdx_pct,overall_pct\n";
    std::cout << "rank  origin    model                        overall\n";
    for (std::size_t rank = 0; rank < table.rows.size(); ++rank) {
        const CompareRow& row = table.rows[rank];
        const std::string& name = row.origin == "guided"
                                      ? guided_names[static_cast<std::size_t>(
                                            row.index_within_origin)]
                                      : unguided_names[static_cast<std::size_t>(
                                            row.index_within_origin)];
        csv << (rank + 1) << "," << row.origin << "," << name << ","
            << pct_or_dash(row.report.xl_pct) << "," << pct_or_dash(row.report.hdx_pct) << ","
            << pct_or_dash(row.report.overall) << "\n";
        char line[160];
        std::snprintf(line, sizeof line, "%4zu  %-8s  %-26s %8s\n", rank + 1,
                      row.origin.c_str(), name.c_str(), pct_or_dash(row.report.overall).c_str());
        std::cout << line;
    }

    const fs::path out(args.out_dir);
    write_text_file(out / "compare.csv", csv.str());
    write_text_file(out / "compare_manifest.json",
                    manifest_skeleton("compare", cfg,
                                      {args.constraints_path})
                        .dump(2));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guided diffusion sampling steered by mass-spectrometry-derived restraints"};
    app.require_subcommand(0, 1);
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults,
                 "Print the full default configuration as JSON and exit");

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand(
        "simulate", "Generate synthetic constraints from a ground-truth structure");
    simulate->add_option("truth", sim.truth, "Ground-truth complex PDB")
        ->required()
        ->check(CLI::ExistingFile);
    simulate->add_option("--truth-b", sim.truth_b,
                         "Second-state PDB: pairs linked here but distant in the main truth "
                         "become lower bounds")
        ->check(CLI::ExistingFile);
    simulate->add_option("--config", sim.config_path, "Run config JSON")
        ->check(CLI::ExistingFile);
    simulate->add_option("--out-dir", sim.out_dir, "Output directory");
    simulate->add_option("--xl-threshold", sim.xl_threshold, "Cross-link distance cutoff (A)");
    simulate->add_option("--protection-floor", sim.protection_floor,
                         "Minimum delta RSA counted as protected");
    simulate->add_option("--types", sim.residue_types, "Cross-linkable residue types");
    simulate->add_flag("--intra", sim.include_intra, "Also link residues within a chain");
    simulate->add_option("--n-false", sim.n_false, "Number of violated constraints to inject");
    simulate->add_option("--perturbation", sim.perturbation,
                         "Extra violation margin for injected constraints (A)");
    simulate->add_option("--noise-seed", sim.noise_seed, "Seed for noise injection");

    DeriveArgs der;
    CLI::App* derive =
        app.add_subcommand("derive", "Derive constraints from measurement tables");
    derive->add_option("--xl", der.xl_csv, "Cross-link intensity CSV")
        ->check(CLI::ExistingFile);
    derive->add_option("--hdx", der.hdx_csv, "Peptide uptake CSV")->check(CLI::ExistingFile);
    derive->add_option("--state-a", der.state_a, "Condition enriched toward upper bounds");
    derive->add_option("--state-b", der.state_b, "Condition enriched toward lower bounds");
    derive->add_option("--hdx-complex", der.hdx_complex, "Uptake state of the complex");
    derive->add_option("--hdx-reference", der.hdx_reference, "Reference uptake state");
    derive->add_option("--partner", der.partners,
                       "CHAIN=PARTNER contact mapping for protected residues (repeatable)");
    derive->add_option("--enrich-ratio", der.enrich_ratio, "Intensity ratio threshold");
    derive->add_option("--linker-max", der.linker_max,
                       "Override linker length from the table (A)");
    derive->add_option("--protection-threshold", der.protection_threshold,
                       "Uptake protection cut");
    derive->add_option("--config", der.config_path, "Run config JSON")
        ->check(CLI::ExistingFile);
    derive->add_option("--out-dir", der.out_dir, "Output directory");

    SteerArgs steer;
    CLI::App* steer_cmd = app.add_subcommand("steer", "Run guided reverse diffusion");
    steer_cmd->add_option("template", steer.template_pdb, "Topology template PDB")
        ->required()
        ->check(CLI::ExistingFile);
    steer_cmd->add_option("constraints", steer.constraints_path, "Constraints JSON")
        ->required()
        ->check(CLI::ExistingFile);
    steer_cmd->add_option("--mixture", steer.mixture_refs,
                          "Reference PDBs for the closed-form mixture denoiser");
    steer_cmd->add_option("--mixture-weights", steer.mixture_weights,
                          "Component weights (default uniform)");
    steer_cmd->add_option("--tau-sq", steer.tau_sq, "Mixture component variance (A^2)");
    steer_cmd->add_option("--denoiser-cmd", steer.denoiser_cmd,
                          "External denoiser command (JSON on stdin/stdout)");
    steer_cmd->add_option("--seeds", steer.seeds, "Number of trajectories");
    steer_cmd->add_option("--seed", steer.seed, "Base RNG seed");
    steer_cmd->add_option("--churn", steer.churn, "Reverse-step noise churn in [0,1]");
    steer_cmd->add_option("--steps", steer.steps, "Number of reverse steps");
    steer_cmd->add_option("--union-mode", steer.union_mode,
                          "Multi-family lambda ramp: auto, always, never");
    steer_cmd->add_option("--weight-xl-pos", steer.w_xl_pos, "Upper-bound family weight");
    steer_cmd->add_option("--weight-xl-neg", steer.w_xl_neg, "Lower-bound family weight");
    steer_cmd->add_option("--weight-hdx-proxy", steer.w_hdx_proxy, "Contact-proxy weight");
    steer_cmd->add_option("--weight-hdx-burial", steer.w_hdx_burial, "Burial family weight");
    steer_cmd->add_option("--workers", steer.workers, "Trajectory worker pool size");
    steer_cmd->add_flag("--subset-search", steer.run_subset_search,
                        "Select a consistent constraint subset before steering");
    steer_cmd->add_option("--config", steer.config_path, "Run config JSON")
        ->check(CLI::ExistingFile);
    steer_cmd->add_option("--out-dir", steer.out_dir, "Output directory");

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score models against constraints");
    evaluate->add_option("models", ev.models, "Model PDBs")->required()->expected(-1);
    evaluate->add_option("--constraints", ev.constraints_path, "Constraints JSON")
        ->required()
        ->check(CLI::ExistingFile);
    evaluate->add_option("--reference", ev.reference, "Reference complex for accuracy metrics")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--receptor-chain", ev.receptor_chain, "Receptor chain id");
    evaluate->add_option("--ligand-chain", ev.ligand_chain, "Ligand chain id");
    evaluate->add_option("--external-scores", ev.scores_path,
                         "One externally supplied score per model (tie-breaking)")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--interface-cutoff", ev.interface_cutoff,
                         "Interface CA-CA cutoff (A)");
    evaluate->add_option("--config", ev.config_path, "Run config JSON")
        ->check(CLI::ExistingFile);
    evaluate->add_option("--out-dir", ev.out_dir, "Output directory");

    CompareArgs cmp;
    CLI::App* compare =
        app.add_subcommand("compare", "Rank guided against unguided model sets");
    compare->add_option("guided_dir", cmp.guided_dir, "Directory of guided models")
        ->required();
    compare->add_option("unguided_dir", cmp.unguided_dir, "Directory of unguided models")
        ->required();
    compare->add_option("--constraints", cmp.constraints_path, "Constraints JSON")
        ->required()
        ->check(CLI::ExistingFile);
    compare->add_option("--config", cmp.config_path, "Run config JSON")
        ->check(CLI::ExistingFile);
    compare->add_option("--out-dir", cmp.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (print_defaults) {
        std::cout << config_to_json(RunConfig::defaults()) << "\n";
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return 2;
    }

    try {
        if (simulate->parsed()) cmd_simulate(sim);
        else if (derive->parsed()) cmd_derive(der);
        else if (steer_cmd->parsed()) cmd_steer(steer);
        else if (evaluate->parsed()) cmd_evaluate(ev);
        else cmd_compare(cmp);
        return 0;
    } catch (const resolution_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const no_interface_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const correspondence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const degeneracy_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ms_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
