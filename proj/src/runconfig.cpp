// SPDX-License-Identifier: Apache-2.0

#include "mssteer/runconfig.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mssteer/errors.hpp"

namespace mssteer {

using nlohmann::json;

void RunConfig::validate() const {
    noise.validate();
    sampler.validate();
    potentials.validate();
    schedules.validate();
    subsetting.validate();
    synth.validate();
    if (!(derive.enrich_ratio > 1.0)) throw config_error("derive.enrich_ratio must be > 1");
    if (derive.linker_max < 0.0) throw config_error("derive.linker_max must be >= 0");
    if (!(protection_threshold >= 0.0))
        throw config_error("protection_threshold must be >= 0");
    if (!(eval.hdx_delta_threshold >= 0.0))
        throw config_error("eval.hdx_delta_threshold must be >= 0");
    if (eval.sasa_points < 92) throw config_error("eval.sasa_points must be >= 92");
    if (!(interface_cutoff > 0.0)) throw config_error("interface_cutoff must be > 0");
    if (workers < 1) throw config_error("workers must be >= 1");
}

const char* union_mode_name(UnionMode m) {
    switch (m) {
        case UnionMode::always: return "always";
        case UnionMode::never: return "never";
        default: return "auto";
    }
}

UnionMode union_mode_from_name(const std::string& name) {
    if (name == "auto") return UnionMode::automatic;
    if (name == "always") return UnionMode::always;
    if (name == "never") return UnionMode::never;
    throw config_error("union_mode must be auto, always, or never (got '" + name + "')");
}

namespace {

void require_exact(const json& j, std::initializer_list<const char*> keys, const char* where) {
    if (!j.is_object()) throw parse_error(std::string(where) + " must be a JSON object");
    for (const char* k : keys)
        if (!j.contains(k))
            throw parse_error(std::string(where) + " is missing key '" + k + "'");
    for (const auto& [key, value] : j.items()) {
        (void)value;
        bool known = false;
        for (const char* k : keys)
            if (key == k) known = true;
        if (!known) throw parse_error(std::string(where) + " has unknown key '" + key + "'");
    }
}

}  // namespace

std::string config_to_json(const RunConfig& c) {
    json j;
    j["format"] = "ms-steer/config/1";
    j["sampler"] = {{"seed", c.sampler.seed},
                    {"n_steps", c.noise.n_steps},
                    {"sigma_max", c.noise.sigma_max},
                    {"sigma_min", c.noise.sigma_min},
                    {"churn", c.sampler.churn},
                    {"union_mode", union_mode_name(c.sampler.union_mode)}};
    j["weights"] = {{"xl_pos", c.sampler.weights.xl_pos},
                    {"xl_neg", c.sampler.weights.xl_neg},
                    {"hdx_proxy", c.sampler.weights.hdx_proxy},
                    {"hdx_burial", c.sampler.weights.hdx_burial}};
    j["potentials"] = {{"k", c.potentials.k},
                       {"sigma", c.potentials.sigma},
                       {"burial_ref", c.potentials.burial_ref},
                       {"tau", c.potentials.tau},
                       {"d_base", c.potentials.d_base},
                       {"w_s", c.potentials.w_s},
                       {"softmin_beta", c.potentials.softmin_beta}};
    j["schedules"] = json::parse(schedules_to_json(c.schedules));
    j["subsetting"] = {{"n_subsets", c.subsetting.n_subsets},
                       {"subset_size", c.subsetting.subset_size},
                       {"keep_fraction", c.subsetting.keep_fraction},
                       {"n_rounds", c.subsetting.n_rounds},
                       {"seed", c.subsetting.seed},
                       {"n_workers", c.subsetting.n_workers}};
    j["synth"] = {{"xl_residue_types", c.synth.xl_residue_types},
                  {"xl_threshold", c.synth.xl_threshold},
                  {"hdx_protection_floor", c.synth.hdx_protection_floor},
                  {"include_intra_chain", c.synth.include_intra_chain},
                  {"sasa_probe", c.synth.sasa_probe},
                  {"sasa_points", c.synth.sasa_points},
                  {"noise",
                   {{"n_false_constraints", c.synth.noise.n_false_constraints},
                    {"perturbation", c.synth.noise.perturbation}}}};
    j["derive"] = {{"enrich_ratio", c.derive.enrich_ratio},
                   {"linker_max", c.derive.linker_max},
                   {"protection_threshold", c.protection_threshold}};
    j["eval"] = {{"hdx_delta_threshold", c.eval.hdx_delta_threshold},
                 {"sasa_probe", c.eval.sasa_probe},
                 {"sasa_points", c.eval.sasa_points},
                 {"interface_cutoff", c.interface_cutoff}};
    j["workers"] = c.workers;
    return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c;
    try {
        require_exact(j,
                      {"format", "sampler", "weights", "potentials", "schedules", "subsetting",
                       "synth", "derive", "eval", "workers"},
                      "config");
        if (j.at("format").get<std::string>() != "ms-steer/config/1")
            throw parse_error("config format must be 'ms-steer/config/1'");

        const json& s = j.at("sampler");
        require_exact(s, {"seed", "n_steps", "sigma_max", "sigma_min", "churn", "union_mode"},
                      "config.sampler");
        c.sampler.seed = s.at("seed").get<std::uint64_t>();
        c.noise.n_steps = s.at("n_steps").get<int>();
        c.noise.sigma_max = s.at("sigma_max").get<double>();
        c.noise.sigma_min = s.at("sigma_min").get<double>();
        c.sampler.churn = s.at("churn").get<double>();
        c.sampler.union_mode = union_mode_from_name(s.at("union_mode").get<std::string>());

        const json& w = j.at("weights");
        require_exact(w, {"xl_pos", "xl_neg", "hdx_proxy", "hdx_burial"}, "config.weights");
        c.sampler.weights.xl_pos = w.at("xl_pos").get<double>();
        c.sampler.weights.xl_neg = w.at("xl_neg").get<double>();
        c.sampler.weights.hdx_proxy = w.at("hdx_proxy").get<double>();
        c.sampler.weights.hdx_burial = w.at("hdx_burial").get<double>();

        const json& p = j.at("potentials");
        require_exact(p, {"k", "sigma", "burial_ref", "tau", "d_base", "w_s", "softmin_beta"},
                      "config.potentials");
        c.potentials.k = p.at("k").get<double>();
        c.potentials.sigma = p.at("sigma").get<double>();
        c.potentials.burial_ref = p.at("burial_ref").get<double>();
        c.potentials.tau = p.at("tau").get<double>();
        c.potentials.d_base = p.at("d_base").get<double>();
        c.potentials.w_s = p.at("w_s").get<double>();
        c.potentials.softmin_beta = p.at("softmin_beta").get<double>();

        c.schedules = schedules_from_json(j.at("schedules").dump());

        const json& ss = j.at("subsetting");
        require_exact(ss, {"n_subsets", "subset_size", "keep_fraction", "n_rounds", "seed",
                           "n_workers"},
                      "config.subsetting");
        c.subsetting.n_subsets = ss.at("n_subsets").get<int>();
        c.subsetting.subset_size = ss.at("subset_size").get<int>();
        c.subsetting.keep_fraction = ss.at("keep_fraction").get<double>();
        c.subsetting.n_rounds = ss.at("n_rounds").get<int>();
        c.subsetting.seed = ss.at("seed").get<std::uint64_t>();
        c.subsetting.n_workers = ss.at("n_workers").get<int>();

        const json& sy = j.at("synth");
        require_exact(sy, {"xl_residue_types", "xl_threshold", "hdx_protection_floor",
                           "include_intra_chain", "sasa_probe", "sasa_points", "noise"},
                      "config.synth");
        c.synth.xl_residue_types = sy.at("xl_residue_types").get<std::vector<std::string>>();
        c.synth.xl_threshold = sy.at("xl_threshold").get<double>();
        c.synth.hdx_protection_floor = sy.at("hdx_protection_floor").get<double>();
        c.synth.include_intra_chain = sy.at("include_intra_chain").get<bool>();
        c.synth.sasa_probe = sy.at("sasa_probe").get<double>();
        c.synth.sasa_points = sy.at("sasa_points").get<int>();
        const json& noise = sy.at("noise");
        require_exact(noise, {"n_false_constraints", "perturbation"}, "config.synth.noise");
        c.synth.noise.n_false_constraints = noise.at("n_false_constraints").get<int>();
        c.synth.noise.perturbation = noise.at("perturbation").get<double>();

        const json& d = j.at("derive");
        require_exact(d, {"enrich_ratio", "linker_max", "protection_threshold"}, "config.derive");
        c.derive.enrich_ratio = d.at("enrich_ratio").get<double>();
        c.derive.linker_max = d.at("linker_max").get<double>();
        c.protection_threshold = d.at("protection_threshold").get<double>();

        const json& e = j.at("eval");
        require_exact(e, {"hdx_delta_threshold", "sasa_probe", "sasa_points", "interface_cutoff"},
                      "config.eval");
        c.eval.hdx_delta_threshold = e.at("hdx_delta_threshold").get<double>();
        c.eval.sasa_probe = e.at("sasa_probe").get<double>();
        c.eval.sasa_points = e.at("sasa_points").get<int>();
        c.interface_cutoff = e.at("interface_cutoff").get<double>();

        c.workers = j.at("workers").get<int>();
    } catch (const json::exception& e) {
        throw parse_error(std::string("config field error: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return config_from_json(buf.str());
    } catch (const parse_error& e) {
        throw parse_error(path + ": " + e.what());
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a:") + out;
}

std::string fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open '" + path + "' for hashing");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_hex(buf.str());
}

}  // namespace mssteer
