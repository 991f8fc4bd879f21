// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "mssteer/engine.hpp"
#include "mssteer/eval.hpp"
#include "mssteer/msdata.hpp"
#include "mssteer/potentials.hpp"
#include "mssteer/schedule.hpp"
#include "mssteer/synth.hpp"

namespace mssteer {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything a run needs besides file paths. Serializes to one JSON document
/// so defaults are visible, diffable, and echoed into every manifest.
struct RunConfig {
    NoiseSchedule noise;
    SamplerConfig sampler;
    PotentialParams potentials;
    GuidanceSchedules schedules = GuidanceSchedules::defaults();
    SubsetSearchConfig subsetting;
    SynthConfig synth;
    XlDeriveOptions derive;
    double protection_threshold = 0.05;  // uptake-protection cut for derive
    EvalOptions eval;
    double interface_cutoff = 10.0;
    int workers = 1;  // trajectory pool size for multi-seed runs

    static RunConfig defaults() { return RunConfig{}; }
    void validate() const;
};

std::string config_to_json(const RunConfig& c);
/// Strict parse: unknown or missing keys anywhere are errors.
RunConfig config_from_json(const std::string& text);
RunConfig load_config_file(const std::string& path);

const char* union_mode_name(UnionMode m);
UnionMode union_mode_from_name(const std::string& name);

/// FNV-1a (64-bit) content hash, "fnv1a:<16 hex digits>"; used for manifest
/// input fingerprints.
std::string fnv1a_hex(const std::string& bytes);
std::string fnv1a_file(const std::string& path);

}  // namespace mssteer
