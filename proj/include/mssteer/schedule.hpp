// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mssteer/errors.hpp"

namespace mssteer {

/// One stage of a piecewise-constant weight map, active for t in (t_low, t_high].
/// The stage with t_low == 0 also covers t == 0.
struct Stage {
    double t_low = 0.0;
    double t_high = 1.0;
    double weight = 0.0;
};

/// Piecewise-constant weight over diffusion time t in [0,1] plus the step
/// interval at which the associated potential family is evaluated.
struct StageSchedule {
    std::vector<Stage> stages;  // descending in t, contiguous, covering (0,1]
    int eval_interval = 1;

    double value_at(double t) const;  // throws config_error outside [0,1]
    double max_weight() const;
    void validate() const;
};

/// Exponential interpolation coefficients for the multi-family guidance ramp.
struct LambdaInterp {
    double start = 8.0;
    double end = 0.0;
    double alpha = -2.0;

    void validate() const;  // alpha != 0, all finite
};

/// start + (end - start) * (1 - e^{alpha s}) / (1 - e^{alpha}); hits both
/// endpoints exactly, monotone for alpha < 0.
double union_lambda(double s, const LambdaInterp& interp = LambdaInterp{});

/// True iff a family with the given interval evaluates at this step.
bool should_apply(int step_index, int eval_interval);

/// Bundle of the per-family schedules used by the sampler.
struct GuidanceSchedules {
    StageSchedule hdx;          // absolute weight for both HDX families
    StageSchedule xl;           // fraction multiplying xl_base_weight
    double xl_base_weight = 1.0;
    LambdaInterp lambda;

    static GuidanceSchedules defaults();
    void validate() const;
};

/// Default-schedule conveniences.
double hdx_weight(double t);
double xl_weight_fraction(double t);

/// Lossless JSON round trip (used by the run config and manifest).
std::string schedules_to_json(const GuidanceSchedules& s);
GuidanceSchedules schedules_from_json(const std::string& text);

}  // namespace mssteer
