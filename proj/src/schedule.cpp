// SPDX-License-Identifier: Apache-2.0

#include "mssteer/schedule.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace mssteer {

double StageSchedule::value_at(double t) const {
    if (!(t >= 0.0 && t <= 1.0))
        throw config_error("schedule time " + std::to_string(t) + " outside [0,1]");
    for (const auto& s : stages) {
        if (t > s.t_low && t <= s.t_high) return s.weight;
        if (t == 0.0 && s.t_low == 0.0) return s.weight;
    }
    throw config_error("schedule stages do not cover t=" + std::to_string(t));
}

double StageSchedule::max_weight() const {
    double m = 0.0;
    for (const auto& s : stages) m = std::max(m, s.weight);
    return m;
}

void StageSchedule::validate() const {
    if (stages.empty()) throw config_error("schedule has no stages");
    if (eval_interval < 1) throw config_error("eval_interval must be >= 1");
    for (const auto& s : stages) {
        if (!(s.t_low < s.t_high)) throw config_error("schedule stage with t_low >= t_high");
        if (!std::isfinite(s.weight) || s.weight < 0.0)
            throw config_error("schedule weight must be finite and >= 0");
    }
    // Contiguous descending partition of (0,1].
    if (stages.front().t_high != 1.0) throw config_error("schedule must start at t_high=1");
    if (stages.back().t_low != 0.0) throw config_error("schedule must end at t_low=0");
    for (std::size_t i = 1; i < stages.size(); ++i) {
        if (stages[i].t_high != stages[i - 1].t_low)
            throw config_error("schedule stages not contiguous");
    }
}

void LambdaInterp::validate() const {
    if (alpha == 0.0) throw config_error("union_lambda alpha must be nonzero");
    if (!std::isfinite(start) || !std::isfinite(end) || !std::isfinite(alpha))
        throw config_error("union_lambda parameters must be finite");
}

double union_lambda(double s, const LambdaInterp& interp) {
    return interp.start +
           (interp.end - interp.start) * (1.0 - std::exp(interp.alpha * s)) /
               (1.0 - std::exp(interp.alpha));
}

bool should_apply(int step_index, int eval_interval) {
    return step_index % eval_interval == 0;
}

GuidanceSchedules GuidanceSchedules::defaults() {
    GuidanceSchedules g;
    g.hdx.stages = {{0.95, 1.0, 0.0}, {0.7, 0.95, 0.5}, {0.0, 0.7, 2.0}};
    g.hdx.eval_interval = 1;
    g.xl.stages = {{0.75, 1.0, 0.0}, {0.25, 0.75, 0.5}, {0.0, 0.25, 1.0}};
    g.xl.eval_interval = 4;
    g.xl_base_weight = 1.0;
    g.lambda = LambdaInterp{};
    return g;
}

void GuidanceSchedules::validate() const {
    hdx.validate();
    xl.validate();
    lambda.validate();
    if (!(xl_base_weight >= 0.0)) throw config_error("xl_base_weight must be >= 0");
}

double hdx_weight(double t) {
    static const StageSchedule s = GuidanceSchedules::defaults().hdx;
    return s.value_at(t);
}

double xl_weight_fraction(double t) {
    static const StageSchedule s = GuidanceSchedules::defaults().xl;
    return s.value_at(t);
}

namespace {

using nlohmann::json;

json stage_schedule_to_json(const StageSchedule& s) {
    json stages = json::array();
    for (const auto& st : s.stages)
        stages.push_back({{"t_low", st.t_low}, {"t_high", st.t_high}, {"weight", st.weight}});
    return {{"eval_interval", s.eval_interval}, {"stages", stages}};
}

void require_keys(const json& j, std::initializer_list<const char*> keys, const char* where) {
    for (const char* k : keys)
        if (!j.contains(k)) throw parse_error(std::string(where) + ": missing key '" + k + "'");
    for (const auto& [k, v] : j.items()) {
        (void)v;
        bool known = false;
        for (const char* want : keys) known = known || k == want;
        if (!known) throw parse_error(std::string(where) + ": unknown key '" + k + "'");
    }
}

StageSchedule stage_schedule_from_json(const json& j, const char* where) {
    require_keys(j, {"eval_interval", "stages"}, where);
    StageSchedule s;
    s.eval_interval = j.at("eval_interval").get<int>();
    for (const auto& st : j.at("stages")) {
        require_keys(st, {"t_low", "t_high", "weight"}, where);
        s.stages.push_back(
            {st.at("t_low").get<double>(), st.at("t_high").get<double>(), st.at("weight").get<double>()});
    }
    s.validate();
    return s;
}

}  // namespace

std::string schedules_to_json(const GuidanceSchedules& s) {
    json j = {{"hdx", stage_schedule_to_json(s.hdx)},
              {"xl", stage_schedule_to_json(s.xl)},
              {"xl_base_weight", s.xl_base_weight},
              {"union_lambda",
               {{"start", s.lambda.start}, {"end", s.lambda.end}, {"alpha", s.lambda.alpha}}}};
    return j.dump(2);
}

GuidanceSchedules schedules_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("schedules JSON: ") + e.what());
    }
    try {
        require_keys(j, {"hdx", "xl", "xl_base_weight", "union_lambda"}, "schedules");
        GuidanceSchedules g;
        g.hdx = stage_schedule_from_json(j.at("hdx"), "schedules.hdx");
        g.xl = stage_schedule_from_json(j.at("xl"), "schedules.xl");
        g.xl_base_weight = j.at("xl_base_weight").get<double>();
        const json& lam = j.at("union_lambda");
        require_keys(lam, {"start", "end", "alpha"}, "schedules.union_lambda");
        g.lambda = {lam.at("start").get<double>(), lam.at("end").get<double>(),
                    lam.at("alpha").get<double>()};
        g.validate();
        return g;
    } catch (const json::exception& e) {
        throw parse_error(std::string("schedules JSON: ") + e.what());
    }
}

}  // namespace mssteer
