// SPDX-License-Identifier: Apache-2.0

#include "mssteer/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mssteer/errors.hpp"
#include "mssteer/rng.hpp"

namespace mssteer {

void NoiseSchedule::validate() const {
    if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
        throw config_error("noise schedule requires sigma_max > sigma_min > 0");
    if (n_steps < 2) throw config_error("noise schedule requires n_steps >= 2");
}

double NoiseSchedule::sigma(int i) const {
    const double frac = static_cast<double>(i) / static_cast<double>(n_steps);
    return sigma_max * std::pow(sigma_min / sigma_max, frac);
}

double NoiseSchedule::time_of(int i) const {
    return 1.0 - static_cast<double>(i) / static_cast<double>(n_steps);
}

double NoiseSchedule::progress_of(int i) const {
    if (n_steps <= 1) return 0.0;
    return static_cast<double>(i) / static_cast<double>(n_steps - 1);
}

MixtureDenoiser::MixtureDenoiser(std::vector<std::vector<Vec3>> references,
                                 std::vector<double> component_weights, double tau_sq)
    : references_(std::move(references)), weights_(std::move(component_weights)),
      tau_sq_(tau_sq) {
    if (references_.empty()) throw config_error("mixture denoiser needs at least one reference");
    if (weights_.size() != references_.size())
        throw config_error("mixture denoiser: one weight per reference required");
    const std::size_t n = references_.front().size();
    if (n == 0) throw config_error("mixture denoiser: empty reference coordinates");
    for (const auto& ref : references_)
        if (ref.size() != n)
            throw config_error("mixture denoiser: references must share the atom count");
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w > 0.0)) throw config_error("mixture denoiser: weights must be > 0");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw config_error("mixture denoiser: weights must sum to 1");
    if (!(tau_sq_ > 0.0)) throw config_error("mixture denoiser: tau_sq must be > 0");
}

std::vector<double> MixtureDenoiser::responsibilities(std::span<const Vec3> x,
                                                      double sigma) const {
    if (x.size() != references_.front().size())
        throw correspondence_error("coordinate count does not match the mixture references");
    if (!(sigma > 0.0)) throw config_error("sigma must be > 0");
    const double var = sigma * sigma + tau_sq_;
    std::vector<double> log_r(references_.size());
    for (std::size_t k = 0; k < references_.size(); ++k) {
        double sq = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) sq += norm_sq(x[a] - references_[k][a]);
        log_r[k] = std::log(weights_[k]) - sq / (2.0 * var);
    }
    const double shift = *std::max_element(log_r.begin(), log_r.end());
    double z = 0.0;
    for (double& l : log_r) {
        l = std::exp(l - shift);
        z += l;
    }
    for (double& l : log_r) l /= z;
    return log_r;
}

std::vector<Vec3> MixtureDenoiser::predict_x0(std::span<const Vec3> x, double sigma) const {
    const std::vector<double> resp = responsibilities(x, sigma);
    const double var = sigma * sigma + tau_sq_;
    const double data_frac = sigma * sigma / var;  // weight on the blended reference
    const double self_frac = tau_sq_ / var;        // shrink toward x
    std::vector<Vec3> out(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) {
        Vec3 mean{};
        for (std::size_t k = 0; k < references_.size(); ++k)
            mean += references_[k][a] * resp[k];
        out[a] = mean * data_frac + x[a] * self_frac;
    }
    return out;
}

std::vector<Vec3> MixtureDenoiser::analytic_score(std::span<const Vec3> x, double sigma) const {
    const std::vector<double> resp = responsibilities(x, sigma);
    const double var = sigma * sigma + tau_sq_;
    std::vector<Vec3> out(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) {
        Vec3 mean{};
        for (std::size_t k = 0; k < references_.size(); ++k)
            mean += references_[k][a] * resp[k];
        out[a] = (mean - x[a]) * (1.0 / var);
    }
    return out;
}

std::vector<Vec3> score_from_x0(std::span<const Vec3> x, std::span<const Vec3> x0_hat,
                                double sigma) {
    if (x.size() != x0_hat.size())
        throw correspondence_error("score_from_x0: coordinate shapes differ");
    if (!(sigma > 0.0)) throw config_error("sigma must be > 0");
    const double inv_var = 1.0 / (sigma * sigma);
    std::vector<Vec3> out(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) out[a] = (x0_hat[a] - x[a]) * inv_var;
    return out;
}

std::vector<Vec3> guided_score(std::span<const Vec3> base_score,
                               std::span<const Vec3> potential_gradient, double lambda_t) {
    if (base_score.size() != potential_gradient.size())
        throw correspondence_error("guided_score: shapes differ");
    if (!(lambda_t >= 0.0)) throw config_error("lambda_t must be >= 0");
    std::vector<Vec3> out(base_score.size());
    for (std::size_t a = 0; a < base_score.size(); ++a)
        out[a] = base_score[a] - potential_gradient[a] * lambda_t;
    return out;
}

void SamplerConfig::validate() const {
    if (!(churn >= 0.0)) throw config_error("churn must be >= 0");
    weights.validate();
}

namespace {

bool all_finite(std::span<const Vec3> coords) {
    for (const Vec3& v : coords)
        if (!is_finite(v)) return false;
    return true;
}

}  // namespace

SampleResult reverse_sample(const Denoiser& denoiser, const NoiseSchedule& noise,
                            const Structure& tmpl, const ConstraintSet& constraints,
                            const PotentialParams& params, const GuidanceSchedules& schedules,
                            const SamplerConfig& config) {
    noise.validate();
    params.validate();
    schedules.validate();
    config.validate();

    const std::size_t n_atoms = tmpl.atom_count();
    if (n_atoms == 0) throw config_error("template structure has no atoms");

    // Constraint resolution failures must surface before any sampling work.
    StructureIndex idx(tmpl);
    CompiledConstraints compiled(idx, constraints);

    NormalSampler rng(config.seed);
    std::vector<Vec3> x(n_atoms);
    for (Vec3& v : x) v = rng.vec3() * noise.sigma_max;

    SampleResult result;
    result.trajectory.reserve(static_cast<std::size_t>(noise.n_steps));

    for (int i = 0; i < noise.n_steps; ++i) {
        const double sig = noise.sigma(i);
        const double sig_next = noise.sigma(i + 1);
        const double t = noise.time_of(i);

        const std::vector<Vec3> x0 = denoiser.predict_x0(x, sig);
        if (x0.size() != n_atoms)
            throw correspondence_error("denoiser output atom count differs from the template");
        if (!all_finite(x0))
            throw divergence_error("non-finite denoised prediction at step " + std::to_string(i));

        std::vector<Vec3> score = score_from_x0(x, x0, sig);

        StepLog log;
        log.step = i;
        log.sigma = sig;
        log.t = t;

        if (!constraints.empty()) {
            const double hdx_stage =
                should_apply(i, schedules.hdx.eval_interval) ? schedules.hdx.value_at(t) : 0.0;
            const double xl_stage =
                should_apply(i, schedules.xl.eval_interval)
                    ? schedules.xl_base_weight * schedules.xl.value_at(t)
                    : 0.0;

            std::array<double, kFamilyCount> w{};
            w[static_cast<std::size_t>(ConstraintFamily::xl_pos)] =
                config.weights.xl_pos * xl_stage;
            w[static_cast<std::size_t>(ConstraintFamily::xl_neg)] =
                config.weights.xl_neg * xl_stage;
            w[static_cast<std::size_t>(ConstraintFamily::hdx_proxy)] =
                config.weights.hdx_proxy * hdx_stage;
            w[static_cast<std::size_t>(ConstraintFamily::hdx_burial)] =
                config.weights.hdx_burial * hdx_stage;

            int active = 0;
            for (ConstraintFamily f : kAllFamilies) {
                const auto fi = static_cast<std::size_t>(f);
                if (compiled.family_count(f) == 0) w[fi] = 0.0;
                if (w[fi] > 0.0) ++active;
            }
            log.applied_weight = w;

            if (active > 0) {
                const bool apply_union =
                    config.union_mode == UnionMode::always ||
                    (config.union_mode == UnionMode::automatic && active >= 2);
                if (apply_union)
                    log.union_factor = union_lambda(noise.progress_of(i), schedules.lambda);

                std::vector<Vec3> grad(n_atoms, Vec3{});
                for (ConstraintFamily f : kAllFamilies) {
                    const auto fi = static_cast<std::size_t>(f);
                    if (w[fi] == 0.0) continue;
                    const EnergyReport rep = eval_family(compiled, f, x0, params);
                    log.family_energy[fi] = rep.total_energy;
                    for (std::size_t a = 0; a < n_atoms; ++a)
                        grad[a] += rep.gradient[a] * w[fi];
                }
                // Normalizing by sigma^2 makes the guided update a plain
                // gradient-descent step on x0_hat, independent of the noise
                // level; without it the injection diverges at large sigma.
                log.lambda = log.union_factor / (sig * sig);
                score = guided_score(score, grad, log.lambda);
            }
        }

        const double dsig2 = sig * sig - sig_next * sig_next;
        const double drift = 0.5 * (1.0 + config.churn * config.churn) * dsig2;
        for (std::size_t a = 0; a < n_atoms; ++a) x[a] += score[a] * drift;
        if (config.churn > 0.0) {
            const double amp = config.churn * std::sqrt(dsig2);
            for (std::size_t a = 0; a < n_atoms; ++a) x[a] += rng.vec3() * amp;
        }
        if (!all_finite(x))
            throw divergence_error("non-finite coordinates at step " + std::to_string(i));

        result.trajectory.push_back(std::move(log));
    }

    for (ConstraintFamily f : kAllFamilies) {
        if (compiled.family_count(f) == 0) continue;
        const EnergyReport rep = eval_family(compiled, f, x, params);
        result.final_family_energy[static_cast<std::size_t>(f)] = rep.total_energy;
        result.final_total_energy += rep.total_energy;
    }
    result.structure = tmpl.with_coordinates(x);
    return result;
}

}  // namespace mssteer
