// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mssteer/constraints.hpp"
#include "mssteer/geometry.hpp"
#include "mssteer/potentials.hpp"
#include "mssteer/schedule.hpp"
#include "mssteer/vec3.hpp"

namespace mssteer {

/// Geometric noise ladder for the variance-exploding process. sigma(0) is
/// sigma_max (pure noise), sigma(n_steps) is sigma_min.
struct NoiseSchedule {
    double sigma_max = 160.0;
    double sigma_min = 0.05;
    int n_steps = 200;

    void validate() const;
    /// i in [0, n_steps].
    double sigma(int i) const;
    /// Diffusion time of step i: 1 at pure noise, decreasing to 1/n_steps at
    /// the last step. Stage schedules are keyed on this.
    double time_of(int i) const;
    /// Trajectory progress for the union ramp: 0 at step 0, 1 at the last
    /// step.
    double progress_of(int i) const;
};

class Denoiser {
public:
    virtual ~Denoiser() = default;
    /// Returns the denoised prediction for noisy coordinates at noise level
    /// sigma. Output has the same atom count as the input.
    virtual std::vector<Vec3> predict_x0(std::span<const Vec3> x, double sigma) const = 0;
};

/// Closed-form denoiser for a Gaussian-mixture prior: K reference coordinate
/// sets blurred by per-component variance tau_sq. Its posterior mean is exact,
/// which makes the whole sampler verifiable end to end.
class MixtureDenoiser : public Denoiser {
public:
    MixtureDenoiser(std::vector<std::vector<Vec3>> references,
                    std::vector<double> component_weights, double tau_sq);

    std::vector<Vec3> predict_x0(std::span<const Vec3> x, double sigma) const override;

    /// Posterior component responsibilities at noise level sigma.
    std::vector<double> responsibilities(std::span<const Vec3> x, double sigma) const;

    /// Analytic mixture score: grad log p_sigma(x). Equals the score implied
    /// by predict_x0 through (x0_hat - x)/sigma^2.
    std::vector<Vec3> analytic_score(std::span<const Vec3> x, double sigma) const;

    const std::vector<std::vector<Vec3>>& references() const { return references_; }
    const std::vector<double>& component_weights() const { return weights_; }
    double tau_sq() const { return tau_sq_; }

private:
    std::vector<std::vector<Vec3>> references_;
    std::vector<double> weights_;
    double tau_sq_ = 0.01;
};

/// Adapter that shells out to an external denoiser process. The command
/// receives {"sigma": s, "coords": [[x,y,z], ...]} on stdin and must print
/// {"coords": [[x,y,z], ...]} of identical shape on stdout.
class ExternalDenoiser : public Denoiser {
public:
    explicit ExternalDenoiser(std::string command);
    std::vector<Vec3> predict_x0(std::span<const Vec3> x, double sigma) const override;

private:
    std::string command_;
};

/// Tweedie score implied by a denoised prediction: (x0_hat - x)/sigma^2.
std::vector<Vec3> score_from_x0(std::span<const Vec3> x, std::span<const Vec3> x0_hat,
                                double sigma);

/// base_score - lambda_t * potential_gradient.
std::vector<Vec3> guided_score(std::span<const Vec3> base_score,
                               std::span<const Vec3> potential_gradient, double lambda_t);

/// Whether the union-of-families lambda ramp multiplies the guidance strength.
enum class UnionMode {
    automatic,  // applied when >= 2 constraint families carry weight this step
    always,
    never,
};

struct SamplerConfig {
    std::uint64_t seed = 0;
    /// Noise churn for the stochastic reverse step; 0 gives the deterministic
    /// ODE-like path, 1 the full reverse SDE.
    double churn = 1.0;
    /// Per-family base multipliers on top of the stage schedules.
    FamilyWeights weights;
    UnionMode union_mode = UnionMode::automatic;

    void validate() const;
};

/// One reverse step in the trajectory log.
struct StepLog {
    int step = 0;
    double sigma = 0.0;
    double t = 0.0;
    /// Effective multiplier per family (stage weight x base weight), indexed
    /// by ConstraintFamily. Zero when the family was skipped this step.
    std::array<double, kFamilyCount> applied_weight{};
    /// Union ramp factor folded into lambda (1 when inactive).
    double union_factor = 1.0;
    /// Final scale on the potential gradient inside the score.
    double lambda = 0.0;
    /// Unweighted family energies on x0_hat; absent when not evaluated.
    std::array<std::optional<double>, kFamilyCount> family_energy{};
};

struct SampleResult {
    Structure structure;
    std::vector<StepLog> trajectory;  // exactly n_steps entries
    /// Unweighted per-family energies of the final coordinates.
    std::array<std::optional<double>, kFamilyCount> final_family_energy{};
    double final_total_energy = 0.0;
};

/// Runs guided reverse diffusion from pure noise. The template structure
/// fixes the topology (chains, residues, atom order); constraints resolve
/// against it before step 0.
SampleResult reverse_sample(const Denoiser& denoiser, const NoiseSchedule& noise,
                            const Structure& tmpl, const ConstraintSet& constraints,
                            const PotentialParams& params, const GuidanceSchedules& schedules,
                            const SamplerConfig& config);

}  // namespace mssteer
