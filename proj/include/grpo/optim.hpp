#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "grpo/core.hpp"
#include "grpo/policy_loss.hpp"
#include "grpo/rng.hpp"

namespace grpo {

/// Euclidean projection onto {theta : ||theta||_2 <= radius}.
Vector project_l2(const Vector& theta, double radius);

/// Multiplicative-weights step on the simplex: alpha_g *= exp(eta * scaled_loss),
/// then renormalize. Performed on the log-weights.
GroupWeights alpha_step(const GroupWeights& alpha, std::size_t group, double scaled_loss, double eta_alpha);

/// The same step applied to every group at once with per-group losses.
GroupWeights alpha_step_all(const GroupWeights& alpha, const std::vector<double>& losses, double eta_alpha);

enum class SamplingStrategy {
    ProportionalToSize,  ///< g ~ Categorical(N_1/N, ..., N_K/N)
    UniformOverGroups,   ///< g ~ Uniform{0, ..., K-1}
};

struct GrpoConfig {
    double eta_theta = 0.9;
    double eta_alpha = 0.5;
    LossKind kind = {LossType::Dpo, 1.0};
    std::size_t iterations = 0;
    double radius = 100.0;
    SamplingStrategy strategy = SamplingStrategy::ProportionalToSize;
    std::uint64_t seed = 0;
    /// 1 is the pure worst-group objective, 0 the mu-weighted average.
    double chi = 1.0;
    /// Reference weights of the trade-off objective; uniform when unset.
    std::optional<GroupWeights> mu;
    /// Checkpoint interval; 0 selects max(1, iterations / 200).
    std::size_t checkpoint_every = 0;

    /// Throws ConfigError on a non-positive step size/radius, chi outside
    /// [0, 1], or mu of the wrong length.
    void validate(std::size_t num_groups) const;
    std::size_t resolved_checkpoint_every() const;
};

struct Checkpoint {
    std::size_t iteration = 0;
    Vector theta;
    /// Running mean of theta^1..theta^iteration (theta^0 at iteration 0).
    Vector average;
    GroupWeights alpha = GroupWeights::uniform(1);
    /// Per-group training losses at theta.
    std::vector<double> group_losses;
};

struct RunTrajectory {
    std::vector<Checkpoint> checkpoints;
    /// Mean of theta^1..theta^T (theta^0 when no iterations ran).
    Vector average_iterate;
    std::size_t checkpoint_every = 1;
    /// Set when a least-squares solve fell back to a ridge term.
    bool regularized = false;

    const Checkpoint& final() const { return checkpoints.back(); }
};

/// Called after every iteration with (t, theta^t, alpha^t).
using IterateObserver = std::function<void(std::size_t, const Vector&, const GroupWeights&)>;

struct SampleDraw {
    std::size_t group = 0;
    std::size_t index = 0;  ///< position in data.samples()
};

/// Picks a group according to the strategy, then a uniform sample within it.
SampleDraw draw_sample(const GroupedDataset& data, SamplingStrategy strategy, Rng& rng);

struct GrpoState {
    Vector theta;
    GroupWeights alpha;
};

/// One alternating iteration: sample, ascend alpha on the sampled group's
/// scaled loss, then take a projected gradient step on theta weighted by the
/// updated alpha. Throws NonFiniteLoss if the loss or gradient blows up.
GrpoState grpo_step(const GrpoState& state, const GroupedDataset& data, const GrpoConfig& cfg, Rng& rng);

/// Runs grpo_step from theta = 0, alpha uniform for cfg.iterations steps.
RunTrajectory run_grpo(const GroupedDataset& data, const GrpoConfig& cfg, const IterateObserver& observer = {});

struct LeastSquaresResult {
    Vector theta;
    /// True when the system was singular and a ridge term was added.
    bool regularized = false;
    double ridge = 0.0;
};

/// argmin_theta sum_i w_i (<S_i, theta> - target_i)^2 + ridge ||theta||^2 via the
/// normal equations. With ridge = 0 and an ill-conditioned system (condition
/// estimate above 1e12, or an LDLT pivot below 1e-12 of the largest) it retries
/// with ridge = 1e-8 trace(S^T W S) / d.
/// Throws DegenerateSystem when every weighted row is zero.
LeastSquaresResult weighted_least_squares(const Matrix& rows, const Vector& weights, const Vector& targets,
                                          double ridge);
LeastSquaresResult weighted_least_squares(const Matrix& rows, const Vector& weights, double target, double ridge);

/// Rows S_i = phi_w - phi_l of every sample, in dataset order.
Matrix difference_matrix(const GroupedDataset& data);
/// Per-sample regression targets 1/(2 beta) - margin offset.
Vector ipo_targets(const GroupedDataset& data, double beta);
/// Per-sample weights alpha_g / N_g.
Vector group_sample_weights(const GroupedDataset& data, const GroupWeights& alpha);

struct GrIpoConfig {
    double beta = 0.1;
    double eta_alpha = 0.01;
    std::size_t rounds = 100;
    double ridge = 0.0;
};

/// Alternates full-batch group IPO losses, a multiplicative alpha update on all
/// groups, and the closed-form alpha-weighted regression for theta. One
/// checkpoint per round (plus round 0).
RunTrajectory run_gr_ipo(const GroupedDataset& data, const GrIpoConfig& cfg, const IterateObserver& observer = {});

/// Importance-sampling per-sample weight for group g: N / (K * N_g).
double importance_weight(const GroupedDataset& data, std::size_t g);

/// Non-robust baselines. DPO: projected SGD on the pooled loss with weight 1 or
/// the importance weight; the checkpoint alpha stays uniform. IPO: a single
/// closed-form solve with uniform or importance weights.
RunTrajectory run_vanilla(const GroupedDataset& data, const GrpoConfig& cfg, bool importance_sampling,
                          const IterateObserver& observer = {});

}  // namespace grpo
