#pragma once

#include <optional>
#include <span>
#include <vector>

#include "grpo/core.hpp"
#include "grpo/policy_loss.hpp"
#include "grpo/synthenv.hpp"

namespace grpo {

struct MetricsReport {
    std::vector<double> group_val_losses;
    GroupExtreme max_val_loss;
    /// Empty when no reward model is available (ingested data).
    std::vector<double> group_reward_errors;
    std::optional<GroupExtreme> max_reward_error;
    std::vector<double> group_accuracies;
    GroupExtreme min_accuracy;
};

GroupExtreme max_validation_loss(const Vector& theta, const GroupedDataset& val, const LossKind& kind);

/// Index of the action maximizing <phi(x, y, g), theta>; ties go to the smaller index.
std::size_t greedy_action(const Vector& theta, const State& x, std::size_t g, const EnvSpec& spec);

/// Mean regret, under group g's true reward, of acting greedily w.r.t. theta_hat.
double reward_error(const Vector& theta_hat, std::size_t g, std::span<const State> states, const EnvSpec& spec);

GroupExtreme max_reward_error(const Vector& theta_hat, const std::vector<std::vector<State>>& states_per_group,
                              const EnvSpec& spec);

/// Per-group fraction of samples with strictly positive margin.
std::vector<double> pairwise_accuracy(const Vector& theta, const GroupedDataset& data);

/// States recorded in sample metadata, grouped. Samples without a state are skipped.
std::vector<std::vector<State>> states_by_group(const GroupedDataset& data);

/// All metrics at once; reward errors only when env and states are given.
MetricsReport evaluate(const Vector& theta, const GroupedDataset& val, const LossKind& kind, const EnvSpec* env,
                       const std::vector<std::vector<State>>* states_per_group);

}  // namespace grpo
