#include "grpo/eval.hpp"

#include <algorithm>
#include <string>

namespace grpo {

GroupExtreme max_validation_loss(const Vector& theta, const GroupedDataset& val, const LossKind& kind) {
    return worst_group_loss(theta, val, kind);
}

std::size_t greedy_action(const Vector& theta, const State& x, std::size_t g, const EnvSpec& spec) {
    std::size_t best = 0;
    double best_score = features(x, 0, g, spec).dot(theta);
    for (std::size_t y = 1; y < spec.n_actions; ++y) {
        const double score = features(x, y, g, spec).dot(theta);
        if (score > best_score) {
            best = y;
            best_score = score;
        }
    }
    return best;
}

double reward_error(const Vector& theta_hat, std::size_t g, std::span<const State> states, const EnvSpec& spec) {
    if (states.empty()) throw Error(ErrorKind::OutOfRange, "reward error needs at least one state");
    const Vector& truth = spec.theta_true.at(g);
    double total = 0.0;
    for (const auto& x : states) {
        const double best = true_reward(x, greedy_action(truth, x, g, spec), g, spec);
        const double chosen = true_reward(x, greedy_action(theta_hat, x, g, spec), g, spec);
        total += best - chosen;
    }
    return total / static_cast<double>(states.size());
}

GroupExtreme max_reward_error(const Vector& theta_hat, const std::vector<std::vector<State>>& states_per_group,
                              const EnvSpec& spec) {
    std::vector<double> errors;
    errors.reserve(states_per_group.size());
    for (std::size_t g = 0; g < states_per_group.size(); ++g) {
        errors.push_back(reward_error(theta_hat, g, states_per_group[g], spec));
    }
    return arg_max(errors);
}

std::vector<double> pairwise_accuracy(const Vector& theta, const GroupedDataset& data) {
    std::vector<double> correct(data.num_groups(), 0.0);
    for (const auto& s : data.samples()) {
        if (margin(theta, s) > 0.0) correct[s.group] += 1.0;
    }
    for (std::size_t g = 0; g < correct.size(); ++g) correct[g] /= static_cast<double>(data.group_count(g));
    return correct;
}

std::vector<std::vector<State>> states_by_group(const GroupedDataset& data) {
    std::vector<std::vector<State>> states(data.num_groups());
    for (const auto& s : data.samples()) {
        if (s.meta.state.size() == 2) states[s.group].push_back({s.meta.state[0], s.meta.state[1]});
    }
    return states;
}

MetricsReport evaluate(const Vector& theta, const GroupedDataset& val, const LossKind& kind, const EnvSpec* env,
                       const std::vector<std::vector<State>>* states_per_group) {
    MetricsReport report;
    report.group_val_losses = group_losses(theta, val, kind);
    report.max_val_loss = arg_max(report.group_val_losses);
    if (env != nullptr && states_per_group != nullptr) {
        for (std::size_t g = 0; g < states_per_group->size(); ++g) {
            report.group_reward_errors.push_back(reward_error(theta, g, (*states_per_group)[g], *env));
        }
        report.max_reward_error = arg_max(report.group_reward_errors);
    }
    report.group_accuracies = pairwise_accuracy(theta, val);
    report.min_accuracy = arg_min(report.group_accuracies);
    return report;
}

}  // namespace grpo
