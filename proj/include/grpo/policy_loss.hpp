#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "grpo/core.hpp"

namespace grpo {

enum class LossType { Dpo, Ipo };

/// Which preference loss to use, and its regularization strength beta.
struct LossKind {
    LossType type = LossType::Dpo;
    double beta = 1.0;

    static LossKind dpo(double beta);
    static LossKind ipo(double beta);
    /// Throws ConfigError when beta is not finite and positive.
    void validate() const;
};

/// Numerically stable log(1 + exp(z)).
double softplus(double z);
/// Numerically stable 1 / (1 + exp(-z)).
double sigmoid(double z);

/// Log-ratio margin h = <phi_w - phi_l, theta> + reference offset.
double margin(const Vector& theta, const PreferenceSample& s);

/// -log sigmoid(beta * h), always >= 0.
double dpo_loss(const Vector& theta, const PreferenceSample& s, double beta);
/// Gradient of dpo_loss: -beta * sigmoid(-beta * h) * (phi_w - phi_l).
Vector dpo_grad(const Vector& theta, const PreferenceSample& s, double beta);

/// (h - 1/(2 beta))^2.
double ipo_loss(const Vector& theta, const PreferenceSample& s, double beta);
/// 2 (h - 1/(2 beta)) (phi_w - phi_l).
Vector ipo_grad(const Vector& theta, const PreferenceSample& s, double beta);

double sample_loss(const Vector& theta, const PreferenceSample& s, const LossKind& kind);
Vector sample_grad(const Vector& theta, const PreferenceSample& s, const LossKind& kind);

/// Mean per-sample loss within each group (summed in dataset order).
std::vector<double> group_losses(const Vector& theta, const GroupedDataset& data, const LossKind& kind);

/// An extreme value over groups together with the group attaining it.
struct GroupExtreme {
    double value = 0.0;
    std::size_t group = 0;
};

/// Largest entry; ties go to the lowest index.
GroupExtreme arg_max(std::span<const double> values);
/// Smallest entry; ties go to the lowest index.
GroupExtreme arg_min(std::span<const double> values);

/// max_g L_g and the worst group.
GroupExtreme worst_group_loss(const Vector& theta, const GroupedDataset& data, const LossKind& kind);

/// (1 - chi) * sum_g mu_g L_g + chi * max_g L_g.
double tradeoff_loss(const Vector& theta, const GroupedDataset& data, const LossKind& kind, double chi,
                     const GroupWeights& mu);

}  // namespace grpo
