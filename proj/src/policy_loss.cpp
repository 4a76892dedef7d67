#include "grpo/policy_loss.hpp"

#include <cmath>
#include <string>

namespace grpo {

LossKind LossKind::dpo(double beta) {
    LossKind kind{LossType::Dpo, beta};
    kind.validate();
    return kind;
}

LossKind LossKind::ipo(double beta) {
    LossKind kind{LossType::Ipo, beta};
    kind.validate();
    return kind;
}

void LossKind::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw Error(ErrorKind::ConfigError, "beta must be finite and positive, got " + std::to_string(beta));
    }
}

double softplus(double z) {
    // Beyond |z| = 30 the correction term is below 1e-13 relative.
    if (z > 30.0) return z + std::exp(-z);
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

void check_dim(const Vector& theta, const PreferenceSample& s) {
    if (theta.size() != s.phi_w.size() || theta.size() != s.phi_l.size()) {
        throw Error(ErrorKind::DimensionMismatch, "theta has dimension " + std::to_string(theta.size()) +
                                                      ", sample has " + std::to_string(s.phi_w.size()));
    }
}

}  // namespace

double margin(const Vector& theta, const PreferenceSample& s) {
    check_dim(theta, s);
    return (s.phi_w - s.phi_l).dot(theta) + s.margin_offset();
}

double dpo_loss(const Vector& theta, const PreferenceSample& s, double beta) {
    return softplus(-beta * margin(theta, s));
}

Vector dpo_grad(const Vector& theta, const PreferenceSample& s, double beta) {
    const double h = margin(theta, s);
    return (-beta * sigmoid(-beta * h)) * s.delta();
}

double ipo_loss(const Vector& theta, const PreferenceSample& s, double beta) {
    const double r = margin(theta, s) - 1.0 / (2.0 * beta);
    return r * r;
}

Vector ipo_grad(const Vector& theta, const PreferenceSample& s, double beta) {
    const double r = margin(theta, s) - 1.0 / (2.0 * beta);
    return (2.0 * r) * s.delta();
}

double sample_loss(const Vector& theta, const PreferenceSample& s, const LossKind& kind) {
    return kind.type == LossType::Dpo ? dpo_loss(theta, s, kind.beta) : ipo_loss(theta, s, kind.beta);
}

Vector sample_grad(const Vector& theta, const PreferenceSample& s, const LossKind& kind) {
    return kind.type == LossType::Dpo ? dpo_grad(theta, s, kind.beta) : ipo_grad(theta, s, kind.beta);
}

std::vector<double> group_losses(const Vector& theta, const GroupedDataset& data, const LossKind& kind) {
    std::vector<double> sums(data.num_groups(), 0.0);
    for (const auto& s : data.samples()) sums[s.group] += sample_loss(theta, s, kind);
    for (std::size_t g = 0; g < sums.size(); ++g) sums[g] /= static_cast<double>(data.group_count(g));
    return sums;
}

GroupExtreme arg_max(std::span<const double> values) {
    GroupExtreme best{values.front(), 0};
    for (std::size_t g = 1; g < values.size(); ++g) {
        if (values[g] > best.value) best = {values[g], g};
    }
    return best;
}

GroupExtreme arg_min(std::span<const double> values) {
    GroupExtreme best{values.front(), 0};
    for (std::size_t g = 1; g < values.size(); ++g) {
        if (values[g] < best.value) best = {values[g], g};
    }
    return best;
}

GroupExtreme worst_group_loss(const Vector& theta, const GroupedDataset& data, const LossKind& kind) {
    return arg_max(group_losses(theta, data, kind));
}

double tradeoff_loss(const Vector& theta, const GroupedDataset& data, const LossKind& kind, double chi,
                     const GroupWeights& mu) {
    if (!(chi >= 0.0 && chi <= 1.0)) throw Error(ErrorKind::OutOfRange, "chi must lie in [0, 1]");
    if (mu.size() != data.num_groups()) throw Error(ErrorKind::DimensionMismatch, "mu has wrong length");
    const auto losses = group_losses(theta, data, kind);
    double average = 0.0;
    for (std::size_t g = 0; g < losses.size(); ++g) average += mu[g] * losses[g];
    return (1.0 - chi) * average + chi * arg_max(losses).value;
}

}  // namespace grpo
