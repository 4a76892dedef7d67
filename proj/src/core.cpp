#include "grpo/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "grpo/rng.hpp"

namespace grpo {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::EmptyGroup: return "EmptyGroup";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::GroupOutOfRange: return "GroupOutOfRange";
        case ErrorKind::GroupTooSmall: return "GroupTooSmall";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::DegenerateSystem: return "DegenerateSystem";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InconsistentRecords: return "InconsistentRecords";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

bool all_finite(const Vector& v) {
    return std::all_of(v.data(), v.data() + v.size(), [](double x) { return std::isfinite(x); });
}

bool PreferenceSample::operator==(const PreferenceSample& other) const {
    return group == other.group && phi_w.size() == other.phi_w.size() &&
           phi_l.size() == other.phi_l.size() && phi_w == other.phi_w && phi_l == other.phi_l &&
           ref_logp_w == other.ref_logp_w && ref_logp_l == other.ref_logp_l && meta == other.meta;
}

GroupedDataset build_dataset(std::vector<PreferenceSample> samples, std::size_t num_groups) {
    if (samples.empty()) throw Error(ErrorKind::EmptyGroup, "dataset has no samples");
    if (num_groups == 0) throw Error(ErrorKind::GroupOutOfRange, "group count must be positive");

    const auto dim = samples.front().phi_w.size();
    if (dim == 0) throw Error(ErrorKind::DimensionMismatch, "feature dimension must be positive");

    GroupedDataset data;
    data.counts_.assign(num_groups, 0);
    data.members_.resize(num_groups);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.phi_w.size() != dim || s.phi_l.size() != dim) {
            throw Error(ErrorKind::DimensionMismatch,
                        "sample " + std::to_string(i) + " has feature dimension " +
                            std::to_string(s.phi_w.size()) + "/" + std::to_string(s.phi_l.size()) +
                            ", expected " + std::to_string(dim));
        }
        if (s.group >= num_groups) {
            throw Error(ErrorKind::GroupOutOfRange, "sample " + std::to_string(i) + " has group " +
                                                        std::to_string(s.group) + " but K=" +
                                                        std::to_string(num_groups));
        }
        if (!all_finite(s.phi_w) || !all_finite(s.phi_l) || !std::isfinite(s.ref_logp_w) ||
            !std::isfinite(s.ref_logp_l)) {
            throw Error(ErrorKind::NonFiniteValue, "sample " + std::to_string(i) + " has non-finite values");
        }
        ++data.counts_[s.group];
        data.members_[s.group].push_back(i);
    }
    for (std::size_t g = 0; g < num_groups; ++g) {
        if (data.counts_[g] == 0) throw Error(ErrorKind::EmptyGroup, "group " + std::to_string(g) + " has no samples");
    }
    data.samples_ = std::move(samples);
    return data;
}

std::pair<GroupedDataset, GroupedDataset> split(const GroupedDataset& data, double train_fraction,
                                                std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::OutOfRange, "train fraction must lie in (0, 1)");
    }
    Rng rng(seed);
    std::vector<bool> in_train(data.size(), false);
    for (std::size_t g = 0; g < data.num_groups(); ++g) {
        auto members = data.group_members(g);
        const auto n = members.size();
        if (n < 2) {
            throw Error(ErrorKind::GroupTooSmall,
                        "group " + std::to_string(g) + " has " + std::to_string(n) + " sample(s), need 2");
        }
        // Fisher-Yates; only the first n_train positions matter.
        const auto n_train = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(train_fraction * n)));
        for (std::size_t i = 0; i < n_train; ++i) {
            std::swap(members[i], members[i + rng.index(n - i)]);
            in_train[members[i]] = true;
        }
    }
    std::vector<PreferenceSample> train;
    std::vector<PreferenceSample> val;
    for (std::size_t i = 0; i < data.size(); ++i) (in_train[i] ? train : val).push_back(data[i]);
    return {build_dataset(std::move(train), data.num_groups()), build_dataset(std::move(val), data.num_groups())};
}

PolicyParams::PolicyParams(Vector theta, double radius) : theta_(std::move(theta)), radius_(radius) {
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw Error(ErrorKind::OutOfRange, "radius must be positive");
    if (!all_finite(theta_)) throw Error(ErrorKind::NonFiniteValue, "theta has non-finite entries");
    if (theta_.stableNorm() > radius_ + kBallSlack) throw Error(ErrorKind::OutOfRange, "theta lies outside the ball");
}

GroupWeights GroupWeights::uniform(std::size_t k) {
    if (k == 0) throw Error(ErrorKind::OutOfRange, "group count must be positive");
    const auto n = static_cast<Eigen::Index>(k);
    return {Vector::Constant(n, 1.0 / static_cast<double>(k)), Vector::Constant(n, -std::log(static_cast<double>(k)))};
}

GroupWeights GroupWeights::from_probabilities(const Vector& probabilities) {
    if (probabilities.size() == 0) throw Error(ErrorKind::OutOfRange, "empty weight vector");
    if (!all_finite(probabilities) || probabilities.minCoeff() < 0.0 ||
        std::abs(probabilities.sum() - 1.0) > kSumTolerance) {
        throw Error(ErrorKind::OutOfRange, "weights must be nonnegative and sum to 1");
    }
    return {probabilities, probabilities.array().log().matrix()};
}

GroupWeights GroupWeights::from_log_weights(const Vector& log_weights) {
    if (log_weights.size() == 0) throw Error(ErrorKind::OutOfRange, "empty weight vector");
    // -inf marks a zero weight; NaN and +inf are rejected.
    const bool valid = std::all_of(log_weights.data(), log_weights.data() + log_weights.size(),
                                   [](double x) { return !std::isnan(x) && x != HUGE_VAL; });
    const double top = log_weights.maxCoeff();
    if (!valid || !std::isfinite(top)) throw Error(ErrorKind::NonFiniteValue, "log-weights must be finite or -inf");
    // Scalar exp: the vectorized one returns denormals instead of 0 for -inf.
    auto exp = [](double x) { return std::exp(x); };
    const double lse = top + std::log((log_weights.array() - top).unaryExpr(exp).sum());
    Vector logs = log_weights.array() - lse;
    Vector values = logs.unaryExpr(exp);
    // exp() rounding leaves the sum a few ulps off; one division settles it.
    values /= values.sum();
    return {std::move(values), std::move(logs)};
}

}  // namespace grpo
