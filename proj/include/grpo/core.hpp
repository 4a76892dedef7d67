#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "grpo/error.hpp"

namespace grpo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Feature embedding of a (prompt, response) pair. Dimension is fixed per dataset.
using FeatureVector = Vector;

bool all_finite(const Vector& v);

/// Provenance carried along with a sample. Synthetic samples record the state
/// they were drawn at and the two action indices; ingested samples may leave
/// these empty.
struct SampleMeta {
    std::vector<double> state;
    int action_w = -1;
    int action_l = -1;

    bool operator==(const SampleMeta&) const = default;
};

/// One preference comparison: the preferred response's features, the rejected
/// response's features, and the group that expressed the preference.
///
/// ref_logp_w / ref_logp_l are reference-policy log-probabilities of the two
/// responses. They are zero for the uniform reference, in which case the margin
/// is just <phi_w - phi_l, theta>.
struct PreferenceSample {
    std::size_t group = 0;
    FeatureVector phi_w;
    FeatureVector phi_l;
    double ref_logp_w = 0.0;
    double ref_logp_l = 0.0;
    SampleMeta meta;

    Vector delta() const { return phi_w - phi_l; }
    /// Added to <delta, theta> to form the log-ratio margin.
    double margin_offset() const { return ref_logp_l - ref_logp_w; }

    bool operator==(const PreferenceSample& other) const;
};

/// Preference samples partitioned into K groups. Immutable once built.
class GroupedDataset {
public:
    const std::vector<PreferenceSample>& samples() const { return samples_; }
    const PreferenceSample& operator[](std::size_t i) const { return samples_[i]; }
    std::size_t size() const { return samples_.size(); }
    std::size_t num_groups() const { return counts_.size(); }
    std::size_t dim() const { return samples_.front().phi_w.size(); }
    const std::vector<std::size_t>& group_counts() const { return counts_; }
    std::size_t group_count(std::size_t g) const { return counts_[g]; }
    /// Positions (into samples()) of group g's samples, in dataset order.
    const std::vector<std::size_t>& group_members(std::size_t g) const { return members_[g]; }

    bool operator==(const GroupedDataset& other) const {
        return counts_ == other.counts_ && samples_ == other.samples_;
    }

private:
    friend GroupedDataset build_dataset(std::vector<PreferenceSample> samples, std::size_t num_groups);

    GroupedDataset() = default;

    std::vector<PreferenceSample> samples_;
    std::vector<std::size_t> counts_;
    std::vector<std::vector<std::size_t>> members_;
};

/// Validates and indexes samples. Throws DimensionMismatch, GroupOutOfRange,
/// NonFiniteValue, or EmptyGroup (every one of the K groups needs data).
GroupedDataset build_dataset(std::vector<PreferenceSample> samples, std::size_t num_groups);

/// Stratified split: group g sends max(1, floor(train_fraction * N_g)) samples to
/// the training half, chosen by a seeded shuffle; relative order is kept in both
/// halves. Throws GroupTooSmall if any group has fewer than two samples.
std::pair<GroupedDataset, GroupedDataset> split(const GroupedDataset& data, double train_fraction,
                                                std::uint64_t seed);

/// Policy parameters constrained to the L2 ball of the given radius.
class PolicyParams {
public:
    static constexpr double kBallSlack = 1e-9;

    PolicyParams(Vector theta, double radius);
    static PolicyParams zeros(std::size_t dim, double radius) { return {Vector::Zero(dim), radius}; }

    const Vector& theta() const { return theta_; }
    double radius() const { return radius_; }
    std::size_t dim() const { return static_cast<std::size_t>(theta_.size()); }

private:
    Vector theta_;
    double radius_;
};

/// A point on the probability simplex over groups.
///
/// The weights are kept alongside their logarithms, normalized by log-sum-exp,
/// so repeated multiplicative updates never overflow.
class GroupWeights {
public:
    static constexpr double kSumTolerance = 1e-12;

    static GroupWeights uniform(std::size_t k);
    /// Throws OutOfRange unless the entries are nonnegative and sum to 1.
    static GroupWeights from_probabilities(const Vector& probabilities);
    /// Normalizes arbitrary finite log-weights onto the simplex.
    static GroupWeights from_log_weights(const Vector& log_weights);

    const Vector& values() const { return values_; }
    const Vector& log_values() const { return log_values_; }
    double operator[](std::size_t g) const { return values_[static_cast<Eigen::Index>(g)]; }
    std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

private:
    GroupWeights(Vector values, Vector log_values)
        : values_(std::move(values)), log_values_(std::move(log_values)) {}

    Vector values_;
    Vector log_values_;
};

}  // namespace grpo
