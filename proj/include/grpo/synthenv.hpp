#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "grpo/core.hpp"

namespace grpo {

/// A point of the synthetic state space [0,1]^2.
using State = std::array<double, 2>;

/// How the per-group feature map phi(x, y, g) is laid out.
enum class FeatureMap {
    Swapped,  ///< cos/sin slots trade places between the two groups
    Same,     ///< one map for both groups
    Flipped,  ///< cos/sin order swaps per group, action factor alternates
};

std::string_view to_string(FeatureMap map);
FeatureMap parse_feature_map(std::string_view name);

/// Two-group linear-reward environment over eight actions with d = 4 features.
struct EnvSpec {
    std::size_t n_actions = 8;
    FeatureMap feature_map = FeatureMap::Swapped;
    std::vector<Vector> theta_true = default_theta_true();
    /// Offset of the "distant" second action in the distribution-imbalanced
    /// scenarios: y2 = (y1 + offset) mod n_actions.
    std::size_t distant_offset = 4;
    /// Group whose second action is the distant one; the other group gets
    /// adjacent actions (y1 +/- 1). The default pairs the small group of the
    /// size-imbalanced split with the harder, adjacent comparisons.
    std::size_t distant_group = 1;

    std::size_t num_groups() const { return theta_true.size(); }
    static constexpr std::size_t kDim = 4;
    static std::vector<Vector> default_theta_true();
};

enum class ScenarioKind {
    SizeImbalanced,          ///< (i) 0.2:0.8 sizes, same response distribution
    DistributionImbalanced,  ///< (ii) equal sizes, distant vs near response pairs
    Both,                    ///< (iii) both imbalances
};

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario(std::string_view name);

struct Scenario {
    ScenarioKind kind = ScenarioKind::Both;
    std::size_t total_pairs = 300;
    /// Group size ratio used when the scenario is size-imbalanced.
    std::array<double, 2> size_ratio = {0.2, 0.8};

    /// Samples per group; sizes are rounded for group 0, group 1 takes the rest.
    std::array<std::size_t, 2> group_sizes() const;
};

/// phi(x, y, g) for the chosen map. Throws OutOfRange for y >= n_actions,
/// g >= K, or x outside [0, 1]^2.
FeatureVector features(const State& x, std::size_t y, std::size_t g, const EnvSpec& spec);

/// <phi(x, y, g), theta*_g>.
double true_reward(const State& x, std::size_t y, std::size_t g, const EnvSpec& spec);

/// Deterministic label: the higher-reward action wins, ties go to the smaller
/// action index.
PreferenceSample label_pair(const State& x, std::size_t y1, std::size_t y2, std::size_t g, const EnvSpec& spec);

/// Draws a full dataset: per pair a fresh uniform state and first action, the
/// second action by the scenario's rule, then label_pair. Samples are emitted
/// group by group.
GroupedDataset generate(const EnvSpec& spec, const Scenario& scenario, std::uint64_t seed);

/// Uniform states in [0,1]^2, count per group.
std::vector<std::vector<State>> sample_states(std::size_t num_groups, std::size_t count, std::uint64_t seed);

}  // namespace grpo
