#include "grpo/synthenv.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "grpo/rng.hpp"

namespace grpo {

std::string_view to_string(FeatureMap map) {
    switch (map) {
        case FeatureMap::Swapped: return "swapped";
        case FeatureMap::Same: return "same";
        case FeatureMap::Flipped: return "flipped";
    }
    return "unknown";
}

FeatureMap parse_feature_map(std::string_view name) {
    if (name == "swapped") return FeatureMap::Swapped;
    if (name == "same") return FeatureMap::Same;
    if (name == "flipped") return FeatureMap::Flipped;
    throw Error(ErrorKind::ConfigError, "unknown feature map '" + std::string(name) + "'");
}

std::string_view to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::SizeImbalanced: return "size";
        case ScenarioKind::DistributionImbalanced: return "distribution";
        case ScenarioKind::Both: return "both";
    }
    return "unknown";
}

ScenarioKind parse_scenario(std::string_view name) {
    if (name == "size" || name == "i" || name == "1") return ScenarioKind::SizeImbalanced;
    if (name == "distribution" || name == "ii" || name == "2") return ScenarioKind::DistributionImbalanced;
    if (name == "both" || name == "iii" || name == "3") return ScenarioKind::Both;
    throw Error(ErrorKind::ConfigError, "unknown scenario '" + std::string(name) + "'");
}

std::vector<Vector> EnvSpec::default_theta_true() {
    Vector first(4);
    first << 1.0, 3.0, 1.0, 3.0;
    Vector second(4);
    second << 3.0, 1.0, 3.0, 1.0;
    return {first, second};
}

std::array<std::size_t, 2> Scenario::group_sizes() const {
    if (kind == ScenarioKind::DistributionImbalanced) {
        const auto first = total_pairs / 2;
        return {first, total_pairs - first};
    }
    if (!(size_ratio[0] > 0.0 && size_ratio[1] > 0.0) || std::abs(size_ratio[0] + size_ratio[1] - 1.0) > 1e-12) {
        throw Error(ErrorKind::ConfigError, "size ratio entries must be positive and sum to 1");
    }
    const auto first = static_cast<std::size_t>(std::llround(size_ratio[0] * static_cast<double>(total_pairs)));
    return {first, total_pairs - first};
}

FeatureVector features(const State& x, std::size_t y, std::size_t g, const EnvSpec& spec) {
    if (y >= spec.n_actions) throw Error(ErrorKind::OutOfRange, "action " + std::to_string(y) + " out of range");
    if (g >= spec.num_groups()) throw Error(ErrorKind::OutOfRange, "group " + std::to_string(g) + " out of range");
    for (double xi : x) {
        if (!(xi >= 0.0 && xi <= 1.0)) throw Error(ErrorKind::OutOfRange, "state coordinate outside [0, 1]");
    }

    const double scale = static_cast<double>(y) / static_cast<double>(spec.n_actions) + 1.0;
    FeatureVector phi(EnvSpec::kDim);
    for (std::size_t i = 0; i < EnvSpec::kDim; ++i) {
        const double angle = x[i / 2] * std::numbers::pi;
        const bool odd = i % 2 == 1;
        double value = 0.0;
        switch (spec.feature_map) {
            case FeatureMap::Swapped:
                value = i % 2 == g ? scale * std::cos(angle) : std::sin(angle) / scale;
                break;
            case FeatureMap::Same:
                value = i % 2 == 0 ? scale * std::cos(angle) : std::sin(angle) / scale;
                break;
            case FeatureMap::Flipped: {
                const double factor = odd ? 1.0 / scale : scale;
                value = factor * (i % 2 == g ? std::cos(angle) : std::sin(angle));
                break;
            }
        }
        phi[static_cast<Eigen::Index>(i)] = value;
    }
    return phi;
}

double true_reward(const State& x, std::size_t y, std::size_t g, const EnvSpec& spec) {
    return features(x, y, g, spec).dot(spec.theta_true.at(g));
}

PreferenceSample label_pair(const State& x, std::size_t y1, std::size_t y2, std::size_t g, const EnvSpec& spec) {
    if (y1 == y2) throw Error(ErrorKind::OutOfRange, "a preference pair needs two distinct actions");
    const double r1 = true_reward(x, y1, g, spec);
    const double r2 = true_reward(x, y2, g, spec);
    std::size_t winner = std::min(y1, y2);
    if (r1 > r2) winner = y1;
    if (r2 > r1) winner = y2;
    const std::size_t loser = winner == y1 ? y2 : y1;

    PreferenceSample s;
    s.group = g;
    s.phi_w = features(x, winner, g, spec);
    s.phi_l = features(x, loser, g, spec);
    s.meta.state = {x[0], x[1]};
    s.meta.action_w = static_cast<int>(winner);
    s.meta.action_l = static_cast<int>(loser);
    return s;
}

GroupedDataset generate(const EnvSpec& spec, const Scenario& scenario, std::uint64_t seed) {
    if (spec.num_groups() != 2) throw Error(ErrorKind::ConfigError, "the synthetic environment has two groups");
    if (spec.n_actions < 3) throw Error(ErrorKind::ConfigError, "need at least three actions");
    if (spec.distant_group > 1) throw Error(ErrorKind::ConfigError, "distant group must be 0 or 1");
    if (spec.distant_offset % spec.n_actions == 0) {
        throw Error(ErrorKind::ConfigError, "distant offset must not be a multiple of the action count");
    }

    const auto sizes = scenario.group_sizes();
    const auto n = spec.n_actions;
    Rng rng(seed);
    std::vector<PreferenceSample> samples;
    samples.reserve(scenario.total_pairs);
    for (std::size_t g = 0; g < 2; ++g) {
        for (std::size_t j = 0; j < sizes[g]; ++j) {
            State x{rng.uniform(), rng.uniform()};
            const auto y1 = rng.index(n);
            std::size_t y2 = 0;
            if (scenario.kind == ScenarioKind::SizeImbalanced) {
                y2 = (y1 + 1 + rng.index(n - 1)) % n;
            } else if (g == spec.distant_group) {
                y2 = (y1 + spec.distant_offset) % n;
            } else {
                y2 = rng.coin() ? (y1 + 1) % n : (y1 + n - 1) % n;
            }
            samples.push_back(label_pair(x, y1, y2, g, spec));
        }
    }
    return build_dataset(std::move(samples), 2);
}

std::vector<std::vector<State>> sample_states(std::size_t num_groups, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<State>> states(num_groups);
    for (auto& group : states) {
        group.reserve(count);
        for (std::size_t i = 0; i < count; ++i) group.push_back({rng.uniform(), rng.uniform()});
    }
    return states;
}

}  // namespace grpo
