#include "grpo/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace grpo {

Vector project_l2(const Vector& theta, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorKind::OutOfRange, "radius must be positive");
    // stableNorm avoids overflow to inf (and a silent projection to zero) for huge iterates.
    const double norm = theta.stableNorm();
    if (!std::isfinite(norm)) throw Error(ErrorKind::NonFiniteLoss, "iterate is not finite");
    if (norm <= radius) return theta;
    return theta * (radius / norm);
}

GroupWeights alpha_step(const GroupWeights& alpha, std::size_t group, double scaled_loss, double eta_alpha) {
    if (group >= alpha.size()) throw Error(ErrorKind::GroupOutOfRange, "group index exceeds weight length");
    if (!std::isfinite(scaled_loss)) throw Error(ErrorKind::NonFiniteLoss, "scaled loss is not finite");
    Vector logs = alpha.log_values();
    logs[static_cast<Eigen::Index>(group)] += eta_alpha * scaled_loss;
    return GroupWeights::from_log_weights(logs);
}

GroupWeights alpha_step_all(const GroupWeights& alpha, const std::vector<double>& losses, double eta_alpha) {
    if (losses.size() != alpha.size()) throw Error(ErrorKind::DimensionMismatch, "loss vector has wrong length");
    Vector logs = alpha.log_values();
    for (std::size_t g = 0; g < losses.size(); ++g) {
        if (!std::isfinite(losses[g])) throw Error(ErrorKind::NonFiniteLoss, "group loss is not finite");
        logs[static_cast<Eigen::Index>(g)] += eta_alpha * losses[g];
    }
    return GroupWeights::from_log_weights(logs);
}

void GrpoConfig::validate(std::size_t num_groups) const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(eta_theta)) throw Error(ErrorKind::ConfigError, "eta_theta must be positive");
    if (!positive(eta_alpha)) throw Error(ErrorKind::ConfigError, "eta_alpha must be positive");
    if (!positive(radius)) throw Error(ErrorKind::ConfigError, "radius must be positive");
    if (!(chi >= 0.0 && chi <= 1.0)) throw Error(ErrorKind::ConfigError, "chi must lie in [0, 1]");
    kind.validate();
    if (mu && mu->size() != num_groups) {
        throw Error(ErrorKind::ConfigError, "mu has " + std::to_string(mu->size()) + " entries, expected " +
                                                std::to_string(num_groups));
    }
}

std::size_t GrpoConfig::resolved_checkpoint_every() const {
    return checkpoint_every > 0 ? checkpoint_every : std::max<std::size_t>(1, iterations / 200);
}

SampleDraw draw_sample(const GroupedDataset& data, SamplingStrategy strategy, Rng& rng) {
    std::size_t group = 0;
    if (strategy == SamplingStrategy::UniformOverGroups) {
        group = rng.index(data.num_groups());
    } else {
        // Inverse CDF over integer counts, exact for any N.
        auto pick = rng.index(data.size());
        while (pick >= data.group_count(group)) pick -= data.group_count(group++);
    }
    const auto& members = data.group_members(group);
    return {group, members[rng.index(members.size())]};
}

namespace {

double group_scale(const GroupedDataset& data, SamplingStrategy strategy, std::size_t g) {
    if (strategy == SamplingStrategy::UniformOverGroups) return static_cast<double>(data.num_groups());
    return static_cast<double>(data.size()) / static_cast<double>(data.group_count(g));
}

void require_finite(double loss, const Vector& grad, std::size_t sample) {
    if (!std::isfinite(loss) || !all_finite(grad)) {
        throw Error(ErrorKind::NonFiniteLoss, "loss or gradient at sample " + std::to_string(sample) +
                                                  " is not finite; the step size is likely too large");
    }
}

Vector descend(const Vector& theta, const Vector& grad, double step, double radius) {
    return project_l2(theta - step * grad, radius);
}

/// Drives a stochastic solver and records checkpoints plus the running mean.
template <typename Step>
RunTrajectory run_stochastic(const GroupedDataset& data, const GrpoConfig& cfg, const IterateObserver& observer,
                             Step&& step) {
    RunTrajectory traj;
    traj.checkpoint_every = cfg.resolved_checkpoint_every();
    GrpoState state{Vector::Zero(static_cast<Eigen::Index>(data.dim())), GroupWeights::uniform(data.num_groups())};
    traj.average_iterate = state.theta;
    traj.checkpoints.push_back(
        {0, state.theta, state.theta, state.alpha, group_losses(state.theta, data, cfg.kind)});

    Rng rng(cfg.seed);
    for (std::size_t t = 1; t <= cfg.iterations; ++t) {
        state = step(state, rng);
        traj.average_iterate += (state.theta - traj.average_iterate) / static_cast<double>(t);
        if (observer) observer(t, state.theta, state.alpha);
        if (t % traj.checkpoint_every == 0 || t == cfg.iterations) {
            traj.checkpoints.push_back(
                {t, state.theta, traj.average_iterate, state.alpha, group_losses(state.theta, data, cfg.kind)});
        }
    }
    return traj;
}

}  // namespace

GrpoState grpo_step(const GrpoState& state, const GroupedDataset& data, const GrpoConfig& cfg, Rng& rng) {
    const auto draw = draw_sample(data, cfg.strategy, rng);
    const auto& sample = data[draw.index];
    const double scale = group_scale(data, cfg.strategy, draw.group);

    const double loss = sample_loss(state.theta, sample, cfg.kind);
    const Vector grad = sample_grad(state.theta, sample, cfg.kind);
    require_finite(loss, grad, draw.index);

    GroupWeights alpha = alpha_step(state.alpha, draw.group, scale * loss, cfg.eta_alpha);

    const double mu_g = cfg.mu ? (*cfg.mu)[draw.group] : 1.0 / static_cast<double>(data.num_groups());
    const double weight = (1.0 - cfg.chi) * mu_g * scale + cfg.chi * alpha[draw.group] * scale;
    return {descend(state.theta, grad, cfg.eta_theta * weight, cfg.radius), std::move(alpha)};
}

RunTrajectory run_grpo(const GroupedDataset& data, const GrpoConfig& cfg, const IterateObserver& observer) {
    cfg.validate(data.num_groups());
    return run_stochastic(data, cfg, observer,
                          [&](const GrpoState& state, Rng& rng) { return grpo_step(state, data, cfg, rng); });
}

LeastSquaresResult weighted_least_squares(const Matrix& rows, const Vector& weights, const Vector& targets,
                                          double ridge) {
    if (rows.rows() == 0 || rows.cols() == 0) throw Error(ErrorKind::DegenerateSystem, "empty design matrix");
    if (weights.size() != rows.rows() || targets.size() != rows.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "weights/targets do not match the number of rows");
    }
    if (!all_finite(weights) || weights.minCoeff() < 0.0) {
        throw Error(ErrorKind::OutOfRange, "weights must be finite and nonnegative");
    }
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw Error(ErrorKind::OutOfRange, "ridge must be nonnegative");

    const Matrix weighted_rows = weights.asDiagonal() * rows;
    const Matrix gram = rows.transpose() * weighted_rows;
    const Vector rhs = weighted_rows.transpose() * targets;
    const double trace = gram.trace();
    if (!(trace > 0.0)) throw Error(ErrorKind::DegenerateSystem, "all weighted rows are zero");

    const auto d = gram.rows();
    auto solve = [&](double lambda) {
        Matrix system = gram;
        system.diagonal().array() += lambda;
        return Eigen::LDLT<Matrix>(system);
    };

    LeastSquaresResult result;
    result.ridge = ridge;
    auto ldlt = solve(ridge);
    // LDLT's rcond estimate misses exactly zero pivots, so check those too.
    auto ill_conditioned_system = [](const Eigen::LDLT<Matrix>& f) {
        const Vector pivots = f.vectorD().cwiseAbs();
        return f.info() != Eigen::Success || !(f.rcond() * 1e12 >= 1.0) ||
               !(pivots.minCoeff() * 1e12 >= pivots.maxCoeff());
    };
    const bool ill_conditioned = ill_conditioned_system(ldlt);
    if (ridge == 0.0 && ill_conditioned) {
        result.ridge = 1e-8 * trace / static_cast<double>(d);
        result.regularized = true;
        ldlt = solve(result.ridge);
    }
    result.theta = ldlt.solve(rhs);
    if (!all_finite(result.theta)) throw Error(ErrorKind::DegenerateSystem, "normal equations have no finite solution");
    return result;
}

LeastSquaresResult weighted_least_squares(const Matrix& rows, const Vector& weights, double target, double ridge) {
    return weighted_least_squares(rows, weights, Vector::Constant(rows.rows(), target), ridge);
}

Matrix difference_matrix(const GroupedDataset& data) {
    Matrix rows(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.dim()));
    for (std::size_t i = 0; i < data.size(); ++i) rows.row(static_cast<Eigen::Index>(i)) = data[i].delta().transpose();
    return rows;
}

Vector ipo_targets(const GroupedDataset& data, double beta) {
    Vector targets(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        targets[static_cast<Eigen::Index>(i)] = 1.0 / (2.0 * beta) - data[i].margin_offset();
    }
    return targets;
}

Vector group_sample_weights(const GroupedDataset& data, const GroupWeights& alpha) {
    Vector weights(static_cast<Eigen::Index>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto g = data[i].group;
        weights[static_cast<Eigen::Index>(i)] = alpha[g] / static_cast<double>(data.group_count(g));
    }
    return weights;
}

RunTrajectory run_gr_ipo(const GroupedDataset& data, const GrIpoConfig& cfg, const IterateObserver& observer) {
    const auto kind = LossKind::ipo(cfg.beta);
    if (!(cfg.eta_alpha > 0.0) || !std::isfinite(cfg.eta_alpha)) {
        throw Error(ErrorKind::ConfigError, "eta_alpha must be positive");
    }
    if (cfg.rounds == 0) throw Error(ErrorKind::ConfigError, "GR-IPO needs at least one round");

    const Matrix rows = difference_matrix(data);
    const Vector targets = ipo_targets(data, cfg.beta);

    RunTrajectory traj;
    traj.checkpoint_every = 1;
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(data.dim()));
    GroupWeights alpha = GroupWeights::uniform(data.num_groups());
    traj.average_iterate = Vector::Zero(theta.size());
    traj.checkpoints.push_back({0, theta, theta, alpha, group_losses(theta, data, kind)});

    for (std::size_t t = 1; t <= cfg.rounds; ++t) {
        alpha = alpha_step_all(alpha, traj.checkpoints.back().group_losses, cfg.eta_alpha);
        auto solved = weighted_least_squares(rows, group_sample_weights(data, alpha), targets, cfg.ridge);
        traj.regularized = traj.regularized || solved.regularized;
        theta = std::move(solved.theta);
        traj.average_iterate += (theta - traj.average_iterate) / static_cast<double>(t);
        if (observer) observer(t, theta, alpha);
        traj.checkpoints.push_back({t, theta, traj.average_iterate, alpha, group_losses(theta, data, kind)});
    }
    return traj;
}

double importance_weight(const GroupedDataset& data, std::size_t g) {
    return static_cast<double>(data.size()) /
           (static_cast<double>(data.num_groups()) * static_cast<double>(data.group_count(g)));
}

RunTrajectory run_vanilla(const GroupedDataset& data, const GrpoConfig& cfg, bool importance_sampling,
                          const IterateObserver& observer) {
    cfg.validate(data.num_groups());

    if (cfg.kind.type == LossType::Ipo) {
        Vector weights(static_cast<Eigen::Index>(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            weights[static_cast<Eigen::Index>(i)] = importance_sampling ? importance_weight(data, data[i].group) : 1.0;
        }
        const auto solved =
            weighted_least_squares(difference_matrix(data), weights, ipo_targets(data, cfg.kind.beta), 0.0);
        const auto alpha = GroupWeights::uniform(data.num_groups());
        RunTrajectory traj;
        traj.checkpoint_every = 1;
        traj.regularized = solved.regularized;
        const Vector zero = Vector::Zero(static_cast<Eigen::Index>(data.dim()));
        traj.checkpoints.push_back({0, zero, zero, alpha, group_losses(zero, data, cfg.kind)});
        traj.checkpoints.push_back(
            {1, solved.theta, solved.theta, alpha, group_losses(solved.theta, data, cfg.kind)});
        traj.average_iterate = solved.theta;
        if (observer) observer(1, solved.theta, alpha);
        return traj;
    }

    return run_stochastic(data, cfg, observer, [&](const GrpoState& state, Rng& rng) {
        const auto draw = draw_sample(data, SamplingStrategy::ProportionalToSize, rng);
        const auto& sample = data[draw.index];
        const double loss = sample_loss(state.theta, sample, cfg.kind);
        const Vector grad = sample_grad(state.theta, sample, cfg.kind);
        require_finite(loss, grad, draw.index);
        const double weight = importance_sampling ? importance_weight(data, draw.group) : 1.0;
        return GrpoState{descend(state.theta, grad, cfg.eta_theta * weight, cfg.radius), state.alpha};
    });
}

}  // namespace grpo
