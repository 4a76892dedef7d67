#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "grpo/core.hpp"
#include "grpo/eval.hpp"
#include "grpo/optim.hpp"
#include "grpo/synthenv.hpp"

namespace grpo {

enum class Method { Dpo, Ipo, IsDpo, IsIpo, GrDpo, GrIpo };

inline constexpr Method kAllMethods[] = {Method::Dpo, Method::IsDpo, Method::GrDpo,
                                         Method::Ipo, Method::IsIpo, Method::GrIpo};

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
bool uses_gradient_steps(Method method);
LossType loss_type(Method method);

/// Which iterate of a stochastic solver is evaluated and reported.
enum class ReportedIterate { Last, Average };

/// Optional overrides; unset entries fall back to the per-method defaults.
struct Hyperparameters {
    std::optional<double> eta_theta;
    std::optional<double> eta_alpha;
    std::optional<double> beta;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> rounds;
    double radius = 100.0;
    SamplingStrategy strategy = SamplingStrategy::ProportionalToSize;
    double chi = 1.0;
    std::optional<std::vector<double>> mu;
    double ridge = 0.0;
    std::size_t checkpoint_every = 0;
};

/// Hyperparameters with every default filled in for one method.
struct ResolvedHyperparameters {
    double eta_theta = 0.9;
    double eta_alpha = 0.5;
    double beta = 1.0;
    std::size_t iterations = 2000;
    std::size_t rounds = 100;
};

/// Defaults for synthetic runs: DPO-family lr 0.9, beta 1, alpha step 0.5,
/// 2000 iterations; IPO-family beta 0.1, GR-IPO alpha step 0.01 over 100 rounds.
ResolvedHyperparameters resolve(Method method, const Hyperparameters& hyper);

struct ExperimentConfig {
    Method method = Method::GrDpo;
    /// When set, data comes from this JSONL file instead of the synthetic environment.
    std::optional<std::string> ingest_path;
    EnvSpec env;
    Scenario scenario;
    Hyperparameters hyper;
    std::vector<std::uint64_t> seeds = default_seeds();
    double train_fraction = 0.8;
    /// Draw a fresh validation set instead of holding out part of the data.
    bool fresh_validation = false;
    /// Evaluate reward errors on freshly sampled states (this many per group)
    /// instead of the validation states.
    std::size_t fresh_eval_states = 0;
    ReportedIterate iterate = ReportedIterate::Average;
    std::string output_dir = "out";
    /// Worker threads for seed-level parallelism; 0 uses the hardware count.
    std::size_t threads = 0;

    static std::vector<std::uint64_t> default_seeds();

    /// Throws ConfigError on invalid or incompatible settings.
    void validate() const;
    nlohmann::json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static ExperimentConfig from_json(const nlohmann::json& j);
    /// Hex FNV-1a of the canonical (key-sorted) JSON; independent of key order
    /// in the source file.
    std::string digest() const;
    std::string family_digest() const;
};

/// Metrics of one checkpoint of one run.
struct CheckpointMetrics {
    std::size_t iteration = 0;
    MetricsReport metrics;
    std::vector<double> alpha;
};

struct RunRecord {
    std::string config_digest;
    /// Digest of the data-defining part of the config (environment, scenario,
    /// data source, split); runs that can be aggregated together share it.
    std::string family_digest;
    Method method = Method::GrDpo;
    std::uint64_t seed = 0;
    std::size_t num_groups = 0;
    std::vector<CheckpointMetrics> rows;
    MetricsReport final_metrics;
    std::vector<double> final_theta;
    double duration_s = 0.0;
    bool regularized = false;
    /// Set when the solver failed for this seed; rows are then empty.
    std::optional<std::string> error;
    std::optional<ErrorKind> error_kind;
};

/// Data for one seed: training and validation sets plus evaluation states.
struct PreparedData {
    GroupedDataset train;
    GroupedDataset validation;
    /// Empty for ingested data without an environment.
    std::vector<std::vector<State>> eval_states;
    bool synthetic = false;
};

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed);

/// Trains and evaluates one seed. Solver errors propagate.
RunRecord run_single(const ExperimentConfig& config, std::uint64_t seed);

/// Runs every seed of the config (concurrently when threads > 1). A failing
/// seed is recorded with its error and does not stop the others. When
/// output_dir is non-empty, writes <method>_seed<seed>.csv and .json per run.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

/// Trajectory CSV: iter, loss_g*, worst_loss, reward_error_g*, worst_reward_error,
/// alpha_g*. Reward error cells are "nan" when no reward model is known.
std::string trajectory_csv(const RunRecord& record);
/// Inverse of trajectory_csv (rows only).
std::vector<CheckpointMetrics> parse_trajectory_csv(std::string_view text);

nlohmann::json metrics_json(const MetricsReport& metrics);
/// {config, seed, build_id, duration_s, final_metrics, ...}.
nlohmann::json run_manifest(const RunRecord& record, const ExperimentConfig& config);
/// Writes <dir>/<method>_seed<seed>.{csv,json}.
void write_run_files(const RunRecord& record, const ExperimentConfig& config, const std::filesystem::path& dir);
/// Loads every run manifest (and its CSV) found in a directory, sorted by file name.
std::vector<RunRecord> load_records(const std::filesystem::path& dir);

std::string_view build_id();

}  // namespace grpo
