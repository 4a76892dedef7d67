#include "grpo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "grpo/io.hpp"
#include "grpo/rng.hpp"

#ifndef GRPO_BUILD_ID
#define GRPO_BUILD_ID "unknown"
#endif

namespace grpo {

using nlohmann::json;

std::string_view build_id() { return GRPO_BUILD_ID; }

std::string_view to_string(Method method) {
    switch (method) {
        case Method::Dpo: return "dpo";
        case Method::Ipo: return "ipo";
        case Method::IsDpo: return "is-dpo";
        case Method::IsIpo: return "is-ipo";
        case Method::GrDpo: return "gr-dpo";
        case Method::GrIpo: return "gr-ipo";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (auto m : kAllMethods) {
        if (to_string(m) == name) return m;
    }
    throw Error(ErrorKind::ConfigError, "unknown method '" + std::string(name) + "'");
}

bool uses_gradient_steps(Method method) {
    return method == Method::Dpo || method == Method::IsDpo || method == Method::GrDpo;
}

LossType loss_type(Method method) { return uses_gradient_steps(method) ? LossType::Dpo : LossType::Ipo; }

ResolvedHyperparameters resolve(Method method, const Hyperparameters& hyper) {
    ResolvedHyperparameters r;
    if (loss_type(method) == LossType::Ipo) {
        r.beta = 0.1;
        r.eta_alpha = 0.01;
    }
    if (hyper.eta_theta) r.eta_theta = *hyper.eta_theta;
    if (hyper.eta_alpha) r.eta_alpha = *hyper.eta_alpha;
    if (hyper.beta) r.beta = *hyper.beta;
    if (hyper.iterations) r.iterations = *hyper.iterations;
    if (hyper.rounds) r.rounds = *hyper.rounds;
    return r;
}

std::vector<std::uint64_t> ExperimentConfig::default_seeds() {
    std::vector<std::uint64_t> seeds(20);
    for (std::uint64_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
    return seeds;
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (seeds.empty()) fail("at least one seed is required");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail("train_fraction must lie in (0, 1)");
    if (hyper.eta_theta && !positive(*hyper.eta_theta)) fail("eta_theta must be positive");
    if (hyper.eta_alpha && !positive(*hyper.eta_alpha)) fail("eta_alpha must be positive");
    if (hyper.beta && !positive(*hyper.beta)) fail("beta must be positive");
    if (hyper.rounds && *hyper.rounds == 0) fail("rounds must be positive");
    if (!positive(hyper.radius)) fail("radius must be positive");
    if (!(hyper.chi >= 0.0 && hyper.chi <= 1.0)) fail("chi must lie in [0, 1]");
    if (!(hyper.ridge >= 0.0) || !std::isfinite(hyper.ridge)) fail("ridge must be nonnegative");

    // Trade-off and sampling knobs only exist for the mirror-descent solver.
    const bool tradeoff_set = hyper.chi != 1.0 || hyper.mu.has_value() ||
                              hyper.strategy != SamplingStrategy::ProportionalToSize;
    if (tradeoff_set && method != Method::GrDpo) {
        fail("chi, mu and strategy apply to gr-dpo only, not " + std::string(to_string(method)));
    }
    if (hyper.mu) {
        Vector mu = Eigen::Map<const Vector>(hyper.mu->data(), static_cast<Eigen::Index>(hyper.mu->size()));
        try {
            GroupWeights::from_probabilities(mu);
        } catch (const Error& e) {
            fail(std::string("mu: ") + e.what());
        }
    }
    if (!ingest_path) {
        if (env.num_groups() != 2) fail("the synthetic environment needs exactly two reward vectors");
        for (const auto& t : env.theta_true) {
            if (t.size() != static_cast<Eigen::Index>(EnvSpec::kDim)) fail("reward vectors must have 4 entries");
        }
        if (env.distant_group > 1) fail("distant_group must be 0 or 1");
        if (env.n_actions < 3) fail("n_actions must be at least 3");
        if (env.distant_offset % env.n_actions == 0) fail("distant_offset must not be a multiple of n_actions");
        if (scenario.total_pairs < 4) fail("total_pairs must be at least 4");
        const auto sizes = scenario.group_sizes();
        if (sizes[0] < 2 || sizes[1] < 2) fail("every group needs at least two pairs");
    }
}

namespace {

std::string_view to_string(SamplingStrategy s) {
    return s == SamplingStrategy::UniformOverGroups ? "uniform" : "proportional";
}

SamplingStrategy parse_strategy(std::string_view name) {
    if (name == "proportional") return SamplingStrategy::ProportionalToSize;
    if (name == "uniform") return SamplingStrategy::UniformOverGroups;
    throw Error(ErrorKind::ConfigError, "unknown sampling strategy '" + std::string(name) + "'");
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
    if (!j.is_object()) throw Error(ErrorKind::ConfigError, std::string(where) + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
            throw Error(ErrorKind::ConfigError, "unknown key '" + key + "' in " + where);
        }
    }
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

json ExperimentConfig::to_json() const {
    json hyper_json = {
        {"radius", hyper.radius},
        {"strategy", std::string(to_string(hyper.strategy))},
        {"chi", hyper.chi},
        {"ridge", hyper.ridge},
        {"checkpoint_every", hyper.checkpoint_every},
    };
    if (hyper.eta_theta) hyper_json["eta_theta"] = *hyper.eta_theta;
    if (hyper.eta_alpha) hyper_json["eta_alpha"] = *hyper.eta_alpha;
    if (hyper.beta) hyper_json["beta"] = *hyper.beta;
    if (hyper.iterations) hyper_json["iterations"] = *hyper.iterations;
    if (hyper.rounds) hyper_json["rounds"] = *hyper.rounds;
    if (hyper.mu) hyper_json["mu"] = *hyper.mu;

    json thetas = json::array();
    for (const auto& t : env.theta_true) thetas.push_back(vector_json(t));

    json j = {
        {"method", std::string(grpo::to_string(method))},
        {"env",
         {{"features", std::string(grpo::to_string(env.feature_map))},
          {"n_actions", env.n_actions},
          {"theta_true", thetas},
          {"distant_offset", env.distant_offset},
          {"distant_group", env.distant_group}}},
        {"scenario",
         {{"kind", std::string(grpo::to_string(scenario.kind))},
          {"total_pairs", scenario.total_pairs},
          {"size_ratio", {scenario.size_ratio[0], scenario.size_ratio[1]}}}},
        {"hyper", hyper_json},
        {"seeds", seeds},
        {"train_fraction", train_fraction},
        {"fresh_validation", fresh_validation},
        {"fresh_eval_states", fresh_eval_states},
        {"iterate", iterate == ReportedIterate::Average ? "average" : "last"},
        {"output_dir", output_dir},
        {"threads", threads},
    };
    j["ingest"] = ingest_path ? json(*ingest_path) : json(nullptr);
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig c;
    try {
        reject_unknown(j,
                       {"method", "ingest", "env", "scenario", "hyper", "seeds", "train_fraction", "fresh_validation",
                        "fresh_eval_states", "iterate", "output_dir", "threads"},
                       "config");
        if (j.contains("method")) c.method = parse_method(j["method"].get<std::string>());
        if (j.contains("ingest") && !j["ingest"].is_null()) c.ingest_path = j["ingest"].get<std::string>();
        if (j.contains("env")) {
            const auto& e = j["env"];
            reject_unknown(e, {"features", "n_actions", "theta_true", "distant_offset", "distant_group"}, "env");
            if (e.contains("features")) c.env.feature_map = parse_feature_map(e["features"].get<std::string>());
            if (e.contains("n_actions")) c.env.n_actions = e["n_actions"].get<std::size_t>();
            if (e.contains("distant_offset")) c.env.distant_offset = e["distant_offset"].get<std::size_t>();
            if (e.contains("distant_group")) c.env.distant_group = e["distant_group"].get<std::size_t>();
            if (e.contains("theta_true")) {
                c.env.theta_true.clear();
                for (const auto& t : e["theta_true"]) {
                    const auto values = t.get<std::vector<double>>();
                    c.env.theta_true.push_back(
                        Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
                }
            }
        }
        if (j.contains("scenario")) {
            const auto& s = j["scenario"];
            reject_unknown(s, {"kind", "total_pairs", "size_ratio"}, "scenario");
            if (s.contains("kind")) c.scenario.kind = parse_scenario(s["kind"].get<std::string>());
            if (s.contains("total_pairs")) c.scenario.total_pairs = s["total_pairs"].get<std::size_t>();
            if (s.contains("size_ratio")) {
                const auto r = s["size_ratio"].get<std::vector<double>>();
                if (r.size() != 2) throw Error(ErrorKind::ConfigError, "size_ratio needs two entries");
                c.scenario.size_ratio = {r[0], r[1]};
            }
        }
        if (j.contains("hyper")) {
            const auto& h = j["hyper"];
            reject_unknown(h,
                           {"eta_theta", "eta_alpha", "beta", "iterations", "rounds", "radius", "strategy", "chi", "mu",
                            "ridge", "checkpoint_every"},
                           "hyper");
            auto& hp = c.hyper;
            if (h.contains("eta_theta")) hp.eta_theta = h["eta_theta"].get<double>();
            if (h.contains("eta_alpha")) hp.eta_alpha = h["eta_alpha"].get<double>();
            if (h.contains("beta")) hp.beta = h["beta"].get<double>();
            if (h.contains("iterations")) hp.iterations = h["iterations"].get<std::size_t>();
            if (h.contains("rounds")) hp.rounds = h["rounds"].get<std::size_t>();
            if (h.contains("radius")) hp.radius = h["radius"].get<double>();
            if (h.contains("strategy")) hp.strategy = parse_strategy(h["strategy"].get<std::string>());
            if (h.contains("chi")) hp.chi = h["chi"].get<double>();
            if (h.contains("mu")) hp.mu = h["mu"].get<std::vector<double>>();
            if (h.contains("ridge")) hp.ridge = h["ridge"].get<double>();
            if (h.contains("checkpoint_every")) hp.checkpoint_every = h["checkpoint_every"].get<std::size_t>();
        }
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("train_fraction")) c.train_fraction = j["train_fraction"].get<double>();
        if (j.contains("fresh_validation")) c.fresh_validation = j["fresh_validation"].get<bool>();
        if (j.contains("fresh_eval_states")) c.fresh_eval_states = j["fresh_eval_states"].get<std::size_t>();
        if (j.contains("iterate")) {
            const auto it = j["iterate"].get<std::string>();
            if (it != "average" && it != "last") throw Error(ErrorKind::ConfigError, "iterate must be average|last");
            c.iterate = it == "average" ? ReportedIterate::Average : ReportedIterate::Last;
        }
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
        if (j.contains("threads")) c.threads = j["threads"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ConfigError, e.what());
    }
    return c;
}

std::string ExperimentConfig::digest() const {
    // Seeds, output location and thread count do not change any single run.
    json j = to_json();
    j.erase("seeds");
    j.erase("output_dir");
    j.erase("threads");
    return fnv1a(j.dump());
}

std::string ExperimentConfig::family_digest() const {
    json j = to_json();
    json family = {{"ingest", j["ingest"]},
                   {"env", j["env"]},
                   {"scenario", j["scenario"]},
                   {"train_fraction", j["train_fraction"]},
                   {"fresh_validation", j["fresh_validation"]},
                   {"fresh_eval_states", j["fresh_eval_states"]}};
    return fnv1a(family.dump());
}

PreparedData prepare_data(const ExperimentConfig& config, std::uint64_t seed) {
    if (config.ingest_path) {
        auto data = ingest_jsonl(*config.ingest_path);
        auto [train, val] = split(data, config.train_fraction, Rng::derive(seed, 2));
        return {std::move(train), std::move(val), {}, false};
    }
    auto data = generate(config.env, config.scenario, Rng::derive(seed, 1));
    std::optional<GroupedDataset> train;
    std::optional<GroupedDataset> val;
    if (config.fresh_validation) {
        val = generate(config.env, config.scenario, Rng::derive(seed, 4));
        train = std::move(data);
    } else {
        auto halves = split(data, config.train_fraction, Rng::derive(seed, 2));
        train = std::move(halves.first);
        val = std::move(halves.second);
    }
    auto states = config.fresh_eval_states > 0
                      ? sample_states(val->num_groups(), config.fresh_eval_states, Rng::derive(seed, 5))
                      : states_by_group(*val);
    return {std::move(*train), std::move(*val), std::move(states), true};
}

RunRecord run_single(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto prepared = prepare_data(config, seed);
    const auto& train = prepared.train;
    const auto hp = resolve(config.method, config.hyper);

    GrpoConfig cfg;
    cfg.eta_theta = hp.eta_theta;
    cfg.eta_alpha = hp.eta_alpha;
    cfg.kind = loss_type(config.method) == LossType::Dpo ? LossKind::dpo(hp.beta) : LossKind::ipo(hp.beta);
    cfg.iterations = hp.iterations;
    cfg.radius = config.hyper.radius;
    cfg.strategy = config.hyper.strategy;
    cfg.seed = Rng::derive(seed, 3);
    cfg.chi = config.hyper.chi;
    if (config.hyper.mu) {
        const auto& mu = *config.hyper.mu;
        cfg.mu = GroupWeights::from_probabilities(
            Eigen::Map<const Vector>(mu.data(), static_cast<Eigen::Index>(mu.size())));
    }
    cfg.checkpoint_every = config.hyper.checkpoint_every;

    RunTrajectory traj;
    switch (config.method) {
        case Method::Dpo:
        case Method::Ipo: traj = run_vanilla(train, cfg, false); break;
        case Method::IsDpo:
        case Method::IsIpo: traj = run_vanilla(train, cfg, true); break;
        case Method::GrDpo: traj = run_grpo(train, cfg); break;
        case Method::GrIpo:
            traj = run_gr_ipo(train, {hp.beta, hp.eta_alpha, hp.rounds, config.hyper.ridge});
            break;
    }

    RunRecord record;
    record.config_digest = config.digest();
    record.family_digest = config.family_digest();
    record.method = config.method;
    record.seed = seed;
    record.num_groups = train.num_groups();
    record.regularized = traj.regularized;

    const bool use_average = uses_gradient_steps(config.method) && config.iterate == ReportedIterate::Average;
    const EnvSpec* env = prepared.synthetic ? &config.env : nullptr;
    const auto* states = prepared.synthetic ? &prepared.eval_states : nullptr;
    for (const auto& cp : traj.checkpoints) {
        const Vector& theta = use_average ? cp.average : cp.theta;
        const auto& a = cp.alpha.values();
        record.rows.push_back({cp.iteration, evaluate(theta, prepared.validation, cfg.kind, env, states),
                               std::vector<double>(a.data(), a.data() + a.size())});
    }
    record.final_metrics = record.rows.back().metrics;
    const Vector& final_theta = use_average ? traj.final().average : traj.final().theta;
    record.final_theta.assign(final_theta.data(), final_theta.data() + final_theta.size());
    record.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return record;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<RunRecord> records(config.seeds.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
            const auto seed = config.seeds[i];
            try {
                records[i] = run_single(config, seed);
            } catch (const Error& e) {
                RunRecord failed;
                failed.config_digest = config.digest();
                failed.family_digest = config.family_digest();
                failed.method = config.method;
                failed.seed = seed;
                failed.error = e.what();
                failed.error_kind = e.kind();
                records[i] = std::move(failed);
            }
            if (!config.output_dir.empty()) write_run_files(records[i], config, config.output_dir);
        }
    };

    std::size_t threads = config.threads > 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, config.seeds.size());
    if (!config.output_dir.empty()) std::filesystem::create_directories(config.output_dir);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return records;
}

std::string trajectory_csv(const RunRecord& record) {
    const auto k = record.num_groups;
    std::ostringstream out;
    out << "iter";
    for (std::size_t g = 0; g < k; ++g) out << ",loss_g" << g;
    out << ",worst_loss";
    for (std::size_t g = 0; g < k; ++g) out << ",reward_error_g" << g;
    out << ",worst_reward_error";
    for (std::size_t g = 0; g < k; ++g) out << ",alpha_g" << g;
    out << '\n';

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : record.rows) {
        const auto& m = row.metrics;
        out << row.iteration;
        for (double v : m.group_val_losses) out << ',' << format_shortest(v);
        out << ',' << format_shortest(m.max_val_loss.value);
        for (std::size_t g = 0; g < k; ++g) {
            out << ',' << format_shortest(m.group_reward_errors.empty() ? nan : m.group_reward_errors[g]);
        }
        out << ',' << format_shortest(m.max_reward_error ? m.max_reward_error->value : nan);
        for (double v : row.alpha) out << ',' << format_shortest(v);
        out << '\n';
    }
    return out.str();
}

namespace {

double parse_cell(std::string_view cell, std::size_t line) {
    if (cell == "nan" || cell == "-nan") return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw Error(ErrorKind::ParseError, "CSV line " + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
    }
    return value;
}

std::vector<std::string_view> split_commas(std::string_view text) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        cells.push_back(text.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

std::vector<CheckpointMetrics> parse_trajectory_csv(std::string_view text) {
    std::vector<CheckpointMetrics> rows;
    std::size_t line_no = 0;
    std::size_t k = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (line_no == 1) {
            if (cells.empty() || cells[0] != "iter" || (cells.size() - 3) % 3 != 0) {
                throw Error(ErrorKind::ParseError, "CSV header is not a trajectory header");
            }
            k = (cells.size() - 3) / 3;
            continue;
        }
        if (cells.size() != 3 * k + 3) {
            throw Error(ErrorKind::ParseError, "CSV line " + std::to_string(line_no) + " has the wrong column count");
        }
        CheckpointMetrics row;
        row.iteration = static_cast<std::size_t>(parse_cell(cells[0], line_no));
        auto& m = row.metrics;
        for (std::size_t g = 0; g < k; ++g) m.group_val_losses.push_back(parse_cell(cells[1 + g], line_no));
        m.max_val_loss = arg_max(m.group_val_losses);
        std::vector<double> errors;
        for (std::size_t g = 0; g < k; ++g) errors.push_back(parse_cell(cells[2 + k + g], line_no));
        if (std::none_of(errors.begin(), errors.end(), [](double v) { return std::isnan(v); })) {
            m.group_reward_errors = errors;
            m.max_reward_error = arg_max(errors);
        }
        for (std::size_t g = 0; g < k; ++g) row.alpha.push_back(parse_cell(cells[3 + 2 * k + g], line_no));
        rows.push_back(std::move(row));
    }
    if (k == 0) throw Error(ErrorKind::ParseError, "empty trajectory CSV");
    return rows;
}

json metrics_json(const MetricsReport& m) {
    json j = {
        {"group_val_losses", m.group_val_losses},
        {"max_val_loss", {{"value", m.max_val_loss.value}, {"group", m.max_val_loss.group}}},
        {"group_accuracies", m.group_accuracies},
        {"min_accuracy", {{"value", m.min_accuracy.value}, {"group", m.min_accuracy.group}}},
    };
    if (m.max_reward_error) {
        j["group_reward_errors"] = m.group_reward_errors;
        j["max_reward_error"] = {{"value", m.max_reward_error->value}, {"group", m.max_reward_error->group}};
    } else {
        j["group_reward_errors"] = json::array();
        j["max_reward_error"] = nullptr;
    }
    return j;
}

namespace {

std::string run_stem(const RunRecord& record) {
    return std::string(to_string(record.method)) + "_seed" + std::to_string(record.seed);
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    m.group_val_losses = j.at("group_val_losses").get<std::vector<double>>();
    m.max_val_loss = {j.at("max_val_loss").at("value").get<double>(), j.at("max_val_loss").at("group").get<std::size_t>()};
    m.group_accuracies = j.at("group_accuracies").get<std::vector<double>>();
    m.min_accuracy = {j.at("min_accuracy").at("value").get<double>(), j.at("min_accuracy").at("group").get<std::size_t>()};
    if (!j.at("max_reward_error").is_null()) {
        m.group_reward_errors = j.at("group_reward_errors").get<std::vector<double>>();
        m.max_reward_error = GroupExtreme{j["max_reward_error"].at("value").get<double>(),
                                          j["max_reward_error"].at("group").get<std::size_t>()};
    }
    return m;
}

}  // namespace

json run_manifest(const RunRecord& record, const ExperimentConfig& config) {
    json j = {
        {"config", config.to_json()},
        {"config_digest", record.config_digest},
        {"family_digest", record.family_digest},
        {"method", std::string(to_string(record.method))},
        {"seed", record.seed},
        {"build_id", std::string(build_id())},
        {"duration_s", record.duration_s},
        {"num_groups", record.num_groups},
        {"regularized", record.regularized},
    };
    if (record.error) {
        j["error"] = {{"kind", std::string(to_string(*record.error_kind))}, {"message", *record.error}};
        j["final_metrics"] = nullptr;
    } else {
        j["final_metrics"] = metrics_json(record.final_metrics);
        j["final_theta"] = record.final_theta;
        j["trajectory_csv"] = run_stem(record) + ".csv";
    }
    return j;
}

void write_run_files(const RunRecord& record, const ExperimentConfig& config, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto stem = run_stem(record);
    if (!record.error) {
        std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
        csv << trajectory_csv(record);
    }
    std::ofstream manifest(dir / (stem + ".json"), std::ios::binary);
    manifest << run_manifest(record, config).dump(2) << '\n';
}

std::vector<RunRecord> load_records(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::ParseError, dir.string() + " is not a directory");
    std::vector<std::filesystem::path> manifests;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".json") manifests.push_back(entry.path());
    }
    std::sort(manifests.begin(), manifests.end());

    std::vector<RunRecord> records;
    for (const auto& path : manifests) {
        std::ifstream in(path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("config_digest") || !j.contains("seed")) continue;
        try {
            RunRecord r;
            r.config_digest = j["config_digest"].get<std::string>();
            r.family_digest = j.at("family_digest").get<std::string>();
            r.method = parse_method(j.at("method").get<std::string>());
            r.seed = j.at("seed").get<std::uint64_t>();
            r.duration_s = j.at("duration_s").get<double>();
            r.num_groups = j.at("num_groups").get<std::size_t>();
            r.regularized = j.value("regularized", false);
            if (j.contains("error")) {
                r.error = j["error"].at("message").get<std::string>();
            } else {
                r.final_metrics = metrics_from_json(j.at("final_metrics"));
                r.final_theta = j.at("final_theta").get<std::vector<double>>();
                std::ifstream csv(dir / j.at("trajectory_csv").get<std::string>(), std::ios::binary);
                if (!csv) throw Error(ErrorKind::ParseError, "missing trajectory CSV for " + path.string());
                std::stringstream buffer;
                buffer << csv.rdbuf();
                r.rows = parse_trajectory_csv(buffer.str());
            }
            records.push_back(std::move(r));
        } catch (const json::exception& e) {
            throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
        }
    }
    return records;
}

}  // namespace grpo
