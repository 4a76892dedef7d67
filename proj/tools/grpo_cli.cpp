// Command-line front end: generate data, train one seed, evaluate a parameter
// vector, sweep methods over seeds, and render reports.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "grpo/harness.hpp"
#include "grpo/io.hpp"
#include "grpo/report.hpp"
#include "grpo/rng.hpp"

namespace {

using grpo::Error;
using grpo::ErrorKind;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError: return kExitConfig;
        case ErrorKind::DegenerateSystem:
        case ErrorKind::NonFiniteLoss: return kExitNumerical;
        default: return kExitData;
    }
}

/// Flags shared by the verbs that build an ExperimentConfig.
struct ConfigFlags {
    std::string config_path;
    std::optional<std::string> method;
    std::optional<std::string> scenario;
    std::optional<std::string> features;
    std::optional<std::string> ingest;
    std::optional<std::size_t> iterations;
    std::optional<std::size_t> pairs;
    std::optional<std::size_t> threads;
    std::optional<std::string> iterate;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON experiment config");
        cmd->add_option("--method", method, "dpo | ipo | is-dpo | is-ipo | gr-dpo | gr-ipo");
        cmd->add_option("--scenario", scenario, "size | distribution | both");
        cmd->add_option("--features", features, "swapped | same | flipped");
        cmd->add_option("--ingest", ingest, "train on a JSONL dataset instead of the synthetic environment");
        cmd->add_option("--iterations", iterations, "SGD iterations for gradient methods");
        cmd->add_option("--pairs", pairs, "total preference pairs");
        cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
        cmd->add_option("--iterate", iterate, "average | last");
    }

    grpo::ExperimentConfig build() const {
        grpo::ExperimentConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorKind::ConfigError, "cannot open config " + config_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::ConfigError, config_path + ": " + e.what());
            }
            c = grpo::ExperimentConfig::from_json(j);
        }
        if (method) c.method = grpo::parse_method(*method);
        if (scenario) c.scenario.kind = grpo::parse_scenario(*scenario);
        if (features) c.env.feature_map = grpo::parse_feature_map(*features);
        if (ingest) c.ingest_path = *ingest;
        if (iterations) c.hyper.iterations = *iterations;
        if (pairs) c.scenario.total_pairs = *pairs;
        if (threads) c.threads = *threads;
        if (iterate) {
            if (*iterate != "average" && *iterate != "last") throw Error(ErrorKind::ConfigError, "iterate must be average|last");
            c.iterate = *iterate == "average" ? grpo::ReportedIterate::Average : grpo::ReportedIterate::Last;
        }
        return c;
    }
};

void print_final(const grpo::RunRecord& r) {
    if (r.error) {
        std::printf("%-7s seed %-4llu failed: %s\n", std::string(grpo::to_string(r.method)).c_str(),
                    static_cast<unsigned long long>(r.seed), r.error->c_str());
        return;
    }
    const auto& m = r.final_metrics;
    std::printf("%-7s seed %-4llu max_val_loss %.6g", std::string(grpo::to_string(r.method)).c_str(),
                static_cast<unsigned long long>(r.seed), m.max_val_loss.value);
    if (m.max_reward_error) std::printf("  max_reward_error %.6g", m.max_reward_error->value);
    std::printf("\n");
}

int worst_exit(const std::vector<grpo::RunRecord>& records) {
    int code = 0;
    for (const auto& r : records) {
        if (r.error_kind) code = std::max(code, exit_code(*r.error_kind));
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group-robust preference optimization on log-linear policies"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "write a synthetic preference dataset as JSONL");
    std::string gen_scenario = "both";
    std::string gen_features = "swapped";
    std::uint64_t gen_seed = 0;
    std::size_t gen_pairs = 300;
    std::string gen_out = "data.jsonl";
    gen->add_option("--scenario", gen_scenario, "size | distribution | both")->capture_default_str();
    gen->add_option("--features", gen_features, "swapped | same | flipped")->capture_default_str();
    gen->add_option("--seed", gen_seed, "seed")->capture_default_str();
    gen->add_option("--pairs", gen_pairs, "total preference pairs")->capture_default_str();
    gen->add_option("--out", gen_out, "output JSONL path")->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "train and evaluate one seed");
    ConfigFlags train_flags;
    train_flags.attach(train);
    std::uint64_t train_seed = 0;
    std::string train_out = "out";
    train->add_option("--seed", train_seed, "seed")->capture_default_str();
    train->add_option("--out", train_out, "output directory")->capture_default_str();

    // eval
    auto* ev = app.add_subcommand("eval", "evaluate a parameter vector on a JSONL dataset");
    std::string eval_data;
    std::string eval_theta;
    std::string eval_run;
    std::string eval_loss = "dpo";
    double eval_beta = 1.0;
    ev->add_option("--data", eval_data, "JSONL dataset")->required();
    ev->add_option("--theta", eval_theta, "comma-separated parameter vector");
    ev->add_option("--run", eval_run, "run manifest whose final_theta is evaluated");
    ev->add_option("--loss", eval_loss, "dpo | ipo")->capture_default_str();
    ev->add_option("--beta", eval_beta, "loss temperature")->capture_default_str();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run several methods over many seeds and summarize");
    ConfigFlags sweep_flags;
    sweep_flags.attach(sweep);
    std::vector<std::string> sweep_methods;
    std::size_t sweep_seeds = 20;
    std::uint64_t sweep_first_seed = 0;
    std::string sweep_out = "out";
    sweep->add_option("--methods", sweep_methods, "methods to run (default: all six)");
    sweep->add_option("--seeds", sweep_seeds, "number of seeds")->capture_default_str();
    sweep->add_option("--seed", sweep_first_seed, "first seed")->capture_default_str();
    sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();

    // report
    auto* rep = app.add_subcommand("report", "aggregate run files into a summary CSV and SVG curves");
    std::string rep_in = "out";
    std::string rep_kind = "all";
    std::string rep_out;
    rep->add_option("--in", rep_in, "directory with run files")->capture_default_str();
    rep->add_option("--kind", rep_kind, "csv-summary | svg-curves | all")->capture_default_str();
    rep->add_option("--out", rep_out, "output directory (default: --in)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*gen) {
            grpo::EnvSpec env;
            env.feature_map = grpo::parse_feature_map(gen_features);
            grpo::Scenario scenario;
            scenario.kind = grpo::parse_scenario(gen_scenario);
            scenario.total_pairs = gen_pairs;
            grpo::ExperimentConfig check;
            check.env = env;
            check.scenario = scenario;
            check.validate();
            const auto data = grpo::generate(env, scenario, grpo::Rng::derive(gen_seed, 1));
            grpo::save_jsonl(data, gen_out);
            std::printf("wrote %zu pairs (%zu groups) to %s\n", data.size(), data.num_groups(), gen_out.c_str());
            return 0;
        }
        if (*train) {
            auto config = train_flags.build();
            config.seeds = {train_seed};
            config.output_dir = train_out;
            const auto records = grpo::run_experiment(config);
            print_final(records.front());
            return worst_exit(records);
        }
        if (*ev) {
            const auto data = grpo::ingest_jsonl(eval_data);
            std::vector<double> theta;
            if (!eval_run.empty()) {
                std::ifstream in(eval_run);
                if (!in) throw Error(ErrorKind::ConfigError, "cannot open run manifest " + eval_run);
                try {
                    theta = nlohmann::json::parse(in).at("final_theta").get<std::vector<double>>();
                } catch (const nlohmann::json::exception& e) {
                    throw Error(ErrorKind::ParseError, eval_run + ": " + e.what());
                }
            } else if (!eval_theta.empty()) {
                std::stringstream ss(eval_theta);
                for (std::string cell; std::getline(ss, cell, ',');) {
                    try {
                        theta.push_back(std::stod(cell));
                    } catch (const std::exception&) {
                        throw Error(ErrorKind::ConfigError, "bad --theta entry '" + cell + "'");
                    }
                }
            } else {
                throw Error(ErrorKind::ConfigError, "eval needs --theta or --run");
            }
            if (theta.size() != data.dim()) {
                throw Error(ErrorKind::DimensionMismatch, "theta has " + std::to_string(theta.size()) +
                                                              " entries, data has dimension " + std::to_string(data.dim()));
            }
            grpo::LossKind kind;
            if (eval_loss == "dpo") {
                kind = grpo::LossKind::dpo(eval_beta);
            } else if (eval_loss == "ipo") {
                kind = grpo::LossKind::ipo(eval_beta);
            } else {
                throw Error(ErrorKind::ConfigError, "loss must be dpo|ipo");
            }
            kind.validate();
            const grpo::Vector v = Eigen::Map<const grpo::Vector>(theta.data(), static_cast<Eigen::Index>(theta.size()));
            // Reward errors need the environment; use it only when states were recorded.
            grpo::EnvSpec env;
            const auto states = grpo::states_by_group(data);
            const bool synthetic = data.dim() == grpo::EnvSpec::kDim && data.num_groups() == env.num_groups() &&
                                   std::all_of(states.begin(), states.end(), [](const auto& s) { return !s.empty(); });
            const auto metrics = grpo::evaluate(v, data, kind, synthetic ? &env : nullptr, synthetic ? &states : nullptr);
            std::printf("%s\n", grpo::metrics_json(metrics).dump(2).c_str());
            return 0;
        }
        if (*sweep) {
            auto config = sweep_flags.build();
            config.output_dir = sweep_out;
            config.seeds.clear();
            for (std::size_t i = 0; i < sweep_seeds; ++i) config.seeds.push_back(sweep_first_seed + i);
            std::vector<grpo::Method> methods;
            if (sweep_methods.empty()) {
                methods.assign(std::begin(grpo::kAllMethods), std::end(grpo::kAllMethods));
            } else {
                for (const auto& m : sweep_methods) methods.push_back(grpo::parse_method(m));
            }
            std::vector<grpo::RunRecord> all;
            for (auto m : methods) {
                config.method = m;
                auto records = grpo::run_experiment(config);
                all.insert(all.end(), records.begin(), records.end());
            }
            const auto rows = grpo::summarize(all);
            for (const auto& row : rows) {
                std::printf("%-7s runs %-3zu max_val_loss %.6g +- %.3g", std::string(grpo::to_string(row.method)).c_str(),
                            row.runs, row.max_val_loss.mean, row.max_val_loss.stderr_);
                if (row.max_reward_error) {
                    std::printf("  max_reward_error %.6g +- %.3g", row.max_reward_error->mean, row.max_reward_error->stderr_);
                }
                std::printf("\n");
            }
            grpo::report(all, grpo::ReportKind::CsvSummary, sweep_out);
            return worst_exit(all);
        }
        if (*rep) {
            const auto records = grpo::load_records(rep_in);
            const std::string out = rep_out.empty() ? rep_in : rep_out;
            std::vector<std::filesystem::path> written;
            if (rep_kind == "all") {
                for (auto kind : {grpo::ReportKind::CsvSummary, grpo::ReportKind::SvgCurves}) {
                    auto paths = grpo::report(records, kind, out);
                    written.insert(written.end(), paths.begin(), paths.end());
                }
            } else {
                written = grpo::report(records, grpo::parse_report_kind(rep_kind), out);
            }
            for (const auto& p : written) std::printf("wrote %s\n", p.string().c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return 0;
}
