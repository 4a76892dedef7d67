#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grpo/harness.hpp"

namespace grpo {

enum class ReportKind { CsvSummary, SvgCurves };

ReportKind parse_report_kind(std::string_view name);

struct MeanStderr {
    double mean = 0.0;
    /// Sample standard deviation over sqrt(n); 0 for a single value.
    double stderr_ = 0.0;
};

/// Independent of the order of values.
MeanStderr mean_stderr(std::vector<double> values);

struct SummaryRow {
    Method method = Method::Dpo;
    std::size_t runs = 0;
    MeanStderr max_val_loss;
    /// Unset when the runs carry no reward errors.
    std::optional<MeanStderr> max_reward_error;
};

/// One row per method present, in kAllMethods order. Failed runs are skipped.
/// Throws InconsistentRecords when records mix data families, or when one
/// method mixes configurations, group counts or checkpoint grids.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);

/// Header: method,runs,final_max_val_loss_mean,final_max_val_loss_stderr,
/// final_max_reward_error_mean,final_max_reward_error_stderr
std::string summary_csv(const std::vector<SummaryRow>& rows);

enum class CurveMetric { MaxValLoss, MaxRewardError };

/// Mean and stderr of one metric across seeds at each checkpoint of a method.
struct Band {
    Method method = Method::Dpo;
    std::vector<double> iterations;
    std::vector<MeanStderr> points;
};

/// Same consistency checks as summarize. Methods without the metric are omitted.
std::vector<Band> curve_bands(const std::vector<RunRecord>& records, CurveMetric metric);

/// Line chart of every band (mean polyline plus a shaded +-stderr polygon).
/// Bands ending before the widest x range are held at their last value.
std::string render_svg(const std::vector<Band>& bands, const std::string& title);

/// Writes summary.csv, or one SVG per metric (max_val_loss.svg,
/// max_reward_error.svg). Returns the written paths.
std::vector<std::filesystem::path> report(const std::vector<RunRecord>& records, ReportKind kind,
                                          const std::filesystem::path& out_dir);

}  // namespace grpo
