#include "grpo/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "grpo/io.hpp"

namespace grpo {

ReportKind parse_report_kind(std::string_view name) {
    if (name == "csv-summary") return ReportKind::CsvSummary;
    if (name == "svg-curves") return ReportKind::SvgCurves;
    throw Error(ErrorKind::ConfigError, "unknown report kind '" + std::string(name) + "'");
}

MeanStderr mean_stderr(std::vector<double> values) {
    if (values.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() == 1) return {mean, 0.0};
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(), [&](double v) { return (v - mean) * (v - mean); });
    std::sort(sq.begin(), sq.end());
    const double var = std::accumulate(sq.begin(), sq.end(), 0.0) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

namespace {

/// Successful records grouped by method, after the consistency checks.
std::map<Method, std::vector<const RunRecord*>> group_by_method(const std::vector<RunRecord>& records) {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InconsistentRecords, msg); };
    if (records.empty()) fail("no records");
    const auto& family = records.front().family_digest;
    std::map<Method, std::vector<const RunRecord*>> by_method;
    for (const auto& r : records) {
        if (r.family_digest != family) fail("records come from different data families");
        if (r.error) continue;
        auto& bucket = by_method[r.method];
        if (!bucket.empty()) {
            const auto& first = *bucket.front();
            const std::string name(to_string(r.method));
            if (r.config_digest != first.config_digest) fail(name + " runs use different configurations");
            if (r.num_groups != first.num_groups) fail(name + " runs have different group counts");
            if (r.rows.size() != first.rows.size()) fail(name + " runs have different checkpoint grids");
            for (std::size_t i = 0; i < r.rows.size(); ++i) {
                if (r.rows[i].iteration != first.rows[i].iteration) fail(name + " runs have different checkpoint grids");
            }
        }
        bucket.push_back(&r);
    }
    if (by_method.empty()) fail("every run failed");
    return by_method;
}

std::optional<double> metric_value(const MetricsReport& m, CurveMetric metric) {
    if (metric == CurveMetric::MaxValLoss) return m.max_val_loss.value;
    if (m.max_reward_error) return m.max_reward_error->value;
    return std::nullopt;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    const auto by_method = group_by_method(records);
    std::vector<SummaryRow> rows;
    for (auto method : kAllMethods) {
        const auto it = by_method.find(method);
        if (it == by_method.end()) continue;
        std::vector<double> losses;
        std::vector<double> errors;
        for (const auto* r : it->second) {
            losses.push_back(r->final_metrics.max_val_loss.value);
            if (r->final_metrics.max_reward_error) errors.push_back(r->final_metrics.max_reward_error->value);
        }
        SummaryRow row{method, it->second.size(), mean_stderr(losses), std::nullopt};
        if (errors.size() == losses.size()) row.max_reward_error = mean_stderr(errors);
        rows.push_back(row);
    }
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << "method,runs,final_max_val_loss_mean,final_max_val_loss_stderr,final_max_reward_error_mean,"
           "final_max_reward_error_stderr\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& row : rows) {
        const auto err = row.max_reward_error.value_or(MeanStderr{nan, nan});
        out << to_string(row.method) << ',' << row.runs << ',' << format_shortest(row.max_val_loss.mean) << ','
            << format_shortest(row.max_val_loss.stderr_) << ',' << format_shortest(err.mean) << ','
            << format_shortest(err.stderr_) << '\n';
    }
    return out.str();
}

std::vector<Band> curve_bands(const std::vector<RunRecord>& records, CurveMetric metric) {
    const auto by_method = group_by_method(records);
    std::vector<Band> bands;
    for (auto method : kAllMethods) {
        const auto it = by_method.find(method);
        if (it == by_method.end()) continue;
        const auto& runs = it->second;
        Band band{method, {}, {}};
        bool available = true;
        for (std::size_t i = 0; i < runs.front()->rows.size() && available; ++i) {
            std::vector<double> values;
            for (const auto* r : runs) {
                const auto v = metric_value(r->rows[i].metrics, metric);
                if (!v) {
                    available = false;
                    break;
                }
                values.push_back(*v);
            }
            band.iterations.push_back(static_cast<double>(runs.front()->rows[i].iteration));
            band.points.push_back(mean_stderr(values));
        }
        if (available) bands.push_back(std::move(band));
    }
    return bands;
}

namespace {

constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

std::string render_svg(const std::vector<Band>& bands, const std::string& title) {
    constexpr double width = 720, height = 440, left = 70, right = 150, top = 40, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double x_max = 1.0;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();
    for (const auto& b : bands) {
        if (!b.iterations.empty()) x_max = std::max(x_max, b.iterations.back());
        for (const auto& p : b.points) {
            y_min = std::min(y_min, p.mean - p.stderr_);
            y_max = std::max(y_max, p.mean + p.stderr_);
        }
    }
    if (!std::isfinite(y_min) || !std::isfinite(y_max)) {
        y_min = 0.0;
        y_max = 1.0;
    }
    if (y_max - y_min < 1e-12) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    auto sx = [&](double x) { return left + plot_w * x / x_max; };
    auto sy = [&](double y) { return top + plot_h * (1.0 - (y - y_min) / (y_max - y_min)); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x_max * i / 4.0;
        const double yv = y_min + (y_max - y_min) * i / 4.0;
        out << "<text x=\"" << fixed(sx(xv)) << "\" y=\"" << fixed(top + plot_h + 18)
            << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
        out << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(sy(yv) + 4) << "\" text-anchor=\"end\">"
            << tick_label(yv) << "</text>\n";
    }
    out << "<text x=\"" << fixed(left + plot_w / 2) << "\" y=\"" << fixed(height - 10)
        << "\" text-anchor=\"middle\">iteration</text>\n";

    for (std::size_t i = 0; i < bands.size(); ++i) {
        const auto& b = bands[i];
        if (b.points.empty()) continue;
        const char* color = kColors[static_cast<std::size_t>(b.method) % std::size(kColors)];
        auto xs = b.iterations;
        auto pts = b.points;
        if (xs.back() < x_max) {
            xs.push_back(x_max);
            pts.push_back(pts.back());
        }
        std::ostringstream upper;
        std::ostringstream lower;
        std::ostringstream line;
        for (std::size_t j = 0; j < xs.size(); ++j) {
            upper << fixed(sx(xs[j])) << ',' << fixed(sy(pts[j].mean + pts[j].stderr_)) << ' ';
            line << fixed(sx(xs[j])) << ',' << fixed(sy(pts[j].mean)) << ' ';
        }
        for (std::size_t j = xs.size(); j-- > 0;) {
            lower << fixed(sx(xs[j])) << ',' << fixed(sy(pts[j].mean - pts[j].stderr_)) << ' ';
        }
        out << "<polygon points=\"" << upper.str() << lower.str() << "\" fill=\"" << color
            << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
        out << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << fixed(width - right + 12) << "\" y1=\"" << fixed(ly) << "\" x2=\""
            << fixed(width - right + 32) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fixed(width - right + 38) << "\" y=\"" << fixed(ly + 4) << "\">" << to_string(b.method)
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::vector<std::filesystem::path> report(const std::vector<RunRecord>& records, ReportKind kind,
                                          const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    auto write = [&](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error(ErrorKind::ParseError, "cannot open " + path.string() + " for writing");
        out << text;
        written.push_back(path);
    };
    if (kind == ReportKind::CsvSummary) {
        write(out_dir / "summary.csv", summary_csv(summarize(records)));
        return written;
    }
    write(out_dir / "max_val_loss.svg", render_svg(curve_bands(records, CurveMetric::MaxValLoss), "max validation loss"));
    const auto errors = curve_bands(records, CurveMetric::MaxRewardError);
    if (!errors.empty()) write(out_dir / "max_reward_error.svg", render_svg(errors, "max reward error"));
    return written;
}

}  // namespace grpo
