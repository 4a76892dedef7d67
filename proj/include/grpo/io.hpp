#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "grpo/core.hpp"

namespace grpo {

/// Shortest decimal that parses back to the same double ("nan"/"inf" for
/// non-finite values).
std::string format_shortest(double value);

/// printf("%.17g"), the format used for dataset files.
std::string format_17g(double value);

/// One JSON object per line:
///   {"group": 0, "phi_w": [...], "phi_l": [...]}
/// plus, when present, "ref_logratio_w"/"ref_logratio_l" (reference-policy
/// log-probabilities of the two responses), "state": [x0, x1], "y_w", "y_l".
void write_jsonl(const GroupedDataset& data, std::ostream& out);
void save_jsonl(const GroupedDataset& data, const std::filesystem::path& path);

/// Parses the format above; K is max(group) + 1. Throws ParseError naming the
/// offending line, or the dataset validation errors of build_dataset.
GroupedDataset read_jsonl(std::istream& in);
GroupedDataset ingest_jsonl(const std::filesystem::path& path);

}  // namespace grpo
