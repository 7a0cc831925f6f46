// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jgkd/harness/ablation.hpp"

namespace jgkd::harness {

enum class ReportFormat { kCsv, kJsonl };

ReportFormat parse_report_format(std::string_view name);  // csv | jsonl

// Column names of the comma-separated table for a schema.
std::vector<std::string> report_columns(corpus::SchemaId schema);

// CSV: header, one "median" row per configuration in report order, then the
// per-seed runs as an appendix. JSONL: one record per configuration.
std::string render_report(const AblationReport& report, ReportFormat format);
void emit_report(const AblationReport& report, const std::filesystem::path& path, ReportFormat format);

// Parses a CSV table produced by render_report. Throws FormatError.
AblationReport parse_report_csv(const std::string& text);
AblationReport read_report_csv(const std::filesystem::path& path);

// Writes a metrics record as a single JSON object.
std::string metrics_json(const Metrics& m, corpus::SchemaId schema);

}  // namespace jgkd::harness
