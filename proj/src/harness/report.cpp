// Copyright (c) 2026, The jgkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "jgkd/harness/report.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "jgkd/errors.hpp"

namespace jgkd::harness {

namespace {

constexpr const char* kFixed[] = {"kind", "config", "seed", "split", "best_epoch", "teacher_checksum_before",
                                  "teacher_checksum_after"};
constexpr std::size_t kNumFixed = std::size(kFixed);

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void level_columns(std::vector<std::string>& out, const std::string& level, const corpus::Schema& sc) {
  for (const char* m : {"micro_precision", "micro_recall", "micro_f1"}) out.push_back(level + "_" + m);
  for (const auto& label : sc.labels) {
    for (const char* m : {"precision", "recall", "f1", "support"}) out.push_back(level + "_" + label + "_" + m);
  }
}

void level_values(std::vector<std::string>& out, const LevelMetrics& lm) {
  out.push_back(fmt(lm.micro_precision));
  out.push_back(fmt(lm.micro_recall));
  out.push_back(fmt(lm.micro_f1));
  for (const auto& s : lm.per_label) {
    out.push_back(fmt(s.precision));
    out.push_back(fmt(s.recall));
    out.push_back(fmt(s.f1));
    out.push_back(std::to_string(s.support));
  }
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("report: bad number '" + s + "'");
  }
  if (used != s.size()) throw FormatError("report: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw FormatError("report: bad integer '" + s + "'");
  }
  if (used != s.size()) throw FormatError("report: bad integer '" + s + "'");
  return v;
}

LevelMetrics read_level(const std::vector<std::string>& cells, std::size_t& at, std::size_t labels) {
  LevelMetrics lm;
  lm.micro_precision = parse_double(cells[at++]);
  lm.micro_recall = parse_double(cells[at++]);
  lm.micro_f1 = parse_double(cells[at++]);
  lm.per_label.resize(labels);
  for (auto& s : lm.per_label) {
    s.precision = parse_double(cells[at++]);
    s.recall = parse_double(cells[at++]);
    s.f1 = parse_double(cells[at++]);
    s.support = parse_u64(cells[at++]);
  }
  return lm;
}

nlohmann::ordered_json level_json(const LevelMetrics& lm, const corpus::Schema& sc) {
  nlohmann::ordered_json j;
  j["micro_precision"] = lm.micro_precision;
  j["micro_recall"] = lm.micro_recall;
  j["micro_f1"] = lm.micro_f1;
  nlohmann::ordered_json labels;
  for (std::size_t c = 0; c < lm.per_label.size(); ++c) {
    const auto& s = lm.per_label[c];
    labels[sc.labels[c]] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  j["labels"] = labels;
  return j;
}

nlohmann::ordered_json metrics_obj(const Metrics& m, const corpus::Schema& sc) {
  nlohmann::ordered_json j;
  j["token"] = level_json(m.token, sc);
  j["entity"] = level_json(m.entity, sc);
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

}  // namespace

ReportFormat parse_report_format(std::string_view name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "jsonl") return ReportFormat::kJsonl;
  throw ValidationError("unknown report format '" + std::string(name) + "' (expected csv or jsonl)");
}

std::vector<std::string> report_columns(corpus::SchemaId schema) {
  std::vector<std::string> out(std::begin(kFixed), std::end(kFixed));
  const auto& sc = corpus::schema(schema);
  level_columns(out, "token", sc);
  level_columns(out, "entity", sc);
  return out;
}

std::string render_report(const AblationReport& report, ReportFormat format) {
  const auto& sc = corpus::schema(report.schema);
  std::string out;
  if (format == ReportFormat::kJsonl) {
    for (const auto& row : report.rows) {
      nlohmann::ordered_json j;
      j["kind"] = report.kind;
      j["schema"] = sc.name;
      j["config"] = row.config;
      j["median"] = metrics_obj(row.median, sc);
      nlohmann::ordered_json runs = nlohmann::ordered_json::array();
      for (const auto& r : row.runs) {
        nlohmann::ordered_json rj;
        rj["seed"] = r.seed;
        rj["best_epoch"] = r.best_epoch;
        rj["teacher_checksum_before"] = r.teacher_checksum_before;
        rj["teacher_checksum_after"] = r.teacher_checksum_after;
        rj["test"] = metrics_obj(r.test, sc);
        runs.push_back(rj);
      }
      j["runs"] = runs;
      out += j.dump() + '\n';
    }
    return out;
  }

  append_line(out, report_columns(report.schema));
  for (const auto& row : report.rows) {
    if (row.config.find_first_of(",\n") != std::string::npos) {
      throw ValidationError("configuration name '" + row.config + "' contains a separator");
    }
  }
  for (const auto& row : report.rows) {
    std::vector<std::string> cells{report.kind, row.config, "median", "test", "", "", ""};
    level_values(cells, row.median.token);
    level_values(cells, row.median.entity);
    append_line(out, cells);
  }
  for (const auto& row : report.rows) {
    for (const auto& r : row.runs) {
      std::vector<std::string> cells{report.kind,
                                     row.config,
                                     std::to_string(r.seed),
                                     "test",
                                     std::to_string(r.best_epoch),
                                     std::to_string(r.teacher_checksum_before),
                                     std::to_string(r.teacher_checksum_after)};
      level_values(cells, r.test.token);
      level_values(cells, r.test.entity);
      append_line(out, cells);
    }
  }
  return out;
}

void emit_report(const AblationReport& report, const std::filesystem::path& path, ReportFormat format) {
  const std::string text = render_report(report, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

AblationReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw FormatError("report: missing header");
  const auto header = split_line(line);
  AblationReport report;
  bool matched = false;
  for (auto id : {corpus::SchemaId::kFunsd, corpus::SchemaId::kFormNlu}) {
    if (report_columns(id) == header) {
      report.schema = id;
      matched = true;
    }
  }
  if (!matched) throw FormatError("report: header does not match any schema");
  const std::size_t labels = corpus::schema(report.schema).num_labels();

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw FormatError("report line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " cells, got " + std::to_string(cells.size()));
    }
    if (report.kind.empty()) report.kind = cells[0];
    if (cells[0] != report.kind) throw FormatError("report line " + std::to_string(line_no) + ": mixed kinds");
    std::size_t at = kNumFixed;
    Metrics m;
    m.token = read_level(cells, at, labels);
    m.entity = read_level(cells, at, labels);
    if (cells[2] == "median") {
      report.rows.push_back({cells[1], m, {}});
      continue;
    }
    RunResult r{cells[1], parse_u64(cells[2]), m, static_cast<std::size_t>(parse_u64(cells[4])),
                parse_u64(cells[5]), parse_u64(cells[6])};
    auto it = std::find_if(report.rows.begin(), report.rows.end(),
                           [&](const AblationRow& row) { return row.config == r.config; });
    if (it == report.rows.end()) {
      throw FormatError("report line " + std::to_string(line_no) + ": run of unknown configuration '" + r.config + "'");
    }
    it->runs.push_back(r);
  }
  return report;
}

AblationReport read_report_csv(const std::filesystem::path& path) { return parse_report_csv(read_file(path)); }

std::string metrics_json(const Metrics& m, corpus::SchemaId schema) {
  return metrics_obj(m, corpus::schema(schema)).dump(2) + '\n';
}

}  // namespace jgkd::harness
