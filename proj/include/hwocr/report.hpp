#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwocr/evaluation.hpp"
#include "json.hpp"

namespace hwocr {

/// Table section a row belongs to: "OCR Algorithm" (no indentation, no
/// correction), "Indentation Recognition" (indentation only) or
/// "Post Correction".
std::string_view report_section(const ResultsRow& row) noexcept;

/// Compact per-config record, as stored in the machine-readable report.
struct ReportRecord {
  std::string config_id;
  std::string section;
  std::string ocr;
  std::string indent;
  std::string correction;
  std::string model_id;
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> std_error;
  std::size_t logical_fix_count = 0;
  std::size_t logical_fix_n = 0;
  std::optional<double> logical_fix_percent;
  std::string logical_fix_source;
  std::vector<std::string> logical_fix_programs;
  std::vector<EntryFailure> failures;
  std::vector<ProgramScore> per_program;

  bool operator==(const ReportRecord& other) const;
};

ReportRecord to_record(const ResultsRow& row);

struct Report {
  std::vector<ReportRecord> records;

  nlohmann::json to_json() const;
  /// Two-space indented JSON with a trailing newline; byte-stable for equal
  /// records.
  std::string machine_readable() const;
  /// Aligned plain-text table grouped by section.
  std::string human_readable() const;

  static Report from_json(const nlohmann::json& j);
};

/// Throws InvalidArgument for an empty row list.
Report emit_report(const std::vector<ResultsRow>& rows);

}  // namespace hwocr
