#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace hwocr {

/// Axis-aligned rectangle in image pixel coordinates.
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double height() const noexcept { return y_max - y_min; }
  double width() const noexcept { return x_max - x_min; }
  bool valid() const noexcept;

  bool operator==(const BoundingBox&) const = default;
};

/// One OCR'd line of text.
struct LineBox {
  std::string text;
  BoundingBox box;

  bool operator==(const LineBox&) const = default;
};

struct OcrDocument {
  std::vector<LineBox> lines;
  double image_width = 1.0;
  double image_height = 1.0;
  std::string provider_id;

  bool operator==(const OcrDocument&) const = default;
};

struct IndentedLine {
  std::string text;
  int level = 0;

  bool operator==(const IndentedLine&) const = default;
};

/// Lines paired with discrete indentation levels.
struct IndentedProgram {
  std::vector<IndentedLine> lines;

  /// First line at level 0, no negative levels, never more than one level
  /// deeper than the previous line.
  bool well_formed() const noexcept;

  bool operator==(const IndentedProgram&) const = default;
};

struct StageTiming {
  std::string stage;
  std::chrono::duration<double> elapsed{};
};

struct PipelineResult {
  OcrDocument raw_ocr;
  IndentedProgram indented;
  std::string corrected_code;
  std::vector<StageTiming> stage_timings;
  std::string config_id;
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kCanonicalIndentUnit = "    ";

/// Sorts lines by y_min, then x_min. Stable, so equal keys keep input order.
OcrDocument normalize_reading_order(OcrDocument doc);

/// Each line becomes `indent_unit` x level followed by its text, joined by
/// '\n' without a trailing newline. Whitespace-only lines render empty.
std::string render_program(const IndentedProgram& program,
                           std::string_view indent_unit = kCanonicalIndentUnit);

/// Inverse of render_program: counts leading copies of `indent_unit`.
IndentedProgram parse_rendered(std::string_view text,
                               std::string_view indent_unit = kCanonicalIndentUnit);

/// Every line at level 0.
IndentedProgram flat_program(const OcrDocument& doc);

// JSON (fixture format). from_json validates and throws InvalidFixture.
nlohmann::json to_json(const BoundingBox& box);
nlohmann::json to_json(const OcrDocument& doc);
nlohmann::json to_json(const IndentedProgram& program);
nlohmann::json to_json(const PipelineResult& result);
OcrDocument ocr_document_from_json(const nlohmann::json& j);
IndentedProgram indented_program_from_json(const nlohmann::json& j);
PipelineResult pipeline_result_from_json(const nlohmann::json& j);

/// Canonical serialized form: two-space indented JSON with a trailing newline.
std::string serialize(const OcrDocument& doc);

}  // namespace hwocr
