#include "hwocr/codemodel.hpp"

#include <algorithm>
#include <cmath>

#include "hwocr/error.hpp"

namespace hwocr {

using nlohmann::json;

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
  });
}

double require_number(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::InvalidFixture, std::string("missing numeric field '") + key + "'");
  }
  double v = j.at(key).get<double>();
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::InvalidFixture, std::string("non-finite field '") + key + "'");
  }
  return v;
}

}  // namespace

bool BoundingBox::valid() const noexcept {
  return x_min >= 0.0 && y_min >= 0.0 && x_min <= x_max && y_min <= y_max;
}

bool IndentedProgram::well_formed() const noexcept {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].level < 0) return false;
    if (i == 0 && lines[i].level != 0) return false;
    if (i > 0 && lines[i].level > lines[i - 1].level + 1) return false;
  }
  return true;
}

OcrDocument normalize_reading_order(OcrDocument doc) {
  std::stable_sort(doc.lines.begin(), doc.lines.end(), [](const LineBox& a, const LineBox& b) {
    if (a.box.y_min != b.box.y_min) return a.box.y_min < b.box.y_min;
    return a.box.x_min < b.box.x_min;
  });
  return doc;
}

std::string render_program(const IndentedProgram& program, std::string_view indent_unit) {
  if (indent_unit.empty()) {
    throw Error(ErrorCode::InvalidArgument, "indent_unit must be non-empty");
  }
  std::string out;
  for (std::size_t i = 0; i < program.lines.size(); ++i) {
    const auto& line = program.lines[i];
    if (i > 0) out += '\n';
    if (is_blank(line.text)) continue;
    for (int k = 0; k < line.level; ++k) out += indent_unit;
    out += line.text;
  }
  return out;
}

IndentedProgram parse_rendered(std::string_view text, std::string_view indent_unit) {
  if (indent_unit.empty()) {
    throw Error(ErrorCode::InvalidArgument, "indent_unit must be non-empty");
  }
  IndentedProgram program;
  if (text.empty()) return program;
  std::size_t start = 0;
  while (true) {
    std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    int level = 0;
    while (line.substr(0, indent_unit.size()) == indent_unit) {
      line.remove_prefix(indent_unit.size());
      ++level;
    }
    program.lines.push_back({std::string(line), level});
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return program;
}

IndentedProgram flat_program(const OcrDocument& doc) {
  IndentedProgram program;
  program.lines.reserve(doc.lines.size());
  for (const auto& line : doc.lines) program.lines.push_back({line.text, 0});
  return program;
}

json to_json(const BoundingBox& box) {
  return json{{"x_min", box.x_min}, {"y_min", box.y_min}, {"x_max", box.x_max}, {"y_max", box.y_max}};
}

json to_json(const OcrDocument& doc) {
  json lines = json::array();
  for (const auto& line : doc.lines) {
    lines.push_back(json{{"text", line.text}, {"box", to_json(line.box)}});
  }
  return json{{"image_width", doc.image_width},
              {"image_height", doc.image_height},
              {"provider_id", doc.provider_id},
              {"lines", std::move(lines)}};
}

json to_json(const IndentedProgram& program) {
  json lines = json::array();
  for (const auto& line : program.lines) {
    lines.push_back(json{{"text", line.text}, {"level", line.level}});
  }
  return json{{"lines", std::move(lines)}};
}

json to_json(const PipelineResult& result) {
  json timings = json::object();
  for (const auto& t : result.stage_timings) timings[t.stage] = t.elapsed.count();
  return json{{"raw_ocr", to_json(result.raw_ocr)},
              {"indented", to_json(result.indented)},
              {"corrected_code", result.corrected_code},
              {"stage_timings", std::move(timings)},
              {"config_id", result.config_id},
              {"warnings", result.warnings}};
}

OcrDocument ocr_document_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidFixture, "document must be a JSON object");
  OcrDocument doc;
  doc.image_width = require_number(j, "image_width");
  doc.image_height = require_number(j, "image_height");
  if (doc.image_width <= 0.0 || doc.image_height <= 0.0) {
    throw Error(ErrorCode::InvalidFixture, "image dimensions must be positive");
  }
  if (j.contains("provider_id")) {
    if (!j.at("provider_id").is_string()) {
      throw Error(ErrorCode::InvalidFixture, "provider_id must be a string");
    }
    doc.provider_id = j.at("provider_id").get<std::string>();
  }
  if (!j.contains("lines") || !j.at("lines").is_array()) {
    throw Error(ErrorCode::InvalidFixture, "missing 'lines' array");
  }
  std::size_t index = 0;
  for (const auto& jl : j.at("lines")) {
    if (!jl.is_object() || !jl.contains("text") || !jl.at("text").is_string() || !jl.contains("box")) {
      throw Error(ErrorCode::InvalidFixture, "line " + std::to_string(index) + " needs text and box");
    }
    LineBox line;
    line.text = jl.at("text").get<std::string>();
    const auto& jb = jl.at("box");
    line.box = {require_number(jb, "x_min"), require_number(jb, "y_min"), require_number(jb, "x_max"),
                require_number(jb, "y_max")};
    if (!line.box.valid()) {
      throw Error(ErrorCode::InvalidFixture, "line " + std::to_string(index) + " has an invalid box");
    }
    doc.lines.push_back(std::move(line));
    ++index;
  }
  return doc;
}

IndentedProgram indented_program_from_json(const json& j) {
  IndentedProgram program;
  for (const auto& jl : j.at("lines")) {
    program.lines.push_back({jl.at("text").get<std::string>(), jl.at("level").get<int>()});
  }
  return program;
}

PipelineResult pipeline_result_from_json(const json& j) {
  PipelineResult result;
  result.raw_ocr = ocr_document_from_json(j.at("raw_ocr"));
  result.indented = indented_program_from_json(j.at("indented"));
  result.corrected_code = j.at("corrected_code").get<std::string>();
  result.config_id = j.value("config_id", "");
  if (j.contains("warnings")) result.warnings = j.at("warnings").get<std::vector<std::string>>();
  if (j.contains("stage_timings")) {
    for (const auto& [stage, seconds] : j.at("stage_timings").items()) {
      result.stage_timings.push_back({stage, std::chrono::duration<double>(seconds.get<double>())});
    }
  }
  return result;
}

std::string serialize(const OcrDocument& doc) { return to_json(doc).dump(2) + "\n"; }

}  // namespace hwocr
