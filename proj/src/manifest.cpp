#include "hwocr/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hwocr/error.hpp"
#include "hwocr/metrics.hpp"

namespace hwocr {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Split split) noexcept {
  return split == Split::Correct ? "correct" : "logical_error";
}

std::string_view to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::FencePost: return "FencePost";
    case ErrorCategory::Arithmetic: return "Arithmetic";
    case ErrorCategory::ControlFlow: return "ControlFlow";
    case ErrorCategory::Scope: return "Scope";
    case ErrorCategory::Other: return "Other";
  }
  return "Other";
}

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

namespace {

[[noreturn]] void invalid(const std::string& entry, const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidManifest, "entry '" + entry + "', field '" + field + "': " + why);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string string_field(const json& j, const std::string& entry, const char* field) {
  if (!j.contains(field) || !j.at(field).is_string()) invalid(entry, field, "missing or not a string");
  return j.at(field).get<std::string>();
}

ErrorCategory parse_category(const std::string& entry, const std::string& name) {
  if (name == "FencePost") return ErrorCategory::FencePost;
  if (name == "Arithmetic") return ErrorCategory::Arithmetic;
  if (name == "ControlFlow") return ErrorCategory::ControlFlow;
  if (name == "Scope") return ErrorCategory::Scope;
  if (name == "Other") return ErrorCategory::Other;
  invalid(entry, "annotation.category", "unknown category '" + name + "'");
}

}  // namespace

std::vector<DatasetEntry> parse_manifest(const json& j, const fs::path& base_dir) {
  const json* list = nullptr;
  if (j.is_array()) {
    list = &j;
  } else if (j.is_object() && j.contains("entries") && j.at("entries").is_array()) {
    list = &j.at("entries");
  } else {
    throw Error(ErrorCode::InvalidManifest, "manifest must be an array or an object with 'entries'");
  }

  std::vector<DatasetEntry> entries;
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& je : *list) {
    const std::string fallback = "#" + std::to_string(index++);
    if (!je.is_object()) invalid(fallback, "<entry>", "not an object");
    DatasetEntry entry;
    entry.program_id = string_field(je, fallback, "program_id");
    const auto& id = entry.program_id;
    if (id.empty()) invalid(fallback, "program_id", "empty");
    if (!seen.insert(id).second) invalid(id, "program_id", "duplicate");

    fs::path image = string_field(je, id, "image");
    entry.image_path = image.is_absolute() ? image : base_dir / image;

    fs::path gold = string_field(je, id, "gold");
    gold = gold.is_absolute() ? gold : base_dir / gold;
    std::string raw_gold;
    try {
      raw_gold = read_text(gold);
    } catch (const Error&) {
      invalid(id, "gold", "cannot read " + gold.string());
    }
    entry.gold_code = canonicalize(raw_gold);
    if (entry.gold_code.empty()) invalid(id, "gold", "gold code is empty");

    const auto split = string_field(je, id, "split");
    if (split == "correct") {
      entry.split = Split::Correct;
    } else if (split == "logical_error") {
      entry.split = Split::LogicalError;
    } else {
      invalid(id, "split", "expected 'correct' or 'logical_error'");
    }

    if (je.contains("heldout")) {
      if (!je.at("heldout").is_boolean()) invalid(id, "heldout", "not a boolean");
      entry.heldout = je.at("heldout").get<bool>();
    }

    if (je.contains("annotation") && !je.at("annotation").is_null()) {
      const auto& ja = je.at("annotation");
      if (!ja.is_object()) invalid(id, "annotation", "not an object");
      ErrorAnnotation a;
      a.description = ja.value("description", std::string());
      if (!ja.contains("buggy_snippet") || !ja.at("buggy_snippet").is_string()) {
        invalid(id, "annotation.buggy_snippet", "missing");
      }
      if (!ja.contains("fixed_snippet") || !ja.at("fixed_snippet").is_string()) {
        invalid(id, "annotation.fixed_snippet", "missing");
      }
      a.buggy_snippet = ja.at("buggy_snippet").get<std::string>();
      a.fixed_snippet = ja.at("fixed_snippet").get<std::string>();
      a.category = parse_category(id, ja.value("category", std::string("Other")));
      if (collapse_whitespace(a.buggy_snippet).empty()) invalid(id, "annotation.buggy_snippet", "empty");
      if (a.buggy_snippet == a.fixed_snippet) {
        invalid(id, "annotation.fixed_snippet", "identical to buggy_snippet");
      }
      if (collapse_whitespace(entry.gold_code).find(collapse_whitespace(a.buggy_snippet)) == std::string::npos) {
        invalid(id, "annotation.buggy_snippet", "does not occur in the gold code");
      }
      entry.annotation = std::move(a);
    }
    if (entry.split == Split::LogicalError && !entry.annotation) {
      invalid(id, "annotation", "required for logical_error entries");
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<DatasetEntry> load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidManifest, "cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidManifest, path.string() + ": " + e.what());
  }
  return parse_manifest(j, path.parent_path());
}

std::vector<DatasetEntry> heldout_entries(const std::vector<DatasetEntry>& entries) {
  std::vector<DatasetEntry> out;
  for (const auto& e : entries) {
    if (e.heldout) out.push_back(e);
  }
  return out;
}

std::vector<DatasetEntry> training_entries(const std::vector<DatasetEntry>& entries) {
  std::vector<DatasetEntry> out;
  for (const auto& e : entries) {
    if (!e.heldout) out.push_back(e);
  }
  return out;
}

}  // namespace hwocr
