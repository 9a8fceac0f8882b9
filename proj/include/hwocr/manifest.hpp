#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hwocr {

enum class Split { Correct, LogicalError };
enum class ErrorCategory { FencePost, Arithmetic, ControlFlow, Scope, Other };

std::string_view to_string(Split split) noexcept;
std::string_view to_string(ErrorCategory category) noexcept;

/// The deliberate bug planted in a logical-error program.
struct ErrorAnnotation {
  std::string description;
  std::string buggy_snippet;
  std::string fixed_snippet;
  ErrorCategory category = ErrorCategory::Other;
};

struct DatasetEntry {
  std::string program_id;
  std::filesystem::path image_path;
  std::string gold_code;  ///< canonical form
  Split split = Split::Correct;
  bool heldout = true;  ///< false for entries used to fit indentation parameters
  std::optional<ErrorAnnotation> annotation;
};

/// Manifest layout (paths relative to the manifest's directory):
///
///   {"entries": [{"program_id": "p01", "image": "images/p01.png",
///                 "gold": "gold/p01.py", "split": "correct" | "logical_error",
///                 "heldout": true,
///                 "annotation": {"description": "...", "buggy_snippet": "...",
///                                "fixed_snippet": "...", "category": "Arithmetic"}}]}
///
/// A bare array of entries is accepted too. Violations throw InvalidManifest
/// naming the entry and field.
std::vector<DatasetEntry> load_manifest(const std::filesystem::path& path);
std::vector<DatasetEntry> parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);

std::vector<DatasetEntry> heldout_entries(const std::vector<DatasetEntry>& entries);
std::vector<DatasetEntry> training_entries(const std::vector<DatasetEntry>& entries);

/// Collapses every whitespace run (newlines included) into one space and
/// trims both ends.
std::string collapse_whitespace(std::string_view text);

}  // namespace hwocr
