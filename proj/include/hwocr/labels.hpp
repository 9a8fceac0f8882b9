#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hwocr/evaluation.hpp"
#include "json.hpp"

namespace hwocr {

/// Hallucination taxonomy for hand-labelled transcriptions.
enum class HallucinationCategory {
  NoChange,
  CommentChange,
  MissedContent,
  PrintChange,
  AddedCode,
  NameChange,
  IndentationChange,
  SyntaxFix,
  LogicalFix,
};

inline constexpr std::size_t kHallucinationCategoryCount = 9;

std::string_view to_string(HallucinationCategory category) noexcept;
std::optional<HallucinationCategory> parse_hallucination_category(std::string_view name);

struct HallucinationLabel {
  std::string program_id;
  std::string run;  ///< config id or prompting variant the label refers to
  std::string labeler_id;
  HallucinationCategory category = HallucinationCategory::NoChange;
  bool blinded = true;
};

struct TaxonomyColumn {
  std::string run;
  std::size_t n = 0;
  std::size_t blinded = 0;
  std::array<std::size_t, kHallucinationCategoryCount> counts{};

  double percent(HallucinationCategory category) const;
};

struct TaxonomyTable {
  std::vector<TaxonomyColumn> columns;  ///< ordered by run name

  nlohmann::json to_json() const;
  std::string render() const;
};

/// Per-run category percentages. Rejects labels for unknown programs
/// (UnknownProgram) and repeated (program, labeler, run) triples
/// (DuplicateLabel).
TaxonomyTable import_labels(const std::vector<HallucinationLabel>& labels,
                            const std::set<std::string>& known_program_ids);

/// {"labels": [{"program_id", "run", "labeler_id", "category", "blinded"}]}
std::vector<HallucinationLabel> load_labels(const std::filesystem::path& path);
std::vector<HallucinationLabel> parse_labels(const nlohmann::json& j);

/// Replaces the automatic logical-fix screen of `row` with the human labels
/// for run == row.config_id, when any exist: a logical_error program counts
/// as fixed if any labeler marked it LogicalFix.
void apply_label_overrides(ResultsRow& row, const std::vector<HallucinationLabel>& labels,
                           const std::vector<DatasetEntry>& entries);

}  // namespace hwocr
