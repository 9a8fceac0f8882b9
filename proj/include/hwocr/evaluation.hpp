#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwocr/manifest.hpp"
#include "hwocr/metrics.hpp"
#include "hwocr/pipeline.hpp"

namespace hwocr {

/// Automatic screen for a repaired deliberate bug. True when the prediction
/// carries the fixed snippet more often than the gold does, or when the
/// buggy snippet is gone and the aligned region reads as the fixed version:
/// the fixed snippet's non-whitespace characters appear there in order and
/// the region is closer to the fixed gold lines than to the buggy ones.
bool detect_logical_fix(std::string_view gold, const ErrorAnnotation& annotation, std::string_view predicted);

struct EntryFailure {
  std::string program_id;
  std::string error;
};

struct EntryOutcome {
  std::string program_id;
  std::string predicted;  ///< canonical
  double l_norm = 0.0;
  std::optional<bool> logical_fix;  ///< logical_error entries only
};

/// One configuration evaluated over a dataset.
struct ResultsRow {
  std::string config_id;
  std::string ocr;  ///< provider id, or "none" for end-to-end
  IndentKind indent = IndentKind::None;
  CorrectionStrategy correction;
  std::optional<OcrErrorScore> score;  ///< absent when every entry failed
  std::size_t logical_fix_count = 0;
  std::size_t logical_fix_n = 0;  ///< evaluated logical_error entries
  std::vector<std::string> logical_fix_programs;
  std::string logical_fix_source = "screen";  ///< or "labels"
  std::vector<EntryFailure> failures;
  std::vector<EntryOutcome> outcomes;  ///< ordered by program_id

  std::optional<double> logical_fix_percent() const;
};

struct EvalOptions {
  bool heldout_only = false;
  std::size_t workers = 0;  ///< 0 = hardware concurrency
};

/// Runs the pipeline over every selected entry on a bounded worker pool.
/// Per-entry failures are recorded in the row, never dropped. Aggregation is
/// ordered by program_id, so the row does not depend on scheduling.
ResultsRow run_evaluation(const Pipeline& pipeline, const std::vector<DatasetEntry>& entries,
                          const EvalOptions& options = {});

}  // namespace hwocr
