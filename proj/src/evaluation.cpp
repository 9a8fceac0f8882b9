#include "hwocr/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

#include "hwocr/error.hpp"

namespace hwocr {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) {
      lines.push_back(text.substr(start));
      return lines;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
}

std::string join(const std::vector<std::string>& lines, std::size_t first, std::size_t count) {
  std::string out;
  for (std::size_t i = first; i < first + count && i < lines.size(); ++i) {
    if (i > first) out += '\n';
    out += lines[i];
  }
  return out;
}

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++count;
  return count;
}

std::string strip_whitespace(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r' && c != '\f' && c != '\v') out += c;
  }
  return out;
}

bool is_subsequence(const std::string& needle, const std::string& haystack) {
  std::size_t k = 0;
  for (char c : haystack) {
    if (k < needle.size() && c == needle[k]) ++k;
  }
  return k == needle.size();
}

/// Line range [first, last] of the gold covering the (whitespace-collapsed)
/// snippet, located through the collapsed text of each line prefix.
std::optional<std::pair<std::size_t, std::size_t>> snippet_line_range(const std::vector<std::string>& lines,
                                                                     const std::string& snippet) {
  const auto target = collapse_whitespace(snippet);
  if (target.empty()) return std::nullopt;
  for (std::size_t first = 0; first < lines.size(); ++first) {
    std::string acc;
    for (std::size_t last = first; last < lines.size(); ++last) {
      acc += (last > first ? "\n" : "") + lines[last];
      if (collapse_whitespace(acc).find(target) != std::string::npos) return std::make_pair(first, last);
    }
  }
  return std::nullopt;
}

std::string replace_collapsed(const std::string& region, const std::string& from, const std::string& to) {
  auto collapsed = collapse_whitespace(region);
  auto pos = collapsed.find(collapse_whitespace(from));
  if (pos == std::string::npos) return collapsed;
  return collapsed.replace(pos, collapse_whitespace(from).size(), collapse_whitespace(to));
}

}  // namespace

bool detect_logical_fix(std::string_view gold_text, const ErrorAnnotation& annotation, std::string_view predicted_text) {
  const auto gold = canonicalize(gold_text);
  const auto predicted = canonicalize(predicted_text);
  const auto gold_c = collapse_whitespace(gold);
  const auto predicted_c = collapse_whitespace(predicted);
  const auto buggy_c = collapse_whitespace(annotation.buggy_snippet);
  const auto fixed_c = collapse_whitespace(annotation.fixed_snippet);

  if (buggy_c == fixed_c) {
    // Whitespace-only bug (a statement in the wrong block): only the exact
    // layout tells the two versions apart.
    const auto fixed = canonicalize(annotation.fixed_snippet);
    return count_occurrences(predicted, fixed) > count_occurrences(gold, fixed);
  }
  if (!fixed_c.empty() && count_occurrences(predicted_c, fixed_c) > count_occurrences(gold_c, fixed_c)) {
    return true;
  }
  if (predicted_c.find(buggy_c) != std::string::npos) return false;

  const auto gold_lines = split_lines(gold);
  const auto range = snippet_line_range(gold_lines, annotation.buggy_snippet);
  if (!range) return false;
  const std::size_t span = range->second - range->first + 1;
  const auto buggy_region = collapse_whitespace(join(gold_lines, range->first, span));
  const auto fixed_region = replace_collapsed(join(gold_lines, range->first, span), annotation.buggy_snippet,
                                              annotation.fixed_snippet);

  // Corresponding region: the window of predicted lines closest to either
  // version of the gold region.
  const auto predicted_lines = split_lines(predicted);
  std::string region;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  const std::size_t windows = predicted_lines.size() >= span ? predicted_lines.size() - span + 1 : 1;
  for (std::size_t w = 0; w < windows; ++w) {
    auto candidate = collapse_whitespace(join(predicted_lines, w, span));
    auto d = std::min(levenshtein(candidate, buggy_region), levenshtein(candidate, fixed_region));
    if (d < best) {
      best = d;
      region = std::move(candidate);
    }
  }
  if (!is_subsequence(strip_whitespace(annotation.fixed_snippet), strip_whitespace(region))) return false;
  return levenshtein(region, fixed_region) < levenshtein(region, buggy_region);
}

std::optional<double> ResultsRow::logical_fix_percent() const {
  if (logical_fix_n == 0) return std::nullopt;
  return 100.0 * static_cast<double>(logical_fix_count) / static_cast<double>(logical_fix_n);
}

ResultsRow run_evaluation(const Pipeline& pipeline, const std::vector<DatasetEntry>& all_entries,
                          const EvalOptions& options) {
  std::vector<const DatasetEntry*> entries;
  for (const auto& e : all_entries) {
    if (!options.heldout_only || e.heldout) entries.push_back(&e);
  }
  std::sort(entries.begin(), entries.end(),
            [](const DatasetEntry* a, const DatasetEntry* b) { return a->program_id < b->program_id; });
  if (entries.empty()) throw Error(ErrorCode::EmptyDataset, "no entries selected for evaluation");

  struct Slot {
    std::optional<EntryOutcome> outcome;
    std::optional<std::string> error;
  };
  std::vector<Slot> slots(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < entries.size(); i = next.fetch_add(1)) {
      const auto& entry = *entries[i];
      try {
        auto image = load_image(entry.image_path);
        image.name = entry.program_id;
        auto result = pipeline.run(image);
        EntryOutcome outcome;
        outcome.program_id = entry.program_id;
        outcome.predicted = canonicalize(result.corrected_code);
        outcome.l_norm = normalized_levenshtein(entry.gold_code, outcome.predicted);
        if (entry.split == Split::LogicalError && entry.annotation) {
          outcome.logical_fix = detect_logical_fix(entry.gold_code, *entry.annotation, outcome.predicted);
        }
        slots[i].outcome = std::move(outcome);
      } catch (const std::exception& e) {
        slots[i].error = e.what();
      }
    }
  };
  std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(entries.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  const auto& config = pipeline.config();
  ResultsRow row;
  row.config_id = config.config_id;
  row.ocr = config.ocr ? config.ocr->provider_id : "none";
  row.indent = config.indent;
  row.correction = config.correction;
  std::vector<ProgramScore> scores;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (slots[i].error) {
      row.failures.push_back({entries[i]->program_id, *slots[i].error});
      continue;
    }
    auto& outcome = *slots[i].outcome;
    scores.push_back({outcome.program_id, outcome.l_norm});
    if (outcome.logical_fix) {
      ++row.logical_fix_n;
      if (*outcome.logical_fix) {
        ++row.logical_fix_count;
        row.logical_fix_programs.push_back(outcome.program_id);
      }
    }
    row.outcomes.push_back(std::move(outcome));
  }
  if (!scores.empty()) row.score = aggregate_ocr_error(std::move(scores));
  return row;
}

}  // namespace hwocr
