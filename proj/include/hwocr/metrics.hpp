#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hwocr {

/// Decodes UTF-8 into Unicode scalar values. Malformed bytes decode to
/// U+FFFD one byte at a time, so every input has a defined distance.
std::u32string decode_utf8(std::string_view text);

/// CRLF/CR become '\n', tabs expand to four spaces, trailing whitespace is
/// stripped from every line and trailing blank lines are dropped.
std::string canonicalize(std::string_view text);

/// Unit-cost edit distance over Unicode scalar values. Not canonicalized.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// levenshtein(gold, predicted) / |gold| x 100 after canonicalizing both.
/// Not clipped; throws EmptyGoldLabel when the canonical gold is empty.
double normalized_levenshtein(std::string_view gold, std::string_view predicted);

struct ProgramScore {
  std::string program_id;
  double l_norm = 0.0;
};

struct OcrErrorScore {
  std::vector<ProgramScore> per_program;
  double mean = 0.0;
  std::optional<double> std_error;  ///< sample std / sqrt(n); absent when n == 1
  std::size_t n = 0;
};

/// Throws EmptyDataset for an empty list.
OcrErrorScore aggregate_ocr_error(std::vector<ProgramScore> scores);

}  // namespace hwocr
