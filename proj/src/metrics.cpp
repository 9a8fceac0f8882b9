#include "hwocr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hwocr/error.hpp"

namespace hwocr {

std::u32string decode_utf8(std::string_view text) {
  constexpr char32_t kReplacement = 0xFFFD;
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto lead = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    char32_t cp = 0;
    char32_t min_cp = 0;
    if (lead < 0x80) {
      out.push_back(lead);
      ++i;
      continue;
    } else if ((lead & 0xE0) == 0xC0) {
      extra = 1, cp = lead & 0x1F, min_cp = 0x80;
    } else if ((lead & 0xF0) == 0xE0) {
      extra = 2, cp = lead & 0x0F, min_cp = 0x800;
    } else if ((lead & 0xF8) == 0xF0) {
      extra = 3, cp = lead & 0x07, min_cp = 0x10000;
    } else {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (i + extra >= text.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto c = static_cast<unsigned char>(text[i + k]);
      if ((c & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok || cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string canonicalize(std::string_view text) {
  std::vector<std::string> lines(1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\r') {
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
      lines.emplace_back();
    } else if (c == '\n') {
      lines.emplace_back();
    } else if (c == '\t') {
      lines.back() += "    ";
    } else {
      lines.back() += c;
    }
  }
  auto is_space = [](char c) { return c == ' ' || c == '\f' || c == '\v'; };
  for (auto& line : lines) {
    while (!line.empty() && is_space(line.back())) line.pop_back();
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out += '\n';
    out += lines[i];
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  // Single rolling row over the shorter string.
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t substitute = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, substitute});
      diag = up;
    }
  }
  return row[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::u32string_view(decode_utf8(a)), std::u32string_view(decode_utf8(b)));
}

double normalized_levenshtein(std::string_view gold, std::string_view predicted) {
  auto gold_chars = decode_utf8(canonicalize(gold));
  if (gold_chars.empty()) {
    throw Error(ErrorCode::EmptyGoldLabel, "gold transcription is empty after canonicalization");
  }
  auto predicted_chars = decode_utf8(canonicalize(predicted));
  auto distance = levenshtein(gold_chars, predicted_chars);
  return static_cast<double>(distance) / static_cast<double>(gold_chars.size()) * 100.0;
}

OcrErrorScore aggregate_ocr_error(std::vector<ProgramScore> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyDataset, "no program scores to aggregate");
  OcrErrorScore result;
  result.n = scores.size();
  double sum = 0.0;
  for (const auto& s : scores) sum += s.l_norm;
  result.mean = sum / static_cast<double>(result.n);
  if (result.n >= 2) {
    double ss = 0.0;
    for (const auto& s : scores) ss += (s.l_norm - result.mean) * (s.l_norm - result.mean);
    double sample_std = std::sqrt(ss / static_cast<double>(result.n - 1));
    result.std_error = sample_std / std::sqrt(static_cast<double>(result.n));
  }
  result.per_program = std::move(scores);
  return result;
}

}  // namespace hwocr
