#include <cmath>
#include <random>

#include "doctest.h"
#include "hwocr/error.hpp"
#include "hwocr/metrics.hpp"

using namespace hwocr;

namespace {

// Plain recursion over the three edit operations; only viable for short strings.
std::size_t naive_distance(std::u32string_view a, std::u32string_view b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  if (a.front() == b.front()) return naive_distance(a.substr(1), b.substr(1));
  return 1 + std::min({naive_distance(a.substr(1), b), naive_distance(a, b.substr(1)),
                       naive_distance(a.substr(1), b.substr(1))});
}

std::string random_word(std::mt19937& rng, std::size_t max_len, std::string_view alphabet) {
  std::string s;
  const auto len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
  return s;
}

}  // namespace

TEST_CASE("levenshtein examples") {
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("flaw", "lawn") == 2);
}

TEST_CASE("levenshtein counts code points, not bytes") {
  CHECK(levenshtein("é", "e") == 1);
  CHECK(levenshtein("naïve", "naive") == 1);
  CHECK(levenshtein("→", "") == 1);
  CHECK(decode_utf8("a\xff").size() == 2);
}

TEST_CASE("levenshtein agrees with recursive search and is a metric") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 400; ++trial) {
    auto a = random_word(rng, 7, "abcd");
    auto b = random_word(rng, 7, "abcd");
    auto c = random_word(rng, 7, "abcd");
    const auto ab = levenshtein(a, b);
    CHECK(ab == naive_distance(decode_utf8(a), decode_utf8(b)));
    CHECK(ab == levenshtein(b, a));
    CHECK(levenshtein(a, c) <= ab + levenshtein(b, c));
    CHECK(ab >= (a.size() > b.size() ? a.size() - b.size() : b.size() - a.size()));
    CHECK(ab <= std::max(a.size(), b.size()));
  }
}

TEST_CASE("canonicalize") {
  CHECK(canonicalize("a\r\nb\rc") == "a\nb\nc");
  CHECK(canonicalize("\tx") == "    x");
  CHECK(canonicalize("x   \ny\t\n\n\n") == "x\ny");
  CHECK(canonicalize("  lead") == "  lead");
  CHECK(canonicalize("") == "");
  CHECK(canonicalize(canonicalize("a \r\n\tb\n\n")) == canonicalize("a \r\n\tb\n\n"));
}

TEST_CASE("normalized_levenshtein") {
  CHECK(normalized_levenshtein("kitten", "sitting") == 50.0);
  CHECK(normalized_levenshtein("abc", "abc") == 0.0);
  CHECK(normalized_levenshtein("abcd", "") == 100.0);
  CHECK(normalized_levenshtein(std::string(100, 'a'), std::string(95, 'a')) == 5.0);
  // Not clipped: a long hallucination can exceed 100%.
  CHECK(normalized_levenshtein("ab", "abcdef") == 200.0);
  // Trailing whitespace and line endings do not count.
  CHECK(normalized_levenshtein("x = 1\nprint(x)\n", "x = 1  \r\nprint(x)") == 0.0);
  try {
    normalized_levenshtein("\n  \n", "abc");
    FAIL("expected EmptyGoldLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyGoldLabel);
  }
}

TEST_CASE("aggregate_ocr_error") {
  auto s = aggregate_ocr_error({{"a", 10}, {"b", 20}, {"c", 30}});
  CHECK(s.n == 3);
  CHECK(s.mean == doctest::Approx(20.0));
  REQUIRE(s.std_error.has_value());
  CHECK(*s.std_error == doctest::Approx(10.0 / std::sqrt(3.0)));

  auto one = aggregate_ocr_error({{"a", 7}});
  CHECK(one.mean == 7.0);
  CHECK_FALSE(one.std_error.has_value());

  auto flat = aggregate_ocr_error({{"a", 5}, {"b", 5}, {"c", 5}, {"d", 5}});
  CHECK(flat.mean == 5.0);
  CHECK(*flat.std_error == 0.0);

  try {
    aggregate_ocr_error({});
    FAIL("expected EmptyDataset");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyDataset);
  }
}
