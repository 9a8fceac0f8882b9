#include <fstream>
#include <set>

#include "doctest.h"
#include "hwocr/error.hpp"
#include "hwocr/manifest.hpp"
#include "test_support.hpp"

using namespace hwocr;
using hwocr::testing::TempDir;
using nlohmann::json;

namespace {

json correct_entry(const std::string& id) {
  return {{"program_id", id}, {"image", "images/" + id + ".png"}, {"gold", "gold/" + id + ".py"}, {"split", "correct"}};
}

void write_gold(const std::filesystem::path& dir, const std::string& id, const std::string& code) {
  std::filesystem::create_directories(dir / "gold");
  std::ofstream(dir / "gold" / (id + ".py")) << code;
}

std::string invalid_message(const json& manifest, const std::filesystem::path& dir) {
  try {
    parse_manifest(manifest, dir);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidManifest);
    return e.what();
  }
  FAIL("manifest accepted");
  return {};
}

}  // namespace

TEST_CASE("shipped synthetic manifest") {
  auto entries = load_manifest(hwocr::testing::synthetic_dir() / "manifest.json");
  REQUIRE(entries.size() == 55);
  std::size_t correct = 0, logical = 0;
  std::set<std::string> ids;
  for (const auto& e : entries) {
    ids.insert(e.program_id);
    (e.split == Split::Correct ? correct : logical) += 1;
    CHECK(e.annotation.has_value() == (e.split == Split::LogicalError));
    CHECK(std::filesystem::exists(e.image_path));
    CHECK_FALSE(e.gold_code.empty());
  }
  CHECK(ids.size() == 55);
  CHECK(correct == 44);
  CHECK(logical == 11);
  CHECK(heldout_entries(entries).size() == 39);
  CHECK(training_entries(entries).size() == 16);
}

TEST_CASE("manifest parsing") {
  TempDir dir;
  write_gold(dir.path(), "a", "print(1)\r\n\n\n");
  write_gold(dir.path(), "b", "def f(x):\n    return x / 2\n");

  auto entry_b = json{{"program_id", "b"},
                      {"image", "images/b.png"},
                      {"gold", "gold/b.py"},
                      {"split", "logical_error"},
                      {"heldout", false},
                      {"annotation",
                       {{"description", "halves instead of doubling"},
                        {"buggy_snippet", "x / 2"},
                        {"fixed_snippet", "x * 2"},
                        {"category", "Arithmetic"}}}};
  auto entries = parse_manifest({{"entries", {correct_entry("a"), entry_b}}}, dir.path());
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].gold_code == "print(1)");
  CHECK(entries[0].heldout);
  CHECK(entries[0].image_path == dir.path() / "images" / "a.png");
  CHECK_FALSE(entries[1].heldout);
  REQUIRE(entries[1].annotation.has_value());
  CHECK(entries[1].annotation->category == ErrorCategory::Arithmetic);

  CHECK(parse_manifest({{"entries", json::array()}}, dir.path()).empty());
  CHECK(parse_manifest(json::array({correct_entry("a")}), dir.path()).size() == 1);

  SUBCASE("logical_error without annotation") {
    auto bad = entry_b;
    bad.erase("annotation");
    auto msg = invalid_message({{"entries", {bad}}}, dir.path());
    CHECK(msg.find("b") != std::string::npos);
    CHECK(msg.find("annotation") != std::string::npos);
  }
  SUBCASE("buggy snippet absent from gold") {
    auto bad = entry_b;
    bad["annotation"]["buggy_snippet"] = "x // 3";
    CHECK(invalid_message({{"entries", {bad}}}, dir.path()).find("buggy_snippet") != std::string::npos);
  }
  SUBCASE("fix identical to bug") {
    auto bad = entry_b;
    bad["annotation"]["fixed_snippet"] = "x / 2";
    invalid_message({{"entries", {bad}}}, dir.path());
  }
  SUBCASE("whitespace-only fixes are scope bugs, not duplicates") {
    auto scope = entry_b;
    scope["annotation"]["buggy_snippet"] = "f(x):\n    return";
    scope["annotation"]["fixed_snippet"] = "f(x):\nreturn";
    CHECK(parse_manifest({{"entries", {scope}}}, dir.path()).size() == 1);
  }
  SUBCASE("duplicate ids") {
    invalid_message({{"entries", {correct_entry("a"), correct_entry("a")}}}, dir.path());
  }
  SUBCASE("unknown split") {
    auto bad = correct_entry("a");
    bad["split"] = "mystery";
    CHECK(invalid_message({{"entries", {bad}}}, dir.path()).find("split") != std::string::npos);
  }
  SUBCASE("missing gold file") {
    invalid_message({{"entries", {correct_entry("zzz")}}}, dir.path());
  }
  SUBCASE("empty gold") {
    write_gold(dir.path(), "blank", "\n  \n");
    invalid_message({{"entries", {correct_entry("blank")}}}, dir.path());
  }
}

TEST_CASE("heldout filter partitions the entries") {
  std::vector<DatasetEntry> entries;
  for (int i = 0; i < 55; ++i) {
    DatasetEntry e;
    e.program_id = "p" + std::to_string(i);
    e.heldout = i % 7 != 0 && i % 5 != 0;
    entries.push_back(e);
  }
  CHECK(heldout_entries(entries).size() + training_entries(entries).size() == entries.size());
  for (const auto& e : heldout_entries(entries)) CHECK(e.heldout);
  for (const auto& e : training_entries(entries)) CHECK_FALSE(e.heldout);
}

TEST_CASE("collapse_whitespace") {
  CHECK(collapse_whitespace("  a\n\t b  c \n") == "a b c");
  CHECK(collapse_whitespace("") == "");
  CHECK(collapse_whitespace(" \n ") == "");
}
