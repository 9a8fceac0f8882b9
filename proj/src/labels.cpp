#include "hwocr/labels.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <tuple>

#include "hwocr/error.hpp"

namespace hwocr {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kHallucinationCategoryCount> kNames = {
    "NoChange", "CommentChange", "MissedContent", "PrintChange", "AddedCode",
    "NameChange", "IndentationChange", "SyntaxFix", "LogicalFix",
};

constexpr std::array<std::string_view, kHallucinationCategoryCount> kDisplayNames = {
    "No Change",
    "Small Change in the Comment",
    "Missed Something From Ground Truth",
    "Print Statement Change",
    "Added code that was not present",
    "Small Variable/Function Name Change",
    "Small Change in the Indentation",
    "Small Syntax Fix",
    "Logical Fix",
};

}  // namespace

std::string_view to_string(HallucinationCategory category) noexcept {
  return kNames[static_cast<std::size_t>(category)];
}

std::optional<HallucinationCategory> parse_hallucination_category(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<HallucinationCategory>(i);
  }
  return std::nullopt;
}

double TaxonomyColumn::percent(HallucinationCategory category) const {
  if (n == 0) return 0.0;
  return 100.0 * static_cast<double>(counts[static_cast<std::size_t>(category)]) / static_cast<double>(n);
}

TaxonomyTable import_labels(const std::vector<HallucinationLabel>& labels,
                            const std::set<std::string>& known_program_ids) {
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::map<std::string, TaxonomyColumn> columns;
  for (const auto& label : labels) {
    if (!known_program_ids.contains(label.program_id)) {
      throw Error(ErrorCode::UnknownProgram, "label references unknown program '" + label.program_id + "'");
    }
    if (!seen.emplace(label.program_id, label.labeler_id, label.run).second) {
      throw Error(ErrorCode::DuplicateLabel, "second label for program '" + label.program_id + "', labeler '" +
                                                 label.labeler_id + "', run '" + label.run + "'");
    }
    auto& column = columns[label.run];
    column.run = label.run;
    ++column.n;
    if (label.blinded) ++column.blinded;
    ++column.counts[static_cast<std::size_t>(label.category)];
  }
  TaxonomyTable table;
  for (auto& [run, column] : columns) table.columns.push_back(std::move(column));
  return table;
}

json TaxonomyTable::to_json() const {
  json runs = json::array();
  for (const auto& c : columns) {
    json percentages = json::object();
    json counts = json::object();
    for (std::size_t k = 0; k < kHallucinationCategoryCount; ++k) {
      auto category = static_cast<HallucinationCategory>(k);
      percentages[std::string(kNames[k])] = c.percent(category);
      counts[std::string(kNames[k])] = c.counts[k];
    }
    runs.push_back(json{{"run", c.run},
                        {"n", c.n},
                        {"blinded", c.blinded},
                        {"counts", std::move(counts)},
                        {"percent", std::move(percentages)}});
  }
  return json{{"runs", std::move(runs)}};
}

std::string TaxonomyTable::render() const {
  std::size_t label_width = 0;
  for (auto name : kDisplayNames) label_width = std::max(label_width, name.size());
  std::string out;
  auto pad = [](std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
  };
  std::vector<std::size_t> widths;
  out += std::string(label_width, ' ');
  for (const auto& c : columns) {
    auto header = c.run + " (n=" + std::to_string(c.n) + ")";
    widths.push_back(std::max<std::size_t>(header.size(), 8));
    out += "  " + pad(header, widths.back());
  }
  out += '\n';
  for (std::size_t k = 0; k < kHallucinationCategoryCount; ++k) {
    std::string name(kDisplayNames[k]);
    out += name + std::string(label_width - name.size(), ' ');
    for (std::size_t c = 0; c < columns.size(); ++c) {
      char cell[32];
      std::snprintf(cell, sizeof cell, "%.2f%%", columns[c].percent(static_cast<HallucinationCategory>(k)));
      out += "  " + pad(cell, widths[c]);
    }
    out += '\n';
  }
  return out;
}

std::vector<HallucinationLabel> parse_labels(const json& j) {
  const json& list = j.is_array() ? j : j.at("labels");
  std::vector<HallucinationLabel> labels;
  for (const auto& jl : list) {
    HallucinationLabel label;
    try {
      label.program_id = jl.at("program_id").get<std::string>();
      label.run = jl.at("run").get<std::string>();
      label.labeler_id = jl.value("labeler_id", std::string("default"));
      label.blinded = jl.value("blinded", true);
      const auto name = jl.at("category").get<std::string>();
      auto category = parse_hallucination_category(name);
      if (!category) throw Error(ErrorCode::InvalidArgument, "unknown hallucination category '" + name + "'");
      label.category = *category;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::InvalidArgument, std::string("label: ") + e.what());
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

std::vector<HallucinationLabel> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open labels " + path.string());
  try {
    return parse_labels(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path.string() + ": " + e.what());
  }
}

void apply_label_overrides(ResultsRow& row, const std::vector<HallucinationLabel>& labels,
                           const std::vector<DatasetEntry>& entries) {
  std::set<std::string> labelled;
  std::set<std::string> fixed;
  for (const auto& label : labels) {
    if (label.run != row.config_id) continue;
    labelled.insert(label.program_id);
    if (label.category == HallucinationCategory::LogicalFix) fixed.insert(label.program_id);
  }
  if (labelled.empty()) return;

  std::set<std::string> evaluated;
  for (const auto& outcome : row.outcomes) evaluated.insert(outcome.program_id);
  row.logical_fix_count = 0;
  row.logical_fix_n = 0;
  row.logical_fix_programs.clear();
  for (const auto& entry : entries) {
    if (entry.split != Split::LogicalError || !evaluated.contains(entry.program_id)) continue;
    ++row.logical_fix_n;
    if (fixed.contains(entry.program_id)) {
      ++row.logical_fix_count;
      row.logical_fix_programs.push_back(entry.program_id);
    }
  }
  std::sort(row.logical_fix_programs.begin(), row.logical_fix_programs.end());
  row.logical_fix_source = "labels";
}

}  // namespace hwocr
