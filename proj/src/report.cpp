#include "hwocr/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "hwocr/error.hpp"

namespace hwocr {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 3> kSections = {"OCR Algorithm", "Indentation Recognition",
                                                       "Post Correction"};
constexpr std::string_view kAbsent = "-";

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

std::string fixed(double v, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, v);
  return buffer;
}

}  // namespace

std::string_view report_section(const ResultsRow& row) noexcept {
  if (row.correction.kind != StrategyKind::None) return kSections[2];
  if (row.indent != IndentKind::None) return kSections[1];
  return kSections[0];
}

bool ReportRecord::operator==(const ReportRecord& o) const {
  auto same_failures = failures.size() == o.failures.size() &&
                       std::equal(failures.begin(), failures.end(), o.failures.begin(),
                                  [](const EntryFailure& a, const EntryFailure& b) {
                                    return a.program_id == b.program_id && a.error == b.error;
                                  });
  auto same_scores = per_program.size() == o.per_program.size() &&
                     std::equal(per_program.begin(), per_program.end(), o.per_program.begin(),
                                [](const ProgramScore& a, const ProgramScore& b) {
                                  return a.program_id == b.program_id && a.l_norm == b.l_norm;
                                });
  return config_id == o.config_id && section == o.section && ocr == o.ocr && indent == o.indent &&
         correction == o.correction && model_id == o.model_id && n == o.n && mean == o.mean &&
         std_error == o.std_error && logical_fix_count == o.logical_fix_count &&
         logical_fix_n == o.logical_fix_n && logical_fix_percent == o.logical_fix_percent &&
         logical_fix_source == o.logical_fix_source && logical_fix_programs == o.logical_fix_programs &&
         same_failures && same_scores;
}

ReportRecord to_record(const ResultsRow& row) {
  ReportRecord r;
  r.config_id = row.config_id;
  r.section = std::string(report_section(row));
  r.ocr = row.ocr;
  r.indent = std::string(to_string(row.indent));
  r.correction = std::string(to_string(row.correction.kind));
  r.model_id = row.correction.model_id;
  if (row.score) {
    r.n = row.score->n;
    r.mean = row.score->mean;
    r.std_error = row.score->std_error;
    r.per_program = row.score->per_program;
  }
  r.logical_fix_count = row.logical_fix_count;
  r.logical_fix_n = row.logical_fix_n;
  r.logical_fix_percent = row.logical_fix_percent();
  r.logical_fix_source = row.logical_fix_source;
  r.logical_fix_programs = row.logical_fix_programs;
  r.failures = row.failures;
  return r;
}

Report emit_report(const std::vector<ResultsRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "report needs at least one row");
  Report report;
  for (const auto& row : rows) report.records.push_back(to_record(row));
  return report;
}

json Report::to_json() const {
  json rows = json::array();
  for (const auto& r : records) {
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back(json{{"program_id", f.program_id}, {"error", f.error}});
    json per_program = json::array();
    for (const auto& s : r.per_program) per_program.push_back(json{{"program_id", s.program_id}, {"l_norm", s.l_norm}});
    rows.push_back(json{{"config_id", r.config_id},
                        {"section", r.section},
                        {"ocr", r.ocr},
                        {"indent", r.indent},
                        {"correction", r.correction},
                        {"model_id", r.model_id},
                        {"n", r.n},
                        {"mean", r.mean},
                        {"std_error", optional_number(r.std_error)},
                        {"logical_fix_count", r.logical_fix_count},
                        {"logical_fix_n", r.logical_fix_n},
                        {"logical_fix_percent", optional_number(r.logical_fix_percent)},
                        {"logical_fix_source", r.logical_fix_source},
                        {"logical_fix_programs", r.logical_fix_programs},
                        {"failures", std::move(failures)},
                        {"per_program", std::move(per_program)}});
  }
  return json{{"report_version", 1}, {"rows", std::move(rows)}};
}

std::string Report::machine_readable() const { return to_json().dump(2) + "\n"; }

Report Report::from_json(const json& j) {
  Report report;
  try {
    for (const auto& jr : j.at("rows")) {
      ReportRecord r;
      r.config_id = jr.at("config_id").get<std::string>();
      r.section = jr.at("section").get<std::string>();
      r.ocr = jr.at("ocr").get<std::string>();
      r.indent = jr.at("indent").get<std::string>();
      r.correction = jr.at("correction").get<std::string>();
      r.model_id = jr.value("model_id", std::string());
      r.n = jr.at("n").get<std::size_t>();
      r.mean = jr.at("mean").get<double>();
      r.std_error = read_optional(jr, "std_error");
      r.logical_fix_count = jr.at("logical_fix_count").get<std::size_t>();
      r.logical_fix_n = jr.at("logical_fix_n").get<std::size_t>();
      r.logical_fix_percent = read_optional(jr, "logical_fix_percent");
      r.logical_fix_source = jr.value("logical_fix_source", std::string("screen"));
      r.logical_fix_programs = jr.value("logical_fix_programs", std::vector<std::string>{});
      for (const auto& f : jr.value("failures", json::array())) {
        r.failures.push_back({f.at("program_id").get<std::string>(), f.at("error").get<std::string>()});
      }
      for (const auto& s : jr.value("per_program", json::array())) {
        r.per_program.push_back({s.at("program_id").get<std::string>(), s.at("l_norm").get<double>()});
      }
      report.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("report: ") + e.what());
  }
  return report;
}

std::string Report::human_readable() const {
  struct Line {
    std::string name, error, fix, n, failed;
  };
  std::vector<std::pair<std::string, std::vector<Line>>> groups;
  for (auto section : kSections) groups.emplace_back(std::string(section), std::vector<Line>{});
  for (const auto& r : records) {
    Line line;
    line.name = r.config_id;
    line.error = r.n == 0 ? std::string(kAbsent)
                          : fixed(r.mean, 1) + " ± " + (r.std_error ? fixed(*r.std_error, 1) : std::string(kAbsent));
    line.fix = r.logical_fix_percent ? fixed(*r.logical_fix_percent, 0) + "%" : std::string(kAbsent);
    line.n = std::to_string(r.n);
    line.failed = std::to_string(r.failures.size());
    for (auto& [section, lines] : groups) {
      if (section == r.section) lines.push_back(line);
    }
  }

  const std::string h_name = "Configuration", h_error = "OCR Error", h_fix = "Logical Fix", h_n = "n",
                    h_failed = "Failed";
  std::size_t w_name = h_name.size(), w_error = h_error.size(), w_fix = h_fix.size(), w_n = h_n.size(),
              w_failed = h_failed.size();
  // "±" is two bytes but one column.
  auto columns = [](const std::string& s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
  };
  for (const auto& [section, lines] : groups) {
    w_name = std::max(w_name, section.size());
    for (const auto& l : lines) {
      w_name = std::max(w_name, l.name.size() + 2);
      w_error = std::max(w_error, columns(l.error));
      w_fix = std::max(w_fix, l.fix.size());
      w_n = std::max(w_n, l.n.size());
      w_failed = std::max(w_failed, l.failed.size());
    }
  }
  auto left = [&](const std::string& s, std::size_t w) { return s + std::string(w - columns(s), ' '); };
  auto right = [&](const std::string& s, std::size_t w) { return std::string(w - columns(s), ' ') + s; };

  std::string out = left(h_name, w_name) + "  " + right(h_error, w_error) + "  " + right(h_fix, w_fix) + "  " +
                    right(h_n, w_n) + "  " + right(h_failed, w_failed) + "\n";
  const std::size_t total = w_name + w_error + w_fix + w_n + w_failed + 8;
  for (const auto& [section, lines] : groups) {
    if (lines.empty()) continue;
    out += std::string(total, '-') + "\n" + section + "\n";
    for (const auto& l : lines) {
      out += left("  " + l.name, w_name) + "  " + right(l.error, w_error) + "  " + right(l.fix, w_fix) + "  " +
             right(l.n, w_n) + "  " + right(l.failed, w_failed) + "\n";
    }
  }
  return out;
}

}  // namespace hwocr
