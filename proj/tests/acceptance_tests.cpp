// One PASS/FAIL line per top-level acceptance criterion. Exit status is
// nonzero if any criterion fails.
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <iostream>
#include <random>
#include <unordered_map>

#include "hwocr/cost.hpp"
#include "hwocr/evaluation.hpp"
#include "hwocr/indent_absolute.hpp"
#include "hwocr/indent_relative.hpp"
#include "hwocr/manifest.hpp"
#include "hwocr/metrics.hpp"
#include "hwocr/report.hpp"

using namespace hwocr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kSynthetic = fs::path(HWOCR_SOURCE_DIR) / "data" / "synthetic";

struct Outcome {
  bool ok = true;
  std::string detail;
  void expect(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
  Outcome result;
  try {
    result = body();
  } catch (const std::exception& e) {
    result = {false, std::string("exception: ") + e.what()};
  }
  std::cout << (result.ok ? "PASS " : "FAIL ") << name;
  if (!result.ok) std::cout << " (" << result.detail << ")";
  std::cout << "\n";
  if (!result.ok) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

OcrDocument doc_from_xmins(const std::vector<double>& xs, double width = 1000.0) {
  OcrDocument doc;
  doc.image_width = width;
  doc.image_height = 40.0 * static_cast<double>(xs.size()) + 40.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double y = 40.0 * static_cast<double>(i);
    doc.lines.push_back({"line" + std::to_string(i), {xs[i], y, xs[i] + 200.0, y + 30.0}});
  }
  return doc;
}

std::vector<int> levels_of(const IndentedProgram& p) {
  std::vector<int> out;
  for (const auto& l : p.lines) out.push_back(l.level);
  return out;
}

// All strings of length <= 6 over {a,b,c}, then breadth-first search over
// single-character edits from each one. Shortest-path length in that graph is
// the edit distance; an optimal script never leaves the length range of its
// two endpoints, so the bounded graph is enough.
Outcome levenshtein_oracle() {
  Outcome out;
  const auto start = Clock::now();
  std::vector<std::string> strings{""};
  for (std::size_t i = 0; i < strings.size(); ++i) {
    if (strings[i].size() == 6) continue;
    for (char c : {'a', 'b', 'c'}) strings.push_back(strings[i] + c);
  }
  std::unordered_map<std::string, int> index;
  for (std::size_t i = 0; i < strings.size(); ++i) index.emplace(strings[i], static_cast<int>(i));

  std::vector<std::vector<int>> neighbours(strings.size());
  for (std::size_t i = 0; i < strings.size(); ++i) {
    const auto& s = strings[i];
    auto add = [&](const std::string& t) {
      if (auto it = index.find(t); it != index.end() && it->second != static_cast<int>(i)) {
        neighbours[i].push_back(it->second);
      }
    };
    for (std::size_t p = 0; p <= s.size(); ++p) {
      for (char c : {'a', 'b', 'c'}) add(s.substr(0, p) + c + s.substr(p));
      if (p < s.size()) {
        add(s.substr(0, p) + s.substr(p + 1));
        for (char c : {'a', 'b', 'c'}) add(s.substr(0, p) + c + s.substr(p + 1));
      }
    }
  }

  std::size_t pairs = 0;
  std::vector<int> dist(strings.size());
  for (std::size_t src = 0; src < strings.size() && out.ok; ++src) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> queue{static_cast<int>(src)};
    dist[src] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : neighbours[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t dst = 0; dst < strings.size(); ++dst) {
      ++pairs;
      out.expect(levenshtein(strings[src], strings[dst]) == static_cast<std::size_t>(dist[dst]),
                 "mismatch on '" + strings[src] + "' vs '" + strings[dst] + "'");
    }
  }
  const double elapsed = seconds_since(start);
  out.expect(pairs == strings.size() * strings.size(), "not every pair was checked");
  out.expect(elapsed < 10.0, "took " + std::to_string(elapsed) + " s");
  return out;
}

Outcome normalized_formula() {
  Outcome out;
  out.expect(levenshtein("kitten", "sitting") == 3, "kitten/sitting distance");
  out.expect(normalized_levenshtein("kitten", "sitting") == 50.0, "kitten/sitting L_norm");
  out.expect(normalized_levenshtein("def f():\n    pass", "def f():\n    pass") == 0.0, "identity L_norm");
  return out;
}

Outcome bandwidth_formula() {
  Outcome out;
  OcrDocument doc;
  doc.image_width = 1000;
  doc.image_height = 1000;
  double y = 0;
  for (double h : {20.0, 30.0, 40.0}) {
    doc.lines.push_back({"x", {0, y, 100, y + h}});
    y += 100;
  }
  out.expect(estimate_bandwidth(doc) == 45.0, "bandwidth " + std::to_string(estimate_bandwidth(doc)));
  return out;
}

Outcome gmm_posterior() {
  Outcome out;
  const GmmParams params;
  out.expect(std::abs(indent_posterior(0.007, params) - 0.0057) <= 0.001, "P(Indent|0.007)");
  out.expect(indent_posterior(0.078, params) > 0.999, "P(Indent|0.078)");

  // Strictness is read off the log-odds: the posterior itself rounds to
  // exactly 1.0 in double precision well before delta = 1.
  int crossings = 0;
  double previous_lo = 0.0, previous_p = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double delta = static_cast<double>(k) / 999.0;
    const double lo = indent_log_odds(delta, params);
    const double p = indent_posterior(delta, params);
    if (k > 0) {
      out.expect(lo > previous_lo, "log-odds not increasing at " + std::to_string(delta));
      out.expect(p >= previous_p, "posterior decreased at " + std::to_string(delta));
      if ((previous_p < 0.5) != (p < 0.5)) ++crossings;
    }
    previous_lo = lo;
    previous_p = p;
  }
  out.expect(crossings == 1, std::to_string(crossings) + " crossings of 0.5");

  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (indent_log_odds(mid, params) < 0.0 ? lo : hi) = mid;
  }
  out.expect(std::abs(lo - 0.027) <= 0.002, "root at " + std::to_string(lo));
  return out;
}

Outcome algorithm_fixtures() {
  Outcome out;
  out.expect(levels_of(relative_indent(doc_from_xmins({0, 80, 85, 0}))) == std::vector<int>{0, 1, 1, 0},
             "[0,80,85,0]");
  out.expect(levels_of(relative_indent(doc_from_xmins({0, 80, 160, 84}))) == std::vector<int>{0, 1, 2, 1},
             "[0,80,160,84]");

  std::mt19937 rng(20240215);
  std::uniform_int_distribution<int> length(1, 40);
  std::uniform_real_distribution<double> x(0.0, 900.0), step(-120.0, 120.0), width(400.0, 3000.0);
  for (int trial = 0; trial < 10000 && out.ok; ++trial) {
    std::vector<double> xs{x(rng)};
    const int n = length(rng);
    for (int i = 1; i < n; ++i) {
      const double next = (trial % 2 == 0) ? x(rng) : xs.back() + step(rng);
      xs.push_back(std::clamp(next, 0.0, 900.0));
    }
    const auto levels = levels_of(relative_indent(doc_from_xmins(xs, width(rng))));
    out.expect(levels.front() == 0, "first level nonzero in trial " + std::to_string(trial));
    for (std::size_t i = 1; i < levels.size(); ++i) {
      out.expect(levels[i] >= 0 && levels[i] <= levels[i - 1] + 1, "level jump in trial " + std::to_string(trial));
    }
  }
  return out;
}

Outcome mle_fit() {
  Outcome out;
  const std::vector<LabeledDelta> samples{{0.06, DeltaLabel::Indent},
                                          {0.10, DeltaLabel::Indent},
                                          {0.00, DeltaLabel::NoIndent},
                                          {0.02, DeltaLabel::NoIndent}};
  const auto p = fit_gmm_mle(samples);
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  out.expect(near(p.mu_indent, 0.08), "mu_indent");
  out.expect(near(p.sigma_indent, 0.02), "sigma_indent");
  out.expect(near(p.mu_no_indent, 0.01), "mu_no_indent");
  out.expect(near(p.sigma_no_indent, 0.01), "sigma_no_indent");
  return out;
}

Outcome cost_breakdown() {
  Outcome out;
  const auto cost_dir = fs::path(HWOCR_SOURCE_DIR) / "data" / "cost";
  const auto text = estimate_cost(load_cost_model(cost_dir / "pipeline.json"), {320.2545, 381.0, 341.5455}, false);
  const auto mm = estimate_cost(load_cost_model(cost_dir / "multimodal.json"), {0.0, 387.0, 308.9636}, true);
  out.expect(std::abs(text.token_cost - 0.01038) <= 0.00001, "text cost " + std::to_string(text.token_cost));
  out.expect(std::abs(text.total - 0.01138) <= 0.00001, "pipeline total " + std::to_string(text.total));
  out.expect(std::abs(mm.total - 0.01094) <= 0.00001, "multimodal " + std::to_string(mm.total));
  return out;
}

std::string full_harness_report(const std::vector<DatasetEntry>& entries) {
  std::vector<ResultsRow> rows;
  for (const auto& config : load_pipeline_configs(kSynthetic / "configs.json")) {
    rows.push_back(run_evaluation(Pipeline(config), entries, {false, 4}));
  }
  return emit_report(rows).machine_readable();
}

Outcome deterministic_replay() {
  Outcome out;
  const auto start = Clock::now();
  const auto entries = load_manifest(kSynthetic / "manifest.json");
  const auto first = full_harness_report(entries);
  const auto second = full_harness_report(entries);
  const double elapsed = seconds_since(start);
  out.expect(first == second, "reports differ");
  out.expect(elapsed < 60.0, "took " + std::to_string(elapsed) + " s");
  return out;
}

Outcome logical_fix_screen() {
  Outcome out;
  const std::string gold =
      "def is_odd(number):\n    if number / 2 != 0:\n        return True\n    return False\n\nprint(is_odd(7))";
  const ErrorAnnotation modulo{"division instead of modulo", "number / 2", "number % 2", ErrorCategory::Arithmetic};
  std::string fixed = gold;
  fixed.replace(fixed.find("number / 2"), 10, "number % 2");
  out.expect(detect_logical_fix(gold, modulo, fixed), "modulo repair not flagged");
  out.expect(!detect_logical_fix(gold, modulo, gold), "gold transcription flagged");
  return out;
}

Outcome heldout_filter() {
  Outcome out;
  const auto entries = load_manifest(kSynthetic / "manifest.json");
  std::size_t training = 0;
  for (const auto& e : entries) training += e.heldout ? 0 : 1;
  out.expect(entries.size() == 55, "manifest has " + std::to_string(entries.size()) + " entries");
  out.expect(training == 16, std::to_string(training) + " training entries");
  PipelineConfig config = load_pipeline_configs(kSynthetic / "configs.json").at(0);
  const auto row = run_evaluation(Pipeline(config), entries, {true, 2});
  out.expect(row.score && row.score->n == 39, "heldout run did not score 39 programs");
  return out;
}

}  // namespace

int main() {
  criterion("levenshtein matches exhaustive edit search on {a,b,c}^<=6", levenshtein_oracle);
  criterion("normalized distance: kitten/sitting 50%, identity 0%", normalized_formula);
  criterion("bandwidth of heights [20,30,40] is 45", bandwidth_formula);
  criterion("indent posterior values, monotonicity and 0.5 crossing", gmm_posterior);
  criterion("relative indentation fixtures and level-step property", algorithm_fixtures);
  criterion("maximum-likelihood fit of labelled deltas", mle_fit);
  criterion("per-image cost breakdown", cost_breakdown);
  criterion("deterministic replay of the full harness", deterministic_replay);
  criterion("logical-fix screen on the modulo example", logical_fix_screen);
  criterion("heldout filter evaluates 39 of 55", heldout_filter);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
