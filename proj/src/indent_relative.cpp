#include "hwocr/indent_relative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hwocr/error.hpp"

namespace hwocr {

namespace {

constexpr double kSigmaFloor = 1e-6;

}  // namespace

bool GmmParams::valid() const noexcept {
  return sigma_no_indent > 0.0 && sigma_indent > 0.0 && tau > 0.0 && tau < 1.0 &&
         mu_indent > mu_no_indent && std::isfinite(mu_indent) && std::isfinite(mu_no_indent);
}

std::vector<double> compute_deltas(const OcrDocument& doc) {
  if (!(doc.image_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "image_width must be positive");
  std::vector<double> deltas;
  if (doc.lines.size() < 2) return deltas;
  deltas.reserve(doc.lines.size() - 1);
  for (std::size_t i = 1; i < doc.lines.size(); ++i) {
    deltas.push_back((doc.lines[i].box.x_min - doc.lines[i - 1].box.x_min) / doc.image_width);
  }
  return deltas;
}

double normal_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double indent_log_odds(double delta, const GmmParams& params) {
  auto log_pdf = [](double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return -0.5 * z * z - std::log(sigma);
  };
  const double log_indent = std::log(params.tau) + log_pdf(delta, params.mu_indent, params.sigma_indent);
  const double log_no_indent =
      std::log(1.0 - params.tau) + log_pdf(delta, params.mu_no_indent, params.sigma_no_indent);
  return log_indent - log_no_indent;
}

double indent_posterior(double delta, const GmmParams& params) {
  // Through the log-odds so far tails do not underflow to 0/0.
  return 1.0 / (1.0 + std::exp(-indent_log_odds(delta, params)));
}

DeltaLabel classify_delta(double delta, const GmmParams& params) {
  return indent_posterior(delta, params) > 0.5 ? DeltaLabel::Indent : DeltaLabel::NoIndent;
}

GmmParams fit_gmm_mle(std::span<const LabeledDelta> labeled) {
  struct Moments {
    double sum = 0.0;
    double sum_sq_dev = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
  };
  Moments indent, no_indent;
  for (const auto& s : labeled) {
    auto& m = s.label == DeltaLabel::Indent ? indent : no_indent;
    m.sum += s.delta;
    ++m.count;
  }
  if (indent.count < 2 || no_indent.count < 2) {
    throw Error(ErrorCode::InsufficientLabels,
                "need at least 2 samples per class (indent=" + std::to_string(indent.count) +
                    ", no_indent=" + std::to_string(no_indent.count) + ")");
  }
  indent.mean = indent.sum / static_cast<double>(indent.count);
  no_indent.mean = no_indent.sum / static_cast<double>(no_indent.count);
  for (const auto& s : labeled) {
    auto& m = s.label == DeltaLabel::Indent ? indent : no_indent;
    m.sum_sq_dev += (s.delta - m.mean) * (s.delta - m.mean);
  }
  auto population_sigma = [](const Moments& m) {
    return std::max(std::sqrt(m.sum_sq_dev / static_cast<double>(m.count)), kSigmaFloor);
  };

  GmmParams params;
  params.mu_no_indent = no_indent.mean;
  params.sigma_no_indent = population_sigma(no_indent);
  params.mu_indent = indent.mean;
  params.sigma_indent = population_sigma(indent);
  params.tau = 0.5;
  if (params.mu_indent <= params.mu_no_indent) {
    throw Error(ErrorCode::InvertedClasses, "fitted indent mean does not exceed no-indent mean");
  }
  return params;
}

AncestorIndex build_ancestor_index(const OcrDocument& doc, const std::vector<int>& levels,
                                   std::size_t line) {
  AncestorIndex index;
  for (std::size_t j = line; j-- > 0;) {
    index.try_emplace(levels[j], doc.lines[j].box.x_min);
  }
  return index;
}

IndentedProgram relative_indent(const OcrDocument& doc, const GmmParams& params) {
  if (!params.valid()) throw Error(ErrorCode::InvalidParams, "GMM parameters violate their invariants");
  const auto deltas = compute_deltas(doc);
  std::vector<int> levels;
  levels.reserve(doc.lines.size());
  if (!doc.lines.empty()) levels.push_back(0);

  for (std::size_t i = 1; i < doc.lines.size(); ++i) {
    const double delta = deltas[i - 1];
    if (delta > 0.0) {
      levels.push_back(classify_delta(delta, params) == DeltaLabel::Indent ? levels.back() + 1
                                                                           : levels.back());
    } else if (delta == 0.0) {
      levels.push_back(levels.back());
    } else {
      const double x = doc.lines[i].box.x_min;
      int best_level = 0;
      double best_distance = std::numeric_limits<double>::infinity();
      // Ascending level order, strict comparison: ties go to the outer level.
      // Levels deeper than the previous line belong to blocks that already
      // closed, so they are not ancestors.
      for (const auto& [level, ancestor_x] : build_ancestor_index(doc, levels, i)) {
        if (level > levels.back()) break;
        const double distance = std::abs(x - ancestor_x);
        if (distance < best_distance) {
          best_distance = distance;
          best_level = level;
        }
      }
      levels.push_back(best_level);
    }
  }

  IndentedProgram program;
  program.lines.reserve(doc.lines.size());
  for (std::size_t i = 0; i < doc.lines.size(); ++i) {
    program.lines.push_back({doc.lines[i].text, levels[i]});
  }
  return program;
}

nlohmann::json to_json(const GmmParams& params) {
  return nlohmann::json{{"mu_no_indent", params.mu_no_indent},
                        {"sigma_no_indent", params.sigma_no_indent},
                        {"mu_indent", params.mu_indent},
                        {"sigma_indent", params.sigma_indent},
                        {"tau", params.tau}};
}

GmmParams gmm_params_from_json(const nlohmann::json& j) {
  GmmParams params;
  try {
    params.mu_no_indent = j.at("mu_no_indent").get<double>();
    params.sigma_no_indent = j.at("sigma_no_indent").get<double>();
    params.mu_indent = j.at("mu_indent").get<double>();
    params.sigma_indent = j.at("sigma_indent").get<double>();
    params.tau = j.value("tau", 0.5);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidParams, e.what());
  }
  if (!params.valid()) throw Error(ErrorCode::InvalidParams, "GMM parameters violate their invariants");
  return params;
}

}  // namespace hwocr
