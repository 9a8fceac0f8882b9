#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "hwocr/codemodel.hpp"
#include "json.hpp"

namespace hwocr {

/// Two-Gaussian indent / no-indent model over width-normalized deltas.
/// Defaults are reference estimates; tau is the prior weight of the
/// indent component.
struct GmmParams {
  double mu_no_indent = 0.007;
  double sigma_no_indent = 0.008;
  double mu_indent = 0.078;
  double sigma_indent = 0.025;
  double tau = 0.5;

  bool valid() const noexcept;
  bool operator==(const GmmParams&) const = default;
};

enum class DeltaLabel { NoIndent, Indent };

struct LabeledDelta {
  double delta = 0.0;
  DeltaLabel label = DeltaLabel::NoIndent;
};

/// (x_min[i] - x_min[i-1]) / image_width for i = 1..n-1.
std::vector<double> compute_deltas(const OcrDocument& doc);

double normal_pdf(double x, double mu, double sigma);

/// log P(Indent | delta) - log P(NoIndent | delta). Stays strictly monotone
/// where the posterior itself rounds to 0 or 1.
double indent_log_odds(double delta, const GmmParams& params);
/// Posterior probability that `delta` is an indent.
double indent_posterior(double delta, const GmmParams& params);

/// Indent iff the posterior exceeds 0.5.
DeltaLabel classify_delta(double delta, const GmmParams& params);

/// Per-class mean and population standard deviation (sigma floored at
/// 1e-6), tau fixed at 0.5.
GmmParams fit_gmm_mle(std::span<const LabeledDelta> labeled);

/// Level -> x_min of the nearest line above `line` at that level.
using AncestorIndex = std::map<int, double>;

AncestorIndex build_ancestor_index(const OcrDocument& doc, const std::vector<int>& levels,
                                   std::size_t line);

/// Relative indentation reconstruction: positive deltas classified as
/// indent add one level, zero or no-indent keep the level, negative deltas
/// snap to the horizontally nearest ancestor level (ties to the outer one).
IndentedProgram relative_indent(const OcrDocument& doc, const GmmParams& params = {});

nlohmann::json to_json(const GmmParams& params);
GmmParams gmm_params_from_json(const nlohmann::json& j);

}  // namespace hwocr
