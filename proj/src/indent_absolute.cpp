#include "hwocr/indent_absolute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwocr/error.hpp"

namespace hwocr {

double estimate_bandwidth(const OcrDocument& doc) {
  if (doc.lines.empty()) throw Error(ErrorCode::EmptyDocument, "no lines to estimate bandwidth from");
  double sum = 0.0;
  for (const auto& line : doc.lines) sum += line.box.height();
  double bandwidth = 1.5 * (sum / static_cast<double>(doc.lines.size()));
  if (!(bandwidth > 0.0)) {
    throw Error(ErrorCode::DegenerateBandwidth, "all bounding boxes have zero height");
  }
  return bandwidth;
}

namespace {

double window_mean(std::span<const double> points, double center, double bandwidth) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double p : points) {
    if (std::abs(p - center) <= bandwidth) {
      sum += p;
      ++count;
    }
  }
  // The seed is one of the points, and a mode only moves toward the mean of
  // a non-empty window, so the window never empties.
  return count == 0 ? center : sum / static_cast<double>(count);
}

}  // namespace

ClusterModel mean_shift_1d(std::span<const double> points, double bandwidth,
                           const MeanShiftOptions& options) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth must be positive and finite");
  }
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "mean shift needs at least one point");

  const double tolerance = options.tolerance_fraction * bandwidth;
  std::vector<double> modes;
  modes.reserve(points.size());
  for (double seed : points) {
    double mode = seed;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      double next = window_mean(points, mode, bandwidth);
      double shift = std::abs(next - mode);
      mode = next;
      if (shift <= tolerance) break;
    }
    modes.push_back(mode);
  }

  // Merge in ascending order: a mode joins the current group while it is
  // within the merge radius of the group's running mean.
  std::vector<double> sorted = modes;
  std::sort(sorted.begin(), sorted.end());
  const double merge_radius = options.merge_fraction * bandwidth;
  ClusterModel model;
  double group_sum = 0.0;
  std::size_t group_count = 0;
  for (double m : sorted) {
    if (group_count > 0 && std::abs(m - group_sum / static_cast<double>(group_count)) >= merge_radius) {
      model.centers.push_back(group_sum / static_cast<double>(group_count));
      group_sum = 0.0;
      group_count = 0;
    }
    group_sum += m;
    ++group_count;
  }
  model.centers.push_back(group_sum / static_cast<double>(group_count));

  model.assignment.reserve(points.size());
  for (double p : points) {
    std::size_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.centers.size(); ++c) {
      double d = std::abs(p - model.centers[c]);
      if (d < best_distance) {
        best_distance = d;
        best = c;
      }
    }
    model.assignment.push_back(best);
  }
  return model;
}

IndentedProgram absolute_indent(const OcrDocument& doc) {
  const double bandwidth = estimate_bandwidth(doc);
  std::vector<double> xs;
  xs.reserve(doc.lines.size());
  for (const auto& line : doc.lines) xs.push_back(line.box.x_min);
  const auto model = mean_shift_1d(xs, bandwidth);

  IndentedProgram program;
  program.lines.reserve(doc.lines.size());
  for (std::size_t i = 0; i < doc.lines.size(); ++i) {
    program.lines.push_back({doc.lines[i].text, static_cast<int>(model.assignment[i])});
  }
  return program;
}

}  // namespace hwocr
