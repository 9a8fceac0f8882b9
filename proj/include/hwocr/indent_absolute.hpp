#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hwocr/codemodel.hpp"

namespace hwocr {

/// Result of 1-D clustering: strictly increasing centers and the index of
/// the center each input point belongs to.
struct ClusterModel {
  std::vector<double> centers;
  std::vector<std::size_t> assignment;
};

struct MeanShiftOptions {
  double tolerance_fraction = 1e-3;  ///< convergence when |shift| <= fraction * bandwidth
  int max_iterations = 300;
  double merge_fraction = 0.5;  ///< modes closer than fraction * bandwidth merge
};

/// 1.5 x mean bounding-box height.
double estimate_bandwidth(const OcrDocument& doc);

/// Flat-kernel mean shift seeded at every point.
ClusterModel mean_shift_1d(std::span<const double> points, double bandwidth,
                           const MeanShiftOptions& options = {});

/// Clusters line x_min values; a line's level is the rank of its cluster
/// center, leftmost center being level 0.
IndentedProgram absolute_indent(const OcrDocument& doc);

}  // namespace hwocr
