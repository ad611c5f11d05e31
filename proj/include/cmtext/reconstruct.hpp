#pragma once

#include <vector>

#include "cmtext/geometry.hpp"
#include "cmtext/raster.hpp"

namespace cmtext {

/// A reconstructed text instance at full image scale. The score is the
/// mean CM probability over the source component's cells.
struct Detection {
  TextPolygon polygon;
  double score = 0.0;
};

enum class ExpansionMode {
  kLiteral,      // expand by the CM contour's own PMD
  kMuCorrected,  // expand by PMD * mu / (1 - mu); same thing at mu = 0.5
};

struct ReconstructConfig {
  double threshold = 0.5;
  int min_area = 16;  // cells
  double mu = 0.5;
  int scale = 4;  // upsample factor back to image coordinates
  ExpansionMode mode = ExpansionMode::kLiteral;
};

/// CM probability grid -> detections: binarize, label components, trace
/// each contour, measure its PMD and push the contour outward by it.
std::vector<Detection> reconstruct(const SoftGrid& cm, const ReconstructConfig& cfg = {});

/// The pixel-level expansion baseline: every kernel component claims
/// text cells by multi-source BFS (4-connectivity, smaller component id
/// wins ties) until the covered text foreground is partitioned; each
/// claimed region is contoured into a detection with score 1.
std::vector<Detection> pixel_expand_baseline(const BinaryGrid& kernel, const BinaryGrid& text);

}  // namespace cmtext
