#pragma once

#include <string>
#include <vector>

#include "cmtext/geometry.hpp"
#include "cmtext/raster.hpp"

namespace cmtext {

struct LabelConfig {
  double mu = 0.5;    // shrink factor, in (0,1)
  int n_centers = 5;  // odd, one of 1/3/5/7
  int scale = 4;      // label maps are (h/scale) x (w/scale)
};

/// Per-instance supervision: shrunk CM polygon(s) plus sampled centers
/// with their PMD and ray-distance targets, all at image scale.
struct InstanceLabel {
  TextPolygon polygon;
  std::vector<TextPolygon> cm_polygons;
  double pmd_text = 0.0;
  std::vector<CenterSample> centers;
  bool ignore = false;
};

/// All supervision for one image at label scale.
struct LabelBundle {
  BinaryGrid cm;    // union of instance CMs
  BinaryGrid gap;   // annulus between CM and text = 0, elsewhere 1
  BinaryGrid text;  // union of instance text masks
  std::vector<InstanceLabel> instances;
  LabelConfig config;
  int image_width = 0;
  int image_height = 0;
  std::vector<std::string> warnings;

  /// Centers of non-ignored instances, in instance order. This is the
  /// supervision site order the loss and trainer modules use.
  std::vector<const CenterSample*> supervised_centers() const;
};

/// Ground-truth generation for one image. Per-instance failures are
/// recorded as warnings and mark the instance ignored; the call never
/// aborts the whole image.
LabelBundle generate_labels(const std::vector<TextPolygon>& instances, int h, int w,
                            const LabelConfig& config = {});

}  // namespace cmtext
