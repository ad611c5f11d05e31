#include "cmtext/labels.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

namespace cmtext {

namespace {

std::optional<TextPolygon> clipped_instance(const TextPolygon& poly, int w, int h,
                                            std::vector<std::string>& warnings) {
  const BBox& bb = poly.bbox();
  if (bb.min_x >= 0.0 && bb.min_y >= 0.0 && bb.max_x <= w && bb.max_y <= h) return poly;
  try {
    return TextPolygon(detail::clip_to_rect(poly.vertices(), w, h), poly.ignore());
  } catch (const std::runtime_error& e) {
    warnings.push_back(std::string("instance clipped away: ") + e.what());
    return std::nullopt;
  }
}

}  // namespace

std::vector<const CenterSample*> LabelBundle::supervised_centers() const {
  std::vector<const CenterSample*> out;
  for (const auto& inst : instances) {
    if (inst.ignore) continue;
    for (const auto& c : inst.centers) out.push_back(&c);
  }
  return out;
}

LabelBundle generate_labels(const std::vector<TextPolygon>& instances, int h, int w,
                            const LabelConfig& config) {
  if (h < 1 || w < 1) throw std::invalid_argument("image dimensions must be >= 1");
  if (config.mu <= 0.0 || config.mu >= 1.0) throw std::invalid_argument("mu must be in (0,1)");
  if (config.scale != 1 && config.scale != 4) throw std::invalid_argument("scale must be 1 or 4");

  LabelBundle bundle;
  bundle.config = config;
  bundle.image_width = w;
  bundle.image_height = h;
  const int lw = (w + config.scale - 1) / config.scale;
  const int lh = (h + config.scale - 1) / config.scale;
  bundle.cm = BinaryGrid(lh, lw);
  bundle.gap = BinaryGrid(lh, lw);
  bundle.text = BinaryGrid(lh, lw);

  const double inv_scale = 1.0 / config.scale;

  for (const TextPolygon& raw : instances) {
    InstanceLabel label{raw, {}, 0.0, {}, raw.ignore()};
    auto fail = [&](const std::string& why) {
      bundle.warnings.push_back(why);
      label.ignore = true;
      label.cm_polygons.clear();
    };

    if (!label.ignore) {
      auto clipped = clipped_instance(raw, w, h, bundle.warnings);
      if (!clipped) {
        label.ignore = true;
      } else {
        try {
          label.polygon = *clipped;
          const Point cp = center_point(label.polygon, 0.5);
          label.pmd_text = polar_min_distance(label.polygon, cp);
          if (label.pmd_text <= 0.0) {
            fail("instance has zero PMD");
          } else {
            label.cm_polygons =
                offset_polygon(label.polygon, -config.mu * label.pmd_text);
            if (label.cm_polygons.empty()) {
              fail("CM collapsed for instance");
            } else {
              label.centers = sample_centers(label.polygon, config.n_centers, &bundle.warnings);
              for (auto it = label.centers.begin(); it != label.centers.end();) {
                try {
                  it->pmd = polar_min_distance(label.polygon, it->point);
                  it->ray_distances = ray_distances(label.polygon, it->point);
                  if (it->pmd <= 0.0) throw DegeneratePolygon("center PMD is zero");
                  ++it;
                } catch (const std::runtime_error& e) {
                  bundle.warnings.push_back(std::string("center dropped: ") + e.what());
                  it = label.centers.erase(it);
                }
              }
            }
          }
        } catch (const std::runtime_error& e) {
          fail(std::string("instance ignored: ") + e.what());
        }
      }
    }

    // Rasterize at label scale; a CM that leaves no cells is a collapse.
    if (!label.ignore) {
      BinaryGrid inst_cm(lh, lw);
      for (const TextPolygon& cm_poly : label.cm_polygons) {
        const BinaryGrid r = rasterize(cm_poly.scaled(inv_scale), lh, lw);
        for (std::size_t i = 0; i < inst_cm.cells.size(); ++i) inst_cm.cells[i] |= r.cells[i];
      }
      if (inst_cm.count_ones() == 0) {
        fail("CM rasterizes to empty at label scale");
      } else {
        const BinaryGrid inst_text = rasterize(label.polygon.scaled(inv_scale), lh, lw);
        for (std::size_t i = 0; i < bundle.cm.cells.size(); ++i) {
          bundle.cm.cells[i] |= inst_cm.cells[i];
          bundle.text.cells[i] |= inst_text.cells[i];
        }
      }
    }
    bundle.instances.push_back(std::move(label));
  }

  bundle.gap = gap_mask(bundle.text, bundle.cm);
  return bundle;
}

}  // namespace cmtext
