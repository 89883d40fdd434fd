#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "informed/core.hpp"
#include "informed/renderers.hpp"

namespace informed {

using FeatureVector = std::vector<double>;

// ---------------------------------------------------------------------------
// Histogram of oriented gradients

struct HogOptions {
  std::size_t orientations = 9;
  std::size_t cell = 20;
  double epsilon = 1e-6;
};

std::size_t hog_length(std::size_t width, std::size_t height, const HogOptions& options);

/// Per-cell histograms of gradient magnitude over unsigned orientation, hard binned,
/// each cell L2-normalized, cells concatenated row-major. Central differences with
/// replicated borders. Throws ConfigError for multi-channel input or when the image
/// does not tile into whole cells.
FeatureVector hog(const ImageGrid& image, const HogOptions& options = {}, Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// Planar geometry used by the rectangle fitter

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

/// Counter-clockwise hull without collinear points (Andrew's monotone chain).
std::vector<Point2> convex_hull(std::vector<Point2> points);
double polygon_area(std::span<const Point2> polygon);

struct RotatedRect {
  Point2 center;
  double width = 0.0;   // extent along the edge direction `angle`
  double height = 0.0;  // extent along the normal
  double angle = 0.0;   // radians, direction of the supporting hull edge

  double area() const { return width * height; }
};

/// Minimum-area enclosing rectangle of a convex CCW polygon by rotating calipers.
RotatedRect min_area_rect(std::span<const Point2> hull);

// ---------------------------------------------------------------------------
// Tile rectangle fitting

struct FittedRect {
  double cx = 0.0;
  double cy = 0.0;
  double side = 0.0;
  double angle = 0.0;  // in [-pi/4, pi/4)
  bool found = false;
};

struct RectFitOptions {
  double tolerance = 0.25;  // max-channel deviation from the palette color
};

/// Per palette color: threshold by nearest palette color, keep the largest 4-connected
/// component, and fit its minimum-area rectangle. Unseen colors give found == false.
std::array<FittedRect, kTileCount> fit_rectangles(const ImageGrid& image, std::span<const Rgb, kTileCount> palette,
                                                  const RectFitOptions& options = {});

/// (cx/W, cy/H, side/max(W,H), (angle + pi/4)/(pi/2)), clamped to [0,1]. Missing
/// tiles map to (0.5, 0.5, 0.5, 0.5).
FeatureVector rect_to_feature(std::span<const FittedRect> rects, std::size_t tile_index, std::size_t width,
                              std::size_t height);

// ---------------------------------------------------------------------------
// Extractors addressed by id in configuration files.

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual std::string id() const = 0;
  virtual std::size_t length() const = 0;
  virtual FeatureVector extract(const ImageGrid& image) const = 0;
};

class HogExtractor final : public FeatureExtractor {
 public:
  HogExtractor(ImageShape shape, HogOptions options);
  std::string id() const override { return "hog"; }
  std::size_t length() const override { return length_; }
  FeatureVector extract(const ImageGrid& image) const override { return hog(image, options_, Exec::serial); }

 private:
  HogOptions options_;
  std::size_t length_;
};

/// Concatenated rect_to_feature of all six tiles (24 values, tile i at [4i, 4i+4)).
class RectExtractor final : public FeatureExtractor {
 public:
  explicit RectExtractor(ImageShape shape, RectFitOptions options = {});
  std::string id() const override { return "rects"; }
  std::size_t length() const override { return kTileCount * 4; }
  FeatureVector extract(const ImageGrid& image) const override;

 private:
  ImageShape shape_;
  RectFitOptions options_;
};

}  // namespace informed
