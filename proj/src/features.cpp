#include "informed/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

namespace informed {

std::size_t hog_length(std::size_t width, std::size_t height, const HogOptions& options) {
  return (width / options.cell) * (height / options.cell) * options.orientations;
}

namespace {

void hog_cell_row(const ImageGrid& img, const HogOptions& opt, std::size_t cell_row, FeatureVector& out) {
  const std::size_t w = img.width(), h = img.height();
  const std::size_t cells_x = w / opt.cell;
  const double bin_width = std::numbers::pi / static_cast<double>(opt.orientations);
  std::vector<double> hist(cells_x * opt.orientations, 0.0);

  for (std::size_t y = cell_row * opt.cell; y < (cell_row + 1) * opt.cell; ++y) {
    const std::size_t ym = y == 0 ? 0 : y - 1;
    const std::size_t yp = std::min(y + 1, h - 1);
    for (std::size_t x = 0; x < cells_x * opt.cell; ++x) {
      const std::size_t xm = x == 0 ? 0 : x - 1;
      const std::size_t xp = std::min(x + 1, w - 1);
      const double gx = 0.5 * (img.at(xp, y) - img.at(xm, y));
      const double gy = 0.5 * (img.at(x, yp) - img.at(x, ym));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double ang = std::atan2(gy, gx);
      if (ang < 0.0) ang += std::numbers::pi;
      if (ang >= std::numbers::pi) ang -= std::numbers::pi;
      const auto bin = std::min(opt.orientations - 1, static_cast<std::size_t>(ang / bin_width));
      hist[(x / opt.cell) * opt.orientations + bin] += mag;
    }
  }

  for (std::size_t cx = 0; cx < cells_x; ++cx) {
    double* cell = hist.data() + cx * opt.orientations;
    double ss = 0.0;
    for (std::size_t b = 0; b < opt.orientations; ++b) ss += cell[b] * cell[b];
    const double norm = std::sqrt(ss + opt.epsilon * opt.epsilon);
    const std::size_t base = (cell_row * cells_x + cx) * opt.orientations;
    for (std::size_t b = 0; b < opt.orientations; ++b) out[base + b] = cell[b] / norm;
  }
}

}  // namespace

FeatureVector hog(const ImageGrid& image, const HogOptions& options, Exec exec) {
  if (image.channels() != 1) throw ConfigError("hog: single-channel image required");
  if (options.cell == 0 || options.orientations == 0) throw ConfigError("hog: cell size and orientations must be positive");
  if (image.width() % options.cell != 0 || image.height() % options.cell != 0)
    throw ConfigError("hog: image size must be a multiple of the cell size");
  FeatureVector out(hog_length(image.width(), image.height(), options), 0.0);
  const auto cell_rows = static_cast<std::ptrdiff_t>(image.height() / options.cell);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
    for (std::ptrdiff_t r = 0; r < cell_rows; ++r) hog_cell_row(image, options, static_cast<std::size_t>(r), out);
  } else {
    for (std::ptrdiff_t r = 0; r < cell_rows; ++r) hog_cell_row(image, options, static_cast<std::size_t>(r), out);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr int kUnlabelled = -1;

std::vector<int> assign_palette(const ImageGrid& image, std::span<const Rgb, kTileCount> palette, double tolerance) {
  std::vector<int> labels(image.width() * image.height(), kUnlabelled);
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      int best = kUnlabelled;
      double best_dev = kInf;
      for (std::size_t p = 0; p < kTileCount; ++p) {
        double dev = 0.0;
        for (std::size_t c = 0; c < 3; ++c) dev = std::max(dev, std::abs(image.at(x, y, c) - palette[p][c]));
        if (dev < best_dev) {
          best_dev = dev;
          best = static_cast<int>(p);
        }
      }
      if (best_dev <= tolerance) labels[y * image.width() + x] = best;
    }
  }
  return labels;
}

// Largest 4-connected component of pixels carrying `label`; ties go to the component
// whose first pixel comes first in raster order.
std::vector<std::size_t> largest_component(const std::vector<int>& labels, int label, std::size_t w, std::size_t h) {
  std::vector<char> visited(labels.size(), 0);
  std::vector<std::size_t> best, current, stack;
  for (std::size_t start = 0; start < labels.size(); ++start) {
    if (visited[start] || labels[start] != label) continue;
    current.clear();
    stack.assign(1, start);
    visited[start] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      current.push_back(i);
      const std::size_t x = i % w, y = i / w;
      auto visit = [&](std::size_t j) {
        if (!visited[j] && labels[j] == label) {
          visited[j] = 1;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(i - 1);
      if (x + 1 < w) visit(i + 1);
      if (y > 0) visit(i - w);
      if (y + 1 < h) visit(i + w);
    }
    if (current.size() > best.size()) best = current;
  }
  return best;
}

double canonical_square_angle(double a) {
  const double quarter = 0.5 * std::numbers::pi;
  double r = std::fmod(a + 0.25 * std::numbers::pi, quarter);
  if (r < 0.0) r += quarter;
  double out = r - 0.25 * std::numbers::pi;
  if (out >= 0.25 * std::numbers::pi) out -= quarter;
  return out;
}

}  // namespace

std::array<FittedRect, kTileCount> fit_rectangles(const ImageGrid& image, std::span<const Rgb, kTileCount> palette,
                                                  const RectFitOptions& options) {
  if (image.channels() != 3) throw ConfigError("fit_rectangles: 3-channel image required");
  const std::size_t w = image.width(), h = image.height();
  const auto labels = assign_palette(image, palette, options.tolerance);

  std::array<FittedRect, kTileCount> out{};
  std::vector<Point2> corners;
  for (std::size_t tile = 0; tile < kTileCount; ++tile) {
    const auto comp = largest_component(labels, static_cast<int>(tile), w, h);
    if (comp.empty()) continue;
    corners.clear();
    corners.reserve(comp.size() * 4);
    for (std::size_t i : comp) {
      const auto x = static_cast<double>(i % w), y = static_cast<double>(i / w);
      corners.push_back({x, y});
      corners.push_back({x + 1.0, y});
      corners.push_back({x, y + 1.0});
      corners.push_back({x + 1.0, y + 1.0});
    }
    const auto hull = convex_hull(std::move(corners));
    corners = {};
    const RotatedRect r = min_area_rect(hull);
    out[tile] = {r.center.x, r.center.y, 0.5 * (r.width + r.height), canonical_square_angle(r.angle), true};
  }
  return out;
}

FeatureVector rect_to_feature(std::span<const FittedRect> rects, std::size_t tile_index, std::size_t width,
                              std::size_t height) {
  if (tile_index >= rects.size()) throw ConfigError("rect_to_feature: tile index out of range");
  const FittedRect& r = rects[tile_index];
  if (!r.found) return {0.5, 0.5, 0.5, 0.5};
  const double quarter = 0.5 * std::numbers::pi;
  return {std::clamp(r.cx / static_cast<double>(width), 0.0, 1.0),
          std::clamp(r.cy / static_cast<double>(height), 0.0, 1.0),
          std::clamp(r.side / static_cast<double>(std::max(width, height)), 0.0, 1.0),
          std::clamp((r.angle + 0.25 * std::numbers::pi) / quarter, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------

HogExtractor::HogExtractor(ImageShape shape, HogOptions options)
    : options_(options), length_(hog_length(shape.width, shape.height, options)) {
  if (shape.channels != 1) throw ConfigError("hog extractor: single-channel images required");
  if (options.cell == 0 || shape.width % options.cell != 0 || shape.height % options.cell != 0)
    throw ConfigError("hog extractor: image size must be a multiple of the cell size");
}

RectExtractor::RectExtractor(ImageShape shape, RectFitOptions options) : shape_(shape), options_(options) {
  if (shape.channels != 3) throw ConfigError("rects extractor: 3-channel images required");
}

FeatureVector RectExtractor::extract(const ImageGrid& image) const {
  const auto rects = fit_rectangles(image, tile_palette(), options_);
  FeatureVector out;
  out.reserve(length());
  for (std::size_t t = 0; t < kTileCount; ++t) {
    const auto f = rect_to_feature(rects, t, shape_.width, shape_.height);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

}  // namespace informed
