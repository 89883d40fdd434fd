#include "informed/renderers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <omp.h>

namespace informed {

namespace {

constexpr double kPi = std::numbers::pi;

// Ray from inside the cube to its first wall; shading depends on the hit point only
// through |h|, and |h|^2 is summed in sorted order so signed axis permutations of the
// ray give bit-identical results.
double shade_ray(const Vec3& origin, const Vec3& dir) {
  double t = kInf;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) {
      t = std::min(t, (1.0 - origin[a]) / dir[a]);
    } else if (dir[a] < 0.0) {
      t = std::min(t, (-1.0 - origin[a]) / dir[a]);
    }
  }
  std::array<double, 3> sq;
  for (int a = 0; a < 3; ++a) {
    const double h = origin[a] + t * dir[a];
    sq[a] = h * h;
  }
  std::sort(sq.begin(), sq.end());
  const double d2 = (sq[0] + sq[1]) + sq[2];
  const double d = std::sqrt(d2);
  // cos(incidence) = 1/d for every wall of the cube with the light at the center.
  const double intensity = 2.0 / (d * (1.0 + d2));
  return static_cast<double>(static_cast<float>(std::clamp(intensity, 0.0, 1.0)));
}

void shade_row(ImageGrid& img, std::size_t row, const Vec3& origin, const Mat3& m, double tan_h, double tan_v) {
  const double w = static_cast<double>(img.width());
  const double h = static_cast<double>(img.height());
  const double v = (2.0 * (static_cast<double>(row) + 0.5) / h - 1.0) * tan_v;
  for (std::size_t col = 0; col < img.width(); ++col) {
    const double u = (2.0 * (static_cast<double>(col) + 0.5) / w - 1.0) * tan_h;
    // Camera frame: forward +x, image right = -y, image down = -z.
    const Vec3 local{1.0, -u, -v};
    Vec3 dir;
    for (int i = 0; i < 3; ++i) dir[i] = m[i][0] * local[0] + m[i][1] * local[1] + m[i][2] * local[2];
    img.at(col, row) = shade_ray(origin, dir);
  }
}

}  // namespace

Mat3 room_rotation(double yaw, double pitch, double roll) {
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cr = std::cos(roll), sr = std::sin(roll);
  return Mat3{{{cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr},
               {sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr},
               {-sp, cp * sr, cp * cr}}};
}

ImageGrid render_room(std::span<const double> theta, const RoomOptions& options, Exec exec) {
  if (theta.size() != 6) throw ConfigError("render_room: theta must have 6 entries");
  for (int a = 0; a < 3; ++a) {
    if (!(theta[a] > -1.0 && theta[a] < 1.0))
      throw DomainError("render_room: camera position must lie strictly inside the room");
  }
  const Vec3 origin{theta[0], theta[1], theta[2]};
  const Mat3 m = room_rotation(theta[3], theta[4], theta[5]);
  const double tan_v = std::tan(0.5 * options.vertical_fov);
  const double tan_h = tan_v * static_cast<double>(options.width) / static_cast<double>(options.height);

  ImageGrid img(options.width, options.height, 1);
  const auto rows = static_cast<std::ptrdiff_t>(options.height);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
    for (std::ptrdiff_t r = 0; r < rows; ++r) shade_row(img, static_cast<std::size_t>(r), origin, m, tan_h, tan_v);
  } else {
    for (std::ptrdiff_t r = 0; r < rows; ++r) shade_row(img, static_cast<std::size_t>(r), origin, m, tan_h, tan_v);
  }
  return img;
}

RoomModel::RoomModel(RoomOptions options)
    : GenerativeModel(options.noise_sigma),
      options_(options),
      space_({{-1.0, 1.0, false},
              {-1.0, 1.0, false},
              {-1.0, 1.0, false},
              {-kPi, kPi, true},
              {-kPi, kPi, true},
              {-kPi, kPi, true}}) {
  if (options_.width == 0 || options_.height == 0) throw ConfigError("RoomModel: empty image");
}

// ---------------------------------------------------------------------------

const std::array<Rgb, kTileCount>& tile_palette() {
  static const std::array<Rgb, kTileCount> palette{{{1.0, 0.0, 0.0},
                                                    {0.0, 1.0, 0.0},
                                                    {0.0, 0.0, 1.0},
                                                    {1.0, 1.0, 0.0},
                                                    {1.0, 0.0, 1.0},
                                                    {0.0, 1.0, 1.0}}};
  return palette;
}

double tile_side_pixels(double z, const TilesOptions& options) {
  return options.tile_scale * static_cast<double>(options.width) * 2.0 / (z + 3.0);
}

std::array<double, 2> tile_center_pixels(double x, double y, const TilesOptions& options) {
  return {0.5 * (x + 1.0) * static_cast<double>(options.width), 0.5 * (y + 1.0) * static_cast<double>(options.height)};
}

std::array<std::size_t, kTileCount> tile_paint_order(std::span<const double> theta) {
  std::array<std::size_t, kTileCount> order;
  for (std::size_t i = 0; i < kTileCount; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double za = theta[a * kTileParams + 2];
    const double zb = theta[b * kTileParams + 2];
    if (za != zb) return za > zb;
    return a > b;
  });
  return order;
}

ImageGrid paint_tiles(std::span<const double> theta, const TilesOptions& options) {
  if (theta.size() != kTileCount * kTileParams) throw ConfigError("paint_tiles: theta must have 24 entries");
  ImageGrid img(options.width, options.height, 3);
  const auto& palette = tile_palette();
  const auto w = static_cast<std::ptrdiff_t>(options.width);
  const auto h = static_cast<std::ptrdiff_t>(options.height);
  for (std::size_t tile : tile_paint_order(theta)) {
    const double* p = theta.data() + tile * kTileParams;
    const auto [cx, cy] = tile_center_pixels(p[0], p[1], options);
    const double half = 0.5 * tile_side_pixels(p[2], options);
    const double c = std::cos(p[3]), s = std::sin(p[3]);
    const double reach = half * std::numbers::sqrt2 + 1.0;
    const auto x0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cx - reach)));
    const auto x1 = std::min<std::ptrdiff_t>(w - 1, static_cast<std::ptrdiff_t>(std::ceil(cx + reach)));
    const auto y0 = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor(cy - reach)));
    const auto y1 = std::min<std::ptrdiff_t>(h - 1, static_cast<std::ptrdiff_t>(std::ceil(cy + reach)));
    for (std::ptrdiff_t py = y0; py <= y1; ++py) {
      const double dy = static_cast<double>(py) + 0.5 - cy;
      for (std::ptrdiff_t px = x0; px <= x1; ++px) {
        const double dx = static_cast<double>(px) + 0.5 - cx;
        const double u = c * dx + s * dy;
        const double v = -s * dx + c * dy;
        if (std::abs(u) <= half && std::abs(v) <= half) {
          for (std::size_t ch = 0; ch < 3; ++ch)
            img.at(static_cast<std::size_t>(px), static_cast<std::size_t>(py), ch) = palette[tile][ch];
        }
      }
    }
  }
  return img;
}

namespace {

std::vector<double> gaussian_taps(double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

void blur_row_horizontal(const ImageGrid& src, ImageGrid& dst, std::size_t y, std::span<const double> taps) {
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto w = static_cast<std::ptrdiff_t>(src.width());
  for (std::ptrdiff_t x = 0; x < w; ++x) {
    for (std::size_t c = 0; c < src.channels(); ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const auto xx = std::clamp<std::ptrdiff_t>(x + k, 0, w - 1);
        acc += taps[static_cast<std::size_t>(k + radius)] * src.at(static_cast<std::size_t>(xx), y, c);
      }
      dst.at(static_cast<std::size_t>(x), y, c) = acc;
    }
  }
}

void blur_row_vertical(const ImageGrid& src, ImageGrid& dst, std::size_t y, std::span<const double> taps) {
  const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const auto h = static_cast<std::ptrdiff_t>(src.height());
  const std::size_t row_len = src.width() * src.channels();
  auto out = dst.data().subspan(y * row_len, row_len);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const auto yy = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y) + k, 0, h - 1));
    const double t = taps[static_cast<std::size_t>(k + radius)];
    const auto in = src.data().subspan(yy * row_len, row_len);
    for (std::size_t i = 0; i < row_len; ++i) out[i] += t * in[i];
  }
}

}  // namespace

ImageGrid gaussian_blur(const ImageGrid& image, double sigma, Exec exec) {
  if (sigma <= 0.0) return image;
  const auto taps = gaussian_taps(sigma);
  ImageGrid tmp(image.shape());
  ImageGrid out(image.shape());
  const auto rows = static_cast<std::ptrdiff_t>(image.height());
  const bool par = exec == Exec::parallel;
#pragma omp parallel if (par && !omp_in_parallel())
  {
#pragma omp for schedule(static)
    for (std::ptrdiff_t y = 0; y < rows; ++y) blur_row_horizontal(image, tmp, static_cast<std::size_t>(y), taps);
#pragma omp for schedule(static)
    for (std::ptrdiff_t y = 0; y < rows; ++y) blur_row_vertical(tmp, out, static_cast<std::size_t>(y), taps);
  }
  return out;
}

ImageGrid render_tiles(std::span<const double> theta, const TilesOptions& options, Exec exec) {
  return gaussian_blur(paint_tiles(theta, options), options.blur_sigma, exec);
}

namespace {

ParamSpace make_tiles_space() {
  std::vector<DimSpec> dims;
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t t = 0; t < kTileCount; ++t) {
    dims.push_back({-1.0, 1.0, false});
    dims.push_back({-1.0, 1.0, false});
    dims.push_back({-1.0, 1.0, false});
    dims.push_back({-0.25 * kPi, 0.25 * kPi, true});
    blocks.push_back({t * kTileParams, t * kTileParams + 1, t * kTileParams + 2, t * kTileParams + 3});
  }
  return ParamSpace(std::move(dims), std::move(blocks));
}

}  // namespace

TilesModel::TilesModel(TilesOptions options)
    : GenerativeModel(options.noise_sigma), options_(options), space_(make_tiles_space()) {
  if (options_.width == 0 || options_.height == 0) throw ConfigError("TilesModel: empty image");
}

ImageGrid make_observation(const GenerativeModel& model, std::span<const double> theta, Rng& rng) {
  return make_observation(model, theta, rng, model.noise_sigma());
}

ImageGrid make_observation(const GenerativeModel& model, std::span<const double> theta, Rng& rng, double sigma) {
  ImageGrid img = model.render(theta);
  if (sigma > 0.0) {
    for (auto& v : img.data()) v += sigma * rng.normal();
  }
  return img;
}

}  // namespace informed
