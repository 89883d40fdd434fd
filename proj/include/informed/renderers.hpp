#pragma once

#include <array>
#include <span>
#include <string_view>

#include "informed/core.hpp"

namespace informed {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// ---------------------------------------------------------------------------
// Cubical room seen from a camera inside it.
//
// The room is the cube [-1,1]^3 with a point light at the origin. Every wall shares one
// albedo, so the image is invariant under the 24 rotations of the cube. theta is
// (x, y, z, yaw, pitch, roll); orientation is Rz(yaw) * Ry(pitch) * Rx(roll) applied
// to a camera looking down its local +x axis with local +z up.

struct RoomOptions {
  std::size_t width = 200;
  std::size_t height = 200;
  double noise_sigma = 0.02;
  double vertical_fov = 1.5707963267948966;  // 90 degrees
};

Mat3 room_rotation(double yaw, double pitch, double roll);

/// Pixel intensity is 2 * cos(incidence) / (1 + d^2) with d the distance from the hit
/// point to the light, clamped to [0,1] and stored at float32 precision.
/// Throws DomainError if the camera is not strictly inside the cube.
ImageGrid render_room(std::span<const double> theta, const RoomOptions& options, Exec exec = Exec::parallel);

class RoomModel final : public GenerativeModel {
 public:
  explicit RoomModel(RoomOptions options = {});

  std::string_view problem_id() const override { return "room"; }
  const ParamSpace& space() const override { return space_; }
  ImageShape image_shape() const override { return {options_.width, options_.height, 1}; }
  ImageGrid render(std::span<const double> theta) const override { return render_room(theta, options_); }

  const RoomOptions& options() const { return options_; }

 private:
  RoomOptions options_;
  ParamSpace space_;
};

// ---------------------------------------------------------------------------
// Occluding tiles.
//
// Six colored squares; tile i owns theta[4i..4i+3] = (x, y, z, phi) with x, y, z in
// (-1,1) and phi wrapped on [-pi/4, pi/4). Squares shrink with depth as
// s(z) = S0 * 2 / (z + 3), are painted far-to-near over a black background and the
// composite is Gaussian blurred.

inline constexpr std::size_t kTileCount = 6;
inline constexpr std::size_t kTileParams = 4;

struct TilesOptions {
  std::size_t width = 200;
  std::size_t height = 200;
  double noise_sigma = 0.02;
  double tile_scale = 0.3;  // S0 as a fraction of the image width (60 px at 200)
  double blur_sigma = 1.5;  // pixels; 0 disables the blur
};

using Rgb = std::array<double, 3>;
const std::array<Rgb, kTileCount>& tile_palette();

double tile_side_pixels(double z, const TilesOptions& options);
/// Pixel-space center of a tile: x maps to [0, width], y to [0, height].
std::array<double, 2> tile_center_pixels(double x, double y, const TilesOptions& options);

/// Back-to-front paint order. Equal depths paint the lower index last (on top).
std::array<std::size_t, kTileCount> tile_paint_order(std::span<const double> theta);

/// Sharp composite without blur.
ImageGrid paint_tiles(std::span<const double> theta, const TilesOptions& options);
ImageGrid gaussian_blur(const ImageGrid& image, double sigma, Exec exec = Exec::parallel);
ImageGrid render_tiles(std::span<const double> theta, const TilesOptions& options, Exec exec = Exec::parallel);

class TilesModel final : public GenerativeModel {
 public:
  explicit TilesModel(TilesOptions options = {});

  std::string_view problem_id() const override { return "tiles"; }
  const ParamSpace& space() const override { return space_; }
  ImageShape image_shape() const override { return {options_.width, options_.height, 3}; }
  ImageGrid render(std::span<const double> theta) const override { return render_tiles(theta, options_); }

  const TilesOptions& options() const { return options_; }

 private:
  TilesOptions options_;
  ParamSpace space_;
};

/// render(theta) plus i.i.d. N(0, sigma^2) noise on every pixel and channel. Values are
/// not clipped to [0,1].
ImageGrid make_observation(const GenerativeModel& model, std::span<const double> theta, Rng& rng);
ImageGrid make_observation(const GenerativeModel& model, std::span<const double> theta, Rng& rng, double sigma);

// ---------------------------------------------------------------------------
// Cube symmetry of the room problem.

/// The 24 proper rotations of the cube as signed permutation matrices; element 0 is
/// the identity.
const std::array<Mat3, 24>& cube_rotations();

/// Pose obtained by rotating the whole camera rig by `rotation`. The returned angles
/// stay on the same Euler branch (sign of cos(pitch)) as the input.
ParamVector rotate_room_pose(std::span<const double> theta, const Mat3& rotation);

}  // namespace informed
