#include <algorithm>
#include <cmath>
#include <numbers>

#include "informed/renderers.hpp"

namespace informed {

namespace {

double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::array<Mat3, 24> build_cube_rotations() {
  std::array<Mat3, 24> out{};
  std::array<int, 3> perm{0, 1, 2};
  std::size_t n = 0;
  // Identity first: permutation (0,1,2) with all signs +1 is enumerated first.
  do {
    for (int signs = 0; signs < 8; ++signs) {
      Mat3 m{};
      for (int r = 0; r < 3; ++r) m[r][perm[r]] = (signs >> r) & 1 ? -1.0 : 1.0;
      if (det3(m) > 0.0) out[n++] = m;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

const ParamSpace& room_space() {
  static const ParamSpace space = RoomModel().space();
  return space;
}

}  // namespace

const std::array<Mat3, 24>& cube_rotations() {
  static const std::array<Mat3, 24> rotations = build_cube_rotations();
  return rotations;
}

ParamVector rotate_room_pose(std::span<const double> theta, const Mat3& rotation) {
  if (theta.size() != 6) throw ConfigError("rotate_room_pose: theta must have 6 entries");
  if (rotation == cube_rotations()[0]) {
    ParamVector same(theta.begin(), theta.end());
    room_space().canonicalize(same);
    return same;
  }
  const Mat3 m = room_rotation(theta[3], theta[4], theta[5]);
  Mat3 qm{};
  Vec3 p{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      p[r] += rotation[r][c] * theta[c];
      for (int k = 0; k < 3; ++k) qm[r][c] += rotation[r][k] * m[k][c];
    }
  }
  double pitch = std::asin(std::clamp(-qm[2][0], -1.0, 1.0));
  double yaw = std::atan2(qm[1][0], qm[0][0]);
  double roll = std::atan2(qm[2][1], qm[2][2]);
  if (std::cos(theta[4]) < 0.0) {
    // Same rotation on the other Euler branch: (yaw + pi, pi - pitch, roll + pi).
    yaw += std::numbers::pi;
    pitch = std::numbers::pi - pitch;
    roll += std::numbers::pi;
  }
  ParamVector out{p[0], p[1], p[2], yaw, pitch, roll};
  room_space().canonicalize(out);
  return out;
}

}  // namespace informed
