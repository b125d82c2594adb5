#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "irspla/errors.hpp"

namespace irspla::channel {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
  bool operator==(const Position3D&) const = default;
};

inline Position3D operator+(Position3D a, Position3D b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Position3D operator-(Position3D a, Position3D b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Position3D operator*(double s, Position3D a) { return {s * a.x, s * a.y, s * a.z}; }

inline double norm(Position3D a) { return std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z); }
inline double distance(Position3D a, Position3D b) { return norm(a - b); }

inline std::string to_string(Position3D p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.z) + ")";
}

/// Constant-velocity kinematics: sample k sits at start + velocity * k / fs.
inline std::vector<Position3D> mobility_trace(Position3D start, Position3D velocity, std::size_t n_samples,
                                              double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw DomainError("mobility_trace: sample rate must be positive");
  std::vector<Position3D> out;
  out.reserve(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = static_cast<double>(k) / sample_rate_hz;
    out.push_back(start + t * velocity);
  }
  return out;
}

namespace detail {
// Triangle-wave fold of a coordinate into [center - half, center + half].
inline double reflect(double value, double center, double half) {
  if (!(half > 0.0)) return value;
  const double width = 2.0 * half;
  double m = std::fmod(value - (center - half), 2.0 * width);
  if (m < 0.0) m += 2.0 * width;
  if (m > width) m = 2.0 * width - m;
  return center - half + m;
}
}  // namespace detail

/// Mirrors a free-flight position back into an axis-aligned zone, so that
/// a constant-speed user bounces between the zone walls. Axes with a zero
/// half-extent are left untouched.
inline Position3D reflect_into_zone(Position3D p, Position3D center, Position3D half_extent) {
  return {detail::reflect(p.x, center.x, half_extent.x), detail::reflect(p.y, center.y, half_extent.y),
          detail::reflect(p.z, center.z, half_extent.z)};
}

/// Uniform linear array along the x axis, centred on `center`.
inline std::vector<Position3D> ula_positions(Position3D center, std::size_t n, double spacing) {
  std::vector<Position3D> out;
  out.reserve(n);
  const double mid = (static_cast<double>(n) - 1.0) / 2.0;
  for (std::size_t i = 0; i < n; ++i) out.push_back(center + Position3D{(static_cast<double>(i) - mid) * spacing, 0, 0});
  return out;
}

/// Planar IRS in the y-z plane: `cols` elements along y, `rows` along z.
/// Element index m = row * cols + col.
inline std::vector<Position3D> planar_array_positions(Position3D center, std::size_t rows, std::size_t cols,
                                                      double spacing) {
  std::vector<Position3D> out;
  out.reserve(rows * cols);
  const double rmid = (static_cast<double>(rows) - 1.0) / 2.0;
  const double cmid = (static_cast<double>(cols) - 1.0) / 2.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out.push_back(center + Position3D{0, (static_cast<double>(c) - cmid) * spacing, (static_cast<double>(r) - rmid) * spacing});
  return out;
}

}  // namespace irspla::channel
