// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ocirloc {

inline constexpr const char* kVersion = "ocirloc 0.1.0";

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// 3-D point / direction with just the operations the tracer needs.
struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm_sq() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm_sq()); }
};

/// Horizontal transmitter position (the regression target).
struct Position {
    double x = 0.0, y = 0.0;
};

} // namespace ocirloc
