// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocirloc/common.hpp"

namespace ocirloc {

/// Ceiling photodetector. Orientation is fixed vertically downward.
struct PdSpec {
    Vec3 position{};                         // z must sit on the ceiling plane
    double area = 1e-4;                      // m^2 (1 cm^2, representative)
    double fov_half_angle = deg_to_rad(85.0); // radians
    double responsivity = 0.54;              // A/W (representative)
    double bandwidth_hz = 500e6;             // first-order low-pass corner

    static constexpr Vec3 orientation() { return {0.0, 0.0, -1.0}; } // downward

    void validate() const {
        if (!(area > 0.0))
            throw std::invalid_argument("PdSpec: area must be > 0");
        if (!(fov_half_angle > 0.0) || fov_half_angle > kPi / 2.0)
            throw std::invalid_argument("PdSpec: field of view half-angle must be in (0, pi/2]");
        if (!(responsivity > 0.0))
            throw std::invalid_argument("PdSpec: responsivity must be > 0");
        if (!(bandwidth_hz > 0.0))
            throw std::invalid_argument("PdSpec: bandwidth must be > 0");
    }
};

/// Mobile transmitter. Orientation is fixed vertically upward; height comes
/// from the scene.
struct UeSpec {
    Position position{};
    double lambertian_half_angle = deg_to_rad(60.0); // radians
    double led_bandwidth_hz = 500e6;

    static constexpr Vec3 orientation() { return {0.0, 0.0, 1.0}; } // upward

    void validate() const {
        if (!(lambertian_half_angle > 0.0) || !(lambertian_half_angle < kPi / 2.0))
            throw std::invalid_argument("UeSpec: Lambertian half-angle must be in (0, pi/2)");
        if (!(led_bandwidth_hz > 0.0))
            throw std::invalid_argument("UeSpec: LED bandwidth must be > 0");
    }
};

enum class Surface : int {
    WallXLow = 0,  // x = 0 plane
    WallXHigh = 1, // x = length
    WallYLow = 2,  // y = 0
    WallYHigh = 3, // y = width
    Floor = 4,
    Ceiling = 5,
};

inline constexpr int kSurfaceCount = 6;

struct SurfaceSpec {
    bool enabled = false;
    double reflectivity = 0.8;
};

/// Room geometry, reflective surfaces, and detector placement.
///
/// Coordinates are corner-anchored: x in [0, length], y in [0, width],
/// z in [0, height]. Detectors sit on the ceiling plane; the transmitter
/// moves on the z = ue_height plane.
struct RoomScene {
    double length = 5.0; // m
    double width = 5.0;
    double height = 3.0;
    double ue_height = 0.85;
    double patch_area = 0.0025;      // A_ref, m^2; (5 cm)^2 default
    std::array<SurfaceSpec, kSurfaceCount> surfaces{};
    std::vector<PdSpec> pds;

    const SurfaceSpec& surface(Surface s) const { return surfaces[static_cast<int>(s)]; }
    SurfaceSpec& surface(Surface s) { return surfaces[static_cast<int>(s)]; }

    double pd_height_above_ue() const { return height - ue_height; }
    double diagonal() const { return std::sqrt(length * length + width * width + height * height); }

    void validate() const {
        if (!(length > 0.0) || !(width > 0.0) || !(height > 0.0))
            throw std::invalid_argument("RoomScene: dimensions must be > 0");
        if (!(patch_area > 0.0))
            throw std::invalid_argument("RoomScene: patch_area must be > 0");
        if (!(ue_height >= 0.0) || !(ue_height < height))
            throw std::invalid_argument("RoomScene: ue_height must be in [0, height)");
        for (const auto& s : surfaces)
            if (s.reflectivity < 0.0 || s.reflectivity > 1.0)
                throw std::invalid_argument("RoomScene: reflectivity must be in [0, 1]");
        for (const auto& pd : pds) {
            pd.validate();
            if (std::abs(pd.position.z - height) > 1e-9)
                throw std::invalid_argument("RoomScene: PD must sit on the ceiling plane");
            if (pd.position.x < 0.0 || pd.position.x > length || pd.position.y < 0.0 ||
                pd.position.y > width)
                throw std::invalid_argument("RoomScene: PD outside the ceiling footprint");
        }
    }

    /// True when (x, y) lies inside or on the boundary of the footprint.
    bool contains(const Position& p) const {
        return p.x >= 0.0 && p.x <= length && p.y >= 0.0 && p.y <= width;
    }

    void validate_ue(const UeSpec& ue) const {
        ue.validate();
        if (!contains(ue.position))
            throw std::invalid_argument("RoomScene: UE outside the room footprint");
    }
};

/// Representative default: 5 x 5 x 3 m room, four walls at reflectivity 0.8,
/// floor and ceiling bounces disabled.
inline RoomScene representative_scene() {
    RoomScene scene;
    for (int s = 0; s < 4; ++s)
        scene.surfaces[s] = {true, 0.8};
    scene.surfaces[static_cast<int>(Surface::Floor)] = {false, 0.3};
    scene.surfaces[static_cast<int>(Surface::Ceiling)] = {false, 0.8};
    return scene;
}

/// Ceiling PD layouts used throughout the experiments.
///
/// The one- and two-detector placements deliberately avoid every symmetry
/// axis of the room: a detector layout that shares a room symmetry maps
/// mirrored transmitter positions to identical fingerprints and makes
/// full-room localization ill-posed. Three detectors form an equilateral
/// triangle inscribed in the ceiling's inscribed circle (the trilateration
/// anchor default).
inline std::vector<PdSpec> default_pd_layout(const RoomScene& scene, int count) {
    const double cx = scene.length / 2.0;
    const double cy = scene.width / 2.0;
    const double z = scene.height;
    PdSpec proto;
    proto.position.z = z;
    std::vector<PdSpec> out;
    if (count == 1) {
        proto.position = {0.31 * scene.length, 0.47 * scene.width, z};
        out.push_back(proto);
    } else if (count == 2) {
        proto.position = {0.28 * scene.length, 0.34 * scene.width, z};
        out.push_back(proto);
        proto.position = {0.72 * scene.length, 0.59 * scene.width, z};
        out.push_back(proto);
    } else if (count == 3) {
        const double r = 0.5 * std::min(scene.length, scene.width);
        for (int k = 0; k < 3; ++k) {
            const double ang = kPi / 2.0 + 2.0 * kPi * k / 3.0;
            proto.position = {cx + r * std::cos(ang), cy + r * std::sin(ang), z};
            out.push_back(proto);
        }
    } else {
        throw std::invalid_argument("default_pd_layout: supported counts are 1, 2, 3");
    }
    return out;
}

} // namespace ocirloc
