// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ocirloc/common.hpp"
#include "ocirloc/exact_sum.hpp"
#include "ocirloc/scene.hpp"
#include "ocirloc/util.hpp"

namespace ocirloc {

/// Lambertian mode number from the emitter's half-power semi-angle.
inline double lambertian_order(double half_angle) {
    if (!(half_angle > 0.0) || !(half_angle < kPi / 2.0))
        throw std::domain_error("lambertian_order: half-angle must be in (0, pi/2)");
    return -std::log(2.0) / std::log(std::cos(half_angle));
}

struct LosResponse {
    double gain = 0.0;  // unitless channel gain
    double delay = 0.0; // seconds
};

namespace detail {

/// Room-centered coordinates. All tracer geometry runs in this frame: offsets
/// built symmetrically about the center negate exactly under mirroring, which
/// keeps profiles bit-identical for mirrored transmitter/detector layouts.
inline Vec3 centered(const RoomScene& scene, const Vec3& p) {
    return {p.x - scene.length / 2.0, p.y - scene.width / 2.0, p.z - scene.height / 2.0};
}

inline Vec3 centered_ue(const RoomScene& scene, const UeSpec& ue) {
    return {ue.position.x - scene.length / 2.0, ue.position.y - scene.width / 2.0,
            scene.ue_height - scene.height / 2.0};
}

/// Largest tile side <= sqrt(patch_area) that divides the span evenly.
inline std::size_t tile_count(double span, double patch_area) {
    const double q = span / std::sqrt(patch_area);
    const double n = std::ceil(q - 1e-9);
    return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

struct SurfaceFrame {
    Surface id;
    Vec3 normal;     // inward
    Vec3 origin;     // centered coords of the surface midpoint
    Vec3 u_axis;     // horizontal tiling axis
    Vec3 v_axis;
    double u_span;
    double v_span;
};

inline SurfaceFrame surface_frame(const RoomScene& scene, Surface s) {
    const double hl = scene.length / 2.0;
    const double hw = scene.width / 2.0;
    const double hh = scene.height / 2.0;
    switch (s) {
    case Surface::WallXLow:
        return {s, {1, 0, 0}, {-hl, 0, 0}, {0, 1, 0}, {0, 0, 1}, scene.width, scene.height};
    case Surface::WallXHigh:
        return {s, {-1, 0, 0}, {hl, 0, 0}, {0, 1, 0}, {0, 0, 1}, scene.width, scene.height};
    case Surface::WallYLow:
        return {s, {0, 1, 0}, {0, -hw, 0}, {1, 0, 0}, {0, 0, 1}, scene.length, scene.height};
    case Surface::WallYHigh:
        return {s, {0, -1, 0}, {0, hw, 0}, {1, 0, 0}, {0, 0, 1}, scene.length, scene.height};
    case Surface::Floor:
        return {s, {0, 0, 1}, {0, 0, -hh}, {1, 0, 0}, {0, 1, 0}, scene.length, scene.width};
    case Surface::Ceiling:
        return {s, {0, 0, -1}, {0, 0, hh}, {1, 0, 0}, {0, 1, 0}, scene.length, scene.width};
    }
    throw std::logic_error("surface_frame: bad surface id");
}

} // namespace detail

/// Number of reflective patches the scene tiles into.
inline std::size_t patch_count(const RoomScene& scene) {
    std::size_t total = 0;
    for (int si = 0; si < kSurfaceCount; ++si) {
        if (!scene.surfaces[si].enabled)
            continue;
        const auto f = detail::surface_frame(scene, static_cast<Surface>(si));
        total += detail::tile_count(f.u_span, scene.patch_area) *
                 detail::tile_count(f.v_span, scene.patch_area);
    }
    return total;
}

/// Per-detector precomputation of the one-bounce sum: every reflective patch
/// with its center, normal, patch->detector gain factor and path length. The
/// patch->detector leg does not depend on the transmitter, so a table is
/// built once per detector and shared read-only across all positions.
struct PatchTable {
    struct Group {
        Surface surface;
        Vec3 normal;
        std::size_t nu = 0, nv = 0;
        std::vector<double> cx, cy, cz; // centered patch centers
        std::vector<double> gain;       // rho * dA * cos(beta) * cos(psi) * A_pd / (pi d2^2), 0 outside FOV
        std::vector<double> dist;       // patch->detector path length
    };
    std::vector<Group> groups;
    double pd_area = 0.0;

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& g : groups)
            n += g.cx.size();
        return n;
    }
};

inline constexpr std::size_t kDefaultPatchCap = 200000000;

inline PatchTable build_patch_table(const RoomScene& scene, const PdSpec& pd,
                                    std::size_t patch_cap = kDefaultPatchCap) {
    scene.validate();
    pd.validate();
    const std::size_t total = patch_count(scene);
    if (total > patch_cap)
        throw std::length_error("build_patch_table: patch count " + std::to_string(total) +
                                " exceeds cap " + std::to_string(patch_cap));

    const Vec3 pd_c = detail::centered(scene, pd.position);
    const double cos_fov = std::cos(pd.fov_half_angle);

    PatchTable table;
    table.pd_area = pd.area;
    for (int si = 0; si < kSurfaceCount; ++si) {
        const auto& spec = scene.surfaces[si];
        if (!spec.enabled)
            continue;
        const auto f = detail::surface_frame(scene, static_cast<Surface>(si));
        const std::size_t nu = detail::tile_count(f.u_span, scene.patch_area);
        const std::size_t nv = detail::tile_count(f.v_span, scene.patch_area);
        const double su = f.u_span / static_cast<double>(nu);
        const double sv = f.v_span / static_cast<double>(nv);
        const double patch_gain_const = spec.reflectivity * (su * sv) * pd.area / kPi;

        PatchTable::Group g;
        g.surface = static_cast<Surface>(si);
        g.normal = f.normal;
        g.nu = nu;
        g.nv = nv;
        const std::size_t n = nu * nv;
        g.cx.reserve(n);
        g.cy.reserve(n);
        g.cz.reserve(n);
        g.gain.reserve(n);
        g.dist.reserve(n);

        const double uc = (static_cast<double>(nu) - 1.0) / 2.0;
        const double vc = (static_cast<double>(nv) - 1.0) / 2.0;
        for (std::size_t j = 0; j < nv; ++j) {
            const double v_off = (static_cast<double>(j) - vc) * sv;
            for (std::size_t i = 0; i < nu; ++i) {
                const double u_off = (static_cast<double>(i) - uc) * su;
                const Vec3 p = {f.origin.x + f.u_axis.x * u_off + f.v_axis.x * v_off,
                                f.origin.y + f.u_axis.y * u_off + f.v_axis.y * v_off,
                                f.origin.z + f.u_axis.z * u_off + f.v_axis.z * v_off};
                const Vec3 d = pd_c - p;
                const double d2_sq = d.norm_sq();
                const double d2 = std::sqrt(d2_sq);
                double gain = 0.0;
                if (d2 > 1e-12) {
                    const double cos_beta = f.normal.dot(d) / d2;  // exitance at the patch
                    const double cos_psi = d.z / d2;               // incidence at the detector
                    if (cos_beta > 0.0 && cos_psi >= cos_fov)
                        gain = patch_gain_const * cos_beta * cos_psi / d2_sq;
                }
                g.cx.push_back(p.x);
                g.cy.push_back(p.y);
                g.cz.push_back(p.z);
                g.gain.push_back(gain);
                g.dist.push_back(d2);
            }
        }
        table.groups.push_back(std::move(g));
    }
    return table;
}

/// Line-of-sight channel gain and propagation delay.
inline LosResponse los_response(const RoomScene& scene, const UeSpec& ue, const PdSpec& pd) {
    scene.validate_ue(ue);
    const Vec3 u = detail::centered_ue(scene, ue);
    const Vec3 p = detail::centered(scene, pd.position);
    const Vec3 d = p - u;
    const double dist = d.norm();
    const double delay = dist / kSpeedOfLight;
    const double cos_phi = d.z / dist; // emission angle off the upward transmitter normal
    const double cos_psi = cos_phi;    // both devices vertical, so incidence matches
    if (cos_psi < std::cos(pd.fov_half_angle) || cos_phi <= 0.0)
        return {0.0, delay};
    const double m = lambertian_order(ue.lambertian_half_angle);
    const double gain =
        (m + 1.0) * pd.area * std::pow(cos_phi, m) * cos_psi / (kTwoPi * dist * dist);
    return {gain, delay};
}

/// Time-binned channel impulse response: per-bin channel gain mass.
struct OcirProfile {
    double bin_width = 0.5e-9; // seconds
    double t_start = 0.0;      // time of the first bin's leading edge
    std::vector<double> bins;

    /// DC channel gain H(0): total profile mass.
    double total_gain() const { return compensated_sum(bins); }
};

/// Trace the channel for one transmitter/detector pair into a binned profile.
///
/// LOS lands at floor((d/c - t_start)/bin_width); every patch contributes
/// (m+1) cos^m(phi) cos(alpha) / (2 pi d1^2) times its precomputed
/// patch->detector factor at delay (d1 + d2)/c. One-bounce paths longer than
/// window * c are dropped, or rejected when `strict` is set. Per-bin deposits
/// use exact accumulation, so the result is independent of patch order.
inline OcirProfile ocir(const RoomScene& scene, const UeSpec& ue, const PdSpec& pd,
                        const PatchTable& table, double bin_width, double window,
                        bool strict = false) {
    if (!(bin_width > 0.0))
        throw std::invalid_argument("ocir: bin_width must be > 0");
    scene.validate_ue(ue);

    const LosResponse los = los_response(scene, ue, pd);
    if (!(window >= los.delay + bin_width))
        throw std::invalid_argument("ocir: window must cover the LOS delay");

    const std::size_t nbins =
        static_cast<std::size_t>(std::ceil(window / bin_width - 1e-9));
    std::vector<ExactSum> acc(nbins);

    const double inv_c = 1.0 / kSpeedOfLight;
    const double inv_bin = 1.0 / bin_width;

    if (los.gain > 0.0) {
        const std::size_t b = static_cast<std::size_t>(los.delay * inv_bin);
        if (b < nbins)
            acc[b].add(los.gain);
    }

    const double m = lambertian_order(ue.lambertian_half_angle);
    const double emit_const = (m + 1.0) / kTwoPi;
    const Vec3 u = detail::centered_ue(scene, ue);

    for (const auto& g : table.groups) {
        const Vec3 n = g.normal;
        const std::size_t count = g.cx.size();
        for (std::size_t i = 0; i < count; ++i) {
            const double gain2 = g.gain[i];
            if (gain2 == 0.0)
                continue;
            const double dx = g.cx[i] - u.x;
            const double dy = g.cy[i] - u.y;
            const double dz = g.cz[i] - u.z;
            const double d1_sq = dx * dx + dy * dy + dz * dz;
            if (d1_sq < 1e-24)
                continue; // transmitter coincides with the patch
            const double d1 = std::sqrt(d1_sq);
            if (dz <= 0.0)
                continue; // patch below the upward emitter's horizon
            const double cos_alpha_num = -(n.x * dx + n.y * dy + n.z * dz);
            if (cos_alpha_num <= 0.0)
                continue; // arrives behind the patch
            const double delay = (d1 + g.dist[i]) * inv_c;
            if (delay >= window) {
                if (strict)
                    throw std::runtime_error("ocir: one-bounce delay exceeds the window");
                continue;
            }
            const double cos_phi = dz / d1;
            const double cos_alpha = cos_alpha_num / d1;
            const double term =
                emit_const * std::pow(cos_phi, m) * cos_alpha / d1_sq * gain2;
            const std::size_t b = static_cast<std::size_t>(delay * inv_bin);
            if (b >= nbins) {
                if (strict)
                    throw std::runtime_error("ocir: deposit past the last bin");
                continue;
            }
            acc[b].add(term);
        }
    }

    OcirProfile profile;
    profile.bin_width = bin_width;
    profile.t_start = 0.0;
    profile.bins.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b)
        profile.bins[b] = acc[b].round_to_double();
    return profile;
}

/// CSV export: one row per bin, times in nanoseconds.
inline void write_profile_csv(const OcirProfile& profile, std::ostream& os) {
    os << "bin_start_ns,gain\n";
    for (std::size_t i = 0; i < profile.bins.size(); ++i) {
        const double t_ns = (profile.t_start + static_cast<double>(i) * profile.bin_width) * 1e9;
        os << fmt_double(t_ns) << ',' << fmt_double(profile.bins[i]) << '\n';
    }
}

} // namespace ocirloc
