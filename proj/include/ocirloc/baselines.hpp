// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "ocirloc/ann.hpp"
#include "ocirloc/dataset.hpp"
#include "ocirloc/scene.hpp"
#include "ocirloc/signal_chain.hpp"

namespace ocirloc {

/// Anchor set and channel-inversion constants for linear trilateration.
///
/// With both devices vertical the DC received value obeys
/// P = C * h_v^(m+1) / d^(m+3), C = scale * (m+1) * A_pd / (2 pi),
/// which rss_to_distance inverts. Distances are clamped to
/// [h_v, max_distance] before linearization.
struct TrilaterationConfig {
    std::vector<PdSpec> anchors; // 3 or more, non-collinear in the plane
    double edge_exclusion = 0.5; // m, test points closer to a wall are skipped
    double lambertian_m = 1.0;
    double height_diff = 0.0;  // h_v, ceiling minus transmitter plane
    double signal_scale = 0.0; // rho * N_p * R_p * E_p
    double pd_area = 1e-4;
    double max_distance = 0.0;
    double window = 60e-9; // dc normalization window

    double inversion_constant() const {
        return signal_scale * (lambertian_m + 1.0) * pd_area / kTwoPi;
    }

    void validate() const {
        if (anchors.size() < 3)
            throw std::invalid_argument("TrilaterationConfig: need at least 3 anchors");
        if (edge_exclusion < 0.0)
            throw std::invalid_argument("TrilaterationConfig: edge_exclusion must be >= 0");
        if (!(height_diff > 0.0) || !(signal_scale > 0.0) || !(pd_area > 0.0) ||
            !(max_distance >= height_diff))
            throw std::invalid_argument("TrilaterationConfig: bad inversion constants");
    }
};

/// Build the inversion constants from the scene and pulse settings. The
/// anchors default to the scene's detectors.
inline TrilaterationConfig make_trilateration_config(const RoomScene& scene,
                                                     const UeSpec& ue, const PulseSpec& pulse,
                                                     double window,
                                                     double edge_exclusion = 0.5) {
    if (scene.pds.empty())
        throw std::invalid_argument("make_trilateration_config: scene has no detectors");
    TrilaterationConfig cfg;
    cfg.anchors = scene.pds;
    cfg.edge_exclusion = edge_exclusion;
    cfg.lambertian_m = lambertian_order(ue.lambertian_half_angle);
    cfg.height_diff = scene.height - scene.ue_height;
    cfg.signal_scale = scene.pds.front().responsivity *
                       static_cast<double>(pulse.num_pulses) * pulse.repetition_rate *
                       pulse.energy;
    cfg.pd_area = scene.pds.front().area;
    cfg.max_distance = scene.diagonal();
    cfg.window = window;
    return cfg;
}

struct RangeEstimate {
    double distance = 0.0;
    bool clamped = false;
};

/// Invert the closed-form LOS law for the anchor distance.
inline RangeEstimate rss_to_distance(double received_power, const TrilaterationConfig& cfg) {
    if (!(received_power > 0.0))
        throw std::invalid_argument("rss_to_distance: received power must be > 0");
    const double m = cfg.lambertian_m;
    const double num = cfg.inversion_constant() * std::pow(cfg.height_diff, m + 1.0);
    RangeEstimate est;
    est.distance = std::pow(num / received_power, 1.0 / (m + 3.0));
    if (est.distance < cfg.height_diff) {
        est.distance = cfg.height_diff;
        est.clamped = true;
    } else if (est.distance > cfg.max_distance) {
        est.distance = cfg.max_distance;
        est.clamped = true;
    }
    return est;
}

/// Linear trilateration: subtract the first anchor's circle equation from the
/// others and solve the resulting system for (x, y); least squares when more
/// than three anchors are configured.
inline Position trilaterate(std::span<const double> received_powers,
                            const TrilaterationConfig& cfg) {
    cfg.validate();
    if (received_powers.size() != cfg.anchors.size())
        throw std::invalid_argument("trilaterate: one power per anchor required");

    const std::size_t n = cfg.anchors.size();
    std::vector<double> r_sq(n); // horizontal range squared
    for (std::size_t i = 0; i < n; ++i) {
        const double d = rss_to_distance(received_powers[i], cfg).distance;
        r_sq[i] = std::max(0.0, d * d - cfg.height_diff * cfg.height_diff);
    }

    const double x0 = cfg.anchors[0].position.x;
    const double y0 = cfg.anchors[0].position.y;
    // rows: 2(xi-x0) x + 2(yi-y0) y = r0^2 - ri^2 + (xi^2+yi^2) - (x0^2+y0^2)
    double ata00 = 0.0, ata01 = 0.0, ata11 = 0.0, atb0 = 0.0, atb1 = 0.0;
    double scale = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double xi = cfg.anchors[i].position.x;
        const double yi = cfg.anchors[i].position.y;
        const double a0 = 2.0 * (xi - x0);
        const double a1 = 2.0 * (yi - y0);
        const double b = r_sq[0] - r_sq[i] + (xi * xi + yi * yi) - (x0 * x0 + y0 * y0);
        ata00 += a0 * a0;
        ata01 += a0 * a1;
        ata11 += a1 * a1;
        atb0 += a0 * b;
        atb1 += a1 * b;
        scale = std::max(scale, a0 * a0 + a1 * a1);
    }
    const double det = ata00 * ata11 - ata01 * ata01;
    if (!(std::abs(det) > 1e-12 * scale * scale))
        throw std::runtime_error("trilaterate: singular anchor geometry (collinear anchors)");
    return {(atb0 * ata11 - atb1 * ata01) / det, (ata00 * atb1 - ata01 * atb0) / det};
}

/// Exact DC received values from the channel alone (no pulse shaping, no
/// sampling, no noise): the oracle input for trilateration exactness checks.
inline std::vector<double> exact_dc_powers(const RoomScene& scene, const UeSpec& ue,
                                           double signal_scale) {
    std::vector<double> out;
    out.reserve(scene.pds.size());
    for (const auto& pd : scene.pds)
        out.push_back(signal_scale * los_response(scene, ue, pd).gain);
    return out;
}

/// Per-location DC feature vectors (one window-integrated value per
/// detector), drawn through the full noisy signal chain.
inline std::vector<FingerprintRecord>
dc_feature_records(const RoomScene& scene, const std::vector<std::vector<OcirProfile>>& profiles,
                   const std::vector<Position>& grid, const PulseSpec& pulse,
                   const SamplerSpec& sampler, const NoiseSpec& noise) {
    if (profiles.size() != grid.size())
        throw std::invalid_argument("dc_feature_records: profile/grid size mismatch");
    std::vector<FingerprintRecord> records(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        FingerprintRecord rec;
        rec.label = grid[i];
        rec.values.reserve(scene.pds.size());
        UeSpec ue;
        ue.position = grid[i];
        for (std::size_t q = 0; q < scene.pds.size(); ++q) {
            const auto wf = received_waveform(profiles[i][q], pulse, ue.led_bandwidth_hz,
                                              scene.pds[q].bandwidth_hz,
                                              scene.pds[q].responsivity);
            const auto samples =
                sample_and_noise(wf, sampler, noise, pulse.num_pulses, mix_key({i, q}));
            rec.values.push_back(dc_feature(samples));
        }
        records[i] = std::move(rec);
    });
    return records;
}

/// RMSE (cm) of linear trilateration over DC records, skipping points within
/// edge_exclusion of the walls. Noise can push a measured power to zero or
/// below; such anchors read as the farthest plausible range.
inline double trilateration_rmse(const TrilaterationConfig& cfg,
                                 const std::vector<FingerprintRecord>& dc_records,
                                 double room_length, double room_width) {
    cfg.validate();
    CompensatedSum sq;
    std::size_t used = 0;
    for (const auto& rec : dc_records) {
        const auto& p = rec.label;
        if (p.x < cfg.edge_exclusion || p.x > room_length - cfg.edge_exclusion ||
            p.y < cfg.edge_exclusion || p.y > room_width - cfg.edge_exclusion)
            continue;
        std::vector<double> powers(rec.values.size());
        for (std::size_t q = 0; q < rec.values.size(); ++q) {
            const double power = rec.values[q] * cfg.window;
            powers[q] = power > 0.0 ? power : std::numeric_limits<double>::min();
        }
        const Position est = trilaterate(powers, cfg);
        const double ex = est.x - p.x;
        const double ey = est.y - p.y;
        sq.add(ex * ex + ey * ey);
        ++used;
    }
    if (used == 0)
        throw std::runtime_error("trilateration_rmse: no points inside the exclusion region");
    return 100.0 * std::sqrt(sq.value() / static_cast<double>(used));
}

/// Train-and-evaluate over DC feature records: the learned three-detector
/// RSS localizer. Reuses the dataset and network modules unchanged.
inline double dc_rss_ann_rmse(std::vector<FingerprintRecord> records, const TrainConfig& cfg,
                              std::uint64_t split_seed) {
    auto ds = standardize(split(std::move(records), split_seed));
    const auto result = train(ds, cfg);
    return evaluate_rmse(result.model, ds.test);
}

} // namespace ocirloc
