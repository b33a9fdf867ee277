// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocirloc/io.hpp"
#include "ocirloc/rng.hpp"
#include "ocirloc/scene.hpp"
#include "ocirloc/signal_chain.hpp"
#include "ocirloc/util.hpp"

namespace ocirloc {

using FingerprintRecord = Supervector;

/// Regular fingerprint lattice inset from the walls by `margin`.
struct GridSpec {
    double spacing = 0.02; // m
    double margin = 0.0;   // m
    std::uint64_t seed = 1;

    void validate() const {
        if (!(spacing > 0.0))
            throw std::invalid_argument("GridSpec: spacing must be > 0");
        if (margin < 0.0)
            throw std::invalid_argument("GridSpec: margin must be >= 0");
    }
};

inline std::size_t grid_points_per_axis(double span, double spacing) {
    return static_cast<std::size_t>(std::floor(span / spacing + 1e-9)) + 1;
}

/// Lattice positions, x fastest then y.
inline std::vector<Position> generate_grid(const RoomScene& scene, const GridSpec& grid) {
    grid.validate();
    if (!(grid.margin < std::min(scene.length, scene.width) / 2.0))
        throw std::invalid_argument("generate_grid: margin leaves no interior");
    const std::size_t nx = grid_points_per_axis(scene.length - 2.0 * grid.margin, grid.spacing);
    const std::size_t ny = grid_points_per_axis(scene.width - 2.0 * grid.margin, grid.spacing);
    if (nx == 0 || ny == 0)
        throw std::invalid_argument("generate_grid: empty grid");
    std::vector<Position> out;
    out.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            out.push_back({grid.margin + static_cast<double>(i) * grid.spacing,
                           grid.margin + static_cast<double>(j) * grid.spacing});
    return out;
}

/// Channel profiles for every (location, detector) pair. They depend only on
/// geometry, so sweeps over pulse/sampler settings reuse one set.
inline std::vector<std::vector<OcirProfile>>
trace_profiles(const RoomScene& scene, const std::vector<PatchTable>& tables,
               const std::vector<Position>& grid, double bin_width, double window) {
    if (tables.size() != scene.pds.size())
        throw std::invalid_argument("trace_profiles: one patch table per detector required");
    std::vector<std::vector<OcirProfile>> profiles(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        UeSpec ue;
        ue.position = grid[i];
        auto& row = profiles[i];
        row.reserve(scene.pds.size());
        for (std::size_t q = 0; q < scene.pds.size(); ++q)
            row.push_back(ocir(scene, ue, scene.pds[q], tables[q], bin_width, window));
    });
    return profiles;
}

/// Fingerprints from pre-traced profiles (noise streams keyed by location
/// index and detector index).
inline std::vector<FingerprintRecord>
fingerprints_from_profiles(const RoomScene& scene,
                           const std::vector<std::vector<OcirProfile>>& profiles,
                           const std::vector<Position>& grid, const PulseSpec& pulse,
                           const SamplerSpec& sampler, const NoiseSpec& noise) {
    if (profiles.size() != grid.size())
        throw std::invalid_argument("fingerprints_from_profiles: profile/grid size mismatch");
    std::vector<FingerprintRecord> records(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        FingerprintRecord rec;
        rec.label = grid[i];
        rec.values.reserve(scene.pds.size() * sampler.num_samples);
        UeSpec ue;
        ue.position = grid[i];
        for (std::size_t q = 0; q < scene.pds.size(); ++q) {
            const auto wf = received_waveform(profiles[i][q], pulse, ue.led_bandwidth_hz,
                                              scene.pds[q].bandwidth_hz,
                                              scene.pds[q].responsivity);
            const auto samples =
                sample_and_noise(wf, sampler, noise, pulse.num_pulses, mix_key({i, q}));
            rec.values.insert(rec.values.end(), samples.begin(), samples.end());
        }
        records[i] = std::move(rec);
    });
    return records;
}

/// One-call synthesis across a grid.
inline std::vector<FingerprintRecord>
synthesize_fingerprints(const RoomScene& scene, const std::vector<PatchTable>& tables,
                        const std::vector<Position>& grid, const PulseSpec& pulse,
                        const SamplerSpec& sampler, const NoiseSpec& noise,
                        double bin_width = 0.5e-9) {
    const auto profiles = trace_profiles(scene, tables, grid, bin_width, sampler.window);
    return fingerprints_from_profiles(scene, profiles, grid, pulse, sampler, noise);
}

/// Affine input scaler fitted over every element of a dataset.
struct Standardizer {
    double mean = 0.0;
    double std_dev = 1.0;

    double apply(double v) const { return (v - mean) / std_dev; }
    double invert(double v) const { return v * std_dev + mean; }
};

struct SplitDataset {
    std::vector<FingerprintRecord> train;
    std::vector<FingerprintRecord> validation;
    std::vector<FingerprintRecord> test;
    Standardizer standardizer{};
    bool standardized = false;

    std::size_t size() const { return train.size() + validation.size() + test.size(); }
    std::size_t input_dim() const {
        if (train.empty())
            throw std::runtime_error("SplitDataset: empty training split");
        return train.front().values.size();
    }
};

/// Deterministic shuffled split. Train and test take floor(0.64 n) and
/// floor(0.20 n); validation gets the remainder.
inline SplitDataset split(std::vector<FingerprintRecord> records, std::uint64_t seed) {
    const std::size_t n = records.size();
    if (n < 10)
        throw std::runtime_error("split: need at least 10 records");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(mix_key({seed, 0x5917bd5ull}));
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng.next_below(i + 1);
        std::swap(order[i], order[j]);
    }

    const auto n_train = static_cast<std::size_t>(std::floor(0.64 * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(0.20 * static_cast<double>(n)));
    const std::size_t n_val = n - n_train - n_test;

    SplitDataset ds;
    ds.train.reserve(n_train);
    ds.validation.reserve(n_val);
    ds.test.reserve(n_test);
    std::size_t k = 0;
    for (; k < n_train; ++k)
        ds.train.push_back(std::move(records[order[k]]));
    for (; k < n_train + n_val; ++k)
        ds.validation.push_back(std::move(records[order[k]]));
    for (; k < n; ++k)
        ds.test.push_back(std::move(records[order[k]]));
    return ds;
}

namespace detail {

inline void moments_over(const std::vector<const std::vector<FingerprintRecord>*>& groups,
                         double& mean, double& var) {
    CompensatedSum sum;
    std::size_t count = 0;
    for (const auto* g : groups)
        for (const auto& rec : *g) {
            for (double v : rec.values)
                sum.add(v);
            count += rec.values.size();
        }
    if (count == 0)
        throw std::runtime_error("standardize: no data");
    mean = sum.value() / static_cast<double>(count);
    CompensatedSum sq;
    for (const auto* g : groups)
        for (const auto& rec : *g)
            for (double v : rec.values)
                sq.add((v - mean) * (v - mean));
    var = sq.value() / static_cast<double>(count);
}

} // namespace detail

/// Shift to zero mean and scale to unit variance with one scalar mean and one
/// scalar deviation over all input elements. Fits on the entire dataset by
/// default; `fit_train_only` restricts the fit to the training split.
inline SplitDataset standardize(SplitDataset ds, bool fit_train_only = false) {
    double mean = 0.0, var = 0.0;
    if (fit_train_only)
        detail::moments_over({&ds.train}, mean, var);
    else
        detail::moments_over({&ds.train, &ds.validation, &ds.test}, mean, var);
    const double std_dev = std::sqrt(var);
    if (!(std_dev > 0.0))
        throw std::runtime_error("standardize: degenerate data (zero variance)");
    ds.standardizer = {mean, std_dev};
    ds.standardized = true;
    for (auto* g : {&ds.train, &ds.validation, &ds.test})
        for (auto& rec : *g)
            for (double& v : rec.values)
                v = ds.standardizer.apply(v);
    return ds;
}

/// Provenance and shape header of a fingerprint container.
struct DatasetMeta {
    std::uint32_t detectors = 0;
    std::uint32_t samples_per_detector = 0;
    double rate = 0.0;
    double window = 0.0;
    double grid_spacing = 0.0;
    double grid_margin = 0.0;
    double room_length = 0.0;
    double room_width = 0.0;
    std::uint64_t scene_digest = 0;
    std::uint64_t noise_seed = 0;
    std::uint64_t grid_seed = 0;
};

/// Canonical digest of everything that shapes the physics of a scene.
inline std::uint64_t scene_digest(const RoomScene& scene) {
    std::string s;
    for (double v : {scene.length, scene.width, scene.height, scene.ue_height, scene.patch_area})
        s += fmt_double(v) + ";";
    for (const auto& surf : scene.surfaces)
        s += (surf.enabled ? "1:" : "0:") + fmt_double(surf.reflectivity) + ";";
    for (const auto& pd : scene.pds) {
        for (double v : {pd.position.x, pd.position.y, pd.position.z, pd.area,
                         pd.fov_half_angle, pd.responsivity, pd.bandwidth_hz})
            s += fmt_double(v) + ",";
        s += ";";
    }
    return fnv1a64(s);
}

inline constexpr char kDatasetMagic[9] = "OCFPDS1\n";

inline void save_dataset(const std::string& path, const DatasetMeta& meta,
                         const std::vector<FingerprintRecord>& records) {
    auto os = io::open_out(path);
    io::write_magic(os, kDatasetMagic);
    io::write_u32(os, 1); // container version
    io::write_u32(os, meta.detectors);
    io::write_u32(os, meta.samples_per_detector);
    io::write_u32(os, 0); // reserved
    io::write_f64(os, meta.rate);
    io::write_f64(os, meta.window);
    io::write_f64(os, meta.grid_spacing);
    io::write_f64(os, meta.grid_margin);
    io::write_f64(os, meta.room_length);
    io::write_f64(os, meta.room_width);
    io::write_u64(os, meta.scene_digest);
    io::write_u64(os, meta.noise_seed);
    io::write_u64(os, meta.grid_seed);
    io::write_u64(os, records.size());
    const std::size_t dim =
        static_cast<std::size_t>(meta.detectors) * meta.samples_per_detector;
    for (const auto& rec : records) {
        if (rec.values.size() != dim)
            throw std::invalid_argument("save_dataset: record length does not match header");
        io::write_f64(os, rec.label.x);
        io::write_f64(os, rec.label.y);
        for (double v : rec.values)
            io::write_f64(os, v);
    }
    if (!os)
        throw std::runtime_error("save_dataset: write failed: " + path);
}

inline std::pair<DatasetMeta, std::vector<FingerprintRecord>>
load_dataset(const std::string& path) {
    auto is = io::open_in(path);
    io::expect_magic(is, kDatasetMagic, "load_dataset");
    if (io::read_u32(is) != 1)
        throw std::runtime_error("load_dataset: unsupported container version");
    DatasetMeta meta;
    meta.detectors = io::read_u32(is);
    meta.samples_per_detector = io::read_u32(is);
    (void)io::read_u32(is);
    meta.rate = io::read_f64(is);
    meta.window = io::read_f64(is);
    meta.grid_spacing = io::read_f64(is);
    meta.grid_margin = io::read_f64(is);
    meta.room_length = io::read_f64(is);
    meta.room_width = io::read_f64(is);
    meta.scene_digest = io::read_u64(is);
    meta.noise_seed = io::read_u64(is);
    meta.grid_seed = io::read_u64(is);
    const std::uint64_t count = io::read_u64(is);
    const std::size_t dim =
        static_cast<std::size_t>(meta.detectors) * meta.samples_per_detector;
    std::vector<FingerprintRecord> records(count);
    for (auto& rec : records) {
        rec.label.x = io::read_f64(is);
        rec.label.y = io::read_f64(is);
        rec.values.resize(dim);
        for (double& v : rec.values)
            v = io::read_f64(is);
    }
    return {meta, std::move(records)};
}

/// CSV export: x, y, then the supervector elements.
inline void write_dataset_csv(const std::vector<FingerprintRecord>& records, std::ostream& os) {
    if (records.empty()) {
        os << "x,y\n";
        return;
    }
    os << "x,y";
    for (std::size_t k = 0; k < records.front().values.size(); ++k)
        os << ",v" << k;
    os << '\n';
    for (const auto& rec : records) {
        os << fmt_double(rec.label.x) << ',' << fmt_double(rec.label.y);
        for (double v : rec.values)
            os << ',' << fmt_double(v);
        os << '\n';
    }
}

} // namespace ocirloc
