// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ocirloc/channel.hpp"
#include "ocirloc/rng.hpp"
#include "ocirloc/scene.hpp"
#include "ocirloc/util.hpp"

namespace ocirloc {

/// Transmitted pulse train: unit-area Gaussian pulses of the given FWHM, so
/// `energy` is the literal optical energy per pulse.
struct PulseSpec {
    double energy = 1e-7;          // joules
    double width = 10e-9;          // seconds, FWHM
    double repetition_rate = 1e5;  // Hz
    std::uint64_t num_pulses = 1000;

    double sigma() const { return width / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

    void validate() const {
        if (!(energy > 0.0))
            throw std::invalid_argument("PulseSpec: energy must be > 0");
        if (!(width > 0.0))
            throw std::invalid_argument("PulseSpec: width must be > 0");
        if (!(repetition_rate > 0.0))
            throw std::invalid_argument("PulseSpec: repetition rate must be > 0");
        if (num_pulses < 1)
            throw std::invalid_argument("PulseSpec: need at least one pulse");
        if (repetition_rate * width >= 0.1)
            throw std::invalid_argument("PulseSpec: pulses must not overlap (R_p * width << 1)");
    }
};

/// Receiver-side sampler: N_s = round(window * rate).
struct SamplerSpec {
    double rate = 500e6;    // samples per second
    std::size_t num_samples = 30;
    double window = 60e-9;  // seconds

    void validate() const {
        if (!(rate > 0.0) || !(window > 0.0))
            throw std::invalid_argument("SamplerSpec: rate and window must be > 0");
        const auto expect = static_cast<std::size_t>(std::llround(window * rate));
        if (num_samples != expect || num_samples == 0)
            throw std::invalid_argument("SamplerSpec: num_samples must equal round(window*rate)");
    }
};

inline SamplerSpec make_sampler(double rate, double window) {
    SamplerSpec s;
    s.rate = rate;
    s.window = window;
    const long long n = std::llround(window * rate);
    s.num_samples = n < 1 ? 1 : static_cast<std::size_t>(n);
    if (n < 1)
        throw std::invalid_argument("make_sampler: window too short for the rate");
    s.validate();
    return s;
}

/// Ambient-noise model: two-sided PSD at the detector output. A sampled
/// value picks up zero-mean Gaussian noise of variance psd * rate, scaled
/// by sqrt(N_p) for the accumulated pulse train.
struct NoiseSpec {
    double psd = 5e-9; // A^2/Hz equivalent (representative)
    std::uint64_t seed = 1;

    void validate() const {
        if (psd < 0.0)
            throw std::invalid_argument("NoiseSpec: psd must be >= 0");
    }
};

/// Densely sampled waveform on a uniform grid; zero outside its support.
struct Waveform {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> values;

    double value_at(double t) const {
        const double pos = (t - t0) / dt;
        if (pos < 0.0 || values.empty())
            return 0.0;
        const auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= values.size())
            return pos <= static_cast<double>(values.size() - 1) ? values.back() : 0.0;
        const double frac = pos - static_cast<double>(i);
        return values[i] * (1.0 - frac) + values[i + 1] * frac;
    }

    double integral() const { return compensated_sum(values) * dt; }
};

namespace detail {

/// Unit-mass kernel on a uniform grid (sum * dt == 1).
struct Kernel {
    double t0 = 0.0;
    std::vector<double> values;
};

inline void normalize_kernel(Kernel& k, double dt) {
    const double mass = compensated_sum(k.values) * dt;
    if (!(mass > 0.0))
        throw std::runtime_error("kernel has no mass");
    for (double& v : k.values)
        v /= mass;
}

inline Kernel gaussian_kernel(double fwhm, double dt) {
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const auto half = static_cast<std::size_t>(std::ceil(8.0 * sigma / dt));
    Kernel k;
    k.t0 = -static_cast<double>(half) * dt;
    k.values.resize(2 * half + 1);
    for (std::size_t i = 0; i < k.values.size(); ++i) {
        const double t = (static_cast<double>(i) - static_cast<double>(half)) * dt;
        k.values[i] = std::exp(-t * t / (2.0 * sigma * sigma));
    }
    normalize_kernel(k, dt);
    return k;
}

inline constexpr std::size_t kMaxFilterSamples = 1u << 22;

/// First-order low-pass with unit DC gain. Length is chosen so the dropped
/// tail holds less than 1e-7 of the mass; an impossible request errors out.
inline Kernel lowpass_kernel(double bandwidth_hz, double dt,
                             std::size_t max_samples = kMaxFilterSamples) {
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("lowpass_kernel: bandwidth must be > 0");
    const double tau = 1.0 / (kTwoPi * bandwidth_hz);
    const double duration = tau * std::log(1e7);
    const double need = std::ceil(duration / dt) + 1.0;
    if (need > static_cast<double>(max_samples))
        throw std::runtime_error(
            "lowpass_kernel: filter tail cannot be kept below 1e-6 of its mass "
            "within the sample cap");
    Kernel k;
    k.t0 = 0.0;
    k.values.resize(static_cast<std::size_t>(need));
    for (std::size_t i = 0; i < k.values.size(); ++i)
        k.values[i] = std::exp(-static_cast<double>(i) * dt / tau);
    normalize_kernel(k, dt);
    return k;
}

inline Kernel convolve(const Kernel& a, const Kernel& b, double dt) {
    Kernel out;
    out.t0 = a.t0 + b.t0;
    out.values.assign(a.values.size() + b.values.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double ai = a.values[i] * dt;
        if (ai == 0.0)
            continue;
        for (std::size_t j = 0; j < b.values.size(); ++j)
            out.values[i + j] += ai * b.values[j];
    }
    return out;
}

} // namespace detail

/// Averaged electrical waveform at the detector for one channel profile:
/// rho * N_p * R_p * E_p * (G * h_LED * h_ch * h_PD)(t), on a grid at least
/// four times finer than the pulse width.
inline Waveform received_waveform(const OcirProfile& profile, const PulseSpec& pulse,
                                  double led_bandwidth_hz, double pd_bandwidth_hz,
                                  double responsivity) {
    pulse.validate();
    if (profile.bins.empty())
        throw std::invalid_argument("received_waveform: empty profile");
    const double window = profile.t_start +
                          static_cast<double>(profile.bins.size()) * profile.bin_width;
    if (1.0 / pulse.repetition_rate < window)
        throw std::invalid_argument(
            "received_waveform: repetition period must exceed the channel window");

    const auto refine = static_cast<std::size_t>(
        std::max(1.0, std::ceil(profile.bin_width / (pulse.width / 4.0) - 1e-9)));
    const double dt = profile.bin_width / static_cast<double>(refine);

    const auto g = detail::gaussian_kernel(pulse.width, dt);
    const auto led = detail::lowpass_kernel(led_bandwidth_hz, dt);
    const auto pd = detail::lowpass_kernel(pd_bandwidth_hz, dt);
    const auto k1 = detail::convolve(g, led, dt);
    const auto kernel = detail::convolve(k1, pd, dt);

    const double scale = responsivity * static_cast<double>(pulse.num_pulses) *
                         pulse.repetition_rate * pulse.energy;

    Waveform out;
    out.dt = dt;
    out.t0 = profile.t_start + kernel.t0;
    out.values.assign(profile.bins.size() * refine + kernel.values.size() - 1, 0.0);
    for (std::size_t b = 0; b < profile.bins.size(); ++b) {
        const double mass = profile.bins[b];
        if (mass == 0.0)
            continue;
        const std::size_t base = b * refine;
        for (std::size_t j = 0; j < kernel.values.size(); ++j)
            out.values[base + j] += mass * kernel.values[j];
    }
    for (double& v : out.values)
        v *= scale;
    return out;
}

/// Sample the waveform at k/rate and add the pulse-train noise:
/// values[k] = w(k/rate) + sqrt(N_p) * g_k with Var(g_k) = psd * rate.
/// `stream` separates independent draws (location, detector, ...).
inline std::vector<double> sample_and_noise(const Waveform& waveform, const SamplerSpec& sampler,
                                            const NoiseSpec& noise, std::uint64_t num_pulses,
                                            std::uint64_t stream = 0) {
    sampler.validate();
    noise.validate();
    std::vector<double> out(sampler.num_samples);
    const double sigma =
        std::sqrt(static_cast<double>(num_pulses) * noise.psd * sampler.rate);
    const std::uint64_t key = mix_key({noise.seed, stream});
    for (std::size_t k = 0; k < sampler.num_samples; ++k) {
        const double t = static_cast<double>(k) / sampler.rate;
        double v = waveform.value_at(t);
        if (sigma > 0.0)
            v += sigma * indexed_normal(key, k);
        out[k] = v;
    }
    return out;
}

/// Window-integrated received value: one effective sample at the
/// window-inverse rate.
inline double dc_feature(std::span<const double> samples) {
    if (samples.empty())
        throw std::invalid_argument("dc_feature: empty sample vector");
    return compensated_sum(samples) / static_cast<double>(samples.size());
}

/// Fingerprint supervector: concatenated per-detector sample vectors plus the
/// ground-truth transmitter position.
struct Supervector {
    std::vector<double> values; // length Q * N_s, detector-major
    Position label{};
};

/// Full synthesis for one transmitter location. Detector order follows
/// scene.pds; noise streams are keyed by (seed, location_index, detector
/// index, sample index) so parallel synthesis is reproducible.
inline Supervector build_supervector(const RoomScene& scene,
                                     const std::vector<PatchTable>& tables, const UeSpec& ue,
                                     const PulseSpec& pulse, const SamplerSpec& sampler,
                                     const NoiseSpec& noise, std::uint64_t location_index = 0,
                                     double bin_width = 0.5e-9) {
    if (tables.size() != scene.pds.size())
        throw std::invalid_argument("build_supervector: one patch table per detector required");
    Supervector sv;
    sv.label = ue.position;
    sv.values.reserve(scene.pds.size() * sampler.num_samples);
    for (std::size_t q = 0; q < scene.pds.size(); ++q) {
        const auto profile = ocir(scene, ue, scene.pds[q], tables[q], bin_width, sampler.window);
        const auto wf = received_waveform(profile, pulse, ue.led_bandwidth_hz,
                                          scene.pds[q].bandwidth_hz, scene.pds[q].responsivity);
        const auto samples =
            sample_and_noise(wf, sampler, noise, pulse.num_pulses, mix_key({location_index, q}));
        sv.values.insert(sv.values.end(), samples.begin(), samples.end());
    }
    return sv;
}

} // namespace ocirloc
