// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocirloc/baselines.hpp"
#include "ocirloc/config.hpp"
#include "ocirloc/dataset.hpp"
#include "ocirloc/svg.hpp"

namespace ocirloc {

/// Scene/training scale bundle. "desk" runs in minutes on a laptop; "paper"
/// restores the full-fidelity settings (2 cm grid, 1 mm^2 patches, 400 hidden
/// units, 100k-epoch budget) and is a long batch job.
struct ExperimentProfile {
    std::string name = "desk";
    double room_length = 4.0;
    double room_width = 4.0;
    double room_height = 3.0;
    double ue_height = 0.85;
    double patch_area = 0.0025; // (5 cm)^2
    double reflectivity = 0.8;
    double grid_spacing = 0.1;
    double noise_psd = 5e-9;
    std::size_t repeats = 3;
    TrainConfig train;

    static ExperimentProfile desk() {
        ExperimentProfile p;
        p.train.hidden_units = 100;
        p.train.batches_per_epoch = 60;
        p.train.max_epochs = 5000;
        return p;
    }

    static ExperimentProfile paper() {
        ExperimentProfile p;
        p.name = "paper";
        p.room_length = 5.0;
        p.room_width = 5.0;
        p.patch_area = 1e-6; // 1 mm^2
        p.grid_spacing = 0.02;
        p.repeats = 5;
        p.train.hidden_units = 400;
        p.train.batches_per_epoch = 300;
        p.train.max_epochs = 100000;
        return p;
    }

    RoomScene make_scene(int pd_count) const {
        RoomScene scene;
        scene.length = room_length;
        scene.width = room_width;
        scene.height = room_height;
        scene.ue_height = ue_height;
        scene.patch_area = patch_area;
        for (int s = 0; s < 4; ++s)
            scene.surfaces[s] = {true, reflectivity};
        scene.pds = default_pd_layout(scene, pd_count);
        scene.validate();
        return scene;
    }
};

enum class Method { OcirAnn, DcRssAnn, Trilateration };

inline const char* method_label(Method m) {
    switch (m) {
    case Method::OcirAnn: return "ocir-ann";
    case Method::DcRssAnn: return "dc-rss-ann";
    case Method::Trilateration: return "trilateration";
    }
    return "?";
}

inline Method method_from_label(const std::string& s) {
    if (s == "ocir-ann") return Method::OcirAnn;
    if (s == "dc-rss-ann") return Method::DcRssAnn;
    if (s == "trilateration") return Method::Trilateration;
    throw std::runtime_error("unknown method: " + s);
}

struct MethodSpec {
    Method method = Method::OcirAnn;
    int pd_count = 2;
    double rate_msps = 0.0; // OCIR sampling rate; 0 = plan default / axis value
};

enum class SweepAxis { PulseEnergy, SamplingRate, PulseWidth };

inline const char* axis_label(SweepAxis a) {
    switch (a) {
    case SweepAxis::PulseEnergy: return "pulse_energy";
    case SweepAxis::SamplingRate: return "sampling_rate";
    case SweepAxis::PulseWidth: return "pulse_width";
    }
    return "?";
}

inline SweepAxis axis_from_label(const std::string& s) {
    if (s == "pulse_energy") return SweepAxis::PulseEnergy;
    if (s == "sampling_rate") return SweepAxis::SamplingRate;
    if (s == "pulse_width") return SweepAxis::PulseWidth;
    throw std::runtime_error("unknown sweep axis: " + s);
}

/// Figure-style default axes: energies in uJ, rates in Msps (first entry is
/// the window-integrated DC point), widths in ns.
inline std::vector<double> default_energy_axis_uj() {
    return {0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0};
}
inline std::vector<double> default_rate_axis_msps(double window_ns) {
    return {1e3 / window_ns, 50.0, 100.0, 200.0, 400.0, 1000.0};
}
inline std::vector<double> default_width_axis_ns() {
    return {1.0, 2.0, 4.0, 6.0, 8.0, 16.0, 32.0};
}

/// The benchmark set of the energy figure: OCIR fingerprinting with one and
/// two detectors at both rates, plus the two three-detector DC baselines.
inline std::vector<MethodSpec> default_energy_methods() {
    return {{Method::OcirAnn, 1, 50.0},  {Method::OcirAnn, 1, 500.0},
            {Method::OcirAnn, 2, 50.0},  {Method::OcirAnn, 2, 500.0},
            {Method::Trilateration, 3, 0.0}, {Method::DcRssAnn, 3, 0.0}};
}

struct SweepPlan {
    SweepAxis axis = SweepAxis::PulseEnergy;
    std::vector<double> values; // empty = axis default
    double pulse_energy_uj = 1.0;
    double pulse_width_ns = 10.0;
    double rate_msps = 500.0;
    double window_ns = 60.0;
    double repetition_rate_hz = 1e5;
    std::uint64_t num_pulses = 1000;
    double bin_width_ns = 0.5;
    double edge_exclusion = 0.5;
    std::vector<MethodSpec> methods; // empty = energy defaults
    std::size_t repeats = 0;         // 0 = profile default
    std::uint64_t seed = 1;
    ExperimentProfile profile = ExperimentProfile::desk();
    std::string output_dir = "sweep-out";

    std::size_t effective_repeats() const { return repeats ? repeats : profile.repeats; }

    void validate() const {
        if (values.empty())
            throw std::invalid_argument("SweepPlan: no axis values");
        double prev = 0.0;
        for (double v : values) {
            if (!(v > 0.0))
                throw std::invalid_argument("SweepPlan: axis values must be positive");
            if (v < prev)
                throw std::invalid_argument("SweepPlan: axis values must be sorted");
            prev = v;
        }
        if (methods.empty())
            throw std::invalid_argument("SweepPlan: no methods");
        if (effective_repeats() < 1)
            throw std::invalid_argument("SweepPlan: repeats must be >= 1");
        for (const auto& m : methods)
            if (m.pd_count < 1 || m.pd_count > 3)
                throw std::invalid_argument("SweepPlan: pd_count must be 1..3");
    }
};

/// One CSV row: a single repeat of a single method at one axis value.
struct SweepRow {
    double axis_value = 0.0;
    std::string method;
    int pd_count = 0;
    double rate_msps = 0.0;
    double pulse_width_ns = 0.0;
    std::size_t repeat = 0; // 1-based
    double rmse_cm = 0.0;
    bool failed = false;
    std::string error; // diagnostic only, not part of the CSV schema
};

struct SweepResult {
    std::vector<SweepRow> rows;
    Json manifest;
    std::uint64_t hash = 0;
};

// ---------------------------------------------------------------------------
// Plan <-> JSON

inline Json plan_to_json(const SweepPlan& plan) {
    Json methods = Json::array();
    for (const auto& m : plan.methods)
        methods.push_back({{"method", method_label(m.method)},
                           {"pd_count", m.pd_count},
                           {"rate_msps", m.rate_msps}});
    return Json{{"schema_version", kConfigSchemaVersion},
                {"axis", axis_label(plan.axis)},
                {"values", plan.values},
                {"pulse_energy_uj", plan.pulse_energy_uj},
                {"pulse_width_ns", plan.pulse_width_ns},
                {"rate_msps", plan.rate_msps},
                {"window_ns", plan.window_ns},
                {"repetition_rate_hz", plan.repetition_rate_hz},
                {"num_pulses", plan.num_pulses},
                {"bin_width_ns", plan.bin_width_ns},
                {"edge_exclusion", plan.edge_exclusion},
                {"methods", methods},
                {"repeats", plan.repeats},
                {"seed", plan.seed},
                {"output_dir", plan.output_dir},
                {"profile",
                 Json{{"name", plan.profile.name},
                      {"room_length", plan.profile.room_length},
                      {"room_width", plan.profile.room_width},
                      {"room_height", plan.profile.room_height},
                      {"ue_height", plan.profile.ue_height},
                      {"patch_area", plan.profile.patch_area},
                      {"reflectivity", plan.profile.reflectivity},
                      {"grid_spacing", plan.profile.grid_spacing},
                      {"noise_psd", plan.profile.noise_psd},
                      {"repeats", plan.profile.repeats},
                      {"train", train_config_to_json(plan.profile.train)}}}};
}

inline ExperimentProfile profile_from_json(const Json& j) {
    ExperimentProfile p = ExperimentProfile::desk();
    p.name = j.value("name", p.name);
    p.room_length = j.value("room_length", p.room_length);
    p.room_width = j.value("room_width", p.room_width);
    p.room_height = j.value("room_height", p.room_height);
    p.ue_height = j.value("ue_height", p.ue_height);
    p.patch_area = j.value("patch_area", p.patch_area);
    p.reflectivity = j.value("reflectivity", p.reflectivity);
    p.grid_spacing = j.value("grid_spacing", p.grid_spacing);
    p.noise_psd = j.value("noise_psd", p.noise_psd);
    p.repeats = j.value("repeats", p.repeats);
    if (j.contains("train"))
        p.train = train_config_from_json(j["train"]);
    return p;
}

inline SweepPlan plan_from_json(const Json& j) {
    if (j.value("schema_version", 0) != kConfigSchemaVersion)
        throw std::runtime_error("sweep plan: unsupported schema_version");
    SweepPlan plan;
    plan.axis = axis_from_label(j.at("axis").get<std::string>());
    plan.values = j.value("values", std::vector<double>{});
    plan.pulse_energy_uj = j.value("pulse_energy_uj", plan.pulse_energy_uj);
    plan.pulse_width_ns = j.value("pulse_width_ns", plan.pulse_width_ns);
    plan.rate_msps = j.value("rate_msps", plan.rate_msps);
    plan.window_ns = j.value("window_ns", plan.window_ns);
    plan.repetition_rate_hz = j.value("repetition_rate_hz", plan.repetition_rate_hz);
    plan.num_pulses = j.value("num_pulses", plan.num_pulses);
    plan.bin_width_ns = j.value("bin_width_ns", plan.bin_width_ns);
    plan.edge_exclusion = j.value("edge_exclusion", plan.edge_exclusion);
    plan.methods.clear();
    if (j.contains("methods"))
        for (const auto& jm : j["methods"])
            plan.methods.push_back({method_from_label(jm.at("method").get<std::string>()),
                                    jm.value("pd_count", 2), jm.value("rate_msps", 0.0)});
    plan.repeats = j.value("repeats", plan.repeats);
    plan.seed = j.value("seed", plan.seed);
    plan.output_dir = j.value("output_dir", plan.output_dir);
    if (j.contains("profile"))
        plan.profile = profile_from_json(j["profile"]);
    return plan;
}

// ---------------------------------------------------------------------------
// Sweep execution

namespace detail {

/// Geometry cache: per detector-count scene, patch tables, grid, profiles.
struct LayoutCache {
    RoomScene scene;
    std::vector<PatchTable> tables;
    std::vector<Position> grid;
    std::vector<std::vector<OcirProfile>> profiles;
};

inline const LayoutCache& ensure_layout(std::map<int, LayoutCache>& cache,
                                        const ExperimentProfile& profile, int pd_count,
                                        double bin_width, double window) {
    auto it = cache.find(pd_count);
    if (it != cache.end())
        return it->second;
    LayoutCache lc;
    lc.scene = profile.make_scene(pd_count);
    for (const auto& pd : lc.scene.pds)
        lc.tables.push_back(build_patch_table(lc.scene, pd));
    GridSpec grid;
    grid.spacing = profile.grid_spacing;
    lc.grid = generate_grid(lc.scene, grid);
    lc.profiles = trace_profiles(lc.scene, lc.tables, lc.grid, bin_width, window);
    return cache.emplace(pd_count, std::move(lc)).first->second;
}

struct PointJob {
    PulseSpec pulse;
    SamplerSpec sampler;
    bool dc_mode = false;     // features are window integrals
    double report_rate = 0.0; // f_s column value, Msps
};

inline PointJob derive_point(const SweepPlan& plan, const MethodSpec& ms, double axis_value) {
    PointJob job;
    job.pulse.repetition_rate = plan.repetition_rate_hz;
    job.pulse.num_pulses = plan.num_pulses;
    job.pulse.energy = plan.pulse_energy_uj * 1e-6;
    job.pulse.width = plan.pulse_width_ns * 1e-9;
    double rate = (ms.rate_msps > 0.0 ? ms.rate_msps : plan.rate_msps) * 1e6;
    switch (plan.axis) {
    case SweepAxis::PulseEnergy:
        job.pulse.energy = axis_value * 1e-6;
        break;
    case SweepAxis::SamplingRate:
        rate = axis_value * 1e6;
        break;
    case SweepAxis::PulseWidth:
        job.pulse.width = axis_value * 1e-9;
        break;
    }
    const double window = plan.window_ns * 1e-9;
    if (ms.method != Method::OcirAnn) {
        // DC methods integrate the window; the underlying sampling uses the
        // plan's default rate, which does not change the DC statistics.
        job.dc_mode = true;
        rate = plan.rate_msps * 1e6;
        job.report_rate = 1.0 / window / 1e6;
        job.sampler = make_sampler(rate, window);
        return job;
    }
    job.sampler = make_sampler(rate, window);
    if (job.sampler.num_samples == 1) {
        // a one-sample window is the DC point of the rate axis
        job.dc_mode = true;
        job.sampler = make_sampler(plan.rate_msps * 1e6, window);
        job.report_rate = 1.0 / window / 1e6;
    } else {
        job.report_rate = rate / 1e6;
    }
    job.pulse.validate();
    return job;
}

} // namespace detail

/// Run the configured sweep: every (axis value, method, repeat) combination
/// produces one row; failures are recorded per point and the sweep continues.
inline SweepResult run_sweep(const SweepPlan& plan_in) {
    SweepPlan plan = plan_in;
    if (plan.values.empty()) {
        switch (plan.axis) {
        case SweepAxis::PulseEnergy: plan.values = default_energy_axis_uj(); break;
        case SweepAxis::SamplingRate: plan.values = default_rate_axis_msps(plan.window_ns); break;
        case SweepAxis::PulseWidth: plan.values = default_width_axis_ns(); break;
        }
    }
    if (plan.methods.empty())
        plan.methods = default_energy_methods();
    plan.validate();

    const double window = plan.window_ns * 1e-9;
    const double bin_width = plan.bin_width_ns * 1e-9;
    const std::size_t repeats = plan.effective_repeats();

    std::map<int, detail::LayoutCache> layouts;
    SweepResult result;

    for (std::size_t ai = 0; ai < plan.values.size(); ++ai) {
        const double axis_value = plan.values[ai];
        // record cache shared between methods that see the same physics
        std::map<std::string, std::vector<FingerprintRecord>> record_cache;

        for (std::size_t mi = 0; mi < plan.methods.size(); ++mi) {
            const auto& ms = plan.methods[mi];
            std::vector<SweepRow> method_rows(repeats);
            auto fill_failure = [&](double report_rate, const std::string& why) {
                for (std::size_t r = 0; r < repeats; ++r)
                    method_rows[r] = {axis_value,
                                      method_label(ms.method),
                                      ms.pd_count,
                                      report_rate,
                                      plan.pulse_width_ns,
                                      r + 1,
                                      std::numeric_limits<double>::quiet_NaN(),
                                      true,
                                      why};
            };
            try {
                const auto job = detail::derive_point(plan, ms, axis_value);
                const auto& layout = detail::ensure_layout(layouts, plan.profile, ms.pd_count,
                                                           bin_width, window);
                const std::string record_key =
                    std::string(job.dc_mode ? "dc" : "ocir") + ":" +
                    std::to_string(ms.pd_count) + ":" + fmt_double(job.sampler.rate) + ":" +
                    fmt_double(job.pulse.energy) + ":" + fmt_double(job.pulse.width);
                auto rec_it = record_cache.find(record_key);
                if (rec_it == record_cache.end()) {
                    NoiseSpec noise;
                    noise.psd = plan.profile.noise_psd;
                    noise.seed = mix_key({plan.seed, 0x4015eull, ai, fnv1a64(record_key)});
                    auto records =
                        job.dc_mode
                            ? dc_feature_records(layout.scene, layout.profiles, layout.grid,
                                                 job.pulse, job.sampler, noise)
                            : fingerprints_from_profiles(layout.scene, layout.profiles,
                                                         layout.grid, job.pulse, job.sampler,
                                                         noise);
                    rec_it = record_cache.emplace(record_key, std::move(records)).first;
                }
                const auto& records = rec_it->second;
                const std::uint64_t split_seed =
                    mix_key({plan.seed, 0x5b117ull, ai, fnv1a64(record_key)});

                const double width_ns =
                    plan.axis == SweepAxis::PulseWidth ? axis_value : plan.pulse_width_ns;

                if (ms.method == Method::Trilateration) {
                    auto ds = split(records, split_seed);
                    UeSpec ue;
                    auto cfg = make_trilateration_config(layout.scene, ue, job.pulse, window,
                                                         plan.edge_exclusion);
                    const double rmse = trilateration_rmse(cfg, ds.test, layout.scene.length,
                                                           layout.scene.width);
                    for (std::size_t r = 0; r < repeats; ++r)
                        method_rows[r] = {axis_value,   method_label(ms.method),
                                          ms.pd_count,  job.report_rate,
                                          width_ns,     r + 1,
                                          rmse,         false,
                                          {}};
                } else {
                    const auto ds = standardize(split(records, split_seed));
                    parallel_for(repeats, [&](std::size_t r) {
                        TrainConfig cfg = plan.profile.train;
                        cfg.seed = mix_key({plan.seed, 0x7ca1ull, ai, fnv1a64(record_key), r});
                        double rmse = std::numeric_limits<double>::quiet_NaN();
                        bool failed = false;
                        std::string why;
                        try {
                            const auto trained = train(ds, cfg);
                            rmse = evaluate_rmse(trained.model, ds.test);
                        } catch (const std::exception& e) {
                            failed = true;
                            why = e.what();
                        }
                        method_rows[r] = {axis_value,   method_label(ms.method),
                                          ms.pd_count,  job.report_rate,
                                          width_ns,     r + 1,
                                          rmse,         failed,
                                          std::move(why)};
                    });
                }
            } catch (const std::exception& e) {
                const double fallback_rate =
                    ms.rate_msps > 0.0 ? ms.rate_msps
                                       : (plan.axis == SweepAxis::SamplingRate ? axis_value
                                                                               : plan.rate_msps);
                fill_failure(fallback_rate, e.what());
            }
            for (auto& row : method_rows)
                result.rows.push_back(std::move(row));
        }
    }

    Json manifest;
    manifest["schema_version"] = kConfigSchemaVersion;
    manifest["kind"] = "sweep";
    manifest["code_version"] = kVersion;
    manifest["config"] = plan_to_json(plan);
    result.hash = config_hash(manifest["config"]);
    manifest["config_hash"] = result.hash;
    result.manifest = manifest;
    return result;
}

inline SweepResult run_energy_sweep(SweepPlan plan) {
    plan.axis = SweepAxis::PulseEnergy;
    return run_sweep(plan);
}
inline SweepResult run_rate_sweep(SweepPlan plan) {
    plan.axis = SweepAxis::SamplingRate;
    if (plan.values.empty())
        plan.values = default_rate_axis_msps(plan.window_ns);
    return run_sweep(plan);
}
inline SweepResult run_width_sweep(SweepPlan plan) {
    plan.axis = SweepAxis::PulseWidth;
    if (plan.values.empty())
        plan.values = default_width_axis_ns();
    return run_sweep(plan);
}

// ---------------------------------------------------------------------------
// Output files

inline void write_sweep_rows_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
    os << "axis_value,method,pd_count,f_s,pulse_width_ns,repeat,rmse_cm\n";
    for (const auto& r : rows) {
        os << fmt_double(r.axis_value) << ',' << r.method << ',' << r.pd_count << ','
           << fmt_double(r.rate_msps) << ',' << fmt_double(r.pulse_width_ns) << ',' << r.repeat
           << ',' << (r.failed ? "nan" : fmt_double(r.rmse_cm)) << '\n';
    }
}

struct SweepSummaryRow {
    double axis_value;
    std::string method;
    int pd_count;
    double rate_msps;
    double pulse_width_ns;
    std::size_t repeats;
    double mean_rmse_cm;
    double std_rmse_cm;
};

inline std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows) {
    std::vector<SweepSummaryRow> out;
    for (const auto& r : rows) {
        if (r.failed)
            continue;
        auto match = [&](const SweepSummaryRow& s) {
            return s.axis_value == r.axis_value && s.method == r.method &&
                   s.pd_count == r.pd_count && s.rate_msps == r.rate_msps &&
                   s.pulse_width_ns == r.pulse_width_ns;
        };
        auto it = std::find_if(out.begin(), out.end(), match);
        if (it == out.end()) {
            out.push_back({r.axis_value, r.method, r.pd_count, r.rate_msps, r.pulse_width_ns, 0,
                           0.0, 0.0});
            it = out.end() - 1;
        }
        // accumulate sum in mean, sum of squares in std; finalized below
        it->mean_rmse_cm += r.rmse_cm;
        it->std_rmse_cm += r.rmse_cm * r.rmse_cm;
        it->repeats += 1;
    }
    for (auto& s : out) {
        const double n = static_cast<double>(s.repeats);
        const double mean = s.mean_rmse_cm / n;
        const double var = std::max(0.0, s.std_rmse_cm / n - mean * mean);
        s.mean_rmse_cm = mean;
        s.std_rmse_cm = std::sqrt(var);
    }
    return out;
}

inline void write_sweep_summary_csv(const std::vector<SweepSummaryRow>& rows, std::ostream& os) {
    os << "axis_value,method,pd_count,f_s,pulse_width_ns,repeats,mean_rmse_cm,std_rmse_cm\n";
    for (const auto& r : rows)
        os << fmt_double(r.axis_value) << ',' << r.method << ',' << r.pd_count << ','
           << fmt_double(r.rate_msps) << ',' << fmt_double(r.pulse_width_ns) << ',' << r.repeats
           << ',' << fmt_double(r.mean_rmse_cm) << ',' << fmt_double(r.std_rmse_cm) << '\n';
}

/// Figure analogue of a sweep: mean RMSE per method variant on log-log axes.
inline std::string render_sweep_svg(const SweepResult& result) {
    const auto summary = summarize(result.rows);
    if (summary.empty())
        throw std::invalid_argument("render_sweep_svg: empty result");
    const std::string axis = result.manifest["config"]["axis"].get<std::string>();

    std::vector<std::string> labels;
    std::vector<PlotSeries> series;
    for (const auto& s : summary) {
        std::string label = s.method + " " + std::to_string(s.pd_count) + " PD";
        if (s.method == "ocir-ann" && axis != "sampling_rate")
            label += " " + fmt_double(s.rate_msps) + " Msps";
        auto it = std::find(labels.begin(), labels.end(), label);
        std::size_t idx;
        if (it == labels.end()) {
            labels.push_back(label);
            series.push_back({label, {}, true});
            idx = series.size() - 1;
        } else {
            idx = static_cast<std::size_t>(it - labels.begin());
        }
        series[idx].points.push_back({s.axis_value, s.mean_rmse_cm});
    }

    PlotOptions opts;
    opts.y_label = "RMSE (cm)";
    if (axis == "pulse_energy")
        opts.x_label = "Optical pulse energy (uJ)";
    else if (axis == "sampling_rate")
        opts.x_label = "Receiver sampling rate (Msps)";
    else
        opts.x_label = "Optical pulse width (ns)";
    return render_line_plot(series, opts);
}

/// Write rows.csv, summary.csv, sweep.svg and manifest.json under dir.
inline void write_sweep_outputs(const SweepResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir + "/rows.csv");
        write_sweep_rows_csv(result.rows, os);
    }
    {
        std::ofstream os(dir + "/summary.csv");
        write_sweep_summary_csv(summarize(result.rows), os);
    }
    {
        std::ofstream os(dir + "/sweep.svg");
        os << render_sweep_svg(result);
    }
    save_json_file(dir + "/manifest.json", result.manifest);
}

inline std::vector<SweepRow> parse_sweep_rows_csv(std::istream& is) {
    std::vector<SweepRow> rows;
    std::string line;
    if (!std::getline(is, line) || line != "axis_value,method,pd_count,f_s,pulse_width_ns,repeat,rmse_cm")
        throw std::runtime_error("parse_sweep_rows_csv: unexpected header");
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i)
            if (i == line.size() || line[i] == ',') {
                fields.push_back(line.substr(start, i - start));
                start = i + 1;
            }
        if (fields.size() != 7)
            throw std::runtime_error("parse_sweep_rows_csv: malformed row");
        SweepRow r;
        r.axis_value = std::stod(fields[0]);
        r.method = fields[1];
        r.pd_count = std::stoi(fields[2]);
        r.rate_msps = std::stod(fields[3]);
        r.pulse_width_ns = std::stod(fields[4]);
        r.repeat = static_cast<std::size_t>(std::stoul(fields[5]));
        r.failed = (fields[6] == "nan");
        r.rmse_cm = r.failed ? std::numeric_limits<double>::quiet_NaN() : std::stod(fields[6]);
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Re-run a recorded manifest; deterministic seeding makes the CSV outputs
/// byte-identical to the original run.
inline SweepResult rerun_manifest(const std::string& manifest_path) {
    const Json manifest = load_json_file(manifest_path);
    if (manifest.value("kind", "") != "sweep")
        throw std::runtime_error("rerun_manifest: not a sweep manifest");
    return run_sweep(plan_from_json(manifest.at("config")));
}

// ---------------------------------------------------------------------------
// Learning curves

struct LearningCurveConfig {
    ExperimentProfile profile = ExperimentProfile::desk();
    double low_energy_uj = 0.01;
    double high_energy_uj = 10.0;
    double pulse_width_ns = 10.0;
    double rate_msps = 500.0;
    double window_ns = 60.0;
    double repetition_rate_hz = 1e5;
    std::uint64_t num_pulses = 1000;
    double bin_width_ns = 0.5;
    std::uint64_t seed = 1;
    std::string output_dir = "learning-curves";
};

struct LearningCurveRun {
    int pd_count = 0;
    double energy_uj = 0.0;
    TrainReport report;
    double test_rmse_cm = 0.0;
};

/// The four-curve study: {1, 2} detectors x {low, high} pulse energy.
inline std::vector<LearningCurveRun> run_learning_curves(const LearningCurveConfig& cfg) {
    const double window = cfg.window_ns * 1e-9;
    const double bin_width = cfg.bin_width_ns * 1e-9;
    std::map<int, detail::LayoutCache> layouts;
    std::vector<LearningCurveRun> runs;
    for (int pd_count : {1, 2}) {
        const auto& layout =
            detail::ensure_layout(layouts, cfg.profile, pd_count, bin_width, window);
        for (double energy_uj : {cfg.low_energy_uj, cfg.high_energy_uj}) {
            PulseSpec pulse;
            pulse.energy = energy_uj * 1e-6;
            pulse.width = cfg.pulse_width_ns * 1e-9;
            pulse.repetition_rate = cfg.repetition_rate_hz;
            pulse.num_pulses = cfg.num_pulses;
            const auto sampler = make_sampler(cfg.rate_msps * 1e6, window);
            NoiseSpec noise;
            noise.psd = cfg.profile.noise_psd;
            noise.seed = mix_key({cfg.seed, 0x1cull, static_cast<std::uint64_t>(pd_count),
                                  fnv1a64(fmt_double(energy_uj))});
            auto records = fingerprints_from_profiles(layout.scene, layout.profiles, layout.grid,
                                                      pulse, sampler, noise);
            const auto ds = standardize(
                split(std::move(records),
                      mix_key({cfg.seed, 0x5eull, static_cast<std::uint64_t>(pd_count)})));
            TrainConfig tc = cfg.profile.train;
            tc.seed = mix_key({cfg.seed, 0x7eull, static_cast<std::uint64_t>(pd_count),
                               fnv1a64(fmt_double(energy_uj))});
            const auto trained = train(ds, tc);
            runs.push_back({pd_count, energy_uj, trained.report,
                            evaluate_rmse(trained.model, ds.test)});
        }
    }
    return runs;
}

inline std::string learning_curve_name(const LearningCurveRun& run) {
    return "curve_" + std::to_string(run.pd_count) + "pd_" + fmt_double(run.energy_uj) + "uJ";
}

/// Per-curve CSVs, a summary CSV with the stopping epochs, and the figure.
inline void write_learning_curve_outputs(const std::vector<LearningCurveRun>& runs,
                                         const std::string& dir) {
    if (runs.empty())
        throw std::invalid_argument("write_learning_curve_outputs: no runs");
    std::filesystem::create_directories(dir);
    for (const auto& run : runs) {
        std::ofstream os(dir + "/" + learning_curve_name(run) + ".csv");
        write_train_report_csv(run.report, os);
    }
    {
        std::ofstream os(dir + "/summary.csv");
        os << "pd_count,energy_uj,stopped_epoch,best_epoch,best_val_rmse_cm,test_rmse_cm\n";
        for (const auto& run : runs)
            os << run.pd_count << ',' << fmt_double(run.energy_uj) << ','
               << run.report.stopped_epoch << ',' << run.report.best_epoch << ','
               << fmt_double(run.report.best_val_rmse_cm) << ',' << fmt_double(run.test_rmse_cm)
               << '\n';
    }
    {
        std::vector<PlotSeries> series;
        for (const auto& run : runs) {
            PlotSeries s;
            s.label = std::to_string(run.pd_count) + " PD, " + fmt_double(run.energy_uj) + " uJ";
            for (std::size_t e = 0; e < run.report.val_rmse_cm.size(); ++e)
                s.points.push_back({static_cast<double>(e + 1), run.report.val_rmse_cm[e]});
            series.push_back(std::move(s));
        }
        PlotOptions opts;
        opts.x_label = "Epoch";
        opts.y_label = "Validation RMSE (cm)";
        std::ofstream os(dir + "/learning_curves.svg");
        os << render_line_plot(series, opts);
    }
}

} // namespace ocirloc
