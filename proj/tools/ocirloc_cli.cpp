// SPDX-License-Identifier: Apache-2.0
//
// ocirloc: indoor optical wireless channel simulation and fingerprint localization
//
// Command-line front end: dataset generation, training, baselines, sweeps,
// learning curves, plotting, and manifest re-runs.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ocirloc/baselines.hpp"
#include "ocirloc/experiments.hpp"

using namespace ocirloc;

namespace {

struct ProfileArgs {
    std::string profile = "desk";
    std::optional<double> grid_spacing;
    std::optional<double> noise_psd;
    std::optional<double> reflectivity;
    std::optional<std::uint64_t> seed;

    ExperimentProfile resolve() const {
        if (profile != "paper" && profile != "desk")
            throw CLI::ValidationError("--profile must be desk or paper");
        ExperimentProfile p =
            profile == "paper" ? ExperimentProfile::paper() : ExperimentProfile::desk();
        if (profile == "paper" && !seed.has_value())
            throw CLI::ValidationError("paper-scale runs require an explicit --seed");
        if (grid_spacing)
            p.grid_spacing = *grid_spacing;
        if (noise_psd)
            p.noise_psd = *noise_psd;
        if (reflectivity)
            p.reflectivity = *reflectivity;
        return p;
    }
};

void add_profile_flags(CLI::App* cmd, ProfileArgs& args) {
    cmd->add_option("--profile", args.profile, "Scale profile: desk or paper")
        ->capture_default_str();
    cmd->add_option("--grid-spacing", args.grid_spacing, "Fingerprint grid spacing (m)");
    cmd->add_option("--noise-psd", args.noise_psd, "Noise PSD (A^2/Hz equivalent)");
    cmd->add_option("--reflectivity", args.reflectivity, "Wall reflectivity");
    cmd->add_option("--seed", args.seed, "Master seed");
}

PulseSpec make_pulse(double energy_uj, double width_ns, double rep_rate, std::uint64_t n_p) {
    PulseSpec pulse;
    pulse.energy = energy_uj * 1e-6;
    pulse.width = width_ns * 1e-9;
    pulse.repetition_rate = rep_rate;
    pulse.num_pulses = n_p;
    pulse.validate();
    return pulse;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Indoor optical wireless fingerprint localization simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // ---- gen-dataset ------------------------------------------------------
    auto* gen = app.add_subcommand("gen-dataset", "Trace a scene and write a fingerprint set");
    ProfileArgs gen_profile;
    add_profile_flags(gen, gen_profile);
    int gen_pds = 2;
    double gen_energy = 1.0, gen_width = 10.0, gen_rate = 500.0, gen_window = 60.0;
    std::string gen_out = "dataset.fp";
    bool gen_dc = false;
    gen->add_option("--pd-count", gen_pds, "Detectors (1-3)")->capture_default_str();
    gen->add_option("--energy-uj", gen_energy, "Pulse energy (uJ)")->capture_default_str();
    gen->add_option("--width-ns", gen_width, "Pulse width FWHM (ns)")->capture_default_str();
    gen->add_option("--rate-msps", gen_rate, "Sampling rate (Msps)")->capture_default_str();
    gen->add_option("--window-ns", gen_window, "Observation window (ns)")->capture_default_str();
    gen->add_flag("--dc", gen_dc, "Store window-integrated DC features instead of samples");
    gen->add_option("-o,--out", gen_out, "Output container path")->capture_default_str();
    gen->callback([&]() {
        const auto profile = gen_profile.resolve();
        const std::uint64_t seed = gen_profile.seed.value_or(1);
        const auto scene = profile.make_scene(gen_pds);
        std::vector<PatchTable> tables;
        for (const auto& pd : scene.pds)
            tables.push_back(build_patch_table(scene, pd));
        GridSpec grid;
        grid.spacing = profile.grid_spacing;
        grid.seed = seed;
        const auto positions = generate_grid(scene, grid);
        const auto pulse = make_pulse(gen_energy, gen_width, 1e5, 1000);
        const auto sampler = make_sampler(gen_rate * 1e6, gen_window * 1e-9);
        NoiseSpec noise;
        noise.psd = profile.noise_psd;
        noise.seed = seed;
        const auto profiles = trace_profiles(scene, tables, positions, 0.5e-9, sampler.window);
        const auto records =
            gen_dc ? dc_feature_records(scene, profiles, positions, pulse, sampler, noise)
                   : fingerprints_from_profiles(scene, profiles, positions, pulse, sampler,
                                                noise);
        DatasetMeta meta;
        meta.detectors = static_cast<std::uint32_t>(scene.pds.size());
        meta.samples_per_detector =
            static_cast<std::uint32_t>(records.front().values.size() / scene.pds.size());
        meta.rate = sampler.rate;
        meta.window = sampler.window;
        meta.grid_spacing = grid.spacing;
        meta.grid_margin = grid.margin;
        meta.room_length = scene.length;
        meta.room_width = scene.width;
        meta.scene_digest = scene_digest(scene);
        meta.noise_seed = noise.seed;
        meta.grid_seed = grid.seed;
        save_dataset(gen_out, meta, records);

        Json manifest;
        manifest["schema_version"] = kConfigSchemaVersion;
        manifest["kind"] = "dataset";
        manifest["code_version"] = kVersion;
        manifest["scene"] = scene_to_json(scene);
        manifest["scene_digest"] = meta.scene_digest;
        manifest["grid"] = {{"spacing", grid.spacing}, {"margin", grid.margin}, {"seed", grid.seed}};
        manifest["pulse"] = {{"energy_uj", gen_energy},
                             {"width_ns", gen_width},
                             {"repetition_rate_hz", 1e5},
                             {"num_pulses", 1000}};
        manifest["sampler"] = {{"rate_msps", gen_rate}, {"window_ns", gen_window}};
        manifest["noise"] = {{"psd", noise.psd}, {"seed", noise.seed}};
        manifest["dc_features"] = gen_dc;
        manifest["records"] = records.size();
        manifest["config_hash"] = config_hash(manifest);
        save_json_file(gen_out + ".manifest.json", manifest);
        std::printf("wrote %zu records (%u x %u) to %s\n", records.size(), meta.detectors,
                    meta.samples_per_detector, gen_out.c_str());
    });

    // ---- export-ocir ------------------------------------------------------
    auto* exp = app.add_subcommand("export-ocir", "Trace one impulse response to CSV");
    ProfileArgs exp_profile;
    add_profile_flags(exp, exp_profile);
    std::string exp_scene_path;
    int exp_pds = 2, exp_pd_index = 0;
    double exp_x = 1.0, exp_y = 1.0, exp_bin = 0.5, exp_window = 60.0;
    std::string exp_out = "profile.csv";
    exp->add_option("--scene", exp_scene_path, "Scene config JSON (overrides --profile)");
    exp->add_option("--pd-count", exp_pds, "Detectors when using --profile")
        ->capture_default_str();
    exp->add_option("--pd", exp_pd_index, "Detector index")->capture_default_str();
    exp->add_option("--x", exp_x, "Transmitter x (m)")->capture_default_str();
    exp->add_option("--y", exp_y, "Transmitter y (m)")->capture_default_str();
    exp->add_option("--bin-ns", exp_bin, "Bin width (ns)")->capture_default_str();
    exp->add_option("--window-ns", exp_window, "Window (ns)")->capture_default_str();
    exp->add_option("-o,--out", exp_out, "Output CSV path")->capture_default_str();
    exp->callback([&]() {
        RoomScene scene = exp_scene_path.empty()
                              ? exp_profile.resolve().make_scene(exp_pds)
                              : scene_from_json(load_json_file(exp_scene_path));
        if (exp_pd_index < 0 || static_cast<std::size_t>(exp_pd_index) >= scene.pds.size())
            throw CLI::ValidationError("--pd out of range");
        UeSpec ue;
        ue.position = {exp_x, exp_y};
        const auto& pd = scene.pds[static_cast<std::size_t>(exp_pd_index)];
        const auto table = build_patch_table(scene, pd);
        const auto profile = ocir(scene, ue, pd, table, exp_bin * 1e-9, exp_window * 1e-9);
        std::ofstream os(exp_out);
        if (!os)
            throw std::runtime_error("cannot write " + exp_out);
        write_profile_csv(profile, os);
        std::printf("wrote %zu bins to %s (H0 = %s)\n", profile.bins.size(), exp_out.c_str(),
                    fmt_double(profile.total_gain()).c_str());
    });

    // ---- train ------------------------------------------------------------
    auto* tr = app.add_subcommand("train", "Train the regressor on a fingerprint set");
    std::string tr_data = "dataset.fp", tr_model = "model.mlp", tr_report;
    TrainConfig tr_cfg;
    tr_cfg.hidden_units = 100;
    tr_cfg.batches_per_epoch = 60;
    tr_cfg.max_epochs = 5000;
    std::uint64_t tr_split_seed = 1;
    tr->add_option("--data", tr_data, "Fingerprint container")->capture_default_str();
    tr->add_option("-o,--out", tr_model, "Model checkpoint path")->capture_default_str();
    tr->add_option("--report", tr_report, "Epoch curve CSV path");
    tr->add_option("--hidden", tr_cfg.hidden_units, "Hidden units")->capture_default_str();
    tr->add_option("--batch", tr_cfg.batch_size, "Mini-batch size")->capture_default_str();
    tr->add_option("--batches-per-epoch", tr_cfg.batches_per_epoch, "Batches per epoch")
        ->capture_default_str();
    tr->add_option("--max-epochs", tr_cfg.max_epochs, "Epoch budget")->capture_default_str();
    tr->add_option("--patience", tr_cfg.patience, "Early-stopping patience")
        ->capture_default_str();
    tr->add_option("--l1", tr_cfg.l1, "L1 coefficient")->capture_default_str();
    tr->add_option("--lr", tr_cfg.learning_rate, "Learning rate")->capture_default_str();
    tr->add_option("--seed", tr_cfg.seed, "Training seed")->capture_default_str();
    tr->add_option("--split-seed", tr_split_seed, "Dataset split seed")->capture_default_str();
    tr->callback([&]() {
        const auto [meta, records] = load_dataset(tr_data);
        auto ds = standardize(split(records, tr_split_seed));
        const auto result = train(ds, tr_cfg);
        save_model(tr_model, result.model, ds.standardizer);
        if (!tr_report.empty()) {
            std::ofstream os(tr_report);
            write_train_report_csv(result.report, os);
        }
        std::printf("stopped at epoch %zu (best %zu), val %.3f cm, test %.3f cm -> %s\n",
                    result.report.stopped_epoch, result.report.best_epoch,
                    result.report.best_val_rmse_cm, evaluate_rmse(result.model, ds.test),
                    tr_model.c_str());
    });

    // ---- eval -------------------------------------------------------------
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a fingerprint set");
    std::string ev_model = "model.mlp", ev_data = "dataset.fp";
    ev->add_option("--model", ev_model, "Checkpoint path")->capture_default_str();
    ev->add_option("--data", ev_data, "Fingerprint container")->capture_default_str();
    ev->callback([&]() {
        const auto [model, standardizer] = load_model(ev_model);
        auto [meta, records] = load_dataset(ev_data);
        for (auto& rec : records)
            for (double& v : rec.values)
                v = standardizer.apply(v);
        std::printf("rmse over %zu records: %.4f cm\n", records.size(),
                    evaluate_rmse(model, records));
    });

    // ---- baseline-tri -----------------------------------------------------
    auto* tri = app.add_subcommand("baseline-tri", "Linear trilateration baseline RMSE");
    ProfileArgs tri_profile;
    add_profile_flags(tri, tri_profile);
    double tri_energy = 1.0, tri_width = 10.0, tri_window = 60.0, tri_edge = 0.5;
    tri->add_option("--energy-uj", tri_energy, "Pulse energy (uJ)")->capture_default_str();
    tri->add_option("--width-ns", tri_width, "Pulse width (ns)")->capture_default_str();
    tri->add_option("--window-ns", tri_window, "Window (ns)")->capture_default_str();
    tri->add_option("--edge-exclusion", tri_edge, "Wall margin excluded from scoring (m)")
        ->capture_default_str();
    tri->callback([&]() {
        const auto profile = tri_profile.resolve();
        const std::uint64_t seed = tri_profile.seed.value_or(1);
        const auto scene = profile.make_scene(3);
        std::vector<PatchTable> tables;
        for (const auto& pd : scene.pds)
            tables.push_back(build_patch_table(scene, pd));
        GridSpec grid;
        grid.spacing = profile.grid_spacing;
        const auto positions = generate_grid(scene, grid);
        const auto pulse = make_pulse(tri_energy, tri_width, 1e5, 1000);
        const auto sampler = make_sampler(500e6, tri_window * 1e-9);
        NoiseSpec noise;
        noise.psd = profile.noise_psd;
        noise.seed = seed;
        const auto profiles = trace_profiles(scene, tables, positions, 0.5e-9, sampler.window);
        const auto records =
            dc_feature_records(scene, profiles, positions, pulse, sampler, noise);
        UeSpec ue;
        const auto cfg =
            make_trilateration_config(scene, ue, pulse, sampler.window, tri_edge);
        std::printf("trilateration rmse: %.3f cm\n",
                    trilateration_rmse(cfg, records, scene.length, scene.width));
    });

    // ---- sweep ------------------------------------------------------------
    auto* sw = app.add_subcommand("sweep", "Run a parameter sweep");
    std::string sw_config, sw_axis = "pulse_energy", sw_out;
    ProfileArgs sw_profile;
    add_profile_flags(sw, sw_profile);
    std::vector<double> sw_values;
    std::optional<std::size_t> sw_repeats;
    sw->add_option("--config", sw_config, "Sweep plan JSON (flags override)");
    sw->add_option("--axis", sw_axis, "pulse_energy | sampling_rate | pulse_width")
        ->capture_default_str();
    sw->add_option("--values", sw_values, "Axis values (plot units)");
    sw->add_option("--repeats", sw_repeats, "Training repeats per point");
    sw->add_option("-o,--out", sw_out, "Output directory");
    sw->callback([&]() {
        SweepPlan plan;
        if (!sw_config.empty())
            plan = plan_from_json(load_json_file(sw_config));
        else
            plan.profile = sw_profile.resolve();
        if (sw_config.empty() || sw->count("--axis"))
            plan.axis = axis_from_label(sw_axis);
        if (!sw_values.empty())
            plan.values = sw_values;
        if (sw_repeats)
            plan.repeats = *sw_repeats;
        if (sw_profile.seed)
            plan.seed = *sw_profile.seed;
        if (!sw_out.empty())
            plan.output_dir = sw_out;
        const auto result = run_sweep(plan);
        write_sweep_outputs(result, plan.output_dir);
        std::size_t failures = 0;
        for (const auto& row : result.rows)
            failures += row.failed;
        std::printf("sweep done: %zu rows (%zu failed) -> %s\n", result.rows.size(), failures,
                    plan.output_dir.c_str());
    });

    // ---- learning-curve ---------------------------------------------------
    auto* lc = app.add_subcommand("learning-curve", "Four-curve learning study");
    ProfileArgs lc_profile;
    add_profile_flags(lc, lc_profile);
    std::string lc_out = "learning-curves";
    LearningCurveConfig lc_cfg;
    lc->add_option("--low-uj", lc_cfg.low_energy_uj, "Low pulse energy (uJ)")
        ->capture_default_str();
    lc->add_option("--high-uj", lc_cfg.high_energy_uj, "High pulse energy (uJ)")
        ->capture_default_str();
    lc->add_option("-o,--out", lc_out, "Output directory")->capture_default_str();
    lc->callback([&]() {
        lc_cfg.profile = lc_profile.resolve();
        lc_cfg.seed = lc_profile.seed.value_or(1);
        lc_cfg.output_dir = lc_out;
        const auto runs = run_learning_curves(lc_cfg);
        write_learning_curve_outputs(runs, lc_out);
        for (const auto& run : runs)
            std::printf("%d PD, %g uJ: stopped %zu, best val %.3f cm, test %.3f cm\n",
                        run.pd_count, run.energy_uj, run.report.stopped_epoch,
                        run.report.best_val_rmse_cm, run.test_rmse_cm);
    });

    // ---- plot -------------------------------------------------------------
    auto* pl = app.add_subcommand("plot", "Re-render the figure for a finished sweep");
    std::string pl_dir = "sweep-out";
    pl->add_option("--dir", pl_dir, "Sweep output directory")->capture_default_str();
    pl->callback([&]() {
        SweepResult result;
        result.manifest = load_json_file(pl_dir + "/manifest.json");
        std::ifstream rows(pl_dir + "/rows.csv");
        if (!rows)
            throw std::runtime_error("missing rows.csv in " + pl_dir);
        result.rows = parse_sweep_rows_csv(rows);
        std::ofstream os(pl_dir + "/sweep.svg");
        os << render_sweep_svg(result);
        std::printf("rendered %s/sweep.svg\n", pl_dir.c_str());
    });

    // ---- rerun ------------------------------------------------------------
    auto* rr = app.add_subcommand("rerun", "Reproduce a sweep from its manifest");
    std::string rr_manifest = "sweep-out/manifest.json", rr_out;
    rr->add_option("--manifest", rr_manifest, "Manifest path")->capture_default_str();
    rr->add_option("-o,--out", rr_out, "Output directory (default: manifest's)");
    rr->callback([&]() {
        const auto result = rerun_manifest(rr_manifest);
        const std::string dir =
            rr_out.empty() ? result.manifest["config"]["output_dir"].get<std::string>() : rr_out;
        write_sweep_outputs(result, dir);
        std::printf("reproduced sweep into %s\n", dir.c_str());
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
