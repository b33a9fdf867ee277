// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ocirloc/experiments.hpp"

using namespace ocirloc;

namespace {

/// Minutes-scale settings would swamp the unit suite; this profile keeps
/// every sweep mechanism test in the sub-second range.
ExperimentProfile tiny_profile() {
    ExperimentProfile p = ExperimentProfile::desk();
    p.name = "tiny";
    p.room_length = 4.0;
    p.room_width = 4.0;
    p.room_height = 2.5;
    p.patch_area = 1.0;
    p.grid_spacing = 0.5; // 9 x 9 grid
    p.repeats = 2;
    p.train.hidden_units = 8;
    p.train.batch_size = 8;
    p.train.batches_per_epoch = 4;
    p.train.max_epochs = 20;
    p.train.patience = 20;
    return p;
}

SweepPlan tiny_plan() {
    SweepPlan plan;
    plan.axis = SweepAxis::PulseEnergy;
    plan.values = {0.1, 10.0};
    plan.methods = {{Method::OcirAnn, 2, 500.0},
                    {Method::Trilateration, 3, 0.0},
                    {Method::DcRssAnn, 3, 0.0}};
    plan.profile = tiny_profile();
    plan.edge_exclusion = 0.5;
    plan.seed = 42;
    return plan;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("default axes match the figure ticks") {
    REQUIRE(default_energy_axis_uj() ==
            std::vector<double>{0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0});
    REQUIRE(default_width_axis_ns() == std::vector<double>{1, 2, 4, 6, 8, 16, 32});
    const auto rates = default_rate_axis_msps(60.0);
    REQUIRE(rates.front() == Approx(1000.0 / 60.0)); // window-integrated DC point
    REQUIRE(std::vector<double>(rates.begin() + 1, rates.end()) ==
            std::vector<double>{50, 100, 200, 400, 1000});
}

TEST_CASE("default energy methods cover the benchmark set") {
    const auto methods = default_energy_methods();
    auto has = [&](Method m, int pd, double rate) {
        for (const auto& ms : methods)
            if (ms.method == m && ms.pd_count == pd && ms.rate_msps == rate)
                return true;
        return false;
    };
    REQUIRE(has(Method::OcirAnn, 1, 50.0));
    REQUIRE(has(Method::OcirAnn, 1, 500.0));
    REQUIRE(has(Method::OcirAnn, 2, 50.0));
    REQUIRE(has(Method::OcirAnn, 2, 500.0));
    REQUIRE(has(Method::Trilateration, 3, 0.0));
    REQUIRE(has(Method::DcRssAnn, 3, 0.0));
}

TEST_CASE("plan validation rejects malformed plans") {
    SweepPlan plan = tiny_plan();
    plan.values = {1.0, 0.5}; // unsorted
    REQUIRE_THROWS_AS(plan.validate(), std::invalid_argument);
    plan.values = {-1.0};
    REQUIRE_THROWS_AS(plan.validate(), std::invalid_argument);
    plan = tiny_plan();
    plan.methods.clear();
    REQUIRE_THROWS_AS(plan.validate(), std::invalid_argument);
    plan = tiny_plan();
    plan.methods[0].pd_count = 7;
    REQUIRE_THROWS_AS(plan.validate(), std::invalid_argument);
}

TEST_CASE("sweep emits one row per (value, method, repeat) and is deterministic") {
    const auto plan = tiny_plan();
    const auto a = run_sweep(plan);
    REQUIRE(a.rows.size() == 2 * 3 * 2);

    for (const auto& row : a.rows) {
        REQUIRE_FALSE(row.failed);
        REQUIRE(std::isfinite(row.rmse_cm));
        REQUIRE(row.rmse_cm > 0.0);
    }

    const auto b = run_sweep(plan);
    REQUIRE(a.hash == b.hash);
    std::ostringstream csv_a, csv_b;
    write_sweep_rows_csv(a.rows, csv_a);
    write_sweep_rows_csv(b.rows, csv_b);
    REQUIRE(csv_a.str() == csv_b.str());

    // trilateration repeats are degenerate copies; training repeats differ
    double tri0 = 0.0, tri1 = 0.0, ann0 = 0.0, ann1 = 0.0;
    for (const auto& row : a.rows) {
        if (row.method == "trilateration" && row.axis_value == 0.1)
            (row.repeat == 1 ? tri0 : tri1) = row.rmse_cm;
        if (row.method == "ocir-ann" && row.axis_value == 0.1)
            (row.repeat == 1 ? ann0 : ann1) = row.rmse_cm;
    }
    REQUIRE(tri0 == tri1);
    REQUIRE(ann0 != ann1);
}

TEST_CASE("repeat #1 is unchanged when more repeats are requested") {
    auto plan = tiny_plan();
    plan.repeats = 1;
    const auto one = run_sweep(plan);
    plan.repeats = 3;
    const auto three = run_sweep(plan);

    for (const auto& r1 : one.rows) {
        bool found = false;
        for (const auto& r3 : three.rows)
            if (r3.repeat == 1 && r3.method == r1.method && r3.axis_value == r1.axis_value &&
                r3.pd_count == r1.pd_count) {
                REQUIRE(r3.rmse_cm == r1.rmse_cm);
                found = true;
            }
        REQUIRE(found);
    }
}

TEST_CASE("per-point failures are marked and the sweep continues") {
    auto plan = tiny_plan();
    plan.edge_exclusion = 2.1; // empties the trilateration scoring region
    const auto result = run_sweep(plan);
    REQUIRE(result.rows.size() == 2 * 3 * 2);
    std::size_t failed = 0, fine = 0;
    for (const auto& row : result.rows) {
        if (row.method == "trilateration") {
            REQUIRE(row.failed);
            ++failed;
        } else {
            REQUIRE_FALSE(row.failed);
            ++fine;
        }
    }
    REQUIRE(failed == 4);
    REQUIRE(fine == 8);

    std::ostringstream os;
    write_sweep_rows_csv(result.rows, os);
    REQUIRE(os.str().find(",nan") != std::string::npos);
}

TEST_CASE("row csv round-trips through the parser") {
    const auto result = run_sweep(tiny_plan());
    std::ostringstream os;
    write_sweep_rows_csv(result.rows, os);
    std::istringstream is(os.str());
    const auto parsed = parse_sweep_rows_csv(is);
    REQUIRE(parsed.size() == result.rows.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        REQUIRE(parsed[i].method == result.rows[i].method);
        REQUIRE(parsed[i].rmse_cm == result.rows[i].rmse_cm);
        REQUIRE(parsed[i].repeat == result.rows[i].repeat);
    }
}

TEST_CASE("manifest rerun reproduces byte-identical outputs") {
    TempDir dir_a("ocirloc_sweep_a");
    TempDir dir_b("ocirloc_sweep_b");

    auto plan = tiny_plan();
    plan.output_dir = dir_a.path.string();
    const auto first = run_sweep(plan);
    write_sweep_outputs(first, dir_a.path.string());

    const auto again = rerun_manifest((dir_a.path / "manifest.json").string());
    write_sweep_outputs(again, dir_b.path.string());

    for (const char* name : {"rows.csv", "summary.csv", "sweep.svg", "manifest.json"})
        REQUIRE(slurp((dir_a.path / name).string()) == slurp((dir_b.path / name).string()));
}

TEST_CASE("sweep svg holds one polyline per method variant") {
    const auto result = run_sweep(tiny_plan());
    const std::string svg = render_sweep_svg(result);
    std::size_t polylines = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1))
        ++polylines;
    REQUIRE(polylines == 3); // ocir-ann 2 PD, trilateration, dc-rss-ann
    REQUIRE(svg.find("Optical pulse energy") != std::string::npos);
    REQUIRE(svg.find("RMSE (cm)") != std::string::npos);

    SweepResult empty;
    empty.manifest["config"]["axis"] = "pulse_energy";
    REQUIRE_THROWS_AS(render_sweep_svg(empty), std::invalid_argument);
}

TEST_CASE("plot rendering is a pure function of the rows") {
    const auto result = run_sweep(tiny_plan());
    REQUIRE(render_sweep_svg(result) == render_sweep_svg(result));
}

TEST_CASE("rate-axis DC value routes through the dc pipeline") {
    SweepPlan plan = tiny_plan();
    plan.axis = SweepAxis::SamplingRate;
    const double dc_rate = 1e3 / plan.window_ns;
    const MethodSpec ocir{Method::OcirAnn, 2, 0.0};

    const auto dc_job = detail::derive_point(plan, ocir, dc_rate);
    REQUIRE(dc_job.dc_mode);
    REQUIRE(dc_job.report_rate == Approx(dc_rate));
    // underlying sampling falls back to the plan default rate
    REQUIRE(dc_job.sampler.rate == plan.rate_msps * 1e6);

    const auto fast_job = detail::derive_point(plan, ocir, 500.0);
    REQUIRE_FALSE(fast_job.dc_mode);
    REQUIRE(fast_job.sampler.num_samples == 30);

    // dc-mode records coincide with the dc-rss feature builder's output
    plan.values = {dc_rate};
    plan.methods = {{Method::OcirAnn, 3, 0.0}, {Method::DcRssAnn, 3, 0.0}};
    const auto result = run_sweep(plan);
    double ocir_dc = -1.0, dc_ann = -2.0;
    for (const auto& row : result.rows)
        if (row.repeat == 1) {
            if (row.method == "ocir-ann")
                ocir_dc = row.rmse_cm;
            else if (row.method == "dc-rss-ann")
                dc_ann = row.rmse_cm;
        }
    REQUIRE(ocir_dc == dc_ann);
}

TEST_CASE("plan json round-trip preserves the configuration") {
    const auto plan = tiny_plan();
    const auto j = plan_to_json(plan);
    const auto back = plan_from_json(j);
    REQUIRE(plan_to_json(back) == j);
    REQUIRE(config_hash(j) == config_hash(plan_to_json(back)));
    REQUIRE(back.profile.train.hidden_units == 8);
    REQUIRE(back.methods.size() == 3);
}

TEST_CASE("learning curves run all four cases and reproduce") {
    LearningCurveConfig cfg;
    cfg.profile = tiny_profile();
    cfg.seed = 7;
    const auto runs = run_learning_curves(cfg);
    REQUIRE(runs.size() == 4);
    for (const auto& run : runs) {
        REQUIRE((run.pd_count == 1 || run.pd_count == 2));
        REQUIRE(run.report.stopped_epoch > 0);
        double best = 1e300;
        for (double v : run.report.val_rmse_cm)
            best = std::min(best, v);
        REQUIRE(run.report.best_val_rmse_cm == Approx(best));
    }

    const auto again = run_learning_curves(cfg);
    for (std::size_t i = 0; i < runs.size(); ++i)
        REQUIRE(runs[i].report.val_rmse_cm == again[i].report.val_rmse_cm);

    TempDir dir("ocirloc_curves");
    write_learning_curve_outputs(runs, dir.path.string());
    REQUIRE(std::filesystem::exists(dir.path / "summary.csv"));
    REQUIRE(std::filesystem::exists(dir.path / "learning_curves.svg"));
    REQUIRE(std::filesystem::exists(dir.path / "curve_2pd_10uJ.csv"));
}

TEST_CASE("scene json round-trip") {
    RoomScene scene = representative_scene();
    scene.pds = default_pd_layout(scene, 2);
    const auto j = scene_to_json(scene);
    const auto back = scene_from_json(j);
    REQUIRE(scene_digest(back) == scene_digest(scene));
    REQUIRE(back.pds.size() == 2);

    Json bad = j;
    bad["schema_version"] = 99;
    REQUIRE_THROWS_AS(scene_from_json(bad), std::runtime_error);
}
