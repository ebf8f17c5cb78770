// coro4d - command line front end.
//
// Subcommands: segment (label + partition a centerline), align (estimate the
// deformation field between two centerlines), synth4d (full pipeline to timed
// frames), gen (synthetic paired data), drop (branch dropout), eval (cloud
// metrics), icp (rigid baseline).

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coro4d/centerline.hpp"
#include "coro4d/io.hpp"
#include "coro4d/metrics.hpp"
#include "coro4d/pipeline.hpp"
#include "coro4d/soft_dtw.hpp"
#include "coro4d/sort_align.hpp"
#include "coro4d/synthetic.hpp"
#include "coro4d/vessel_transfer.hpp"

namespace {

using namespace coro4d;

// Cube parameters from explicit flags where given, spacing-scaled otherwise.
CubeParams resolve_cube(const CLI::Option* edge_opt, double edge, const CLI::Option* eps_opt,
                        double eps, std::span<const Point3> points) {
    if (edge_opt->count() == 0 && eps_opt->count() == 0) {
        return cube_params_from_spacing(points);
    }
    CubeParams params;
    params.edge = edge_opt->count() > 0 ? edge : cube_params_from_spacing(points).edge;
    params.epsilon = eps_opt->count() > 0 ? eps : 0.375 * params.edge;
    params.validate();
    return params;
}

nlohmann::json report_json(const MetricReport& r) {
    nlohmann::json j;
    j["cd_forward"] = r.cd_forward;
    j["cd_backward"] = r.cd_backward;
    j["cd_raw"] = r.cd_raw;
    j["cd_scaled"] = r.cd_scaled;
    j["hd_forward"] = r.hd_forward;
    j["hd_backward"] = r.hd_backward;
    j["hd_raw"] = r.hd_raw;
    j["hd_scaled"] = r.hd_scaled;
    return j;
}

struct GenOptions {
    std::string out_dir;
    std::string preset = "bend";
    double amplitude = 0.04;
    std::size_t samples = 200;
    std::uint64_t seed = 1;
    double tube_radius = 0.0;
    int tube_rings = 8;
    double truth_phase = -1.0;
};

int run_gen(const GenOptions& opt) {
    BezierSpec spec;
    spec.control_points = {Point3{0.0, 0.0, 0.0}, Point3{0.35, 0.15, 0.05},
                           Point3{0.7, -0.1, 0.1}, Point3{1.0, 0.0, 0.0}};
    spec.samples = opt.samples;

    DeformRecipe recipe;
    if (opt.preset == "translate") {
        recipe.push_back(TranslateRecipe{Vec3{opt.amplitude, 0.5 * opt.amplitude,
                                              0.25 * opt.amplitude}});
    } else if (opt.preset == "scale") {
        recipe.push_back(ScaleRecipe{1.0 + opt.amplitude});
    } else if (opt.preset == "bend") {
        // Quadratic offset curve peaking at amplitude/2 over the midpoint.
        recipe.push_back(BendRecipe{{Point3{0.0, 0.0, 0.0}, Point3{0.0, opt.amplitude, 0.0},
                                     Point3{0.0, 0.0, 0.0}}});
    } else {
        throw std::invalid_argument("unknown preset '" + opt.preset +
                                    "' (expected translate, scale, or bend)");
    }

    TubeSpec tube;
    if (opt.tube_radius > 0.0) {
        tube.radius = opt.tube_radius;
        tube.ring_count = opt.tube_rings;
    }
    const SyntheticPair pair = make_pair(spec, recipe, opt.seed, tube);

    std::filesystem::create_directories(opt.out_dir);
    const std::filesystem::path dir(opt.out_dir);
    auto emit = [&](const char* name, const PointCloud& cloud) {
        const std::string path = (dir / name).string();
        write_cloud_csv(path, cloud);
        std::cout << "wrote " << path << "\n";
    };
    emit("systole_centerline.csv", pair.systole.points);
    emit("diastole_centerline.csv", pair.diastole.points);
    const PointCloud& systole_cloud =
        pair.systole_tube.empty() ? pair.systole.points : pair.systole_tube;
    const PointCloud& diastole_cloud =
        pair.diastole_tube.empty() ? pair.diastole.points : pair.diastole_tube;
    emit("systole_cloud.csv", systole_cloud);
    emit("diastole_cloud.csv", diastole_cloud);

    std::vector<FieldedPolyline> truth{{pair.systole.points, pair.truth_field.vectors}};
    const std::string field_path = (dir / "truth_field.csv").string();
    write_field_csv(field_path, truth);
    std::cout << "wrote " << field_path << "\n";

    if (opt.truth_phase >= 0.0) {
        PointCloud truth_cloud;
        truth_cloud.reserve(systole_cloud.size());
        for (std::size_t i = 0; i < systole_cloud.size(); ++i) {
            truth_cloud.push_back(systole_cloud[i] +
                                  opt.truth_phase * (diastole_cloud[i] - systole_cloud[i]));
        }
        const std::string name = "truth_cloud_" + phase_token(opt.truth_phase) + ".csv";
        emit(name.c_str(), truth_cloud);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"4D coronary tree synthesis from two cardiac phase point clouds"};
    app.require_subcommand(1);

    // --- segment ---------------------------------------------------------
    auto* cmd_segment = app.add_subcommand("segment", "label and partition a centerline");
    std::string seg_input, seg_output;
    double seg_edge = 0.0, seg_eps = 0.0;
    cmd_segment->add_option("--input", seg_input, "centerline CSV or PLY")->required();
    cmd_segment->add_option("--output", seg_output, "labeled centerline CSV")->required();
    auto* seg_edge_opt = cmd_segment->add_option("--cube-edge", seg_edge, "cube edge length");
    auto* seg_eps_opt = cmd_segment->add_option("--cube-epsilon", seg_eps, "face threshold");

    // --- align -----------------------------------------------------------
    auto* cmd_align = app.add_subcommand("align", "estimate the systole->diastole field");
    std::string al_systole, al_diastole, al_output, al_method = "sort";
    double al_edge = 0.0, al_eps = 0.0;
    SoftDtwParams al_dtw;
    cmd_align->add_option("--systole", al_systole, "systolic centerline")->required();
    cmd_align->add_option("--diastole", al_diastole, "diastolic centerline")->required();
    cmd_align->add_option("--output", al_output, "field CSV")->required();
    cmd_align->add_option("--method", al_method, "sort | softdtw");
    auto* al_edge_opt = cmd_align->add_option("--cube-edge", al_edge, "cube edge length");
    auto* al_eps_opt = cmd_align->add_option("--cube-epsilon", al_eps, "face threshold");
    cmd_align->add_option("--gamma", al_dtw.gamma, "soft-dtw smoothing");
    cmd_align->add_option("--step-size", al_dtw.step_size, "gradient step");
    cmd_align->add_option("--iterations", al_dtw.iterations, "gradient steps");
    cmd_align->add_option("--smoothness", al_dtw.smoothness_weight, "field smoothness weight");
    cmd_align->add_option("--momentum", al_dtw.momentum, "momentum coefficient");

    // --- synth4d ---------------------------------------------------------
    auto* cmd_synth = app.add_subcommand("synth4d", "run the full pipeline to timed frames");
    std::string sy_config;
    RunConfig sy;
    std::string sy_method = "sort";
    double sy_edge = 0.0, sy_eps = 0.0;
    cmd_synth->add_option("--config", sy_config, "JSON config (or a previous manifest)");
    auto* o_sys_cloud = cmd_synth->add_option("--systole-cloud", sy.systole_cloud, "");
    auto* o_dia_cloud = cmd_synth->add_option("--diastole-cloud", sy.diastole_cloud, "");
    auto* o_sys_line = cmd_synth->add_option("--systole-centerline", sy.systole_centerline, "");
    auto* o_dia_line = cmd_synth->add_option("--diastole-centerline", sy.diastole_centerline, "");
    auto* o_truth = cmd_synth->add_option("--truth-cloud", sy.truth_cloud, "");
    auto* o_truth_phase = cmd_synth->add_option("--truth-phase", sy.truth_phase, "");
    auto* o_field = cmd_synth->add_option("--field", sy.field_file, "precomputed field CSV");
    auto* o_method = cmd_synth->add_option("--method", sy_method, "sort | softdtw");
    auto* o_global = cmd_synth->add_flag("--dtw-global", sy.dtw_global,
                                         "one soft-dtw over all pairs chained");
    auto* o_phases = cmd_synth->add_option("--phases", sy.phases, "phases in [0,1]");
    auto* o_norm = cmd_synth->add_flag("--normalize", sy.normalize, "unit-cube normalization");
    auto* o_seed = cmd_synth->add_option("--seed", sy.seed, "");
    auto* o_out = cmd_synth->add_option("--out-dir", sy.out_dir, "output directory");
    auto* o_edge = cmd_synth->add_option("--cube-edge", sy_edge, "");
    auto* o_eps = cmd_synth->add_option("--cube-epsilon", sy_eps, "");
    auto* o_cu_len = cmd_synth->add_option("--cuboid-length", sy.cuboid.length, "");
    auto* o_cu_wid = cmd_synth->add_option("--cuboid-width", sy.cuboid.width, "");
    auto* o_gamma = cmd_synth->add_option("--gamma", sy.softdtw.gamma, "");
    auto* o_step = cmd_synth->add_option("--step-size", sy.softdtw.step_size, "");
    auto* o_iters = cmd_synth->add_option("--iterations", sy.softdtw.iterations, "");
    auto* o_smooth = cmd_synth->add_option("--smoothness", sy.softdtw.smoothness_weight, "");
    auto* o_mom = cmd_synth->add_option("--momentum", sy.softdtw.momentum, "");

    // --- gen -------------------------------------------------------------
    auto* cmd_gen = app.add_subcommand("gen", "generate a synthetic systole/diastole pair");
    GenOptions gen;
    cmd_gen->add_option("--out-dir", gen.out_dir, "output directory")->required();
    cmd_gen->add_option("--preset", gen.preset, "translate | scale | bend");
    cmd_gen->add_option("--amplitude", gen.amplitude, "deformation amplitude");
    cmd_gen->add_option("--samples", gen.samples, "centerline sample count");
    cmd_gen->add_option("--seed", gen.seed, "");
    cmd_gen->add_option("--tube-radius", gen.tube_radius, "vessel tube radius (0 = none)");
    cmd_gen->add_option("--tube-rings", gen.tube_rings, "points per tube ring");
    cmd_gen->add_option("--truth-phase", gen.truth_phase, "also emit the exact frame here");

    // --- drop ------------------------------------------------------------
    auto* cmd_drop = app.add_subcommand("drop", "remove whole segments up to a proportion");
    std::string dr_input, dr_output;
    double dr_proportion = 0.0, dr_edge = 0.0, dr_eps = 0.0;
    std::uint64_t dr_seed = 1;
    cmd_drop->add_option("--input", dr_input, "centerline CSV or PLY")->required();
    cmd_drop->add_option("--output", dr_output, "pruned labeled CSV")->required();
    cmd_drop->add_option("--proportion", dr_proportion, "target removed fraction in [0,1)")
        ->required();
    cmd_drop->add_option("--seed", dr_seed, "");
    auto* dr_edge_opt = cmd_drop->add_option("--cube-edge", dr_edge, "cube edge length");
    auto* dr_eps_opt = cmd_drop->add_option("--cube-epsilon", dr_eps, "face threshold");

    // --- eval ------------------------------------------------------------
    auto* cmd_eval = app.add_subcommand("eval", "chamfer/hausdorff between two clouds");
    std::string ev_a, ev_b;
    bool ev_json = false;
    cmd_eval->add_option("--a", ev_a, "first cloud")->required();
    cmd_eval->add_option("--b", ev_b, "second cloud")->required();
    cmd_eval->add_flag("--json", ev_json, "emit JSON instead of text");

    // --- icp -------------------------------------------------------------
    auto* cmd_icp = app.add_subcommand("icp", "rigid ICP baseline");
    std::string icp_source, icp_target, icp_out;
    std::size_t icp_iters = 50;
    double icp_tol = 1e-10;
    cmd_icp->add_option("--source", icp_source, "cloud to move")->required();
    cmd_icp->add_option("--target", icp_target, "cloud to match")->required();
    cmd_icp->add_option("--out", icp_out, "write the aligned source here");
    cmd_icp->add_option("--max-iters", icp_iters, "");
    cmd_icp->add_option("--tol", icp_tol, "MSE improvement stop threshold");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (cmd_segment->parsed()) {
            const Centerline input = read_centerline(seg_input);
            const CubeParams params =
                resolve_cube(seg_edge_opt, seg_edge, seg_eps_opt, seg_eps, input.points);
            const SegmentationResult result = segment_centerline(input, params);
            write_centerline_csv(seg_output, result.centerline);
            std::cout << "segments: " << result.segment_count << "\n"
                      << "isolated: " << result.isolated_points.size() << "\n"
                      << "wrote " << seg_output << "\n";
            return 0;
        }

        if (cmd_align->parsed()) {
            const FieldMethod method = field_method_from_string(al_method);
            const Centerline systole = read_centerline(al_systole);
            const Centerline diastole = read_centerline(al_diastole);
            const SegmentationResult seg_sys = segment_centerline(
                systole, resolve_cube(al_edge_opt, al_edge, al_eps_opt, al_eps, systole.points));
            const SegmentationResult seg_dia = segment_centerline(
                diastole, resolve_cube(al_edge_opt, al_edge, al_eps_opt, al_eps, diastole.points));
            const PairingResult pairing = pair_segments(seg_sys.centerline, seg_dia.centerline);

            std::vector<FieldedPolyline> fielded;
            double loss = 0.0;
            for (const SegmentPairing& pair : pairing.pairs) {
                DeformationField field;
                if (method == FieldMethod::Sort) {
                    field = field_by_subtraction(pair);
                } else {
                    AlignmentResult aligned = optimize_field(pair.systole, pair.diastole, al_dtw);
                    field = std::move(aligned.field);
                    loss += aligned.loss;
                }
                fielded.push_back(FieldedPolyline{pair.systole, std::move(field.vectors)});
            }
            write_field_csv(al_output, fielded);
            std::cout << "pairs: " << pairing.pairs.size() << "\n";
            if (method == FieldMethod::SoftDtw) std::cout << "loss: " << format_double(loss) << "\n";
            std::cout << "wrote " << al_output << "\n";
            return 0;
        }

        if (cmd_synth->parsed()) {
            RunConfig config;
            if (!sy_config.empty()) config = load_config(sy_config);
            auto take = [](const CLI::Option* opt, auto& dst, const auto& src) {
                if (opt->count() > 0) dst = src;
            };
            take(o_sys_cloud, config.systole_cloud, sy.systole_cloud);
            take(o_dia_cloud, config.diastole_cloud, sy.diastole_cloud);
            take(o_sys_line, config.systole_centerline, sy.systole_centerline);
            take(o_dia_line, config.diastole_centerline, sy.diastole_centerline);
            take(o_truth, config.truth_cloud, sy.truth_cloud);
            take(o_truth_phase, config.truth_phase, sy.truth_phase);
            take(o_field, config.field_file, sy.field_file);
            if (o_method->count() > 0) config.method = field_method_from_string(sy_method);
            take(o_global, config.dtw_global, sy.dtw_global);
            take(o_phases, config.phases, sy.phases);
            take(o_norm, config.normalize, sy.normalize);
            take(o_seed, config.seed, sy.seed);
            take(o_out, config.out_dir, sy.out_dir);
            if (o_edge->count() > 0 || o_eps->count() > 0) {
                CubeParams cube = config.cube.value_or(CubeParams{});
                if (o_edge->count() > 0) cube.edge = sy_edge;
                if (o_eps->count() > 0) cube.epsilon = sy_eps;
                if (o_edge->count() > 0 && o_eps->count() == 0 && !config.cube) {
                    cube.epsilon = 0.375 * cube.edge;
                }
                config.cube = cube;
            }
            take(o_cu_len, config.cuboid.length, sy.cuboid.length);
            take(o_cu_wid, config.cuboid.width, sy.cuboid.width);
            take(o_gamma, config.softdtw.gamma, sy.softdtw.gamma);
            take(o_step, config.softdtw.step_size, sy.softdtw.step_size);
            take(o_iters, config.softdtw.iterations, sy.softdtw.iterations);
            take(o_smooth, config.softdtw.smoothness_weight, sy.softdtw.smoothness_weight);
            take(o_mom, config.softdtw.momentum, sy.softdtw.momentum);

            const FrameFileSet files = run_pipeline(config);
            for (const std::string& path : files.frame_paths) std::cout << "wrote " << path << "\n";
            std::cout << "wrote " << files.manifest_path << "\n";
            return 0;
        }

        if (cmd_gen->parsed()) return run_gen(gen);

        if (cmd_drop->parsed()) {
            const Centerline input = read_centerline(dr_input);
            const CubeParams params =
                resolve_cube(dr_edge_opt, dr_edge, dr_eps_opt, dr_eps, input.points);
            const SegmentationResult seg = segment_centerline(input, params);
            const DropResult result = drop_branches(seg.centerline, dr_proportion, dr_seed, params);
            write_centerline_csv(dr_output, result.pruned);
            nlohmann::json j;
            j["achieved_fraction"] = result.achieved_fraction;
            j["dropped_segments"] = result.dropped_segments;
            j["kept_points"] = result.pruned.size();
            std::cout << j.dump() << "\n"
                      << "wrote " << dr_output << "\n";
            return 0;
        }

        if (cmd_eval->parsed()) {
            const MetricReport report = measure_clouds(read_cloud(ev_a), read_cloud(ev_b));
            if (ev_json) {
                std::cout << report_json(report).dump(2) << "\n";
            } else {
                std::cout << format_report(report);
            }
            return 0;
        }

        if (cmd_icp->parsed()) {
            const IcpResult result =
                rigid_icp(read_cloud(icp_source), read_cloud(icp_target), icp_iters, icp_tol);
            std::cout << "iterations: " << result.iterations << "\n"
                      << "mse: " << format_double(result.mse_history.back()) << "\n";
            const auto& r = result.transform.rotation;
            for (int row = 0; row < 3; ++row) {
                std::cout << "rotation: " << format_double(r[static_cast<std::size_t>(3 * row)])
                          << " " << format_double(r[static_cast<std::size_t>(3 * row + 1)]) << " "
                          << format_double(r[static_cast<std::size_t>(3 * row + 2)]) << "\n";
            }
            const Vec3& t = result.transform.translation;
            std::cout << "translation: " << format_double(t.x) << " " << format_double(t.y) << " "
                      << format_double(t.z) << "\n";
            if (!icp_out.empty()) {
                write_cloud_csv(icp_out, result.aligned);
                std::cout << "wrote " << icp_out << "\n";
            }
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error:config: " << e.what() << "\n";
        return 1;
    } catch (const std::runtime_error& e) {
        std::cerr << "error:runtime: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error:internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
