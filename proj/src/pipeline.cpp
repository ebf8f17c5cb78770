#include "coro4d/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "coro4d/io.hpp"

namespace coro4d {

namespace {

using nlohmann::json;

// Prefixes errors with the stage that raised them.  invalid_argument keeps
// its type so callers can still tell "your inputs are wrong" apart from
// "the run failed".
template <typename F>
auto stage(const char* name, F&& body) {
    try {
        return body();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string(name) + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(name) + ": " + e.what());
    }
}

constexpr double kPhaseMatchTol = 1e-9;

json report_to_json(const MetricReport& r) {
    json j;
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

json config_to_json_object(const RunConfig& c) {
    json j;
    j["systole_cloud"] = c.systole_cloud;
    j["diastole_cloud"] = c.diastole_cloud;
    j["systole_centerline"] = c.systole_centerline;
    j["diastole_centerline"] = c.diastole_centerline;
    if (!c.truth_cloud.empty()) {
        j["truth_cloud"] = c.truth_cloud;
        j["truth_phase"] = c.truth_phase;
    }
    if (!c.field_file.empty()) j["field_file"] = c.field_file;
    j["method"] = to_string(c.method);
    j["dtw_global"] = c.dtw_global;
    j["phases"] = c.phases;
    j["normalize"] = c.normalize;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    if (c.cube) {
        j["cube"] = {{"edge", c.cube->edge}, {"epsilon", c.cube->epsilon}};
    }
    j["cuboid"] = {{"length", c.cuboid.length}, {"width", c.cuboid.width}};
    j["softdtw"] = {{"gamma", c.softdtw.gamma},
                    {"step_size", c.softdtw.step_size},
                    {"iterations", c.softdtw.iterations},
                    {"smoothness_weight", c.softdtw.smoothness_weight},
                    {"momentum", c.softdtw.momentum}};
    return j;
}

// Strict field readers: wrong types report the key instead of a bare
// nlohmann type name.
double as_number(const json& j, const std::string& key) {
    if (!j.at(key).is_number()) throw std::invalid_argument("config key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::string as_string(const json& j, const std::string& key) {
    if (!j.at(key).is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

bool as_bool(const json& j, const std::string& key) {
    if (!j.at(key).is_boolean()) throw std::invalid_argument("config key '" + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

RunConfig parse_config_object(const json& j) {
    static const std::set<std::string> known = {
        "systole_cloud", "diastole_cloud", "systole_centerline", "diastole_centerline",
        "truth_cloud",   "truth_phase",    "field_file",         "method",
        "dtw_global",    "phases",         "normalize",          "seed",
        "out_dir",       "cube",           "cuboid",             "softdtw"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (known.count(it.key()) == 0) {
            throw std::invalid_argument("unknown config key '" + it.key() + "'");
        }
    }

    RunConfig c;
    if (j.contains("systole_cloud")) c.systole_cloud = as_string(j, "systole_cloud");
    if (j.contains("diastole_cloud")) c.diastole_cloud = as_string(j, "diastole_cloud");
    if (j.contains("systole_centerline")) c.systole_centerline = as_string(j, "systole_centerline");
    if (j.contains("diastole_centerline"))
        c.diastole_centerline = as_string(j, "diastole_centerline");
    if (j.contains("truth_cloud")) c.truth_cloud = as_string(j, "truth_cloud");
    if (j.contains("truth_phase")) c.truth_phase = as_number(j, "truth_phase");
    if (j.contains("field_file")) c.field_file = as_string(j, "field_file");
    if (j.contains("method")) c.method = field_method_from_string(as_string(j, "method"));
    if (j.contains("dtw_global")) c.dtw_global = as_bool(j, "dtw_global");
    if (j.contains("phases")) {
        if (!j.at("phases").is_array()) throw std::invalid_argument("config key 'phases' must be an array");
        c.phases.clear();
        for (const auto& p : j.at("phases")) {
            if (!p.is_number()) throw std::invalid_argument("config key 'phases' must hold numbers");
            c.phases.push_back(p.get<double>());
        }
    }
    if (j.contains("normalize")) c.normalize = as_bool(j, "normalize");
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned())
            throw std::invalid_argument("config key 'seed' must be a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("out_dir")) c.out_dir = as_string(j, "out_dir");
    if (j.contains("cube") && !j.at("cube").is_null()) {
        const json& cube = j.at("cube");
        c.cube = CubeParams{as_number(cube, "edge"), as_number(cube, "epsilon")};
    }
    if (j.contains("cuboid")) {
        const json& cuboid = j.at("cuboid");
        c.cuboid.length = as_number(cuboid, "length");
        c.cuboid.width = as_number(cuboid, "width");
    }
    if (j.contains("softdtw")) {
        const json& sd = j.at("softdtw");
        if (sd.contains("gamma")) c.softdtw.gamma = as_number(sd, "gamma");
        if (sd.contains("step_size")) c.softdtw.step_size = as_number(sd, "step_size");
        if (sd.contains("iterations")) {
            c.softdtw.iterations = static_cast<std::size_t>(as_number(sd, "iterations"));
        }
        if (sd.contains("smoothness_weight"))
            c.softdtw.smoothness_weight = as_number(sd, "smoothness_weight");
        if (sd.contains("momentum")) c.softdtw.momentum = as_number(sd, "momentum");
    }
    return c;
}

} // namespace

const char* to_string(FieldMethod m) {
    return m == FieldMethod::Sort ? "sort" : "softdtw";
}

FieldMethod field_method_from_string(const std::string& name) {
    if (name == "sort") return FieldMethod::Sort;
    if (name == "softdtw") return FieldMethod::SoftDtw;
    throw std::invalid_argument("unknown method '" + name + "' (expected sort or softdtw)");
}

void RunConfig::validate() const {
    if (systole_cloud.empty()) throw std::invalid_argument("systole_cloud path is required");
    if (diastole_cloud.empty()) throw std::invalid_argument("diastole_cloud path is required");
    if (field_file.empty()) {
        if (systole_centerline.empty())
            throw std::invalid_argument("systole_centerline path is required");
        if (diastole_centerline.empty())
            throw std::invalid_argument("diastole_centerline path is required");
    }
    if (out_dir.empty()) throw std::invalid_argument("out_dir is required");
    if (phases.empty()) throw std::invalid_argument("phases must not be empty");
    std::set<std::string> tokens;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        if (!(phases[i] >= 0.0 && phases[i] <= 1.0)) {
            throw std::invalid_argument("phases must lie in [0,1]");
        }
        if (i > 0 && !(phases[i] > phases[i - 1])) {
            throw std::invalid_argument("phases must be strictly increasing");
        }
        if (!tokens.insert(phase_token(phases[i])).second) {
            throw std::invalid_argument("phases " + format_double(phases[i - 1]) + " and " +
                                        format_double(phases[i]) +
                                        " collide in frame file naming (both map to frame_" +
                                        phase_token(phases[i]) + ".csv)");
        }
    }
    if (!truth_cloud.empty()) {
        bool matched = false;
        for (double p : phases) matched = matched || std::abs(p - truth_phase) <= kPhaseMatchTol;
        if (!matched) {
            throw std::invalid_argument("truth_phase must equal one of the synthesized phases");
        }
    }
    if (cube) cube->validate();
    cuboid.validate();
    softdtw.validate();
}

RunConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(path + ": config must be a JSON object");
    // A manifest embeds the original config under "config".
    const json& cfg = j.contains("config") && j.at("config").is_object() ? j.at("config") : j;
    try {
        return parse_config_object(cfg);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::string config_to_json(const RunConfig& config) {
    return config_to_json_object(config).dump(2);
}

PipelineResult run_pipeline_data(const PipelineInputs& inputs, const RunConfig& config) {
    stage("config", [&] {
        config.validate();
        if (inputs.systole_cloud.empty()) throw std::invalid_argument("systole cloud is empty");
        if (inputs.diastole_cloud.empty()) throw std::invalid_argument("diastole cloud is empty");
        if (inputs.precomputed_field.empty()) {
            if (inputs.systole_centerline.size() == 0)
                throw std::invalid_argument("systole centerline is empty");
            if (inputs.diastole_centerline.size() == 0)
                throw std::invalid_argument("diastole centerline is empty");
        }
    });

    PointCloud systole = inputs.systole_cloud;
    Centerline systole_line = inputs.systole_centerline;
    Centerline diastole_line = inputs.diastole_centerline;

    Normalization norm;
    if (config.normalize) {
        norm = stage("normalize", [&] {
            const PointCloud* all[] = {&systole, &inputs.diastole_cloud, &systole_line.points,
                                       &diastole_line.points};
            return unit_cube_normalization(all);
        });
        for (Point3& p : systole) p = norm.apply(p);
        for (Point3& p : systole_line.points) p = norm.apply(p);
        for (Point3& p : diastole_line.points) p = norm.apply(p);
    }

    PipelineResult result;
    if (!inputs.precomputed_field.empty()) {
        result.fielded = inputs.precomputed_field;
    } else {
        stage("segment", [&] {
            const CubeParams systole_cube =
                config.cube ? *config.cube : cube_params_from_spacing(systole_line.points);
            const CubeParams diastole_cube =
                config.cube ? *config.cube : cube_params_from_spacing(diastole_line.points);
            result.systole_segments = segment_centerline(systole_line, systole_cube);
            result.diastole_segments = segment_centerline(diastole_line, diastole_cube);
            return 0;
        });

        stage("pair", [&] {
            result.pairing = pair_segments(result.systole_segments.centerline,
                                           result.diastole_segments.centerline);
            return 0;
        });

        stage("field", [&] {
            result.fielded.reserve(result.pairing.pairs.size());
            if (config.method == FieldMethod::SoftDtw && config.dtw_global) {
                // One optimization over the whole tree: all paired segments
                // chained into a single sequence per phase.
                std::vector<Point3> source, target;
                for (const SegmentPairing& pair : result.pairing.pairs) {
                    source.insert(source.end(), pair.systole.begin(), pair.systole.end());
                    target.insert(target.end(), pair.diastole.begin(), pair.diastole.end());
                }
                AlignmentResult aligned = optimize_field(source, target, config.softdtw);
                result.softdtw_loss = aligned.loss;
                auto from = aligned.field.vectors.begin();
                for (const SegmentPairing& pair : result.pairing.pairs) {
                    auto to = from + static_cast<std::ptrdiff_t>(pair.systole.size());
                    result.fielded.push_back(
                        FieldedPolyline{pair.systole, std::vector<Vec3>(from, to)});
                    from = to;
                }
                return 0;
            }
            for (const SegmentPairing& pair : result.pairing.pairs) {
                DeformationField field;
                if (config.method == FieldMethod::Sort) {
                    field = field_by_subtraction(pair);
                } else {
                    AlignmentResult aligned =
                        optimize_field(pair.systole, pair.diastole, config.softdtw);
                    field = std::move(aligned.field);
                    result.softdtw_loss += aligned.loss;
                }
                result.fielded.push_back(
                    FieldedPolyline{pair.systole, std::move(field.vectors)});
            }
            return 0;
        });
    }

    stage("transfer", [&] {
        result.vessel_field = assign_field(systole, result.fielded, config.cuboid);
        return 0;
    });

    stage("synthesize", [&] {
        result.sequence = synthesize_4d(systole, result.vessel_field, config.phases);
        if (config.normalize) {
            for (Frame4D& frame : result.sequence.frames) {
                for (Point3& p : frame.cloud) p = norm.invert(p);
            }
        }
        return 0;
    });

    stage("evaluate", [&] {
        for (const Frame4D& frame : result.sequence.frames) {
            if (std::abs(frame.phase - 1.0) <= kPhaseMatchTol) {
                result.final_vs_diastole = measure_clouds(frame.cloud, inputs.diastole_cloud);
                result.has_final_metric = true;
            }
        }
        if (!inputs.truth_cloud.empty()) {
            const Frame4D* matched = nullptr;
            for (const Frame4D& frame : result.sequence.frames) {
                if (std::abs(frame.phase - config.truth_phase) <= kPhaseMatchTol) matched = &frame;
            }
            if (matched == nullptr) {
                throw std::invalid_argument("truth phase " + format_double(config.truth_phase) +
                                            " was not synthesized");
            }
            result.truth_metric = measure_clouds(matched->cloud, inputs.truth_cloud);
            result.has_truth_metric = true;
        }
        return 0;
    });

    return result;
}

FrameFileSet run_pipeline(const RunConfig& config) {
    stage("config", [&] {
        config.validate();
        auto require_file = [](const std::string& path, const char* what) {
            if (!path.empty() && !std::filesystem::exists(path)) {
                throw std::invalid_argument(std::string(what) + " file not found: " + path);
            }
        };
        require_file(config.systole_cloud, "systole cloud");
        require_file(config.diastole_cloud, "diastole cloud");
        require_file(config.systole_centerline, "systole centerline");
        require_file(config.diastole_centerline, "diastole centerline");
        require_file(config.truth_cloud, "truth cloud");
        require_file(config.field_file, "field");
        return 0;
    });

    PipelineInputs inputs;
    stage("read", [&] {
        inputs.systole_cloud = read_cloud(config.systole_cloud);
        inputs.diastole_cloud = read_cloud(config.diastole_cloud);
        if (config.field_file.empty()) {
            inputs.systole_centerline = read_centerline(config.systole_centerline);
            inputs.diastole_centerline = read_centerline(config.diastole_centerline);
        } else {
            inputs.precomputed_field = read_field_csv(config.field_file);
        }
        if (!config.truth_cloud.empty()) inputs.truth_cloud = read_cloud(config.truth_cloud);
        return 0;
    });

    const PipelineResult result = run_pipeline_data(inputs, config);

    FrameFileSet files;
    std::vector<std::filesystem::path> written;
    try {
        stage("write", [&] {
            std::filesystem::create_directories(config.out_dir);
            const std::filesystem::path dir(config.out_dir);
            json manifest;
            manifest["config"] = config_to_json_object(config);

            json frame_names = json::array();
            for (const Frame4D& frame : result.sequence.frames) {
                const std::string name = "frame_" + phase_token(frame.phase) + ".csv";
                const std::filesystem::path path = dir / name;
                write_cloud_csv(path.string(), frame.cloud);
                written.push_back(path);
                files.frame_paths.push_back(path.string());
                frame_names.push_back(name);
            }
            manifest["frames"] = frame_names;

            json metrics;
            metrics["definitions"] = {{"cd", kChamferDefinition}, {"hd", kHausdorffDefinition}};
            metrics["final_vs_diastole"] =
                result.has_final_metric ? report_to_json(result.final_vs_diastole) : json();
            metrics["truth"] = result.has_truth_metric ? report_to_json(result.truth_metric) : json();
            manifest["metrics"] = metrics;

            json stats;
            stats["systole_segments"] = result.systole_segments.segment_count;
            stats["diastole_segments"] = result.diastole_segments.segment_count;
            stats["isolated_systole"] = result.systole_segments.isolated_points.size();
            stats["isolated_diastole"] = result.diastole_segments.isolated_points.size();
            stats["pairs"] = result.pairing.pairs.size();
            stats["unmatched_systole"] = result.pairing.unmatched_systole;
            stats["unmatched_diastole"] = result.pairing.unmatched_diastole;
            if (config.method == FieldMethod::SoftDtw) stats["softdtw_loss"] = result.softdtw_loss;
            manifest["stats"] = stats;

            const std::filesystem::path manifest_path = dir / "manifest.json";
            write_text_file(manifest_path.string(), manifest.dump(2) + "\n");
            written.push_back(manifest_path);
            files.manifest_path = manifest_path.string();
            return 0;
        });
    } catch (...) {
        std::error_code ec;
        for (const auto& path : written) std::filesystem::remove(path, ec);
        throw;
    }
    return files;
}

} // namespace coro4d
