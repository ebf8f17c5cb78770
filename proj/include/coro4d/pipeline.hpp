// pipeline.hpp - run configuration and the end-to-end flow: segment both
// centerlines, pair their segments, estimate the deformation field, carry it
// onto the vessel cloud, synthesize the timed frames, and score them.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coro4d/centerline.hpp"
#include "coro4d/geometry.hpp"
#include "coro4d/metrics.hpp"
#include "coro4d/soft_dtw.hpp"
#include "coro4d/sort_align.hpp"
#include "coro4d/vessel_transfer.hpp"

namespace coro4d {

enum class FieldMethod { Sort, SoftDtw };

const char* to_string(FieldMethod m);
FieldMethod field_method_from_string(const std::string& name);

struct RunConfig {
    std::string systole_cloud;
    std::string diastole_cloud;
    std::string systole_centerline;
    std::string diastole_centerline;
    std::string truth_cloud;   // optional reference for one synthesized phase
    double truth_phase = -1.0; // which phase the truth cloud captures
    std::string field_file;    // precomputed field CSV; skips segment/pair/field

    FieldMethod method = FieldMethod::Sort;
    bool dtw_global = false; // softdtw over all pairs concatenated, not per pair
    std::vector<double> phases{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    bool normalize = false; // joint unit-cube normalization of all inputs
    std::uint64_t seed = 0;
    std::string out_dir = "out";

    std::optional<CubeParams> cube; // scaled from point spacing when unset
    CuboidParams cuboid;
    SoftDtwParams softdtw;

    /// Checks everything that does not require touching the filesystem:
    /// paths non-empty, phases strictly increasing within [0,1] with
    /// distinct frame-file tokens, truth phase present when a truth cloud
    /// is named, parameter structs self-consistent.
    void validate() const;
};

/// Parses a config JSON file; a pipeline manifest (which embeds the config
/// under "config") is accepted too, so re-running from a manifest works.
RunConfig load_config(const std::string& path);

/// Stable-key JSON echo of a config; embedded in the manifest.
std::string config_to_json(const RunConfig& config);

/// The pipeline's in-memory inputs (what run_pipeline reads from files).
struct PipelineInputs {
    PointCloud systole_cloud;
    PointCloud diastole_cloud;
    Centerline systole_centerline;
    Centerline diastole_centerline;
    PointCloud truth_cloud;                        // empty when unused
    std::vector<FieldedPolyline> precomputed_field; // non-empty skips estimation
};

struct PipelineResult {
    SegmentationResult systole_segments;
    SegmentationResult diastole_segments;
    PairingResult pairing;
    std::vector<FieldedPolyline> fielded; // one per pair, systolic stations
    DeformationField vessel_field;        // per systolic vessel point
    CardiacSequence sequence;             // in the input coordinate frame

    bool has_final_metric = false; // set when phase 1 was synthesized
    MetricReport final_vs_diastole;
    bool has_truth_metric = false;
    MetricReport truth_metric;
    double softdtw_loss = 0.0; // summed over pairs (softdtw method only)
};

/// Runs every stage on in-memory data. Stage failures rethrow with the
/// stage name prefixed ("segment: ...", "field: ...", ...).
PipelineResult run_pipeline_data(const PipelineInputs& inputs, const RunConfig& config);

struct FrameFileSet {
    std::vector<std::string> frame_paths; // one CSV per phase, in phase order
    std::string manifest_path;
};

/// File-based entry point: validates the config (including input file
/// existence) before any compute, reads the inputs, runs the stages, and
/// writes frame files plus manifest.json into config.out_dir. On failure,
/// files already written for this run are removed.
FrameFileSet run_pipeline(const RunConfig& config);

} // namespace coro4d
