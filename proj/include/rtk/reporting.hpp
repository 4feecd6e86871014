#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtk/evaluator.hpp"

namespace rtk {

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepPoint {
    double theta_value = 0.0;
    double robustness_fraction = 0.0;
    std::size_t evaluated_samples = 0;
};

struct SweepCurve {
    std::string property_id;
    std::string dim_name;
    std::vector<SweepPoint> points;
};

/// Flat dimension index for `name`: a bare dimension name when unambiguous,
/// or "<kind>.<name>" / "<transform index>.<name>". Throws ConfigError.
std::size_t resolve_dim(const PropertySpec& spec, const std::string& name);

/// Copy of `spec` where every dimension but `dim` is pinned to its identity
/// value (or the domain midpoint when the identity lies outside it).
PropertySpec pin_all_but(const PropertySpec& spec, std::size_t dim);

/// Full-grid sweep over the single free dimension of `spec`: for each of the
/// `steps` values, the fraction of originally-correct samples that stay
/// correct. Throws ConfigError unless exactly one dimension is free.
SweepCurve sweep(const DatasetManifest& dataset, const PropertySpec& spec, const EndpointConfig& endpoint,
                 int steps, const EvaluationOptions& options);

std::string sweep_csv(const SweepCurve& curve);
std::string sweep_svg(const SweepCurve& curve);

// ---------------------------------------------------------------------------
// Combination deltas

struct PairResult {
    std::string first;
    std::string second;
    PropertyResult combined;
};

struct DeltaEntry {
    std::string first;
    std::string second;
    std::optional<double> first_pct;
    std::optional<double> second_pct;
    std::optional<double> combined_pct;
    std::optional<double> delta;  ///< percentage points
};

/// One entry per pair; throws ReportError naming the pair when a part is missing.
std::vector<DeltaEntry> delta_matrix(std::span<const PropertyResult> parts, std::span<const PairResult> pairs);
std::string delta_matrix_csv(std::span<const DeltaEntry> entries);
/// Dot plot: one point per pair on a worse/better axis centred at zero.
std::string delta_matrix_svg(std::span<const DeltaEntry> entries);

// ---------------------------------------------------------------------------
// Failure galleries

struct FailureMember {
    std::string sample_id;
    std::vector<std::vector<double>> theta;
    int predicted_label = 0;    ///< label found during the search
    int reproduced_label = 0;   ///< label after 8-bit quantization
    std::string original_image;   ///< relative to the gallery root
    std::string perturbed_image;
    std::string record;
};

struct FailureGroup {
    int class_label = 0;
    std::string property_id;
    std::vector<FailureMember> members;
};

struct FailureIndex {
    std::vector<FailureGroup> groups;
    /// Counterexamples that did not survive quantization; listed, no images.
    std::vector<FailureMember> unreproducible;
};

/// Re-verifies every counterexample after 8-bit quantization and writes
/// <out_dir>/class_<label>/<property_id>/ with original/perturbed PNGs and a
/// JSON record per sample, plus index.json and index.md.
FailureIndex failure_report(std::span<const PropertyResult> results, std::span<const PropertySpec> specs,
                            const DatasetManifest& dataset, const EndpointConfig& endpoint,
                            const EvaluationOptions& options, const std::filesystem::path& out_dir);

nlohmann::json failure_index_json(const FailureIndex& index);

// ---------------------------------------------------------------------------
// Score reports

/// Sorted keys, floats with 6 significant digits, LF line endings, two-space
/// indent. Bytes depend only on the value.
std::string canonical_json(const nlohmann::json& value);

nlohmann::json result_json(const PropertyResult& result);
std::string report_json(std::span<const PropertyResult> results);
/// property_id,accuracy,robustness_score,non_robust_count (fixed 6 decimals).
std::string scores_csv(std::span<const PropertyResult> results);
std::string scores_svg(std::span<const PropertyResult> results);

enum class ReportFormat { json, csv, svg };
/// Writes report.json, scores.csv and/or scores.svg into out_dir.
void emit_report(std::span<const PropertyResult> results, std::span<const ReportFormat> formats,
                 const std::filesystem::path& out_dir);

/// "%.6f"
std::string format_fixed6(double value);

}  // namespace rtk
