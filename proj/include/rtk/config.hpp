#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rtk/classifier.hpp"
#include "rtk/dataset.hpp"
#include "rtk/evaluator.hpp"

namespace rtk {

enum class DatasetSourceKind { manifest, gtsrb, synthetic };

struct DatasetSource {
    DatasetSourceKind kind = DatasetSourceKind::manifest;
    std::filesystem::path path;  ///< manifest file, GTSRB root, or synthetic output dir
    SyntheticSpec synthetic;
};

/// Centroid tables can be given inline or fitted on a split at run time.
enum class CentroidFit { none, train, test, all };

struct RunConfig {
    DatasetSource dataset;
    EndpointConfig endpoint;
    CentroidFit centroid_fit = CentroidFit::none;
    std::vector<PropertySpec> properties;
    std::uint64_t global_seed = 0;
    int workers = 1;
    std::filesystem::path output_dir = "out";
    Split split = Split::test;

    const PropertySpec& property(const std::string& id) const;
};

/// Relative paths resolve against `base_dir`. Throws ConfigError whose
/// message names the offending field, e.g. "properties[0].budget.grid_steps".
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Checks the cross-field invariants (unique ids, workers, endpoint shape).
void validate_config(const RunConfig& config);

/// Loads, imports or generates the dataset.
DatasetManifest load_dataset(const RunConfig& config);

/// Endpoint ready for make_classifier: fits centroids when requested.
EndpointConfig resolve_endpoint(const RunConfig& config, const DatasetManifest& dataset);

}  // namespace rtk
