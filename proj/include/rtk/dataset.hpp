#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "rtk/image.hpp"

namespace rtk {

enum class Split { train, test };

const char* to_string(Split split) noexcept;
/// Throws ConfigError on anything but "train" / "test".
Split parse_split(const std::string& text);

struct LabeledSample {
    std::string sample_id;
    std::filesystem::path image_path;  ///< resolved (absolute or relative to the working dir)
    int label = 0;
    Split split = Split::test;
};

struct DatasetManifest {
    int num_classes = 0;
    std::vector<std::string> class_names;
    std::set<int> flip_invariant_classes;
    std::vector<LabeledSample> samples;

    /// Samples of one split, in manifest order.
    std::vector<LabeledSample> samples_in(Split split) const;
    bool flip_invariant(int label) const { return flip_invariant_classes.contains(label); }
};

/// Checks every manifest invariant; throws LoadError.
void validate_manifest(const DatasetManifest& manifest);

/// Manifest CSV: header `sample_id,image_path,label,split`, paths relative to
/// the manifest's directory. Sidecars next to it share its stem:
///   <stem>.classes  one class name per line (required)
///   <stem>.flip     class indices that survive a horizontal flip,
///                   separated by commas or whitespace (optional)
/// Image files are checked for existence but not decoded.
DatasetManifest load_manifest(const std::filesystem::path& csv_path);

/// Writes the CSV plus sidecars; image paths are written relative to the
/// manifest's directory when possible.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& csv_path);

/// Standard GTSRB layouts under `root`:
///  - training: per-class directories 00000..00042, each with GT-<class>.csv;
///  - test: a flat directory containing GT-final_test.csv.
/// Annotation files are semicolon separated with a Filename and ClassId column.
DatasetManifest import_gtsrb(const std::filesystem::path& root);

/// GTSRB classes whose meaning is unchanged by a horizontal flip.
std::set<int> gtsrb_flip_invariant_classes();

struct SyntheticSpec {
    int num_classes = 2;
    int per_class = 1;
    int width = 8;
    int height = 8;
    std::uint64_t seed = 0;
};

/// Class k images are constant (k + 0.5) / num_classes plus seeded uniform
/// noise in [-0.02, 0.02], written as PPM under `out_dir` together with
/// manifest.csv and its sidecars. Every class is flip invariant.
DatasetManifest generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

/// The image generate_synthetic writes for one sample, before 8-bit storage.
Image synthetic_image(const SyntheticSpec& spec, int label, int index);
std::string synthetic_sample_id(int label, int index);

/// Image source used by the evaluator; the default decodes image_path.
using ImageLoader = std::function<Image(const LabeledSample&)>;
Image load_sample_image(const LabeledSample& sample);

}  // namespace rtk
