#include "rtk/dataset.hpp"

#include <boost/tokenizer.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "rtk/codec.hpp"
#include "rtk/error.hpp"
#include "rtk/random.hpp"

namespace fs = std::filesystem;

namespace rtk {

const char* to_string(Split split) noexcept { return split == Split::train ? "train" : "test"; }

Split parse_split(const std::string& text) {
    if (text == "train") return Split::train;
    if (text == "test") return Split::test;
    throw ConfigError("split must be 'train' or 'test', got '" + text + "'");
}

std::vector<LabeledSample> DatasetManifest::samples_in(Split split) const {
    std::vector<LabeledSample> out;
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
                 [split](const LabeledSample& s) { return s.split == split; });
    return out;
}

void validate_manifest(const DatasetManifest& m) {
    if (m.num_classes < 2) throw LoadError("manifest needs at least 2 classes");
    if (static_cast<int>(m.class_names.size()) != m.num_classes) {
        throw LoadError("class name count does not match num_classes");
    }
    for (int c : m.flip_invariant_classes) {
        if (c < 0 || c >= m.num_classes) {
            throw LoadError("flip-invariant class " + std::to_string(c) + " out of range");
        }
    }
    if (m.samples.empty()) throw LoadError("manifest has no samples");
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < m.samples.size(); ++i) {
        const auto& s = m.samples[i];
        if (!seen.insert(s.sample_id).second) {
            throw LoadError("sample " + std::to_string(i) + ": duplicate sample_id '" + s.sample_id + "'");
        }
        if (s.label < 0 || s.label >= m.num_classes) {
            throw LoadError("sample " + std::to_string(i) + ": label " + std::to_string(s.label) +
                            " out of range");
        }
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, char separator) {
    using Separator = boost::escaped_list_separator<char>;
    boost::tokenizer<Separator> tokens(line, Separator('\\', separator, '"'));
    return {tokens.begin(), tokens.end()};
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ' || s.back() == '\t')) {
        s.pop_back();
    }
    std::size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
    return s.substr(start);
}

int parse_int(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const int value = std::stoi(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw LoadError(where + ": not an integer: '" + text + "'");
    }
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(strip(line));
    return lines;
}

fs::path sidecar(const fs::path& csv_path, const char* extension) {
    fs::path p = csv_path;
    p.replace_extension(extension);
    return p;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& csv_path) {
    DatasetManifest manifest;

    const fs::path classes_path = sidecar(csv_path, ".classes");
    for (const auto& line : read_lines(classes_path)) {
        if (!line.empty()) manifest.class_names.push_back(line);
    }
    manifest.num_classes = static_cast<int>(manifest.class_names.size());

    const fs::path flip_path = sidecar(csv_path, ".flip");
    if (fs::exists(flip_path)) {
        for (const auto& line : read_lines(flip_path)) {
            std::string normalized = line;
            std::replace(normalized.begin(), normalized.end(), ',', ' ');
            std::istringstream fields(normalized);
            for (std::string field; fields >> field;) {
                manifest.flip_invariant_classes.insert(parse_int(field, flip_path.string()));
            }
        }
    }

    const auto lines = read_lines(csv_path);
    if (lines.empty()) throw LoadError(csv_path.string() + ": empty manifest");
    const auto header = split_csv_line(lines[0], ',');
    const std::vector<std::string> expected{"sample_id", "image_path", "label", "split"};
    if (header != expected) {
        throw LoadError(csv_path.string() + ": header must be sample_id,image_path,label,split");
    }

    const fs::path base = csv_path.parent_path();
    std::unordered_set<std::string> seen;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const std::string where = csv_path.string() + " row " + std::to_string(row + 1);
        std::vector<std::string> fields;
        try {
            fields = split_csv_line(lines[row], ',');
        } catch (const boost::escaped_list_error& e) {
            throw LoadError(where + ": " + e.what());
        }
        if (fields.size() != 4) throw LoadError(where + ": expected 4 fields");

        LabeledSample sample;
        sample.sample_id = fields[0];
        if (sample.sample_id.empty()) throw LoadError(where + ": empty sample_id");
        if (!seen.insert(sample.sample_id).second) {
            throw LoadError(where + ": duplicate sample_id '" + sample.sample_id + "'");
        }
        const fs::path image_path(fields[1]);
        sample.image_path = image_path.is_absolute() ? image_path : base / image_path;
        sample.label = parse_int(fields[2], where);
        if (sample.label < 0 || sample.label >= manifest.num_classes) {
            throw LoadError(where + ": label " + fields[2] + " out of range for " +
                            std::to_string(manifest.num_classes) + " classes");
        }
        try {
            sample.split = parse_split(fields[3]);
        } catch (const ConfigError& e) {
            throw LoadError(where + ": " + e.what());
        }
        if (!fs::exists(sample.image_path)) {
            throw LoadError(where + ": missing image file " + sample.image_path.string());
        }
        manifest.samples.push_back(std::move(sample));
    }
    validate_manifest(manifest);
    return manifest;
}

namespace {

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\\") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void save_manifest(const DatasetManifest& manifest, const fs::path& csv_path) {
    validate_manifest(manifest);
    const fs::path base = csv_path.parent_path().empty() ? fs::path(".") : csv_path.parent_path();
    std::ostringstream csv;
    csv << "sample_id,image_path,label,split\n";
    for (const auto& s : manifest.samples) {
        fs::path stored = s.image_path;
        std::error_code ec;
        const fs::path rel = fs::relative(s.image_path, base, ec);
        if (!ec && !rel.empty() && *rel.begin() != "..") stored = rel;
        csv << csv_field(s.sample_id) << ',' << csv_field(stored.generic_string()) << ',' << s.label << ','
            << to_string(s.split) << '\n';
    }
    write_text(csv_path, csv.str());

    std::string names;
    for (const auto& n : manifest.class_names) names += n + "\n";
    write_text(sidecar(csv_path, ".classes"), names);

    std::string flips;
    for (int c : manifest.flip_invariant_classes) flips += std::to_string(c) + "\n";
    write_text(sidecar(csv_path, ".flip"), flips);
}

// ---------------------------------------------------------------------------
// GTSRB

std::set<int> gtsrb_flip_invariant_classes() {
    // Signs that are left/right symmetric: priority road, yield, stop, no
    // vehicles, no entry, general caution, bumpy road, traffic signals, ice/snow,
    // ahead only.
    return {11, 12, 13, 15, 17, 18, 22, 26, 30, 35};
}

namespace {

constexpr int kGtsrbClasses = 43;

void read_gtsrb_annotations(const fs::path& csv, const fs::path& image_dir, const std::string& id_prefix,
                            Split split, DatasetManifest& manifest) {
    const auto lines = read_lines(csv);
    if (lines.empty()) throw LoadError(csv.string() + ": empty annotation file");
    const auto header = split_csv_line(lines[0], ';');
    const auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw LoadError(csv.string() + ": missing column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t file_col = col("Filename");
    const std::size_t class_col = col("ClassId");
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const std::string where = csv.string() + " row " + std::to_string(row + 1);
        const auto fields = split_csv_line(lines[row], ';');
        if (fields.size() <= std::max(file_col, class_col)) throw LoadError(where + ": too few fields");
        LabeledSample s;
        s.image_path = image_dir / fields[file_col];
        s.sample_id = id_prefix + fs::path(fields[file_col]).stem().string();
        s.label = parse_int(fields[class_col], where);
        s.split = split;
        if (s.label < 0 || s.label >= kGtsrbClasses) throw LoadError(where + ": ClassId out of range");
        if (!fs::exists(s.image_path)) throw LoadError(where + ": missing image " + s.image_path.string());
        manifest.samples.push_back(std::move(s));
    }
}

}  // namespace

DatasetManifest import_gtsrb(const fs::path& root) {
    if (!fs::is_directory(root)) throw LoadError("GTSRB root is not a directory: " + root.string());
    DatasetManifest manifest;
    manifest.num_classes = kGtsrbClasses;
    for (int c = 0; c < kGtsrbClasses; ++c) {
        char name[16];
        std::snprintf(name, sizeof name, "%05d", c);
        manifest.class_names.emplace_back(name);
    }
    manifest.flip_invariant_classes = gtsrb_flip_invariant_classes();

    const fs::path test_csv = root / "GT-final_test.csv";
    if (fs::exists(test_csv)) {
        read_gtsrb_annotations(test_csv, root, "test/", Split::test, manifest);
    } else {
        std::vector<fs::path> class_dirs;
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_directory()) class_dirs.push_back(entry.path());
        }
        std::sort(class_dirs.begin(), class_dirs.end());
        if (class_dirs.empty()) throw LoadError("GTSRB root has no class directories: " + root.string());
        for (const auto& dir : class_dirs) {
            const std::string cls = dir.filename().string();
            const fs::path csv = dir / ("GT-" + cls + ".csv");
            if (!fs::exists(csv)) throw LoadError("GTSRB class directory " + dir.string() + ": missing " +
                                                  csv.filename().string());
            read_gtsrb_annotations(csv, dir, "train/" + cls + "/", Split::train, manifest);
        }
    }
    validate_manifest(manifest);
    return manifest;
}

// ---------------------------------------------------------------------------
// Synthetic

std::string synthetic_sample_id(int label, int index) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "syn_c%02d_%04d", label, index);
    return buf;
}

Image synthetic_image(const SyntheticSpec& spec, int label, int index) {
    const double level = (label + 0.5) / spec.num_classes;
    RandomStream stream = RandomStream::derive(spec.seed, synthetic_sample_id(label, index), "synthetic", 0);
    std::vector<double> values(static_cast<std::size_t>(spec.width) * spec.height * 3);
    for (auto& v : values) v = level + 0.02 * (2.0 * stream.next_uniform() - 1.0);
    return clipped_image(spec.width, spec.height, std::move(values));
}

DatasetManifest generate_synthetic(const SyntheticSpec& spec, const fs::path& out_dir) {
    if (spec.num_classes < 2 || spec.per_class < 1 || spec.width < 1 || spec.height < 1) {
        throw ConfigError("synthetic spec needs num_classes >= 2 and positive counts");
    }
    fs::create_directories(out_dir / "images");
    DatasetManifest manifest;
    manifest.num_classes = spec.num_classes;
    for (int k = 0; k < spec.num_classes; ++k) {
        manifest.class_names.push_back("level_" + std::to_string(k));
        manifest.flip_invariant_classes.insert(k);
        for (int i = 0; i < spec.per_class; ++i) {
            LabeledSample s;
            s.sample_id = synthetic_sample_id(k, i);
            s.image_path = out_dir / "images" / (s.sample_id + ".ppm");
            s.label = k;
            s.split = Split::test;
            write_image(synthetic_image(spec, k, i), s.image_path);
            manifest.samples.push_back(std::move(s));
        }
    }
    save_manifest(manifest, out_dir / "manifest.csv");
    return manifest;
}

Image load_sample_image(const LabeledSample& sample) { return read_image(sample.image_path); }

}  // namespace rtk
