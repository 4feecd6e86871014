#include "rtk/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "rtk/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rtk {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& message) {
    throw ConfigError(field + ": " + message);
}

void allow_keys(const json& obj, const std::string& field, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) fail(field, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
            fail(field + "." + it.key(), "unknown key");
        }
    }
}

double number(const json& v, const std::string& field) {
    if (!v.is_number()) fail(field, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(field, "must be finite");
    return d;
}

long long integer(const json& v, const std::string& field) {
    if (!v.is_number_integer()) fail(field, "expected an integer");
    return v.get<long long>();
}

std::string text(const json& v, const std::string& field) {
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
}

/// Non-negative integer up to 2^64 - 1, or its decimal string.
std::uint64_t seed_value(const json& v, const std::string& field) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<long long>() < 0) fail(field, "must be >= 0");
        return static_cast<std::uint64_t>(v.get<long long>());
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (!s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            try {
                return std::stoull(s);
            } catch (const std::out_of_range&) {
            }
        }
    }
    fail(field, "expected an unsigned 64-bit integer");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

Split split_value(const json& v, const std::string& field) {
    try {
        return parse_split(text(v, field));
    } catch (const ConfigError& e) {
        fail(field, e.what());
    }
}

DatasetSource parse_dataset(const json& d, const fs::path& base) {
    const std::string field = "dataset";
    allow_keys(d, field, {"manifest", "gtsrb_root", "synthetic", "dir"});
    const int given = int(d.contains("manifest")) + int(d.contains("gtsrb_root")) + int(d.contains("synthetic"));
    if (given != 1) fail(field, "give exactly one of \"manifest\", \"gtsrb_root\" or \"synthetic\"");
    DatasetSource out;
    if (d.contains("dir") && !d.contains("synthetic")) fail(field + ".dir", "only valid with \"synthetic\"");
    if (d.contains("manifest")) {
        out.kind = DatasetSourceKind::manifest;
        out.path = resolve(base, text(d["manifest"], field + ".manifest"));
    } else if (d.contains("gtsrb_root")) {
        out.kind = DatasetSourceKind::gtsrb;
        out.path = resolve(base, text(d["gtsrb_root"], field + ".gtsrb_root"));
    } else {
        out.kind = DatasetSourceKind::synthetic;
        const json& s = d["synthetic"];
        const std::string sf = field + ".synthetic";
        allow_keys(s, sf, {"num_classes", "per_class", "width", "height", "seed"});
        auto positive = [&](const char* key, int fallback, int minimum) {
            if (!s.contains(key)) return fallback;
            const long long v = integer(s[key], sf + "." + key);
            if (v < minimum || v > 100000) fail(sf + "." + key, "must be in [" + std::to_string(minimum) + ", 100000]");
            return static_cast<int>(v);
        };
        out.synthetic.num_classes = positive("num_classes", 2, 2);
        out.synthetic.per_class = positive("per_class", 1, 1);
        out.synthetic.width = positive("width", 8, 1);
        out.synthetic.height = positive("height", 8, 1);
        if (s.contains("seed")) out.synthetic.seed = seed_value(s["seed"], sf + ".seed");
        if (d.contains("dir")) out.path = resolve(base, text(d["dir"], field + ".dir"));
    }
    return out;
}

std::vector<double> number_list(const json& v, const std::string& field) {
    if (!v.is_array()) fail(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

void parse_endpoint(const json& e, const fs::path& base, RunConfig& config) {
    const std::string field = "endpoint";
    allow_keys(e, field,
               {"kind", "num_classes", "input_width", "input_height", "label", "centroids", "fit", "thresholds",
                "labels", "command", "url", "timeout_ms"});
    EndpointConfig& out = config.endpoint;
    if (!e.contains("kind")) fail(field + ".kind", "required");
    const std::string kind = text(e["kind"], field + ".kind");
    if (kind == "builtin_constant") {
        out.kind = EndpointKind::builtin_constant;
    } else if (kind == "builtin_centroid") {
        out.kind = EndpointKind::builtin_centroid;
    } else if (kind == "builtin_threshold") {
        out.kind = EndpointKind::builtin_threshold;
    } else if (kind == "external_stdio") {
        out.kind = EndpointKind::external_stdio;
    } else if (kind == "external_http") {
        out.kind = EndpointKind::external_http;
    } else {
        fail(field + ".kind", "unknown endpoint kind \"" + kind + "\"");
    }
    if (!e.contains("num_classes")) fail(field + ".num_classes", "required");
    const long long n = integer(e["num_classes"], field + ".num_classes");
    if (n < 1 || n > 100000) fail(field + ".num_classes", "must be in [1, 100000]");
    out.num_classes = static_cast<int>(n);
    for (const char* key : {"input_width", "input_height"}) {
        if (!e.contains(key)) continue;
        const long long v = integer(e[key], field + "." + key);
        if (v < 1 || v > 65535) fail(field + "." + key, "must be in [1, 65535]");
        (std::string(key) == "input_width" ? out.input_width : out.input_height) = static_cast<int>(v);
    }
    if ((out.input_width == 0) != (out.input_height == 0)) {
        fail(field + ".input_width", "input_width and input_height must be given together");
    }

    auto only_for = [&](const char* key, EndpointKind k) {
        if (e.contains(key) && out.kind != k) fail(field + "." + key, "not valid for kind \"" + kind + "\"");
    };
    only_for("label", EndpointKind::builtin_constant);
    only_for("centroids", EndpointKind::builtin_centroid);
    only_for("fit", EndpointKind::builtin_centroid);
    only_for("thresholds", EndpointKind::builtin_threshold);
    only_for("labels", EndpointKind::builtin_threshold);
    only_for("command", EndpointKind::external_stdio);
    only_for("url", EndpointKind::external_http);

    switch (out.kind) {
        case EndpointKind::builtin_constant:
            if (!e.contains("label")) fail(field + ".label", "required for builtin_constant");
            out.constant_label = static_cast<int>(integer(e["label"], field + ".label"));
            if (out.constant_label < 0 || out.constant_label >= out.num_classes) {
                fail(field + ".label", "must be in [0, num_classes)");
            }
            break;
        case EndpointKind::builtin_centroid: {
            if (e.contains("centroids") == e.contains("fit")) {
                fail(field, "builtin_centroid needs exactly one of \"centroids\" or \"fit\"");
            }
            if (e.contains("fit")) {
                const std::string f = text(e["fit"], field + ".fit");
                if (f == "train") {
                    config.centroid_fit = CentroidFit::train;
                } else if (f == "test") {
                    config.centroid_fit = CentroidFit::test;
                } else if (f == "all") {
                    config.centroid_fit = CentroidFit::all;
                } else {
                    fail(field + ".fit", "expected \"train\", \"test\" or \"all\"");
                }
            } else {
                const json& c = e["centroids"];
                if (!c.is_array() || c.size() != static_cast<std::size_t>(out.num_classes)) {
                    fail(field + ".centroids", "expected num_classes arrays");
                }
                for (std::size_t i = 0; i < c.size(); ++i) {
                    const std::string cf = field + ".centroids[" + std::to_string(i) + "]";
                    auto row = number_list(c[i], cf);
                    if (row.size() != CentroidTable::kLength) {
                        fail(cf, "expected " + std::to_string(CentroidTable::kLength) + " values (8x8 RGB)");
                    }
                    out.centroids.centroids.push_back(std::move(row));
                }
            }
            break;
        }
        case EndpointKind::builtin_threshold: {
            if (!e.contains("thresholds")) fail(field + ".thresholds", "required for builtin_threshold");
            out.thresholds = number_list(e["thresholds"], field + ".thresholds");
            if (!std::is_sorted(out.thresholds.begin(), out.thresholds.end())) {
                fail(field + ".thresholds", "must be ascending");
            }
            if (e.contains("labels")) {
                const json& l = e["labels"];
                if (!l.is_array()) fail(field + ".labels", "expected an array of integers");
                for (std::size_t i = 0; i < l.size(); ++i) {
                    const std::string lf = field + ".labels[" + std::to_string(i) + "]";
                    const long long v = integer(l[i], lf);
                    if (v < 0 || v >= out.num_classes) fail(lf, "must be in [0, num_classes)");
                    out.threshold_labels.push_back(static_cast<int>(v));
                }
            } else {
                for (std::size_t i = 0; i <= out.thresholds.size(); ++i) out.threshold_labels.push_back(static_cast<int>(i));
            }
            if (out.threshold_labels.size() != out.thresholds.size() + 1) {
                fail(field + ".labels", "expected one more label than thresholds");
            }
            for (int label : out.threshold_labels) {
                if (label >= out.num_classes) fail(field + ".labels", "label out of range for num_classes");
            }
            break;
        }
        case EndpointKind::external_stdio: {
            if (!e.contains("command")) fail(field + ".command", "required for external_stdio");
            const json& c = e["command"];
            if (!c.is_array() || c.empty()) fail(field + ".command", "expected a non-empty argv array");
            for (std::size_t i = 0; i < c.size(); ++i) {
                out.command.push_back(text(c[i], field + ".command[" + std::to_string(i) + "]"));
            }
            (void)base;
            break;
        }
        case EndpointKind::external_http:
            if (!e.contains("url")) fail(field + ".url", "required for external_http");
            out.url = text(e["url"], field + ".url");
            if (out.url.rfind("http://", 0) != 0 && out.url.rfind("https://", 0) != 0) {
                fail(field + ".url", "expected an http:// or https:// URL");
            }
            break;
    }
    if (e.contains("timeout_ms")) {
        const long long t = integer(e["timeout_ms"], field + ".timeout_ms");
        if (t < 1) fail(field + ".timeout_ms", "must be >= 1");
        out.timeout = std::chrono::milliseconds(t);
    }
}

ParamDim& find_dim(TransformSpec& spec, const std::string& name, const std::string& field) {
    for (auto& d : spec.domain.dims) {
        if (d.name == name) return d;
    }
    std::string known;
    for (const auto& d : spec.domain.dims) known += (known.empty() ? "" : ", ") + d.name;
    fail(field, "unknown dimension for " + std::string(to_string(spec.kind)) + " (expected one of: " + known + ")");
}

void set_bounds(ParamDim& dim, const json& v, const std::string& field) {
    double low = 0.0, high = 0.0;
    if (dim.kind == DimKind::categorical) {
        json choices;
        if (v.is_array()) {
            choices = v;
        } else if (v.is_object()) {
            allow_keys(v, field, {"choices"});
            if (!v.contains("choices")) fail(field + ".choices", "required for a categorical dimension");
            choices = v["choices"];
        } else {
            fail(field, "expected a list of choices");
        }
        if (!choices.is_array() || choices.empty()) fail(field, "expected a non-empty list of choices");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < choices.size(); ++i) {
            out.push_back(text(choices[i], field + "[" + std::to_string(i) + "]"));
        }
        if (dim.name == "color") {
            for (std::size_t i = 0; i < out.size(); ++i) {
                try {
                    (void)parse_color(out[i]);
                } catch (const Error& e) {
                    fail(field + "[" + std::to_string(i) + "]", e.what());
                }
            }
        } else {
            for (std::size_t i = 0; i < out.size(); ++i) {
                if (std::find(dim.choices.begin(), dim.choices.end(), out[i]) == dim.choices.end()) {
                    fail(field + "[" + std::to_string(i) + "]", "unknown choice \"" + out[i] + "\"");
                }
            }
        }
        dim.choices = std::move(out);
        dim.low = 0.0;
        dim.high = static_cast<double>(dim.choices.size() - 1);
        return;
    }
    if (v.is_number()) {
        low = high = number(v, field);
    } else if (v.is_array()) {
        if (v.size() != 2) fail(field, "expected [low, high]");
        low = number(v[0], field + "[0]");
        high = number(v[1], field + "[1]");
    } else if (v.is_object()) {
        allow_keys(v, field, {"low", "high"});
        if (!v.contains("low") || !v.contains("high")) fail(field, "expected {\"low\", \"high\"}");
        low = number(v["low"], field + ".low");
        high = number(v["high"], field + ".high");
    } else {
        fail(field, "expected [low, high], {\"low\", \"high\"} or a single value");
    }
    if (low > high) fail(field, "low > high");
    if ((dim.kind == DimKind::integer || dim.kind == DimKind::binary) &&
        (low != std::floor(low) || high != std::floor(high))) {
        fail(field, "bounds must be whole numbers");
    }
    if (dim.kind == DimKind::binary && (low < 0.0 || high > 1.0)) fail(field, "binary bounds must lie in [0, 1]");
    dim.low = low;
    dim.high = high;
}

TransformSpec parse_transform(const json& t, const std::string& field) {
    allow_keys(t, field, {"kind", "domain", "includes_identity", "options"});
    if (!t.contains("kind")) fail(field + ".kind", "required");
    const std::string name = text(t["kind"], field + ".kind");
    const auto kind = parse_transform_kind(name);
    if (!kind) {
        std::string known;
        for (auto k : all_transform_kinds()) known += (known.empty() ? "" : ", ") + std::string(to_string(k));
        fail(field + ".kind", "unknown transform \"" + name + "\" (expected one of: " + known + ")");
    }
    TransformOptions options;
    if (t.contains("options")) {
        const json& o = t["options"];
        allow_keys(o, field + ".options", {"grid_size"});
        if (o.contains("grid_size")) {
            if (*kind != TransformKind::adaptive_brightness) {
                fail(field + ".options.grid_size", "only valid for adaptive_brightness");
            }
            const long long m = integer(o["grid_size"], field + ".options.grid_size");
            if (m < 1 || m > 16) fail(field + ".options.grid_size", "must be in [1, 16]");
            options.grid_size = static_cast<int>(m);
        }
    }
    TransformSpec spec = make_transform(*kind, options);
    if (t.contains("domain")) {
        const json& d = t["domain"];
        if (!d.is_object()) fail(field + ".domain", "expected an object keyed by dimension name");
        for (auto it = d.begin(); it != d.end(); ++it) {
            const std::string df = field + ".domain." + it.key();
            if (it.key() == "*") {
                for (auto& dim : spec.domain.dims) set_bounds(dim, it.value(), df);
            } else {
                set_bounds(find_dim(spec, it.key(), df), it.value(), df);
            }
        }
    }
    spec.domain.includes_identity = spec.domain.contains(identity_point(spec));
    if (t.contains("includes_identity")) {
        if (!t["includes_identity"].is_boolean()) fail(field + ".includes_identity", "expected a boolean");
        const bool claimed = t["includes_identity"].get<bool>();
        if (claimed && !spec.domain.includes_identity) {
            fail(field + ".includes_identity", "the identity point lies outside this domain");
        }
        spec.domain.includes_identity = claimed;
    }
    try {
        check_schema(spec);
    } catch (const ConfigError& e) {
        fail(field, e.what());
    }
    return spec;
}

SearchBudget parse_budget(const json& b, const std::string& field) {
    allow_keys(b, field, {"strategy", "grid_steps", "random_candidates", "refine_rounds"});
    SearchBudget out;
    if (b.contains("strategy")) {
        try {
            out.strategy = parse_strategy(text(b["strategy"], field + ".strategy"));
        } catch (const ConfigError& e) {
            fail(field + ".strategy", e.what());
        }
    }
    auto bounded = [&](const json& v, const std::string& f) {
        const long long x = integer(v, f);
        if (x < 1 || x > 1000000) fail(f, "must be in [1, 1000000]");
        return static_cast<int>(x);
    };
    if (b.contains("grid_steps")) {
        const json& g = b["grid_steps"];
        out.grid_steps.clear();
        if (g.is_array()) {
            if (g.empty()) fail(field + ".grid_steps", "must not be empty");
            for (std::size_t i = 0; i < g.size(); ++i) {
                out.grid_steps.push_back(bounded(g[i], field + ".grid_steps[" + std::to_string(i) + "]"));
            }
        } else {
            out.grid_steps.push_back(bounded(g, field + ".grid_steps"));
        }
    }
    if (b.contains("random_candidates")) {
        out.random_candidates = bounded(b["random_candidates"], field + ".random_candidates");
    }
    if (b.contains("refine_rounds")) {
        const long long r = integer(b["refine_rounds"], field + ".refine_rounds");
        if (r < 0 || r > 1000000) fail(field + ".refine_rounds", "must be in [0, 1000000]");
        out.refine_rounds = static_cast<int>(r);
    }
    return out;
}

PropertySpec parse_property(const json& p, const std::string& field) {
    allow_keys(p, field, {"id", "transforms", "budget", "seed"});
    PropertySpec out;
    if (!p.contains("id")) fail(field + ".id", "required");
    out.property_id = text(p["id"], field + ".id");
    if (out.property_id.empty()) fail(field + ".id", "must not be empty");
    if (out.property_id.find_first_of(",\n\r\"") != std::string::npos) {
        fail(field + ".id", "must not contain commas, quotes or line breaks");
    }
    if (!p.contains("transforms")) fail(field + ".transforms", "required");
    const json& ts = p["transforms"];
    if (!ts.is_array() || ts.empty()) fail(field + ".transforms", "expected a non-empty array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out.transforms.push_back(parse_transform(ts[i], field + ".transforms[" + std::to_string(i) + "]"));
    }
    if (p.contains("budget")) out.budget = parse_budget(p["budget"], field + ".budget");
    if (p.contains("seed")) out.seed = seed_value(p["seed"], field + ".seed");
    try {
        check_property(out);
    } catch (const ConfigError& e) {
        fail(field, e.what());
    }
    return out;
}

}  // namespace

const PropertySpec& RunConfig::property(const std::string& id) const {
    for (const auto& p : properties) {
        if (p.property_id == id) return p;
    }
    throw ConfigError("unknown property \"" + id + "\"");
}

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
    allow_keys(doc, "config", {"dataset", "endpoint", "properties", "global_seed", "workers", "output_dir", "split"});
    RunConfig config;
    if (!doc.contains("dataset")) fail("dataset", "required");
    config.dataset = parse_dataset(doc["dataset"], base_dir);
    if (!doc.contains("endpoint")) fail("endpoint", "required");
    parse_endpoint(doc["endpoint"], base_dir, config);
    if (!doc.contains("properties")) fail("properties", "required");
    const json& ps = doc["properties"];
    if (!ps.is_array() || ps.empty()) fail("properties", "expected a non-empty array");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        config.properties.push_back(parse_property(ps[i], "properties[" + std::to_string(i) + "]"));
    }
    if (doc.contains("global_seed")) config.global_seed = seed_value(doc["global_seed"], "global_seed");
    if (doc.contains("workers")) {
        const long long w = integer(doc["workers"], "workers");
        if (w < 1 || w > 1024) fail("workers", "must be in [1, 1024]");
        config.workers = static_cast<int>(w);
    }
    if (doc.contains("output_dir")) config.output_dir = resolve(base_dir, text(doc["output_dir"], "output_dir"));
    else config.output_dir = base_dir / "out";
    if (doc.contains("split")) config.split = split_value(doc["split"], "split");
    validate_config(config);
    return config;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
    return parse_config(doc, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void validate_config(const RunConfig& config) {
    if (config.properties.empty()) fail("properties", "at least one property is required");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < config.properties.size(); ++i) {
        const auto& id = config.properties[i].property_id;
        if (!seen.insert(id).second) {
            fail("properties[" + std::to_string(i) + "].id", "duplicate property id \"" + id + "\"");
        }
    }
    if (config.workers < 1) fail("workers", "must be >= 1");
    if (config.output_dir.empty()) fail("output_dir", "must not be empty");
    if (config.dataset.kind == DatasetSourceKind::synthetic &&
        config.endpoint.num_classes < config.dataset.synthetic.num_classes) {
        fail("endpoint.num_classes", "smaller than the synthetic dataset's class count");
    }
}

DatasetManifest load_dataset(const RunConfig& config) {
    switch (config.dataset.kind) {
        case DatasetSourceKind::manifest:
            return load_manifest(config.dataset.path);
        case DatasetSourceKind::gtsrb:
            return import_gtsrb(config.dataset.path);
        case DatasetSourceKind::synthetic: {
            const fs::path dir = config.dataset.path.empty() ? config.output_dir / "dataset" : config.dataset.path;
            return generate_synthetic(config.dataset.synthetic, dir);
        }
    }
    throw ConfigError("unknown dataset source");
}

EndpointConfig resolve_endpoint(const RunConfig& config, const DatasetManifest& dataset) {
    EndpointConfig endpoint = config.endpoint;
    if (dataset.num_classes > endpoint.num_classes) {
        throw ConfigError("endpoint.num_classes: " + std::to_string(endpoint.num_classes) +
                          " is smaller than the dataset's " + std::to_string(dataset.num_classes) + " classes");
    }
    if (config.centroid_fit != CentroidFit::none) {
        DatasetManifest subset = dataset;
        subset.num_classes = endpoint.num_classes;
        if (config.centroid_fit != CentroidFit::all) {
            subset.samples = dataset.samples_in(config.centroid_fit == CentroidFit::train ? Split::train : Split::test);
        }
        endpoint.centroids = fit_centroid(subset);
    }
    return endpoint;
}

}  // namespace rtk
