// Acceptance runner: one PASS/FAIL line per criterion.
//
//   rtk_acceptance [--only NAME]...
//
// Exit status is 0 when every selected criterion passes.

#include <chrono>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "invariants.hpp"
#include "rtk/cli.hpp"
#include "rtk/codec.hpp"
#include "rtk/reporting.hpp"

namespace fs = std::filesystem;

namespace rtk::acceptance {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 3) {
    std::ostringstream s;
    s << std::setprecision(precision) << std::fixed << v;
    return s.str();
}

// ---------------------------------------------------------------------------
// Brute-force reimplementation of the metric for intensity datasets.

struct OracleClassifier {
    bool centroid = false;
    std::vector<double> thresholds;
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;  // 8x8x3 values per class

    int classify(const std::vector<float>& values) const {
        if (!centroid) {
            double sum = 0.0;
            for (float v : values) sum += v;
            const double mean = sum / static_cast<double>(values.size());
            std::size_t above = 0;
            for (double t : thresholds) above += mean > t;
            return labels[above];
        }
        int best = 0;
        double best_dist = 0.0;
        for (std::size_t k = 0; k < centroids.size(); ++k) {
            double dist = 0.0;
            for (std::size_t i = 0; i < values.size(); ++i) {
                const double d = values[i] - centroids[k][i];
                dist += d * d;
            }
            if (k == 0 || dist < best_dist) {
                best = static_cast<int>(k);
                best_dist = dist;
            }
        }
        return best;
    }
};

float oracle_clip(double v) { return static_cast<float>(std::min(1.0, std::max(0.0, v))); }

struct OracleProperty {
    std::string id;
    bool noise = false;  // gaussian sigma, else brightness factor
    double low = 0.0, high = 0.0;
    bool random = false;
    int count = 0;  // grid steps or random candidates
    std::uint64_t seed = 0;
};

std::optional<double> oracle_score(const std::vector<std::pair<std::string, int>>& samples,
                                   const std::map<std::string, std::vector<float>>& pixels,
                                   const OracleClassifier& classifier, const OracleProperty& p,
                                   std::uint64_t global_seed) {
    const double identity = p.noise ? 0.0 : 1.0;
    const bool with_identity = p.low <= identity && identity <= p.high;
    std::size_t correct = 0, robust = 0;
    for (const auto& [id, label] : samples) {
        const std::vector<float>& x = pixels.at(id);
        if (classifier.classify(x) != label) continue;
        ++correct;
        bool survived = true;
        const int total = p.count + (with_identity ? 1 : 0);
        for (int i = 0; i < total && survived; ++i) {
            RandomStream stream = RandomStream::derive(global_seed ^ p.seed, id, p.id, static_cast<std::uint64_t>(i));
            double theta = identity;
            const int k = with_identity ? i - 1 : i;
            if (k >= 0) {
                if (p.random) {
                    theta = p.low + stream.next_uniform() * (p.high - p.low);
                } else if (p.count == 1 || p.low == p.high) {
                    theta = p.low;
                } else {
                    theta = k == p.count - 1 ? p.high : p.low + (p.high - p.low) * k / (p.count - 1);
                }
            }
            std::vector<float> y(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) {
                y[j] = p.noise ? oracle_clip(x[j] + stream.next_normal(theta)) : oracle_clip(x[j] * theta);
            }
            if (classifier.classify(y) != label) survived = false;
        }
        robust += survived;
    }
    if (correct == 0) return std::nullopt;
    return static_cast<double>(robust) / static_cast<double>(correct);
}

Outcome metric_oracle() {
    const auto start = Clock::now();
    testing::TempDir dir("rtk_accept_oracle");
    int configs = 0, matches = 0;
    double lowest = 1.0;
    std::string mismatch;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const SyntheticSpec synth{4, 25, 8, 8, seed};
        const DatasetManifest manifest = generate_synthetic(synth, dir / ("seed" + std::to_string(seed)));
        std::vector<std::pair<std::string, int>> samples;
        std::map<std::string, std::vector<float>> pixels;
        std::vector<Image> images;
        std::vector<int> labels;
        for (const auto& s : manifest.samples_in(Split::test)) {
            const Image img = read_image(s.image_path);
            samples.emplace_back(s.sample_id, s.label);
            pixels[s.sample_id] = std::vector<float>(img.values().begin(), img.values().end());
            images.push_back(img);
            labels.push_back(s.label);
        }

        testing::Gen gen(seed * 7919);
        // Thresholds between class levels, jittered so some samples sit near a boundary.
        OracleClassifier threshold;
        EndpointConfig threshold_endpoint;
        threshold_endpoint.kind = EndpointKind::builtin_threshold;
        threshold_endpoint.num_classes = 4;
        for (int k = 1; k < 4; ++k) threshold.thresholds.push_back(k / 4.0 + gen.uniform(-0.09, 0.09));
        threshold.labels = {0, 1, 2, 3};
        threshold_endpoint.thresholds = threshold.thresholds;
        threshold_endpoint.threshold_labels = threshold.labels;

        OracleClassifier centroid;
        centroid.centroid = true;
        centroid.centroids.assign(4, std::vector<double>(192, 0.0));
        std::vector<int> counts(4, 0);
        for (const auto& [id, label] : samples) {
            const auto& x = pixels.at(id);
            for (std::size_t i = 0; i < x.size(); ++i) centroid.centroids[static_cast<std::size_t>(label)][i] += x[i];
            ++counts[static_cast<std::size_t>(label)];
        }
        for (int k = 0; k < 4; ++k) {
            for (auto& v : centroid.centroids[static_cast<std::size_t>(k)]) v /= counts[static_cast<std::size_t>(k)];
        }
        EndpointConfig centroid_endpoint;
        centroid_endpoint.kind = EndpointKind::builtin_centroid;
        centroid_endpoint.num_classes = 4;
        centroid_endpoint.centroids = fit_centroid(images, labels, 4);

        const OracleProperty bright{"brightness", false, gen.uniform(0.6, 0.9), gen.uniform(1.1, 1.4), false,
                                    gen.integer(3, 9), gen.u64()};
        const OracleProperty noise{"gaussian", true, 0.0, gen.uniform(0.05, 0.3), true, gen.integer(10, 30),
                                   gen.u64()};
        const std::uint64_t global_seed = gen.u64();

        for (const auto* op : {&bright, &noise}) {
            PropertySpec spec;
            spec.property_id = op->id;
            spec.seed = op->seed;
            TransformSpec t = make_transform(op->noise ? TransformKind::gaussian_noise : TransformKind::brightness);
            t.domain.dims[0].low = op->low;
            t.domain.dims[0].high = op->high;
            t.domain.includes_identity = true;
            spec.transforms = {t};
            spec.budget = op->random ? SearchBudget{SearchStrategy::random, {1}, op->count, 0}
                                     : SearchBudget{SearchStrategy::grid, {op->count}, 0, 0};
            for (const auto& [endpoint, oracle] :
                 {std::pair{&threshold_endpoint, &threshold}, std::pair{&centroid_endpoint, &centroid}}) {
                EvaluationOptions options;
                options.global_seed = global_seed;
                options.workers = 2;
                const auto harness = evaluate_property(manifest, spec, *endpoint, options).robustness_score;
                const auto expected = oracle_score(samples, pixels, *oracle, *op, global_seed);
                ++configs;
                if (expected) lowest = std::min(lowest, *expected);
                if (harness == expected) {
                    ++matches;
                } else if (mismatch.empty()) {
                    mismatch = "; first mismatch seed " + std::to_string(seed) + " " + op->id + ": harness " +
                               (harness ? fmt(*harness, 6) : "undefined") + " vs oracle " +
                               (expected ? fmt(*expected, 6) : "undefined");
                }
            }
        }
    }
    const double elapsed = seconds_since(start);
    return {matches == configs && configs >= 5 && elapsed < 30.0,
            std::to_string(matches) + "/" + std::to_string(configs) +
                " seeded configurations equal the brute-force score exactly (lowest score " + fmt(lowest) + "), " +
                fmt(elapsed) + " s (limit 30 s)" +
                mismatch};
}

Outcome delta_arithmetic() {
    struct Case {
        double combined;
        std::vector<double> parts;
        double expected;
    };
    const std::vector<Case> cases{{85.5, {94.7, 93.0}, -7.5}, {93.5, {96.1, 96.9}, -3.4}};
    bool pass = true;
    std::string detail;
    for (const auto& c : cases) {
        const auto d = combination_delta(c.combined, c.parts);
        const bool ok = d && *d == c.expected;
        pass = pass && ok;
        std::ostringstream s;
        s << "(" << c.parts[0] << ", " << c.parts[1] << ", " << c.combined << ") -> "
          << (d ? fmt(*d, 6) : "undefined") << " expected " << c.expected << (ok ? " ok" : " MISMATCH");
        detail += (detail.empty() ? "" : "; ") + s.str();
    }
    return {pass, detail + " (tolerance 0)"};
}

Outcome score_semantics() {
    const auto t = testing::check_score_semantics(2024, 10000);
    // End to end: misclassified originals stay out of the denominator.
    testing::Gen gen(77);
    std::size_t runs = 0, bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
        testing::MemoryDataset ds(2);
        for (int i = 0; i < 20; ++i) {
            ds.add("s" + std::to_string(i), gen.integer(0, 1),
                   Image(4, 4, static_cast<float>(gen.uniform(0.1, 0.9))));
        }
        PropertySpec p;
        p.property_id = "brightness";
        p.transforms = {make_transform(TransformKind::brightness)};
        p.budget.grid_steps = {gen.integer(2, 11)};
        EvaluationOptions o;
        o.loader = ds.loader();
        const auto r = evaluate_property(ds.manifest, p, testing::threshold_endpoint(0.5), o);
        std::size_t correct = 0, robust = 0;
        for (const auto& v : r.verdicts) {
            if (v.original_prediction.label != v.label) {
                bad += v.robust != Robustness::not_applicable;
                continue;
            }
            ++correct;
            robust += v.robust == Robustness::robust;
        }
        ++runs;
        const bool score_ok = correct == 0 ? !r.robustness_score
                                           : r.robustness_score && *r.robustness_score ==
                                                                       static_cast<double>(robust) / correct;
        bad += !score_ok || r.robust_count > r.correct_count;
    }
    return {t.ok() && bad == 0, std::to_string(t.cases) + " random verdict sets and " + std::to_string(runs) +
                                    " evaluations, " + std::to_string(t.violations + bad) + " violations" +
                                    (t.ok() ? "" : " (" + t.first + ")")};
}

Outcome composition_dominance() {
    const auto t = testing::check_composition_dominance(5150, 100);
    return {t.ok() && t.cases == 100, std::to_string(t.cases) + " randomized nested configurations, " +
                                          std::to_string(t.violations) + " violations" +
                                          (t.ok() ? "" : " (" + t.first + ")")};
}

Outcome transform_identity() {
    const auto t = testing::check_transform_identities(8080, 10000);
    return {t.ok() && t.cases == 10000, std::to_string(t.cases) + " randomized applications, " +
                                            std::to_string(t.violations) + " violations" +
                                            (t.ok() ? "" : " (" + t.first + ")")};
}

Outcome budget_invariants() {
    const auto t = testing::check_budget_invariants(9090, 1000);
    return {t.ok() && t.cases == 1000, std::to_string(t.cases) + " randomized cases, " +
                                           std::to_string(t.violations) + " violations" +
                                           (t.ok() ? "" : " (" + t.first + ")")};
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        files[fs::relative(e.path(), root).generic_string()] = s.str();
    }
    return files;
}

Outcome determinism() {
    testing::TempDir dir("rtk_accept_det");
    const nlohmann::json config = nlohmann::json::parse(R"({
      "dataset": {"synthetic": {"num_classes": 4, "per_class": 10, "width": 12, "height": 12, "seed": 3},
                  "dir": "data"},
      "endpoint": {"kind": "builtin_centroid", "num_classes": 4, "fit": "all"},
      "global_seed": 12345,
      "properties": [
        {"id": "noise", "transforms": [{"kind": "gaussian_noise", "domain": {"sigma": [0, 0.25]}}],
         "budget": {"strategy": "random", "random_candidates": 30}},
        {"id": "rotate", "transforms": [{"kind": "rotate"}], "budget": {"grid_steps": 7}},
        {"id": "sticker", "transforms": [{"kind": "sticker", "domain": {"w": [0.2, 0.5], "h": [0.2, 0.5]}}],
         "budget": {"strategy": "random", "random_candidates": 40}},
        {"id": "bright+l0", "transforms": [{"kind": "brightness"}, {"kind": "pixel_l0", "domain": {"k": [0, 30]}}],
         "budget": {"strategy": "grid_then_refine", "grid_steps": 3, "refine_rounds": 5}}
      ]
    })");
    std::ofstream(dir / "config.json") << config.dump(2);
    std::ostringstream sink;
    const std::string cfg = (dir / "config.json").string();
    const int a = run_cli({"evaluate", "--config", cfg, "--out", (dir / "w1").string(), "--workers", "1"}, sink, sink);
    const int b = run_cli({"evaluate", "--config", cfg, "--out", (dir / "w8").string(), "--workers", "8"}, sink, sink);
    if (a != 0 || b != 0) return {false, "evaluate exited " + std::to_string(a) + " / " + std::to_string(b)};
    const auto t1 = tree(dir / "w1");
    const auto t8 = tree(dir / "w8");
    std::size_t differing = 0;
    for (const auto& [name, bytes] : t1) {
        const auto it = t8.find(name);
        differing += it == t8.end() || it->second != bytes;
    }
    differing += t8.size() > t1.size() ? t8.size() - t1.size() : 0;
    std::size_t failures = 0;
    for (const auto& [name, bytes] : t1) failures += name.ends_with("_perturbed.png");
    return {differing == 0 && !t1.empty(), std::to_string(t1.size()) + " files (" + std::to_string(failures) +
                                               " gallery counterexamples) compared between 1 and 8 workers, " +
                                               std::to_string(differing) + " differ"};
}

Outcome throughput() {
    testing::MemoryDataset ds(4);
    std::vector<Image> images;
    std::vector<int> labels;
    const SyntheticSpec synth{4, 25, 32, 32, 1};
    for (int k = 0; k < 4; ++k) {
        for (int i = 0; i < 25; ++i) {
            images.push_back(synthetic_image(synth, k, i));
            labels.push_back(k);
            ds.add(synthetic_sample_id(k, i), k, images.back());
        }
    }
    EndpointConfig endpoint;
    endpoint.kind = EndpointKind::builtin_centroid;
    endpoint.num_classes = 4;
    endpoint.centroids = fit_centroid(images, labels, 4);
    PropertySpec p;
    p.property_id = "noise";
    p.transforms = {make_transform(TransformKind::gaussian_noise)};
    p.transforms[0].domain.dims[0].high = 0.02;
    p.budget = {SearchStrategy::random, {1}, 199, 0};
    EvaluationOptions o;
    o.loader = ds.loader();
    const auto start = Clock::now();
    const auto r = evaluate_property(ds.manifest, p, endpoint, o);
    const double elapsed = seconds_since(start);
    std::uint64_t candidates = 0;
    for (const auto& v : r.verdicts) candidates += v.candidates_evaluated;
    return {candidates == 100u * 200u && elapsed < 60.0,
            std::to_string(r.total) + " samples x " + std::to_string(candidates / std::max<std::size_t>(r.total, 1)) +
                " candidates (32x32, 1 worker) in " + fmt(elapsed) + " s (limit 60 s)"};
}

}  // namespace
}  // namespace rtk::acceptance

int main(int argc, char** argv) {
    using namespace rtk::acceptance;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"metric_oracle", metric_oracle},
        {"delta_arithmetic", delta_arithmetic},
        {"score_semantics", score_semantics},
        {"composition_dominance", composition_dominance},
        {"transform_identity", transform_identity},
        {"budget_invariants", budget_invariants},
        {"determinism", determinism},
        {"throughput", throughput},
    };

    CLI::App app{"Acceptance criteria runner"};
    std::vector<std::string> only;
    app.add_option("--only", only, "Run only the named criteria");
    CLI11_PARSE(app, argc, argv);
    for (const auto& name : only) {
        if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; })) {
            std::cerr << "unknown criterion '" << name << "'\n";
            return 2;
        }
    }

    bool all = true;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        all = all && o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return all ? 0 : 1;
}
