#include "rtk/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "rtk/codec.hpp"
#include "rtk/parallel.hpp"

namespace fs = std::filesystem;

namespace rtk {

std::string format_fixed6(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

namespace {

std::string format_g6(double value) {
    if (!std::isfinite(value)) return "null";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

std::string optional_fixed6(const std::optional<double>& v) { return v ? format_fixed6(*v) : "undefined"; }

std::string xml_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_header(int width, int height) {
    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    return s.str();
}

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string path_safe(const std::string& id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.' || c == '+';
        out += ok ? c : '_';
    }
    if (out.empty() || out == "." || out == "..") out = "_" + out;
    return out;
}

nlohmann::json theta_json(const std::vector<std::vector<double>>& theta) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& slice : theta) out.push_back(slice);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Sweeps

std::size_t resolve_dim(const PropertySpec& spec, const std::string& name) {
    std::vector<std::size_t> hits;
    std::size_t flat = 0;
    for (std::size_t t = 0; t < spec.transforms.size(); ++t) {
        const auto& transform = spec.transforms[t];
        for (const auto& dim : transform.domain.dims) {
            if (name == dim.name || name == std::string(to_string(transform.kind)) + "." + dim.name ||
                name == std::to_string(t) + "." + dim.name) {
                hits.push_back(flat);
            }
            ++flat;
        }
    }
    if (hits.empty()) throw ConfigError("property '" + spec.property_id + "' has no dimension '" + name + "'");
    if (hits.size() > 1) {
        throw ConfigError("dimension '" + name + "' is ambiguous in property '" + spec.property_id +
                          "'; qualify it as <kind>.<name>");
    }
    return hits[0];
}

PropertySpec pin_all_but(const PropertySpec& spec, std::size_t dim) {
    PropertySpec out = spec;
    std::size_t flat = 0;
    for (auto& transform : out.transforms) {
        const auto identity = identity_point(transform);
        for (std::size_t d = 0; d < transform.domain.dims.size(); ++d, ++flat) {
            if (flat == dim) continue;
            ParamDim& p = transform.domain.dims[d];
            double value = identity[d];
            if (!p.contains(value)) {
                value = p.kind == DimKind::categorical ? 0.0 : p.low + (p.high - p.low) / 2.0;
                if (p.kind == DimKind::integer || p.kind == DimKind::binary) value = std::round(value);
            }
            if (p.kind == DimKind::categorical) {
                p.choices = {p.choices[static_cast<std::size_t>(value)]};
                p.low = p.high = 0.0;
            } else {
                p.low = p.high = value;
            }
        }
        transform.domain.includes_identity = transform.domain.contains(identity);
    }
    return out;
}

SweepCurve sweep(const DatasetManifest& dataset, const PropertySpec& spec, const EndpointConfig& endpoint,
                 int steps, const EvaluationOptions& options) {
    if (steps < 1) throw ConfigError("sweep steps must be >= 1");
    const auto dims = spec.dims();
    std::vector<std::size_t> free;
    for (std::size_t d = 0; d < dims.size(); ++d) {
        const auto& p = dims[d];
        const bool pinned = p.kind == DimKind::categorical ? p.choices.size() == 1 : p.low == p.high;
        if (!pinned) free.push_back(d);
    }
    if (free.size() != 1) {
        throw ConfigError("sweep needs exactly one free dimension, property '" + spec.property_id + "' has " +
                          std::to_string(free.size()));
    }
    const std::size_t axis = free[0];
    const ParamDim& dim = dims[axis];

    std::vector<double> values;
    if (dim.kind == DimKind::categorical) {
        for (std::size_t i = 0; i < dim.choices.size(); ++i) values.push_back(static_cast<double>(i));
    } else if (dim.kind == DimKind::binary) {
        for (double v = dim.low; v <= dim.high; v += 1.0) values.push_back(v);
    } else {
        for (int i = 0; i < steps; ++i) {
            double v = (i == steps - 1 && steps > 1) ? dim.high
                                                     : dim.low + (dim.high - dim.low) * i / std::max(steps - 1, 1);
            if (dim.kind == DimKind::integer) v = std::round(v);
            if (values.empty() || values.back() < v) values.push_back(v);
        }
    }

    std::vector<double> base(dims.size());
    for (std::size_t d = 0; d < dims.size(); ++d) base[d] = dims[d].kind == DimKind::categorical ? 0.0 : dims[d].low;

    const auto samples = dataset.samples_in(options.split);
    // Per sample: empty when misclassified originally, else one flag per value.
    std::vector<std::vector<char>> outcomes(samples.size());
    const std::uint64_t seed = options.global_seed ^ spec.seed;
    const std::size_t batch = std::max<std::size_t>(options.batch_size, 1);

    parallel_for_each_index(
        samples.size(), options.workers, [&] { return make_classifier(endpoint); },
        [&](std::unique_ptr<Classifier>& classifier, std::size_t i) {
            const auto& sample = samples[i];
            const Image image = options.loader(sample);
            const Image prepared = prepare_for_endpoint(image, endpoint);
            if (classifier->predict_batch(std::span(&prepared, 1)).at(0).label != sample.label) return;
            const bool flip_allowed = dataset.flip_invariant(sample.label);
            std::vector<char> ok;
            for (std::size_t start = 0; start < values.size(); start += batch) {
                const std::size_t end = std::min(values.size(), start + batch);
                std::vector<Image> inputs;
                for (std::size_t j = start; j < end; ++j) {
                    auto theta = base;
                    theta[axis] = values[j];
                    const auto stream = RandomStream::derive(seed, sample.sample_id, spec.property_id, j);
                    inputs.push_back(prepare_for_endpoint(perturb(spec, image, theta, stream, flip_allowed), endpoint));
                }
                for (const auto& p : classifier->predict_batch(inputs)) ok.push_back(p.label == sample.label);
            }
            outcomes[i] = std::move(ok);
        });

    SweepCurve curve;
    curve.property_id = spec.property_id;
    curve.dim_name = dim.name;
    std::size_t correct = 0;
    for (const auto& o : outcomes) correct += o.empty() ? 0 : 1;
    for (std::size_t j = 0; j < values.size(); ++j) {
        std::size_t still = 0;
        for (const auto& o : outcomes) still += (!o.empty() && o[j]) ? 1 : 0;
        curve.points.push_back(
            {values[j], correct ? static_cast<double>(still) / static_cast<double>(correct) : 0.0, correct});
    }
    return curve;
}

std::string sweep_csv(const SweepCurve& curve) {
    std::string out = "theta_value,robustness_fraction,evaluated_samples\n";
    for (const auto& p : curve.points) {
        out += format_fixed6(p.theta_value) + "," + format_fixed6(p.robustness_fraction) + "," +
               std::to_string(p.evaluated_samples) + "\n";
    }
    return out;
}

std::string sweep_svg(const SweepCurve& curve) {
    constexpr int kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;
    std::ostringstream s;
    s << svg_header(kW, kH);
    s << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(curve.property_id + ": robustness vs " + curve.dim_name) << "</text>\n";
    const double plot_w = kW - kLeft - kRight;
    const double plot_h = kH - kTop - kBottom;
    s << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
      << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double y = kH - kBottom - plot_h * t / 4.0;
        s << "<text x=\"" << kLeft - 6 << "\" y=\"" << coord(y + 4) << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
          << "font-size=\"10\">" << format_g6(t / 4.0) << "</text>\n";
    }
    if (!curve.points.empty()) {
        const double lo = curve.points.front().theta_value;
        const double hi = curve.points.back().theta_value;
        const double span = hi > lo ? hi - lo : 1.0;
        auto px = [&](double v) { return kLeft + (curve.points.size() == 1 ? plot_w / 2 : (v - lo) / span * plot_w); };
        auto py = [&](double f) { return kH - kBottom - f * plot_h; };
        s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < curve.points.size(); ++i) {
            s << (i ? " " : "") << coord(px(curve.points[i].theta_value)) << ","
              << coord(py(curve.points[i].robustness_fraction));
        }
        s << "\"/>\n";
        for (const auto& p : curve.points) {
            s << "<circle cx=\"" << coord(px(p.theta_value)) << "\" cy=\"" << coord(py(p.robustness_fraction))
              << "\" r=\"3\" fill=\"steelblue\"/>\n";
        }
        s << "<text x=\"" << kLeft << "\" y=\"" << kH - kBottom + 16 << "\" font-family=\"sans-serif\" font-size=\"10\">"
          << format_g6(lo) << "</text>\n";
        s << "<text x=\"" << kW - kRight << "\" y=\"" << kH - kBottom + 16
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << format_g6(hi) << "</text>\n";
    }
    s << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << xml_escape(curve.dim_name) << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

// ---------------------------------------------------------------------------
// Deltas

std::vector<DeltaEntry> delta_matrix(std::span<const PropertyResult> parts, std::span<const PairResult> pairs) {
    auto find = [&](const std::string& id) -> const PropertyResult* {
        for (const auto& p : parts) {
            if (p.property_id == id) return &p;
        }
        return nullptr;
    };
    std::vector<DeltaEntry> out;
    for (const auto& pair : pairs) {
        const PropertyResult* a = find(pair.first);
        const PropertyResult* b = find(pair.second);
        if (!a || !b) {
            throw ReportError("pair (" + pair.first + ", " + pair.second + ") is missing part result '" +
                              (a ? pair.second : pair.first) + "'");
        }
        DeltaEntry e;
        e.first = pair.first;
        e.second = pair.second;
        e.first_pct = score_percent(*a);
        e.second_pct = score_percent(*b);
        e.combined_pct = score_percent(pair.combined);
        const PropertyResult both[] = {*a, *b};
        e.delta = combination_delta(pair.combined, both);
        out.push_back(std::move(e));
    }
    return out;
}

std::string delta_matrix_csv(std::span<const DeltaEntry> entries) {
    std::string out = "property_a,property_b,score_a_pct,score_b_pct,combined_pct,delta_pct\n";
    for (const auto& e : entries) {
        out += e.first + "," + e.second + "," + optional_fixed6(e.first_pct) + "," + optional_fixed6(e.second_pct) +
               "," + optional_fixed6(e.combined_pct) + "," + optional_fixed6(e.delta) + "\n";
    }
    return out;
}

std::string delta_matrix_svg(std::span<const DeltaEntry> entries) {
    constexpr int kW = 640, kLeft = 40, kRight = 40;
    const int height = 90 + 24 * static_cast<int>(entries.size());
    double extent = 1.0;
    for (const auto& e : entries) {
        if (e.delta) extent = std::max(extent, std::abs(*e.delta));
    }
    const double mid = kW / 2.0;
    const double half = (kW - kLeft - kRight) / 2.0;
    std::ostringstream s;
    s << svg_header(kW, height);
    s << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << "Robustness change of combined properties (percentage points)</text>\n";
    s << "<text x=\"" << kLeft << "\" y=\"44\" font-family=\"sans-serif\" font-size=\"11\">&#8592; WORSE</text>\n";
    s << "<text x=\"" << kW - kRight << "\" y=\"44\" text-anchor=\"end\" font-family=\"sans-serif\" "
      << "font-size=\"11\">BETTER &#8594;</text>\n";
    s << "<line x1=\"" << coord(mid) << "\" y1=\"52\" x2=\"" << coord(mid) << "\" y2=\"" << height - 20
      << "\" stroke=\"gray\" stroke-dasharray=\"4,3\"/>\n";
    int y = 70;
    for (const auto& e : entries) {
        const std::string label = e.first + " + " + e.second + ": " + (e.delta ? format_g6(*e.delta) : "undefined");
        if (e.delta) {
            s << "<circle cx=\"" << coord(mid + *e.delta / extent * half) << "\" cy=\"" << y
              << "\" r=\"4\" fill=\"" << (*e.delta < 0 ? "firebrick" : "seagreen") << "\"/>\n";
        }
        s << "<text x=\"" << kLeft << "\" y=\"" << y + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">"
          << xml_escape(label) << "</text>\n";
        y += 24;
    }
    s << "</svg>\n";
    return s.str();
}

// ---------------------------------------------------------------------------
// Failure galleries

nlohmann::json failure_index_json(const FailureIndex& index) {
    auto member_json = [](const FailureMember& m) {
        return nlohmann::json{{"sample_id", m.sample_id},           {"theta", theta_json(m.theta)},
                              {"predicted_label", m.predicted_label}, {"reproduced_label", m.reproduced_label},
                              {"original_image", m.original_image},   {"perturbed_image", m.perturbed_image},
                              {"record", m.record}};
    };
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : index.groups) {
        nlohmann::json members = nlohmann::json::array();
        for (const auto& m : g.members) members.push_back(member_json(m));
        groups.push_back({{"class_label", g.class_label},
                          {"property_id", g.property_id},
                          {"count", g.members.size()},
                          {"members", std::move(members)}});
    }
    nlohmann::json unrepro = nlohmann::json::array();
    for (const auto& m : index.unreproducible) unrepro.push_back(member_json(m));
    return {{"groups", std::move(groups)}, {"unreproducible", std::move(unrepro)}};
}

FailureIndex failure_report(std::span<const PropertyResult> results, std::span<const PropertySpec> specs,
                            const DatasetManifest& dataset, const EndpointConfig& endpoint,
                            const EvaluationOptions& options, const fs::path& out_dir) {
    struct Job {
        const PropertySpec* spec;
        const SampleVerdict* verdict;
        const LabeledSample* sample;
    };
    std::vector<Job> jobs;
    for (const auto& result : results) {
        const auto spec = std::find_if(specs.begin(), specs.end(),
                                       [&](const PropertySpec& s) { return s.property_id == result.property_id; });
        if (spec == specs.end()) throw ReportError("no property spec for result '" + result.property_id + "'");
        for (const auto& v : result.verdicts) {
            if (v.robust != Robustness::non_robust || !v.counterexample) continue;
            const auto sample = std::find_if(dataset.samples.begin(), dataset.samples.end(),
                                             [&](const LabeledSample& s) { return s.sample_id == v.sample_id; });
            if (sample == dataset.samples.end()) throw ReportError("sample '" + v.sample_id + "' not in dataset");
            jobs.push_back({&*spec, &v, &*sample});
        }
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    // Re-verification runs in parallel; files are written afterwards in job order.
    struct Outcome {
        Image original;
        Image perturbed;
        int reproduced_label = 0;
    };
    std::vector<Outcome> outcomes(jobs.size());
    parallel_for_each_index(
        jobs.size(), options.workers, [&] { return make_classifier(endpoint); },
        [&](std::unique_ptr<Classifier>& classifier, std::size_t i) {
            const Job& job = jobs[i];
            const Counterexample& cx = *job.verdict->counterexample;
            std::vector<double> theta;
            for (const auto& slice : cx.theta) theta.insert(theta.end(), slice.begin(), slice.end());
            const CandidateSequence sequence(*job.spec, options.global_seed, job.sample->sample_id);
            const Image original = options.loader(*job.sample);
            const Image perturbed =
                quantize_8bit(perturb(*job.spec, original, theta, sequence.application_stream(cx.candidate_index),
                                      dataset.flip_invariant(job.sample->label)));
            const Image input = prepare_for_endpoint(perturbed, endpoint);
            outcomes[i] = {quantize_8bit(original), perturbed,
                           classifier->predict_batch(std::span(&input, 1)).at(0).label};
        });

    FailureIndex index;
    std::map<std::pair<int, std::string>, std::size_t> group_of;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const Job& job = jobs[i];
        const Counterexample& cx = *job.verdict->counterexample;
        FailureMember m;
        m.sample_id = job.sample->sample_id;
        m.theta = cx.theta;
        m.predicted_label = cx.predicted_label;
        m.reproduced_label = outcomes[i].reproduced_label;
        if (m.reproduced_label == job.sample->label) {
            index.unreproducible.push_back(std::move(m));
            continue;
        }
        char class_dir[32];
        std::snprintf(class_dir, sizeof class_dir, "class_%02d", job.sample->label);
        const fs::path rel = fs::path(class_dir) / path_safe(job.spec->property_id);
        fs::create_directories(out_dir / rel, ec);
        if (ec) throw IoError("cannot create " + (out_dir / rel).string() + ": " + ec.message());
        const std::string stem = path_safe(m.sample_id);
        m.original_image = (rel / (stem + "_original.png")).generic_string();
        m.perturbed_image = (rel / (stem + "_perturbed.png")).generic_string();
        m.record = (rel / (stem + ".json")).generic_string();
        write_image(outcomes[i].original, out_dir / m.original_image);
        write_image(outcomes[i].perturbed, out_dir / m.perturbed_image);
        const nlohmann::json record{{"sample_id", m.sample_id},
                                    {"property_id", job.spec->property_id},
                                    {"label", job.sample->label},
                                    {"theta", theta_json(m.theta)},
                                    {"candidate_index", cx.candidate_index},
                                    {"predicted_label", m.predicted_label},
                                    {"reproduced_label", m.reproduced_label}};
        write_text(out_dir / m.record, canonical_json(record));

        const auto key = std::make_pair(job.sample->label, job.spec->property_id);
        auto it = group_of.find(key);
        if (it == group_of.end()) {
            it = group_of.emplace(key, index.groups.size()).first;
            index.groups.push_back({job.sample->label, job.spec->property_id, {}});
        }
        index.groups[it->second].members.push_back(std::move(m));
    }
    std::sort(index.groups.begin(), index.groups.end(), [](const FailureGroup& a, const FailureGroup& b) {
        return std::tie(a.class_label, a.property_id) < std::tie(b.class_label, b.property_id);
    });

    write_text(out_dir / "index.json", canonical_json(failure_index_json(index)));

    std::ostringstream md;
    md << "# Non-robust samples\n\n";
    md << "Each row is one (class, property) group of counterexamples that reproduce after 8-bit quantization.\n\n";
    md << "| class | property | count |\n|---:|---|---:|\n";
    for (const auto& g : index.groups) {
        md << "| " << g.class_label << " | " << g.property_id << " | " << g.members.size() << " |\n";
    }
    if (!index.unreproducible.empty()) {
        md << "\n" << index.unreproducible.size()
           << " counterexample(s) did not reproduce after quantization; see index.json.\n";
    }
    write_text(out_dir / "index.md", md.str());
    return index;
}

// ---------------------------------------------------------------------------
// Score reports

namespace {

void canonical_dump(const nlohmann::json& v, int indent, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case nlohmann::json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {  // std::map: sorted keys
                if (!first) out += ",\n";
                first = false;
                out += inner + nlohmann::json(it.key()).dump() + ": ";
                canonical_dump(it.value(), indent + 1, out);
            }
            out += "\n" + pad + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            const bool scalars = std::all_of(v.begin(), v.end(), [](const nlohmann::json& e) { return e.is_primitive(); });
            if (scalars) {
                out += "[";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    if (i) out += ", ";
                    canonical_dump(v[i], indent + 1, out);
                }
                out += "]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += inner;
                canonical_dump(v[i], indent + 1, out);
            }
            out += "\n" + pad + "]";
            return;
        }
        case nlohmann::json::value_t::number_float:
            out += format_g6(v.get<double>());
            return;
        default:
            out += v.dump();
            return;
    }
}

}  // namespace

std::string canonical_json(const nlohmann::json& value) {
    std::string out;
    canonical_dump(value, 0, out);
    out += "\n";
    return out;
}

nlohmann::json result_json(const PropertyResult& r) {
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : r.verdicts) {
        nlohmann::json cx = nullptr;
        if (v.counterexample) {
            cx = {{"candidate_index", v.counterexample->candidate_index},
                  {"predicted_label", v.counterexample->predicted_label},
                  {"theta", theta_json(v.counterexample->theta)}};
        }
        verdicts.push_back({{"sample_id", v.sample_id},
                            {"label", v.label},
                            {"original_label", v.original_prediction.label},
                            {"correct", v.correct},
                            {"robust", std::string(to_string(v.robust))},
                            {"counterexample", std::move(cx)},
                            {"candidates_evaluated", v.candidates_evaluated}});
    }
    nlohmann::json score = nullptr;
    if (r.robustness_score) score = *r.robustness_score;
    return {{"property_id", r.property_id},
            {"total", r.total},
            {"correct_count", r.correct_count},
            {"robust_count", r.robust_count},
            {"non_robust_count", r.non_robust_count()},
            {"accuracy", r.accuracy},
            {"robustness_score", std::move(score)},
            {"complete", r.complete},
            {"verdicts", std::move(verdicts)}};
}

std::string report_json(std::span<const PropertyResult> results) {
    nlohmann::json properties = nlohmann::json::array();
    for (const auto& r : results) properties.push_back(result_json(r));
    const nlohmann::json doc{
        {"disclaimer",
         "robust means no counterexample was found within the search budget; robustness_score = robust / "
         "correctly classified originals"},
        {"properties", std::move(properties)}};
    return canonical_json(doc);
}

std::string scores_csv(std::span<const PropertyResult> results) {
    std::string out = "property_id,accuracy,robustness_score,non_robust_count\n";
    for (const auto& r : results) {
        out += r.property_id + "," + format_fixed6(r.accuracy) + "," + optional_fixed6(r.robustness_score) + "," +
               std::to_string(r.non_robust_count()) + "\n";
    }
    return out;
}

std::string scores_svg(std::span<const PropertyResult> results) {
    constexpr int kW = 640, kLeft = 160, kRight = 60, kBar = 18, kGap = 8, kTop = 40;
    const int height = kTop + static_cast<int>(results.size()) * (kBar + kGap) + 20;
    const double plot_w = kW - kLeft - kRight;
    std::ostringstream s;
    s << svg_header(kW, height);
    s << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << "Robustness score per property</text>\n";
    int y = kTop;
    for (const auto& r : results) {
        const double score = r.robustness_score.value_or(0.0);
        s << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + kBar - 5
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(r.property_id)
          << "</text>\n";
        s << "<rect x=\"" << kLeft << "\" y=\"" << y << "\" width=\"" << coord(score * plot_w) << "\" height=\""
          << kBar << "\" fill=\"steelblue\"/>\n";
        s << "<text x=\"" << coord(kLeft + score * plot_w + 4) << "\" y=\"" << y + kBar - 5
          << "\" font-family=\"sans-serif\" font-size=\"11\">"
          << (r.robustness_score ? coord(100.0 * score) + "%" : std::string("undefined")) << "</text>\n";
        y += kBar + kGap;
    }
    s << "</svg>\n";
    return s.str();
}

void emit_report(std::span<const PropertyResult> results, std::span<const ReportFormat> formats,
                 const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    for (ReportFormat f : formats) {
        switch (f) {
            case ReportFormat::json: write_text(out_dir / "report.json", report_json(results)); break;
            case ReportFormat::csv: write_text(out_dir / "scores.csv", scores_csv(results)); break;
            case ReportFormat::svg: write_text(out_dir / "scores.svg", scores_svg(results)); break;
        }
    }
}

}  // namespace rtk
