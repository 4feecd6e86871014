#include "rtk/cli.hpp"

#include <algorithm>
#include <optional>

#include <CLI11.hpp>

#include "rtk/codec.hpp"
#include "rtk/config.hpp"
#include "rtk/reporting.hpp"

namespace fs = std::filesystem;

namespace rtk {

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> min_score;
    std::optional<std::string> split;
};

void add_common(CLI::App& cmd, CommonFlags& flags, bool with_min_score) {
    cmd.add_option("--config", flags.config, "Run configuration (JSON)")->required();
    cmd.add_option("--out", flags.out, "Output directory (overrides output_dir)");
    cmd.add_option("--seed", flags.seed, "Global seed (overrides global_seed)");
    cmd.add_option("--workers", flags.workers, "Parallel workers (overrides workers)")->check(CLI::Range(1, 1024));
    cmd.add_option("--split", flags.split, "Dataset split to evaluate")->check(CLI::IsMember({"train", "test"}));
    if (with_min_score) {
        cmd.add_option("--min-score", flags.min_score, "Exit 4 when a robustness score is below this fraction")
            ->check(CLI::Range(0.0, 1.0));
    }
}

RunConfig configured(const CommonFlags& flags) {
    RunConfig config = load_config(flags.config);
    if (!flags.out.empty()) config.output_dir = flags.out;
    if (flags.seed) config.global_seed = *flags.seed;
    if (flags.workers) config.workers = *flags.workers;
    if (flags.split) config.split = parse_split(*flags.split);
    validate_config(config);
    return config;
}

EvaluationOptions options_for(const RunConfig& config) {
    EvaluationOptions options;
    options.global_seed = config.global_seed;
    options.workers = config.workers;
    options.split = config.split;
    return options;
}

std::string score_text(const PropertyResult& r) {
    return r.robustness_score ? format_fixed6(*r.robustness_score) : "undefined";
}

void print_result(std::ostream& out, const PropertyResult& r) {
    out << r.property_id << ": accuracy=" << format_fixed6(r.accuracy) << " robustness=" << score_text(r)
        << " non_robust=" << r.non_robust_count() << " correct=" << r.correct_count << " total=" << r.total
        << (r.complete ? "" : " (incomplete)") << "\n";
}

constexpr ReportFormat kAllFormats[] = {ReportFormat::json, ReportFormat::csv, ReportFormat::svg};

/// Evaluates each spec in order; on a transport failure the finished results
/// plus the partial one are written before rethrowing.
std::vector<PropertyResult> evaluate_all(std::span<const PropertySpec> specs, const DatasetManifest& dataset,
                                         const EndpointConfig& endpoint, const EvaluationOptions& options,
                                         const fs::path& out_dir, std::ostream& out) {
    std::vector<PropertyResult> results;
    for (const auto& spec : specs) {
        try {
            results.push_back(evaluate_property(dataset, spec, endpoint, options));
        } catch (const EvaluationAborted& e) {
            results.push_back(e.partial());
            emit_report(results, kAllFormats, out_dir);
            throw;
        }
        print_result(out, results.back());
    }
    return results;
}

int below_min(const std::vector<PropertyResult>& results, std::optional<double> min_score, std::ostream& err) {
    if (!min_score) return kExitOk;
    int code = kExitOk;
    for (const auto& r : results) {
        if (!r.robustness_score || *r.robustness_score < *min_score) {
            err << "rtk: " << r.property_id << " robustness " << score_text(r) << " is below --min-score "
                << format_fixed6(*min_score) << "\n";
            code = kExitBelowMin;
        }
    }
    return code;
}

int cmd_evaluate(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
    const RunConfig config = configured(flags);
    const DatasetManifest dataset = load_dataset(config);
    const EndpointConfig endpoint = resolve_endpoint(config, dataset);
    const auto options = options_for(config);
    const auto results = evaluate_all(config.properties, dataset, endpoint, options, config.output_dir, out);
    emit_report(results, kAllFormats, config.output_dir);
    failure_report(results, config.properties, dataset, endpoint, options, config.output_dir / "failures");
    return below_min(results, flags.min_score, err);
}

int cmd_sweep(const CommonFlags& flags, const std::string& property, const std::string& dim, int steps,
              std::ostream& out) {
    const RunConfig config = configured(flags);
    const PropertySpec& spec = config.property(property);
    const std::size_t index = resolve_dim(spec, dim);
    const PropertySpec pinned = pin_all_but(spec, index);
    const DatasetManifest dataset = load_dataset(config);
    const EndpointConfig endpoint = resolve_endpoint(config, dataset);
    const SweepCurve curve = sweep(dataset, pinned, endpoint, steps, options_for(config));

    std::string stem = "sweep_" + spec.property_id + "_" + curve.dim_name;
    std::replace_if(stem.begin(), stem.end(), [](char c) { return c == '/' || c == '\\' || c == ' '; }, '_');
    fs::create_directories(config.output_dir);
    write_text(config.output_dir / (stem + ".csv"), sweep_csv(curve));
    write_text(config.output_dir / (stem + ".svg"), sweep_svg(curve));
    for (const auto& p : curve.points) {
        out << curve.dim_name << "=" << format_fixed6(p.theta_value)
            << " robustness=" << format_fixed6(p.robustness_fraction) << "\n";
    }
    return kExitOk;
}

int cmd_compose(const CommonFlags& flags, const std::string& a, const std::string& b, std::ostream& out,
                std::ostream& err) {
    const RunConfig config = configured(flags);
    const PropertySpec combined = compose(config.property(a), config.property(b));
    check_property(combined);
    const DatasetManifest dataset = load_dataset(config);
    const EndpointConfig endpoint = resolve_endpoint(config, dataset);
    const auto options = options_for(config);

    const PropertySpec specs[] = {config.property(a), config.property(b), combined};
    auto results = evaluate_all(specs, dataset, endpoint, options, config.output_dir, out);
    const PairResult pair{a, b, results[2]};
    const auto entries = delta_matrix(std::span(results.data(), 2), std::span(&pair, 1));
    emit_report(results, kAllFormats, config.output_dir);
    write_text(config.output_dir / "delta.csv", delta_matrix_csv(entries));
    write_text(config.output_dir / "delta.svg", delta_matrix_svg(entries));
    const auto& d = entries.front().delta;
    out << "delta(" << combined.property_id << ")=" << (d ? format_fixed6(*d) : "undefined")
        << " percentage points\n";
    return below_min(results, flags.min_score, err);
}

int cmd_validate(const CommonFlags& flags, std::ostream& out) {
    (void)configured(flags);
    out << "OK\n";
    return kExitOk;
}

int cmd_import(const std::string& root, const std::string& out_dir, std::ostream& out) {
    const DatasetManifest manifest = import_gtsrb(root);
    fs::create_directories(out_dir);
    const fs::path path = fs::path(out_dir) / "manifest.csv";
    save_manifest(manifest, path);
    out << "wrote " << path.string() << " (" << manifest.samples.size() << " samples)\n";
    return kExitOk;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir, std::ostream& out) {
    if (spec.num_classes < 2) throw ConfigError("--classes: must be >= 2");
    if (spec.per_class < 1 || spec.width < 1 || spec.height < 1) {
        throw ConfigError("--per-class, --width and --height must be >= 1");
    }
    const DatasetManifest manifest = generate_synthetic(spec, out_dir);
    out << "wrote " << (fs::path(out_dir) / "manifest.csv").string() << " (" << manifest.samples.size()
        << " samples)\n";
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robustness testing toolkit for image classifiers"};
    app.name("rtk");
    app.require_subcommand(1);

    CommonFlags flags;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate every property and write reports");
    add_common(*evaluate, flags, true);

    std::string property, dim;
    int steps = 11;
    auto* sweep_cmd = app.add_subcommand("sweep", "Robustness curve over one parameter dimension");
    add_common(*sweep_cmd, flags, false);
    sweep_cmd->add_option("--property", property, "Property id")->required();
    sweep_cmd->add_option("--dim", dim, "Dimension name, <kind>.<name> or <index>.<name>")->required();
    sweep_cmd->add_option("--steps", steps, "Number of sweep points")->check(CLI::Range(1, 100000));

    std::string first, second;
    auto* compose_cmd = app.add_subcommand("compose", "Evaluate two properties and their combination");
    add_common(*compose_cmd, flags, true);
    compose_cmd->add_option("--a", first, "First property id")->required();
    compose_cmd->add_option("--b", second, "Second property id")->required();

    auto* validate = app.add_subcommand("validate", "Check a configuration without running it");
    add_common(*validate, flags, false);

    std::string root, out_dir;
    auto* import_cmd = app.add_subcommand("import-gtsrb", "Convert a GTSRB tree into a manifest");
    import_cmd->add_option("--root", root, "GTSRB directory")->required();
    import_cmd->add_option("--out", out_dir, "Directory for manifest.csv and sidecars")->required();

    SyntheticSpec synth;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic intensity dataset");
    synth_cmd->add_option("--classes", synth.num_classes, "Number of classes");
    synth_cmd->add_option("--per-class", synth.per_class, "Samples per class");
    synth_cmd->add_option("--width", synth.width, "Image width");
    synth_cmd->add_option("--height", synth.height, "Image height");
    synth_cmd->add_option("--seed", synth.seed, "Noise seed");
    synth_cmd->add_option("--out", synth_out, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << (e.get_name() == "CallForVersion" ? "rtk 0.1.0\n" : app.help());
            return kExitOk;
        }
        err << "rtk: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (*evaluate) return cmd_evaluate(flags, out, err);
        if (*sweep_cmd) return cmd_sweep(flags, property, dim, steps, out);
        if (*compose_cmd) return cmd_compose(flags, first, second, out, err);
        if (*validate) return cmd_validate(flags, out);
        if (*import_cmd) return cmd_import(root, out_dir, out);
        if (*synth_cmd) return cmd_synth(synth, synth_out, out);
    } catch (const EvaluationAborted& e) {
        err << "rtk: evaluation aborted: " << e.what() << "; partial results written\n";
        return kExitTransport;
    } catch (const TransportError& e) {
        err << "rtk: transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const ProtocolError& e) {
        err << "rtk: protocol error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const ConfigError& e) {
        err << "rtk: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        err << "rtk: " << e.what() << "\n";
        return kExitConfig;
    } catch (const fs::filesystem_error& e) {
        err << "rtk: I/O error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "rtk: unexpected error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace rtk
