#include "rtk/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "rtk/parallel.hpp"

namespace rtk {

std::string_view to_string(SearchStrategy strategy) noexcept {
    switch (strategy) {
        case SearchStrategy::grid: return "grid";
        case SearchStrategy::random: return "random";
        case SearchStrategy::grid_then_refine: return "grid_then_refine";
    }
    return "?";
}

SearchStrategy parse_strategy(const std::string& text) {
    if (text == "grid") return SearchStrategy::grid;
    if (text == "random") return SearchStrategy::random;
    if (text == "grid_then_refine") return SearchStrategy::grid_then_refine;
    throw ConfigError("unknown search strategy '" + text + "' (grid, random, grid_then_refine)");
}

std::string_view to_string(Robustness r) noexcept {
    switch (r) {
        case Robustness::robust: return "robust";
        case Robustness::non_robust: return "non_robust";
        case Robustness::not_applicable: return "not_applicable";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// PropertySpec

std::size_t PropertySpec::total_dims() const noexcept {
    std::size_t n = 0;
    for (const auto& t : transforms) n += t.domain.dims.size();
    return n;
}

bool PropertySpec::includes_identity() const noexcept {
    return std::all_of(transforms.begin(), transforms.end(),
                       [](const TransformSpec& t) { return t.domain.includes_identity; });
}

std::vector<double> PropertySpec::identity() const {
    std::vector<double> out;
    for (const auto& t : transforms) {
        const auto id = identity_point(t);
        out.insert(out.end(), id.begin(), id.end());
    }
    return out;
}

std::vector<ParamDim> PropertySpec::dims() const {
    std::vector<ParamDim> out;
    for (const auto& t : transforms) out.insert(out.end(), t.domain.dims.begin(), t.domain.dims.end());
    return out;
}

void check_property(const PropertySpec& spec) {
    const std::string where = "property '" + spec.property_id + "'";
    if (spec.property_id.empty()) throw ConfigError("property id must not be empty");
    if (spec.transforms.empty()) throw ConfigError(where + ": needs at least one transform");
    for (std::size_t i = 0; i < spec.transforms.size(); ++i) {
        try {
            check_schema(spec.transforms[i]);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ".transforms[" + std::to_string(i) + "]: " + e.what());
        }
    }
    const auto& b = spec.budget;
    const std::size_t dims = spec.total_dims();
    if (b.strategy != SearchStrategy::random) {
        if (dims > kMaxGridDims) {
            throw ConfigError(where + ".budget.strategy: grid search supports at most " +
                              std::to_string(kMaxGridDims) + " dimensions, this property has " +
                              std::to_string(dims) + "; use \"random\"");
        }
        if (b.grid_steps.empty() || (b.grid_steps.size() != 1 && b.grid_steps.size() != dims)) {
            throw ConfigError(where + ".budget.grid_steps: give one value or one per dimension (" +
                              std::to_string(dims) + ")");
        }
        for (int s : b.grid_steps) {
            if (s < 1) throw ConfigError(where + ".budget.grid_steps: must be >= 1");
        }
    }
    if (b.strategy == SearchStrategy::random && b.random_candidates < 1) {
        throw ConfigError(where + ".budget.random_candidates: must be >= 1");
    }
    if (b.strategy == SearchStrategy::grid_then_refine && b.refine_rounds < 1) {
        throw ConfigError(where + ".budget.refine_rounds: must be >= 1");
    }
    if (b.refine_rounds < 0) throw ConfigError(where + ".budget.refine_rounds: must be >= 0");
}

PropertySpec compose(const PropertySpec& first, const PropertySpec& second) {
    PropertySpec out;
    out.property_id = first.property_id + "+" + second.property_id;
    out.transforms = first.transforms;
    out.transforms.insert(out.transforms.end(), second.transforms.begin(), second.transforms.end());
    out.seed = first.seed ^ second.seed;

    auto per_dim_steps = [](const PropertySpec& p) {
        const auto& steps = p.budget.grid_steps;
        return steps.size() == 1 ? std::vector<int>(p.total_dims(), steps[0]) : steps;
    };
    const bool both_grid = first.budget.strategy != SearchStrategy::random &&
                           second.budget.strategy != SearchStrategy::random;
    if (both_grid && out.total_dims() <= kMaxGridDims) {
        out.budget.strategy = SearchStrategy::grid;
        out.budget.grid_steps = per_dim_steps(first);
        const auto more = per_dim_steps(second);
        out.budget.grid_steps.insert(out.budget.grid_steps.end(), more.begin(), more.end());
        out.budget.refine_rounds = first.budget.refine_rounds + second.budget.refine_rounds;
        if (out.budget.refine_rounds > 0) out.budget.strategy = SearchStrategy::grid_then_refine;
    } else {
        out.budget.strategy = SearchStrategy::random;
        auto count = [](const PropertySpec& p) {
            if (p.budget.strategy == SearchStrategy::random) return p.budget.random_candidates;
            long n = 1;
            const auto dims = p.dims();
            for (std::size_t i = 0; i < dims.size(); ++i) {
                const auto& steps = p.budget.grid_steps;
                n *= steps.size() == 1 ? steps[0] : steps[i];
            }
            return static_cast<int>(std::min<long>(n, 1'000'000));
        };
        out.budget.random_candidates = count(first) + count(second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Candidate enumeration

namespace {

std::vector<double> axis_values(const ParamDim& dim, int steps) {
    std::vector<double> out;
    switch (dim.kind) {
        case DimKind::categorical:
            for (std::size_t i = 0; i < dim.choices.size(); ++i) out.push_back(static_cast<double>(i));
            return out;
        case DimKind::binary:
            for (double v = dim.low; v <= dim.high; v += 1.0) out.push_back(v);
            return out;
        case DimKind::continuous:
        case DimKind::integer:
            break;
    }
    if (dim.low == dim.high || steps == 1) {
        out.push_back(dim.low);
        return out;
    }
    for (int i = 0; i < steps; ++i) {
        double v = i == steps - 1 ? dim.high : dim.low + (dim.high - dim.low) * i / (steps - 1);
        if (dim.kind == DimKind::integer) v = std::round(v);
        if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
}

double draw_value(const ParamDim& dim, RandomStream& stream) {
    const double u = stream.next_uniform();
    switch (dim.kind) {
        case DimKind::continuous:
            return dim.low + u * (dim.high - dim.low);
        case DimKind::integer:
        case DimKind::binary: {
            const double span = dim.high - dim.low + 1.0;
            return std::min(dim.low + std::floor(u * span), dim.high);
        }
        case DimKind::categorical: {
            const double n = static_cast<double>(dim.choices.size());
            return std::min(std::floor(u * n), n - 1.0);
        }
    }
    return dim.low;
}

}  // namespace

CandidateSequence::CandidateSequence(const PropertySpec& spec, std::uint64_t global_seed, std::string sample_id)
    : spec_(spec), seed_(global_seed ^ spec.seed), sample_id_(std::move(sample_id)), dims_(spec.dims()) {
    identity_first_ = spec_.includes_identity();
    std::size_t body = 0;
    if (spec_.budget.strategy == SearchStrategy::random) {
        body = static_cast<std::size_t>(spec_.budget.random_candidates);
    } else {
        body = 1;
        const auto& steps = spec_.budget.grid_steps;
        for (std::size_t d = 0; d < dims_.size(); ++d) {
            axes_.push_back(axis_values(dims_[d], steps.size() == 1 ? steps[0] : steps[d]));
            body *= axes_.back().size();
        }
    }
    size_ = body + (identity_first_ ? 1 : 0);
}

RandomStream CandidateSequence::stream_for(std::uint64_t index) const {
    return RandomStream::derive(seed_, sample_id_, spec_.property_id, index);
}

Candidate CandidateSequence::at(std::size_t i) const {
    Candidate c;
    c.index = i;
    c.stream = stream_for(i);
    if (identity_first_ && i == 0) {
        c.theta = spec_.identity();
        return c;
    }
    std::size_t k = i - (identity_first_ ? 1 : 0);
    if (spec_.budget.strategy == SearchStrategy::random) {
        for (const auto& dim : dims_) c.theta.push_back(draw_value(dim, c.stream));
        return c;
    }
    // Mixed-radix decode, first dimension varying slowest.
    c.theta.assign(dims_.size(), 0.0);
    for (std::size_t d = dims_.size(); d-- > 0;) {
        const std::size_t n = axes_[d].size();
        c.theta[d] = axes_[d][k % n];
        k /= n;
    }
    return c;
}

Candidate CandidateSequence::refine_around(std::span<const double> center, std::uint64_t index) const {
    Candidate c;
    c.index = index;
    c.stream = stream_for(index);
    c.theta.assign(center.begin(), center.end());
    for (std::size_t d = 0; d < dims_.size(); ++d) {
        const ParamDim& dim = dims_[d];
        const double u = c.stream.next_uniform();
        if (dim.kind != DimKind::continuous && dim.kind != DimKind::integer) continue;
        const double step = (dim.high - dim.low) / 10.0;
        double v = center[d] + (2.0 * u - 1.0) * step;
        if (dim.kind == DimKind::integer) v = std::round(v);
        c.theta[d] = std::clamp(v, dim.low, dim.high);
    }
    return c;
}

RandomStream CandidateSequence::application_stream(std::uint64_t index) const {
    RandomStream stream = stream_for(index);
    const bool is_identity = identity_first_ && index == 0;
    const bool drew_point = index >= size_ || (spec_.budget.strategy == SearchStrategy::random && !is_identity);
    if (drew_point) {
        for (std::size_t d = 0; d < dims_.size(); ++d) stream.next_uniform();
    }
    return stream;
}

std::vector<Candidate> enumerate_candidates(const PropertySpec& spec, std::uint64_t global_seed,
                                            const std::string& sample_id) {
    CandidateSequence seq(spec, global_seed, sample_id);
    std::vector<Candidate> out;
    out.reserve(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) out.push_back(seq.at(i));
    return out;
}

std::vector<std::vector<double>> split_theta(const PropertySpec& spec, std::span<const double> theta) {
    std::vector<std::vector<double>> out;
    std::size_t offset = 0;
    for (const auto& t : spec.transforms) {
        const std::size_t n = t.domain.dims.size();
        if (offset + n > theta.size()) throw DomainError("parameter point too short for property");
        out.emplace_back(theta.begin() + static_cast<std::ptrdiff_t>(offset),
                         theta.begin() + static_cast<std::ptrdiff_t>(offset + n));
        offset += n;
    }
    return out;
}

Image perturb(const PropertySpec& spec, const Image& img, std::span<const double> theta, RandomStream stream,
              bool flip_allowed) {
    Image out = img;
    std::size_t offset = 0;
    for (const auto& t : spec.transforms) {
        const std::size_t n = t.domain.dims.size();
        const auto slice = theta.subspan(offset, n);
        offset += n;
        if (t.kind == TransformKind::flip && !flip_allowed) continue;
        out = apply(t, out, slice, stream);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

SampleVerdict evaluate_sample(const LabeledSample& sample, const Image& image, bool flip_allowed,
                              const PropertySpec& spec, Classifier& classifier, const EndpointConfig& endpoint,
                              const EvaluationOptions& options) {
    SampleVerdict verdict;
    verdict.sample_id = sample.sample_id;
    verdict.label = sample.label;
    {
        const Image prepared = prepare_for_endpoint(image, endpoint);
        verdict.original_prediction = classifier.predict_batch(std::span(&prepared, 1)).at(0);
    }
    verdict.correct = verdict.original_prediction.label == sample.label;
    if (!verdict.correct) return verdict;

    const CandidateSequence sequence(spec, options.global_seed, sample.sample_id);
    const std::size_t batch = std::max<std::size_t>(options.batch_size, 1);
    const bool refine = spec.budget.strategy == SearchStrategy::grid_then_refine;
    const auto true_score = [&](const Prediction& p) {
        const auto label = static_cast<std::size_t>(sample.label);
        return label < p.scores.size() ? p.scores[label] : -std::numeric_limits<double>::infinity();
    };

    auto found = [&](const Candidate& c, int predicted) {
        verdict.robust = Robustness::non_robust;
        verdict.counterexample = Counterexample{split_theta(spec, c.theta), predicted, c.index};
        verdict.candidates_evaluated = c.index + 1;
        return verdict;
    };

    std::vector<double> best_theta;
    double best_score = std::numeric_limits<double>::infinity();

    for (std::size_t start = 0; start < sequence.size(); start += batch) {
        const std::size_t end = std::min(sequence.size(), start + batch);
        std::vector<Candidate> candidates;
        std::vector<Image> inputs;
        for (std::size_t i = start; i < end; ++i) {
            candidates.push_back(sequence.at(i));
            const Candidate& c = candidates.back();
            inputs.push_back(prepare_for_endpoint(perturb(spec, image, c.theta, c.stream, flip_allowed), endpoint));
        }
        const auto predictions = classifier.predict_batch(inputs);
        if (predictions.size() != inputs.size()) throw ProtocolError("classifier returned a short batch");
        for (std::size_t k = 0; k < predictions.size(); ++k) {
            if (predictions[k].label != sample.label) return found(candidates[k], predictions[k].label);
            if (refine) {
                const double s = true_score(predictions[k]);
                if (s < best_score) {
                    best_score = s;
                    best_theta = candidates[k].theta;
                }
            }
        }
    }

    std::uint64_t evaluated = sequence.size();
    if (refine && !best_theta.empty()) {
        for (int round = 0; round < spec.budget.refine_rounds; ++round) {
            const Candidate c = sequence.refine_around(best_theta, sequence.size() + static_cast<std::size_t>(round));
            const Image input = prepare_for_endpoint(perturb(spec, image, c.theta, c.stream, flip_allowed), endpoint);
            const auto prediction = classifier.predict_batch(std::span(&input, 1)).at(0);
            ++evaluated;
            if (prediction.label != sample.label) return found(c, prediction.label);
            const double s = true_score(prediction);
            if (s < best_score) {
                best_score = s;
                best_theta = c.theta;
            }
        }
    }
    verdict.robust = Robustness::robust;
    verdict.candidates_evaluated = evaluated;
    return verdict;
}

PropertyResult summarize(std::string property_id, std::vector<SampleVerdict> verdicts, bool complete) {
    PropertyResult r;
    r.property_id = std::move(property_id);
    r.complete = complete;
    r.total = verdicts.size();
    for (const auto& v : verdicts) {
        if (v.correct) ++r.correct_count;
        if (v.correct && v.robust == Robustness::robust) ++r.robust_count;
    }
    r.accuracy = r.total ? static_cast<double>(r.correct_count) / static_cast<double>(r.total) : 0.0;
    if (r.correct_count > 0) {
        r.robustness_score = static_cast<double>(r.robust_count) / static_cast<double>(r.correct_count);
    }
    r.verdicts = std::move(verdicts);
    return r;
}

PropertyResult evaluate_property(const DatasetManifest& dataset, const PropertySpec& spec,
                                 const EndpointConfig& endpoint, const EvaluationOptions& options) {
    check_property(spec);
    const auto samples = dataset.samples_in(options.split);
    std::vector<std::optional<SampleVerdict>> slots(samples.size());

    try {
        parallel_for_each_index(
            samples.size(), options.workers, [&] { return make_classifier(endpoint); },
            [&](std::unique_ptr<Classifier>& classifier, std::size_t i) {
                const auto& sample = samples[i];
                const Image image = options.loader(sample);
                slots[i] = evaluate_sample(sample, image, dataset.flip_invariant(sample.label), spec, *classifier,
                                           endpoint, options);
            });
    } catch (const TransportError& e) {
        std::vector<SampleVerdict> done;
        for (auto& s : slots) {
            if (s) done.push_back(std::move(*s));
        }
        throw EvaluationAborted(std::string("transport error: ") + e.what(),
                                summarize(spec.property_id, std::move(done), false));
    } catch (const ProtocolError& e) {
        std::vector<SampleVerdict> done;
        for (auto& s : slots) {
            if (s) done.push_back(std::move(*s));
        }
        throw EvaluationAborted(std::string("protocol error: ") + e.what(),
                                summarize(spec.property_id, std::move(done), false));
    }

    std::vector<SampleVerdict> verdicts;
    verdicts.reserve(slots.size());
    for (auto& s : slots) verdicts.push_back(std::move(*s));
    return summarize(spec.property_id, std::move(verdicts));
}

// ---------------------------------------------------------------------------

std::optional<double> combination_delta(double combined_pct, std::span<const double> part_pcts) {
    if (part_pcts.empty() || !std::isfinite(combined_pct)) return std::nullopt;
    double lowest = std::numeric_limits<double>::infinity();
    for (double p : part_pcts) {
        if (!std::isfinite(p)) return std::nullopt;
        lowest = std::min(lowest, p);
    }
    return combined_pct - lowest;
}

std::optional<double> score_percent(const PropertyResult& result) {
    if (result.correct_count == 0) return std::nullopt;
    return 100.0 * static_cast<double>(result.robust_count) / static_cast<double>(result.correct_count);
}

std::optional<double> combination_delta(const PropertyResult& combined, std::span<const PropertyResult> parts) {
    const auto c = score_percent(combined);
    if (!c || parts.empty()) return std::nullopt;
    std::vector<double> pcts;
    for (const auto& p : parts) {
        const auto s = score_percent(p);
        if (!s) return std::nullopt;
        pcts.push_back(*s);
    }
    return combination_delta(*c, pcts);
}

}  // namespace rtk
