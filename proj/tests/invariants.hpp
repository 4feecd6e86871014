#pragma once

// Randomized invariant checks shared by the property tests and the acceptance
// runner. Each returns a tally; callers decide how many cases to draw.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "rtk/codec.hpp"
#include "rtk/evaluator.hpp"
#include "rtk/transforms.hpp"
#include "support.hpp"

namespace rtk::testing {

struct Tally {
    std::size_t cases = 0;
    std::size_t violations = 0;
    std::string first;

    void fail(const std::string& what) {
        if (violations++ == 0) first = what;
    }
    bool ok() const noexcept { return violations == 0; }
};

inline std::vector<double> draw_theta(const std::vector<ParamDim>& dims, Gen& gen) {
    std::vector<double> theta;
    for (const auto& d : dims) {
        switch (d.kind) {
            case DimKind::continuous: theta.push_back(gen.uniform(d.low, d.high)); break;
            case DimKind::integer:
            case DimKind::binary:
                theta.push_back(gen.integer(static_cast<int>(d.low), static_cast<int>(d.high)));
                break;
            case DimKind::categorical:
                theta.push_back(gen.integer(0, static_cast<int>(d.choices.size()) - 1));
                break;
        }
    }
    return theta;
}

inline bool in_unit_range(const Image& img) {
    return std::all_of(img.values().begin(), img.values().end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
}

inline double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(static_cast<double>(a.values()[i]) - static_cast<double>(b.values()[i])));
    }
    return m;
}

/// Identity points, flip involution, 1x1 adaptive brightness, color_depth(8)
/// idempotence, and the unit range of `applications` random transform calls.
inline Tally check_transform_identities(std::uint64_t seed, std::size_t applications) {
    Gen gen(seed);
    Tally t;
    const auto kinds = all_transform_kinds();
    for (std::size_t trial = 0; trial < applications; ++trial) {
        const TransformKind kind = kinds[static_cast<std::size_t>(gen.integer(0, static_cast<int>(kinds.size()) - 1))];
        TransformOptions options;
        options.grid_size = gen.integer(1, 4);
        TransformSpec spec = make_transform(kind, options);
        const Image img = gen.coin() ? gen.image(12) : gen.image_8bit(gen.integer(1, 12), gen.integer(1, 12));
        const std::string name(to_string(kind));

        TransformSpec widened = spec;
        const auto id = identity_point(spec);
        for (std::size_t d = 0; d < id.size(); ++d) {
            auto& dim = widened.domain.dims[d];
            dim.low = std::min(dim.low, id[d]);
            dim.high = std::max(dim.high, id[d]);
        }
        RandomStream id_stream(gen.u64());
        const Image same = apply(widened, img, id, id_stream);
        if (kind == TransformKind::hue ? max_abs_diff(same, img) > 1e-6 : !(same == img)) {
            t.fail(name + ": identity point changed the image");
        }

        RandomStream stream(gen.u64());
        const auto theta = draw_theta(spec.domain.dims, gen);
        const Image out = apply(spec, img, theta, stream);
        ++t.cases;
        if (!in_unit_range(out)) t.fail(name + ": output left [0,1]");

        if (trial % 10 == 0) {
            if (!(flip_horizontal(flip_horizontal(img)) == img)) t.fail("flip is not an involution");
            const double f = gen.uniform(0.5, 1.5);
            const std::vector<double> grid{f};
            if (!(adaptive_brightness(img, grid, 1) == color_adjust(img, f, 1.0, 1.0))) {
                t.fail("1x1 adaptive brightness differs from brightness");
            }
            const Image q = quantize_8bit(img);
            if (!(color_depth(q, 8) == q)) t.fail("color_depth(8) changed an 8-bit image");
        }
    }
    return t;
}

/// pixel_linf stays within eps of the input; pixel_l0 changes at most k pixels.
inline Tally check_budget_invariants(std::uint64_t seed, std::size_t cases) {
    Gen gen(seed);
    Tally t;
    for (std::size_t i = 0; i < cases; ++i) {
        const Image img = gen.image(16);
        RandomStream stream(gen.u64());
        ++t.cases;
        if (i % 2 == 0) {
            const double eps = gen.coin() ? gen.uniform(0.0, 8.0 / 255.0) : gen.uniform(0.0, 0.6);
            const LinfMode mode = gen.coin() ? LinfMode::corner : LinfMode::uniform;
            const double change = max_abs_diff(pixel_linf_candidate(img, eps, stream, mode), img);
            if (change > eps) {
                std::ostringstream msg;
                msg << "pixel_linf moved a value by " << change << " > eps " << eps;
                t.fail(msg.str());
            }
        } else {
            const long k = gen.integer(0, static_cast<int>(img.pixel_count()));
            const Image out = pixel_l0_candidate(img, k, stream);
            long changed = 0;
            for (std::size_t p = 0; p < img.pixel_count(); ++p) {
                bool diff = false;
                for (std::size_t c = 0; c < 3; ++c) diff |= out.values()[3 * p + c] != img.values()[3 * p + c];
                changed += diff;
            }
            if (changed > k) t.fail("pixel_l0 changed " + std::to_string(changed) + " pixels, k=" + std::to_string(k));
        }
    }
    return t;
}

/// Random verdict sets: counts, accuracy and score follow from the verdicts.
inline Tally check_score_semantics(std::uint64_t seed, std::size_t sets) {
    Gen gen(seed);
    Tally t;
    for (std::size_t s = 0; s < sets; ++s) {
        const int n = gen.integer(0, 60);
        const double p_correct = gen.uniform(0, 1), p_robust = gen.uniform(0, 1);
        std::vector<SampleVerdict> verdicts;
        std::size_t correct = 0, robust = 0;
        for (int i = 0; i < n; ++i) {
            SampleVerdict v;
            v.sample_id = std::to_string(i);
            v.correct = gen.uniform(0, 1) < p_correct;
            if (v.correct) {
                ++correct;
                v.robust = gen.uniform(0, 1) < p_robust ? Robustness::robust : Robustness::non_robust;
                robust += v.robust == Robustness::robust;
            }
            verdicts.push_back(v);
        }
        const PropertyResult r = summarize("p", verdicts);
        ++t.cases;
        if (r.robust_count > r.correct_count) t.fail("robust_count exceeds correct_count");
        if (r.correct_count != correct || r.robust_count != robust) t.fail("counts disagree with verdicts");
        if (correct == 0) {
            if (r.robustness_score) t.fail("score defined without correct samples");
        } else if (!r.robustness_score ||
                   *r.robustness_score != static_cast<double>(robust) / static_cast<double>(correct)) {
            t.fail("score is not robust / correct");
        } else if (*r.robustness_score < 0.0 || *r.robustness_score > 1.0) {
            t.fail("score outside [0,1]");
        }
        const double accuracy = n ? static_cast<double>(correct) / n : 0.0;
        if (r.accuracy != accuracy) t.fail("accuracy is not correct / total");
    }
    return t;
}

/// Single-transform property with a random grid whose axes contain the
/// identity value exactly (as an endpoint), so parts nest inside compositions.
inline PropertySpec nested_part(const std::string& id, TransformKind kind, Gen& gen) {
    PropertySpec p;
    p.property_id = id;
    TransformSpec spec = make_transform(kind);
    const auto identity = identity_point(spec);
    for (std::size_t d = 0; d < spec.domain.dims.size(); ++d) {
        auto& dim = spec.domain.dims[d];
        if (dim.kind != DimKind::continuous && dim.kind != DimKind::integer) continue;
        const double c = identity[d];
        const bool up = c <= dim.low || (c < dim.high && gen.coin());
        const double reach = gen.uniform(0.3, 1.0);
        if (up) {
            dim.high = c + reach * (dim.high - c);
            dim.low = c;
        } else {
            dim.low = c - reach * (c - dim.low);
            dim.high = c;
        }
        if (dim.kind == DimKind::integer) {
            dim.low = std::floor(dim.low);
            dim.high = std::ceil(dim.high);
        }
    }
    spec.domain.includes_identity = true;
    p.transforms = {spec};
    p.budget.strategy = SearchStrategy::grid;
    p.budget.grid_steps = {gen.integer(2, 5)};
    p.seed = gen.u64();
    return p;
}

/// Combined robust set within both parts' robust sets, and combined score at
/// most the lower part score, over `configs` random dataset/classifier/pair draws.
inline Tally check_composition_dominance(std::uint64_t seed, std::size_t configs) {
    static constexpr TransformKind kDeterministic[] = {
        TransformKind::rotate,   TransformKind::translate, TransformKind::scale,      TransformKind::shear,
        TransformKind::blur,     TransformKind::sharpen,   TransformKind::brightness, TransformKind::contrast,
        TransformKind::saturation, TransformKind::hue,     TransformKind::grayscale,  TransformKind::color_depth,
        TransformKind::flip};
    Gen gen(seed);
    Tally t;
    while (t.cases < configs) {
        auto pick = [&] { return kDeterministic[gen.integer(0, static_cast<int>(std::size(kDeterministic)) - 1)]; };
        const TransformKind ka = pick(), kb = pick();
        const PropertySpec a = nested_part("a", ka, gen);
        const PropertySpec b = nested_part("b", kb, gen);
        if (a.total_dims() + b.total_dims() > kMaxGridDims) continue;
        const PropertySpec ab = compose(a, b);

        const int classes = gen.integer(2, 4);
        const int side = gen.integer(6, 10);
        MemoryDataset ds(classes);
        std::vector<Image> images;
        std::vector<int> labels;
        for (int i = 0; i < 12; ++i) {
            images.push_back(gen.image(side, side));
            labels.push_back(i < classes ? i : gen.integer(0, classes - 1));
            ds.add("s" + std::to_string(i), labels.back(), images.back());
        }
        for (int k = 0; k < classes; ++k) {
            if (gen.coin()) ds.manifest.flip_invariant_classes.insert(k);
        }
        EndpointConfig endpoint;
        endpoint.kind = EndpointKind::builtin_centroid;
        endpoint.num_classes = classes;
        endpoint.centroids = fit_centroid(images, labels, classes);

        EvaluationOptions options;
        options.global_seed = gen.u64();
        options.loader = ds.loader();
        const auto ra = evaluate_property(ds.manifest, a, endpoint, options);
        const auto rb = evaluate_property(ds.manifest, b, endpoint, options);
        const auto rab = evaluate_property(ds.manifest, ab, endpoint, options);
        ++t.cases;
        const std::string what = std::string(to_string(ka)) + "+" + std::string(to_string(kb));
        for (std::size_t i = 0; i < rab.verdicts.size(); ++i) {
            if (rab.verdicts[i].robust == Robustness::robust &&
                (ra.verdicts[i].robust != Robustness::robust || rb.verdicts[i].robust != Robustness::robust)) {
                t.fail(what + ": sample " + rab.verdicts[i].sample_id + " robust only in the combination");
            }
        }
        if (rab.robustness_score && ra.robustness_score && rb.robustness_score &&
            *rab.robustness_score > std::min(*ra.robustness_score, *rb.robustness_score)) {
            t.fail(what + ": combined score above the lower part score");
        }
        const auto delta = combination_delta(rab, std::vector<PropertyResult>{ra, rb});
        if (delta && *delta > 0.0) t.fail(what + ": positive combination delta");
    }
    return t;
}

}  // namespace rtk::testing
