#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtk/classifier.hpp"
#include "rtk/dataset.hpp"
#include "rtk/error.hpp"
#include "rtk/random.hpp"
#include "rtk/transforms.hpp"

namespace rtk {

enum class SearchStrategy { grid, random, grid_then_refine };

std::string_view to_string(SearchStrategy strategy) noexcept;
SearchStrategy parse_strategy(const std::string& text);

struct SearchBudget {
    SearchStrategy strategy = SearchStrategy::grid;
    /// Points per dimension; a single entry applies to every dimension.
    std::vector<int> grid_steps{5};
    int random_candidates = 100;
    int refine_rounds = 0;
};

/// Grid search is limited to this many dimensions in total.
inline constexpr std::size_t kMaxGridDims = 3;

/// A robustness property: one transform, or several applied in order with a
/// joint parameter domain.
struct PropertySpec {
    std::string property_id;
    std::vector<TransformSpec> transforms;
    SearchBudget budget;
    std::uint64_t seed = 0;

    std::size_t total_dims() const noexcept;
    bool includes_identity() const noexcept;
    std::vector<double> identity() const;
    /// Flattened dimensions across all transforms.
    std::vector<ParamDim> dims() const;
};

/// Throws ConfigError naming the offending field.
void check_property(const PropertySpec& spec);

/// Concatenates the transforms and joins the budgets: grid when both parts
/// use grid search and the joint dimension count allows it, random with the
/// summed candidate counts otherwise.
PropertySpec compose(const PropertySpec& first, const PropertySpec& second);

struct Candidate {
    std::uint64_t index = 0;
    std::vector<double> theta;  ///< concatenated over the property's transforms
    RandomStream stream;        ///< draws for stochastic transforms
};

/// Candidate i of a sample uses the stream derived from
/// (global_seed ^ spec.seed, sample_id, property_id, i). Random-strategy
/// points are drawn first from that stream (one uniform per dimension); the
/// rest of the stream feeds the transforms. The identity point, when the
/// domain includes it, is candidate 0.
class CandidateSequence {
public:
    CandidateSequence(const PropertySpec& spec, std::uint64_t global_seed, std::string sample_id);

    /// Identity plus grid or random points; refinement candidates follow these.
    std::size_t size() const noexcept { return size_; }
    Candidate at(std::size_t i) const;
    RandomStream stream_for(std::uint64_t index) const;

    /// Local perturbation of `center` used by grid_then_refine: each
    /// continuous or integer value moves by up to a tenth of its range.
    Candidate refine_around(std::span<const double> center, std::uint64_t index) const;

    /// The stream a candidate's transforms consumed, rebuilt from its index;
    /// used to reproduce a recorded counterexample.
    RandomStream application_stream(std::uint64_t index) const;

private:
    PropertySpec spec_;
    std::uint64_t seed_;
    std::string sample_id_;
    std::vector<ParamDim> dims_;
    std::vector<std::vector<double>> axes_;  ///< grid values per dimension
    bool identity_first_ = false;
    std::size_t size_ = 0;
};

std::vector<Candidate> enumerate_candidates(const PropertySpec& spec, std::uint64_t global_seed,
                                            const std::string& sample_id);

/// Applies the property's transforms in order, each with its theta slice.
/// Flips become identity when `flip_allowed` is false.
Image perturb(const PropertySpec& spec, const Image& img, std::span<const double> theta, RandomStream stream,
              bool flip_allowed);

/// Splits a concatenated parameter point per transform.
std::vector<std::vector<double>> split_theta(const PropertySpec& spec, std::span<const double> theta);

enum class Robustness { robust, non_robust, not_applicable };
std::string_view to_string(Robustness r) noexcept;

struct Counterexample {
    std::vector<std::vector<double>> theta;  ///< per transform
    int predicted_label = 0;
    std::uint64_t candidate_index = 0;
};

struct SampleVerdict {
    std::string sample_id;
    int label = 0;
    Prediction original_prediction;
    bool correct = false;
    Robustness robust = Robustness::not_applicable;
    std::optional<Counterexample> counterexample;
    std::uint64_t candidates_evaluated = 0;
};

struct PropertyResult {
    std::string property_id;
    std::size_t total = 0;
    std::size_t correct_count = 0;
    std::size_t robust_count = 0;
    double accuracy = 0.0;
    /// robust / correct; empty when nothing was classified correctly.
    std::optional<double> robustness_score;
    std::vector<SampleVerdict> verdicts;
    bool complete = true;

    std::size_t non_robust_count() const noexcept { return correct_count - robust_count; }
};

/// Recomputes counts, accuracy and score from the verdicts.
PropertyResult summarize(std::string property_id, std::vector<SampleVerdict> verdicts, bool complete = true);

struct EvaluationOptions {
    std::uint64_t global_seed = 0;
    int workers = 1;
    std::size_t batch_size = 16;
    Split split = Split::test;
    ImageLoader loader = load_sample_image;
};

/// Counterexample search for one sample. Stops at the first misclassified
/// candidate in sequence order; "robust" means none was found in the budget.
SampleVerdict evaluate_sample(const LabeledSample& sample, const Image& image, bool flip_allowed,
                              const PropertySpec& spec, Classifier& classifier, const EndpointConfig& endpoint,
                              const EvaluationOptions& options);

/// Raised when the classifier fails mid-run; carries the verdicts finished so far.
class EvaluationAborted : public Error {
public:
    EvaluationAborted(const std::string& what, PropertyResult partial)
        : Error(what), partial_(std::move(partial)) {}
    const PropertyResult& partial() const noexcept { return partial_; }

private:
    PropertyResult partial_;
};

/// Evaluates every sample of options.split, in parallel, merged in manifest order.
PropertyResult evaluate_property(const DatasetManifest& dataset, const PropertySpec& spec,
                                 const EndpointConfig& endpoint, const EvaluationOptions& options);

/// Percentage points: combined score minus the lowest part score.
std::optional<double> combination_delta(double combined_pct, std::span<const double> part_pcts);
std::optional<double> combination_delta(const PropertyResult& combined, std::span<const PropertyResult> parts);

/// 100 * robust / correct, empty when undefined.
std::optional<double> score_percent(const PropertyResult& result);

}  // namespace rtk
