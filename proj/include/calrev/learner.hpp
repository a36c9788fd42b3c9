#pragma once

#include "calrev/features.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace calrev {

// How train() draws the example(s) for each SGD step.
enum class LoopType {
    uniform,   // one example uniformly over all
    balanced,  // alternate a random positive and a random negative
    roc_pair,  // a random (positive, negative) pair, pairwise logistic loss
};

std::string_view to_string(LoopType loop);
// Accepts "uniform", "balanced", "roc-pair" (also "roc_pair", "roc").
LoopType parse_loop_type(std::string_view name);

struct LearnerConfig {
    double lambda = 1e-4;
    LoopType loop = LoopType::roc_pair;
    std::uint64_t iterations = 200'000;
    std::uint64_t seed = 0;

    // Throws ValidationError unless lambda > 0 and iterations >= 1.
    void validate() const;

    bool operator==(const LearnerConfig&) const = default;
};

enum class Label { not_relevant, relevant };

struct LabeledExample {
    SparseVector vector;
    Label label = Label::not_relevant;
};

struct ModelState {
    std::vector<double> weights;  // one per vocabulary term
    double bias = 0.0;
    LearnerConfig config;
    std::size_t positives = 0;
    std::size_t negatives = 0;

    bool operator==(const ModelState&) const = default;
};

// Pegasos-style SGD on the L2-regularized logistic loss with step size
// 1 / (lambda * t) and projection onto the ball of radius 1 / sqrt(lambda).
// The bias is an implicit feature of constant value 1. `dimension` is the
// vocabulary size; term ids at or above it are ignored.
// Throws TrainingError if either class is missing.
ModelState train(std::span<const LabeledExample> examples, const LearnerConfig& config, std::size_t dimension);

// Linear decision value w.x + b.
double score(const ModelState& model, const SparseVector& vector);

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

// Descending score, ties by ascending doc_id.
bool ranks_before(const ScoredDoc& a, const ScoredDoc& b);

using VectorLookup = std::function<const SparseVector*(const std::string& doc_id)>;

// Throws NotFoundError naming the first candidate without a vector.
std::vector<ScoredDoc> rank(const ModelState& model, std::span<const std::string> candidates,
                            const VectorLookup& vectors);

// Terms of `doc` whose contribution (model weight x feature weight) is
// strictly positive, largest first, ties by term text; at most k of them.
std::vector<std::string> top_terms(const ModelState& model, const DocumentRecord& doc, const Vocabulary& vocab,
                                   std::size_t k = 5);

// The objective each loop type minimizes in expectation, over a flat weight
// vector whose last element is the bias:
//   uniform:  lambda/2 |w|^2 + mean_i log(1 + exp(-y_i w.x_i))
//   balanced: same, with positives and negatives each averaged then halved
//   roc_pair: lambda/2 |w|^2 + mean_{p,n} log(1 + exp(-w.(x_p - x_n)))
double training_objective(std::span<const double> weights_and_bias, std::span<const LabeledExample> examples,
                          double lambda, LoopType loop);
std::vector<double> training_gradient(std::span<const double> weights_and_bias,
                                      std::span<const LabeledExample> examples, double lambda, LoopType loop);

// Derivative of log(1 + exp(-margin)) with respect to margin.
double logistic_loss_slope(double margin);

// Text format: magic line, "vocab_size bias", then one weight per line.
// Doubles are written in hex-float so a reload is bit-exact.
void save_model(const ModelState& model, std::ostream& out);
void save_model(const ModelState& model, const std::filesystem::path& path);
ModelState load_model(std::istream& in);
ModelState load_model(const std::filesystem::path& path);

}  // namespace calrev
