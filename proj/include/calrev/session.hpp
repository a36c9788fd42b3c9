#pragma once

#include "calrev/collection.hpp"
#include "calrev/learner.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace calrev {

enum class ReviewMode { cal, scal };

std::string_view to_string(ReviewMode mode);
ReviewMode parse_review_mode(std::string_view name);

// Raw assessor labels.
inline constexpr int kNotRelevant = 0;
inline constexpr int kPartiallyRelevant = 1;
inline constexpr int kRelevant = 2;

struct Judgment {
    int topic_id = 0;
    std::string doc_id;
    int label = kNotRelevant;
    std::string assessor_id;
    std::int64_t timestamp = 0;  // UTC seconds

    bool operator==(const Judgment&) const = default;
};

// The judgment currently in force for one document. `sequence` orders
// judgments that share a timestamp.
struct EffectiveJudgment {
    int label = kNotRelevant;
    std::string assessor_id;
    std::int64_t timestamp = 0;
    std::uint64_t sequence = 0;

    bool operator==(const EffectiveJudgment&) const = default;
};

// Stop once n >= a*m + b, where m counts relevant-or-partial and n counts
// not-relevant documents reviewed.
struct StoppingConfig {
    double a = 1.0;
    double b = 50.0;

    bool satisfied(std::size_t m, std::size_t n) const {
        return static_cast<double>(n) >= a * static_cast<double>(m) + b;
    }
    void validate() const;

    bool operator==(const StoppingConfig&) const = default;
};

inline constexpr std::size_t kDefaultScalBudget = 300;
inline constexpr std::size_t kAugmentationSize = 100;

struct SessionOptions {
    ReviewMode mode = ReviewMode::cal;
    StoppingConfig stopping;
    // Cap on first-time judgments. Only enforced in S-CAL mode; defaults to
    // kDefaultScalBudget there when unset.
    std::optional<std::size_t> budget;
    std::uint64_t seed = 0;
    LearnerConfig learner;
};

// What the most recent refresh_model() trained on.
struct TrainingComposition {
    std::size_t synthetic = 0;
    std::size_t relevant = 0;
    std::size_t not_relevant = 0;
    std::size_t augmentation = 0;

    std::size_t total() const { return synthetic + relevant + not_relevant + augmentation; }
    bool operator==(const TrainingComposition&) const = default;
};

// Growth step of the batch schedule: size + ceil(size / 10).
std::size_t next_batch_size(std::size_t size);

// Review loop state for one topic.
//
// The synthetic seed is a permanent relevant training example; it is never
// judged, counted in m, queued or emitted. Every refresh trains on the seed
// plus the effective judgments; S-CAL (and CAL while no not-relevant
// judgment exists) adds kAugmentationSize random unjudged documents as
// temporary negatives.
class Session {
public:
    // Throws SchemaError on a synthetic id collision, NotFoundError if the
    // topic is not part of the collection.
    Session(Topic topic, std::shared_ptr<const Collection> collection, SessionOptions options);

    void refresh_model();

    // Installs an externally trained (or loaded) model and re-ranks the
    // corpus with it. Throws ValidationError on a vocabulary size mismatch.
    void set_model(ModelState model);

    // CAL: the top `count` unjudged, unqueued documents by model score.
    // S-CAL: the same but drawn only from the current batch segment and
    // capped by the remaining budget. Returned ids become pending.
    // Throws ConflictError if no model has been trained yet.
    std::vector<std::string> next_documents(std::size_t count);

    // Applies a judgment. Returns false when an effective judgment with a
    // later timestamp already exists (the incoming one is then ignored).
    // Throws NotFoundError for an unknown document, ValidationError for a
    // bad label, wrong topic or the synthetic seed, and ConflictError when
    // an S-CAL first-time judgment would exceed the budget.
    bool record_judgment(const Judgment& judgment);

    bool should_stop() const;

    // Grows the batch and retires the current segment. The next segment is
    // selected from the ranking in force at the next next_documents() call.
    void advance_batch();

    const Topic& topic() const noexcept { return topic_; }
    ReviewMode mode() const noexcept { return options_.mode; }
    const SessionOptions& options() const noexcept { return options_; }
    const Collection& collection() const noexcept { return *collection_; }
    std::shared_ptr<const Collection> shared_collection() const noexcept { return collection_; }

    std::size_t relevant_count() const noexcept { return m_; }      // m
    std::size_t not_relevant_count() const noexcept { return n_; }  // n
    std::size_t assessed_count() const noexcept { return judgments_.size(); }
    std::optional<std::size_t> budget() const noexcept { return budget_; }
    std::optional<std::size_t> budget_remaining() const;

    std::size_t batch_index() const noexcept { return batch_index_; }
    std::size_t batch_size() const noexcept { return batch_size_; }
    const std::vector<std::string>& segment() const noexcept { return segment_; }

    const std::vector<std::string>& pending() const noexcept { return pending_; }
    const std::map<std::string, EffectiveJudgment>& judgments() const noexcept { return judgments_; }
    const EffectiveJudgment* find_judgment(const std::string& doc_id) const;

    bool has_model() const noexcept { return model_.has_value(); }
    bool model_stale() const noexcept { return stale_; }
    const ModelState& model() const;
    const TrainingComposition& last_training() const noexcept { return last_training_; }
    std::size_t refresh_count() const noexcept { return refresh_count_; }

    // Model score of every corpus document (corpus order), from the last refresh.
    const std::vector<double>& scores() const noexcept { return scores_; }
    // Corpus positions in ranking order from the last refresh.
    const std::vector<std::size_t>& ranking() const noexcept { return order_; }
    std::size_t unjudged_count() const { return collection_->corpus().size() - judgments_.size(); }

private:
    void install(ModelState model);
    void form_segment();
    bool is_pending(const std::string& doc_id) const;

    Topic topic_;
    std::shared_ptr<const Collection> collection_;
    SessionOptions options_;
    std::optional<std::size_t> budget_;

    std::map<std::string, EffectiveJudgment> judgments_;
    std::size_t m_ = 0;
    std::size_t n_ = 0;
    std::uint64_t next_sequence_ = 0;

    std::size_t batch_index_ = 0;
    std::size_t batch_size_ = 1;
    std::vector<std::string> segment_;
    bool segment_formed_ = false;
    std::set<std::string> segmented_;

    std::vector<std::string> pending_;

    std::optional<ModelState> model_;
    bool stale_ = true;
    std::vector<double> scores_;
    std::vector<std::size_t> order_;
    TrainingComposition last_training_;
    std::size_t refresh_count_ = 0;
};

// Answers from a fixed truth table; pairs it does not know are label 0.
class SimulatedAssessor {
public:
    SimulatedAssessor() = default;
    explicit SimulatedAssessor(std::map<std::pair<int, std::string>, int> truth) : truth_(std::move(truth)) {}

    void set(int topic_id, const std::string& doc_id, int label) { truth_[{topic_id, doc_id}] = label; }
    int judge(int topic_id, const std::string& doc_id) const;
    // Documents with label >= 1 for the topic.
    std::size_t relevant_count(int topic_id) const;

private:
    std::map<std::pair<int, std::string>, int> truth_;
};

struct TranscriptEntry {
    std::string doc_id;
    int label = 0;
    std::size_t m = 0;
    std::size_t n = 0;
    bool stop = false;

    bool operator==(const TranscriptEntry&) const = default;
};

// Runs refresh -> next_documents(batch) -> judge until should_stop(), the
// corpus runs out or `max_assessments` judgments have been made.
std::vector<TranscriptEntry> run_simulated(Session& session, const SimulatedAssessor& oracle,
                                           std::size_t max_assessments);

}  // namespace calrev
