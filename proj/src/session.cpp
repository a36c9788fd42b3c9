#include "calrev/session.hpp"

#include "calrev/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace calrev {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::string_view to_string(ReviewMode mode) { return mode == ReviewMode::cal ? "cal" : "scal"; }

ReviewMode parse_review_mode(std::string_view name) {
    if (name == "cal") return ReviewMode::cal;
    if (name == "scal" || name == "s-cal") return ReviewMode::scal;
    throw ValidationError("unknown mode '" + std::string(name) + "' (expected cal or scal)");
}

void StoppingConfig::validate() const {
    if (!(a >= 0.0)) throw ValidationError("stopping slope a must be >= 0");
    if (!(b >= 0.0)) throw ValidationError("stopping overhead b must be >= 0");
}

std::size_t next_batch_size(std::size_t size) { return size + (size + 9) / 10; }

Session::Session(Topic topic, std::shared_ptr<const Collection> collection, SessionOptions options)
    : topic_(std::move(topic)), collection_(std::move(collection)), options_(options) {
    if (!collection_) throw Error("session requires a collection");
    options_.stopping.validate();
    options_.learner.validate();
    check_synthetic_collision(collection_->corpus(), topic_);
    // Throws NotFoundError if the collection was not fitted with this topic.
    (void)collection_->synthetic_vector(topic_.topic_id);
    if (options_.mode == ReviewMode::scal) budget_ = options_.budget.value_or(kDefaultScalBudget);
}

std::optional<std::size_t> Session::budget_remaining() const {
    if (!budget_) return std::nullopt;
    return *budget_ > judgments_.size() ? *budget_ - judgments_.size() : 0;
}

const EffectiveJudgment* Session::find_judgment(const std::string& doc_id) const {
    auto it = judgments_.find(doc_id);
    return it == judgments_.end() ? nullptr : &it->second;
}

const ModelState& Session::model() const {
    if (!model_) throw ConflictError("topic " + std::to_string(topic_.topic_id) + " has no trained model");
    return *model_;
}

bool Session::is_pending(const std::string& doc_id) const {
    return std::find(pending_.begin(), pending_.end(), doc_id) != pending_.end();
}

void Session::refresh_model() {
    const auto& corpus = collection_->corpus();
    std::vector<LabeledExample> examples;
    examples.reserve(1 + judgments_.size() + kAugmentationSize);

    TrainingComposition composition;
    examples.push_back({collection_->synthetic_vector(topic_.topic_id), Label::relevant});
    composition.synthetic = 1;
    for (const auto& [doc_id, j] : judgments_) {
        const bool relevant = j.label >= kPartiallyRelevant;
        examples.push_back({*collection_->find_vector(doc_id), relevant ? Label::relevant : Label::not_relevant});
        ++(relevant ? composition.relevant : composition.not_relevant);
    }

    // The training seed depends only on the session seed and the judgment
    // set, so a session rebuilt from its journal trains the same model.
    const std::uint64_t round_seed = splitmix64(options_.seed ^ splitmix64(judgments_.size()));

    const bool augment = options_.mode == ReviewMode::scal || composition.not_relevant == 0;
    if (augment) {
        std::vector<std::size_t> unjudged;
        unjudged.reserve(corpus.size() - judgments_.size());
        for (std::size_t pos = 0; pos < corpus.size(); ++pos) {
            if (!judgments_.contains(corpus.at(pos).doc_id)) unjudged.push_back(pos);
        }
        std::vector<std::size_t> sample;
        std::mt19937_64 rng(round_seed);
        std::sample(unjudged.begin(), unjudged.end(), std::back_inserter(sample), kAugmentationSize, rng);
        for (std::size_t pos : sample) examples.push_back({collection_->vector(pos), Label::not_relevant});
        composition.augmentation = sample.size();
    }

    LearnerConfig config = options_.learner;
    config.seed = splitmix64(round_seed);
    install(train(examples, config, collection_->vocabulary().size()));
    last_training_ = composition;
    ++refresh_count_;
}

void Session::set_model(ModelState model) {
    if (model.weights.size() != collection_->vocabulary().size())
        throw ValidationError("model has " + std::to_string(model.weights.size()) + " weights, vocabulary has " +
                              std::to_string(collection_->vocabulary().size()) + " terms");
    install(std::move(model));
}

void Session::install(ModelState model) {
    const auto& corpus = collection_->corpus();
    model_ = std::move(model);
    scores_.resize(corpus.size());
    for (std::size_t pos = 0; pos < corpus.size(); ++pos) scores_[pos] = score(*model_, collection_->vector(pos));
    order_.resize(corpus.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        if (scores_[a] != scores_[b]) return scores_[a] > scores_[b];
        return corpus.at(a).doc_id < corpus.at(b).doc_id;
    });
    stale_ = false;
}

void Session::form_segment() {
    const auto& corpus = collection_->corpus();
    segment_.clear();
    for (std::size_t pos : order_) {
        if (segment_.size() >= batch_size_) break;
        const auto& id = corpus.at(pos).doc_id;
        if (judgments_.contains(id) || segmented_.contains(id) || is_pending(id)) continue;
        segment_.push_back(id);
        segmented_.insert(id);
    }
    segment_formed_ = true;
}

std::vector<std::string> Session::next_documents(std::size_t count) {
    if (!model_) throw ConflictError("topic " + std::to_string(topic_.topic_id) + " has no trained model");
    std::vector<std::string> out;
    if (options_.mode == ReviewMode::cal) {
        const auto& corpus = collection_->corpus();
        for (std::size_t pos : order_) {
            if (out.size() >= count) break;
            const auto& id = corpus.at(pos).doc_id;
            if (judgments_.contains(id) || is_pending(id)) continue;
            out.push_back(id);
        }
    } else {
        if (!segment_formed_) form_segment();
        const std::size_t remaining = budget_remaining().value_or(0);
        const std::size_t allowed = remaining > pending_.size() ? remaining - pending_.size() : 0;
        count = std::min(count, allowed);
        for (const auto& id : segment_) {
            if (out.size() >= count) break;
            if (judgments_.contains(id) || is_pending(id)) continue;
            out.push_back(id);
        }
    }
    pending_.insert(pending_.end(), out.begin(), out.end());
    return out;
}

bool Session::record_judgment(const Judgment& judgment) {
    if (judgment.topic_id != topic_.topic_id)
        throw ValidationError("judgment for topic " + std::to_string(judgment.topic_id) + " sent to topic " +
                              std::to_string(topic_.topic_id));
    if (judgment.label < kNotRelevant || judgment.label > kRelevant)
        throw ValidationError("label " + std::to_string(judgment.label) + " is not one of 0, 1, 2");
    if (is_synthetic_id(judgment.doc_id))
        throw ValidationError("synthetic document '" + judgment.doc_id + "' cannot be judged");
    if (!collection_->corpus().contains(judgment.doc_id))
        throw NotFoundError("unknown document '" + judgment.doc_id + "'");

    auto it = judgments_.find(judgment.doc_id);
    const bool first_time = it == judgments_.end();
    if (first_time && budget_ && judgments_.size() >= *budget_)
        throw ConflictError("assessment budget of " + std::to_string(*budget_) + " is exhausted for topic " +
                            std::to_string(topic_.topic_id));

    std::erase(pending_, judgment.doc_id);
    if (!first_time && judgment.timestamp < it->second.timestamp) return false;

    EffectiveJudgment next{judgment.label, judgment.assessor_id, judgment.timestamp, next_sequence_++};
    if (!first_time) {
        (it->second.label >= kPartiallyRelevant ? m_ : n_) -= 1;
        it->second = std::move(next);
    } else {
        it = judgments_.emplace(judgment.doc_id, std::move(next)).first;
    }
    (it->second.label >= kPartiallyRelevant ? m_ : n_) += 1;
    stale_ = true;
    return true;
}

bool Session::should_stop() const {
    if (options_.mode == ReviewMode::cal) return options_.stopping.satisfied(m_, n_);
    return judgments_.size() >= *budget_ || unjudged_count() == 0;
}

void Session::advance_batch() {
    ++batch_index_;
    batch_size_ = next_batch_size(batch_size_);
    segment_.clear();
    segment_formed_ = false;
}

int SimulatedAssessor::judge(int topic_id, const std::string& doc_id) const {
    auto it = truth_.find({topic_id, doc_id});
    return it == truth_.end() ? kNotRelevant : it->second;
}

std::size_t SimulatedAssessor::relevant_count(int topic_id) const {
    std::size_t count = 0;
    for (const auto& [key, label] : truth_) {
        if (key.first == topic_id && label >= kPartiallyRelevant) ++count;
    }
    return count;
}

std::vector<TranscriptEntry> run_simulated(Session& session, const SimulatedAssessor& oracle,
                                           std::size_t max_assessments) {
    std::vector<TranscriptEntry> transcript;
    const int topic_id = session.topic().topic_id;
    std::int64_t clock = 0;
    while (transcript.size() < max_assessments && !session.should_stop()) {
        session.refresh_model();
        const auto docs = session.next_documents(session.batch_size());
        if (docs.empty()) break;
        for (const auto& doc_id : docs) {
            const int label = oracle.judge(topic_id, doc_id);
            session.record_judgment({topic_id, doc_id, label, "simulated", clock++});
            const bool stop = session.should_stop();
            transcript.push_back(
                {doc_id, label, session.relevant_count(), session.not_relevant_count(), stop});
            if (stop || transcript.size() >= max_assessments) return transcript;
        }
        session.advance_batch();
    }
    return transcript;
}

}  // namespace calrev
