#include "calrev/service.hpp"

#include "calrev/errors.hpp"

#include <algorithm>
#include <chrono>

namespace calrev {

struct AssessorService::Worker {
    Worker(Session s, JournalWriter j) : session(std::move(s)), journal(std::move(j)) {}

    mutable std::mutex mutex;
    Session session;
    JournalWriter journal;
    std::map<std::string, Lease> leases;  // doc_id -> lease
    std::size_t judged_since_retrain = 0;
    std::int64_t last_timestamp = 0;
    std::map<std::string, std::size_t> by_assessor;

    mutable std::mutex snapshot_mutex;
    std::shared_ptr<const StatusReport> snapshot;
};

std::int64_t system_clock_seconds() {
    using namespace std::chrono;
    return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

AssessorService::AssessorService(std::shared_ptr<const Collection> collection, ServiceConfig config, Clock clock)
    : collection_(std::move(collection)), config_(std::move(config)), clock_(std::move(clock)) {
    if (!collection_) throw Error("service requires a collection");
    if (config_.lease_ttl_seconds <= 0) throw ValidationError("lease TTL must be positive");
    std::filesystem::create_directories(config_.data_dir);

    for (const auto& topic : collection_->topics()) {
        Session session(topic, collection_, config_.session);
        const auto path = journal_path(topic.topic_id);
        auto w = std::make_unique<Worker>(std::move(session), JournalWriter(path));
        std::vector<Judgment> replayed;
        std::size_t trained_prefix = 0;
        for (auto& j : read_journal(path)) {
            if (j.topic_id != topic.topic_id) continue;
            w->session.record_judgment(j);
            ++w->by_assessor[j.assessor_id];
            w->last_timestamp = std::max(w->last_timestamp, j.timestamp);
            replayed.push_back(std::move(j));
            if (++w->judged_since_retrain >= w->session.batch_size()) {
                w->session.advance_batch();
                w->judged_since_retrain = 0;
                trained_prefix = replayed.size();
            }
        }
        if (!replayed.empty()) {
            // Rebuild the model the service was serving from: the one trained
            // at the last completed batch.
            Session at_retrain(topic, collection_, config_.session);
            replay_journal(std::span(replayed).first(trained_prefix), at_retrain);
            at_retrain.refresh_model();
            w->session.set_model(at_retrain.model());
        }
        publish(*w);
        workers_.emplace(topic.topic_id, std::move(w));
    }
}

AssessorService::~AssessorService() = default;

std::filesystem::path AssessorService::journal_path(int topic_id) const {
    return config_.data_dir / ("journal-" + std::to_string(topic_id) + ".jsonl");
}

std::vector<int> AssessorService::topic_ids() const {
    std::vector<int> ids;
    for (const auto& [id, w] : workers_) ids.push_back(id);
    return ids;
}

AssessorService::Worker& AssessorService::worker(int topic_id) const {
    auto it = workers_.find(topic_id);
    if (it == workers_.end()) throw NotFoundError("unknown topic " + std::to_string(topic_id));
    return *it->second;
}

void AssessorService::purge_expired(Worker& w, std::int64_t now) const {
    std::erase_if(w.leases, [now](const auto& kv) { return kv.second.expires_at <= now; });
}

void AssessorService::publish(Worker& w) const {
    auto report = std::make_shared<StatusReport>();
    const auto& s = w.session;
    report->topic_id = s.topic().topic_id;
    report->mode = s.mode();
    report->m = s.relevant_count();
    report->n = s.not_relevant_count();
    report->assessed_count = s.assessed_count();
    report->batch_index = s.batch_index();
    report->batch_size = s.batch_size();
    report->budget_remaining = s.budget_remaining();
    report->stop_recommended = s.should_stop();
    report->model_trained = s.has_model();
    report->active_leases = w.leases.size();
    report->assessments_by_assessor = w.by_assessor;
    std::lock_guard lock(w.snapshot_mutex);
    w.snapshot = std::move(report);
}

std::optional<DocumentPayload> AssessorService::next(int topic_id, const std::string& assessor) {
    if (assessor.empty()) throw ValidationError("assessor id is required");
    auto& w = worker(topic_id);
    std::lock_guard lock(w.mutex);
    auto& session = w.session;
    if (!session.has_model()) session.refresh_model();

    const std::int64_t now = clock_();
    purge_expired(w, now);

    const auto& corpus = collection_->corpus();
    std::optional<std::size_t> chosen;
    for (const auto& [doc_id, lease] : w.leases) {
        if (lease.assessor_id == assessor && !session.find_judgment(doc_id)) {
            chosen = corpus.find(doc_id);
            break;
        }
    }
    if (!chosen) {
        for (std::size_t pos : session.ranking()) {
            const auto& id = corpus.at(pos).doc_id;
            if (session.find_judgment(id) || w.leases.contains(id)) continue;
            chosen = pos;
            w.leases[id] = Lease{topic_id, id, assessor, now + config_.lease_ttl_seconds};
            break;
        }
    }
    publish(w);
    if (!chosen) return std::nullopt;

    const auto& doc = corpus.at(*chosen);
    DocumentPayload payload;
    payload.document = doc;
    payload.highlight_terms = top_terms(session.model(), doc, collection_->vocabulary(), kHighlightTerms);
    payload.m = session.relevant_count();
    payload.n = session.not_relevant_count();
    payload.assessed_count = session.assessed_count();
    payload.budget_remaining = session.budget_remaining();
    payload.stop_recommended = session.should_stop();
    payload.lease_expires_at = w.leases.at(doc.doc_id).expires_at;
    return payload;
}

JudgmentAck AssessorService::judge(int topic_id, const std::string& doc_id, const std::string& assessor, int label) {
    if (assessor.empty()) throw ValidationError("assessor id is required");
    if (label < kNotRelevant || label > kRelevant)
        throw ValidationError("label " + std::to_string(label) + " is not one of 0, 1, 2");
    auto& w = worker(topic_id);
    std::lock_guard lock(w.mutex);
    auto& session = w.session;

    if (is_synthetic_id(doc_id)) throw ValidationError("synthetic document '" + doc_id + "' cannot be judged");
    if (!collection_->corpus().contains(doc_id)) throw NotFoundError("unknown document '" + doc_id + "'");

    const std::int64_t now = clock_();
    purge_expired(w, now);
    if (auto it = w.leases.find(doc_id); it != w.leases.end() && it->second.assessor_id != assessor)
        throw ConflictError("document '" + doc_id + "' is leased to another assessor");

    const bool first_time = session.find_judgment(doc_id) == nullptr;
    if (first_time) {
        if (auto remaining = session.budget_remaining(); remaining && *remaining == 0)
            throw ConflictError("assessment budget is exhausted for topic " + std::to_string(topic_id));
    }

    // Timestamps never run backwards within a topic, so a later submission
    // always supersedes an earlier one.
    const Judgment judgment{topic_id, doc_id, label, assessor, std::max(now, w.last_timestamp)};
    w.journal.append(judgment);
    w.last_timestamp = judgment.timestamp;

    JudgmentAck ack;
    ack.doc_id = doc_id;
    ack.label = label;
    ack.applied = session.record_judgment(judgment);
    w.leases.erase(doc_id);
    ++w.by_assessor[assessor];

    if (++w.judged_since_retrain >= session.batch_size()) {
        session.advance_batch();
        session.refresh_model();
        w.judged_since_retrain = 0;
    }

    ack.m = session.relevant_count();
    ack.n = session.not_relevant_count();
    ack.assessed_count = session.assessed_count();
    ack.budget_remaining = session.budget_remaining();
    ack.stop_recommended = session.should_stop();
    publish(w);
    return ack;
}

StatusReport AssessorService::status(int topic_id) const {
    auto& w = worker(topic_id);
    std::shared_ptr<const StatusReport> snapshot;
    {
        std::lock_guard lock(w.snapshot_mutex);
        snapshot = w.snapshot;
    }
    return *snapshot;
}

std::vector<RunEntry> AssessorService::export_run(int topic_id, OrderingMethod method, std::size_t depth,
                                                  const std::string& tag) {
    auto& w = worker(topic_id);
    std::lock_guard lock(w.mutex);
    const std::string run_tag = tag.empty() ? "calrev-" + std::string(to_string(method)) : tag;
    return build_run(w.session, method, depth, run_tag);
}

Session AssessorService::session_copy(int topic_id) const {
    auto& w = worker(topic_id);
    std::lock_guard lock(w.mutex);
    return w.session;
}

}  // namespace calrev
