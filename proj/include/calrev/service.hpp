#pragma once

#include "calrev/collection.hpp"
#include "calrev/journal.hpp"
#include "calrev/run.hpp"
#include "calrev/session.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace calrev {

struct Lease {
    int topic_id = 0;
    std::string doc_id;
    std::string assessor_id;
    std::int64_t expires_at = 0;  // UTC seconds
};

inline constexpr std::int64_t kDefaultLeaseTtlSeconds = 600;
inline constexpr std::size_t kHighlightTerms = 5;

struct ServiceConfig {
    std::filesystem::path data_dir = "data";
    std::int64_t lease_ttl_seconds = kDefaultLeaseTtlSeconds;
    SessionOptions session;
};

struct DocumentPayload {
    DocumentRecord document;
    std::vector<std::string> highlight_terms;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t assessed_count = 0;
    std::optional<std::size_t> budget_remaining;
    bool stop_recommended = false;
    std::int64_t lease_expires_at = 0;
};

struct JudgmentAck {
    std::string doc_id;
    int label = 0;
    bool applied = true;  // false if a later-timestamped judgment was already in force
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t assessed_count = 0;
    std::optional<std::size_t> budget_remaining;
    bool stop_recommended = false;
};

struct StatusReport {
    int topic_id = 0;
    ReviewMode mode = ReviewMode::cal;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t assessed_count = 0;
    std::size_t batch_index = 0;
    std::size_t batch_size = 1;
    std::optional<std::size_t> budget_remaining;
    bool stop_recommended = false;
    bool model_trained = false;
    std::size_t active_leases = 0;
    std::map<std::string, std::size_t> assessments_by_assessor;
};

std::int64_t system_clock_seconds();

// The review loop behind the HTTP API, one Session per topic.
//
// Every mutation of a topic runs under that topic's lock, so judgments to
// one topic are applied in a single total order. A judgment is appended to
// the topic's journal (and fsync'd) before it is applied or acknowledged;
// on construction each journal is replayed, so the journal is the source of
// truth. Stopping is advisory: documents keep being served after the stop
// rule fires. The model is retrained after every completed batch.
class AssessorService {
public:
    using Clock = std::function<std::int64_t()>;

    AssessorService(std::shared_ptr<const Collection> collection, ServiceConfig config,
                    Clock clock = system_clock_seconds);
    ~AssessorService();

    std::vector<int> topic_ids() const;
    const Collection& collection() const noexcept { return *collection_; }

    // Highest-ranked unjudged document not leased to someone else; leases it
    // to `assessor`. An assessor asking again gets its current lease back.
    // nullopt when nothing is left. Trains the initial model on first use.
    std::optional<DocumentPayload> next(int topic_id, const std::string& assessor);

    // Throws ValidationError (bad label or assessor), NotFoundError (topic or
    // document), ConflictError (document leased to another assessor, or the
    // S-CAL budget is spent).
    JudgmentAck judge(int topic_id, const std::string& doc_id, const std::string& assessor, int label);

    // Served from the snapshot taken after the last mutation.
    StatusReport status(int topic_id) const;

    // Throws ConflictError if the topic has no trained model yet.
    std::vector<RunEntry> export_run(int topic_id, OrderingMethod method, std::size_t depth = kDefaultRunDepth,
                                     const std::string& tag = "");

    // Copy of the topic's current session.
    Session session_copy(int topic_id) const;
    std::filesystem::path journal_path(int topic_id) const;

private:
    struct Worker;

    Worker& worker(int topic_id) const;
    void publish(Worker& w) const;
    void purge_expired(Worker& w, std::int64_t now) const;

    std::shared_ptr<const Collection> collection_;
    ServiceConfig config_;
    Clock clock_;
    std::map<int, std::unique_ptr<Worker>> workers_;
};

}  // namespace calrev
