#pragma once

#include "calrev/run.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace calrev {

// Graded judgments: topic -> doc -> grade in {0, 1, 2}.
struct Qrels {
    std::map<int, std::map<std::string, int>> topics;
    std::size_t duplicate_pairs = 0;

    std::optional<int> grade(int topic_id, const std::string& doc_id) const;
    const std::map<std::string, int>* topic(int topic_id) const;
    std::size_t relevant_count(int topic_id) const;
};

// Lines of "topic iteration doc grade". A repeated (topic, doc) keeps the
// last grade and is counted in duplicate_pairs. Throws ParseError with the
// line number on a malformed line or a grade outside {0, 1, 2}.
Qrels parse_qrels(std::istream& in);
Qrels parse_qrels_file(const std::filesystem::path& path);

struct EvalOptions {
    double rbp_p = 0.5;
    std::vector<int> ndcg_cutoffs{10, 20};
    std::vector<int> precision_cutoffs{5, 10, 15, 20, 30};

    void validate() const;
};

struct TopicMetrics {
    int topic_id = 0;
    std::size_t retrieved = 0;
    std::size_t relevant = 0;
    std::size_t relevant_retrieved = 0;
    double average_precision = 0.0;
    double bpref = 0.0;
    double r_precision = 0.0;
    double rbp = 0.0;
    double rbp_residual = 0.0;
    std::map<int, double> ndcg;       // cutoff -> value
    std::map<int, double> precision;  // cutoff -> value
};

struct MetricsReport {
    EvalOptions options;
    std::vector<TopicMetrics> topics;  // one per qrels topic, ascending id
    TopicMetrics mean;                 // arithmetic means; counts are sums
    std::vector<int> skipped_topics;   // in the run but absent from qrels
};

// Metrics for one ranked list. Binary relevance is grade >= 1; NDCG uses
// the grade as gain with a 1/log2(rank + 1) discount. Documents missing
// from `judged` are non-relevant, except that bpref skips them and RBP
// books their weight as residual.
TopicMetrics evaluate_topic(std::span<const std::string> ranked, const std::map<std::string, int>& judged,
                            const EvalOptions& options);

// Scores every qrels topic (an absent run topic scores as an empty list).
MetricsReport evaluate(std::span<const RunEntry> run, const Qrels& qrels, const EvalOptions& options = {});

void write_report_text(const MetricsReport& report, std::ostream& out, bool per_topic = false);
// "metric,topic,value" rows; the mean row uses topic "all".
void write_report_csv(const MetricsReport& report, std::ostream& out);

}  // namespace calrev
