#pragma once

#include "calrev/corpus.hpp"
#include "calrev/features.hpp"
#include "calrev/learner.hpp"

#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace calrev {

// Everything a review session reads but never mutates: the corpus, the
// topics with their synthetic seeds, the fitted vocabulary and one feature
// vector per document. Built once per corpus release and shared.
class Collection {
public:
    // Fits the vocabulary over corpus + synthetic seeds unless `vocab` is
    // given (e.g. loaded from an ingest cache). Throws SchemaError on a
    // synthetic id collision or a duplicate topic.
    static std::shared_ptr<const Collection> build(Corpus corpus, std::vector<Topic> topics,
                                                   std::optional<Vocabulary> vocab = std::nullopt);

    const Corpus& corpus() const noexcept { return corpus_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const std::vector<Topic>& topics() const noexcept { return topics_; }
    const Topic* find_topic(int topic_id) const;

    const SparseVector& vector(std::size_t pos) const { return vectors_.at(pos); }
    const SparseVector* find_vector(const std::string& doc_id) const;

    const DocumentRecord& synthetic(int topic_id) const;
    const SparseVector& synthetic_vector(int topic_id) const;

    VectorLookup lookup() const;

private:
    Collection() = default;

    Corpus corpus_;
    std::vector<Topic> topics_;
    Vocabulary vocab_;
    std::vector<SparseVector> vectors_;
    std::map<int, DocumentRecord> synthetic_;
    std::map<int, SparseVector> synthetic_vectors_;
};

}  // namespace calrev
