#include "calrev/collection.hpp"

#include "calrev/errors.hpp"

namespace calrev {

std::shared_ptr<const Collection> Collection::build(Corpus corpus, std::vector<Topic> topics,
                                                    std::optional<Vocabulary> vocab) {
    std::shared_ptr<Collection> c(new Collection());
    std::vector<DocumentRecord> seeds;
    for (const auto& topic : topics) {
        check_synthetic_collision(corpus, topic);
        if (c->synthetic_.contains(topic.topic_id))
            throw SchemaError("duplicate topic number " + std::to_string(topic.topic_id));
        auto seed = make_synthetic_document(topic);
        c->synthetic_.emplace(topic.topic_id, seed);
        seeds.push_back(std::move(seed));
    }
    c->vocab_ = vocab ? std::move(*vocab) : Vocabulary::build(corpus, seeds);

    c->vectors_.reserve(corpus.size());
    for (const auto& doc : corpus.documents()) c->vectors_.push_back(vectorize(doc, c->vocab_));
    for (const auto& [id, doc] : c->synthetic_) c->synthetic_vectors_.emplace(id, vectorize(doc, c->vocab_));

    c->corpus_ = std::move(corpus);
    c->topics_ = std::move(topics);
    return c;
}

const Topic* Collection::find_topic(int topic_id) const {
    for (const auto& t : topics_) {
        if (t.topic_id == topic_id) return &t;
    }
    return nullptr;
}

const SparseVector* Collection::find_vector(const std::string& doc_id) const {
    auto pos = corpus_.find(doc_id);
    return pos ? &vectors_[*pos] : nullptr;
}

const DocumentRecord& Collection::synthetic(int topic_id) const {
    auto it = synthetic_.find(topic_id);
    if (it == synthetic_.end()) throw NotFoundError("unknown topic " + std::to_string(topic_id));
    return it->second;
}

const SparseVector& Collection::synthetic_vector(int topic_id) const {
    auto it = synthetic_vectors_.find(topic_id);
    if (it == synthetic_vectors_.end()) throw NotFoundError("unknown topic " + std::to_string(topic_id));
    return it->second;
}

VectorLookup Collection::lookup() const {
    return [this](const std::string& doc_id) { return find_vector(doc_id); };
}

}  // namespace calrev
