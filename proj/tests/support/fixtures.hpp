#pragma once

#include "calrev/collection.hpp"
#include "calrev/session.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

namespace testsupport {

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("calrev-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline calrev::DocumentRecord doc(std::string id, std::string title, std::string abstract = "") {
    calrev::DocumentRecord d;
    d.doc_id = std::move(id);
    d.title = std::move(title);
    d.abstract = std::move(abstract);
    return d;
}

inline calrev::Topic topic(int id, std::string query) {
    calrev::Topic t;
    t.topic_id = id;
    t.query = std::move(query);
    return t;
}

inline std::shared_ptr<const calrev::Collection> collection(const std::vector<calrev::DocumentRecord>& docs,
                                                            std::vector<calrev::Topic> topics) {
    calrev::Corpus corpus;
    for (const auto& d : docs) corpus.add(d);
    return calrev::Collection::build(std::move(corpus), std::move(topics));
}

// Quick learner settings for tests that do not care about model quality.
inline calrev::SessionOptions fast_options(calrev::ReviewMode mode = calrev::ReviewMode::cal) {
    calrev::SessionOptions o;
    o.mode = mode;
    o.learner.iterations = 2000;
    return o;
}

inline calrev::Judgment judgment(int topic, std::string doc, int label, std::int64_t ts = 0,
                                 std::string assessor = "a") {
    return {topic, std::move(doc), label, std::move(assessor), ts};
}

}  // namespace testsupport
