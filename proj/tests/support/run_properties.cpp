#include "run_properties.hpp"

#include "calrev/corpus.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace testsupport {

using namespace calrev;

std::vector<std::string> expected_order(const Session& session, OrderingMethod method, std::size_t depth) {
    std::vector<std::tuple<std::int64_t, std::uint64_t, std::string>> blocks[3];
    for (const auto& [id, j] : session.judgments()) blocks[j.label].emplace_back(j.timestamp, j.sequence, id);
    for (auto& b : blocks) std::sort(b.begin(), b.end());

    const auto& corpus = session.collection().corpus();
    std::vector<std::pair<double, std::string>> scored;
    for (std::size_t pos = 0; pos < corpus.size(); ++pos) {
        const auto& id = corpus.at(pos).doc_id;
        if (method != OrderingMethod::ii && session.find_judgment(id)) continue;
        scored.emplace_back(-session.scores()[pos], id);
    }
    std::sort(scored.begin(), scored.end());

    std::vector<std::string> out;
    auto take = [&](const auto& block) {
        for (const auto& entry : block) out.push_back(std::get<2>(entry));
    };
    if (method != OrderingMethod::ii) {
        take(blocks[2]);
        take(blocks[1]);
        if (method == OrderingMethod::iii) take(blocks[0]);
    }
    for (const auto& [neg, id] : scored) out.push_back(id);
    if (out.size() > depth) out.resize(depth);
    return out;
}

std::string check_run(const Session& session, OrderingMethod method, std::size_t depth,
                      const std::vector<RunEntry>& run) {
    std::ostringstream why;
    const auto expected = expected_order(session, method, depth);
    if (run.size() != expected.size()) {
        why << "run has " << run.size() << " entries, expected " << expected.size();
        return why.str();
    }
    for (std::size_t i = 0; i < run.size(); ++i) {
        const auto& e = run[i];
        if (e.doc_id != expected[i]) {
            why << "rank " << i + 1 << " holds " << e.doc_id << ", expected " << expected[i];
            return why.str();
        }
        if (is_synthetic_id(e.doc_id)) return "synthetic document " + e.doc_id + " in run";
        if (e.rank != static_cast<int>(i + 1)) return "rank numbering broken at " + e.doc_id;
        if (e.topic_id != session.topic().topic_id) return "wrong topic at " + e.doc_id;
        if (i > 0 && !(e.score < run[i - 1].score)) return "scores not strictly decreasing at " + e.doc_id;
    }
    return {};
}

}  // namespace testsupport
