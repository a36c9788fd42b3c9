#include "calrev/errors.hpp"
#include "calrev/session.hpp"

#include "fixtures.hpp"
#include "synthetic_corpus.hpp"

#include <doctest.h>

#include <set>

using namespace calrev;
using testsupport::fast_options;
using testsupport::judgment;

namespace {

// 150 documents; "hit" documents share the topic's query words.
std::shared_ptr<const Collection> small_collection() {
    std::vector<DocumentRecord> docs;
    for (int i = 0; i < 150; ++i) {
        const std::string id = "d" + std::to_string(i);
        docs.push_back(i < 15 ? testsupport::doc(id, "mask efficacy study " + std::to_string(i))
                              : testsupport::doc(id, "unrelated filler text number " + std::to_string(i)));
    }
    return testsupport::collection(docs, {testsupport::topic(1, "mask efficacy")});
}

Session make_session(ReviewMode mode = ReviewMode::cal) {
    auto c = small_collection();
    return Session(*c->find_topic(1), c, fast_options(mode));
}

}  // namespace

TEST_CASE("batch size recurrence") {
    const std::vector<std::size_t> expected{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 13, 15,
                                            17, 19, 21, 24, 27, 30, 33, 37, 41, 46, 51, 57};
    std::size_t size = 1;
    for (std::size_t e : expected) {
        CHECK(size == e);
        size = next_batch_size(size);
    }
}

TEST_CASE("stopping rule examples") {
    StoppingConfig s;
    CHECK_FALSE(s.satisfied(10, 59));
    CHECK(s.satisfied(10, 60));
    CHECK(StoppingConfig{0, 0}.satisfied(0, 0));
    StoppingConfig bad{-1, 0};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("fresh session trains on the seed plus 100 augmentation negatives") {
    auto s = make_session();
    CHECK_FALSE(s.has_model());
    CHECK_THROWS_AS(s.next_documents(1), ConflictError);
    CHECK_THROWS_AS(s.model(), ConflictError);
    s.refresh_model();
    CHECK(s.last_training() == TrainingComposition{1, 0, 0, 100});
    CHECK(s.last_training().total() == 101);
}

TEST_CASE("CAL augments only until a real not-relevant judgment exists") {
    auto s = make_session();
    for (int i = 0; i < 10; ++i) s.record_judgment(judgment(1, "d" + std::to_string(i), 2, i));
    s.refresh_model();
    CHECK(s.last_training() == TrainingComposition{1, 10, 0, 100});
    s.record_judgment(judgment(1, "d100", 0, 20));
    s.refresh_model();
    CHECK(s.last_training() == TrainingComposition{1, 10, 1, 0});
}

TEST_CASE("S-CAL always augments") {
    auto s = make_session(ReviewMode::scal);
    s.record_judgment(judgment(1, "d0", 2));
    s.record_judgment(judgment(1, "d100", 0));
    s.refresh_model();
    CHECK(s.last_training() == TrainingComposition{1, 1, 1, 100});
}

TEST_CASE("augmentation never samples judged documents and is capped by what is left") {
    std::vector<DocumentRecord> docs;
    for (int i = 0; i < 30; ++i) docs.push_back(testsupport::doc("d" + std::to_string(i), "w" + std::to_string(i)));
    auto c = testsupport::collection(docs, {testsupport::topic(1, "w1")});
    Session s(*c->find_topic(1), c, fast_options(ReviewMode::scal));
    for (int i = 0; i < 10; ++i) s.record_judgment(judgment(1, "d" + std::to_string(i), i % 2 ? 2 : 0));
    s.refresh_model();
    CHECK(s.last_training().augmentation == 20);
}

TEST_CASE("re-judgment replaces the earlier label") {
    auto s = make_session();
    CHECK(s.record_judgment(judgment(1, "d3", 0, 10)));
    CHECK(s.not_relevant_count() == 1);
    CHECK(s.record_judgment(judgment(1, "d3", 2, 11)));
    CHECK(s.relevant_count() == 1);
    CHECK(s.not_relevant_count() == 0);
    CHECK(s.assessed_count() == 1);
    CHECK(s.find_judgment("d3")->label == 2);
    CHECK_FALSE(s.record_judgment(judgment(1, "d3", 0, 5)));
    CHECK(s.find_judgment("d3")->label == 2);
    CHECK(s.record_judgment(judgment(1, "d3", 1, 11)));
    CHECK(s.find_judgment("d3")->label == 1);
}

TEST_CASE("judgment validation") {
    auto s = make_session();
    CHECK_THROWS_AS(s.record_judgment(judgment(1, "d1", 3)), ValidationError);
    CHECK_THROWS_AS(s.record_judgment(judgment(1, "d1", -1)), ValidationError);
    CHECK_THROWS_AS(s.record_judgment(judgment(2, "d1", 1)), ValidationError);
    CHECK_THROWS_AS(s.record_judgment(judgment(1, "synthetic-1", 1)), ValidationError);
    CHECK_THROWS_AS(s.record_judgment(judgment(1, "nope", 1)), NotFoundError);
    CHECK(s.assessed_count() == 0);
}

TEST_CASE("unknown topic") {
    auto c = small_collection();
    CHECK_THROWS_AS(Session(testsupport::topic(9, "x"), c, fast_options()), NotFoundError);
}

TEST_CASE("CAL stop fires at n >= a*m + b") {
    auto c = small_collection();
    auto o = fast_options();
    o.stopping = {1.0, 2.0};
    Session s(*c->find_topic(1), c, o);
    s.record_judgment(judgment(1, "d0", 2));
    s.record_judgment(judgment(1, "d100", 0));
    s.record_judgment(judgment(1, "d101", 0));
    CHECK_FALSE(s.should_stop());
    s.record_judgment(judgment(1, "d102", 0));
    CHECK(s.should_stop());
}

TEST_CASE("CAL next_documents serves top unjudged, unqueued documents") {
    auto s = make_session();
    s.refresh_model();
    const auto first = s.next_documents(5);
    CHECK(first.size() == 5);
    for (const auto& id : first) CHECK(std::stoi(id.substr(1)) < 15);
    const auto second = s.next_documents(5);
    for (const auto& id : second) CHECK(std::find(first.begin(), first.end(), id) == first.end());
    CHECK(s.pending().size() == 10);
    s.record_judgment(judgment(1, first[0], 2));
    CHECK(s.pending().size() == 9);
}

TEST_CASE("S-CAL budget caps first-time judgments") {
    auto c = small_collection();
    auto o = fast_options(ReviewMode::scal);
    o.budget = 3;
    Session s(*c->find_topic(1), c, o);
    CHECK(s.budget() == 3u);
    for (int i = 0; i < 3; ++i) s.record_judgment(judgment(1, "d" + std::to_string(i), 1, i));
    CHECK(s.budget_remaining() == 0u);
    CHECK(s.should_stop());
    CHECK_THROWS_AS(s.record_judgment(judgment(1, "d50", 1, 9)), ConflictError);
    CHECK(s.record_judgment(judgment(1, "d0", 0, 9)));
    CHECK(s.assessed_count() == 3);
    s.refresh_model();
    CHECK(s.next_documents(10).empty());
}

TEST_CASE("S-CAL defaults to a 300 budget; CAL has none") {
    CHECK(make_session(ReviewMode::scal).budget() == kDefaultScalBudget);
    CHECK_FALSE(make_session().budget());
    CHECK_FALSE(make_session().budget_remaining());
}

TEST_CASE("S-CAL segments follow batch sizes and never overlap") {
    auto s = make_session(ReviewMode::scal);
    std::set<std::string> seen;
    std::size_t expected = 1;
    for (int batch = 0; batch < 8; ++batch) {
        s.refresh_model();
        const auto docs = s.next_documents(1000);
        CHECK(docs.size() == expected);
        CHECK(s.segment().size() == expected);
        for (const auto& id : docs) {
            CHECK(seen.insert(id).second);
            CHECK(std::find(s.segment().begin(), s.segment().end(), id) != s.segment().end());
            s.record_judgment(judgment(1, id, std::stoi(id.substr(1)) < 15 ? 2 : 0));
        }
        s.advance_batch();
        expected = next_batch_size(expected);
        CHECK(s.batch_size() == expected);
    }
    CHECK(s.batch_index() == 8);
}

TEST_CASE("simulated assessor truth table") {
    SimulatedAssessor oracle;
    oracle.set(1, "a", 2);
    oracle.set(1, "b", 1);
    oracle.set(1, "c", 0);
    oracle.set(2, "a", 1);
    CHECK(oracle.judge(1, "a") == 2);
    CHECK(oracle.judge(1, "zzz") == 0);
    CHECK(oracle.relevant_count(1) == 2);
    CHECK(oracle.relevant_count(3) == 0);
}

TEST_CASE("run_simulated finds the topical documents and reports the stop") {
    auto c = small_collection();
    auto o = fast_options();
    o.stopping = {1.0, 10.0};
    Session s(*c->find_topic(1), c, o);
    SimulatedAssessor oracle;
    for (int i = 0; i < 15; ++i) oracle.set(1, "d" + std::to_string(i), 2);
    const auto transcript = run_simulated(s, oracle, 150);
    REQUIRE_FALSE(transcript.empty());
    CHECK(transcript.back().stop);
    CHECK(transcript.back().m == 15);
    CHECK(transcript.back().n == 25);
    for (std::size_t i = 0; i + 1 < transcript.size(); ++i) CHECK_FALSE(transcript[i].stop);
    std::set<std::string> ids;
    for (const auto& t : transcript) CHECK(ids.insert(t.doc_id).second);
}

TEST_CASE("run_simulated honours the assessment cap") {
    auto s = make_session();
    SimulatedAssessor oracle;
    CHECK(run_simulated(s, oracle, 7).size() == 7);
}

TEST_CASE("set_model rejects a model of the wrong size") {
    auto s = make_session();
    ModelState m;
    m.weights.assign(3, 0.0);
    CHECK_THROWS_AS(s.set_model(m), ValidationError);
}
