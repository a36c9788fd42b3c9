#include "calrev/errors.hpp"
#include "calrev/run.hpp"

#include "fixtures.hpp"
#include "run_properties.hpp"
#include "synthetic_corpus.hpp"

#include <doctest.h>

#include <sstream>

using namespace calrev;
using testsupport::judgment;

namespace {

// Five documents with one distinct word each, so a hand-set weight on that
// word is exactly the document's score.
struct Fixture {
    std::shared_ptr<const Collection> c = testsupport::collection(
        {testsupport::doc("d1", "one"), testsupport::doc("d2", "two"), testsupport::doc("d3", "three"),
         testsupport::doc("d4", "four"), testsupport::doc("d5", "five")},
        {testsupport::topic(1, "query")});
    Session session{*c->find_topic(1), c, testsupport::fast_options()};

    Fixture() {
        session.record_judgment(judgment(1, "d1", 2, 1));
        session.record_judgment(judgment(1, "d2", 1, 2));
        session.record_judgment(judgment(1, "d5", 0, 3));
        ModelState m;
        m.weights.assign(c->vocabulary().size(), 0.0);
        const std::map<std::string, double> scores{
            {"one", 0.5}, {"two", 0.3}, {"three", 0.9}, {"four", 0.1}, {"five", 0.95}};
        for (const auto& [word, s] : scores) m.weights[*c->vocabulary().find(word)] = s;
        session.set_model(m);
    }

    std::vector<std::string> ids(OrderingMethod method) const {
        std::vector<std::string> out;
        for (const auto& e : build_run(session, method, 1000, "t")) out.push_back(e.doc_id);
        return out;
    }
};

}  // namespace

TEST_CASE("method i leads with relevant then partial then unjudged by score") {
    Fixture f;
    CHECK(f.ids(OrderingMethod::i) == std::vector<std::string>{"d1", "d2", "d3", "d4"});
}

TEST_CASE("method iii keeps the not-relevant block before the unjudged tail") {
    Fixture f;
    CHECK(f.ids(OrderingMethod::iii) == std::vector<std::string>{"d1", "d2", "d5", "d3", "d4"});
}

TEST_CASE("method ii ignores judgments") {
    Fixture f;
    CHECK(f.ids(OrderingMethod::ii) == std::vector<std::string>{"d5", "d3", "d1", "d2", "d4"});
}

TEST_CASE("method iii minus its not-relevant block is method i") {
    Fixture f;
    auto iii = f.ids(OrderingMethod::iii);
    std::erase(iii, "d5");
    CHECK(iii == f.ids(OrderingMethod::i));
}

TEST_CASE("judged blocks follow judgment time, not model score") {
    Fixture f;
    f.session.record_judgment(judgment(1, "d4", 2, 0));
    CHECK(f.ids(OrderingMethod::i) == std::vector<std::string>{"d4", "d1", "d2", "d3"});
}

TEST_CASE("run entries are well formed and depth truncates") {
    Fixture f;
    const auto run = build_run(f.session, OrderingMethod::iii, 3, "calrev-iii");
    REQUIRE(run.size() == 3);
    for (std::size_t i = 0; i < run.size(); ++i) {
        CHECK(run[i].rank == static_cast<int>(i + 1));
        CHECK(run[i].topic_id == 1);
        CHECK(run[i].run_tag == "calrev-iii");
        if (i) CHECK(run[i].score < run[i - 1].score);
    }
    CHECK(testsupport::check_run(f.session, OrderingMethod::iii, 3, run).empty());
}

TEST_CASE("build_run argument errors") {
    Fixture f;
    CHECK_THROWS_AS(build_run(f.session, OrderingMethod::i, 0, "t"), ValidationError);
    CHECK_THROWS_AS(build_run(f.session, OrderingMethod::i, 10, "has space"), ValidationError);
    CHECK_THROWS_AS(build_run(f.session, OrderingMethod::i, 10, ""), ValidationError);
    Session untrained(*f.c->find_topic(1), f.c, testsupport::fast_options());
    CHECK_THROWS_AS(build_run(untrained, OrderingMethod::i, 10, "t"), ConflictError);
}

TEST_CASE("method names") {
    CHECK(parse_ordering_method("ii") == OrderingMethod::ii);
    CHECK(to_string(OrderingMethod::iii) == "iii");
    CHECK_THROWS_AS(parse_ordering_method("iv"), ValidationError);
}

TEST_CASE("run file format and round trip") {
    Fixture f;
    const auto run = build_run(f.session, OrderingMethod::ii, 1000, "tag");
    std::ostringstream out;
    write_run(run, out);
    CHECK(out.str().substr(0, out.str().find('\n')) == "1 Q0 d5 1 " + format_score(run[0].score) + " tag");
    std::istringstream in(out.str());
    CHECK(parse_run(in) == run);
}

TEST_CASE("scores that collide at printed precision are nudged apart") {
    auto c = testsupport::collection(
        {testsupport::doc("a", "alpha"), testsupport::doc("b", "beta"), testsupport::doc("c", "gamma")},
        {testsupport::topic(1, "q")});
    Session s(*c->find_topic(1), c, testsupport::fast_options());
    ModelState m;
    m.weights.assign(c->vocabulary().size(), 0.0);
    m.weights[*c->vocabulary().find("alpha")] = 0.1234567;
    m.weights[*c->vocabulary().find("beta")] = 0.1234566;
    m.weights[*c->vocabulary().find("gamma")] = 0.1234565;
    s.set_model(m);
    const auto run = build_run(s, OrderingMethod::ii, 10, "t");
    std::ostringstream out;
    write_run(run, out);
    std::istringstream in(out.str());
    const auto parsed = parse_run(in);
    CHECK(parsed == run);
    for (std::size_t i = 1; i < parsed.size(); ++i) CHECK(parsed[i].score < parsed[i - 1].score);
}

TEST_CASE("run validation") {
    std::vector<RunEntry> run{{1, "a", 1, 2.0, "t"}, {1, "b", 2, 1.0, "t"}};
    CHECK_NOTHROW(validate_run(run));
    run[1].rank = 3;
    CHECK_THROWS_AS(validate_run(run), ValidationError);
    run[1].rank = 2;
    run[1].score = 2.0;
    CHECK_THROWS_AS(validate_run(run), ValidationError);
    run[1].score = 1.0;
    run[1].doc_id = "a";
    CHECK_THROWS_AS(validate_run(run), ValidationError);
    run[1].doc_id = "synthetic-1";
    CHECK_THROWS_AS(validate_run(run), ValidationError);
}

TEST_CASE("run parse errors carry the line number") {
    std::istringstream five("1 Q0 d1 1 0.5 tag\n1 Q0 d2 2 0.4\n");
    try {
        parse_run(five);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream text("1 Q0 d1 one 0.5 tag\n");
    CHECK_THROWS_AS(parse_run(text), ParseError);
}

TEST_CASE("randomized sessions satisfy the block structure") {
    const auto b = testsupport::make_benchmark({.documents = 300, .topics = 1, .relevant_per_topic = 20});
    auto c = Collection::build(b.corpus, b.topics);
    testsupport::Rng rng(21);
    for (int state = 0; state < 5; ++state) {
        Session s(*c->find_topic(1), c, testsupport::fast_options());
        for (int k = 0; k < 40; ++k) {
            const auto& d = c->corpus().at(rng.below(c->corpus().size())).doc_id;
            s.record_judgment(judgment(1, d, static_cast<int>(rng.below(3)), static_cast<std::int64_t>(rng.below(20))));
        }
        s.refresh_model();
        for (auto method : {OrderingMethod::i, OrderingMethod::ii, OrderingMethod::iii}) {
            for (std::size_t depth : {std::size_t{1000}, std::size_t{50}}) {
                const auto run = build_run(s, method, depth, "x");
                CHECK(testsupport::check_run(s, method, depth, run) == "");
            }
        }
    }
}
