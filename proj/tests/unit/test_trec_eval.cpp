#include "calrev/errors.hpp"
#include "calrev/trec_eval.hpp"

#include "metric_oracle.hpp"
#include "synthetic_corpus.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace calrev;

namespace {

std::vector<RunEntry> run_of(int topic, const std::vector<std::string>& ids) {
    std::vector<RunEntry> out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        out.push_back({topic, ids[i], static_cast<int>(i + 1), 100.0 - static_cast<double>(i), "t"});
    return out;
}

}  // namespace

TEST_CASE("qrels parsing") {
    std::istringstream in("1 0 a 2\n1 0 b 0\n2 0 c 1\n1 0 a 1\n\n");
    const auto q = parse_qrels(in);
    CHECK(q.topics.size() == 2);
    CHECK(q.grade(1, "a") == 1);
    CHECK(q.duplicate_pairs == 1);
    CHECK(q.relevant_count(1) == 1);
    CHECK_FALSE(q.grade(3, "a"));

    std::istringstream bad_grade("1 0 a 3\n");
    CHECK_THROWS_AS(parse_qrels(bad_grade), ParseError);
    std::istringstream short_line("1 0 a 2\n1 0 b\n");
    try {
        parse_qrels(short_line);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("precision at 5 with three relevant in the top five") {
    const std::map<std::string, int> judged{{"a", 1}, {"b", 0}, {"c", 2}, {"d", 0}, {"e", 1}};
    const std::vector<std::string> ranked{"a", "b", "c", "d", "e"};
    CHECK(evaluate_topic(ranked, judged, {}).precision.at(5) == doctest::Approx(0.6));
}

TEST_CASE("rbp with p = 0.5 for relevant at ranks 1 and 2") {
    const std::map<std::string, int> judged{{"a", 2}, {"b", 1}, {"c", 0}};
    const std::vector<std::string> ranked{"a", "b", "c"};
    const auto t = evaluate_topic(ranked, judged, {});
    CHECK(t.rbp == doctest::Approx(0.75));
    CHECK(t.rbp_residual == doctest::Approx(0.125));
}

TEST_CASE("perfect run scores 1 on ranking metrics") {
    const std::map<std::string, int> judged{{"a", 2}, {"b", 2}, {"c", 1}, {"x", 0}};
    const std::vector<std::string> ranked{"a", "b", "c", "x"};
    const auto t = evaluate_topic(ranked, judged, {});
    CHECK(t.average_precision == doctest::Approx(1.0));
    CHECK(t.bpref == doctest::Approx(1.0));
    CHECK(t.r_precision == doctest::Approx(1.0));
    CHECK(t.ndcg.at(10) == doctest::Approx(1.0));
    CHECK(t.relevant_retrieved == 3);
}

TEST_CASE("hand-computed average precision and bpref") {
    const std::map<std::string, int> judged{{"r1", 1}, {"r2", 1}, {"n1", 0}, {"n2", 0}};
    const std::vector<std::string> ranked{"n1", "r1", "u", "n2", "r2"};
    const auto t = evaluate_topic(ranked, judged, {});
    CHECK(t.average_precision == doctest::Approx((1.0 / 2 + 2.0 / 5) / 2));
    CHECK(t.bpref == doctest::Approx(((1 - 1.0 / 2) + (1 - 2.0 / 2)) / 2));
    CHECK(t.r_precision == doctest::Approx(0.5));
}

TEST_CASE("evaluator agrees with the brute-force oracle on random runs") {
    testsupport::Rng rng(17);
    EvalOptions options;
    for (int trial = 0; trial < 100; ++trial) {
        std::map<std::string, int> judged;
        for (int d = 0; d < 30; ++d) {
            if (rng.uniform() < 0.7) judged["d" + std::to_string(d)] = static_cast<int>(rng.below(3));
        }
        std::vector<std::string> ranked;
        for (int d = 0; d < 30; ++d) ranked.push_back("d" + std::to_string(d));
        for (std::size_t i = ranked.size(); i > 1; --i) std::swap(ranked[i - 1], ranked[rng.below(i)]);
        ranked.resize(20);

        const auto t = evaluate_topic(ranked, judged, options);
        CHECK(std::abs(t.average_precision - oracle::average_precision(ranked, judged)) < 1e-9);
        CHECK(std::abs(t.bpref - oracle::bpref(ranked, judged)) < 1e-9);
        CHECK(std::abs(t.r_precision - oracle::r_precision(ranked, judged)) < 1e-9);
        CHECK(std::abs(t.ndcg.at(10) - oracle::ndcg(ranked, judged, 10)) < 1e-9);
        for (int k : options.precision_cutoffs) CHECK(std::abs(t.precision.at(k) - oracle::precision(ranked, judged, k)) < 1e-9);
        CHECK(std::abs(t.rbp - oracle::rbp(ranked, judged, 0.5)) < 1e-9);
        CHECK(std::abs(t.rbp_residual - oracle::rbp_residual(ranked, judged, 0.5)) < 1e-9);
    }
}

TEST_CASE("evaluate averages over qrels topics and skips unknown run topics") {
    Qrels q;
    q.topics[1] = {{"a", 1}, {"b", 0}};
    q.topics[2] = {{"c", 2}};
    auto run = run_of(1, {"a", "b"});
    auto extra = run_of(9, {"z"});
    run.insert(run.end(), extra.begin(), extra.end());
    const auto report = evaluate(run, q);
    REQUIRE(report.topics.size() == 2);
    CHECK(report.topics[0].average_precision == doctest::Approx(1.0));
    CHECK(report.topics[1].average_precision == doctest::Approx(0.0));
    CHECK(report.mean.average_precision == doctest::Approx(0.5));
    CHECK(report.skipped_topics == std::vector<int>{9});
    CHECK(report.mean.retrieved == 2);
}

TEST_CASE("evaluate ranks by the run's rank column") {
    Qrels q;
    q.topics[1] = {{"a", 1}};
    std::vector<RunEntry> run{{1, "x", 2, 1.0, "t"}, {1, "a", 1, 2.0, "t"}};
    CHECK(evaluate(run, q).topics[0].average_precision == doctest::Approx(1.0));
}

TEST_CASE("report writers") {
    Qrels q;
    q.topics[1] = {{"a", 1}};
    const auto report = evaluate(run_of(1, {"a"}), q);
    std::ostringstream text;
    write_report_text(report, text, true);
    CHECK(text.str().find("map") != std::string::npos);
    CHECK(text.str().find("ndcg_cut_10") != std::string::npos);
    CHECK(text.str().find("rbp_0.5") != std::string::npos);
    std::ostringstream csv;
    write_report_csv(report, csv);
    CHECK(csv.str().rfind("metric,topic,value\n", 0) == 0);
    CHECK(csv.str().find("map,all,1") != std::string::npos);
}

TEST_CASE("eval option validation") {
    EvalOptions o;
    o.rbp_p = 1.0;
    CHECK_THROWS_AS(o.validate(), ValidationError);
    o.rbp_p = 0.5;
    o.ndcg_cutoffs = {0};
    CHECK_THROWS_AS(o.validate(), ValidationError);
}
