#include "calrev/corpus.hpp"
#include "calrev/errors.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>

using namespace calrev;

TEST_CASE("csv reader handles quotes, embedded newlines and CRLF") {
    const auto rows = parse_csv("a,b,c\r\n\"x, y\",\"say \"\"hi\"\"\",\"line1\nline2\"\r\n1,,3\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][0] == "x, y");
    CHECK(rows[1][1] == "say \"hi\"");
    CHECK(rows[1][2] == "line1\nline2");
    CHECK(rows[2] == std::vector<std::string>{"1", "", "3"});
}

TEST_CASE("csv reader rejects an unterminated quote with its line") {
    try {
        parse_csv("a,b\n1,2\n\"open,3\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("metadata ingest maps columns, drops duplicates and empty ids") {
    const std::string csv =
        "\xEF\xBB\xBF" "cord_uid,sha,title,abstract,authors,publish_time,journal\n"
        "u1,,Covid masks,\"Masks, in public\",Smith J,2020-04-01,Lancet\n"
        "u2,,Vaccines,,Doe A,2021,\n"
        "u1,,Duplicate,ignored,,,\n"
        ",,No id,,,,\n";
    const auto result = parse_metadata_csv_text(csv);
    CHECK(result.corpus.size() == 2);
    CHECK(result.duplicate_rows == 1);
    CHECK(result.empty_id_rows == 1);
    const auto& d = result.corpus.at(*result.corpus.find("u1"));
    CHECK(d.title == "Covid masks");
    CHECK(d.abstract == "Masks, in public");
    CHECK(d.authors == "Smith J");
    CHECK(d.year == "2020-04-01");
    CHECK(d.publisher == "Lancet");
}

TEST_CASE("metadata ingest honours a custom column map") {
    ColumnMap columns;
    columns.doc_id = "id";
    columns.title = "name";
    const auto result = parse_metadata_csv_text("id,name\nx,Hello\n", columns);
    REQUIRE(result.corpus.size() == 1);
    CHECK(result.corpus.at(0).title == "Hello");
}

TEST_CASE("metadata ingest requires id and title columns") {
    CHECK_THROWS_AS(parse_metadata_csv_text("title,abstract\nx,y\n"), SchemaError);
    CHECK_THROWS_AS(parse_metadata_csv_text("cord_uid,abstract\nx,y\n"), SchemaError);
}

TEST_CASE("topics xml parses fields and trims whitespace") {
    const auto topics = parse_topics_xml_text(R"(<topics>
  <topic number="1">
    <query> coronavirus origin </query>
    <question>what is the origin of COVID-19</question>
    <narrative>seeking range of information</narrative>
  </topic>
  <topic number="2"><query>masks</query></topic>
</topics>)");
    REQUIRE(topics.size() == 2);
    CHECK(topics[0].topic_id == 1);
    CHECK(topics[0].query == "coronavirus origin");
    CHECK(topics[0].question == "what is the origin of COVID-19");
    CHECK(topics[1].narrative.empty());
}

TEST_CASE("topics xml errors") {
    CHECK_THROWS_AS(parse_topics_xml_text("<topics><topic number=\"1\"><query>x</query></topic>"), ParseError);
    CHECK_THROWS_AS(parse_topics_xml_text("<other/>"), SchemaError);
    CHECK_THROWS_AS(parse_topics_xml_text("<topics><topic><query>x</query></topic></topics>"), SchemaError);
    CHECK_THROWS_AS(parse_topics_xml_text("<topics><topic number=\"1\"/></topics>"), SchemaError);
    CHECK_THROWS_AS(parse_topics_xml_text("<topics><topic number=\"0\"><query>x</query></topic></topics>"),
                    SchemaError);
    CHECK_THROWS_AS(parse_topics_xml_text(
                        "<topics><topic number=\"1\"><query>x</query></topic>"
                        "<topic number=\"1\"><query>y</query></topic></topics>"),
                    SchemaError);
}

TEST_CASE("synthetic seed document") {
    Topic t{7, "coronavirus origin", "where did it start", "bats or markets"};
    const auto d = make_synthetic_document(t);
    CHECK(d.doc_id == "synthetic-7");
    CHECK(is_synthetic_id(d.doc_id));
    CHECK(d.title == "coronavirus origin");
    CHECK(d.abstract == "coronavirus origin where did it start bats or markets");

    Corpus corpus;
    corpus.add(testsupport::doc("synthetic-7", "clash"));
    CHECK_THROWS_AS(check_synthetic_collision(corpus, t), SchemaError);
    CHECK_THROWS_AS(testsupport::collection({testsupport::doc("synthetic-7", "clash")}, {t}), SchemaError);
}

TEST_CASE("corpus keeps the first occurrence") {
    Corpus c;
    CHECK(c.add(testsupport::doc("a", "first")));
    CHECK_FALSE(c.add(testsupport::doc("a", "second")));
    CHECK(c.size() == 1);
    CHECK(c.at(0).title == "first");
    CHECK_FALSE(c.find("b"));
}

TEST_CASE("metadata ingest from a file; missing file is an IoError") {
    testsupport::TempDir dir;
    {
        std::ofstream out(dir / "m.csv");
        out << "cord_uid,title\nq,Query\n";
    }
    CHECK(parse_metadata_csv(dir / "m.csv").corpus.size() == 1);
    CHECK_THROWS_AS(parse_metadata_csv(dir / "missing.csv"), IoError);
}
