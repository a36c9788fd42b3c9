#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace calrev {

// One corpus item. Only metadata is kept; the engine never sees full text.
struct DocumentRecord {
    std::string doc_id;
    std::string title;
    std::string abstract;
    std::string authors;
    std::string year;
    std::string publisher;

    bool operator==(const DocumentRecord&) const = default;
};

struct Topic {
    int topic_id = 0;
    std::string query;
    std::string question;
    std::string narrative;

    bool operator==(const Topic&) const = default;
};

inline constexpr std::string_view kSyntheticPrefix = "synthetic-";

bool is_synthetic_id(std::string_view doc_id);

// Ordered, immutable collection of documents with an id -> position index.
class Corpus {
public:
    Corpus() = default;

    // Keeps the first occurrence of each id. Returns false if doc was a
    // duplicate and therefore dropped.
    bool add(DocumentRecord doc);

    std::size_t size() const noexcept { return documents_.size(); }
    bool empty() const noexcept { return documents_.empty(); }
    const std::vector<DocumentRecord>& documents() const noexcept { return documents_; }
    const DocumentRecord& at(std::size_t pos) const { return documents_.at(pos); }
    std::optional<std::size_t> find(std::string_view doc_id) const;
    bool contains(std::string_view doc_id) const { return find(doc_id).has_value(); }

private:
    std::vector<DocumentRecord> documents_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Maps DocumentRecord fields onto CSV header names. Defaults follow the
// CORD-19 metadata.csv layout.
struct ColumnMap {
    std::string doc_id = "cord_uid";
    std::string title = "title";
    std::string abstract = "abstract";
    std::string authors = "authors";
    std::string year = "publish_time";
    std::string publisher = "journal";
};

struct IngestResult {
    Corpus corpus;
    std::size_t duplicate_rows = 0;
    std::size_t empty_id_rows = 0;
};

// RFC-4180 CSV reader. Quoted fields may contain separators, doubled quotes
// and line breaks. Throws ParseError on an unterminated quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

IngestResult parse_metadata_csv(const std::filesystem::path& path, const ColumnMap& columns = {});
IngestResult parse_metadata_csv_text(std::string_view text, const ColumnMap& columns = {});

std::vector<Topic> parse_topics_xml(const std::filesystem::path& path);
std::vector<Topic> parse_topics_xml_text(const std::string& xml);

// Seed document standing in for a perfectly relevant hit: the query, question
// and narrative joined by single spaces. Used for training only.
DocumentRecord make_synthetic_document(const Topic& topic);

// Throws SchemaError if the corpus already holds the id the synthetic
// document for `topic` would take.
void check_synthetic_collision(const Corpus& corpus, const Topic& topic);

std::string read_file(const std::filesystem::path& path);

}  // namespace calrev
