#include "calrev/corpus.hpp"

#include "calrev/errors.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace calrev {

namespace {

std::string trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\v\f";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return std::string(s.substr(first, last - first + 1));
}

}  // namespace

bool is_synthetic_id(std::string_view doc_id) {
    return doc_id.substr(0, kSyntheticPrefix.size()) == kSyntheticPrefix;
}

bool Corpus::add(DocumentRecord doc) {
    if (index_.contains(doc.doc_id)) return false;
    index_.emplace(doc.doc_id, documents_.size());
    documents_.push_back(std::move(doc));
    return true;
}

std::optional<std::size_t> Corpus::find(std::string_view doc_id) const {
    auto it = index_.find(std::string(doc_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading " + path.string());
    return buf.str();
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t quote_line = 0;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        // A blank line yields a single empty field; skip it.
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };

    // Skip a UTF-8 byte order mark.
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field_started) {
                    in_quotes = true;
                    field_started = true;
                    quote_line = line;
                } else {
                    field.push_back(c);
                }
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (i + 1 < text.size() && text[i + 1] == '\n') break;
                end_row();
                ++line;
                break;
            case '\n':
                end_row();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError("unterminated quoted field", quote_line);
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

IngestResult parse_metadata_csv_text(std::string_view text, const ColumnMap& columns) {
    auto rows = parse_csv(text);
    if (rows.empty()) throw SchemaError("metadata file has no header row");

    const auto& header = rows.front();
    auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            if (required) throw SchemaError("metadata header is missing required column '" + name + "'");
            return std::nullopt;
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto id_col = column(columns.doc_id, true);
    const auto title_col = column(columns.title, true);
    const auto abstract_col = column(columns.abstract, false);
    const auto authors_col = column(columns.authors, false);
    const auto year_col = column(columns.year, false);
    const auto publisher_col = column(columns.publisher, false);

    IngestResult result;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto get = [&](std::optional<std::size_t> col) -> std::string {
            if (!col || *col >= row.size()) return {};
            return row[*col];
        };
        DocumentRecord doc{trim(get(id_col)), get(title_col),   get(abstract_col),
                           get(authors_col),  get(year_col),    get(publisher_col)};
        if (doc.doc_id.empty()) {
            ++result.empty_id_rows;
            continue;
        }
        if (!result.corpus.add(std::move(doc))) ++result.duplicate_rows;
    }
    return result;
}

IngestResult parse_metadata_csv(const std::filesystem::path& path, const ColumnMap& columns) {
    return parse_metadata_csv_text(read_file(path), columns);
}

std::vector<Topic> parse_topics_xml_text(const std::string& xml) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(xml);
    try {
        pt::read_xml(in, tree);
    } catch (const pt::xml_parser_error& e) {
        throw ParseError("malformed topics XML: " + e.message(), e.line());
    }

    auto root = tree.get_child_optional("topics");
    if (!root) throw SchemaError("topics XML has no <topics> root element");

    std::vector<Topic> topics;
    std::set<int> seen;
    for (const auto& [name, node] : *root) {
        if (name != "topic") continue;
        auto number = node.get_optional<std::string>("<xmlattr>.number");
        if (!number) throw SchemaError("topic element without a number attribute");
        Topic topic;
        try {
            std::size_t used = 0;
            topic.topic_id = std::stoi(trim(*number), &used);
            if (used != trim(*number).size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw SchemaError("topic number '" + *number + "' is not an integer");
        }
        if (topic.topic_id <= 0) throw SchemaError("topic number " + *number + " is not positive");
        if (!seen.insert(topic.topic_id).second)
            throw SchemaError("duplicate topic number " + std::to_string(topic.topic_id));

        auto query = node.get_optional<std::string>("query");
        if (!query) throw SchemaError("topic " + std::to_string(topic.topic_id) + " has no <query>");
        topic.query = trim(*query);
        if (topic.query.empty())
            throw SchemaError("topic " + std::to_string(topic.topic_id) + " has an empty <query>");
        topic.question = trim(node.get<std::string>("question", ""));
        topic.narrative = trim(node.get<std::string>("narrative", ""));
        topics.push_back(std::move(topic));
    }
    return topics;
}

std::vector<Topic> parse_topics_xml(const std::filesystem::path& path) {
    return parse_topics_xml_text(read_file(path));
}

DocumentRecord make_synthetic_document(const Topic& topic) {
    DocumentRecord doc;
    doc.doc_id = std::string(kSyntheticPrefix) + std::to_string(topic.topic_id);
    doc.title = topic.query;
    doc.abstract = trim(topic.query + " " + topic.question + " " + topic.narrative);
    return doc;
}

void check_synthetic_collision(const Corpus& corpus, const Topic& topic) {
    const auto id = std::string(kSyntheticPrefix) + std::to_string(topic.topic_id);
    if (corpus.contains(id))
        throw SchemaError("corpus already contains document id '" + id + "' reserved for the synthetic seed");
}

}  // namespace calrev
