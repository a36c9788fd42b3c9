#include "calrev/features.hpp"

#include "calrev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

namespace calrev {

namespace {

bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

constexpr std::string_view kVocabHeader = "#corpus_size";

}  // namespace

double SparseVector::norm() const {
    double sum = 0.0;
    for (const auto& e : entries) sum += e.weight * e.weight;
    return std::sqrt(sum);
}

std::optional<double> SparseVector::weight_of(TermId term) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), term,
                               [](const SparseEntry& e, TermId t) { return e.term < t; });
    if (it == entries.end() || it->term != term) return std::nullopt;
    return it->weight;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (is_word_byte(c)) {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::string feature_text(const DocumentRecord& doc) {
    std::string text;
    for (const std::string* field : {&doc.title, &doc.abstract, &doc.authors, &doc.year, &doc.publisher}) {
        if (field->empty()) continue;
        if (!text.empty()) text.push_back(' ');
        text += *field;
    }
    return text;
}

TermId Vocabulary::intern(const std::string& term) {
    auto [it, inserted] = ids_.try_emplace(term, static_cast<TermId>(terms_.size()));
    if (inserted) {
        terms_.push_back(term);
        df_.push_back(0);
    }
    return it->second;
}

Vocabulary Vocabulary::build(const Corpus& corpus, std::span<const DocumentRecord> synthetic) {
    if (corpus.empty()) throw Error("cannot build a vocabulary from an empty corpus");
    Vocabulary vocab;
    auto add_document = [&vocab](const DocumentRecord& doc) {
        std::unordered_set<TermId> seen;
        for (const auto& token : tokenize(feature_text(doc))) {
            const TermId id = vocab.intern(token);
            if (seen.insert(id).second) ++vocab.df_[id];
        }
        ++vocab.corpus_size_;
    };
    for (const auto& doc : corpus.documents()) add_document(doc);
    for (const auto& doc : synthetic) add_document(doc);
    return vocab;
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
    auto it = ids_.find(std::string(term));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

void Vocabulary::save(std::ostream& out) const {
    out << kVocabHeader << '\t' << corpus_size_ << '\n';
    for (TermId id = 0; id < terms_.size(); ++id) out << terms_[id] << '\t' << id << '\t' << df_[id] << '\n';
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    save(out);
    if (!out) throw IoError("error writing " + path.string());
}

Vocabulary Vocabulary::load(std::istream& in) {
    Vocabulary vocab;
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("vocabulary file is empty", 0);
    {
        std::istringstream header(line);
        std::string tag;
        if (!(header >> tag >> vocab.corpus_size_) || tag != kVocabHeader)
            throw ParseError("bad vocabulary header", line_no);
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) throw ParseError("expected term<TAB>id<TAB>df", line_no);
        const std::string term = line.substr(0, t1);
        unsigned long id = 0;
        unsigned long df = 0;
        try {
            id = std::stoul(line.substr(t1 + 1, t2 - t1 - 1));
            df = std::stoul(line.substr(t2 + 1));
        } catch (const std::exception&) {
            throw ParseError("non-numeric id or df", line_no);
        }
        if (id != vocab.terms_.size()) throw ParseError("term ids must be contiguous from 0", line_no);
        if (df == 0 || df > vocab.corpus_size_) throw ParseError("df out of range", line_no);
        if (vocab.ids_.contains(term)) throw ParseError("duplicate term '" + term + "'", line_no);
        vocab.intern(term);
        vocab.df_.back() = static_cast<std::uint32_t>(df);
    }
    return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load(in);
}

double tfidf_weight(std::uint32_t tf, std::uint32_t df, std::size_t corpus_size) {
    if (tf == 0) return 0.0;
    const double n = static_cast<double>(corpus_size);
    const double idf = std::log((n + 1.0) / (static_cast<double>(df) + 1.0)) + 1.0;
    return (1.0 + std::log(static_cast<double>(tf))) * idf;
}

SparseVector vectorize(const DocumentRecord& doc, const Vocabulary& vocab) {
    std::map<TermId, std::uint32_t> tf;
    for (const auto& token : tokenize(feature_text(doc))) {
        if (auto id = vocab.find(token)) ++tf[*id];
    }
    SparseVector v;
    v.entries.reserve(tf.size());
    double sum = 0.0;
    for (const auto& [term, count] : tf) {
        const double w = tfidf_weight(count, vocab.df(term), vocab.corpus_size());
        if (w == 0.0) continue;
        v.entries.push_back({term, w});
        sum += w * w;
    }
    if (sum > 0.0) {
        const double inv = 1.0 / std::sqrt(sum);
        for (auto& e : v.entries) e.weight *= inv;
    }
    return v;
}

}  // namespace calrev
