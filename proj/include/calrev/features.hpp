#pragma once

#include "calrev/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace calrev {

using TermId = std::uint32_t;

struct SparseEntry {
    TermId term = 0;
    double weight = 0.0;

    bool operator==(const SparseEntry&) const = default;
};

// Entries are strictly increasing by term and carry no zero weights.
struct SparseVector {
    std::vector<SparseEntry> entries;

    bool empty() const noexcept { return entries.empty(); }
    std::size_t size() const noexcept { return entries.size(); }
    double norm() const;
    std::optional<double> weight_of(TermId term) const;

    bool operator==(const SparseVector&) const = default;
};

// Lowercased maximal runs of alphanumeric characters. Bytes >= 0x80 count as
// word characters so UTF-8 words are kept whole.
std::vector<std::string> tokenize(std::string_view text);

// Text a document contributes to featurization: every metadata field.
std::string feature_text(const DocumentRecord& doc);

class Vocabulary {
public:
    Vocabulary() = default;

    // Fits over corpus plus synthetic documents. Throws Error on an empty corpus.
    static Vocabulary build(const Corpus& corpus, std::span<const DocumentRecord> synthetic = {});

    std::size_t size() const noexcept { return terms_.size(); }
    std::size_t corpus_size() const noexcept { return corpus_size_; }
    std::optional<TermId> find(std::string_view term) const;
    const std::string& term(TermId id) const { return terms_.at(id); }
    std::uint32_t df(TermId id) const { return df_.at(id); }

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(std::istream& in);
    static Vocabulary load(const std::filesystem::path& path);

    bool operator==(const Vocabulary& other) const {
        return corpus_size_ == other.corpus_size_ && terms_ == other.terms_ && df_ == other.df_;
    }

private:
    TermId intern(const std::string& term);

    std::vector<std::string> terms_;
    std::vector<std::uint32_t> df_;
    std::unordered_map<std::string, TermId> ids_;
    std::size_t corpus_size_ = 0;
};

// Sublinear tf times smoothed idf, L2-normalized:
//   (1 + ln tf) * (ln((N + 1) / (df + 1)) + 1)
// The +1 keeps terms present in every document from vanishing.
double tfidf_weight(std::uint32_t tf, std::uint32_t df, std::size_t corpus_size);
SparseVector vectorize(const DocumentRecord& doc, const Vocabulary& vocab);

}  // namespace calrev
