#pragma once

#include "calrev/session.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace calrev {

// Run orderings:
//   i   - relevant, then partially relevant, then unjudged by model score;
//         judged not-relevant documents are dropped
//   ii  - every document by model score, judgments ignored
//   iii - as i, with the not-relevant block kept between the partially
//         relevant block and the unjudged tail
enum class OrderingMethod { i, ii, iii };

std::string_view to_string(OrderingMethod method);
// Throws ValidationError for anything but "i", "ii", "iii".
OrderingMethod parse_ordering_method(std::string_view name);

struct RunEntry {
    int topic_id = 0;
    std::string doc_id;
    int rank = 0;
    double score = 0.0;
    std::string run_tag;

    bool operator==(const RunEntry&) const = default;
};

inline constexpr std::size_t kDefaultRunDepth = 1000;

// Judged blocks are ordered by judgment time. Their scores are synthesized
// above the top model score; every score is rounded to what the run file
// prints, nudged where needed to stay strictly decreasing.
// Throws ConflictError when the session has no trained model.
std::vector<RunEntry> build_run(const Session& session, OrderingMethod method, std::size_t depth,
                                const std::string& tag);

// Per topic: ranks 1..K in order, unique doc ids, strictly decreasing
// scores (as printed). Throws ValidationError.
void validate_run(std::span<const RunEntry> entries);

// "%.6g", the precision used in run files.
std::string format_score(double score);

void write_run(std::span<const RunEntry> entries, std::ostream& out);
void write_run_file(std::span<const RunEntry> entries, const std::filesystem::path& path);
std::vector<RunEntry> parse_run(std::istream& in);
std::vector<RunEntry> parse_run_file(const std::filesystem::path& path);

}  // namespace calrev
