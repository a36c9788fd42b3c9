#include "calrev/run.hpp"

#include "calrev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace calrev {

namespace {

double printable(double x) { return std::strtod(format_score(x).c_str(), nullptr); }

// Largest-ish printable value strictly below `prev`.
double printable_below(double prev) {
    double step = prev == 0.0 ? 1e-6 : std::pow(10.0, std::floor(std::log10(std::abs(prev))) - 5.0);
    for (;;) {
        const double c = printable(prev - step);
        if (c < prev) return c;
        step *= 2.0;
    }
}

bool has_space(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view to_string(OrderingMethod method) {
    switch (method) {
        case OrderingMethod::i: return "i";
        case OrderingMethod::ii: return "ii";
        case OrderingMethod::iii: return "iii";
    }
    return "?";
}

OrderingMethod parse_ordering_method(std::string_view name) {
    if (name == "i") return OrderingMethod::i;
    if (name == "ii") return OrderingMethod::ii;
    if (name == "iii") return OrderingMethod::iii;
    throw ValidationError("unknown ordering method '" + std::string(name) + "' (expected i, ii or iii)");
}

std::string format_score(double score) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", score);
    return buf;
}

std::vector<RunEntry> build_run(const Session& session, OrderingMethod method, std::size_t depth,
                                const std::string& tag) {
    if (!session.has_model())
        throw ConflictError("topic " + std::to_string(session.topic().topic_id) + " has no trained model");
    if (depth == 0) throw ValidationError("run depth must be at least 1");
    if (tag.empty() || has_space(tag)) throw ValidationError("run tag must be a non-empty word");

    const auto& corpus = session.collection().corpus();
    const auto& scores = session.scores();

    auto judged_block = [&](int label) {
        std::vector<std::pair<const EffectiveJudgment*, const std::string*>> block;
        for (const auto& [doc_id, j] : session.judgments()) {
            if (j.label == label) block.emplace_back(&j, &doc_id);
        }
        std::sort(block.begin(), block.end(), [](const auto& a, const auto& b) {
            if (a.first->timestamp != b.first->timestamp) return a.first->timestamp < b.first->timestamp;
            return a.first->sequence < b.first->sequence;
        });
        std::vector<std::string> ids;
        for (const auto& [j, id] : block) ids.push_back(*id);
        return ids;
    };

    // (doc_id, model score or nullopt for judged-block entries)
    std::vector<std::pair<std::string, std::optional<double>>> ordered;
    auto push_block = [&](const std::vector<std::string>& ids) {
        for (const auto& id : ids) {
            if (ordered.size() >= depth) return;
            ordered.emplace_back(id, std::nullopt);
        }
    };
    const bool skip_judged = method != OrderingMethod::ii;
    if (method != OrderingMethod::ii) {
        push_block(judged_block(kRelevant));
        push_block(judged_block(kPartiallyRelevant));
        if (method == OrderingMethod::iii) push_block(judged_block(kNotRelevant));
    }
    for (std::size_t pos : session.ranking()) {
        if (ordered.size() >= depth) break;
        const auto& id = corpus.at(pos).doc_id;
        if (skip_judged && session.find_judgment(id)) continue;
        ordered.emplace_back(id, scores[pos]);
    }

    double top = 0.0;
    if (!scores.empty()) top = *std::max_element(scores.begin(), scores.end());
    std::size_t judged_count = 0;
    for (const auto& [id, s] : ordered) judged_count += !s.has_value();

    std::vector<RunEntry> run;
    run.reserve(ordered.size());
    std::size_t judged_seen = 0;
    for (const auto& [id, model_score] : ordered) {
        double s = model_score ? *model_score
                               : top + static_cast<double>(judged_count - judged_seen++);
        s = printable(s);
        if (!run.empty() && s >= run.back().score) s = printable_below(run.back().score);
        run.push_back({session.topic().topic_id, id, static_cast<int>(run.size() + 1), s, tag});
    }
    return run;
}

void validate_run(std::span<const RunEntry> entries) {
    struct TopicState {
        int last_rank = 0;
        double last_score = 0.0;
        std::set<std::string> docs;
    };
    std::map<int, TopicState> topics;
    for (const auto& e : entries) {
        if (e.doc_id.empty() || has_space(e.doc_id))
            throw ValidationError("run doc id '" + e.doc_id + "' is empty or contains whitespace");
        if (e.run_tag.empty() || has_space(e.run_tag))
            throw ValidationError("run tag '" + e.run_tag + "' is empty or contains whitespace");
        if (is_synthetic_id(e.doc_id)) throw ValidationError("synthetic document '" + e.doc_id + "' in run");
        auto& t = topics[e.topic_id];
        const std::string where = " (topic " + std::to_string(e.topic_id) + ", doc " + e.doc_id + ")";
        if (e.rank != t.last_rank + 1) throw ValidationError("ranks are not contiguous" + where);
        const double printed = printable(e.score);
        if (t.last_rank > 0 && !(printed < t.last_score))
            throw ValidationError("scores are not strictly decreasing" + where);
        if (!t.docs.insert(e.doc_id).second) throw ValidationError("duplicate document" + where);
        t.last_rank = e.rank;
        t.last_score = printed;
    }
}

void write_run(std::span<const RunEntry> entries, std::ostream& out) {
    validate_run(entries);
    for (const auto& e : entries) {
        out << e.topic_id << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << format_score(e.score) << ' '
            << e.run_tag << '\n';
    }
}

void write_run_file(std::span<const RunEntry> entries, const std::filesystem::path& path) {
    std::ostringstream buf;
    write_run(entries, buf);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << buf.str();
    if (!out) throw IoError("error writing " + path.string());
}

std::vector<RunEntry> parse_run(std::istream& in) {
    std::vector<RunEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream fields(line);
        std::vector<std::string> parts;
        for (std::string f; fields >> f;) parts.push_back(std::move(f));
        if (parts.empty()) continue;
        if (parts.size() != 6) throw ParseError("expected 6 fields, got " + std::to_string(parts.size()), line_no);
        RunEntry e;
        try {
            std::size_t used = 0;
            e.topic_id = std::stoi(parts[0], &used);
            if (used != parts[0].size()) throw std::invalid_argument("topic");
            e.rank = std::stoi(parts[3], &used);
            if (used != parts[3].size()) throw std::invalid_argument("rank");
            e.score = std::stod(parts[4], &used);
            if (used != parts[4].size()) throw std::invalid_argument("score");
        } catch (const std::exception&) {
            throw ParseError("non-numeric topic, rank or score", line_no);
        }
        e.doc_id = parts[2];
        e.run_tag = parts[5];
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<RunEntry> parse_run_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_run(in);
}

}  // namespace calrev
