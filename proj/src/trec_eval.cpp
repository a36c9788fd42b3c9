#include "calrev/trec_eval.hpp"

#include "calrev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

namespace calrev {

std::optional<int> Qrels::grade(int topic_id, const std::string& doc_id) const {
    const auto* t = topic(topic_id);
    if (!t) return std::nullopt;
    auto it = t->find(doc_id);
    if (it == t->end()) return std::nullopt;
    return it->second;
}

const std::map<std::string, int>* Qrels::topic(int topic_id) const {
    auto it = topics.find(topic_id);
    return it == topics.end() ? nullptr : &it->second;
}

std::size_t Qrels::relevant_count(int topic_id) const {
    const auto* t = topic(topic_id);
    if (!t) return 0;
    return static_cast<std::size_t>(std::count_if(t->begin(), t->end(), [](const auto& kv) { return kv.second >= 1; }));
}

Qrels parse_qrels(std::istream& in) {
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::vector<std::string> parts;
        for (std::string f; fields >> f;) parts.push_back(std::move(f));
        if (parts.empty()) continue;
        if (parts.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(parts.size()), line_no);
        int topic = 0;
        int grade = 0;
        try {
            std::size_t used = 0;
            topic = std::stoi(parts[0], &used);
            if (used != parts[0].size()) throw std::invalid_argument("topic");
            grade = std::stoi(parts[3], &used);
            if (used != parts[3].size()) throw std::invalid_argument("grade");
        } catch (const std::exception&) {
            throw ParseError("non-numeric topic or grade", line_no);
        }
        if (grade < 0 || grade > 2) throw ParseError("grade " + parts[3] + " is not one of 0, 1, 2", line_no);
        auto [it, inserted] = qrels.topics[topic].insert_or_assign(parts[2], grade);
        if (!inserted) ++qrels.duplicate_pairs;
    }
    return qrels;
}

Qrels parse_qrels_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_qrels(in);
}

void EvalOptions::validate() const {
    if (!(rbp_p > 0.0 && rbp_p < 1.0)) throw ValidationError("RBP persistence must be in (0, 1)");
    for (int k : ndcg_cutoffs) {
        if (k < 1) throw ValidationError("NDCG cutoff must be >= 1");
    }
    for (int k : precision_cutoffs) {
        if (k < 1) throw ValidationError("precision cutoff must be >= 1");
    }
}

TopicMetrics evaluate_topic(std::span<const std::string> ranked_in, const std::map<std::string, int>& judged,
                            const EvalOptions& options) {
    // Drop repeated documents, keeping the first (best) rank.
    std::vector<std::string_view> ranked;
    {
        std::unordered_set<std::string_view> seen;
        for (const auto& d : ranked_in) {
            if (seen.insert(d).second) ranked.push_back(d);
        }
    }
    auto grade_of = [&](std::string_view doc) -> std::optional<int> {
        auto it = judged.find(std::string(doc));
        if (it == judged.end()) return std::nullopt;
        return it->second;
    };

    TopicMetrics t;
    std::vector<int> grades;
    std::size_t judged_nonrel = 0;
    for (const auto& [doc, g] : judged) {
        grades.push_back(g);
        if (g >= 1) ++t.relevant;
        else ++judged_nonrel;
    }
    t.retrieved = ranked.size();

    const double R = static_cast<double>(t.relevant);
    const double bpref_denominator = static_cast<double>(std::min(t.relevant, judged_nonrel));
    const double p = options.rbp_p;

    std::size_t rel_so_far = 0;
    std::size_t nonrel_so_far = 0;
    double ap_sum = 0.0;
    double bpref_sum = 0.0;
    double weight = 1.0 - p;  // (1 - p) p^(i-1)
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto g = grade_of(ranked[i]);
        const bool rel = g && *g >= 1;
        if (rel) {
            ++rel_so_far;
            ap_sum += static_cast<double>(rel_so_far) / static_cast<double>(i + 1);
            if (nonrel_so_far > 0) {
                bpref_sum += 1.0 - static_cast<double>(std::min(nonrel_so_far, t.relevant)) / bpref_denominator;
            } else {
                bpref_sum += 1.0;
            }
            t.rbp += weight;
        } else if (g) {
            ++nonrel_so_far;
        } else {
            t.rbp_residual += weight;
        }
        if (i + 1 == t.relevant) t.r_precision = static_cast<double>(rel_so_far) / R;
        weight *= p;
    }
    t.relevant_retrieved = rel_so_far;
    t.rbp_residual += std::pow(p, static_cast<double>(ranked.size()));
    if (t.relevant > 0) {
        t.average_precision = ap_sum / R;
        t.bpref = bpref_sum / R;
        if (ranked.size() < t.relevant) t.r_precision = static_cast<double>(rel_so_far) / R;
    }

    for (int k : options.precision_cutoffs) {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(k); ++i) {
            const auto g = grade_of(ranked[i]);
            if (g && *g >= 1) ++hits;
        }
        t.precision[k] = static_cast<double>(hits) / static_cast<double>(k);
    }

    std::sort(grades.begin(), grades.end(), std::greater<>());
    for (int k : options.ndcg_cutoffs) {
        double dcg = 0.0;
        double ideal = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
            const double discount = 1.0 / std::log2(static_cast<double>(i) + 2.0);
            if (i < ranked.size()) {
                const auto g = grade_of(ranked[i]);
                if (g) dcg += *g * discount;
            }
            if (i < grades.size()) ideal += grades[i] * discount;
        }
        t.ndcg[k] = ideal > 0.0 ? dcg / ideal : 0.0;
    }
    return t;
}

MetricsReport evaluate(std::span<const RunEntry> run, const Qrels& qrels, const EvalOptions& options) {
    options.validate();
    MetricsReport report;
    report.options = options;

    std::map<int, std::vector<const RunEntry*>> by_topic;
    for (const auto& e : run) by_topic[e.topic_id].push_back(&e);
    for (const auto& [topic, entries] : by_topic) {
        if (!qrels.topic(topic)) report.skipped_topics.push_back(topic);
    }

    for (const auto& [topic_id, judged] : qrels.topics) {
        std::vector<std::string> ranked;
        if (auto it = by_topic.find(topic_id); it != by_topic.end()) {
            auto entries = it->second;
            std::stable_sort(entries.begin(), entries.end(),
                             [](const RunEntry* a, const RunEntry* b) { return a->rank < b->rank; });
            for (const auto* e : entries) ranked.push_back(e->doc_id);
        }
        auto t = evaluate_topic(ranked, judged, options);
        t.topic_id = topic_id;
        report.topics.push_back(std::move(t));
    }

    auto& mean = report.mean;
    const double count = static_cast<double>(report.topics.size());
    for (const auto& t : report.topics) {
        mean.retrieved += t.retrieved;
        mean.relevant += t.relevant;
        mean.relevant_retrieved += t.relevant_retrieved;
        mean.average_precision += t.average_precision / count;
        mean.bpref += t.bpref / count;
        mean.r_precision += t.r_precision / count;
        mean.rbp += t.rbp / count;
        mean.rbp_residual += t.rbp_residual / count;
        for (const auto& [k, v] : t.ndcg) mean.ndcg[k] += v / count;
        for (const auto& [k, v] : t.precision) mean.precision[k] += v / count;
    }
    return report;
}

namespace {

std::string rbp_name(double p) {
    std::ostringstream s;
    s << "rbp_" << p;
    return s.str();
}

template <typename Emit>
void for_each_metric(const TopicMetrics& t, const EvalOptions& options, Emit emit) {
    emit("num_ret", static_cast<double>(t.retrieved), true);
    emit("num_rel", static_cast<double>(t.relevant), true);
    emit("num_rel_ret", static_cast<double>(t.relevant_retrieved), true);
    emit("map", t.average_precision, false);
    emit("bpref", t.bpref, false);
    emit("Rprec", t.r_precision, false);
    for (const auto& [k, v] : t.ndcg) emit("ndcg_cut_" + std::to_string(k), v, false);
    for (const auto& [k, v] : t.precision) emit("P_" + std::to_string(k), v, false);
    emit(rbp_name(options.rbp_p), t.rbp, false);
    emit(rbp_name(options.rbp_p) + "_residual", t.rbp_residual, false);
}

std::string format_value(double v, bool integral) {
    char buf[64];
    if (integral) std::snprintf(buf, sizeof buf, "%.0f", v);
    else std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

void write_report_text(const MetricsReport& report, std::ostream& out, bool per_topic) {
    auto emit_topic = [&](const TopicMetrics& t, const std::string& label) {
        for_each_metric(t, report.options, [&](const std::string& name, double v, bool integral) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%-22s\t%s\t%s\n", name.c_str(), label.c_str(),
                          format_value(v, integral).c_str());
            out << buf;
        });
    };
    if (per_topic) {
        for (const auto& t : report.topics) emit_topic(t, std::to_string(t.topic_id));
    }
    emit_topic(report.mean, "all");
}

void write_report_csv(const MetricsReport& report, std::ostream& out) {
    out << "metric,topic,value\n";
    auto emit_topic = [&](const TopicMetrics& t, const std::string& label) {
        for_each_metric(t, report.options, [&](const std::string& name, double v, bool integral) {
            char buf[64];
            if (integral) std::snprintf(buf, sizeof buf, "%.0f", v);
            else std::snprintf(buf, sizeof buf, "%.17g", v);
            out << name << ',' << label << ',' << buf << '\n';
        });
    };
    for (const auto& t : report.topics) emit_topic(t, std::to_string(t.topic_id));
    emit_topic(report.mean, "all");
}

}  // namespace calrev
