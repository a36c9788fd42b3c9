#include "calrev/learner.hpp"

#include "calrev/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace calrev {

namespace {

constexpr std::string_view kModelMagic = "CALREV-MODEL";
constexpr int kModelVersion = 1;

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double log1p_exp(double z) {
    // log(1 + exp(z)) without overflow
    return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

// Dense weights stored as scale * values so the per-step L2 shrink is O(1).
// The last slot is the bias.
class ScaledWeights {
public:
    explicit ScaledWeights(std::size_t dimension) : values_(dimension + 1, 0.0) {}

    std::size_t bias_slot() const { return values_.size() - 1; }

    double dot(const SparseVector& x, double bias_feature) const {
        double sum = 0.0;
        for (const auto& e : x.entries) {
            if (e.term < bias_slot()) sum += values_[e.term] * e.weight;
        }
        sum += values_[bias_slot()] * bias_feature;
        return sum * scale_;
    }

    void add(const SparseVector& x, double bias_feature, double coef) {
        const double c = coef / scale_;
        for (const auto& e : x.entries) {
            if (e.term >= bias_slot()) continue;
            double& v = values_[e.term];
            squared_norm_ += (2.0 * v * c * e.weight + c * c * e.weight * e.weight) * scale_ * scale_;
            v += c * e.weight;
        }
        if (bias_feature != 0.0) {
            double& v = values_[bias_slot()];
            squared_norm_ += (2.0 * v * c * bias_feature + c * c * bias_feature * bias_feature) * scale_ * scale_;
            v += c * bias_feature;
        }
    }

    void scale_by(double factor) {
        if (factor == 0.0) {
            std::fill(values_.begin(), values_.end(), 0.0);
            scale_ = 1.0;
            squared_norm_ = 0.0;
            return;
        }
        scale_ *= factor;
        squared_norm_ *= factor * factor;
        if (std::abs(scale_) < 1e-9) fold_scale();
    }

    void project(double radius) {
        if (squared_norm_ > radius * radius) scale_by(radius / std::sqrt(squared_norm_));
    }

    std::vector<double> materialize() {
        fold_scale();
        return values_;
    }

private:
    void fold_scale() {
        for (double& v : values_) v *= scale_;
        scale_ = 1.0;
        double sq = 0.0;
        for (double v : values_) sq += v * v;
        squared_norm_ = sq;
    }

    std::vector<double> values_;
    double scale_ = 1.0;
    double squared_norm_ = 0.0;
};

SparseVector difference(const SparseVector& a, const SparseVector& b) {
    SparseVector out;
    out.entries.reserve(a.size() + b.size());
    auto ia = a.entries.begin();
    auto ib = b.entries.begin();
    while (ia != a.entries.end() || ib != b.entries.end()) {
        if (ib == b.entries.end() || (ia != a.entries.end() && ia->term < ib->term)) {
            out.entries.push_back(*ia++);
        } else if (ia == a.entries.end() || ib->term < ia->term) {
            out.entries.push_back({ib->term, -ib->weight});
            ++ib;
        } else {
            const double w = ia->weight - ib->weight;
            if (w != 0.0) out.entries.push_back({ia->term, w});
            ++ia;
            ++ib;
        }
    }
    return out;
}

double flat_dot(std::span<const double> w, const SparseVector& x, double bias_feature) {
    const std::size_t dim = w.size() - 1;
    double sum = 0.0;
    for (const auto& e : x.entries) {
        if (e.term < dim) sum += w[e.term] * e.weight;
    }
    return sum + w[dim] * bias_feature;
}

void flat_axpy(std::vector<double>& g, const SparseVector& x, double bias_feature, double coef) {
    const std::size_t dim = g.size() - 1;
    for (const auto& e : x.entries) {
        if (e.term < dim) g[e.term] += coef * e.weight;
    }
    g[dim] += coef * bias_feature;
}

struct SplitExamples {
    std::vector<const LabeledExample*> positives;
    std::vector<const LabeledExample*> negatives;
};

SplitExamples split(std::span<const LabeledExample> examples) {
    SplitExamples s;
    for (const auto& ex : examples) (ex.label == Label::relevant ? s.positives : s.negatives).push_back(&ex);
    return s;
}

double sign_of(Label label) { return label == Label::relevant ? 1.0 : -1.0; }

}  // namespace

std::string_view to_string(LoopType loop) {
    switch (loop) {
        case LoopType::uniform: return "uniform";
        case LoopType::balanced: return "balanced";
        case LoopType::roc_pair: return "roc-pair";
    }
    return "unknown";
}

LoopType parse_loop_type(std::string_view name) {
    if (name == "uniform") return LoopType::uniform;
    if (name == "balanced") return LoopType::balanced;
    if (name == "roc-pair" || name == "roc_pair" || name == "roc") return LoopType::roc_pair;
    throw ValidationError("unknown loop type '" + std::string(name) + "' (expected uniform, balanced or roc-pair)");
}

void LearnerConfig::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("lambda must be a positive number");
    if (iterations < 1) throw ValidationError("iterations must be at least 1");
}

double logistic_loss_slope(double margin) { return -sigmoid(-margin); }

ModelState train(std::span<const LabeledExample> examples, const LearnerConfig& config, std::size_t dimension) {
    config.validate();
    const auto classes = split(examples);
    if (classes.positives.empty()) throw TrainingError("training set has no relevant examples");
    if (classes.negatives.empty()) throw TrainingError("training set has no not-relevant examples");

    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick_any(0, examples.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_pos(0, classes.positives.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neg(0, classes.negatives.size() - 1);

    ScaledWeights w(dimension);
    const double radius = 1.0 / std::sqrt(config.lambda);

    for (std::uint64_t t = 1; t <= config.iterations; ++t) {
        const double eta = 1.0 / (config.lambda * static_cast<double>(t));
        if (config.loop == LoopType::roc_pair) {
            const auto& pos = *classes.positives[pick_pos(rng)];
            const auto& neg = *classes.negatives[pick_neg(rng)];
            const SparseVector x = difference(pos.vector, neg.vector);
            const double coef = -logistic_loss_slope(w.dot(x, 0.0));
            w.scale_by(1.0 - eta * config.lambda);
            w.add(x, 0.0, eta * coef);
        } else {
            const LabeledExample* ex = nullptr;
            if (config.loop == LoopType::uniform) {
                ex = &examples[pick_any(rng)];
            } else {
                ex = (t % 2 == 1) ? classes.positives[pick_pos(rng)] : classes.negatives[pick_neg(rng)];
            }
            const double y = sign_of(ex->label);
            const double coef = -y * logistic_loss_slope(y * w.dot(ex->vector, 1.0));
            w.scale_by(1.0 - eta * config.lambda);
            w.add(ex->vector, 1.0, eta * coef);
        }
        w.project(radius);
    }

    ModelState model;
    model.weights = w.materialize();
    model.bias = model.weights.back();
    model.weights.pop_back();
    model.config = config;
    model.positives = classes.positives.size();
    model.negatives = classes.negatives.size();
    return model;
}

double score(const ModelState& model, const SparseVector& vector) {
    double sum = model.bias;
    for (const auto& e : vector.entries) {
        if (e.term < model.weights.size()) sum += model.weights[e.term] * e.weight;
    }
    return sum;
}

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
}

std::vector<ScoredDoc> rank(const ModelState& model, std::span<const std::string> candidates,
                            const VectorLookup& vectors) {
    std::vector<ScoredDoc> ranked;
    ranked.reserve(candidates.size());
    for (const auto& id : candidates) {
        const SparseVector* v = vectors(id);
        if (!v) throw NotFoundError("no feature vector for document '" + id + "'");
        ranked.push_back({id, score(model, *v)});
    }
    std::sort(ranked.begin(), ranked.end(), ranks_before);
    return ranked;
}

std::vector<std::string> top_terms(const ModelState& model, const DocumentRecord& doc, const Vocabulary& vocab,
                                   std::size_t k) {
    struct Contribution {
        const std::string* term;
        double value;
    };
    std::vector<Contribution> positive;
    for (const auto& e : vectorize(doc, vocab).entries) {
        if (e.term >= model.weights.size()) continue;
        const double c = model.weights[e.term] * e.weight;
        if (c > 0.0) positive.push_back({&vocab.term(e.term), c});
    }
    std::sort(positive.begin(), positive.end(), [](const Contribution& a, const Contribution& b) {
        if (a.value != b.value) return a.value > b.value;
        return *a.term < *b.term;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < positive.size() && i < k; ++i) out.push_back(*positive[i].term);
    return out;
}

double training_objective(std::span<const double> w, std::span<const LabeledExample> examples, double lambda,
                          LoopType loop) {
    double reg = 0.0;
    for (double v : w) reg += v * v;
    reg *= lambda / 2.0;

    const auto classes = split(examples);
    double loss = 0.0;
    switch (loop) {
        case LoopType::uniform:
            for (const auto& ex : examples) loss += log1p_exp(-sign_of(ex.label) * flat_dot(w, ex.vector, 1.0));
            loss /= static_cast<double>(examples.size());
            break;
        case LoopType::balanced: {
            double pos = 0.0;
            double neg = 0.0;
            for (const auto* ex : classes.positives) pos += log1p_exp(-flat_dot(w, ex->vector, 1.0));
            for (const auto* ex : classes.negatives) neg += log1p_exp(flat_dot(w, ex->vector, 1.0));
            loss = 0.5 * pos / static_cast<double>(classes.positives.size()) +
                   0.5 * neg / static_cast<double>(classes.negatives.size());
            break;
        }
        case LoopType::roc_pair:
            for (const auto* p : classes.positives) {
                for (const auto* n : classes.negatives)
                    loss += log1p_exp(-flat_dot(w, difference(p->vector, n->vector), 0.0));
            }
            loss /= static_cast<double>(classes.positives.size() * classes.negatives.size());
            break;
    }
    return reg + loss;
}

std::vector<double> training_gradient(std::span<const double> w, std::span<const LabeledExample> examples,
                                      double lambda, LoopType loop) {
    std::vector<double> g(w.begin(), w.end());
    for (double& v : g) v *= lambda;

    const auto classes = split(examples);
    switch (loop) {
        case LoopType::uniform: {
            const double scale = 1.0 / static_cast<double>(examples.size());
            for (const auto& ex : examples) {
                const double y = sign_of(ex.label);
                flat_axpy(g, ex.vector, 1.0, scale * y * logistic_loss_slope(y * flat_dot(w, ex.vector, 1.0)));
            }
            break;
        }
        case LoopType::balanced: {
            const double ps = 0.5 / static_cast<double>(classes.positives.size());
            const double ns = 0.5 / static_cast<double>(classes.negatives.size());
            for (const auto* ex : classes.positives)
                flat_axpy(g, ex->vector, 1.0, ps * logistic_loss_slope(flat_dot(w, ex->vector, 1.0)));
            for (const auto* ex : classes.negatives)
                flat_axpy(g, ex->vector, 1.0, -ns * logistic_loss_slope(-flat_dot(w, ex->vector, 1.0)));
            break;
        }
        case LoopType::roc_pair: {
            const double scale =
                1.0 / static_cast<double>(classes.positives.size() * classes.negatives.size());
            for (const auto* p : classes.positives) {
                for (const auto* n : classes.negatives) {
                    const SparseVector x = difference(p->vector, n->vector);
                    flat_axpy(g, x, 0.0, scale * logistic_loss_slope(flat_dot(w, x, 0.0)));
                }
            }
            break;
        }
    }
    return g;
}

namespace {

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double parse_hex(const std::string& s, std::size_t line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError("bad number '" + s + "' in model file", line);
    return v;
}

}  // namespace

void save_model(const ModelState& model, std::ostream& out) {
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "config " << hex(model.config.lambda) << ' ' << to_string(model.config.loop) << ' '
        << model.config.iterations << ' ' << model.config.seed << '\n';
    out << "trained " << model.positives << ' ' << model.negatives << '\n';
    out << model.weights.size() << ' ' << hex(model.bias) << '\n';
    for (double w : model.weights) out << hex(w) << '\n';
}

void save_model(const ModelState& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    save_model(model, out);
    if (!out) throw IoError("error writing " + path.string());
}

ModelState load_model(std::istream& in) {
    ModelState model;
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> std::istringstream {
        if (!std::getline(in, line)) throw ParseError("truncated model file", line_no + 1);
        ++line_no;
        return std::istringstream(line);
    };

    {
        auto s = next_line();
        std::string magic;
        int version = 0;
        if (!(s >> magic >> version) || magic != kModelMagic) throw ParseError("not a model file", line_no);
        if (version != kModelVersion)
            throw ParseError("unsupported model format version " + std::to_string(version), line_no);
    }
    {
        auto s = next_line();
        std::string tag, lambda, loop;
        if (!(s >> tag >> lambda >> loop >> model.config.iterations >> model.config.seed) || tag != "config")
            throw ParseError("bad config line", line_no);
        model.config.lambda = parse_hex(lambda, line_no);
        model.config.loop = parse_loop_type(loop);
    }
    {
        auto s = next_line();
        std::string tag;
        if (!(s >> tag >> model.positives >> model.negatives) || tag != "trained")
            throw ParseError("bad trained line", line_no);
    }
    std::size_t size = 0;
    {
        auto s = next_line();
        std::string bias;
        if (!(s >> size >> bias)) throw ParseError("bad size line", line_no);
        model.bias = parse_hex(bias, line_no);
    }
    model.weights.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        next_line();
        model.weights.push_back(parse_hex(line, line_no));
    }
    return model;
}

ModelState load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return load_model(in);
}

}  // namespace calrev
