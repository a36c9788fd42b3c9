#include "calrev/cli.hpp"

#include "calrev/collection.hpp"
#include "calrev/errors.hpp"
#include "calrev/http_server.hpp"
#include "calrev/journal.hpp"
#include "calrev/run.hpp"
#include "calrev/service.hpp"
#include "calrev/session.hpp"
#include "calrev/settings.hpp"
#include "calrev/trec_eval.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace calrev {

namespace {

// Flags shared by the subcommands; unset ones leave Settings untouched.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> corpus;
    std::optional<std::string> topics;
    std::optional<std::string> data_dir;
    std::optional<std::string> mode;
    std::optional<std::vector<double>> lambda;
    std::optional<std::vector<std::string>> loop_type;
    std::optional<std::uint64_t> iterations;
    std::optional<double> a;
    std::optional<double> b;
    std::optional<std::size_t> budget;
    std::optional<std::uint64_t> seed;
    std::optional<int> port;
    std::optional<std::string> host;

    std::string qrels;
    std::string run;
    std::string method;
    std::size_t depth = kDefaultRunDepth;
    std::string tag;
    std::string csv;
    bool per_topic = false;
    double rbp_p = 0.5;
    std::optional<std::size_t> max_assessments;
    std::string transcript;
    double holdout = 0.5;
};

void add_session_flags(CLI::App& cmd, Flags& f) {
    cmd.add_option("--mode", f.mode, "Review mode: cal or scal");
    cmd.add_option("--iterations", f.iterations, "SGD iterations per training call");
    cmd.add_option("--a", f.a, "Stopping slope a in n >= a*m + b");
    cmd.add_option("--b", f.b, "Stopping overhead b in n >= a*m + b");
    cmd.add_option("--budget", f.budget, "S-CAL assessment budget per topic");
    cmd.add_option("--seed", f.seed, "Random seed");
}

void add_learner_flags(CLI::App& cmd, Flags& f, bool grid) {
    if (grid) {
        cmd.add_option("--lambda", f.lambda, "L2 regularization values to search")->delimiter(',');
        cmd.add_option("--loop-type", f.loop_type, "Loop types to search (uniform, balanced, roc-pair)")
            ->delimiter(',');
    } else {
        cmd.add_option("--lambda", f.lambda, "L2 regularization")->expected(1);
        cmd.add_option("--loop-type", f.loop_type, "uniform, balanced or roc-pair")->expected(1);
    }
}

Settings resolve(const Flags& f) {
    Settings s;
    if (f.config) apply_ini_file(s, *f.config);
    apply_environment(s, process_environment());
    if (f.corpus) s.corpus = *f.corpus;
    if (f.topics) s.topics = *f.topics;
    if (f.data_dir) s.data_dir = *f.data_dir;
    if (f.mode) s.session.mode = parse_review_mode(*f.mode);
    if (f.lambda && f.lambda->size() == 1) s.session.learner.lambda = f.lambda->front();
    if (f.loop_type && f.loop_type->size() == 1) s.session.learner.loop = parse_loop_type(f.loop_type->front());
    if (f.iterations) s.session.learner.iterations = *f.iterations;
    if (f.a) s.session.stopping.a = *f.a;
    if (f.b) s.session.stopping.b = *f.b;
    if (f.budget) s.session.budget = *f.budget;
    if (f.seed) s.session.seed = *f.seed;
    if (f.port) s.port = *f.port;
    if (f.host) s.host = *f.host;
    s.session.learner.validate();
    s.session.stopping.validate();
    return s;
}

void require_file(const std::filesystem::path& path, const char* what) {
    if (path.empty()) throw ValidationError(std::string("missing ") + what + " path");
    if (!std::filesystem::is_regular_file(path))
        throw ValidationError(std::string(what) + " file not found: " + path.string());
}

struct Loaded {
    std::shared_ptr<const Collection> collection;
    IngestResult ingest;
};

Loaded load_collection(const Settings& s, std::ostream& err) {
    require_file(s.corpus, "corpus");
    require_file(s.topics, "topics");
    Loaded out;
    out.ingest = parse_metadata_csv(s.corpus, s.columns);
    auto topics = parse_topics_xml(s.topics);
    if (out.ingest.duplicate_rows)
        err << "warning: dropped " << out.ingest.duplicate_rows << " rows with duplicate document ids\n";
    if (out.ingest.empty_id_rows)
        err << "warning: skipped " << out.ingest.empty_id_rows << " rows with an empty document id\n";

    std::optional<Vocabulary> vocab;
    const auto cache = s.data_dir / "vocabulary.tsv";
    if (std::filesystem::is_regular_file(cache)) vocab = Vocabulary::load(cache);
    out.collection = Collection::build(std::move(out.ingest.corpus), std::move(topics), std::move(vocab));
    return out;
}

Qrels load_qrels(const std::string& path, std::ostream& err) {
    require_file(path, "qrels");
    auto qrels = parse_qrels_file(path);
    if (qrels.duplicate_pairs)
        err << "warning: " << qrels.duplicate_pairs << " repeated qrels pairs (last grade kept)\n";
    return qrels;
}

int cmd_ingest(const Flags& f, std::ostream& out, std::ostream& err) {
    Settings s = resolve(f);
    require_file(s.corpus, "corpus");
    require_file(s.topics, "topics");
    auto ingest = parse_metadata_csv(s.corpus, s.columns);
    auto topics = parse_topics_xml(s.topics);
    if (ingest.duplicate_rows) err << "warning: dropped " << ingest.duplicate_rows << " duplicate rows\n";
    if (ingest.empty_id_rows) err << "warning: skipped " << ingest.empty_id_rows << " rows with empty ids\n";
    const std::size_t docs = ingest.corpus.size();
    const std::size_t topic_count = topics.size();
    auto collection = Collection::build(std::move(ingest.corpus), std::move(topics));
    std::filesystem::create_directories(s.data_dir);
    collection->vocabulary().save(s.data_dir / "vocabulary.tsv");
    out << "documents\t" << docs << '\n'
        << "duplicates\t" << ingest.duplicate_rows << '\n'
        << "empty_ids\t" << ingest.empty_id_rows << '\n'
        << "topics\t" << topic_count << '\n'
        << "vocabulary\t" << collection->vocabulary().size() << '\n'
        << "cache\t" << (s.data_dir / "vocabulary.tsv").string() << '\n';
    return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out, std::ostream& err) {
    Settings s = resolve(f);
    auto loaded = load_collection(s, err);
    const auto qrels = load_qrels(f.qrels, err);

    SimulatedAssessor oracle;
    for (const auto& [topic, docs] : qrels.topics) {
        for (const auto& [doc, grade] : docs) oracle.set(topic, doc, grade);
    }

    std::ofstream transcript_file;
    if (!f.transcript.empty()) {
        transcript_file.open(f.transcript);
        if (!transcript_file) throw IoError("cannot write " + f.transcript);
        transcript_file << "topic\tstep\tdoc_id\tlabel\tm\tn\tstop\n";
    }

    const std::vector<std::size_t> checkpoints{10, 25, 50, 100, 200, 300, 500, 1000, 2000, 5000};
    out << "topic\tassessed\tm\tn\trecall\tstopped\n";
    for (const auto& topic : loaded.collection->topics()) {
        const std::size_t relevant = oracle.relevant_count(topic.topic_id);
        if (relevant == 0) {
            err << "warning: topic " << topic.topic_id << " has no relevant qrels; skipped\n";
            continue;
        }
        Session session(topic, loaded.collection, s.session);
        std::size_t max = f.max_assessments.value_or(
            s.session.mode == ReviewMode::scal ? session.budget().value() : loaded.collection->corpus().size());
        const auto transcript = run_simulated(session, oracle, max);

        auto row = [&](std::size_t i) {
            const auto& t = transcript[i];
            char recall[32];
            std::snprintf(recall, sizeof recall, "%.4f", static_cast<double>(t.m) / static_cast<double>(relevant));
            out << topic.topic_id << '\t' << (i + 1) << '\t' << t.m << '\t' << t.n << '\t' << recall << '\t'
                << (t.stop ? "yes" : "no") << '\n';
        };
        for (std::size_t c : checkpoints) {
            if (c < transcript.size()) row(c - 1);
        }
        if (!transcript.empty()) row(transcript.size() - 1);

        if (transcript_file) {
            for (std::size_t i = 0; i < transcript.size(); ++i) {
                const auto& t = transcript[i];
                transcript_file << topic.topic_id << '\t' << (i + 1) << '\t' << t.doc_id << '\t' << t.label << '\t'
                                << t.m << '\t' << t.n << '\t' << (t.stop ? 1 : 0) << '\n';
            }
        }
    }
    return kExitOk;
}

int cmd_serve(const Flags& f, std::ostream& out, std::ostream& err) {
    Settings s = resolve(f);
    auto loaded = load_collection(s, err);
    ServiceConfig config{s.data_dir, s.lease_ttl, s.session};
    AssessorService service(loaded.collection, config);
    std::optional<std::filesystem::path> ui;
    if (!s.ui_dir.empty()) ui = s.ui_dir;
    HttpServer server(service, ui);
    if (!server.bind(s.host, s.port)) throw Error("cannot bind " + s.host + ":" + std::to_string(s.port));
    out << "listening on http://" << s.host << ':' << s.port << std::endl;
    return server.listen_after_bind() ? kExitOk : kExitRuntime;
}

int cmd_export_run(const Flags& f, std::ostream& out, std::ostream& err) {
    Settings s = resolve(f);
    auto loaded = load_collection(s, err);
    std::vector<OrderingMethod> methods;
    if (f.method.empty() || f.method == "all") {
        methods = {OrderingMethod::i, OrderingMethod::ii, OrderingMethod::iii};
    } else {
        methods = {parse_ordering_method(f.method)};
    }

    std::vector<Session> sessions;
    for (const auto& topic : loaded.collection->topics()) {
        Session session(topic, loaded.collection, s.session);
        const auto path = s.data_dir / ("journal-" + std::to_string(topic.topic_id) + ".jsonl");
        replay_journal(read_journal(path), session);
        session.refresh_model();
        sessions.push_back(std::move(session));
    }

    for (auto method : methods) {
        std::vector<RunEntry> entries;
        const std::string tag = f.tag.empty() ? "calrev-" + std::string(to_string(method)) : f.tag;
        for (const auto& session : sessions) {
            auto run = build_run(session, method, f.depth, tag);
            entries.insert(entries.end(), run.begin(), run.end());
        }
        std::filesystem::path path;
        if (f.run.empty()) {
            std::filesystem::create_directories(s.data_dir);
            path = s.data_dir / ("run-" + std::string(to_string(method)) + ".txt");
        } else if (methods.size() == 1) {
            path = f.run;
        } else {
            path = f.run + "-" + std::string(to_string(method));
        }
        write_run_file(entries, path);
        out << "method " << to_string(method) << '\t' << entries.size() << " entries\t" << path.string() << '\n';
    }
    return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out, std::ostream& err) {
    require_file(f.run, "run");
    const auto qrels = load_qrels(f.qrels, err);
    const auto run = parse_run_file(f.run);
    EvalOptions options;
    options.rbp_p = f.rbp_p;
    const auto report = evaluate(run, qrels, options);
    for (int t : report.skipped_topics) err << "warning: run topic " << t << " is not in the qrels; skipped\n";
    write_report_text(report, out, f.per_topic);
    if (!f.csv.empty()) {
        std::ofstream csv(f.csv);
        if (!csv) throw IoError("cannot write " + f.csv);
        write_report_csv(report, csv);
    }
    return kExitOk;
}

// Mean holdout average precision for one grid point.
double holdout_map(const Collection& collection, const Qrels& qrels, const LearnerConfig& learner,
                   double holdout_fraction, std::uint64_t seed) {
    double sum = 0.0;
    std::size_t topics = 0;
    for (const auto& topic : collection.topics()) {
        const auto* judged = qrels.topic(topic.topic_id);
        if (!judged) continue;
        std::vector<std::pair<std::string, int>> labeled;
        for (const auto& [doc, grade] : *judged) {
            if (collection.corpus().contains(doc)) labeled.emplace_back(doc, grade);
        }
        std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(topic.topic_id));
        std::shuffle(labeled.begin(), labeled.end(), rng);
        const auto cut = static_cast<std::size_t>(holdout_fraction * static_cast<double>(labeled.size()));
        std::map<std::string, int> holdout(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(cut));
        if (std::none_of(holdout.begin(), holdout.end(), [](const auto& kv) { return kv.second >= 1; })) continue;

        std::vector<LabeledExample> examples{{collection.synthetic_vector(topic.topic_id), Label::relevant}};
        bool has_negative = false;
        for (std::size_t i = cut; i < labeled.size(); ++i) {
            const bool rel = labeled[i].second >= kPartiallyRelevant;
            has_negative |= !rel;
            examples.push_back({*collection.find_vector(labeled[i].first),
                                rel ? Label::relevant : Label::not_relevant});
        }
        if (!has_negative) {
            std::vector<std::size_t> pool;
            for (std::size_t pos = 0; pos < collection.corpus().size(); ++pos) {
                const auto& id = collection.corpus().at(pos).doc_id;
                if (!judged->contains(id)) pool.push_back(pos);
            }
            std::vector<std::size_t> sample;
            std::sample(pool.begin(), pool.end(), std::back_inserter(sample), kAugmentationSize, rng);
            for (auto pos : sample) examples.push_back({collection.vector(pos), Label::not_relevant});
        }

        LearnerConfig config = learner;
        config.seed = seed + static_cast<std::uint64_t>(topic.topic_id);
        const auto model = train(examples, config, collection.vocabulary().size());
        std::vector<std::string> candidates;
        for (const auto& [doc, grade] : holdout) candidates.push_back(doc);
        std::vector<std::string> ranked;
        for (const auto& sd : rank(model, candidates, collection.lookup())) ranked.push_back(sd.doc_id);
        sum += evaluate_topic(ranked, holdout, EvalOptions{}).average_precision;
        ++topics;
    }
    if (topics == 0) throw ValidationError("no topic has relevant documents in its holdout split");
    return sum / static_cast<double>(topics);
}

int cmd_tune(const Flags& f, std::ostream& out, std::ostream& err) {
    Settings s = resolve(f);
    auto loaded = load_collection(s, err);
    const auto qrels = load_qrels(f.qrels, err);
    if (!(f.holdout > 0.0 && f.holdout < 1.0)) throw ValidationError("--holdout must be in (0, 1)");

    std::vector<double> lambdas = f.lambda.value_or(std::vector<double>{s.session.learner.lambda});
    std::vector<LoopType> loops;
    if (f.loop_type) {
        for (const auto& name : *f.loop_type) loops.push_back(parse_loop_type(name));
    } else {
        loops.push_back(s.session.learner.loop);
    }
    if (lambdas.empty() || loops.empty()) throw ValidationError("empty tuning grid");

    out << "lambda\tloop_type\tmap\n";
    double best_map = -1.0;
    double best_lambda = 0.0;
    LoopType best_loop = loops.front();
    for (double lambda : lambdas) {
        for (LoopType loop : loops) {
            LearnerConfig config = s.session.learner;
            config.lambda = lambda;
            config.loop = loop;
            config.validate();
            const double map = holdout_map(*loaded.collection, qrels, config, f.holdout, s.session.seed);
            char line[128];
            std::snprintf(line, sizeof line, "%g\t%s\t%.4f\n", lambda, std::string(to_string(loop)).c_str(), map);
            out << line;
            if (map > best_map) {
                best_map = map;
                best_lambda = lambda;
                best_loop = loop;
            }
        }
    }
    char line[128];
    std::snprintf(line, sizeof line, "best\tlambda=%g\tloop_type=%s\tmap=%.4f\n", best_lambda,
                  std::string(to_string(best_loop)).c_str(), best_map);
    out << line;
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"High-recall review engine: continuous active learning, TREC runs and evaluation", "calrev"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config, "INI settings file");

    auto* ingest = app.add_subcommand("ingest", "Parse the corpus and topics, cache the vocabulary");
    auto* simulate = app.add_subcommand("simulate", "Run the review loop against qrels as the assessor");
    auto* serve = app.add_subcommand("serve", "Start the assessor HTTP service");
    auto* export_run = app.add_subcommand("export-run", "Write TREC runs from the judgment journals");
    auto* eval = app.add_subcommand("eval", "Score a run file against qrels");
    auto* tune = app.add_subcommand("tune", "Grid-search lambda x loop type by holdout MAP");

    for (auto* cmd : {ingest, simulate, serve, export_run, tune}) {
        cmd->add_option("--corpus", f.corpus, "Metadata CSV");
        cmd->add_option("--topics", f.topics, "Topics XML");
        cmd->add_option("--data-dir", f.data_dir, "Directory for caches, journals and runs");
    }
    for (auto* cmd : {simulate, serve, export_run, tune}) add_session_flags(*cmd, f);
    for (auto* cmd : {simulate, serve, export_run}) add_learner_flags(*cmd, f, false);
    add_learner_flags(*tune, f, true);
    for (auto* cmd : {simulate, eval, tune}) cmd->add_option("--qrels", f.qrels, "Qrels file")->required();

    simulate->add_option("--max-assessments", f.max_assessments, "Cap on judgments per topic");
    simulate->add_option("--transcript", f.transcript, "Write the full per-judgment transcript (TSV)");
    serve->add_option("--port", f.port, "Listen port");
    serve->add_option("--host", f.host, "Listen address");
    export_run->add_option("--method", f.method, "i, ii, iii or all (default all)");
    export_run->add_option("--run", f.run, "Output path (suffixed with -<method> when writing all)");
    export_run->add_option("--depth", f.depth, "Documents per topic")->check(CLI::PositiveNumber);
    export_run->add_option("--tag", f.tag, "Run tag");
    eval->add_option("--run", f.run, "Run file")->required();
    eval->add_option("--csv", f.csv, "Also write metric,topic,value CSV here");
    eval->add_flag("--per-topic", f.per_topic, "Print per-topic values");
    eval->add_option("--rbp-p", f.rbp_p, "RBP persistence");
    tune->add_option("--holdout", f.holdout, "Fraction of labeled documents held out");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        if (ingest->parsed()) return cmd_ingest(f, out, err);
        if (simulate->parsed()) return cmd_simulate(f, out, err);
        if (serve->parsed()) return cmd_serve(f, out, err);
        if (export_run->parsed()) return cmd_export_run(f, out, err);
        if (eval->parsed()) return cmd_eval(f, out, err);
        if (tune->parsed()) return cmd_tune(f, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitValidation;
}

}  // namespace calrev
