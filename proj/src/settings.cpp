#include "calrev/settings.hpp"

#include "calrev/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>

namespace calrev {

namespace {

template <typename T>
T convert(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        T out{};
        if constexpr (std::is_same_v<T, double>) out = std::stod(value, &used);
        else if constexpr (std::is_same_v<T, int>) out = std::stoi(value, &used);
        else out = static_cast<T>(std::stoll(value, &used));
        if (used != value.size()) throw std::invalid_argument(key);
        return out;
    } catch (const std::exception&) {
        throw ValidationError("setting " + key + " has invalid value '" + value + "'");
    }
}

// key is "section.name"; the environment name is CALREV_<NAME>.
void apply(Settings& s, const std::string& key, const std::string& value) {
    if (key == "server.host") s.host = value;
    else if (key == "server.port") s.port = convert<int>(key, value);
    else if (key == "server.data_dir") s.data_dir = value;
    else if (key == "server.ui_dir") s.ui_dir = value;
    else if (key == "server.lease_ttl") s.lease_ttl = convert<std::int64_t>(key, value);
    else if (key == "corpus.path") s.corpus = value;
    else if (key == "corpus.topics") s.topics = value;
    else if (key == "corpus.id_column") s.columns.doc_id = value;
    else if (key == "corpus.title_column") s.columns.title = value;
    else if (key == "corpus.abstract_column") s.columns.abstract = value;
    else if (key == "corpus.authors_column") s.columns.authors = value;
    else if (key == "corpus.year_column") s.columns.year = value;
    else if (key == "corpus.publisher_column") s.columns.publisher = value;
    else if (key == "learner.lambda") s.session.learner.lambda = convert<double>(key, value);
    else if (key == "learner.loop_type") s.session.learner.loop = parse_loop_type(value);
    else if (key == "learner.iterations") s.session.learner.iterations = convert<std::uint64_t>(key, value);
    else if (key == "stopping.a") s.session.stopping.a = convert<double>(key, value);
    else if (key == "stopping.b") s.session.stopping.b = convert<double>(key, value);
    else if (key == "session.mode") s.session.mode = parse_review_mode(value);
    else if (key == "session.budget") s.session.budget = convert<std::size_t>(key, value);
    else if (key == "session.seed") s.session.seed = convert<std::uint64_t>(key, value);
    else throw ValidationError("unknown setting '" + key + "'");
}

struct EnvKey {
    const char* env;
    const char* key;
};

constexpr EnvKey kEnvKeys[] = {
    {"CALREV_HOST", "server.host"},         {"CALREV_PORT", "server.port"},
    {"CALREV_DATA_DIR", "server.data_dir"}, {"CALREV_UI_DIR", "server.ui_dir"},
    {"CALREV_LEASE_TTL", "server.lease_ttl"}, {"CALREV_CORPUS", "corpus.path"},
    {"CALREV_TOPICS", "corpus.topics"},     {"CALREV_LAMBDA", "learner.lambda"},
    {"CALREV_LOOP_TYPE", "learner.loop_type"}, {"CALREV_ITERATIONS", "learner.iterations"},
    {"CALREV_A", "stopping.a"},             {"CALREV_B", "stopping.b"},
    {"CALREV_MODE", "session.mode"},        {"CALREV_BUDGET", "session.budget"},
    {"CALREV_SEED", "session.seed"},
};

}  // namespace

EnvLookup process_environment() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
}

void apply_ini_file(Settings& settings, const std::filesystem::path& path) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(path.string(), tree);
    } catch (const pt::ini_parser_error& e) {
        if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
        throw ParseError("bad settings file: " + e.message(), e.line());
    }
    for (const auto& [section, children] : tree) {
        if (children.empty()) throw ValidationError("setting '" + section + "' is outside a section");
        for (const auto& [name, node] : children) apply(settings, section + "." + name, node.data());
    }
}

void apply_environment(Settings& settings, const EnvLookup& env) {
    for (const auto& [name, key] : kEnvKeys) {
        if (auto v = env(name)) apply(settings, key, *v);
    }
}

}  // namespace calrev
